"""Hazard caption selection from precomputed per-frame caption candidates.

Two strategies: whole-text aggregation, where each candidate adds its frame's
bounding-box area to its normalized text and the best-scored text wins, and a
word-level variant that scores individual words (boosting meaningful and
off-street words, damping stop words) and greedily packs the best words into
a fixed character budget.
"""

from __future__ import annotations

import string
from dataclasses import dataclass
from enum import Enum
from typing import Mapping, Sequence

from dashhazard.model import CaptionCandidate

DEFAULT_CHAR_LIMIT = 35

# Fixed 50-word list; override via WordConfig for other languages or domains.
DEFAULT_STOPWORDS = frozenset(
    """
    a an the and or but if then than as at by for with about into through over
    under to from up down in out on off all any both each some no not only so
    very is are was were be been it its this that these those of
    """.split()
)

# Things that do not belong on a road; their words get an extra boost.
DEFAULT_OFFSTREET_WORDS = frozenset(
    """
    dog cat deer cow kangaroo horse sheep goat pig bird chicken duck moose elk
    bear fox rabbit squirrel boar wolf animal tree branch log rock debris
    """.split()
)


class CaptionMode(Enum):
    ALGORITHM2 = "alg2"
    WORD_LEVEL = "word35"


@dataclass(frozen=True)
class WordConfig:
    stopwords: frozenset[str] = DEFAULT_STOPWORDS
    offstreet_words: frozenset[str] = DEFAULT_OFFSTREET_WORDS
    meaningful_multiplier: float = 2.0
    stopword_multiplier: float = 0.5
    offstreet_multiplier: float = 2.0
    char_limit: int = DEFAULT_CHAR_LIMIT
    divide_area_by_words: bool = False

    def __post_init__(self) -> None:
        for name in ("meaningful_multiplier", "stopword_multiplier", "offstreet_multiplier"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.char_limit < 1:
            raise ValueError("char_limit must be at least 1")


def normalize_text(text: str) -> str:
    """Lowercase and collapse internal whitespace."""
    return " ".join(text.lower().split())


def tokenize(text: str) -> list[str]:
    """Whitespace tokens of the normalized text with punctuation stripped from the edges."""
    tokens = (token.strip(string.punctuation) for token in normalize_text(text).split())
    return [t for t in tokens if t]


def caption_table(
    candidates: Sequence[CaptionCandidate], areas: Mapping[int, float]
) -> dict[str, float]:
    """Accumulated text -> score table: each candidate adds its frame's box area."""
    table: dict[str, float] = {}
    for candidate in candidates:
        if candidate.frame not in areas:
            raise ValueError(f"no bbox area known for frame {candidate.frame}")
        key = normalize_text(candidate.text)
        table[key] = table.get(key, 0.0) + areas[candidate.frame]
    return table


def aggregate_captions(
    candidates: Sequence[CaptionCandidate], areas: Mapping[int, float]
) -> str | None:
    """Best-scored normalized text; ties go to the lexicographically smallest. None if empty."""
    table = caption_table(candidates, areas)
    if not table:
        return None
    return min(table, key=lambda text: (-table[text], text))


def word_scores(
    candidates: Sequence[CaptionCandidate],
    areas: Mapping[int, float],
    cfg: WordConfig,
) -> dict[str, float]:
    """Word -> score table.

    Every word of a candidate is credited with that candidate's full box area
    (or an equal share when divide_area_by_words is set), then multipliers
    apply: stop words are damped, other words boosted, and off-street words
    boosted again on top.
    """
    raw: dict[str, float] = {}
    for candidate in candidates:
        if candidate.frame not in areas:
            raise ValueError(f"no bbox area known for frame {candidate.frame}")
        tokens = tokenize(candidate.text)
        if not tokens:
            continue
        credit = areas[candidate.frame]
        if cfg.divide_area_by_words:
            credit /= len(tokens)
        for token in tokens:
            raw[token] = raw.get(token, 0.0) + credit

    scored = {}
    for word, score in raw.items():
        multiplier = (
            cfg.stopword_multiplier if word in cfg.stopwords else cfg.meaningful_multiplier
        )
        if word in cfg.offstreet_words:
            multiplier *= cfg.offstreet_multiplier
        scored[word] = score * multiplier
    return scored


def build_caption(scores: Mapping[str, float], cfg: WordConfig) -> str:
    """Pack the highest-scoring words into at most char_limit characters.

    Words are taken in score order (ties alphabetical), separated by single
    spaces; a word that would overflow is skipped and later, shorter words
    may still be used. A top word longer than the whole budget is truncated.
    """
    ordered = sorted(scores, key=lambda word: (-scores[word], word))
    if not ordered:
        return ""
    if len(ordered[0]) > cfg.char_limit:
        return ordered[0][: cfg.char_limit]
    parts: list[str] = []
    length = 0
    for word in ordered:
        extra = len(word) + (1 if parts else 0)
        if length + extra <= cfg.char_limit:
            parts.append(word)
            length += extra
    return " ".join(parts)


def caption_track(
    candidates: Sequence[CaptionCandidate],
    areas: Mapping[int, float],
    mode: CaptionMode,
    cfg: WordConfig,
) -> str:
    """Final caption for one track under the chosen strategy; "" when no candidates."""
    if mode is CaptionMode.ALGORITHM2:
        return aggregate_captions(candidates, areas) or ""
    return build_caption(word_scores(candidates, areas, cfg), cfg)

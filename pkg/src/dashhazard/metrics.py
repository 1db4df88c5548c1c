"""Challenge metrics: per-frame scores for the three tasks and run-level aggregation."""

from __future__ import annotations

from dataclasses import dataclass
from statistics import fmean
from typing import Collection, Mapping, Sequence

from dashhazard.model import FramePrediction, GroundTruth

DEFAULT_CAPTION_CHAR_LIMIT = 35


class MetricsError(Exception):
    pass


@dataclass(frozen=True)
class TaskScores:
    reaction: float
    hazard: float
    caption: float

    @property
    def overall(self) -> float:
        return (self.reaction + self.hazard + self.caption) / 3.0

    def to_dict(self) -> dict[str, float]:
        return {
            "reaction": self.reaction,
            "hazard": self.hazard,
            "caption": self.caption,
            "overall": self.overall,
        }


@dataclass(frozen=True)
class ScoreReport:
    aggregate: TaskScores
    per_video: Mapping[str, TaskScores]

    def to_dict(self) -> dict:
        return {
            "aggregate": self.aggregate.to_dict(),
            "per_video": {v: s.to_dict() for v, s in sorted(self.per_video.items())},
        }


def score_reaction(predicted: Sequence[bool], truth: Sequence[bool]) -> float:
    """Fraction of frames where the predicted state-change flag matches the truth."""
    if len(predicted) != len(truth):
        raise MetricsError(f"length mismatch: {len(predicted)} predicted vs {len(truth)} truth")
    if not truth:
        raise MetricsError("empty frame sequence")
    return sum(p == t for p, t in zip(predicted, truth)) / len(truth)


def score_hazard_frame(predicted_ids: Collection[int], known_ids: Collection[int]) -> float:
    """|predicted ∩ known| / max(|known|, |predicted|); 1.0 when both are empty."""
    predicted_set, known_set = set(predicted_ids), set(known_ids)
    if not predicted_set and not known_set:
        return 1.0
    return len(predicted_set & known_set) / max(len(known_set), len(predicted_set))


def score_caption_frame(
    predicted: Sequence[str],
    known: Sequence[str],
    char_limit: int = DEFAULT_CAPTION_CHAR_LIMIT,
) -> float:
    """Caption score for one frame.

    A prediction counts when its first ``char_limit`` characters occur
    (case-folded) as a substring of some known caption; each known caption
    can be matched at most once, greedily in prediction order. Empty strings
    on either side are ignored.
    """
    preds = [p.strip() for p in predicted if p.strip()]
    knowns = [k for k in known if k.strip()]
    if not preds and not knowns:
        return 1.0
    used = [False] * len(knowns)
    correct = 0
    for pred in preds:
        needle = pred[:char_limit].casefold()
        for i, known_caption in enumerate(knowns):
            if not used[i] and needle in known_caption.casefold():
                used[i] = True
                correct += 1
                break
    return correct / max(len(knowns), len(preds))


def truth_reaction_flags(reaction_frame: int | None, frame_count: int) -> list[bool]:
    if reaction_frame is None:
        return [False] * frame_count
    return [frame >= reaction_frame for frame in range(frame_count)]


def score_run(
    predictions: Mapping[str, Sequence[FramePrediction]],
    truth: GroundTruth,
    char_limit: int = DEFAULT_CAPTION_CHAR_LIMIT,
) -> ScoreReport:
    """Per-video scores macro-averaged across videos.

    Every truth video must be predicted over every truth frame; per-frame
    hazard and caption scores are averaged within a video first, then across
    videos, so long clips do not dominate.
    """
    missing = sorted(set(truth.videos) - set(predictions))
    if missing:
        raise MetricsError(f"predictions missing for video(s): {', '.join(missing)}")

    per_video: dict[str, TaskScores] = {}
    for video_id, video_truth in truth.videos.items():
        frames = sorted(video_truth.frames)
        if not frames:
            raise MetricsError(f"video {video_id!r}: ground truth has no frames")
        rows = predictions[video_id]
        if frames[-1] >= len(rows):
            raise MetricsError(
                f"video {video_id!r}: predictions cover {len(rows)} frames, "
                f"truth references frame {frames[-1]}"
            )
        truth_flags = truth_reaction_flags(video_truth.reaction_frame, frames[-1] + 1)
        predicted_flags = [rows[f].changed for f in frames]
        hazard_scores = []
        caption_scores = []
        for frame in frames:
            frame_truth = video_truth.frames[frame]
            pred = rows[frame]
            hazard_scores.append(
                score_hazard_frame([t for t, _ in pred.hazards], frame_truth.hazard_track_ids)
            )
            caption_scores.append(
                score_caption_frame(
                    [c for _, c in pred.hazards], frame_truth.hazard_captions, char_limit
                )
            )
        per_video[video_id] = TaskScores(
            reaction=score_reaction(predicted_flags, [truth_flags[f] for f in frames]),
            hazard=fmean(hazard_scores),
            caption=fmean(caption_scores),
        )

    aggregate = TaskScores(
        reaction=fmean(s.reaction for s in per_video.values()),
        hazard=fmean(s.hazard for s in per_video.values()),
        caption=fmean(s.caption for s in per_video.values()),
    )
    return ScoreReport(aggregate=aggregate, per_video=per_video)

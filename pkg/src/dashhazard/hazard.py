"""Hazardous-object selection: six heuristic weak classifiers combined by a
noise-perturbed weighted ensemble with vote aggregation.

Each classifier maps a track to a score in [0, 1]. The ensemble draws many
noisy weight vectors (Gaussian perturbation whose scale shrinks as epsilon
grows), lets each draw vote for its top-scored tracks, and picks the most
voted tracks as the hazards.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from statistics import median
from typing import Mapping, Sequence

from scipy.stats import rankdata

from dashhazard.model import LabelCandidate, Track, VideoAnnotations
from dashhazard.reaction import ReactionVerdict

NUM_CLASSIFIERS = 6

DEFAULT_DENYLIST = frozenset({"car", "traffic light"})

# Road-shaped trapezoid in relative frame coordinates (y grows downward).
DEFAULT_ZONE = ((0.2, 1.0), (0.4, 0.5), (0.6, 0.5), (0.8, 1.0))

_DIRECTION_EPS = 1e-6
_BOUNDARY_EPS = 1e-12


class ConfigError(Exception):
    """Invalid ensemble or run configuration."""


@dataclass(frozen=True)
class EnsembleConfig:
    weights: tuple[float, ...] = (1.0,) * NUM_CLASSIFIERS
    epsilon: float = 1.0
    num_draws: int = 100
    top_k: int = 1
    seed: int = 0
    denylist: frozenset[str] = DEFAULT_DENYLIST
    zone: tuple[tuple[float, float], ...] = DEFAULT_ZONE
    tau: float = 30.0

    def __post_init__(self) -> None:
        if len(self.weights) != NUM_CLASSIFIERS:
            raise ConfigError(f"expected {NUM_CLASSIFIERS} weights, got {len(self.weights)}")
        if any(w < 0 for w in self.weights):
            raise ConfigError("weights must be non-negative")
        if not any(w > 0 for w in self.weights):
            raise ConfigError("at least one weight must be positive")
        if self.epsilon <= 0:
            raise ConfigError("epsilon must be positive")
        if self.num_draws < 1:
            raise ConfigError("num_draws must be positive")
        if self.top_k < 1:
            raise ConfigError("top_k must be at least 1")
        if self.tau <= 0:
            raise ConfigError("tau must be positive")
        if len(self.zone) < 3:
            raise ConfigError("zone polygon needs at least 3 vertices")


@dataclass(frozen=True)
class HazardBallot:
    """Vote outcome for one video's candidate tracks."""

    base_combined: Mapping[int, float]
    votes: Mapping[int, int]
    winners: tuple[int, ...]


def w1_label_denylist(labels: Sequence[LabelCandidate], denylist: frozenset[str]) -> float:
    """0 when the track's best label is an unlikely-hazard class, 1 otherwise, 0.5 with no label."""
    if not labels:
        return 0.5
    best = min(labels, key=lambda lc: (-lc.confidence, lc.label))
    return 0.0 if best.label.strip().lower() in denylist else 1.0


def w2_center_proximity(track: Track, frame_width: int, frame_height: int) -> float:
    """1 at the frame center, falling linearly to 0 at the corners."""
    cx, cy = frame_width / 2.0, frame_height / 2.0
    distances = [math.hypot(x - cx, y - cy) for x, y in track.centroids()]
    d_max = math.hypot(cx, cy)
    return max(0.0, 1.0 - (sum(distances) / len(distances)) / d_max)


def _net_displacement(track: Track) -> tuple[float, float]:
    (x0, y0), (x1, y1) = track.centroids()[0], track.centroids()[-1]
    return (x1 - x0, y1 - y0)


def ego_motion_proxy(annotations: VideoAnnotations) -> tuple[float, float]:
    """Component-wise median of net centroid displacements over tracks with motion history."""
    moving = [
        _net_displacement(t) for t in annotations.tracks.values() if len(t.observations) >= 2
    ]
    if not moving:
        return (0.0, 0.0)
    return (median(dx for dx, _ in moving), median(dy for _, dy in moving))


def w3_direction_divergence(track: Track, annotations: VideoAnnotations) -> float:
    """Angle between the track's net motion and the scene's median motion, scaled to [0, 1]."""
    if len(track.observations) < 2:
        return 0.5
    ox, oy = _net_displacement(track)
    ex, ey = ego_motion_proxy(annotations)
    norm_o, norm_e = math.hypot(ox, oy), math.hypot(ex, ey)
    if norm_o < _DIRECTION_EPS or norm_e < _DIRECTION_EPS:
        return 0.5
    cosine = (ox * ex + oy * ey) / (norm_o * norm_e)
    return math.acos(max(-1.0, min(1.0, cosine))) / math.pi


def _on_segment(px: float, py: float, ax: float, ay: float, bx: float, by: float) -> bool:
    cross = (bx - ax) * (py - ay) - (by - ay) * (px - ax)
    if abs(cross) > _BOUNDARY_EPS:
        return False
    return min(ax, bx) - _BOUNDARY_EPS <= px <= max(ax, bx) + _BOUNDARY_EPS and (
        min(ay, by) - _BOUNDARY_EPS <= py <= max(ay, by) + _BOUNDARY_EPS
    )


def point_in_polygon(x: float, y: float, polygon: Sequence[tuple[float, float]]) -> bool:
    """Even-odd containment test; points on the boundary count as inside."""
    if len(polygon) < 3:
        raise ConfigError("zone polygon needs at least 3 vertices")
    inside = False
    for i in range(len(polygon)):
        ax, ay = polygon[i]
        bx, by = polygon[(i + 1) % len(polygon)]
        if _on_segment(x, y, ax, ay, bx, by):
            return True
        if (ay > y) != (by > y):
            x_cross = ax + (y - ay) * (bx - ax) / (by - ay)
            if x < x_cross:
                inside = not inside
    return inside


def w4_traffic_zone(
    track: Track,
    zone: Sequence[tuple[float, float]],
    frame_width: int,
    frame_height: int,
) -> float:
    """Fraction of observations whose centroid falls inside the traffic zone."""
    hits = sum(
        point_in_polygon(x / frame_width, y / frame_height, zone) for x, y in track.centroids()
    )
    return hits / len(track.observations)


def w5_persistence_area(tracks: Sequence[Track]) -> dict[int, float]:
    """Rank-based salience score: small short-lived objects near 1, large persistent ones near 0.

    Salience is observation count times mean box area; tracks are ranked
    ascending with tied saliences sharing the mean of their ranks.
    """
    if not tracks:
        raise ValueError("need at least one track")
    if len(tracks) == 1:
        return {tracks[0].track_id: 1.0}
    saliences = [
        len(t.observations) * (sum(o.bbox.area() for o in t.observations) / len(t.observations))
        for t in tracks
    ]
    ranks = rankdata(saliences, method="average")
    n = len(tracks)
    return {t.track_id: 1.0 - (float(rank) - 1.0) / (n - 1) for t, rank in zip(tracks, ranks)}


def w6_reaction_proximity(track: Track, verdict: ReactionVerdict, tau: float) -> float:
    """Exponential closeness of the track's first appearance to the reaction frame."""
    if verdict.frame is None:
        return 0.5
    return math.exp(-abs(track.first_frame() - verdict.frame) / tau)


def combine(scores: Sequence[float], weights: Sequence[float]) -> float:
    """Weighted sum of classifier scores."""
    if len(scores) != len(weights):
        raise ValueError(f"expected {len(weights)} scores, got {len(scores)}")
    return sum(w * s for w, s in zip(weights, scores))


def compute_weak_scores(
    annotations: VideoAnnotations,
    labels: Sequence[LabelCandidate],
    verdict: ReactionVerdict,
    cfg: EnsembleConfig,
) -> dict[int, tuple[float, ...]]:
    """Six classifier scores for every candidate (challenge-object) track."""
    candidates = annotations.challenge_tracks()
    if not candidates:
        return {}
    by_track: dict[int, list[LabelCandidate]] = {}
    for label in labels:
        if label.video_id == annotations.video_id:
            by_track.setdefault(label.track_id, []).append(label)
    persistence = w5_persistence_area(list(annotations.tracks.values()))
    width, height = annotations.frame_width, annotations.frame_height
    return {
        t.track_id: (
            w1_label_denylist(by_track.get(t.track_id, []), cfg.denylist),
            w2_center_proximity(t, width, height),
            w3_direction_divergence(t, annotations),
            w4_traffic_zone(t, cfg.zone, width, height),
            persistence[t.track_id],
            w6_reaction_proximity(t, verdict, cfg.tau),
        )
        for t in sorted(candidates, key=lambda t: t.track_id)
    }


def noise_sigma(cfg: EnsembleConfig) -> float:
    """Perturbation scale: (max base weight)^2 / epsilon.

    Quadratic in the weight scale so that scaling all weights and epsilon by
    the same factor rescales every noisy draw by that factor, leaving the
    vote outcome unchanged. Equals 1/epsilon at the default unit weights.
    """
    peak = max(cfg.weights)
    return peak * peak / cfg.epsilon


def perturbed_weights(cfg: EnsembleConfig, draw: int) -> list[float]:
    """Weights for one draw: base + Gaussian noise, clamped at zero.

    The generator is pinned for reproducibility: MT19937 seeded with the
    string "<seed>:<draw>" and trigonometric Box-Muller, matching
    random.Random(key).gauss(0, sigma) bit for bit.
    """
    sigma = noise_sigma(cfg)
    rng = random.Random(f"{cfg.seed}:{draw}")
    noisy = []
    cached: float | None = None
    for base in cfg.weights:
        if cached is None:
            angle = rng.random() * math.tau
            radius = math.sqrt(-2.0 * math.log(1.0 - rng.random()))
            gauss = math.cos(angle) * radius
            cached = math.sin(angle) * radius
        else:
            gauss = cached
            cached = None
        noisy.append(max(0.0, base + gauss * sigma))
    return noisy


def vote(scores: Mapping[int, Sequence[float]], cfg: EnsembleConfig) -> HazardBallot:
    """Aggregate noisy-draw votes into a ballot.

    Each draw perturbs the weights, combines scores, and gives one vote to
    each of its top_k tracks (ties to the lower track id). Winners are the
    top_k tracks by votes, ties broken by higher noiseless combined score,
    then lower track id. Deterministic given (scores, config, seed).
    """
    tracks = sorted(scores)
    if not tracks:
        return HazardBallot(base_combined={}, votes={}, winners=())
    for track_id in tracks:
        if any(not 0.0 <= s <= 1.0 for s in scores[track_id]):
            raise ValueError(f"track {track_id}: classifier scores must lie in [0, 1]")

    base = {t: combine(scores[t], cfg.weights) for t in tracks}
    votes = {t: 0 for t in tracks}
    for draw in range(1, cfg.num_draws + 1):
        weights = perturbed_weights(cfg, draw)
        combined = {t: combine(scores[t], weights) for t in tracks}
        for winner in sorted(tracks, key=lambda t: (-combined[t], t))[: cfg.top_k]:
            votes[winner] += 1

    winners = tuple(sorted(tracks, key=lambda t: (-votes[t], -base[t], t))[: cfg.top_k])
    return HazardBallot(base_combined=base, votes=votes, winners=winners)


def baseline_center(annotations: VideoAnnotations) -> int | None:
    """Reference selector: the candidate track closest to the frame center."""
    candidates = annotations.challenge_tracks()
    if not candidates:
        return None
    return min(
        candidates,
        key=lambda t: (
            -w2_center_proximity(t, annotations.frame_width, annotations.frame_height),
            t.track_id,
        ),
    ).track_id

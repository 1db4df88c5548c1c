"""Numeric kernels shared by the anomaly detectors: OLS slopes and online peak detection."""

from __future__ import annotations

import math
from dataclasses import dataclass
from statistics import fmean, linear_regression, pstdev
from typing import Sequence

# Floor applied to the trailing-window standard deviation so a constant
# warmup cannot produce infinite z-scores.
STD_FLOOR = 1e-9


@dataclass(frozen=True)
class PeakConfig:
    """Trailing-window z-score detector settings.

    window: number of samples strictly before the probe used for statistics.
    z_threshold: how many trailing standard deviations a value must exceed.
    min_warmup: first position at which detection may fire (>= 2 so the
    trailing window always holds at least two samples).
    """

    window: int = 30
    z_threshold: float = 3.0
    min_warmup: int = 5

    def __post_init__(self) -> None:
        if self.window < 1:
            raise ValueError("window must be positive")
        if self.z_threshold <= 0:
            raise ValueError("z_threshold must be positive")
        if self.min_warmup < 2:
            raise ValueError("min_warmup must be at least 2")


@dataclass(frozen=True)
class Series:
    """Scalar series over strictly increasing integer indices."""

    entries: tuple[tuple[int, float], ...]

    def __post_init__(self) -> None:
        indices = [i for i, _ in self.entries]
        if any(b <= a for a, b in zip(indices, indices[1:])):
            raise ValueError("series indices must be strictly increasing")
        if any(not math.isfinite(v) for _, v in self.entries):
            raise ValueError("series values must be finite")

    @classmethod
    def from_values(cls, values: Sequence[float]) -> "Series":
        return cls(tuple(enumerate(values)))

    def values(self) -> list[float]:
        return [v for _, v in self.entries]

    def __len__(self) -> int:
        return len(self.entries)


@dataclass(frozen=True)
class PeakHit:
    index: int
    zscore: float


def fit_slope(points: Sequence[tuple[float, float]]) -> float:
    """Ordinary-least-squares slope of y = a*x + b over the given points.

    Raises ValueError("degenerate regression ...") for fewer than two points
    or zero variance in x.
    """
    if len(points) < 2:
        raise ValueError("degenerate regression: need at least two points")
    xs = [float(x) for x, _ in points]
    ys = [float(y) for _, y in points]
    if min(xs) == max(xs):
        raise ValueError("degenerate regression: zero variance in x")
    return linear_regression(xs, ys).slope


def detect_peak(series: Series, cfg: PeakConfig) -> PeakHit | None:
    """First position whose value exceeds trailing mean + z_threshold * trailing std.

    Statistics come from the ``cfg.window`` samples strictly before the probe
    (population std, floored at STD_FLOOR). Detection starts at position
    ``cfg.min_warmup``; returns the series index at the first hit, or None.
    """
    if not series.entries:
        return None
    values = series.values()
    for position in range(cfg.min_warmup, len(values)):
        trailing = values[max(0, position - cfg.window) : position]
        mean = fmean(trailing)
        std = max(pstdev(trailing), STD_FLOOR)
        value = values[position]
        if value > mean + cfg.z_threshold * std:
            return PeakHit(index=series.entries[position][0], zscore=(value - mean) / std)
    return None

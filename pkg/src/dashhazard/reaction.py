"""Driver-reaction detection from track motion and audio energy.

The speed detector turns each track's centroid displacement into a velocity
series (windowed regression slope), then into an acceleration series (slope
of the velocity series, taken as a magnitude), and fires on the first peak.
The sound detector fires on peaks of a median-normalized RMS energy envelope.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

import numpy as np
from scipy.io import wavfile

from dashhazard.model import Track, VideoAnnotations
from dashhazard.signal import PeakConfig, Series, detect_peak, fit_slope

logger = logging.getLogger(__name__)

DEFAULT_ENVELOPE_MS = 50

# Audio envelopes of near-white noise are well behaved, so a 3-sigma test
# fires spuriously; bursts sit hundreds of sigmas out, so a high bar costs
# no recall.
DEFAULT_SOUND_PEAK = PeakConfig(window=30, z_threshold=8.0, min_warmup=5)


@dataclass(frozen=True)
class SpeedConfig:
    """chunksize: samples per slope estimate; prefix_velocity selects the
    full-prefix velocity regression instead of the sliding window."""

    chunksize: int = 10
    peak: PeakConfig = field(default_factory=PeakConfig)
    prefix_velocity: bool = False

    def __post_init__(self) -> None:
        if self.chunksize < 2:
            raise ValueError("chunksize must be at least 2")


class ReactionSource(Enum):
    SPEED = "speed"
    SOUND = "sound"
    FUSED = "fused"
    NONE = "none"


@dataclass(frozen=True)
class ReactionVerdict:
    video_id: str
    frame: int | None
    source: ReactionSource

    def __post_init__(self) -> None:
        if (self.frame is None) != (self.source is ReactionSource.NONE):
            raise ValueError("frame must be present exactly when a source detected it")


@dataclass(frozen=True)
class AudioTrack:
    """Mono samples in [-1, 1] at a fixed rate."""

    samples: np.ndarray
    sample_rate: int

    def __post_init__(self) -> None:
        if self.samples.size == 0:
            raise ValueError("empty audio")
        if self.sample_rate <= 0:
            raise ValueError("sample_rate must be positive")


def load_wav(path: Path) -> AudioTrack:
    """Load a RIFF/WAVE file; averages stereo to mono and normalizes PCM to [-1, 1]."""
    rate, data = wavfile.read(path)
    samples = np.asarray(data)
    if samples.ndim > 1:
        samples = samples.mean(axis=1)
    if np.issubdtype(samples.dtype, np.integer):
        samples = samples.astype(np.float64) / float(np.iinfo(data.dtype).max)
    else:
        samples = samples.astype(np.float64)
    return AudioTrack(samples=np.clip(samples, -1.0, 1.0), sample_rate=int(rate))


def _displacement_points(track: Track) -> list[tuple[float, float]]:
    frames = track.frames()
    centroids = track.centroids()
    origin_frame, (ox, oy) = frames[0], centroids[0]
    return [
        (float(f - origin_frame), math.hypot(cx - ox, cy - oy))
        for f, (cx, cy) in zip(frames, centroids)
    ]


def speed_anomaly(track: Track, cfg: SpeedConfig) -> int | None:
    """First frame at which the track's acceleration series peaks, if any.

    Velocity at observation f is the slope of cumulative displacement vs
    frame over the trailing chunksize points (full prefix when
    prefix_velocity is set). Acceleration is the magnitude of the slope of
    the trailing chunksize (frame, velocity) points; a change in motion in
    either direction shows up as a positive bump.
    """
    observations = track.observations
    if len(observations) < cfg.chunksize + 2:
        logger.debug(
            "track %s/%d too short for chunksize %d",
            track.video_id,
            track.track_id,
            cfg.chunksize,
        )
        return None

    displacement = _displacement_points(track)
    velocities: list[tuple[float, float]] = []
    for f in range(1, len(observations)):
        if cfg.prefix_velocity:
            window = displacement[: f + 1]
        else:
            window = displacement[max(0, f - cfg.chunksize + 1) : f + 1]
        velocities.append((float(observations[f].frame), fit_slope(window)))

    acceleration: list[tuple[int, float]] = []
    for i in range(cfg.chunksize - 1, len(velocities)):
        window = velocities[i - cfg.chunksize + 1 : i + 1]
        acceleration.append((observations[i + 1].frame, abs(fit_slope(window))))

    hit = detect_peak(Series(tuple(acceleration)), cfg.peak)
    return None if hit is None else hit.index


def video_speed_anomaly(annotations: VideoAnnotations, cfg: SpeedConfig) -> int | None:
    """Earliest speed-anomaly frame over all tracks (both kinds), or None."""
    detections = [
        frame
        for track in annotations.tracks.values()
        if (frame := speed_anomaly(track, cfg)) is not None
    ]
    return min(detections) if detections else None


def sound_anomaly(
    audio: AudioTrack,
    fps: float,
    cfg: PeakConfig = DEFAULT_SOUND_PEAK,
    envelope_ms: int = DEFAULT_ENVELOPE_MS,
) -> int | None:
    """Video frame of the first loudness peak, or None.

    The RMS energy envelope over non-overlapping windows of ``envelope_ms``
    is divided by its median (the environmental-noise normalization), and the
    first peak index is mapped back to a frame via the window start time.
    """
    window = int(audio.sample_rate * envelope_ms / 1000)
    if window < 1:
        raise ValueError("envelope window shorter than one sample")
    count = audio.samples.size // window
    if count < 2:
        return None
    chunks = audio.samples[: count * window].reshape(count, window)
    envelope = np.sqrt(np.mean(np.square(chunks), axis=1))
    median = max(float(np.median(envelope)), 1e-9)
    normalized = envelope / median

    hit = detect_peak(Series.from_values(normalized.tolist()), cfg)
    if hit is None:
        return None
    time = hit.index * envelope_ms / 1000.0
    return int(math.floor(time * fps))


def fuse_reactions(video_id: str, speed: int | None, sound: int | None) -> ReactionVerdict:
    """Earliest detection wins; the source records which modality fired."""
    if speed is not None and sound is not None:
        return ReactionVerdict(video_id, min(speed, sound), ReactionSource.FUSED)
    if speed is not None:
        return ReactionVerdict(video_id, speed, ReactionSource.SPEED)
    if sound is not None:
        return ReactionVerdict(video_id, sound, ReactionSource.SOUND)
    return ReactionVerdict(video_id, None, ReactionSource.NONE)


def verdict_to_frames(verdict: ReactionVerdict, frame_count: int) -> list[bool]:
    """Per-frame state-change booleans: false before the reaction, true from it on."""
    if frame_count <= 0:
        raise ValueError("frame_count must be positive")
    if verdict.frame is None:
        return [False] * frame_count
    return [frame >= verdict.frame for frame in range(frame_count)]

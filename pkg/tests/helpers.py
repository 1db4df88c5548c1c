"""Shared builders for synthetic tracks, videos, and audio used across test modules."""

from __future__ import annotations

import numpy as np

from dashhazard.model import BBox, Observation, Track, TrackKind, VideoAnnotations
from dashhazard.reaction import AudioTrack

AUDIO_SR = 16000


def box_at(cx: float, cy: float, width: float = 40.0, height: float = 40.0) -> BBox:
    return BBox(cx - width / 2, cy - height / 2, cx + width / 2, cy + height / 2)


def make_track(
    centroids,
    track_id: int = 0,
    video_id: str = "v0",
    kind: TrackKind = TrackKind.CHALLENGE_OBJECT,
    frames=None,
    size: float = 40.0,
) -> Track:
    frames = range(len(centroids)) if frames is None else frames
    observations = tuple(
        Observation(f, box_at(cx, cy, size, size)) for f, (cx, cy) in zip(frames, centroids)
    )
    return Track(video_id, track_id, kind, observations)


def linear_centroids(start, velocity, n, change=None, factor=1.0):
    """Piecewise-linear centroid path: constant velocity, optionally scaled from ``change`` on."""
    sx, sy = start
    vx, vy = velocity
    out = []
    for f in range(n):
        if change is None:
            out.append((sx + vx * f, sy + vy * f))
        else:
            pre = min(f, change)
            post = max(0, f - change)
            out.append((sx + vx * pre + vx * factor * post, sy + vy * pre + vy * factor * post))
    return out


def make_video(tracks, video_id: str = "v0", frame_count: int = 200, width: int = 1280, height: int = 720, fps: float = 30.0) -> VideoAnnotations:
    return VideoAnnotations(
        video_id=video_id,
        frame_count=frame_count,
        frame_width=width,
        frame_height=height,
        fps=fps,
        tracks={t.track_id: t for t in tracks},
    )


def random_linear_track(rng, n: int = 150, change: int | None = None, factor: float = 1.0) -> Track:
    """Exactly constant-velocity centroid path, optionally with a velocity step."""
    start = (rng.uniform(200.0, 1000.0), rng.uniform(80.0, 200.0))
    velocity = (rng.uniform(-0.5, 0.5), rng.uniform(0.5, 2.0))
    return make_track(linear_centroids(start, velocity, n, change=change, factor=factor))


def burst_audio(seed: int, burst_t: float = 4.0, duration: float = 10.0, fps_noise: float = 0.05) -> AudioTrack:
    """White noise with a 200 ms 0.9-amplitude sine burst at ``burst_t`` seconds."""
    rng = np.random.default_rng(seed)
    samples = rng.normal(0.0, fps_noise, int(duration * AUDIO_SR))
    t = np.arange(int(0.2 * AUDIO_SR)) / AUDIO_SR
    start = int(burst_t * AUDIO_SR)
    samples[start : start + t.size] += 0.9 * np.sin(2 * np.pi * 1000.0 * t)
    return AudioTrack(np.clip(samples, -1.0, 1.0), AUDIO_SR)

"""Deterministic synthetic fixtures: small dashcam-like scenarios with one
injected hazard per video, matching audio bursts, caption/label candidates,
and ground truth. Everything derives from the per-video seed, so regenerating
with the same arguments reproduces the files byte for byte.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.io import wavfile

from dashhazard.model import (
    BBox,
    FrameTruth,
    GroundTruth,
    Observation,
    Track,
    TrackKind,
    VideoAnnotations,
    VideoTruth,
    write_ground_truth,
    write_tracks,
)

HAZARD_NOUNS = ("dog", "cat", "deer", "cow", "kangaroo")

SCENE_TRACKS = 2
CAR_BBOX = (120.0, 90.0)
SCENE_BBOX = (40.0, 40.0)
HAZARD_BBOX = (40.0, 40.0)


@dataclass(frozen=True)
class FixtureVideo:
    video_id: str
    seed: int
    reaction_frame: int
    hazard_track_id: int
    caption: str
    observations: int


@dataclass(frozen=True)
class FixtureManifest:
    out_dir: Path
    tracks_path: Path
    captions_path: Path
    labels_path: Path
    truth_path: Path
    audio_dir: Path
    videos: tuple[FixtureVideo, ...]


def _bbox(cx: float, cy: float, size: tuple[float, float]) -> BBox:
    half_w, half_h = size[0] / 2.0, size[1] / 2.0
    return BBox(cx - half_w, cy - half_h, cx + half_w, cy + half_h)


def _piecewise(start: float, v1: float, v2: float, change: int, frame: int) -> float:
    return start + v1 * min(frame, change) + v2 * max(0, frame - change)


def _linear_track(
    video_id: str,
    track_id: int,
    kind: TrackKind,
    frames: range,
    start: tuple[float, float],
    velocity: tuple[float, float],
    size: tuple[float, float],
    change: int | None = None,
    factor: float = 1.0,
) -> Track:
    sx, sy = start
    vx, vy = velocity
    observations = []
    for frame in frames:
        if change is None:
            cx, cy = sx + vx * frame, sy + vy * frame
        else:
            cx = _piecewise(sx, vx, vx * factor, change, frame)
            cy = _piecewise(sy, vy, vy * factor, change, frame)
        observations.append(Observation(frame, _bbox(cx, cy, size)))
    return Track(video_id, track_id, kind, tuple(observations))


def _make_video(
    video_id: str,
    vseed: int,
    frame_count: int,
    width: int,
    height: int,
) -> tuple[VideoAnnotations, int, int, str, list[dict], list[dict]]:
    rng = random.Random(vseed)
    change_frame = rng.randint(60, frame_count - 45)

    tracks: dict[int, Track] = {}
    # Scene tracks flow downward at constant speed, then the apparent motion
    # of the whole scene changes at the reaction (ego brake or swerve).
    for track_id in range(SCENE_TRACKS):
        faster = rng.random() < 0.5
        factor = rng.uniform(3.0, 5.0) if faster else rng.uniform(0.1, 0.25)
        tracks[track_id] = _linear_track(
            video_id,
            track_id,
            TrackKind.TRAFFIC_SCENE,
            range(frame_count),
            start=(rng.uniform(220.0, width - 220.0), rng.uniform(60.0, 150.0)),
            velocity=(rng.uniform(-0.3, 0.3), rng.uniform(0.6, 1.4)),
            size=SCENE_BBOX,
            change=change_frame,
            factor=factor,
        )

    # Lead vehicle near the frame center: persistent, large, labeled "car".
    tracks[2] = _linear_track(
        video_id,
        2,
        TrackKind.CHALLENGE_OBJECT,
        range(frame_count),
        start=(width / 2.0 + rng.uniform(-30.0, 30.0), 0.55 * height + rng.uniform(-20.0, 20.0)),
        velocity=(0.0, rng.uniform(0.2, 0.4)),
        size=CAR_BBOX,
    )
    # Parked vehicle at the roadside, also a candidate.
    tracks[3] = _linear_track(
        video_id,
        3,
        TrackKind.CHALLENGE_OBJECT,
        range(frame_count),
        start=(rng.uniform(100.0, 200.0), rng.uniform(560.0, 600.0)),
        velocity=(0.0, rng.uniform(0.1, 0.2)),
        size=(100.0, 80.0),
    )

    # The injected hazard: appears just before the reaction, crosses the road
    # near the center of the traffic zone.
    noun = rng.choice(HAZARD_NOUNS)
    first = change_frame - rng.randint(3, 10)
    last = min(frame_count - 1, change_frame + rng.randint(35, 50))
    heading_right = rng.random() < 0.5
    speed = rng.uniform(2.0, 3.0)
    hazard_id = 4
    tracks[hazard_id] = _linear_track(
        video_id,
        hazard_id,
        TrackKind.CHALLENGE_OBJECT,
        range(first, last + 1),
        start=(
            (0.38 if heading_right else 0.62) * width - (speed * first) * (1 if heading_right else -1),
            0.80 * height + rng.uniform(-15.0, 15.0),
        ),
        velocity=(speed if heading_right else -speed, 0.0),
        size=HAZARD_BBOX,
    )

    caption = f"a {noun} crossing the road"
    caption_rows = []
    hazard_frames = tracks[hazard_id].frames()
    for frame in hazard_frames[::2]:
        caption_rows.append(
            {"video": video_id, "track_id": hazard_id, "frame": frame, "model": "cap-a", "text": caption}
        )
    for frame in hazard_frames[::5]:
        caption_rows.append(
            {
                "video": video_id,
                "track_id": hazard_id,
                "frame": frame,
                "model": "cap-b",
                "text": f"a small {noun}",
            }
        )
    for car_id in (2, 3):
        for frame in tracks[car_id].frames()[::10]:
            caption_rows.append(
                {
                    "video": video_id,
                    "track_id": car_id,
                    "frame": frame,
                    "model": "cap-a",
                    "text": "a car on the road",
                }
            )

    label_rows = [
        {"video": video_id, "track_id": 2, "label": "car", "confidence": 0.92},
        {"video": video_id, "track_id": 3, "label": "car", "confidence": 0.9},
        {"video": video_id, "track_id": hazard_id, "label": noun, "confidence": 0.95},
    ]

    annotations = VideoAnnotations(
        video_id=video_id,
        frame_count=frame_count,
        frame_width=width,
        frame_height=height,
        fps=0.0,  # filled by caller
        tracks=tracks,
    )
    return annotations, change_frame, hazard_id, caption, caption_rows, label_rows


def _write_audio(
    path: Path, vseed: int, duration_s: float, change_time_s: float, sample_rate: int
) -> None:
    rng = np.random.default_rng(vseed)
    n = int(round(duration_s * sample_rate))
    samples = rng.normal(0.0, 0.004, n)
    burst_start = int(round(change_time_s * sample_rate))
    burst_len = min(int(0.2 * sample_rate), n - burst_start)
    if burst_len > 0:
        t = np.arange(burst_len) / sample_rate
        samples[burst_start : burst_start + burst_len] += 0.6 * np.sin(2 * np.pi * 1000.0 * t)
    wavfile.write(path, sample_rate, np.clip(samples, -1.0, 1.0).astype(np.float32))


def generate_fixture(
    out_dir: Path,
    seed: int = 1,
    n_videos: int = 1,
    frame_count: int = 150,
    width: int = 1280,
    height: int = 720,
    fps: float = 30.0,
    sample_rate: int = 16000,
) -> FixtureManifest:
    """Generate tracks/captions/labels/audio/truth for ``n_videos`` videos.

    Video i uses seed ``seed + i``, so a 100-video fixture at seed 1 covers
    per-video seeds 1..100. Requires frame_count >= 110 so the injected
    reaction always has warmup room before it.
    """
    if n_videos < 1:
        raise ValueError("n_videos must be at least 1")
    if frame_count < 110:
        raise ValueError("frame_count must be at least 110")

    out_dir = Path(out_dir)
    audio_dir = out_dir / "audio"
    audio_dir.mkdir(parents=True, exist_ok=True)

    videos: list[VideoAnnotations] = []
    truth_videos: dict[str, VideoTruth] = {}
    manifest_videos: list[FixtureVideo] = []
    caption_rows: list[dict] = []
    label_rows: list[dict] = []

    for index in range(n_videos):
        vseed = seed + index
        video_id = f"video_{vseed:04d}"
        annotations, change_frame, hazard_id, caption, vid_captions, vid_labels = _make_video(
            video_id, vseed, frame_count, width, height
        )
        annotations.fps = fps
        videos.append(annotations)
        caption_rows.extend(vid_captions)
        label_rows.extend(vid_labels)

        visible = set(annotations.tracks[hazard_id].frames())
        truth_videos[video_id] = VideoTruth(
            reaction_frame=change_frame,
            frames={
                frame: (
                    FrameTruth(frozenset({hazard_id}), (caption,))
                    if frame in visible
                    else FrameTruth()
                )
                for frame in range(frame_count)
            },
        )
        _write_audio(
            audio_dir / f"{video_id}.wav",
            vseed,
            duration_s=frame_count / fps,
            change_time_s=change_frame / fps,
            sample_rate=sample_rate,
        )
        manifest_videos.append(
            FixtureVideo(
                video_id=video_id,
                seed=vseed,
                reaction_frame=change_frame,
                hazard_track_id=hazard_id,
                caption=caption,
                observations=sum(len(t.observations) for t in annotations.tracks.values()),
            )
        )

    tracks_path = out_dir / "tracks.jsonl"
    with open(tracks_path, "w", encoding="utf-8") as handle:
        write_tracks(videos, handle)
    captions_path = out_dir / "captions.jsonl"
    with open(captions_path, "w", encoding="utf-8") as handle:
        for row in caption_rows:
            handle.write(json.dumps(row) + "\n")
    labels_path = out_dir / "labels.jsonl"
    with open(labels_path, "w", encoding="utf-8") as handle:
        for row in label_rows:
            handle.write(json.dumps(row) + "\n")
    truth_path = out_dir / "truth.json"
    write_ground_truth(GroundTruth(videos=truth_videos), truth_path)

    manifest = FixtureManifest(
        out_dir=out_dir,
        tracks_path=tracks_path,
        captions_path=captions_path,
        labels_path=labels_path,
        truth_path=truth_path,
        audio_dir=audio_dir,
        videos=tuple(manifest_videos),
    )
    with open(out_dir / "manifest.json", "w", encoding="utf-8") as handle:
        json.dump(
            {
                "seed": seed,
                "n_videos": n_videos,
                "frame_count": frame_count,
                "fps": fps,
                "videos": [
                    {
                        "video_id": v.video_id,
                        "seed": v.seed,
                        "reaction_frame": v.reaction_frame,
                        "hazard_track_id": v.hazard_track_id,
                        "caption": v.caption,
                        "observations": v.observations,
                    }
                    for v in manifest.videos
                ],
            },
            handle,
            indent=2,
            sort_keys=True,
        )
        handle.write("\n")
    return manifest

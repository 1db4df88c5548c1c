"""Native dataset layout and the annotation conversion.

Expected dataset root:

    annotations.pkl          pickled dict, schema below
    frames/<video_id>/<frame:06d>.png
    audio/<video_id>.wav     optional

``annotations.pkl`` maps video id to::

    {
        "frame_count": int, "width": int, "height": int, "fps": float,
        "frames": {frame_index: [
            {"track_id": int, "kind": "challenge_object" | "traffic_scene",
             "bbox": [x1, y1, x2, y2]},
            ...
        ]},
    }

Conversion is lossless on observation counts: every per-frame entry in the
pickle becomes exactly one JSONL observation line.
"""

from __future__ import annotations

import json
import pickle
import shutil
from dataclasses import dataclass
from pathlib import Path

ANNOTATIONS_FILE = "annotations.pkl"

VALID_KINDS = ("challenge_object", "traffic_scene")


class AnnotationError(Exception):
    """The annotations file is missing, unreadable, or malformed."""


@dataclass(frozen=True)
class ConversionReport:
    videos: int
    metadata_lines: int
    observation_lines: int


def annotations_path(dataset_root: Path) -> Path:
    return Path(dataset_root) / ANNOTATIONS_FILE


def frame_path(dataset_root: Path, video_id: str, frame: int) -> Path:
    return Path(dataset_root) / "frames" / video_id / f"{frame:06d}.png"


def load_annotations(dataset_root: Path) -> dict:
    path = annotations_path(dataset_root)
    try:
        with open(path, "rb") as handle:
            doc = pickle.load(handle)
    except FileNotFoundError:
        raise AnnotationError(f"{path}: file not found") from None
    except (pickle.UnpicklingError, EOFError, AttributeError) as exc:
        raise AnnotationError(f"{path}: not a readable pickle ({exc})") from exc
    if not isinstance(doc, dict):
        raise AnnotationError(f"{path}: expected a dict of videos, got {type(doc).__name__}")
    for video_id, entry in doc.items():
        if not isinstance(entry, dict):
            raise AnnotationError(f"{path}: video {video_id!r} entry is not a dict")
        for key in ("frame_count", "width", "height", "fps", "frames"):
            if key not in entry:
                raise AnnotationError(f"{path}: video {video_id!r} is missing {key!r}")
        for frame, boxes in entry["frames"].items():
            for box in boxes:
                if box.get("kind") not in VALID_KINDS:
                    raise AnnotationError(
                        f"{path}: video {video_id!r} frame {frame}: bad kind {box.get('kind')!r}"
                    )
                bbox = box.get("bbox")
                if not (isinstance(bbox, (list, tuple)) and len(bbox) == 4):
                    raise AnnotationError(
                        f"{path}: video {video_id!r} frame {frame}: bad bbox {bbox!r}"
                    )
    return doc


def convert_annotations(dataset_root: Path, out_tracks: Path) -> ConversionReport:
    """Write the pickle annotations as tracks JSONL (metadata line first per video)."""
    doc = load_annotations(dataset_root)
    out_tracks = Path(out_tracks)
    out_tracks.parent.mkdir(parents=True, exist_ok=True)
    tmp = out_tracks.with_suffix(out_tracks.suffix + ".tmp")
    metadata_lines = 0
    observation_lines = 0
    with open(tmp, "w", encoding="utf-8") as handle:
        for video_id in sorted(doc):
            entry = doc[video_id]
            handle.write(
                json.dumps(
                    {
                        "video": video_id,
                        "frame_count": int(entry["frame_count"]),
                        "width": int(entry["width"]),
                        "height": int(entry["height"]),
                        "fps": float(entry["fps"]),
                    }
                )
                + "\n"
            )
            metadata_lines += 1
            rows = []
            for frame, boxes in entry["frames"].items():
                for box in boxes:
                    rows.append((int(box["track_id"]), int(frame), box))
            for track_id, frame, box in sorted(rows, key=lambda r: (r[0], r[1])):
                handle.write(
                    json.dumps(
                        {
                            "video": video_id,
                            "frame": frame,
                            "track_id": track_id,
                            "kind": box["kind"],
                            "bbox": [float(v) for v in box["bbox"]],
                        }
                    )
                    + "\n"
                )
                observation_lines += 1
    tmp.replace(out_tracks)
    return ConversionReport(
        videos=len(doc), metadata_lines=metadata_lines, observation_lines=observation_lines
    )


def collect_audio(dataset_root: Path, out_dir: Path) -> int:
    """Copy any ``audio/<video_id>.wav`` files into ``out_dir``; returns the count."""
    source = Path(dataset_root) / "audio"
    out_dir = Path(out_dir)
    copied = 0
    if not source.is_dir():
        return 0
    out_dir.mkdir(parents=True, exist_ok=True)
    for wav in sorted(source.glob("*.wav")):
        shutil.copyfile(wav, out_dir / wav.name)
        copied += 1
    return copied

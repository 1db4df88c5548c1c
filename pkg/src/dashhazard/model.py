"""Domain types and file formats: tracks, caption/label candidates, ground truth, submissions.

Input formats are line-oriented JSONL so they can be produced by any
upstream extractor; the submission is a wide CSV with one row per
(video, frame) and a fixed number of hazard slots.
"""

from __future__ import annotations

import csv
import io
import json
import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import IO, Iterable, Iterator, Mapping, Sequence

logger = logging.getLogger(__name__)

DEFAULT_HAZARD_SLOTS = 23


class ParseError(Exception):
    """A line could not be decoded at all (bad JSON, bad CSV)."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


class SchemaError(Exception):
    """A line decoded fine but violates the schema or an invariant."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


class TrackKind(Enum):
    CHALLENGE_OBJECT = "challenge_object"
    TRAFFIC_SCENE = "traffic_scene"


@dataclass(frozen=True)
class BBox:
    """Axis-aligned box in pixel coordinates, origin top-left, x2 > x1 and y2 > y1."""

    x1: float
    y1: float
    x2: float
    y2: float

    def __post_init__(self) -> None:
        if not (self.x2 > self.x1 and self.y2 > self.y1):
            raise ValueError(f"degenerate bbox: {(self.x1, self.y1, self.x2, self.y2)}")

    def area(self) -> float:
        return (self.x2 - self.x1) * (self.y2 - self.y1)

    def center(self) -> tuple[float, float]:
        return ((self.x1 + self.x2) / 2.0, (self.y1 + self.y2) / 2.0)


@dataclass(frozen=True)
class Observation:
    frame: int
    bbox: BBox


@dataclass(frozen=True)
class Track:
    """One object's per-frame boxes within one video, ordered by frame."""

    video_id: str
    track_id: int
    kind: TrackKind
    observations: tuple[Observation, ...]

    def __post_init__(self) -> None:
        if not self.observations:
            raise ValueError(f"track {self.track_id}: empty observation list")
        if self.track_id < 0:
            raise ValueError(f"track {self.track_id}: negative id")
        frames = [o.frame for o in self.observations]
        if any(b <= a for a, b in zip(frames, frames[1:])):
            raise ValueError(f"track {self.track_id}: frames not strictly increasing")

    def frames(self) -> list[int]:
        return [o.frame for o in self.observations]

    def first_frame(self) -> int:
        return self.observations[0].frame

    def centroids(self) -> list[tuple[float, float]]:
        return [o.bbox.center() for o in self.observations]

    def area_by_frame(self) -> dict[int, float]:
        return {o.frame: o.bbox.area() for o in self.observations}


@dataclass
class VideoAnnotations:
    """All tracks of one video plus its frame geometry."""

    video_id: str
    frame_count: int
    frame_width: int
    frame_height: int
    fps: float
    tracks: dict[int, Track] = field(default_factory=dict)

    def challenge_tracks(self) -> list[Track]:
        return [t for t in self.tracks.values() if t.kind is TrackKind.CHALLENGE_OBJECT]


@dataclass(frozen=True)
class CaptionCandidate:
    """One captioning model's text for one object crop at one frame."""

    video_id: str
    track_id: int
    frame: int
    model_id: str
    text: str


@dataclass(frozen=True)
class LabelCandidate:
    """One classifier label with confidence for one track."""

    video_id: str
    track_id: int
    label: str
    confidence: float


@dataclass(frozen=True)
class FrameTruth:
    hazard_track_ids: frozenset[int] = frozenset()
    hazard_captions: tuple[str, ...] = ()


@dataclass(frozen=True)
class VideoTruth:
    reaction_frame: int | None
    frames: Mapping[int, FrameTruth]


@dataclass(frozen=True)
class GroundTruth:
    videos: Mapping[str, VideoTruth]


@dataclass(frozen=True)
class FramePrediction:
    """Per-frame submission payload: state-change flag plus hazard (track, caption) pairs."""

    changed: bool
    hazards: tuple[tuple[int, str], ...] = ()


@dataclass
class TrackParseResult:
    """Parsed videos plus bookkeeping for the count-conservation check."""

    videos: list[VideoAnnotations]
    observations_read: int = 0
    dropped_degenerate: int = 0

    def by_id(self) -> dict[str, VideoAnnotations]:
        return {v.video_id: v for v in self.videos}


def _lines(stream: IO[str] | Iterable[str]) -> Iterator[tuple[int, str]]:
    for number, raw in enumerate(stream, start=1):
        line = raw.strip()
        if line:
            yield number, line


def _decode(line: str, number: int) -> dict:
    try:
        obj = json.loads(line)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc.msg}", number) from exc
    if not isinstance(obj, dict):
        raise SchemaError("expected a JSON object", number)
    return obj


def _require(obj: dict, keys: Sequence[str], number: int) -> None:
    missing = [k for k in keys if k not in obj]
    if missing:
        raise SchemaError(f"missing fields {missing}", number)


def parse_tracks(stream: IO[str] | Iterable[str]) -> TrackParseResult:
    """Parse the tracks JSONL stream.

    Each video's metadata line (``video``, ``frame_count``, ``width``,
    ``height``, ``fps``) must precede its observation lines (``video``,
    ``frame``, ``track_id``, ``kind``, ``bbox``). Boxes are clamped to the
    frame; boxes that collapse to zero width or height under clamping are
    dropped and counted in ``dropped_degenerate``.
    """
    metas: dict[str, dict] = {}
    observations: dict[str, dict[int, dict[int, tuple]]] = {}
    kinds: dict[tuple[str, int], TrackKind] = {}
    read = 0
    dropped = 0

    for number, line in _lines(stream):
        obj = _decode(line, number)
        if "frame_count" in obj:
            _require(obj, ("video", "frame_count", "width", "height", "fps"), number)
            video = str(obj["video"])
            if video in metas:
                raise SchemaError(f"duplicate metadata for video {video!r}", number)
            if not (int(obj["frame_count"]) > 0 and int(obj["width"]) > 0 and int(obj["height"]) > 0):
                raise SchemaError("frame_count/width/height must be positive", number)
            if not float(obj["fps"]) > 0:
                raise SchemaError("fps must be positive", number)
            metas[video] = obj
            observations[video] = {}
            continue

        _require(obj, ("video", "frame", "track_id", "kind", "bbox"), number)
        video = str(obj["video"])
        if video not in metas:
            raise SchemaError(f"observation for video {video!r} before its metadata line", number)
        meta = metas[video]
        read += 1

        frame = int(obj["frame"])
        if frame < 0 or frame >= int(meta["frame_count"]):
            raise SchemaError(f"frame {frame} outside [0, {meta['frame_count']})", number)
        track_id = int(obj["track_id"])
        if track_id < 0:
            raise SchemaError(f"negative track_id {track_id}", number)
        try:
            kind = TrackKind(obj["kind"])
        except ValueError:
            raise SchemaError(f"unknown kind {obj['kind']!r}", number) from None
        prior = kinds.setdefault((video, track_id), kind)
        if prior is not kind:
            raise SchemaError(f"track {track_id} changes kind from {prior.value}", number)

        bbox = obj["bbox"]
        if not (isinstance(bbox, list) and len(bbox) == 4):
            raise SchemaError("bbox must be [x1, y1, x2, y2]", number)
        try:
            x1, y1, x2, y2 = (float(v) for v in bbox)
        except (TypeError, ValueError):
            raise SchemaError("bbox coordinates must be numeric", number) from None
        if not all(math.isfinite(v) for v in (x1, y1, x2, y2)):
            raise SchemaError("bbox coordinates must be finite", number)
        if x2 <= x1 or y2 <= y1:
            raise SchemaError(f"invalid bbox ordering {bbox}", number)

        width, height = int(meta["width"]), int(meta["height"])
        x1, x2 = max(0.0, min(x1, width)), max(0.0, min(x2, width))
        y1, y2 = max(0.0, min(y1, height)), max(0.0, min(y2, height))
        if x2 <= x1 or y2 <= y1:
            dropped += 1
            continue

        per_track = observations[video].setdefault(track_id, {})
        if frame in per_track:
            raise SchemaError(f"duplicate observation (video={video!r}, track={track_id}, frame={frame})", number)
        per_track[frame] = (x1, y1, x2, y2)

    if dropped:
        logger.warning("dropped %d degenerate bbox(es) after clamping", dropped)

    videos = []
    for video in sorted(metas):
        meta = metas[video]
        tracks = {}
        for track_id in sorted(observations[video]):
            per_track = observations[video][track_id]
            obs = tuple(
                Observation(frame, BBox(*per_track[frame])) for frame in sorted(per_track)
            )
            tracks[track_id] = Track(video, track_id, kinds[(video, track_id)], obs)
        videos.append(
            VideoAnnotations(
                video_id=video,
                frame_count=int(meta["frame_count"]),
                frame_width=int(meta["width"]),
                frame_height=int(meta["height"]),
                fps=float(meta["fps"]),
                tracks=tracks,
            )
        )
    return TrackParseResult(videos=videos, observations_read=read, dropped_degenerate=dropped)


def write_tracks(videos: Iterable[VideoAnnotations], stream: IO[str]) -> None:
    """Serialize videos to the tracks JSONL format (canonical order, round-trips)."""
    for video in sorted(videos, key=lambda v: v.video_id):
        stream.write(
            json.dumps(
                {
                    "video": video.video_id,
                    "frame_count": video.frame_count,
                    "width": video.frame_width,
                    "height": video.frame_height,
                    "fps": video.fps,
                }
            )
            + "\n"
        )
        for track_id in sorted(video.tracks):
            track = video.tracks[track_id]
            for obs in track.observations:
                b = obs.bbox
                stream.write(
                    json.dumps(
                        {
                            "video": video.video_id,
                            "frame": obs.frame,
                            "track_id": track_id,
                            "kind": track.kind.value,
                            "bbox": [b.x1, b.y1, b.x2, b.y2],
                        }
                    )
                    + "\n"
                )


def parse_caption_candidates(stream: IO[str] | Iterable[str]) -> list[CaptionCandidate]:
    """Parse caption-candidate JSONL; strips text, drops empty-text lines with a warning."""
    out: list[CaptionCandidate] = []
    dropped = 0
    for number, line in _lines(stream):
        obj = _decode(line, number)
        _require(obj, ("video", "track_id", "frame", "model", "text"), number)
        text = str(obj["text"]).strip()
        if not text:
            dropped += 1
            continue
        out.append(
            CaptionCandidate(
                video_id=str(obj["video"]),
                track_id=int(obj["track_id"]),
                frame=int(obj["frame"]),
                model_id=str(obj["model"]),
                text=text,
            )
        )
    if dropped:
        logger.warning("dropped %d empty caption candidate(s)", dropped)
    return out


def parse_label_candidates(stream: IO[str] | Iterable[str]) -> list[LabelCandidate]:
    """Parse label-candidate JSONL; one entry per (video, track, label)."""
    out: list[LabelCandidate] = []
    seen: set[tuple[str, int, str]] = set()
    for number, line in _lines(stream):
        obj = _decode(line, number)
        _require(obj, ("video", "track_id", "label", "confidence"), number)
        confidence = float(obj["confidence"])
        if not 0.0 <= confidence <= 1.0:
            raise SchemaError(f"confidence {confidence} outside [0, 1]", number)
        key = (str(obj["video"]), int(obj["track_id"]), str(obj["label"]))
        if key in seen:
            raise SchemaError(f"duplicate label entry {key}", number)
        seen.add(key)
        out.append(LabelCandidate(key[0], key[1], key[2], confidence))
    return out


def load_ground_truth(path: Path) -> GroundTruth:
    with open(path, encoding="utf-8") as handle:
        doc = json.load(handle)
    videos: dict[str, VideoTruth] = {}
    for video_id, entry in doc.items():
        frames = {
            int(frame): FrameTruth(
                hazard_track_ids=frozenset(int(t) for t in payload.get("hazard_track_ids", [])),
                hazard_captions=tuple(str(c) for c in payload.get("hazard_captions", [])),
            )
            for frame, payload in entry.get("frames", {}).items()
        }
        reaction = entry.get("reaction_frame")
        videos[video_id] = VideoTruth(
            reaction_frame=None if reaction is None else int(reaction),
            frames=frames,
        )
    return GroundTruth(videos=videos)


def write_ground_truth(truth: GroundTruth, path: Path) -> None:
    doc = {
        video_id: {
            "reaction_frame": vt.reaction_frame,
            "frames": {
                str(frame): {
                    "hazard_track_ids": sorted(ft.hazard_track_ids),
                    "hazard_captions": list(ft.hazard_captions),
                }
                for frame, ft in sorted(vt.frames.items())
            },
        }
        for video_id, vt in sorted(truth.videos.items())
    }
    with open(path, "w", encoding="utf-8") as handle:
        json.dump(doc, handle, indent=2, sort_keys=True)
        handle.write("\n")


def submission_header(slots: int) -> list[str]:
    header = ["ID", "Driver_State_Changed"]
    for i in range(slots):
        header += [f"Hazard_Track_{i}", f"Hazard_Name_{i}"]
    return header


def write_submission(
    results: Mapping[str, Sequence[FramePrediction]],
    stream: IO[str],
    slots: int = DEFAULT_HAZARD_SLOTS,
    capitalize_bools: bool = True,
) -> None:
    """Write the submission CSV: one row per frame, rows ordered by (video, frame).

    Raises ValueError if any frame carries more than ``slots`` hazards;
    truncation is the caller's decision, not this writer's.
    """
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(submission_header(slots))
    for video_id in sorted(results):
        for frame, pred in enumerate(results[video_id]):
            if len(pred.hazards) > slots:
                raise ValueError(
                    f"{video_id} frame {frame}: {len(pred.hazards)} hazards exceed {slots} slots"
                )
            flag = str(bool(pred.changed))
            if not capitalize_bools:
                flag = flag.lower()
            row: list[str] = [f"{video_id}_{frame}", flag]
            for track_id, caption in pred.hazards:
                row += [str(track_id), caption]
            row += [""] * (2 * (slots - len(pred.hazards)))
            writer.writerow(row)


def read_submission(stream: IO[str] | Iterable[str]) -> dict[str, list[FramePrediction]]:
    """Parse a submission CSV back into per-video frame predictions."""
    reader = csv.reader(stream)
    try:
        header = next(reader)
    except StopIteration:
        raise ParseError("empty submission") from None
    if len(header) < 2 or header[0] != "ID" or header[1] != "Driver_State_Changed":
        raise SchemaError(f"unexpected header start {header[:2]}")
    if (len(header) - 2) % 2 != 0:
        raise SchemaError("header must pair Hazard_Track_i with Hazard_Name_i")
    slots = (len(header) - 2) // 2
    if header != submission_header(slots):
        raise SchemaError("header columns do not match the submission layout")

    rows: dict[str, dict[int, FramePrediction]] = {}
    for number, row in enumerate(reader, start=2):
        if not row:
            continue
        if len(row) != len(header):
            raise SchemaError(f"expected {len(header)} columns, got {len(row)}", number)
        if "_" not in row[0]:
            raise SchemaError(f"ID {row[0]!r} is not <video>_<frame>", number)
        video_id, frame_text = row[0].rsplit("_", 1)
        try:
            frame = int(frame_text)
        except ValueError:
            raise SchemaError(f"ID {row[0]!r} has a non-integer frame", number) from None
        if row[1] not in ("True", "False", "true", "false"):
            raise SchemaError(f"Driver_State_Changed {row[1]!r} is not a boolean", number)
        hazards = []
        for i in range(slots):
            track_field, name_field = row[2 + 2 * i], row[3 + 2 * i]
            if track_field == "":
                continue
            try:
                hazards.append((int(track_field), name_field))
            except ValueError:
                raise SchemaError(f"Hazard_Track_{i} {track_field!r} is not an integer", number) from None
        per_video = rows.setdefault(video_id, {})
        if frame in per_video:
            raise SchemaError(f"duplicate row for {row[0]}", number)
        per_video[frame] = FramePrediction(changed=row[1].lower() == "true", hazards=tuple(hazards))

    out: dict[str, list[FramePrediction]] = {}
    for video_id, frames in rows.items():
        expected = range(len(frames))
        if sorted(frames) != list(expected):
            raise SchemaError(f"video {video_id!r}: frames are not contiguous from 0")
        out[video_id] = [frames[i] for i in expected]
    return out


def _with_file_context(path: Path, exc: Exception) -> Exception:
    return type(exc)(f"{path}: {exc}")


def load_tracks(path: Path) -> TrackParseResult:
    with open(path, encoding="utf-8") as handle:
        try:
            return parse_tracks(handle)
        except (ParseError, SchemaError) as exc:
            raise _with_file_context(path, exc) from None


def load_caption_candidates(path: Path) -> list[CaptionCandidate]:
    with open(path, encoding="utf-8") as handle:
        try:
            return parse_caption_candidates(handle)
        except (ParseError, SchemaError) as exc:
            raise _with_file_context(path, exc) from None


def load_label_candidates(path: Path) -> list[LabelCandidate]:
    with open(path, encoding="utf-8") as handle:
        try:
            return parse_label_candidates(handle)
        except (ParseError, SchemaError) as exc:
            raise _with_file_context(path, exc) from None


def dumps_tracks(videos: Iterable[VideoAnnotations]) -> str:
    buffer = io.StringIO()
    write_tracks(videos, buffer)
    return buffer.getvalue()

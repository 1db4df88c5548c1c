"""Batch candidate extraction: crop sampled observations, run every model, emit JSONL."""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from pathlib import Path

from PIL import Image

from dashhazard_extractor.dataset import frame_path, load_annotations
from dashhazard_extractor.models import resolve_captioner, resolve_classifier

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ExtractorJob:
    dataset_root: Path
    captioners: tuple[str, ...]
    classifier: str | None
    stride: int
    out_captions: Path
    out_labels: Path

    def __post_init__(self) -> None:
        if self.stride < 1:
            raise ValueError("stride must be at least 1")
        if not self.captioners and self.classifier is None:
            raise ValueError("need at least one model id")


@dataclass(frozen=True)
class ExtractionReport:
    caption_lines: int
    label_lines: int
    sampled_crops: int
    skipped_crops: int


def _observations_by_track(entry: dict) -> dict[int, list[tuple[int, list[float]]]]:
    per_track: dict[int, list[tuple[int, list[float]]]] = {}
    for frame, boxes in entry["frames"].items():
        for box in boxes:
            per_track.setdefault(int(box["track_id"]), []).append(
                (int(frame), [float(v) for v in box["bbox"]])
            )
    for rows in per_track.values():
        rows.sort()
    return per_track


def _crop(image: Image.Image, bbox: list[float]) -> Image.Image | None:
    x1 = max(0, int(bbox[0]))
    y1 = max(0, int(bbox[1]))
    x2 = min(image.width, int(bbox[2]))
    y2 = min(image.height, int(bbox[3]))
    if x2 <= x1 or y2 <= y1:
        return None
    return image.crop((x1, y1, x2, y2))


def extract_candidates(job: ExtractorJob) -> ExtractionReport:
    """Run every model over every stride-sampled (track, frame) crop.

    Models are resolved before any image is touched, so a bad model id fails
    the job up front. Caption lines go out one per (crop, captioner); labels
    are aggregated to the maximum confidence per (video, track, label).
    Output files are written atomically.
    """
    captioners = [resolve_captioner(model_id) for model_id in job.captioners]
    classifier = None if job.classifier is None else resolve_classifier(job.classifier)
    annotations = load_annotations(job.dataset_root)

    caption_rows: list[dict] = []
    best_labels: dict[tuple[str, int, str], float] = {}
    sampled = 0
    skipped = 0
    for video_id in sorted(annotations):
        per_track = _observations_by_track(annotations[video_id])
        for track_id in sorted(per_track):
            for frame, bbox in per_track[track_id][:: job.stride]:
                with Image.open(frame_path(job.dataset_root, video_id, frame)) as image:
                    crop = _crop(image.convert("RGB"), bbox)
                if crop is None:
                    skipped += 1
                    logger.warning(
                        "%s track %d frame %d: zero-area crop skipped", video_id, track_id, frame
                    )
                    continue
                sampled += 1
                for captioner in captioners:
                    caption_rows.append(
                        {
                            "video": video_id,
                            "track_id": track_id,
                            "frame": frame,
                            "model": captioner.model_id,
                            "text": captioner.describe(crop),
                        }
                    )
                if classifier is not None:
                    label, confidence = classifier.classify(crop)
                    key = (video_id, track_id, label)
                    best_labels[key] = max(best_labels.get(key, 0.0), confidence)

    _write_jsonl(job.out_captions, caption_rows)
    label_rows = [
        {"video": video, "track_id": track, "label": label, "confidence": confidence}
        for (video, track, label), confidence in sorted(best_labels.items())
    ]
    _write_jsonl(job.out_labels, label_rows)
    return ExtractionReport(
        caption_lines=len(caption_rows),
        label_lines=len(label_rows),
        sampled_crops=sampled,
        skipped_crops=skipped,
    )


def _write_jsonl(path: Path, rows: list[dict]) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_suffix(path.suffix + ".tmp")
    with open(tmp, "w", encoding="utf-8") as handle:
        for row in rows:
            handle.write(json.dumps(row) + "\n")
    tmp.replace(path)

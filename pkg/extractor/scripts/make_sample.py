"""Regenerate the checked-in 2-video mini dataset under extractor/sample/.

Frames are solid backgrounds with one filled rectangle per visible track so
the stub models produce stable colors; expected.json records the contents for
count assertions in the tests.
"""

from __future__ import annotations

import json
import pickle
import wave
from pathlib import Path

from PIL import Image, ImageDraw

SAMPLE_DIR = Path(__file__).resolve().parent.parent / "sample"
WIDTH, HEIGHT = 192, 144
BACKGROUND = (90, 90, 90)
TRACK_COLORS = {1: (200, 40, 40), 2: (50, 80, 200), 7: (50, 170, 60)}


def moving_bbox(start_x: float, y: float, dx: float, frame: int, w: float = 36, h: float = 28):
    x = start_x + dx * frame
    return [x, y, x + w, y + h]


def build_annotations() -> dict:
    video_a_frames = {}
    for frame in range(10):
        video_a_frames[frame] = [
            {"track_id": 1, "kind": "challenge_object", "bbox": moving_bbox(20, 60, 6, frame)},
            {"track_id": 2, "kind": "traffic_scene", "bbox": moving_bbox(120, 20, 2, frame)},
        ]
    video_b_frames = {}
    for frame in range(8):
        boxes = []
        if frame < 6:
            boxes.append(
                {"track_id": 1, "kind": "challenge_object", "bbox": moving_bbox(30, 40, 4, frame)}
            )
        if 2 <= frame < 6:
            boxes.append(
                {"track_id": 7, "kind": "challenge_object", "bbox": moving_bbox(100, 90, 3, frame)}
            )
        video_b_frames[frame] = boxes
    return {
        "video_a": {
            "frame_count": 10,
            "width": WIDTH,
            "height": HEIGHT,
            "fps": 10.0,
            "frames": video_a_frames,
        },
        "video_b": {
            "frame_count": 8,
            "width": WIDTH,
            "height": HEIGHT,
            "fps": 10.0,
            "frames": video_b_frames,
        },
    }


def render_frames(annotations: dict) -> None:
    for video_id, entry in annotations.items():
        frame_dir = SAMPLE_DIR / "frames" / video_id
        frame_dir.mkdir(parents=True, exist_ok=True)
        for frame in range(entry["frame_count"]):
            image = Image.new("RGB", (WIDTH, HEIGHT), BACKGROUND)
            draw = ImageDraw.Draw(image)
            for box in entry["frames"].get(frame, []):
                x1, y1, x2, y2 = box["bbox"]
                draw.rectangle((x1, y1, x2 - 1, y2 - 1), fill=TRACK_COLORS[box["track_id"]])
            image.save(frame_dir / f"{frame:06d}.png")


def write_audio() -> None:
    audio_dir = SAMPLE_DIR / "audio"
    audio_dir.mkdir(parents=True, exist_ok=True)
    with wave.open(str(audio_dir / "video_a.wav"), "wb") as handle:
        handle.setnchannels(1)
        handle.setsampwidth(2)
        handle.setframerate(8000)
        handle.writeframes(b"\x00\x00" * 4000)


def main() -> None:
    annotations = build_annotations()
    SAMPLE_DIR.mkdir(parents=True, exist_ok=True)
    with open(SAMPLE_DIR / "annotations.pkl", "wb") as handle:
        pickle.dump(annotations, handle, protocol=4)
    render_frames(annotations)
    write_audio()

    expected = {
        "videos": {
            video_id: {
                "frame_count": entry["frame_count"],
                "width": entry["width"],
                "height": entry["height"],
                "fps": entry["fps"],
                "observations": sum(len(b) for b in entry["frames"].values()),
                "tracks": {
                    str(track_id): sum(
                        1
                        for boxes in entry["frames"].values()
                        for b in boxes
                        if b["track_id"] == track_id
                    )
                    for track_id in sorted(
                        {b["track_id"] for boxes in entry["frames"].values() for b in boxes}
                    )
                },
            }
            for video_id, entry in annotations.items()
        },
    }
    expected["total_observations"] = sum(
        v["observations"] for v in expected["videos"].values()
    )
    with open(SAMPLE_DIR / "expected.json", "w", encoding="utf-8") as handle:
        json.dump(expected, handle, indent=2, sort_keys=True)
        handle.write("\n")
    print(f"sample written under {SAMPLE_DIR}")


if __name__ == "__main__":
    main()

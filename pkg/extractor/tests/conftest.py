import json
import pickle
from pathlib import Path

import pytest
from PIL import Image

SAMPLE_DIR = Path(__file__).resolve().parent.parent / "sample"


@pytest.fixture(scope="session")
def sample_dir() -> Path:
    return SAMPLE_DIR


@pytest.fixture(scope="session")
def expected() -> dict:
    return json.loads((SAMPLE_DIR / "expected.json").read_text())


def write_dataset(root: Path, annotations: dict, frame_color=(90, 90, 90)) -> Path:
    """Write a minimal dataset (pickle + blank frames) for ad-hoc cases."""
    root.mkdir(parents=True, exist_ok=True)
    with open(root / "annotations.pkl", "wb") as handle:
        pickle.dump(annotations, handle, protocol=4)
    for video_id, entry in annotations.items():
        frame_dir = root / "frames" / video_id
        frame_dir.mkdir(parents=True, exist_ok=True)
        for frame in range(entry["frame_count"]):
            Image.new("RGB", (entry["width"], entry["height"]), frame_color).save(
                frame_dir / f"{frame:06d}.png"
            )
    return root

"""Captioner and classifier registry.

Model identifiers are configuration, not code: the built-in ``stub-*`` models
are deterministic pixel-statistics describers used for tests and offline runs,
and ``hf:<model_id>`` wraps any Hugging Face image-to-text pipeline when the
weights are available locally.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from PIL import Image


class ModelLoadError(Exception):
    """A requested model id could not be resolved or loaded."""


PALETTE = (
    ("red", (200, 40, 40)),
    ("orange", (230, 140, 40)),
    ("yellow", (220, 210, 60)),
    ("green", (50, 170, 60)),
    ("blue", (50, 80, 200)),
    ("purple", (140, 60, 170)),
    ("white", (235, 235, 235)),
    ("gray", (128, 128, 128)),
    ("black", (25, 25, 25)),
)


def _mean_rgb(image: Image.Image) -> tuple[float, float, float]:
    pixels = np.asarray(image.convert("RGB"), dtype=np.float64)
    means = pixels.reshape(-1, 3).mean(axis=0)
    return float(means[0]), float(means[1]), float(means[2])


def _nearest_color(rgb: tuple[float, float, float]) -> str:
    return min(PALETTE, key=lambda nc: sum((a - b) ** 2 for a, b in zip(rgb, nc[1])))[0]


def _size_word(image: Image.Image) -> str:
    area = image.width * image.height
    if area < 1_500:
        return "small"
    if area > 10_000:
        return "large"
    return "medium"


@dataclass(frozen=True)
class Captioner:
    model_id: str
    describe: Callable[[Image.Image], str]


@dataclass(frozen=True)
class Classifier:
    model_id: str
    classify: Callable[[Image.Image], tuple[str, float]]


def _color_caption(image: Image.Image) -> str:
    return f"a {_size_word(image)} {_nearest_color(_mean_rgb(image))} object"


def _shape_caption(image: Image.Image) -> str:
    if image.width > 1.2 * image.height:
        shape = "wide"
    elif image.height > 1.2 * image.width:
        shape = "tall"
    else:
        shape = "boxy"
    return f"a {shape} {_nearest_color(_mean_rgb(image))} thing"


def _color_classify(image: Image.Image) -> tuple[str, float]:
    rgb = _mean_rgb(image)
    color = _nearest_color(rgb)
    # confidence grows with distance from neutral gray, capped into [0.5, 0.99]
    spread = math.dist(rgb, (128.0, 128.0, 128.0)) / math.dist((0.0, 0.0, 0.0), (128.0, 128.0, 128.0))
    return f"{color} object", round(min(0.99, 0.5 + 0.49 * spread), 4)


_STUB_CAPTIONERS = {
    "stub-color": _color_caption,
    "stub-shape": _shape_caption,
}

_STUB_CLASSIFIERS = {
    "stub-classifier": _color_classify,
}


def _load_hf_captioner(model_id: str) -> Captioner:
    try:
        from transformers import pipeline
    except ImportError as exc:
        raise ModelLoadError(f"{model_id}: transformers is not installed") from exc
    try:
        runner = pipeline("image-to-text", model=model_id.removeprefix("hf:"))
    except Exception as exc:
        raise ModelLoadError(f"{model_id}: {exc}") from exc

    def describe(image: Image.Image) -> str:
        output = runner(image)
        return str(output[0]["generated_text"]).strip()

    return Captioner(model_id=model_id, describe=describe)


def resolve_captioner(model_id: str) -> Captioner:
    if model_id in _STUB_CAPTIONERS:
        return Captioner(model_id=model_id, describe=_STUB_CAPTIONERS[model_id])
    if model_id.startswith("hf:"):
        return _load_hf_captioner(model_id)
    raise ModelLoadError(f"unknown captioner id {model_id!r}")


def resolve_classifier(model_id: str) -> Classifier:
    if model_id in _STUB_CLASSIFIERS:
        return Classifier(model_id=model_id, classify=_STUB_CLASSIFIERS[model_id])
    raise ModelLoadError(f"unknown classifier id {model_id!r}")

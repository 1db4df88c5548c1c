"""Dataset bridge: native annotation pickles and frame images in, core-format JSONL out."""

__version__ = "0.1.0"

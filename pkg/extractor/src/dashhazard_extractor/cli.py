"""The ``extract`` command: dataset root in, core-format JSONL files out."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from dashhazard_extractor.candidates import ExtractorJob, extract_candidates
from dashhazard_extractor.dataset import AnnotationError, collect_audio, convert_annotations
from dashhazard_extractor.models import ModelLoadError


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")
    parser = argparse.ArgumentParser(
        prog="extract",
        description="Convert native annotations and batch-run caption/label models over object crops.",
    )
    parser.add_argument("--dataset", type=Path, required=True, help="dataset root directory")
    parser.add_argument(
        "--models",
        nargs="+",
        default=["stub-color", "stub-shape"],
        help="captioner model ids (stub-color, stub-shape, hf:<model>)",
    )
    parser.add_argument(
        "--classifier", default="stub-classifier", help="classifier model id ('' disables labels)"
    )
    parser.add_argument("--stride", type=int, default=1, help="caption every k-th observation per track")
    parser.add_argument("--out-captions", type=Path, required=True)
    parser.add_argument("--out-labels", type=Path, required=True)
    parser.add_argument("--out-tracks", type=Path, help="also convert annotations to tracks JSONL")
    parser.add_argument("--copy-audio", type=Path, help="copy dataset audio WAVs into this directory")
    args = parser.parse_args(argv)

    try:
        if args.out_tracks is not None:
            report = convert_annotations(args.dataset, args.out_tracks)
            print(
                f"wrote {args.out_tracks}: {report.videos} videos, "
                f"{report.metadata_lines} metadata + {report.observation_lines} observation lines"
            )
        if args.copy_audio is not None:
            copied = collect_audio(args.dataset, args.copy_audio)
            print(f"copied {copied} audio file(s) to {args.copy_audio}")
        job = ExtractorJob(
            dataset_root=args.dataset,
            captioners=tuple(args.models),
            classifier=args.classifier or None,
            stride=args.stride,
            out_captions=args.out_captions,
            out_labels=args.out_labels,
        )
        report = extract_candidates(job)
    except AnnotationError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return 1
    except (ModelLoadError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    print(
        f"wrote {args.out_captions} ({report.caption_lines} lines) and "
        f"{args.out_labels} ({report.label_lines} lines); "
        f"{report.sampled_crops} crops, {report.skipped_crops} skipped"
    )
    return 0


if __name__ == "__main__":
    sys.exit(main())

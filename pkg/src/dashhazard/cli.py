"""Command-line surface: run the pipeline, generate fixtures, score submissions, inspect videos."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from dashhazard.caption import CaptionMode, caption_table, word_scores
from dashhazard.fixture import generate_fixture
from dashhazard.hazard import ConfigError, compute_weak_scores
from dashhazard.metrics import MetricsError
from dashhazard.model import ParseError, SchemaError
from dashhazard.pipeline import (
    ReactionMode,
    RunConfig,
    analyze_video,
    apply_overrides,
    config_from_dict,
    run_pipeline,
    score_submission,
)

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_INPUT_ERROR = 1
EXIT_CONFIG_ERROR = 2


def _add_run_options(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--tracks", type=Path, required=True, help="tracks JSONL file")
    parser.add_argument("--audio-dir", type=Path, help="directory of <video_id>.wav files")
    parser.add_argument("--captions", type=Path, help="caption-candidate JSONL file")
    parser.add_argument("--labels", type=Path, help="label-candidate JSONL file")
    parser.add_argument("--config", type=Path, help="run configuration JSON file")
    parser.add_argument("--seed", type=int, help="ensemble seed override")
    parser.add_argument("--workers", type=int, help="video worker count")
    parser.add_argument(
        "--reaction-mode", choices=[m.value for m in ReactionMode], help="reaction detector(s)"
    )
    parser.add_argument(
        "--caption-mode", choices=[m.value for m in CaptionMode], help="caption strategy"
    )
    parser.add_argument("--top-k", type=int, help="hazards selected per video")
    parser.add_argument("--epsilon", type=float, help="noise parameter (larger = less noise)")
    parser.add_argument("--draws", type=int, help="noisy weight draws per ballot")
    parser.add_argument("--chunksize", type=int, help="samples per slope estimate")


def _build_config(args: argparse.Namespace, out_path: Path, report: Path | None) -> RunConfig:
    doc = {}
    if args.config is not None:
        with open(args.config, encoding="utf-8") as handle:
            doc = json.load(handle)
    cfg = config_from_dict(doc, tracks_path=args.tracks, out_path=out_path)
    overrides = {
        "audio_dir": args.audio_dir,
        "captions_path": args.captions,
        "labels_path": args.labels,
        "report_path": report,
        "seed": args.seed,
        "workers": args.workers,
        "reaction_mode": None if args.reaction_mode is None else ReactionMode(args.reaction_mode),
        "caption_mode": None if args.caption_mode is None else CaptionMode(args.caption_mode),
        "top_k": args.top_k,
        "epsilon": args.epsilon,
        "num_draws": args.draws,
        "chunksize": args.chunksize,
    }
    return apply_overrides(cfg, **{k: v for k, v in overrides.items() if v is not None})


def _cmd_run(args: argparse.Namespace) -> int:
    cfg = _build_config(args, out_path=args.out, report=args.report)
    result = run_pipeline(cfg)
    totals = result.report["totals"]
    print(f"wrote {result.out_path} ({totals['frames']} rows, {totals['videos']} videos)")
    print(f"wrote {result.report_path}")
    if totals["failures"]:
        print(f"WARNING: {totals['failures']} video(s) failed; see report", file=sys.stderr)
    return EXIT_OK


def _cmd_fixture(args: argparse.Namespace) -> int:
    manifest = generate_fixture(
        out_dir=args.out,
        seed=args.seed,
        n_videos=args.videos,
        frame_count=args.frames,
        fps=args.fps,
    )
    print(f"wrote fixture with {len(manifest.videos)} video(s) under {manifest.out_dir}")
    print(f"tracks:   {manifest.tracks_path}")
    print(f"captions: {manifest.captions_path}")
    print(f"labels:   {manifest.labels_path}")
    print(f"truth:    {manifest.truth_path}")
    print(f"audio:    {manifest.audio_dir}")
    return EXIT_OK


def _cmd_score(args: argparse.Namespace) -> int:
    report = score_submission(args.submission, args.truth)
    doc = report.to_dict()
    if args.report is not None:
        args.report.parent.mkdir(parents=True, exist_ok=True)
        with open(args.report, "w", encoding="utf-8") as handle:
            json.dump(doc, handle, indent=2, sort_keys=True)
            handle.write("\n")
        print(f"wrote {args.report}")
    print(json.dumps(doc["aggregate"], indent=2, sort_keys=True))
    return EXIT_OK


def _cmd_inspect(args: argparse.Namespace) -> int:
    cfg = _build_config(args, out_path=Path("unused.csv"), report=None)
    from dashhazard.model import load_caption_candidates, load_label_candidates, load_tracks

    videos = load_tracks(cfg.tracks_path).by_id()
    if args.video not in videos:
        raise SchemaError(f"video {args.video!r} not present in {cfg.tracks_path}")
    video = videos[args.video]
    captions = (
        [c for c in load_caption_candidates(cfg.captions_path) if c.video_id == args.video]
        if cfg.captions_path
        else []
    )
    labels = (
        [l for l in load_label_candidates(cfg.labels_path) if l.video_id == args.video]
        if cfg.labels_path
        else []
    )
    result = analyze_video(video, captions, labels, cfg)

    print(f"video {args.video}: {video.frame_count} frames, {len(video.tracks)} tracks")
    print(f"reaction: frame={result.verdict.frame} source={result.verdict.source.value}")
    weak = compute_weak_scores(video, labels, result.verdict, cfg.ensemble)
    print("track  w1     w2     w3     w4     w5     w6     combined  votes")
    for track_id, scores in weak.items():
        combined = result.ballot.base_combined.get(track_id, 0.0)
        votes = result.ballot.votes.get(track_id, 0)
        marker = " *" if track_id in result.ballot.winners else ""
        cells = "  ".join(f"{s:.3f}" for s in scores)
        print(f"{track_id:>5}  {cells}  {combined:>8.4f}  {votes:>5}{marker}")
    print(f"winners: {list(result.ballot.winners)}")
    for track_id in result.ballot.winners:
        track = video.tracks[track_id]
        areas = track.area_by_frame()
        usable = [c for c in captions if c.track_id == track_id and c.frame in areas]
        table = caption_table(usable, areas)
        print(f"caption table, track {track_id}:")
        for text, score in sorted(table.items(), key=lambda kv: (-kv[1], kv[0]))[:10]:
            print(f"  {score:>12.1f}  {text}")
        words = word_scores(usable, areas, cfg.word)
        top_words = sorted(words.items(), key=lambda kv: (-kv[1], kv[0]))[:10]
        if top_words:
            print(f"word scores, track {track_id}: " + ", ".join(f"{w}={s:.0f}" for w, s in top_words))
        print(f"final caption: {result.captions.get(track_id, '')!r}")
    for warning in result.warnings:
        print(f"warning: {warning}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dashhazard",
        description="Dashcam hazard analysis: reactions, hazardous objects, captions, scoring.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run the full pipeline and write a submission CSV")
    _add_run_options(run)
    run.add_argument("--out", type=Path, required=True, help="submission CSV output path")
    run.add_argument("--report", type=Path, help="run report JSON path")
    run.set_defaults(func=_cmd_run)

    fixture = sub.add_parser("fixture", help="generate a synthetic fixture")
    fixture.add_argument("--out", type=Path, required=True, help="fixture output directory")
    fixture.add_argument("--seed", type=int, default=1)
    fixture.add_argument("--videos", type=int, default=5)
    fixture.add_argument("--frames", type=int, default=150)
    fixture.add_argument("--fps", type=float, default=30.0)
    fixture.set_defaults(func=_cmd_fixture)

    score = sub.add_parser("score", help="score a submission against ground truth")
    score.add_argument("--submission", type=Path, required=True)
    score.add_argument("--truth", type=Path, required=True)
    score.add_argument("--report", type=Path, help="score report JSON path")
    score.set_defaults(func=_cmd_score)

    inspect = sub.add_parser("inspect", help="print one video's ballot and caption tables")
    _add_run_options(inspect)
    inspect.add_argument("--video", required=True, help="video id to inspect")
    inspect.set_defaults(func=_cmd_inspect)

    return parser


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ParseError, SchemaError, MetricsError, FileNotFoundError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT_ERROR
    except (ConfigError, json.JSONDecodeError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG_ERROR


if __name__ == "__main__":
    sys.exit(main())

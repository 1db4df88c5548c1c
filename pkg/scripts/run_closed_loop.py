"""Closed-loop experiment: generate a synthetic corpus, run the pipeline, and
compare the voting ensemble against the center-distance baseline.

Usage:
    python scripts/run_closed_loop.py --videos 100 --seed 1 --out /tmp/closed_loop
"""

from __future__ import annotations

import argparse
import time
from pathlib import Path

from dashhazard.fixture import generate_fixture
from dashhazard.hazard import baseline_center
from dashhazard.metrics import score_run
from dashhazard.model import FramePrediction, load_ground_truth, load_tracks
from dashhazard.pipeline import RunConfig, run_pipeline, score_submission


def baseline_predictions(tracks_path: Path, changed_by_video):
    videos = load_tracks(tracks_path).by_id()
    predictions = {}
    for video_id, video in videos.items():
        winner = baseline_center(video)
        visible = set() if winner is None else set(video.tracks[winner].frames())
        predictions[video_id] = [
            FramePrediction(
                changed=changed_by_video[video_id][frame],
                hazards=((winner, ""),) if winner is not None and frame in visible else (),
            )
            for frame in range(video.frame_count)
        ]
    return predictions


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--videos", type=int, default=100)
    parser.add_argument("--seed", type=int, default=1)
    parser.add_argument("--workers", type=int, default=4)
    parser.add_argument("--out", type=Path, default=Path("/tmp/dashhazard_closed_loop"))
    args = parser.parse_args()

    started = time.perf_counter()
    manifest = generate_fixture(args.out, seed=args.seed, n_videos=args.videos)
    print(f"generated {args.videos} videos under {args.out} in {time.perf_counter() - started:.1f}s")

    cfg = RunConfig(
        tracks_path=manifest.tracks_path,
        out_path=args.out / "submission.csv",
        audio_dir=manifest.audio_dir,
        captions_path=manifest.captions_path,
        labels_path=manifest.labels_path,
        workers=args.workers,
    )
    run_started = time.perf_counter()
    run = run_pipeline(cfg)
    print(f"pipeline finished in {time.perf_counter() - run_started:.1f}s")

    tolerance = 2 * cfg.speed.chunksize
    reaction_hits = hazard_hits = 0
    for video in manifest.videos:
        result = run.results[video.video_id]
        if result.verdict.frame is not None and abs(result.verdict.frame - video.reaction_frame) <= tolerance:
            reaction_hits += 1
        if result.ballot.winners == (video.hazard_track_id,):
            hazard_hits += 1
    print(f"reaction recovered within ±{tolerance} frames: {reaction_hits}/{args.videos}")
    print(f"hazard track recovered: {hazard_hits}/{args.videos}")

    ensemble = score_submission(run.out_path, manifest.truth_path)
    changed = {vid: [p.changed for p in rows] for vid, rows in run.predictions.items()}
    baseline = score_run(
        baseline_predictions(manifest.tracks_path, changed),
        load_ground_truth(manifest.truth_path),
    )

    print()
    print(f"{'':14}{'reaction':>10}{'hazard':>10}{'caption':>10}{'overall':>10}")
    for name, scores in (("ensemble", ensemble.aggregate), ("baseline", baseline.aggregate)):
        print(
            f"{name:14}{scores.reaction:>10.4f}{scores.hazard:>10.4f}"
            f"{scores.caption:>10.4f}{scores.overall:>10.4f}"
        )
    print(f"\ntotal wall time: {time.perf_counter() - started:.1f}s")


if __name__ == "__main__":
    main()

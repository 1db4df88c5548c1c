"""End-to-end run: parse inputs, analyze each video, write the submission and a run report.

Videos are analyzed independently (optionally by a worker pool) and results
are always gathered and written in (video_id, frame) order, so the submission
bytes do not depend on the worker count.
"""

from __future__ import annotations

import json
import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from enum import Enum
from pathlib import Path
from typing import Mapping, Sequence

from dashhazard.caption import CaptionMode, WordConfig, caption_track
from dashhazard.hazard import ConfigError, EnsembleConfig, HazardBallot, compute_weak_scores, vote
from dashhazard.metrics import ScoreReport, score_run
from dashhazard.model import (
    DEFAULT_HAZARD_SLOTS,
    CaptionCandidate,
    FramePrediction,
    LabelCandidate,
    VideoAnnotations,
    load_caption_candidates,
    load_ground_truth,
    load_label_candidates,
    load_tracks,
    read_submission,
    write_submission,
)
from dashhazard.reaction import (
    DEFAULT_ENVELOPE_MS,
    DEFAULT_SOUND_PEAK,
    ReactionSource,
    ReactionVerdict,
    SpeedConfig,
    fuse_reactions,
    load_wav,
    sound_anomaly,
    verdict_to_frames,
    video_speed_anomaly,
)
from dashhazard.signal import PeakConfig

logger = logging.getLogger(__name__)


class ReactionMode(Enum):
    SPEED = "speed"
    SOUND = "sound"
    BOTH = "both"


@dataclass(frozen=True)
class RunConfig:
    tracks_path: Path
    out_path: Path
    audio_dir: Path | None = None
    captions_path: Path | None = None
    labels_path: Path | None = None
    report_path: Path | None = None
    speed: SpeedConfig = field(default_factory=SpeedConfig)
    sound_peak: PeakConfig = DEFAULT_SOUND_PEAK
    envelope_ms: int = DEFAULT_ENVELOPE_MS
    ensemble: EnsembleConfig = field(default_factory=EnsembleConfig)
    word: WordConfig = field(default_factory=WordConfig)
    caption_mode: CaptionMode = CaptionMode.ALGORITHM2
    reaction_mode: ReactionMode = ReactionMode.BOTH
    workers: int = 1
    hazard_slots: int = DEFAULT_HAZARD_SLOTS
    capitalize_bools: bool = True

    def __post_init__(self) -> None:
        if self.workers < 1:
            raise ConfigError("workers must be at least 1")
        if self.hazard_slots < 1:
            raise ConfigError("hazard_slots must be at least 1")
        if self.ensemble.top_k > self.hazard_slots:
            raise ConfigError("top_k cannot exceed the submission hazard slots")


def _peak_from_dict(doc: Mapping) -> PeakConfig:
    return PeakConfig(
        window=int(doc.get("window", PeakConfig.window)),
        z_threshold=float(doc.get("z_threshold", PeakConfig.z_threshold)),
        min_warmup=int(doc.get("min_warmup", PeakConfig.min_warmup)),
    )


def config_from_dict(doc: Mapping, tracks_path: Path, out_path: Path) -> RunConfig:
    """Build a RunConfig from a parsed JSON document (missing keys keep defaults)."""
    try:
        speed_doc = doc.get("speed", {})
        ensemble_doc = doc.get("ensemble", {})
        word_doc = doc.get("word", {})
        defaults = EnsembleConfig()
        word_defaults = WordConfig()
        return RunConfig(
            tracks_path=tracks_path,
            out_path=out_path,
            speed=SpeedConfig(
                chunksize=int(speed_doc.get("chunksize", SpeedConfig.chunksize)),
                peak=_peak_from_dict(speed_doc.get("peak", {})),
                prefix_velocity=bool(speed_doc.get("prefix_velocity", False)),
            ),
            sound_peak=(
                _peak_from_dict(doc["sound_peak"]) if "sound_peak" in doc else DEFAULT_SOUND_PEAK
            ),
            envelope_ms=int(doc.get("envelope_ms", DEFAULT_ENVELOPE_MS)),
            ensemble=EnsembleConfig(
                weights=tuple(float(w) for w in ensemble_doc.get("weights", defaults.weights)),
                epsilon=float(ensemble_doc.get("epsilon", defaults.epsilon)),
                num_draws=int(ensemble_doc.get("num_draws", defaults.num_draws)),
                top_k=int(ensemble_doc.get("top_k", defaults.top_k)),
                seed=int(ensemble_doc.get("seed", defaults.seed)),
                denylist=frozenset(
                    str(d).lower() for d in ensemble_doc.get("denylist", defaults.denylist)
                ),
                zone=tuple(
                    (float(x), float(y)) for x, y in ensemble_doc.get("zone", defaults.zone)
                ),
                tau=float(ensemble_doc.get("tau", defaults.tau)),
            ),
            word=WordConfig(
                stopwords=frozenset(word_doc.get("stopwords", word_defaults.stopwords)),
                offstreet_words=frozenset(
                    word_doc.get("offstreet_words", word_defaults.offstreet_words)
                ),
                meaningful_multiplier=float(
                    word_doc.get("meaningful_multiplier", word_defaults.meaningful_multiplier)
                ),
                stopword_multiplier=float(
                    word_doc.get("stopword_multiplier", word_defaults.stopword_multiplier)
                ),
                offstreet_multiplier=float(
                    word_doc.get("offstreet_multiplier", word_defaults.offstreet_multiplier)
                ),
                char_limit=int(word_doc.get("char_limit", word_defaults.char_limit)),
                divide_area_by_words=bool(word_doc.get("divide_area_by_words", False)),
            ),
            caption_mode=CaptionMode(doc.get("caption_mode", CaptionMode.ALGORITHM2.value)),
            reaction_mode=ReactionMode(doc.get("reaction_mode", ReactionMode.BOTH.value)),
            workers=int(doc.get("workers", 1)),
            hazard_slots=int(doc.get("hazard_slots", DEFAULT_HAZARD_SLOTS)),
            capitalize_bools=bool(doc.get("capitalize_bools", True)),
        )
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc


@dataclass
class VideoResult:
    video_id: str
    status: str
    verdict: ReactionVerdict
    ballot: HazardBallot
    captions: dict[int, str]
    predictions: list[FramePrediction]
    warnings: list[str] = field(default_factory=list)
    elapsed_s: float = 0.0

    def report_entry(self) -> dict:
        return {
            "status": self.status,
            "reaction": {"frame": self.verdict.frame, "source": self.verdict.source.value},
            "ballot": {
                "base_combined": {str(t): v for t, v in sorted(self.ballot.base_combined.items())},
                "votes": {str(t): v for t, v in sorted(self.ballot.votes.items())},
                "winners": list(self.ballot.winners),
            },
            "captions": {str(t): c for t, c in sorted(self.captions.items())},
            "warnings": self.warnings,
            "elapsed_s": round(self.elapsed_s, 6),
        }


@dataclass
class RunResult:
    results: dict[str, VideoResult]
    predictions: dict[str, list[FramePrediction]]
    report: dict
    out_path: Path
    report_path: Path


def _detect_reaction(
    video: VideoAnnotations, cfg: RunConfig, warnings: list[str]
) -> ReactionVerdict:
    speed_frame = None
    sound_frame = None
    if cfg.reaction_mode in (ReactionMode.SPEED, ReactionMode.BOTH):
        speed_frame = video_speed_anomaly(video, cfg.speed)
    if cfg.reaction_mode in (ReactionMode.SOUND, ReactionMode.BOTH):
        wav_path = None if cfg.audio_dir is None else cfg.audio_dir / f"{video.video_id}.wav"
        if wav_path is not None and wav_path.exists():
            sound_frame = sound_anomaly(
                load_wav(wav_path), video.fps, cfg.sound_peak, cfg.envelope_ms
            )
        elif cfg.reaction_mode is ReactionMode.BOTH:
            warnings.append("no audio file; speed-only fallback")
        else:
            warnings.append("no audio file; no sound detection possible")
    return fuse_reactions(video.video_id, speed_frame, sound_frame)


def analyze_video(
    video: VideoAnnotations,
    captions: Sequence[CaptionCandidate],
    labels: Sequence[LabelCandidate],
    cfg: RunConfig,
) -> VideoResult:
    """Full three-task analysis of a single video."""
    started = time.perf_counter()
    warnings: list[str] = []

    verdict = _detect_reaction(video, cfg, warnings)

    weak = compute_weak_scores(video, labels, verdict, cfg.ensemble)
    ballot = vote(weak, cfg.ensemble)

    final_captions: dict[int, str] = {}
    for track_id in ballot.winners:
        track = video.tracks[track_id]
        areas = track.area_by_frame()
        usable = []
        skipped = 0
        for candidate in captions:
            if candidate.track_id != track_id:
                continue
            if candidate.frame in areas:
                usable.append(candidate)
            else:
                skipped += 1
        if skipped:
            warnings.append(
                f"track {track_id}: skipped {skipped} caption candidate(s) at unobserved frames"
            )
        final_captions[track_id] = caption_track(usable, areas, cfg.caption_mode, cfg.word)

    changed = verdict_to_frames(verdict, video.frame_count)
    visible = {t: set(video.tracks[t].frames()) for t in ballot.winners}
    predictions = [
        FramePrediction(
            changed=changed[frame],
            hazards=tuple(
                (t, final_captions[t]) for t in ballot.winners if frame in visible[t]
            ),
        )
        for frame in range(video.frame_count)
    ]
    return VideoResult(
        video_id=video.video_id,
        status="ok",
        verdict=verdict,
        ballot=ballot,
        captions=final_captions,
        predictions=predictions,
        warnings=warnings,
        elapsed_s=time.perf_counter() - started,
    )


def _failed_result(video: VideoAnnotations, error: Exception) -> VideoResult:
    logger.exception("video %s failed", video.video_id)
    return VideoResult(
        video_id=video.video_id,
        status="error",
        verdict=ReactionVerdict(video.video_id, None, ReactionSource.NONE),
        ballot=HazardBallot(base_combined={}, votes={}, winners=()),
        captions={},
        predictions=[FramePrediction(changed=False) for _ in range(video.frame_count)],
        warnings=[f"analysis failed: {error}"],
    )


def run_pipeline(cfg: RunConfig) -> RunResult:
    """Run the three tasks over every video and write submission + report."""
    started = time.perf_counter()
    parse_result = load_tracks(cfg.tracks_path)
    videos = parse_result.videos
    captions = (
        load_caption_candidates(cfg.captions_path) if cfg.captions_path is not None else []
    )
    labels = load_label_candidates(cfg.labels_path) if cfg.labels_path is not None else []
    captions_by_video: dict[str, list[CaptionCandidate]] = {}
    for candidate in captions:
        captions_by_video.setdefault(candidate.video_id, []).append(candidate)
    labels_by_video: dict[str, list[LabelCandidate]] = {}
    for label in labels:
        labels_by_video.setdefault(label.video_id, []).append(label)

    def worker(video: VideoAnnotations) -> VideoResult:
        try:
            return analyze_video(
                video,
                captions_by_video.get(video.video_id, []),
                labels_by_video.get(video.video_id, []),
                cfg,
            )
        except Exception as exc:  # report the failure, keep the run going
            return _failed_result(video, exc)

    ordered = sorted(videos, key=lambda v: v.video_id)
    if cfg.workers == 1:
        results = [worker(v) for v in ordered]
    else:
        with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
            results = list(pool.map(worker, ordered))
    by_video = {r.video_id: r for r in results}
    predictions = {r.video_id: r.predictions for r in results}

    cfg.out_path.parent.mkdir(parents=True, exist_ok=True)
    with open(cfg.out_path, "w", encoding="utf-8", newline="") as handle:
        write_submission(
            predictions, handle, slots=cfg.hazard_slots, capitalize_bools=cfg.capitalize_bools
        )

    report = {
        "videos": {vid: by_video[vid].report_entry() for vid in sorted(by_video)},
        "totals": {
            "videos": len(results),
            "frames": sum(len(r.predictions) for r in results),
            "observations_read": parse_result.observations_read,
            "dropped_degenerate_bboxes": parse_result.dropped_degenerate,
            "warnings": sum(len(r.warnings) for r in results),
            "failures": sum(r.status != "ok" for r in results),
        },
        "config": {
            "reaction_mode": cfg.reaction_mode.value,
            "caption_mode": cfg.caption_mode.value,
            "chunksize": cfg.speed.chunksize,
            "weights": list(cfg.ensemble.weights),
            "epsilon": cfg.ensemble.epsilon,
            "num_draws": cfg.ensemble.num_draws,
            "top_k": cfg.ensemble.top_k,
            "seed": cfg.ensemble.seed,
            "workers": cfg.workers,
        },
        "wall_time_s": round(time.perf_counter() - started, 6),
    }
    report_path = cfg.report_path or cfg.out_path.with_suffix(".report.json")
    report_path.parent.mkdir(parents=True, exist_ok=True)
    with open(report_path, "w", encoding="utf-8") as handle:
        json.dump(report, handle, indent=2, sort_keys=True)
        handle.write("\n")

    return RunResult(
        results=by_video,
        predictions=predictions,
        report=report,
        out_path=cfg.out_path,
        report_path=report_path,
    )


def score_submission(
    submission_path: Path, truth_path: Path, char_limit: int = 35
) -> ScoreReport:
    """Score a written submission CSV against a ground-truth JSON file."""
    with open(submission_path, encoding="utf-8", newline="") as handle:
        predictions = read_submission(handle)
    truth = load_ground_truth(truth_path)
    return score_run(predictions, truth, char_limit=char_limit)


def apply_overrides(cfg: RunConfig, **updates) -> RunConfig:
    """Functional update helper used by the CLI for flag overrides."""
    ensemble_updates = {
        k: updates.pop(k) for k in ("epsilon", "num_draws", "top_k", "seed") if k in updates
    }
    speed_updates = {k: updates.pop(k) for k in ("chunksize",) if k in updates}
    if ensemble_updates:
        cfg = replace(cfg, ensemble=replace(cfg.ensemble, **ensemble_updates))
    if speed_updates:
        cfg = replace(cfg, speed=replace(cfg.speed, **speed_updates))
    return replace(cfg, **updates) if updates else cfg

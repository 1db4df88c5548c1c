import math
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dashhazard.hazard import (
    DEFAULT_ZONE,
    ConfigError,
    EnsembleConfig,
    baseline_center,
    combine,
    compute_weak_scores,
    noise_sigma,
    point_in_polygon,
    vote,
    w1_label_denylist,
    w2_center_proximity,
    w3_direction_divergence,
    w4_traffic_zone,
    w5_persistence_area,
    w6_reaction_proximity,
)
from dashhazard.model import BBox, LabelCandidate, Observation, Track, TrackKind
from dashhazard.reaction import ReactionSource, ReactionVerdict
from helpers import linear_centroids, make_track, make_video

DENYLIST = frozenset({"car", "traffic light"})


def label(name, confidence, track_id=0):
    return LabelCandidate("v0", track_id, name, confidence)


class TestW1:
    def test_denylisted_best_label(self):
        labels = [label("car", 0.9), label("dog", 0.3)]
        assert w1_label_denylist(labels, DENYLIST) == 0.0

    def test_allowed_best_label(self):
        assert w1_label_denylist([label("dog", 0.8)], DENYLIST) == 1.0

    def test_no_labels_neutral(self):
        assert w1_label_denylist([], DENYLIST) == 0.5


class TestW2:
    def test_center_scores_one(self):
        track = make_track([(640.0, 360.0)] * 5)
        assert w2_center_proximity(track, 1280, 720) == pytest.approx(1.0)

    def test_corner_scores_zero(self):
        track = make_track([(0.0, 0.0)], size=10)
        assert w2_center_proximity(track, 1280, 720) == pytest.approx(0.0)

    def test_hand_computed_value(self):
        # d = 320, d_max = sqrt(640^2 + 360^2)
        track = make_track([(960.0, 360.0)] * 3)
        expected = 1.0 - 320.0 / math.hypot(640.0, 360.0)
        assert expected == pytest.approx(0.5643, abs=1e-3)
        assert w2_center_proximity(track, 1280, 720) == pytest.approx(expected, abs=1e-9)


class TestW3:
    def test_single_track_aligned_with_itself(self):
        track = make_track(linear_centroids((100.0, 100.0), (2.0, 1.0), 10))
        video = make_video([track])
        assert w3_direction_divergence(track, video) == pytest.approx(0.0, abs=1e-6)

    def test_opposite_direction(self):
        target = make_track([(500.0, 300.0), (510.0, 300.0)], track_id=0)
        others = [
            make_track([(200.0, 100.0), (190.0, 100.0)], track_id=1),
            make_track([(300.0, 200.0), (290.0, 200.0)], track_id=2),
        ]
        video = make_video([target, *others])
        assert w3_direction_divergence(target, video) == pytest.approx(1.0)

    def test_perpendicular(self):
        target = make_track([(500.0, 300.0), (510.0, 300.0)], track_id=0)
        others = [
            make_track([(200.0, 100.0), (200.0, 110.0)], track_id=1),
            make_track([(300.0, 200.0), (300.0, 210.0)], track_id=2),
        ]
        video = make_video([target, *others])
        assert w3_direction_divergence(target, video) == pytest.approx(0.5)

    def test_static_track_neutral(self):
        target = make_track([(500.0, 300.0), (500.0, 300.0 + 1e-9)], track_id=0)
        mover = make_track([(0.0, 0.0), (50.0, 0.0)], track_id=1)
        video = make_video([target, mover])
        assert w3_direction_divergence(target, video) == 0.5

    def test_short_track_neutral(self):
        target = make_track([(500.0, 300.0)], track_id=0)
        video = make_video([target])
        assert w3_direction_divergence(target, video) == 0.5


class TestW4:
    def test_all_inside(self):
        track = make_track([(640.0, 600.0)] * 4)
        assert w4_traffic_zone(track, DEFAULT_ZONE, 1280, 720) == pytest.approx(1.0)

    def test_all_outside(self):
        track = make_track([(100.0, 100.0)] * 4)
        assert w4_traffic_zone(track, DEFAULT_ZONE, 1280, 720) == pytest.approx(0.0)

    def test_four_of_ten_inside(self):
        inside = [(0.5, 0.75), (0.4, 0.9), (0.6, 0.8), (0.35, 0.95)]
        outside = [(0.1, 0.1), (0.9, 0.2), (0.5, 0.3), (0.2, 0.4), (0.05, 0.95), (0.95, 0.6)]
        from shapely.geometry import Point, Polygon

        zone_poly = Polygon(DEFAULT_ZONE)
        for x, y in inside:
            assert zone_poly.intersects(Point(x, y))
        for x, y in outside:
            assert not zone_poly.intersects(Point(x, y))
        centroids = [(x * 1280, y * 720) for x, y in inside + outside]
        track = make_track(centroids, size=4)
        assert w4_traffic_zone(track, DEFAULT_ZONE, 1280, 720) == pytest.approx(0.4)

    def test_matches_shapely_on_random_points(self):
        from shapely.geometry import Point, Polygon

        zone_poly = Polygon(DEFAULT_ZONE)
        rng = random.Random(9)
        for _ in range(500):
            x, y = rng.random(), rng.random()
            assert point_in_polygon(x, y, DEFAULT_ZONE) == zone_poly.intersects(Point(x, y))

    def test_boundary_counts_as_inside(self):
        assert point_in_polygon(0.5, 0.5, DEFAULT_ZONE)          # on the top edge
        assert point_in_polygon(0.2, 1.0, DEFAULT_ZONE)          # vertex
        assert point_in_polygon(0.3, 0.75, DEFAULT_ZONE)         # on the slanted edge

    def test_degenerate_polygon(self):
        with pytest.raises(ConfigError):
            point_in_polygon(0.5, 0.5, ((0.0, 0.0), (1.0, 1.0)))


def track_with_salience(track_id, observation_count, area_each):
    side = math.sqrt(area_each)
    observations = tuple(
        Observation(f, BBox(0.0, 0.0, side, side)) for f in range(observation_count)
    )
    return Track("v0", track_id, TrackKind.CHALLENGE_OBJECT, observations)


class TestW5:
    def test_single_track(self):
        scores = w5_persistence_area([track_with_salience(0, 1, 100.0)])
        assert scores == {0: 1.0}

    def test_two_tracks(self):
        tracks = [track_with_salience(0, 1, 100.0), track_with_salience(1, 10, 1000.0)]
        scores = w5_persistence_area(tracks)
        assert scores[0] == pytest.approx(1.0)
        assert scores[1] == pytest.approx(0.0)

    def test_tied_saliences_share_mean_rank(self):
        tracks = [
            track_with_salience(0, 1, 10.0),
            track_with_salience(1, 1, 20.0),
            track_with_salience(2, 1, 20.0),
            track_with_salience(3, 1, 40.0),
        ]
        scores = w5_persistence_area(tracks)
        assert scores == pytest.approx({0: 1.0, 1: 0.5, 2: 0.5, 3: 0.0})


class TestW6:
    def test_appearance_at_reaction(self):
        track = make_track([(10.0, 10.0)] * 3, frames=[50, 51, 52], size=10)
        verdict = ReactionVerdict("v0", 50, ReactionSource.FUSED)
        assert w6_reaction_proximity(track, verdict, tau=30.0) == pytest.approx(1.0)

    def test_no_reaction_neutral(self):
        track = make_track([(10.0, 10.0)], size=10)
        verdict = ReactionVerdict("v0", None, ReactionSource.NONE)
        assert w6_reaction_proximity(track, verdict, tau=30.0) == 0.5

    def test_gap_thirty_tau_thirty(self):
        track = make_track([(10.0, 10.0)], frames=[20], size=10)
        verdict = ReactionVerdict("v0", 50, ReactionSource.SPEED)
        assert w6_reaction_proximity(track, verdict, tau=30.0) == pytest.approx(
            math.exp(-1.0), abs=1e-4
        )


class TestCombine:
    def test_all_ones(self):
        assert combine([1.0] * 6, [1.0] * 6) == pytest.approx(6.0)

    def test_single_weight(self):
        weights = [0.0, 2.0, 0.0, 0.0, 0.0, 0.0]
        assert combine([0.0, 0.5, 0.0, 0.0, 0.0, 0.0], weights) == pytest.approx(1.0)

    def test_hand_sum(self):
        scores = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6]
        assert combine(scores, [1.0] * 6) == pytest.approx(2.1)

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            combine([0.5] * 5, [1.0] * 6)

    @given(
        st.lists(st.floats(min_value=0, max_value=1), min_size=6, max_size=6),
        st.integers(min_value=0, max_value=5),
        st.floats(min_value=0, max_value=0.5),
    )
    def test_monotone_in_each_score(self, scores, position, bump):
        weights = [1.0, 0.5, 2.0, 0.1, 1.5, 0.7]
        bumped = list(scores)
        bumped[position] = min(1.0, bumped[position] + bump)
        assert combine(bumped, weights) >= combine(scores, weights) - 1e-12


def oracle_ballot(scores, cfg):
    """Independent vote re-implementation: stdlib gauss over the pinned seed keys."""
    sigma = max(cfg.weights) ** 2 / cfg.epsilon
    tracks = sorted(scores)
    votes = {t: 0 for t in tracks}
    for draw in range(1, cfg.num_draws + 1):
        rng = random.Random(f"{cfg.seed}:{draw}")
        weights = [max(0.0, w + rng.gauss(0.0, sigma)) for w in cfg.weights]
        ranked = sorted(tracks, key=lambda t: (-sum(w * s for w, s in zip(weights, scores[t])), t))
        for t in ranked[: cfg.top_k]:
            votes[t] += 1
    return votes


class TestVote:
    def random_scores(self, seed, n_tracks=3):
        rng = random.Random(seed)
        return {t: tuple(rng.random() for _ in range(6)) for t in range(n_tracks)}

    def test_zero_noise_limit_matches_noiseless_argmax(self):
        scores = self.random_scores(0)
        cfg = EnsembleConfig(epsilon=1e9, num_draws=50, seed=5)
        noiseless = min(scores, key=lambda t: (-combine(scores[t], cfg.weights), t))
        assert vote(scores, cfg).winners == (noiseless,)

    def test_deterministic(self):
        scores = self.random_scores(1)
        cfg = EnsembleConfig(epsilon=1.0, num_draws=300, seed=42)
        assert vote(scores, cfg) == vote(scores, cfg)

    def test_histogram_matches_oracle(self):
        scores = self.random_scores(2, n_tracks=3)
        cfg = EnsembleConfig(epsilon=1.0, num_draws=1000, seed=42, top_k=1)
        ballot = vote(scores, cfg)
        assert ballot.votes == oracle_ballot(scores, cfg)
        assert sum(ballot.votes.values()) == 1000

    def test_histogram_matches_oracle_top_k(self):
        scores = self.random_scores(3, n_tracks=5)
        cfg = EnsembleConfig(epsilon=0.5, num_draws=500, seed=9, top_k=2)
        ballot = vote(scores, cfg)
        assert ballot.votes == oracle_ballot(scores, cfg)
        assert sum(ballot.votes.values()) == 2 * 500

    def test_empty_scores(self):
        ballot = vote({}, EnsembleConfig())
        assert ballot.winners == () and ballot.votes == {}

    def test_rejects_out_of_range_scores(self):
        with pytest.raises(ValueError):
            vote({0: (1.2, 0, 0, 0, 0, 0)}, EnsembleConfig())

    def test_joint_scaling_keeps_winners(self):
        for seed in range(10):
            scores = self.random_scores(100 + seed, n_tracks=4)
            weights = tuple(random.Random(seed).uniform(0.1, 2.0) for _ in range(6))
            reference = vote(scores, EnsembleConfig(weights=weights, epsilon=1.0, num_draws=80, seed=seed))
            for k in (0.5, 2.0, 10.0):
                scaled = EnsembleConfig(
                    weights=tuple(k * w for w in weights), epsilon=k, num_draws=80, seed=seed
                )
                assert vote(scores, scaled).winners == reference.winners

    def test_sigma_mapping(self):
        assert noise_sigma(EnsembleConfig(epsilon=2.0)) == pytest.approx(0.5)
        cfg = EnsembleConfig(weights=(3.0,) * 6, epsilon=2.0)
        assert noise_sigma(cfg) == pytest.approx(4.5)


class TestBaseline:
    def test_single_candidate(self):
        video = make_video([make_track([(100.0, 100.0)] * 3, track_id=7)])
        assert baseline_center(video) == 7

    def test_prefers_centered_track(self):
        centered = make_track([(640.0, 360.0)] * 3, track_id=1)
        corner = make_track([(50.0, 50.0)] * 3, track_id=0)
        assert baseline_center(make_video([centered, corner])) == 1

    def test_no_candidates(self):
        scene = make_track([(100.0, 100.0)] * 3, kind=TrackKind.TRAFFIC_SCENE)
        assert baseline_center(make_video([scene])) is None

    def test_matches_brute_force_mean_distance(self):
        rng = random.Random(21)
        for _ in range(5):
            tracks = [
                make_track(
                    [(rng.uniform(0, 1280), rng.uniform(0, 720)) for _ in range(6)],
                    track_id=i,
                    size=10,
                )
                for i in range(5)
            ]
            video = make_video(tracks)
            expected = min(
                tracks,
                key=lambda t: (
                    sum(math.hypot(x - 640, y - 360) for x, y in t.centroids())
                    / len(t.observations),
                    t.track_id,
                ),
            ).track_id
            assert baseline_center(video) == expected


class TestScoreRanges:
    @settings(max_examples=60, deadline=None)
    @given(st.integers(min_value=0, max_value=10_000))
    def test_all_classifiers_in_unit_interval(self, seed):
        rng = random.Random(seed)
        tracks = [
            make_track(
                [(rng.uniform(-50, 1400), rng.uniform(-50, 800)) for _ in range(rng.randint(1, 8))],
                track_id=i,
                size=rng.uniform(5, 200),
            )
            for i in range(rng.randint(1, 5))
        ]
        video = make_video(tracks)
        labels = [label(rng.choice(["car", "dog", "thing"]), rng.random(), t.track_id) for t in tracks]
        frame = rng.choice([None, rng.randint(0, 199)])
        verdict = ReactionVerdict(
            "v0", frame, ReactionSource.NONE if frame is None else ReactionSource.SPEED
        )
        scores = compute_weak_scores(video, labels, verdict, EnsembleConfig())
        for vector in scores.values():
            assert len(vector) == 6
            assert all(0.0 <= s <= 1.0 for s in vector)

    def test_scale_invariance_of_geometric_classifiers(self):
        track = make_track([(200.0, 150.0), (340.0, 210.0), (520.0, 330.0)], size=30)
        video = make_video([track, make_track([(100.0, 100.0), (120.0, 140.0)], track_id=1)])
        scaled_track = make_track(
            [(400.0, 300.0), (680.0, 420.0), (1040.0, 660.0)], size=60
        )
        scaled_video = make_video(
            [scaled_track, make_track([(200.0, 200.0), (240.0, 280.0)], track_id=1, size=80)],
            width=2560,
            height=1440,
        )
        assert w2_center_proximity(track, 1280, 720) == pytest.approx(
            w2_center_proximity(scaled_track, 2560, 1440)
        )
        assert w3_direction_divergence(track, video) == pytest.approx(
            w3_direction_divergence(scaled_track, scaled_video)
        )
        assert w4_traffic_zone(track, DEFAULT_ZONE, 1280, 720) == pytest.approx(
            w4_traffic_zone(scaled_track, DEFAULT_ZONE, 2560, 1440)
        )


class TestEnsembleConfig:
    def test_rejects_all_zero_weights(self):
        with pytest.raises(ConfigError):
            EnsembleConfig(weights=(0.0,) * 6)

    def test_rejects_negative_epsilon(self):
        with pytest.raises(ConfigError):
            EnsembleConfig(epsilon=-1.0)

    def test_rejects_short_zone(self):
        with pytest.raises(ConfigError):
            EnsembleConfig(zone=((0.0, 0.0), (1.0, 1.0)))

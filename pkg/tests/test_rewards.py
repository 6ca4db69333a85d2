"""Reward-stack tests.  The trajectory penalty is checked against a
brute-force double loop over every indicator pattern, and the dispatch
against an exhaustive case enumeration."""
import itertools
import math

import pytest
from hypothesis import given, strategies as st

from gaussnav.rewards import (
    PredictionOccupancy,
    RewardConfig,
    StepSummary,
    discomfort_penalty,
    linear_discomfort_penalty,
    potential_reward,
    prediction_penalty,
    reward_balance,
    reward_breakdown,
    total_reward,
)

DEFAULTS = RewardConfig()


def brute_force_prediction_penalty(bits, r_col):
    """Independent oracle: scan every (human, lookahead) pair directly."""
    best = 0.0
    for row in bits:
        per_human = 0.0
        for k, hit in enumerate(row, start=1):
            value = r_col / 2**k if hit else 0.0
            per_human = min(per_human, value)
        best = min(best, per_human)
    return best


def make_summary(goal=False, collision=False, d_min=5.0, prev=5.0, curr=5.0, occ=None):
    return StepSummary(
        goal_reached=goal,
        collision=collision,
        d_min=d_min,
        d_goal_prev=prev,
        d_goal_curr=curr,
        occupancy=occ or PredictionOccupancy.empty(DEFAULTS.horizon),
    )


class TestRewardConfig:
    def test_defaults_match_published_values(self):
        cfg = RewardConfig()
        assert (cfg.r_goal, cfg.r_col) == (10.0, -10.0)
        assert (cfg.w_disc, cfg.sigma_disc, cfg.d_disc) == (0.25, 0.2, 0.5)
        assert (cfg.w_pot, cfg.mu_pot, cfg.sigma_pot) == (1.5, 0.0, 1000.0)

    @pytest.mark.parametrize(
        "kwargs",
        [
            {"r_goal": -1.0},
            {"r_col": 1.0},
            {"sigma_disc": 0.0},
            {"sigma_pot": -1.0},
            {"d_disc": 0.0},
            {"horizon": 0},
            {"mode": "cubic"},
        ],
    )
    def test_rejects_bad_values(self, kwargs):
        with pytest.raises(ValueError):
            RewardConfig(**kwargs)


class TestDiscomfort:
    def test_outside_danger_zone_is_zero(self):
        assert discomfort_penalty(0.6, DEFAULTS) == 0.0
        assert discomfort_penalty(0.5, DEFAULTS) == 0.0  # boundary: zone is open

    def test_contact_peak(self):
        assert discomfort_penalty(0.0, DEFAULTS) == pytest.approx(-0.25, abs=1e-12)

    def test_closed_form_spot_value(self):
        expected = -0.25 * math.exp(-0.5)
        assert discomfort_penalty(0.2, DEFAULTS) == pytest.approx(expected, abs=1e-12)
        assert discomfort_penalty(0.2, DEFAULTS) == pytest.approx(-0.151633, abs=1e-6)

    def test_negative_distance_clamped_to_contact(self):
        assert discomfort_penalty(-0.3, DEFAULTS) == discomfort_penalty(0.0, DEFAULTS)

    def test_monotone_in_proximity(self):
        samples = [discomfort_penalty(0.01 * i, DEFAULTS) for i in range(50)]
        assert all(a <= b for a, b in zip(samples, samples[1:]))

    @given(st.floats(0, 10, allow_nan=False))
    def test_bounded_by_weight(self, d):
        assert abs(discomfort_penalty(d, DEFAULTS)) <= DEFAULTS.w_disc


class TestLinearBaseline:
    def test_boundary_zero(self):
        assert linear_discomfort_penalty(0.5, DEFAULTS) == 0.0

    def test_contact_matches_gaussian_peak(self):
        assert linear_discomfort_penalty(0.0, DEFAULTS) == -0.25

    def test_midpoint_interpolation_oracle(self):
        # linear interpolation between (0, -w) and (d_disc, 0)
        d = 0.25
        expected = -0.25 + (d / 0.5) * 0.25
        assert linear_discomfort_penalty(d, DEFAULTS) == pytest.approx(expected, abs=1e-12)
        assert linear_discomfort_penalty(0.25, DEFAULTS) == pytest.approx(-0.125, abs=1e-12)


class TestPotential:
    def test_no_progress_is_zero(self):
        assert potential_reward(5.0, 5.0, DEFAULTS) == 0.0

    def test_progress_and_regress(self):
        assert potential_reward(5.0, 4.9, DEFAULTS) == pytest.approx(0.15, abs=1e-10)
        assert potential_reward(4.9, 5.0, DEFAULTS) == pytest.approx(-0.15, abs=1e-10)

    def test_factor_constant_in_mu_and_sigma(self):
        # evaluating the Gaussian at its own mean keeps the factor at w_pot
        for mu, sigma in [(0.0, 1000.0), (3.0, 0.01), (-7.0, 1.0)]:
            cfg = RewardConfig(mu_pot=mu, sigma_pot=sigma)
            assert potential_reward(2.0, 1.0, cfg) == pytest.approx(1.5, abs=1e-12)


class TestPredictionPenalty:
    def test_empty_crowd(self):
        assert prediction_penalty(PredictionOccupancy.empty(3), RewardConfig(horizon=3)) == 0.0

    def test_no_intersections(self):
        occ = PredictionOccupancy([[False] * 3] * 2, 3)
        assert prediction_penalty(occ, RewardConfig(horizon=3)) == 0.0

    def test_single_intersection_at_k2(self):
        occ = PredictionOccupancy([[False, True, False]], 3)
        assert prediction_penalty(occ, RewardConfig(horizon=3)) == pytest.approx(-2.5)

    def test_two_humans_min_wins(self):
        occ = PredictionOccupancy([[False, True], [True, False]], 2)
        assert prediction_penalty(occ, RewardConfig(horizon=2)) == pytest.approx(-5.0)

    def test_brute_force_equivalence_all_patterns(self):
        # every indicator pattern for n <= 3 humans, horizon <= 3
        for n in range(0, 4):
            for horizon in range(1, 4):
                cfg = RewardConfig(horizon=horizon)
                for pattern in itertools.product([False, True], repeat=n * horizon):
                    bits = [pattern[i * horizon : (i + 1) * horizon] for i in range(n)]
                    occ = PredictionOccupancy(bits, horizon)
                    assert prediction_penalty(occ, cfg) == brute_force_prediction_penalty(
                        bits, cfg.r_col
                    )

    def test_shape_validation(self):
        with pytest.raises(ValueError):
            PredictionOccupancy([[True, False]], 3)

    @given(
        st.integers(1, 4),
        st.integers(1, 5),
        st.data(),
    )
    def test_bound_property(self, n, horizon, data):
        bits = data.draw(
            st.lists(
                st.lists(st.booleans(), min_size=horizon, max_size=horizon),
                min_size=n,
                max_size=n,
            )
        )
        cfg = RewardConfig(horizon=horizon)
        value = prediction_penalty(PredictionOccupancy(bits, horizon), cfg)
        assert -abs(cfg.r_col) / 2 <= value <= 0


class TestDispatch:
    def test_goal_branch(self):
        assert total_reward(make_summary(goal=True), DEFAULTS) == 10.0

    def test_collision_branch(self):
        assert total_reward(make_summary(collision=True), DEFAULTS) == -10.0

    def test_goal_wins_over_collision(self):
        assert total_reward(make_summary(goal=True, collision=True), DEFAULTS) == 10.0

    def test_danger_zone_branch_sum(self):
        occ = PredictionOccupancy([[True, False, False, False, False]], 5)
        summary = make_summary(d_min=0.2, occ=occ)
        expected = -5.0 + (-0.25 * math.exp(-0.5))
        assert total_reward(summary, DEFAULTS) == pytest.approx(expected, abs=1e-9)
        assert total_reward(summary, DEFAULTS) == pytest.approx(-5.151633, abs=1e-6)

    def test_default_branch_sum(self):
        summary = make_summary(d_min=2.0, prev=5.0, curr=4.9)
        assert total_reward(summary, DEFAULTS) == pytest.approx(0.15, abs=1e-10)

    def test_danger_zone_excludes_potential(self):
        # inside the zone, progress is not rewarded
        summary = make_summary(d_min=0.3, prev=5.0, curr=4.0)
        breakdown = reward_breakdown(summary, DEFAULTS)
        assert breakdown.potential == 0.0
        assert breakdown.in_danger_zone

    def test_exactly_one_branch_fires_case_enumeration(self):
        # oracle: enumerate every flag/zone combination and re-derive the
        # branch from first principles
        occ = PredictionOccupancy([[True, False, False, False, False]], 5)
        for goal, collision, in_zone in itertools.product([False, True], repeat=3):
            d_min = 0.2 if in_zone else 1.0
            summary = make_summary(goal=goal, collision=collision, d_min=d_min, prev=3.0, curr=2.9, occ=occ)
            breakdown = reward_breakdown(summary, DEFAULTS)
            fired = [
                breakdown.goal != 0.0,
                breakdown.collision != 0.0,
                breakdown.discomfort != 0.0,
                breakdown.potential != 0.0,
            ]
            assert sum(fired) == 1
            if goal:
                assert breakdown.total == DEFAULTS.r_goal
            elif collision:
                assert breakdown.total == DEFAULTS.r_col
            elif in_zone:
                assert breakdown.total == pytest.approx(
                    prediction_penalty(occ, DEFAULTS) + discomfort_penalty(d_min, DEFAULTS)
                )
            else:
                assert breakdown.total == pytest.approx(
                    prediction_penalty(occ, DEFAULTS) + potential_reward(3.0, 2.9, DEFAULTS)
                )

    def test_linear_mode_swaps_discomfort_shape(self):
        cfg = RewardConfig(mode="linear")
        summary = make_summary(d_min=0.25)
        assert reward_breakdown(summary, cfg).discomfort == pytest.approx(-0.125, abs=1e-12)


class TestBalance:
    def test_default_ratio_reported(self):
        balance = reward_balance(DEFAULTS)
        assert balance["max_abs_prediction"] == 5.0
        assert balance["max_abs_discomfort"] == 0.25
        assert balance["prediction_to_discomfort_ratio"] == pytest.approx(20.0)

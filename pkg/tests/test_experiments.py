"""Estimation statistics and the Monte Carlo experiment runners."""

import math
import random

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lpplab.errors import InsufficientData, InvalidParams
from lpplab.experiments import (
    Estimate,
    FitModel,
    fit_exponent,
    make_estimate,
    run_block_stats,
    run_coalescence,
    run_crossing_count,
    run_limit_shape,
    run_one_point,
    run_one_point_interval,
    run_small_ball,
    run_transversal_tail,
    run_tw_statistic,
    summarize_values,
    wilson,
)
from lpplab.geodesic import backtrack, profile, sup_abs
from lpplab.lattice import LatticePoint, cube_threshold
from lpplab.passage import build_table
from lpplab.randfield import FieldSpec, replica_seed


def _estimate(p: float) -> Estimate:
    # fit_exponent reads only p_hat; hits/trials here are placeholders
    return Estimate(hits=0, trials=1, p_hat=p, ci_lo=0.0, ci_hi=1.0)


# ---------------------------------------------------------------------------
# wilson


def test_wilson_frozen_value():
    lo, hi = wilson(5, 10, 1.96)
    assert lo == pytest.approx(0.2366, abs=5e-4)
    assert hi == pytest.approx(0.7634, abs=5e-4)


def test_wilson_boundaries():
    assert wilson(0, 20)[0] == 0.0
    assert wilson(20, 20)[1] == 1.0


@given(
    trials=st.integers(1, 10**6),
    frac=st.floats(0, 1),
    z=st.floats(0.1, 5),
)
def test_wilson_invariants(trials, frac, z):
    hits = min(trials, int(frac * trials))
    lo, hi = wilson(hits, trials, z)
    p = hits / trials
    assert 0.0 <= lo <= p <= hi <= 1.0


def test_wilson_rejects_bad_inputs():
    with pytest.raises(InvalidParams):
        wilson(5, 0)
    with pytest.raises(InvalidParams):
        wilson(6, 5)
    with pytest.raises(InvalidParams):
        wilson(1, 5, z=0.0)


# ---------------------------------------------------------------------------
# fit_exponent


def test_fit_stretched_exp_exact_model():
    points = [(d, _estimate(math.exp(-(d**-1.5)))) for d in (0.25, 0.5, 1.0)]
    fit = fit_exponent(points, FitModel.STRETCHED_EXP)
    assert fit.slope == pytest.approx(-1.5, abs=1e-12)
    assert fit.r_squared == pytest.approx(1.0, abs=1e-12)
    assert fit.n_points == 3
    assert fit.excluded == ()


def test_fit_power_exact_model():
    points = [(d, _estimate(0.3 * d)) for d in (0.1, 0.2, 0.4)]
    fit = fit_exponent(points, FitModel.POWER)
    assert fit.slope == pytest.approx(1.0, abs=1e-12)
    assert fit.intercept == pytest.approx(math.log(0.3), abs=1e-12)
    assert fit.r_squared == pytest.approx(1.0, abs=1e-12)


def test_fit_noisy_stretched_exp_stays_in_band():
    rng = random.Random(99)
    for _ in range(10):
        points = []
        for d in (0.25, 0.5, 1.0):
            eps = rng.uniform(-0.05, 0.05)
            points.append((d, _estimate(math.exp(-2.0 * d**-1.5 * (1.0 + eps)))))
        fit = fit_exponent(points, FitModel.STRETCHED_EXP)
        assert -1.7 <= fit.slope <= -1.3


def test_fit_excludes_degenerate_probabilities():
    points = [
        (0.1, _estimate(0.0)),
        (0.2, _estimate(0.05)),
        (0.4, _estimate(0.2)),
        (0.8, _estimate(1.0)),
    ]
    fit = fit_exponent(points, FitModel.POWER)
    assert fit.n_points == 2
    assert set(fit.excluded) == {0.1, 0.8}


def test_fit_insufficient_data():
    with pytest.raises(InsufficientData):
        fit_exponent([(0.5, _estimate(0.5))], FitModel.POWER)
    with pytest.raises(InsufficientData):
        fit_exponent([(0.5, _estimate(0.0)), (1.0, _estimate(1.0))], FitModel.POWER)
    with pytest.raises(InsufficientData):
        # equal deltas give no spread to regress on
        fit_exponent([(0.5, _estimate(0.3)), (0.5, _estimate(0.4))], FitModel.POWER)


# ---------------------------------------------------------------------------
# experiment runners against direct per-replica recomputation


def test_small_ball_matches_per_replica_recomputation():
    base, n, reps = 424242, 8, 60
    delta = 1.0
    ests = run_small_ball(FieldSpec(seed=base), n, [delta], reps)
    hits = 0
    for r in range(reps):
        field = FieldSpec(seed=replica_seed(base, r))
        table = build_table(field, LatticePoint(0, 0), LatticePoint(n, n))
        s = sup_abs(profile(backtrack(table, LatticePoint(n, n))))
        hits += s * s * s <= cube_threshold(n, delta)
    assert ests[delta].hits == hits
    assert ests[delta].trials == reps


def test_small_ball_nesting_and_worker_invariance():
    base = FieldSpec(seed=7)
    deltas = [0.3, 0.6, 1.0, 2.0]
    one = run_small_ball(base, 12, deltas, 70, workers=1)
    two = run_small_ball(base, 12, deltas, 70, workers=3)
    assert one == two
    hits = [one[d].hits for d in deltas]
    assert hits == sorted(hits)  # wider ball, never fewer hits


def test_complementarity_with_transversal_tail():
    base = FieldSpec(seed=88)
    n, reps, x = 14, 120, 0.8
    small = run_small_ball(base, n, [x], reps)[x]
    tail = run_transversal_tail(base, n, [x], reps)[x]
    assert small.hits + tail.hits == reps
    assert small.p_hat + tail.p_hat == 1.0


def test_one_point_interval_consistency():
    # integer interval [-2, 2] scores exactly like |psi| <= delta n^(2/3)
    # whenever floor(delta n^(2/3)) = 2
    base = FieldSpec(seed=19)
    n, t, reps = 25, 25, 80
    delta = 0.25  # 0.25 * 25^(2/3) = 2.1376
    by_delta = run_one_point(base, n, t, [delta], reps)[delta]
    by_interval = run_one_point_interval(base, n, t, -2, 2, reps)
    assert by_delta.hits == by_interval.hits


def test_one_point_rejects_bad_t():
    with pytest.raises(InvalidParams):
        run_one_point(FieldSpec(seed=1), 10, 21, [0.5], 5)
    with pytest.raises(InvalidParams):
        run_one_point_interval(FieldSpec(seed=1), 10, 5, -1, 0, 5)  # length < 2


def test_limit_shape_and_tw_reject_non_integral_gamma_n():
    with pytest.raises(InvalidParams):
        run_limit_shape(FieldSpec(seed=1), [10], 0.55, 5)
    with pytest.raises(InvalidParams):
        run_tw_statistic(FieldSpec(seed=1), 10, 0.27, 5)


def test_limit_shape_summary_reasonable():
    # crude sanity: at gamma 1 the normalized time sits well below 4+slack
    # and above 1; tight bounds belong to the acceptance run at larger n
    out = run_limit_shape(FieldSpec(seed=3), [30], 1.0, 40)
    s = out[30]
    assert s.count == 40
    assert 1.0 < s.mean < 5.0
    assert s.min <= s.quantiles[0.5] <= s.max


def test_tw_statistic_centers_below_zero():
    # the finite-n mean of the centered statistic sits near the limit law's
    # negative mean; at n=60 it is clearly below zero
    s = run_tw_statistic(FieldSpec(seed=17), 60, 1.0, 300)
    assert s.count == 300
    assert s.mean < 0.0
    assert 0.2 < math.sqrt(s.variance) < 2.5


def test_block_stats_inequality_and_survival():
    res = run_block_stats(FieldSpec(seed=23), 40, 0.5, 1.0, 30)
    assert res.z_summary.count == res.z_values.size
    surv = [res.survival[r].p_hat for r in (1.0, 2.0, 3.0, 4.0)]
    assert surv == sorted(surv, reverse=True)  # survival decreasing in r
    assert all(0.0 <= p <= 1.0 for p in surv)


def test_coalescence_degenerate_cases():
    base = FieldSpec(seed=31)
    same = run_coalescence(base, 8, 8, 0.0, 40)
    assert same.p_same_point.p_hat == 1.0  # identical endpoints, identical paths
    pinned = run_coalescence(base, 8, 0, 1.0, 40)
    assert pinned.estimate.p_hat == 0.0  # t=0 reads the two distinct starts
    pinned_end = run_coalescence(base, 8, 16, 1.0, 40)
    assert pinned_end.estimate.p_hat == 0.0


def test_coalescence_midpoint_positive_rate():
    res = run_coalescence(FieldSpec(seed=37), 27, 27, 1.0, 60)
    assert 0.0 <= res.estimate.p_hat <= 1.0
    assert res.estimate.p_hat <= res.p_same_point.p_hat  # cap only removes hits


def test_crossing_count_single_index():
    s = run_crossing_count(FieldSpec(seed=41), 27, 27, 1.0, 0, 50)
    assert s.min in (0.0, 1.0)
    assert s.max in (0.0, 1.0)


def test_crossing_count_bounds_and_validation():
    s = run_crossing_count(FieldSpec(seed=43), 27, 27, 0.2, 2, 30)
    assert 0.0 <= s.min and s.max <= 5.0  # at most 2*i_range+1 indices
    with pytest.raises(InvalidParams):
        run_crossing_count(FieldSpec(seed=43), 27, 27, 0.2, 3, 30)  # beyond delta^-1/2


def test_summarize_values_quantiles_ordered():
    vals = np.array([3.0, 1.0, 4.0, 1.0, 5.0, 9.0, 2.0, 6.0])
    s = summarize_values(vals)
    q = s.quantiles
    assert s.min <= q[0.05] <= q[0.25] <= q[0.5] <= q[0.75] <= q[0.95] <= s.max
    assert s.count == 8
    assert s.variance > 0


def test_make_estimate_consistency():
    est = make_estimate(3, 12)
    assert est.p_hat == 0.25
    assert est.ci_lo <= est.p_hat <= est.ci_hi

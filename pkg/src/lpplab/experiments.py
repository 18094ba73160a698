"""Monte Carlo experiments over replica fields, plus estimation statistics.

Every experiment derives replica r's field from replica_seed(base, r),
computes per-replica values through the batched sweep engine, and reduces
them in replica-index order. Work is split into fixed-size replica batches;
batches may run on worker processes, but a batch's output is a pure
function of (base seed, replica range, parameters), so results are
byte-identical for any worker count.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import InsufficientData, InvalidParams, LppError
from .geodesic import profile_from_xs
from .lattice import LatticePoint, cube_threshold, effective_halfwidth
from .passage import (
    PassageConvention,
    SweepGeometry,
    _relativize,
    backtrack_xs,
    block_cuts,
    run_sweep,
)
from .randfield import FieldSpec, replica_seed

BATCH = 32  # replicas per work unit; outputs do not depend on this

QUANTILES = (0.05, 0.25, 0.5, 0.75, 0.95)


# ---------------------------------------------------------------------------
# statistics


@dataclass(frozen=True)
class Estimate:
    hits: int
    trials: int
    p_hat: float
    ci_lo: float
    ci_hi: float


@dataclass(frozen=True)
class StatSummary:
    count: int
    mean: float
    variance: float
    min: float
    max: float
    quantiles: dict[float, float]


class FitModel(Enum):
    STRETCHED_EXP = "stretched_exp"  # log(-log p) on log delta
    POWER = "power"  # log p on log delta


@dataclass(frozen=True)
class FitResult:
    slope: float
    intercept: float
    r_squared: float
    n_points: int
    model: FitModel
    excluded: tuple[float, ...]  # deltas dropped because p_hat was 0 or 1


def wilson(hits: int, trials: int, z: float = 1.96) -> tuple[float, float]:
    if trials < 1 or not (0 <= hits <= trials) or z <= 0:
        raise InvalidParams(f"bad wilson inputs hits={hits} trials={trials} z={z}")
    p = hits / trials
    z2 = z * z
    denom = 1.0 + z2 / trials
    center = (p + z2 / (2.0 * trials)) / denom
    margin = (z / denom) * math.sqrt(p * (1.0 - p) / trials + z2 / (4.0 * trials * trials))
    # the exact interval always brackets p; clamp away sub-ulp rounding residue
    return min(max(0.0, center - margin), p), max(min(1.0, center + margin), p)


def make_estimate(hits: int, trials: int, z: float = 1.96) -> Estimate:
    lo, hi = wilson(hits, trials, z)
    return Estimate(hits=hits, trials=trials, p_hat=hits / trials, ci_lo=lo, ci_hi=hi)


def summarize_values(values: np.ndarray) -> StatSummary:
    if values.size == 0:
        raise InvalidParams("no values to summarize")
    qs = np.quantile(values, QUANTILES)
    var = float(np.var(values, ddof=1)) if values.size > 1 else 0.0
    return StatSummary(
        count=int(values.size),
        mean=float(np.mean(values)),
        variance=var,
        min=float(np.min(values)),
        max=float(np.max(values)),
        quantiles={q: float(v) for q, v in zip(QUANTILES, qs)},
    )


def fit_exponent(points: list[tuple[float, Estimate]], model: FitModel) -> FitResult:
    xs, ys, excluded = [], [], []
    for delta, est in points:
        if est.p_hat <= 0.0 or est.p_hat >= 1.0:
            excluded.append(delta)
            continue
        xs.append(math.log(delta))
        if model is FitModel.STRETCHED_EXP:
            ys.append(math.log(-math.log(est.p_hat)))
        else:
            ys.append(math.log(est.p_hat))
    if len(xs) < 2:
        raise InsufficientData(f"{len(xs)} usable points, need >= 2")
    x = np.array(xs)
    y = np.array(ys)
    xm, ym = x.mean(), y.mean()
    sxx = float(np.sum((x - xm) ** 2))
    if sxx == 0.0:
        raise InsufficientData("all deltas equal")
    slope = float(np.sum((x - xm) * (y - ym)) / sxx)
    intercept = float(ym - slope * xm)
    ss_res = float(np.sum((y - (intercept + slope * x)) ** 2))
    ss_tot = float(np.sum((y - ym) ** 2))
    r2 = 1.0 if ss_tot == 0.0 and ss_res == 0.0 else 1.0 - ss_res / ss_tot
    return FitResult(
        slope=slope,
        intercept=intercept,
        r_squared=r2,
        n_points=len(xs),
        model=model,
        excluded=tuple(excluded),
    )


# ---------------------------------------------------------------------------
# batching plumbing


def default_workers() -> int:
    env = os.environ.get("LPP_WORKERS")
    if env is not None:
        try:
            w = int(env)
        except ValueError as e:
            raise InvalidParams(f"LPP_WORKERS must be an integer, got {env!r}") from e
        if w < 1:
            raise InvalidParams("LPP_WORKERS must be >= 1")
        return w
    return os.cpu_count() or 1


def _batch_ranges(replicas: int) -> list[tuple[int, int]]:
    return [(i, min(i + BATCH, replicas)) for i in range(0, replicas, BATCH)]


def _replica_seeds(base_seed: int, r0: int, r1: int) -> np.ndarray:
    return np.array([replica_seed(base_seed, r) for r in range(r0, r1)], dtype=np.uint64)


def _map_batches(fn, payloads: list, workers: int) -> list:
    if workers <= 1 or len(payloads) <= 1:
        return [fn(p) for p in payloads]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, payloads))


def _within(vals: np.ndarray, n: int, scale: float, strict: bool = False) -> np.ndarray:
    """Elementwise |vals| <= scale * n^(2/3) (or strict <), via exact cubes.

    vals are integers; comparing |v|^3 against scale^3 * n^2 avoids the
    fractional power, so thresholds that are exactly integers (0.25 * 100,
    say) keep their boundary lattice points.
    """
    a = np.abs(vals).astype(np.float64)
    cubes = a * a * a
    target = cube_threshold(n, scale)
    return cubes < target if strict else cubes <= target


def _bridge_geometry(n: int) -> SweepGeometry:
    geom, _, _ = _relativize([LatticePoint(0, 0)], [LatticePoint(n, n)], None)
    return geom


def _check_common(n: int, replicas: int) -> None:
    if n < 1:
        raise InvalidParams("n must be >= 1")
    if replicas < 1:
        raise InvalidParams("replicas must be >= 1")


# ---------------------------------------------------------------------------
# per-batch kernels (top level so worker processes can unpickle them)


def _batch_bridge_profiles(payload) -> np.ndarray:
    """psi profile of the 0 -> (n, n) path for one replica batch; (R, 2n+1)."""
    base_seed, r0, r1, n = payload
    seeds = _replica_seeds(base_seed, r0, r1)
    R = len(seeds)
    zeros = np.zeros(R, dtype=np.int64)
    res = run_sweep(seeds, zeros, zeros, _bridge_geometry(n), keep_preds=True)
    xs = backtrack_xs(res, n)
    return profile_from_xs(xs, 0)


def _batch_sup_abs(payload) -> np.ndarray:
    prof = _batch_bridge_profiles(payload)
    return np.abs(prof).max(axis=1)


def _batch_psi_at_t(payload) -> np.ndarray:
    base_seed, r0, r1, n, t = payload
    prof = _batch_bridge_profiles((base_seed, r0, r1, n))
    return prof[:, t]


def _batch_passage_values(payload) -> np.ndarray:
    """EXCLUDE_BOTH passage time 0 -> (nx, ny) per replica."""
    base_seed, r0, r1, nx, ny = payload
    seeds = _replica_seeds(base_seed, r0, r1)
    R = len(seeds)
    zeros = np.zeros(R, dtype=np.int64)
    geom, _, _ = _relativize([LatticePoint(0, 0)], [LatticePoint(nx, ny)], None)
    res = run_sweep(seeds, zeros, zeros, geom)
    return res.target_values[:, 0] - res.source_weights[:, 0] - res.target_weights[:, 0]


def _batch_constrained_values(payload) -> np.ndarray:
    """EXCLUDE_BOTH strip-constrained passage time per replica."""
    base_seed, r0, r1, n, delta = payload
    from .lattice import strip_for

    seeds = _replica_seeds(base_seed, r0, r1)
    R = len(seeds)
    zeros = np.zeros(R, dtype=np.int64)
    geom, _, _ = _relativize([LatticePoint(0, 0)], [LatticePoint(n, n)], strip_for(n, delta))
    res = run_sweep(seeds, zeros, zeros, geom)
    vals = res.target_values[:, 0]
    if not np.all(np.isfinite(vals)):
        raise InvalidParams(f"strip for n={n}, delta={delta} admits no path")
    return vals - res.source_weights[:, 0] - res.target_weights[:, 0]


def _batch_block_values(payload) -> tuple[np.ndarray, np.ndarray]:
    """(Y values (R, K), constrained T (R,)) for one replica batch."""
    base_seed, r0, r1, n, delta, A = payload
    from .lattice import StripSpec, strip_for
    from .passage import _diag_points

    seeds = _replica_seeds(base_seed, r0, r1)
    R = len(seeds)
    zeros = np.zeros(R, dtype=np.int64)
    cuts = block_cuts(n, delta, A)
    w = effective_halfwidth(n, delta)
    ys = np.empty((R, len(cuts) - 1))
    for i, (lo_phi, hi_phi) in enumerate(zip(cuts, cuts[1:])):
        block = StripSpec(psi_min=-w, psi_max=w, phi_min=lo_phi, phi_max=hi_phi)
        sources = _diag_points(lo_phi, -w, w)
        targets = _diag_points(hi_phi, -w, w)
        geom, ax, ay = _relativize(sources, targets, block)
        res = run_sweep(seeds, zeros + ax, zeros + ay, geom)
        ys[:, i] = np.max(res.target_values - res.target_weights, axis=1)
    t_vals = _batch_constrained_values((base_seed, r0, r1, n, delta))
    return ys, t_vals


def _batch_coalescence(payload) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(psi of path 1 at t, psi of path 2 at t, coalesced flags), absolute psi."""
    base_seed, r0, r1, n, t, m_half = payload
    seeds = np.repeat(_replica_seeds(base_seed, r0, r1), 2)
    R2 = len(seeds)
    x0 = np.empty(R2, dtype=np.int64)
    y0 = np.empty(R2, dtype=np.int64)
    x0[0::2], y0[0::2] = -m_half, m_half  # first endpoint pair
    x0[1::2], y0[1::2] = m_half, -m_half  # second endpoint pair
    res = run_sweep(seeds, x0, y0, _bridge_geometry(n), keep_preds=True)
    xs = backtrack_xs(res, n)
    prof = profile_from_xs(xs, 0)
    psi_t = prof[:, t]
    psi1 = psi_t[0::2] + (-2 * m_half)  # psi offset of each window's origin
    psi2 = psi_t[1::2] + (2 * m_half)
    return psi1, psi2, psi1 == psi2


def _batch_crossing_counts(payload) -> np.ndarray:
    base_seed, r0, r1, n, t, delta, i_range = payload
    d = effective_halfwidth(n, delta)
    idx = np.arange(-i_range, i_range + 1, dtype=np.int64)
    n_i = len(idx)
    seeds = np.repeat(_replica_seeds(base_seed, r0, r1), n_i)
    x0 = np.tile(idx * d, (r1 - r0))
    y0 = -x0
    res = run_sweep(seeds, x0, y0, _bridge_geometry(n), keep_preds=True)
    xs = backtrack_xs(res, n)
    prof = profile_from_xs(xs, 0)
    near = _within(prof[:, t], n, delta, strict=True)
    return near.reshape(r1 - r0, n_i).sum(axis=1)


# ---------------------------------------------------------------------------
# experiments


def run_small_ball(
    base: FieldSpec, n: int, delta_list: list[float], replicas: int, workers: int = 1
) -> dict[float, Estimate]:
    """P(sup |psi| <= delta * n^(2/3)) of the 0 -> (n, n) path, one sweep per replica."""
    _check_common(n, replicas)
    if not delta_list or any(d <= 0 for d in delta_list):
        raise InvalidParams("delta_list must be nonempty positive")
    payloads = [(base.seed, r0, r1, n) for r0, r1 in _batch_ranges(replicas)]
    sups = np.concatenate(_map_batches(_batch_sup_abs, payloads, workers))
    return {
        d: make_estimate(int(np.sum(_within(sups, n, d))), replicas)
        for d in delta_list
    }


def run_transversal_tail(
    base: FieldSpec, n: int, x_list: list[float], replicas: int, workers: int = 1
) -> dict[float, Estimate]:
    """P(sup |psi| > x * n^(2/3)); exact complement of run_small_ball at the same threshold."""
    _check_common(n, replicas)
    if not x_list or any(x < 0 for x in x_list):
        raise InvalidParams("x_list must be nonempty nonnegative")
    payloads = [(base.seed, r0, r1, n) for r0, r1 in _batch_ranges(replicas)]
    sups = np.concatenate(_map_batches(_batch_sup_abs, payloads, workers))
    return {
        x: make_estimate(int(np.sum(~_within(sups, n, x))), replicas)
        for x in x_list
    }


def run_one_point(
    base: FieldSpec, n: int, t: int, delta_list: list[float], replicas: int, workers: int = 1
) -> dict[float, Estimate]:
    """P(|psi(t)| <= delta * n^(2/3)) for the 0 -> (n, n) path."""
    _check_common(n, replicas)
    if not (0 <= t <= 2 * n):
        raise InvalidParams(f"t={t} outside [0, {2 * n}]")
    if not delta_list or any(d <= 0 for d in delta_list):
        raise InvalidParams("delta_list must be nonempty positive")
    payloads = [(base.seed, r0, r1, n, t) for r0, r1 in _batch_ranges(replicas)]
    vals = np.concatenate(_map_batches(_batch_psi_at_t, payloads, workers))
    return {
        d: make_estimate(int(np.sum(_within(vals, n, d))), replicas)
        for d in delta_list
    }


def run_one_point_interval(
    base: FieldSpec, n: int, t: int, psi_lo: int, psi_hi: int, replicas: int, workers: int = 1
) -> Estimate:
    """P(psi(t) in [psi_lo, psi_hi]); interval must have length >= 2."""
    _check_common(n, replicas)
    if not (0 <= t <= 2 * n):
        raise InvalidParams(f"t={t} outside [0, {2 * n}]")
    if psi_hi - psi_lo < 2:
        raise InvalidParams("interval length must be >= 2")
    payloads = [(base.seed, r0, r1, n, t) for r0, r1 in _batch_ranges(replicas)]
    vals = np.concatenate(_map_batches(_batch_psi_at_t, payloads, workers))
    hits = int(np.sum((vals >= psi_lo) & (vals <= psi_hi)))
    return make_estimate(hits, replicas)


def run_constrained_tail(
    base: FieldSpec, n: int, delta: float, c_const: float, replicas: int, workers: int = 1
) -> Estimate:
    """P(strip-constrained T >= 4n - (c_const / delta) * n^(1/3))."""
    _check_common(n, replicas)
    if delta <= 0 or c_const < 0:
        raise InvalidParams("delta must be > 0 and c_const >= 0")
    payloads = [(base.seed, r0, r1, n, delta) for r0, r1 in _batch_ranges(replicas)]
    vals = np.concatenate(_map_batches(_batch_constrained_values, payloads, workers))
    threshold = 4.0 * n - (c_const / delta) * float(n) ** (1.0 / 3.0)
    return make_estimate(int(np.sum(vals >= threshold)), replicas)


def _integral_gamma_target(n: int, gamma: float) -> int:
    m = gamma * n
    if abs(m - round(m)) > 1e-9:
        raise InvalidParams(f"gamma * n = {m} is not integral")
    m = round(m)
    if m < 1:
        raise InvalidParams("gamma * n must be >= 1")
    return m


def run_limit_shape(
    base: FieldSpec, n_list: list[int], gamma: float, replicas: int, workers: int = 1
) -> dict[int, StatSummary]:
    """Summary of T(0 -> (n, gamma*n)) / n per n; the limit is (1 + sqrt(gamma))^2."""
    if not n_list:
        raise InvalidParams("n_list must be nonempty")
    out = {}
    for n in n_list:
        _check_common(n, replicas)
        m = _integral_gamma_target(n, gamma)
        payloads = [(base.seed, r0, r1, n, m) for r0, r1 in _batch_ranges(replicas)]
        vals = np.concatenate(_map_batches(_batch_passage_values, payloads, workers))
        out[n] = summarize_values(vals / n)
    return out


def run_tw_statistic(
    base: FieldSpec, n: int, gamma: float, replicas: int, workers: int = 1
) -> StatSummary:
    """Summary of the centered, n^(1/3)-scaled passage time statistic."""
    _check_common(n, replicas)
    m = _integral_gamma_target(n, gamma)
    payloads = [(base.seed, r0, r1, n, m) for r0, r1 in _batch_ranges(replicas)]
    vals = np.concatenate(_map_batches(_batch_passage_values, payloads, workers))
    sq = math.sqrt(gamma)
    prefactor = gamma ** (1.0 / 6.0) * (1.0 + sq) ** (-4.0 / 3.0) * float(n) ** (-1.0 / 3.0)
    stats = prefactor * (vals - (1.0 + sq) ** 2 * n)
    return summarize_values(stats)


@dataclass(frozen=True)
class BlockStatsResult:
    z_summary: StatSummary
    z_values: np.ndarray  # pooled over (replica, block), replica-major order
    survival: dict[float, Estimate]  # P(Z >= r) at integer thresholds


def run_block_stats(
    base: FieldSpec,
    n: int,
    delta: float,
    A: float,
    replicas: int,
    workers: int = 1,
    survival_thresholds: tuple[float, ...] = (1.0, 2.0, 3.0, 4.0),
) -> BlockStatsResult:
    """Pooled block statistics Z_i = (Y_i - 4*A*delta^1.5*n) / (A^(1/3) delta^(1/2) n^(1/3)).

    Also asserts the deterministic bound: the constrained passage time never
    exceeds the sum of the block sups (hard failure, this is not random).
    """
    _check_common(n, replicas)
    if delta <= 0 or A <= 0:
        raise InvalidParams("delta and A must be > 0")
    payloads = [(base.seed, r0, r1, n, delta, A) for r0, r1 in _batch_ranges(replicas)]
    parts = _map_batches(_batch_block_values, payloads, workers)
    ys = np.concatenate([p[0] for p in parts], axis=0)  # (replicas, K)
    t_vals = np.concatenate([p[1] for p in parts])
    sum_y = ys.sum(axis=1)
    viol = np.nonzero(t_vals > sum_y)[0]
    if viol.size:
        raise LppError(
            f"deterministic bound violated at replica {viol[0]}: "
            f"T={t_vals[viol[0]]!r} > sum Y={sum_y[viol[0]]!r}"
        )
    center = 4.0 * A * delta**1.5 * n
    scale = A ** (1.0 / 3.0) * delta**0.5 * float(n) ** (1.0 / 3.0)
    z = ((ys - center) / scale).reshape(-1)
    total = z.size
    survival = {
        r: make_estimate(int(np.sum(z >= r)), total) for r in survival_thresholds
    }
    return BlockStatsResult(z_summary=summarize_values(z), z_values=z, survival=survival)


@dataclass(frozen=True)
class CoalescenceResult:
    estimate: Estimate  # same point at phi = t AND |psi| within the cap
    p_same_point: Estimate  # same point regardless of the cap


def run_coalescence(
    base: FieldSpec, n: int, t: int, m_const: float, replicas: int, workers: int = 1
) -> CoalescenceResult:
    """Two paths from opposite n^(2/3)-order start offsets to their translated targets.

    Scores whether they pass through the same point of the line phi = t with
    that point's |psi| at most 2 * m_const * n^(2/3).
    """
    _check_common(n, replicas)
    if not (0 <= t <= 2 * n):
        raise InvalidParams(f"t={t} outside [0, {2 * n}]")
    if m_const < 0:
        raise InvalidParams("m_const must be >= 0")
    m_half = effective_halfwidth(n, m_const) if m_const > 0 else 0
    payloads = [(base.seed, r0, r1, n, t, m_half) for r0, r1 in _batch_ranges(replicas)]
    parts = _map_batches(_batch_coalescence, payloads, workers)
    psi1 = np.concatenate([p[0] for p in parts])
    same = np.concatenate([p[2] for p in parts])
    cap = _within(psi1, n, 2.0 * m_const)
    return CoalescenceResult(
        estimate=make_estimate(int(np.sum(same & cap)), replicas),
        p_same_point=make_estimate(int(np.sum(same)), replicas),
    )


def run_crossing_count(
    base: FieldSpec,
    n: int,
    t: int,
    delta: float,
    i_range: int,
    replicas: int,
    workers: int = 1,
) -> StatSummary:
    """Count of path starts u_i = (i*d, -i*d), |i| <= i_range, whose path at
    phi = t stays strictly within delta * n^(2/3) of its own start's psi."""
    _check_common(n, replicas)
    if not (0 <= t <= 2 * n):
        raise InvalidParams(f"t={t} outside [0, {2 * n}]")
    if delta <= 0:
        raise InvalidParams("delta must be > 0")
    max_range = math.floor(1.0 / delta / 2.0)
    if not (0 <= i_range <= max_range):
        raise InvalidParams(f"i_range must be within [0, {max_range}] for delta={delta}")
    payloads = [(base.seed, r0, r1, n, t, delta, i_range) for r0, r1 in _batch_ranges(replicas)]
    counts = np.concatenate(_map_batches(_batch_crossing_counts, payloads, workers))
    return summarize_values(counts.astype(np.float64))

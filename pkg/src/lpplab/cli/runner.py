"""Dispatch a validated config to the experiments and build result records."""

from __future__ import annotations

import random
import time
from datetime import datetime, timezone

from ..errors import NoPath
from ..experiments import (
    default_workers,
    run_block_stats,
    run_coalescence,
    run_constrained_tail,
    run_crossing_count,
    run_limit_shape,
    run_one_point,
    run_one_point_interval,
    run_small_ball,
    run_transversal_tail,
    run_tw_statistic,
)
from ..geodesic import backtrack
from ..lattice import LatticePoint, StripSpec, to_diag
from ..oracle import brute_max
from ..passage import PassageConvention, build_table, passage_time
from ..randfield import FieldSpec
from .config import Experiment, ExperimentConfig
from .records import estimate_dict, make_record


def _now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="microseconds")


def _max_i_range(delta: float) -> int:
    return int(1.0 / delta / 2.0)


def run_config(cfg: ExperimentConfig) -> list[dict]:
    workers = cfg.workers if cfg.workers is not None else default_workers()
    echo = cfg.echo()
    base = FieldSpec(seed=cfg.base_seed)
    records: list[dict] = []

    def emit(params: dict, *, estimate=None, summary=None, extra=None, wall: float = 0.0):
        records.append(
            make_record(
                cfg.experiment.value,
                echo,
                params,
                estimate=estimate,
                summary=summary,
                extra=extra,
                timestamp=_now(),
                wall_time_seconds=wall,
            )
        )

    if cfg.experiment is Experiment.ORACLE_CHECK:
        t0 = time.perf_counter()
        report = cross_check(cases=cfg.replicas, seed=cfg.base_seed)
        emit(
            {"cases": report["cases"]},
            estimate=None,
            extra=report,
            wall=time.perf_counter() - t0,
        )
        return records

    for n in cfg.sizes():
        if cfg.experiment is Experiment.SMALL_BALL:
            t0 = time.perf_counter()
            ests = run_small_ball(base, n, cfg.delta_list, cfg.replicas, workers)
            wall = time.perf_counter() - t0
            for d in cfg.delta_list:
                emit({"n": n, "delta": d}, estimate=ests[d], wall=wall)

        elif cfg.experiment is Experiment.ONE_POINT:
            t = cfg.t_for(n)
            t0 = time.perf_counter()
            ests = run_one_point(base, n, t, cfg.delta_list, cfg.replicas, workers)
            wall = time.perf_counter() - t0
            for d in cfg.delta_list:
                emit({"n": n, "t": t, "delta": d}, estimate=ests[d], wall=wall)

        elif cfg.experiment is Experiment.ONE_POINT_INTERVAL:
            t = cfg.t_for(n)
            t0 = time.perf_counter()
            est = run_one_point_interval(
                base, n, t, cfg.psi_lo, cfg.psi_hi, cfg.replicas, workers
            )
            emit(
                {"n": n, "t": t, "psi_lo": cfg.psi_lo, "psi_hi": cfg.psi_hi},
                estimate=est,
                wall=time.perf_counter() - t0,
            )

        elif cfg.experiment is Experiment.CONSTRAINED_TAIL:
            for d in cfg.delta_list:
                t0 = time.perf_counter()
                est = run_constrained_tail(base, n, d, cfg.c_const, cfg.replicas, workers)
                emit(
                    {"n": n, "delta": d, "c_const": cfg.c_const},
                    estimate=est,
                    wall=time.perf_counter() - t0,
                )

        elif cfg.experiment is Experiment.TRANSVERSAL_TAIL:
            t0 = time.perf_counter()
            ests = run_transversal_tail(base, n, cfg.x_list, cfg.replicas, workers)
            wall = time.perf_counter() - t0
            for x in cfg.x_list:
                emit({"n": n, "x": x}, estimate=ests[x], wall=wall)

        elif cfg.experiment is Experiment.LIMIT_SHAPE:
            t0 = time.perf_counter()
            summaries = run_limit_shape(base, [n], cfg.gamma, cfg.replicas, workers)
            emit(
                {"n": n, "gamma": cfg.gamma},
                summary=summaries[n],
                wall=time.perf_counter() - t0,
            )

        elif cfg.experiment is Experiment.TW_STAT:
            t0 = time.perf_counter()
            summary = run_tw_statistic(base, n, cfg.gamma, cfg.replicas, workers)
            emit(
                {"n": n, "gamma": cfg.gamma},
                summary=summary,
                wall=time.perf_counter() - t0,
            )

        elif cfg.experiment is Experiment.BLOCK_STATS:
            for d in cfg.delta_list:
                t0 = time.perf_counter()
                res = run_block_stats(base, n, d, cfg.A, cfg.replicas, workers)
                survival = {
                    f"{r:g}": estimate_dict(est) for r, est in res.survival.items()
                }
                emit(
                    {"n": n, "delta": d, "A": cfg.A},
                    summary=res.z_summary,
                    extra={"survival": survival},
                    wall=time.perf_counter() - t0,
                )

        elif cfg.experiment is Experiment.COALESCENCE:
            t = cfg.t_for(n)
            t0 = time.perf_counter()
            res = run_coalescence(base, n, t, cfg.m_const, cfg.replicas, workers)
            emit(
                {"n": n, "t": t, "m_const": cfg.m_const},
                estimate=res.estimate,
                extra={"p_same_point": estimate_dict(res.p_same_point)},
                wall=time.perf_counter() - t0,
            )

        elif cfg.experiment is Experiment.CROSSING_COUNT:
            for d in cfg.delta_list:
                i_range = _max_i_range(d)
                t = cfg.t_for(n)
                t0 = time.perf_counter()
                summary = run_crossing_count(base, n, t, d, i_range, cfg.replicas, workers)
                emit(
                    {"n": n, "t": t, "delta": d, "i_range": i_range},
                    summary=summary,
                    wall=time.perf_counter() - t0,
                )

        else:  # pragma: no cover - enum is exhaustive
            raise AssertionError(cfg.experiment)

    return records


# ---------------------------------------------------------------------------
# engine vs exhaustive-enumeration cross-check


def _random_case(rng: random.Random):
    ax, ay = rng.randint(-5, 5), rng.randint(-5, 5)
    nx, ny = rng.randint(0, 5), rng.randint(0, 5)
    u = LatticePoint(ax, ay)
    v = LatticePoint(ax + nx, ay + ny)
    conv = rng.choice(list(PassageConvention))
    region = None
    if rng.random() < 0.5:
        pu, pv = to_diag(u), to_diag(v)
        lo = min(pu.psi, pv.psi) - rng.randint(-1, 2)
        hi = max(pu.psi, pv.psi) + rng.randint(-1, 2)
        region = StripSpec(
            psi_min=min(lo, hi),
            psi_max=max(lo, hi),
            phi_min=min(pu.phi, pv.phi),
            phi_max=max(pu.phi, pv.phi),
        )
    field = FieldSpec(seed=rng.getrandbits(64))
    return field, u, v, conv, region


def cross_check(cases: int, seed: int) -> dict:
    """Compare sweep values and backtracked paths against exhaustive
    enumeration on random small windows; exact equality required."""
    rng = random.Random(seed)
    disagreements: list[dict] = []
    for i in range(cases):
        field, u, v, conv, region = _random_case(rng)
        detail = {
            "case": i,
            "seed": field.seed,
            "u": [u.x, u.y],
            "v": [v.x, v.y],
            "convention": conv.name,
            "region": None
            if region is None
            else [region.psi_min, region.psi_max, region.phi_min, region.phi_max],
        }
        engine_val = brute_val = None
        engine_path = brute_path = None
        engine_nopath = brute_nopath = False
        try:
            table = build_table(field, u, v, region)
            engine_val = passage_time(table, v, conv)
            engine_path = backtrack(table, v).vertices
        except NoPath:
            engine_nopath = True
        try:
            brute_val, g = brute_max(field, u, v, conv, region)
            brute_path = g.vertices
        except NoPath:
            brute_nopath = True

        if engine_nopath != brute_nopath:
            detail["mismatch"] = "reachability"
            disagreements.append(detail)
        elif not engine_nopath:
            if engine_val != brute_val:
                detail["mismatch"] = "value"
                detail["engine"] = engine_val
                detail["reference"] = brute_val
                disagreements.append(detail)
            elif engine_path != brute_path:
                detail["mismatch"] = "path"
                disagreements.append(detail)
    return {
        "cases": cases,
        "agreements": cases - len(disagreements),
        "disagreements": disagreements,
        "all_agree": not disagreements,
    }

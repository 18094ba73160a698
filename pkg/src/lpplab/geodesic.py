"""Backtracking optimal paths and their transversal fluctuation profiles."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, NoPath
from .lattice import LatticePoint, StripSpec
from .passage import NEG_INF, DpTable

log = logging.getLogger(__name__)

# exact value ties observed while backtracking; expected to stay at zero
# for continuous weights, so a hit is logged rather than raised
tie_count = 0


def reset_tie_count() -> None:
    global tie_count
    tie_count = 0


@dataclass(frozen=True)
class Geodesic:
    vertices: tuple[LatticePoint, ...]


@dataclass(frozen=True)
class Profile:
    """psi of the path on every diagonal it crosses; entry t - phi0 is psi on line phi = t."""

    phi0: int
    psis: tuple[int, ...]


def backtrack(table: DpTable, target: LatticePoint) -> Geodesic:
    """Follow predecessor bits from target back to the table's source.

    Ties (left and below predecessor values exactly equal) are counted in
    tie_count and resolved toward the left predecessor, the smaller x.
    """
    global tie_count
    res = table.result
    geom = res.geom
    xr = target.x - table.anchor_x
    yr = target.y - table.anchor_y
    k = (xr + yr) - geom.phi_s
    if table.raw_value(target) == NEG_INF:
        raise NoPath(f"{target} unreachable in table")

    xs = [xr]
    x = xr
    while k > 0:
        lo_k = int(res.lo[k])
        j = x - lo_k
        packed = res.preds[k]
        bit = (int(packed[0, j >> 3]) >> (7 - (j & 7))) & 1

        prev_vals = res.values[k - 1]
        prev_lo = int(res.lo[k - 1])
        jl = x - 1 - prev_lo
        jb = x - prev_lo
        left = float(prev_vals[0, jl]) if 0 <= jl < prev_vals.shape[1] else NEG_INF
        below = float(prev_vals[0, jb]) if 0 <= jb < prev_vals.shape[1] else NEG_INF
        if left == below and left != NEG_INF:
            tie_count += 1
            log.debug("exact tie at relative cell (%d, %d)", x, geom.phi_s + k - x)

        x -= bit
        xs.append(x)
        k -= 1

    xs.reverse()
    verts = tuple(
        LatticePoint(table.anchor_x + x, table.anchor_y + (geom.phi_s + i) - x)
        for i, x in enumerate(xs)
    )
    return Geodesic(vertices=verts)


def profile(g: Geodesic) -> Profile:
    first = g.vertices[0]
    return Profile(phi0=first.x + first.y, psis=tuple(v.x - v.y for v in g.vertices))


def profile_from_xs(xs: np.ndarray, phi0: int) -> np.ndarray:
    """Vectorized profiles: xs (R, D+1) path x per diagonal -> psi array (R, D+1)."""
    D = xs.shape[1] - 1
    return 2 * xs - (phi0 + np.arange(D + 1, dtype=np.int64))[None, :]


def sup_abs(p: Profile) -> int:
    return max(abs(v) for v in p.psis)


def one_point(p: Profile, t: int) -> int:
    idx = t - p.phi0
    if not (0 <= idx < len(p.psis)):
        raise DomainError(f"t={t} outside profile range")
    return p.psis[idx]


def in_strip(p: Profile, strip: StripSpec) -> bool:
    for i, psi in enumerate(p.psis):
        phi = p.phi0 + i
        if not (strip.phi_min <= phi <= strip.phi_max and strip.psi_min <= psi <= strip.psi_max):
            return False
    return True


def pi_eval(p: Profile, n: int, s: float) -> float:
    """n^(-2/3) * (linear interpolation of the profile at 2ns), for pinned bridges."""
    if p.phi0 != 0 or len(p.psis) != 2 * n + 1:
        raise DomainError("profile is not a 0 -> (n, n) bridge")
    if not (0.0 <= s <= 1.0):
        raise DomainError(f"s={s} outside [0, 1]")
    pos = 2.0 * n * s
    k = int(pos)
    if k >= 2 * n:
        return float(n) ** (-2.0 / 3.0) * p.psis[2 * n]
    frac = pos - k
    interp = p.psis[k] * (1.0 - frac) + p.psis[k + 1] * frac
    return float(n) ** (-2.0 / 3.0) * interp

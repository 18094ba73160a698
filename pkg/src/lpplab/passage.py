"""Exact max-plus dynamic programming over lattice windows.

The sweep walks anti-diagonals in increasing phi. Cell values are raw
sums L(w) = weight(w) + max(L(left), L(below)) with L(source) = weight(source),
i.e. the INCLUDE_BOTH convention; the other endpoint conventions are applied
at readout. Ties in the max go to the left predecessor (x-1, y), the one
with smaller x, which makes the backtracked path the leftmost optimal one.

A sweep runs R lanes at once. Lanes share the relative window geometry
(source/target positions, optional strip mask) but carry their own seed and
absolute offset, so independent replicas and translated copies of the same
window vectorize together. Weights are evaluated at absolute coordinates,
so two lanes of one seed agree wherever their windows overlap.

Masks follow the constrained-passage convention: only interior vertices of
a path are required to lie in the region, so the mask is never applied to
the first and last diagonal of the sweep (sources and targets are the only
live cells there).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field
from enum import Enum

import numpy as np

from .errors import InvalidParams, NoPath
from .lattice import LatticePoint, StripSpec, effective_halfwidth, leq, strip_for, to_diag
from .randfield import FieldSpec, batch_weights, weight

NEG_INF = float("-inf")


class PassageConvention(Enum):
    EXCLUDE_BOTH = "exclude_both"  # drops both endpoint weights
    EXCLUDE_LAST = "exclude_last"  # drops only the final vertex weight
    INCLUDE_BOTH = "include_both"  # raw sum, what the sweep stores


@dataclass(frozen=True)
class SweepGeometry:
    """Window and endpoint layout in source-anchored relative coordinates."""

    w_ext: int  # relative x spans [0, w_ext]
    h_ext: int  # relative y spans [0, h_ext]
    phi_s: int  # diagonal holding every source
    phi_t: int  # diagonal holding every target
    sources_x: np.ndarray  # sorted relative x of sources on phi_s
    targets_x: np.ndarray  # sorted relative x of targets on phi_t
    region: tuple[int, int, int, int] | None  # (psi_min, psi_max, phi_min, phi_max), relative


@dataclass
class SweepResult:
    geom: SweepGeometry
    n_lanes: int
    target_values: np.ndarray  # (R, nT) raw INCLUDE_BOTH optima, -inf if unreachable
    source_weights: np.ndarray  # (R, nS)
    target_weights: np.ndarray  # (R, nT)
    lo: np.ndarray | None = None  # per-diagonal storage offset (when preds or values kept)
    preds: list[np.ndarray | None] | None = None  # packed bits per diagonal, True = from left
    values: list[np.ndarray] | None = None  # per-diagonal raw values (small tables only)
    dead_at: int | None = None  # first empty interior diagonal, if the sweep died


def _diag_ranges(geom: SweepGeometry) -> tuple[np.ndarray, np.ndarray]:
    """Contiguous storage range [lo, hi] of relative x per diagonal."""
    D = geom.phi_t - geom.phi_s
    k = np.arange(D + 1, dtype=np.int64)
    d = geom.phi_s + k
    sx_min = int(geom.sources_x[0])
    sx_max = int(geom.sources_x[-1])
    tx_min = int(geom.targets_x[0])
    tx_max = int(geom.targets_x[-1])

    lo = np.maximum(sx_min, d - geom.h_ext)
    lo = np.maximum(lo, tx_min - (D - k))
    lo = np.maximum(lo, 0)
    hi = np.minimum(sx_max + k, d)
    hi = np.minimum(hi, tx_max)
    hi = np.minimum(hi, geom.w_ext)

    if geom.region is not None and D >= 2:
        psi_min, psi_max, phi_min, phi_max = geom.region
        interior = (k >= 1) & (k <= D - 1)
        m_lo = (d + psi_min + 1) >> 1  # ceil((d + psi_min) / 2)
        m_hi = (d + psi_max) >> 1
        bad = (d < phi_min) | (d > phi_max)
        m_lo = np.where(bad, np.int64(1), m_lo)
        m_hi = np.where(bad, np.int64(0), m_hi)  # empty range on diagonals outside phi bounds
        lo = np.where(interior, np.maximum(lo, m_lo), lo)
        hi = np.where(interior, np.minimum(hi, m_hi), hi)

    # first diagonal only stores the source hull, last one also covers the targets
    lo[0], hi[0] = sx_min, sx_max
    if D >= 1:
        lo[D] = min(lo[D], tx_min)
        hi[D] = max(hi[D], tx_max)
    return lo, hi


def run_sweep(
    seeds: np.ndarray,
    x0: np.ndarray,
    y0: np.ndarray,
    geom: SweepGeometry,
    keep_preds: bool = False,
    keep_values: bool = False,
) -> SweepResult:
    """Run the batched DP over all lanes. seeds uint64, x0/y0 int64, all shape (R,)."""
    R = len(seeds)
    D = geom.phi_t - geom.phi_s
    seeds_col = seeds.reshape(R, 1)
    uniform = bool(np.all(x0 == x0[0]) and np.all(y0 == y0[0]))
    ax, ay = int(x0[0]), int(y0[0])
    x0c = x0.reshape(R, 1)
    y0c = y0.reshape(R, 1)

    def diag_weights(xs_rel: np.ndarray, ys_rel: np.ndarray) -> np.ndarray:
        if uniform:
            return batch_weights(seeds_col, xs_rel + ax, ys_rel + ay)
        return batch_weights(seeds_col, xs_rel[None, :] + x0c, ys_rel[None, :] + y0c)

    lo, hi = _diag_ranges(geom)
    src_idx = (geom.sources_x - lo[0]).astype(np.int64)

    sw = diag_weights(geom.sources_x, geom.phi_s - geom.sources_x)
    tw = diag_weights(geom.targets_x, geom.phi_t - geom.targets_x)

    result = SweepResult(
        geom=geom,
        n_lanes=R,
        target_values=np.full((R, len(geom.targets_x)), NEG_INF),
        source_weights=sw,
        target_weights=tw,
    )
    if D == 0:
        # targets share the source diagonal; only cells that are sources are live
        for t_i, tx in enumerate(geom.targets_x):
            hit = np.nonzero(geom.sources_x == tx)[0]
            if hit.size:
                result.target_values[:, t_i] = sw[:, hit[0]]
        if keep_preds or keep_values:
            result.lo = lo
        if keep_values:
            vals0 = np.full((R, int(hi[0] - lo[0] + 1)), NEG_INF)
            vals0[:, src_idx] = sw
            result.values = [vals0]
        if keep_preds:
            result.preds = [None]
        return result
    tgt_idx = (geom.targets_x - lo[D]).astype(np.int64)
    if keep_preds or keep_values:
        result.lo = lo
    if keep_preds:
        result.preds = [None] * (D + 1)
    if keep_values:
        result.values = [np.full((R, 0), NEG_INF)] * (D + 1)

    widths = hi - lo + 1
    if D >= 2 and np.any(widths[1:D] <= 0):
        result.dead_at = int(np.argmax(widths[1:D] <= 0)) + 1
        return result

    max_w = int(widths.max())
    buf_a = np.full((R, max_w + 2), NEG_INF)
    buf_b = np.full((R, max_w + 2), NEG_INF)

    # first diagonal: -inf everywhere except the sources
    w0 = int(widths[0])
    buf_a[:, 1 : w0 + 1] = NEG_INF
    buf_a[:, src_idx + 1] = sw
    buf_a[:, w0 + 1] = NEG_INF
    if keep_values:
        result.values[0] = buf_a[:, 1 : w0 + 1].copy()

    prev, cur_buf = buf_a, buf_b
    pw = w0
    for k in range(1, D + 1):
        w = int(widths[k])
        xs_rel = np.arange(lo[k], hi[k] + 1, dtype=np.int64)
        wk = diag_weights(xs_rel, (geom.phi_s + k) - xs_rel)

        base_l = int(lo[k]) - 1 - int(lo[k - 1]) + 1  # +1 skips the left -inf pad
        base_b = base_l + 1
        if base_l >= 0 and base_b + w <= pw + 2:
            left = prev[:, base_l : base_l + w]
            below = prev[:, base_b : base_b + w]
        else:
            idx = np.clip(np.arange(base_l, base_l + w), 0, pw + 1)
            left = prev[:, idx]
            below = prev[:, np.clip(idx + 1, 0, pw + 1)]

        out = cur_buf[:, 1 : w + 1]
        np.maximum(left, below, out=out)
        out += wk
        cur_buf[:, w + 1] = NEG_INF

        if keep_preds:
            result.preds[k] = np.packbits(left >= below, axis=1)
        if keep_values:
            result.values[k] = out.copy()

        prev, cur_buf = cur_buf, prev
        pw = w

    final = prev[:, 1 : pw + 1]
    result.target_values = final[:, tgt_idx].copy()
    return result


def backtrack_xs(result: SweepResult, target_x: int) -> np.ndarray:
    """Follow stored predecessor bits from one relative target down to the sources.

    Returns the relative x coordinate of the path on every diagonal, shape
    (R, D+1): column k is the path's x on diagonal phi_s + k. All lanes
    backtrack together; lanes whose target is unreachable are the caller's
    problem (check target_values first).
    """
    if result.preds is None:
        raise InvalidParams("sweep was run without keep_preds")
    geom = result.geom
    D = geom.phi_t - geom.phi_s
    R = result.n_lanes
    lo = result.lo
    xs = np.empty((R, D + 1), dtype=np.int64)
    cur = np.full(R, target_x, dtype=np.int64)
    xs[:, D] = cur
    rows = np.arange(R)
    for k in range(D, 0, -1):
        j = cur - int(lo[k])
        packed = result.preds[k]
        byte = packed[rows, j >> 3]
        bit = (byte >> (7 - (j & 7)).astype(np.uint8)) & np.uint8(1)
        cur = cur - bit  # bit set: came from the left cell (x-1, y)
        xs[:, k - 1] = cur
    return xs


# ---------------------------------------------------------------------------
# geometry construction


def _relativize(
    sources: list[LatticePoint],
    targets: list[LatticePoint],
    region: StripSpec | None,
) -> tuple[SweepGeometry, int, int]:
    """Build a SweepGeometry anchored at the window's lower-left corner.

    Returns (geom, anchor_x, anchor_y); absolute = relative + anchor.
    """
    phis_s = {p.x + p.y for p in sources}
    phis_t = {p.x + p.y for p in targets}
    if len(phis_s) != 1:
        raise InvalidParams("all sources must lie on one anti-diagonal")
    if len(phis_t) != 1:
        raise InvalidParams("all targets must lie on one anti-diagonal")
    phi_s_abs, phi_t_abs = phis_s.pop(), phis_t.pop()
    if phi_t_abs < phi_s_abs:
        raise InvalidParams("targets precede sources")

    ax = min(p.x for p in sources + targets)
    ay = min(p.y for p in sources + targets)
    w_ext = max(p.x for p in sources + targets) - ax
    h_ext = max(p.y for p in sources + targets) - ay

    rel_region = None
    if region is not None:
        rel_region = (
            region.psi_min - (ax - ay),
            region.psi_max - (ax - ay),
            region.phi_min - (ax + ay),
            region.phi_max - (ax + ay),
        )
    geom = SweepGeometry(
        w_ext=w_ext,
        h_ext=h_ext,
        phi_s=phi_s_abs - (ax + ay),
        phi_t=phi_t_abs - (ax + ay),
        sources_x=np.array(sorted({p.x - ax for p in sources}), dtype=np.int64),
        targets_x=np.array(sorted({p.x - ax for p in targets}), dtype=np.int64),
        region=rel_region,
    )
    return geom, ax, ay


def _single_lane(field: FieldSpec, ax: int, ay: int):
    return (
        np.array([field.seed], dtype=np.uint64),
        np.array([ax], dtype=np.int64),
        np.array([ay], dtype=np.int64),
    )


# ---------------------------------------------------------------------------
# tables and public operations


@dataclass
class DpTable:
    """Single-lane DP table with full values and predecessor bits kept.

    Intended for desk-scale windows (oracle comparisons, inspection); the
    Monte Carlo experiments stream batched sweeps instead and never build
    one of these. With a region mask, values are meaningful for cells
    inside the mask and for the built target (endpoints are mask-exempt
    only on the sweep's first and last diagonal).
    """

    field: FieldSpec
    source: LatticePoint
    target: LatticePoint
    region: StripSpec | None
    anchor_x: int
    anchor_y: int
    result: SweepResult = dc_field(repr=False)

    def raw_value(self, p: LatticePoint) -> float:
        """INCLUDE_BOTH optimum at p, -inf if unreachable or outside storage."""
        geom = self.result.geom
        xr = p.x - self.anchor_x
        yr = p.y - self.anchor_y
        k = (xr + yr) - geom.phi_s
        D = geom.phi_t - geom.phi_s
        if not (0 <= k <= D):
            return NEG_INF
        if self.result.dead_at is not None and k >= self.result.dead_at:
            return NEG_INF
        lo_k = int(self.result.lo[k])
        vals = self.result.values[k]
        j = xr - lo_k
        if not (0 <= j < vals.shape[1]):
            return NEG_INF
        return float(vals[0, j])


def build_table(
    field: FieldSpec,
    source: LatticePoint,
    target: LatticePoint,
    region: StripSpec | None = None,
) -> DpTable:
    """Exact optima from source toward target, optionally strip-constrained.

    The mask applies to interior vertices only; source and target are
    always admitted regardless of the region.
    """
    if not leq(source, target):
        raise InvalidParams(f"source {source} is not <= target {target}")
    geom, ax, ay = _relativize([source], [target], region)
    seeds, x0, y0 = _single_lane(field, ax, ay)
    res = run_sweep(seeds, x0, y0, geom, keep_preds=True, keep_values=True)
    table = DpTable(
        field=field,
        source=source,
        target=target,
        region=region,
        anchor_x=ax,
        anchor_y=ay,
        result=res,
    )
    if not np.isfinite(res.target_values[0, 0]):
        raise NoPath(f"no admissible path from {source} to {target}")
    return table


def passage_time(table: DpTable, target: LatticePoint, conv: PassageConvention) -> float:
    raw = table.raw_value(target)
    if raw == NEG_INF:
        raise NoPath(f"{target} unreachable in table")
    if conv is PassageConvention.INCLUDE_BOTH:
        return raw
    w_last = weight(table.field, target)
    if conv is PassageConvention.EXCLUDE_LAST:
        return raw - w_last
    out = raw - w_last
    if target != table.source:
        out -= weight(table.field, table.source)
    return out


def constrained_passage(field: FieldSpec, n: int, delta: float) -> float:
    """Best path 0 -> (n, n) whose interior stays in the strip, EXCLUDE_BOTH."""
    if n < 1:
        raise InvalidParams("n must be >= 1")
    strip = strip_for(n, delta)
    src = LatticePoint(0, 0)
    tgt = LatticePoint(n, n)
    geom, ax, ay = _relativize([src], [tgt], strip)
    seeds, x0, y0 = _single_lane(field, ax, ay)
    res = run_sweep(seeds, x0, y0, geom)
    raw = float(res.target_values[0, 0])
    if not np.isfinite(raw):
        raise NoPath(f"strip for n={n}, delta={delta} admits no path")
    return raw - float(res.source_weights[0, 0]) - float(res.target_weights[0, 0])


def multi_source_sup(
    field: FieldSpec,
    sources: list[LatticePoint],
    targets: list[LatticePoint],
    region: StripSpec | None = None,
    conv: PassageConvention = PassageConvention.INCLUDE_BOTH,
) -> float:
    """sup over all (source, target) pairs of the passage time, by one DP.

    One sweep seeded at every source gives max_u L(u, v) at each target v;
    the sup over v follows. EXCLUDE_BOTH is rejected: the maximizing source
    is not identified, so its weight cannot be subtracted.
    """
    if conv is PassageConvention.EXCLUDE_BOTH:
        raise InvalidParams("sup is ambiguous under EXCLUDE_BOTH; use EXCLUDE_LAST or INCLUDE_BOTH")
    geom, ax, ay = _relativize(sources, targets, region)
    seeds, x0, y0 = _single_lane(field, ax, ay)
    res = run_sweep(seeds, x0, y0, geom)
    vals = res.target_values[0]
    if conv is PassageConvention.EXCLUDE_LAST:
        vals = vals - res.target_weights[0]
    out = float(np.max(vals))
    if not np.isfinite(out):
        raise NoPath("no source-target pair is connected")
    return out


# ---------------------------------------------------------------------------
# block decomposition of the strip


@dataclass
class BlockDecomposition:
    n: int
    delta: float
    A: float
    blocks: list[StripSpec]
    y_values: list[float]
    t_n_delta: float
    sum_y: float


def block_cuts(n: int, delta: float, A: float) -> list[int]:
    """phi cut points splitting [0, 2n] into floor(delta^-1.5 / A) blocks.

    Nominal block height is 2*A*delta^1.5*n; cuts are rounded to integers
    and the last block absorbs any remainder so the blocks tile [0, 2n].
    """
    K = math.floor(delta ** -1.5 / A)
    if K < 1:
        raise InvalidParams("block count is zero; decrease A or delta")
    cuts = [min(round(2.0 * i * A * delta ** 1.5 * n), 2 * n) for i in range(K + 1)]
    cuts[0], cuts[K] = 0, 2 * n
    for a, b in zip(cuts, cuts[1:]):
        if b <= a:
            raise InvalidParams("degenerate block (zero phi height); parameters too coarse")
    return cuts


def _diag_points(phi: int, psi_lo: int, psi_hi: int) -> list[LatticePoint]:
    """Lattice points on the diagonal with psi in [psi_lo, psi_hi]."""
    x_lo = (phi + psi_lo + 1) >> 1
    x_hi = (phi + psi_hi) >> 1
    return [LatticePoint(x, phi - x) for x in range(x_lo, x_hi + 1)]


def block_decomposition(field: FieldSpec, n: int, delta: float, A: float) -> BlockDecomposition:
    """Split the strip into phi blocks and compute each block's two-sided sup Y_i.

    Y_i is the sup over sources on the block's lower side and targets on its
    upper side of the EXCLUDE_LAST passage time constrained to the block.
    The sum of the Y_i dominates the full constrained passage time: any
    strip path decomposes at the cut diagonals into one admissible segment
    per block, and the segment sums telescope to the path's EXCLUDE_LAST
    value, which exceeds its EXCLUDE_BOTH value.
    """
    cuts = block_cuts(n, delta, A)
    w = effective_halfwidth(n, delta)
    blocks: list[StripSpec] = []
    y_values: list[float] = []
    for lo_phi, hi_phi in zip(cuts, cuts[1:]):
        block = StripSpec(psi_min=-w, psi_max=w, phi_min=lo_phi, phi_max=hi_phi)
        sources = _diag_points(lo_phi, -w, w)
        targets = _diag_points(hi_phi, -w, w)
        if not sources or not targets:
            raise NoPath(f"block [{lo_phi}, {hi_phi}] has an empty side (width {w})")
        y = multi_source_sup(field, sources, targets, block, PassageConvention.EXCLUDE_LAST)
        blocks.append(block)
        y_values.append(y)
    t_n_delta = constrained_passage(field, n, delta)
    return BlockDecomposition(
        n=n,
        delta=delta,
        A=A,
        blocks=blocks,
        y_values=y_values,
        t_n_delta=t_n_delta,
        sum_y=float(sum(y_values)),
    )

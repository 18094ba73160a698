"""Brute-force path enumeration: the ground truth the DP is tested against.

Exhaustive depth-first search over all up-right paths with running sums.
No memoization on purpose: memoizing would re-implement the DP under test.
The search tries the up step before the right step, so the first optimum
found is the leftmost optimal path, matching the DP's tie rule; on exact
value ties the first-found path is kept.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

from .errors import BudgetExceeded, NoPath
from .geodesic import Geodesic
from .lattice import LatticePoint, StripSpec, leq
from .passage import PassageConvention
from .randfield import FieldSpec, weight

WeightFn = Callable[[LatticePoint], float]


@dataclass(frozen=True)
class PathBudget:
    max_paths: int = 100_000


def path_count(u: LatticePoint, v: LatticePoint) -> int:
    if not leq(u, v):
        return 0
    return math.comb((v.x - u.x) + (v.y - u.y), v.x - u.x)


def _check_budget(u: LatticePoint, v: LatticePoint, budget: PathBudget) -> None:
    if not leq(u, v):
        raise NoPath(f"{u} is not <= {v}")
    if path_count(u, v) > budget.max_paths:
        raise BudgetExceeded(f"{path_count(u, v)} paths exceed budget {budget.max_paths}")


def _walk_paths(
    u: LatticePoint,
    v: LatticePoint,
    wfn: WeightFn,
    region: StripSpec | None,
):
    """Yield (include_both_sum, path_tuple) for every admissible path u -> v.

    Paths are emitted in leftmost-first order (up step explored before
    right). The region constrains interior vertices only.
    """

    def admissible(p: LatticePoint) -> bool:
        if p == v:
            return True
        return region is None or region.contains(p)

    # frame: (point, running include-both sum); moves tried in order U then R
    path = [u]
    sums = [wfn(u)]
    move_idx = [0]
    while path:
        p = path[-1]
        if p == v:
            yield sums[-1], tuple(path)
            path.pop(), sums.pop(), move_idx.pop()
            continue
        m = move_idx[-1]
        if m >= 2:
            path.pop(), sums.pop(), move_idx.pop()
            continue
        move_idx[-1] = m + 1
        q = LatticePoint(p.x, p.y + 1) if m == 0 else LatticePoint(p.x + 1, p.y)
        if not leq(q, v) or not admissible(q):
            continue
        path.append(q)
        sums.append(sums[-1] + wfn(q))
        move_idx.append(0)


def brute_max(
    field: FieldSpec,
    u: LatticePoint,
    v: LatticePoint,
    conv: PassageConvention = PassageConvention.INCLUDE_BOTH,
    region: StripSpec | None = None,
    budget: PathBudget = PathBudget(),
    weight_fn: WeightFn | None = None,
) -> tuple[float, Geodesic]:
    """Exact optimum and argmax path by exhaustion.

    weight_fn overrides the field lookup; it exists for tie tests only.
    """
    _check_budget(u, v, budget)
    wfn = weight_fn if weight_fn is not None else (lambda p: weight(field, p))

    best_sum: float | None = None
    best_path: tuple[LatticePoint, ...] | None = None
    for s, p in _walk_paths(u, v, wfn, region):
        if best_sum is None or s > best_sum:
            best_sum, best_path = s, p
    if best_path is None:
        raise NoPath(f"no admissible path from {u} to {v}")

    value = best_sum
    if conv is not PassageConvention.INCLUDE_BOTH:
        value -= wfn(v)
        if conv is PassageConvention.EXCLUDE_BOTH and u != v:
            value -= wfn(u)
    return value, Geodesic(vertices=best_path)


def brute_argmax_unique(
    field: FieldSpec,
    u: LatticePoint,
    v: LatticePoint,
    budget: PathBudget = PathBudget(),
    weight_fn: WeightFn | None = None,
) -> bool:
    """True iff exactly one path attains the maximum (exact float comparison)."""
    _check_budget(u, v, budget)
    wfn = weight_fn if weight_fn is not None else (lambda p: weight(field, p))

    best: float | None = None
    ties = 0
    for s, _ in _walk_paths(u, v, wfn, None):
        if best is None or s > best:
            best, ties = s, 1
        elif s == best:
            ties += 1
    if best is None:
        raise NoPath(f"no path from {u} to {v}")
    return ties == 1

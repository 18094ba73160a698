"""The exhaustive-enumeration reference itself: path counting, budgets,
conventions on degenerate geometry, and tie behavior under forced ties."""

import math

import pytest

from lpplab.errors import BudgetExceeded, NoPath
from lpplab.lattice import LatticePoint, StripSpec
from lpplab.oracle import PathBudget, brute_argmax_unique, brute_max, path_count
from lpplab.passage import PassageConvention
from lpplab.randfield import FieldSpec, weight


def test_path_count_binomials():
    assert path_count(LatticePoint(0, 0), LatticePoint(2, 2)) == 6  # C(4,2)
    assert path_count(LatticePoint(0, 0), LatticePoint(3, 2)) == 10  # C(5,2)
    assert path_count(LatticePoint(0, 0), LatticePoint(0, 0)) == 1
    assert path_count(LatticePoint(-3, 4), LatticePoint(-3, 9)) == 1  # single column
    assert path_count(LatticePoint(0, 0), LatticePoint(5, 5)) == math.comb(10, 5)


def test_single_point_values():
    field = FieldSpec(seed=99)
    u = LatticePoint(2, 3)
    w = weight(field, u)
    val_inc, g = brute_max(field, u, u, PassageConvention.INCLUDE_BOTH)
    assert val_inc == w
    assert g.vertices == (u,)
    assert brute_max(field, u, u, PassageConvention.EXCLUDE_LAST)[0] == 0.0
    assert brute_max(field, u, u, PassageConvention.EXCLUDE_BOTH)[0] == 0.0


def test_zero_width_strip_has_no_path():
    field = FieldSpec(seed=1)
    region = StripSpec(psi_min=0, psi_max=0, phi_min=0, phi_max=6)
    with pytest.raises(NoPath):
        brute_max(field, LatticePoint(0, 0), LatticePoint(3, 3), region=region)


def test_zero_width_strip_adjacent_is_fine():
    # no interior vertex at all, so the region never applies
    field = FieldSpec(seed=1)
    region = StripSpec(psi_min=0, psi_max=0, phi_min=0, phi_max=2)
    val, g = brute_max(field, LatticePoint(0, 0), LatticePoint(1, 0), region=region)
    assert len(g.vertices) == 2


def test_budget_enforced():
    field = FieldSpec(seed=1)
    with pytest.raises(BudgetExceeded):
        brute_max(field, LatticePoint(0, 0), LatticePoint(12, 12))
    # a raised budget admits the same geometry
    brute_max(
        field,
        LatticePoint(0, 0),
        LatticePoint(7, 7),
        budget=PathBudget(max_paths=4_000_000),
    )


def test_forced_tie_detected():
    flat = lambda p: 1.0
    assert not brute_argmax_unique(FieldSpec(seed=0), LatticePoint(0, 0), LatticePoint(2, 1), weight_fn=flat)


def test_random_fields_give_unique_argmax():
    for s in range(30):
        assert brute_argmax_unique(FieldSpec(seed=s), LatticePoint(0, 0), LatticePoint(3, 3))


def test_tie_break_returns_leftmost():
    # under constant weights every path ties; enumeration order must hand
    # back the path that always steps up before right
    flat = lambda p: 1.0
    _, g = brute_max(FieldSpec(seed=0), LatticePoint(0, 0), LatticePoint(2, 1), weight_fn=flat)
    assert g.vertices == (
        LatticePoint(0, 0),
        LatticePoint(0, 1),
        LatticePoint(1, 1),
        LatticePoint(2, 1),
    )


def test_region_applies_to_interior_only():
    # endpoints may violate the strip; interior may not
    field = FieldSpec(seed=5)
    u, v = LatticePoint(0, 0), LatticePoint(2, 2)
    region = StripSpec(psi_min=-1, psi_max=1, phi_min=1, phi_max=3)  # excludes both endpoints
    val, g = brute_max(field, u, v, region=region)
    assert g.vertices[0] == u and g.vertices[-1] == v
    for p in g.vertices[1:-1]:
        assert region.contains(p)

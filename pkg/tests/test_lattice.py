"""Coordinate algebra: rotated coordinates, strips, the effective halfwidth."""

from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from lpplab.lattice import (
    DiagCoord,
    LatticePoint,
    StripSpec,
    effective_halfwidth,
    from_diag,
    leq,
    strip_for,
    to_diag,
)

coords = st.integers(min_value=-10**6, max_value=10**6)


@given(coords, coords)
def test_diag_round_trip(x, y):
    p = LatticePoint(x, y)
    d = to_diag(p)
    assert d.phi == x + y
    assert d.psi == x - y
    assert from_diag(d) == p


@given(coords, coords)
def test_diag_parity(x, y):
    d = to_diag(LatticePoint(x, y))
    assert (d.phi + d.psi) % 2 == 0


def test_diagcoord_rejects_mixed_parity():
    with pytest.raises(ValueError):
        DiagCoord(phi=1, psi=0)
    DiagCoord(phi=1, psi=1)
    DiagCoord(phi=-3, psi=5)


def test_leq_is_coordinatewise():
    assert leq(LatticePoint(0, 0), LatticePoint(0, 0))
    assert leq(LatticePoint(1, 2), LatticePoint(3, 2))
    assert not leq(LatticePoint(1, 2), LatticePoint(0, 5))
    assert not leq(LatticePoint(2, 2), LatticePoint(3, 1))


def test_point_arithmetic():
    assert LatticePoint(1, 2) + LatticePoint(3, -1) == LatticePoint(4, 1)
    assert -LatticePoint(5, -7) == LatticePoint(-5, 7)


@pytest.mark.parametrize(
    "n,delta,expected",
    [
        (1000, 0.25, 25),  # 0.25 * 100
        (250, 0.2, 7),  # 0.2 * 39.685 = 7.937
        (500, 0.2, 12),  # 0.2 * 62.996 = 12.599
        (1000, 0.2, 20),  # 0.2 * 100 = 20 exactly... up to fp
        (1, 0.3, 0),
        (8, 1.0, 4),
    ],
)
def test_effective_halfwidth(n, delta, expected):
    assert effective_halfwidth(n, delta) == expected


@given(st.integers(min_value=1, max_value=10**6), st.floats(min_value=1e-3, max_value=10))
def test_effective_halfwidth_is_floor(n, delta):
    # exact rational check: w = max{k >= 0 : k^3 <= delta^3 * n^2}, where
    # delta^3 is the cube of the binary float actually passed in
    w = effective_halfwidth(n, delta)
    assert w >= 0
    target = Fraction(delta) ** 3 * n * n
    assert Fraction(w) ** 3 <= target
    assert Fraction(w + 1) ** 3 > target


def test_strip_for_contains_endpoints_and_axis():
    for n, delta in [(10, 0.5), (100, 0.2), (7, 1.3)]:
        s = strip_for(n, delta)
        assert s.contains(LatticePoint(0, 0))
        assert s.contains(LatticePoint(n, n))
        for k in range(n + 1):
            assert s.contains(LatticePoint(k, k))


def test_strip_contains_respects_all_bounds():
    s = StripSpec(psi_min=-2, psi_max=2, phi_min=0, phi_max=10)
    assert s.contains(LatticePoint(1, 0))  # phi 1, psi 1
    assert not s.contains(LatticePoint(3, 0))  # psi 3 too wide
    assert not s.contains(LatticePoint(-1, 0))  # phi -1 too early
    assert not s.contains(LatticePoint(6, 5))  # phi 11 too late


def test_strip_nesting():
    inner = StripSpec(psi_min=-1, psi_max=1, phi_min=2, phi_max=8)
    outer = StripSpec(psi_min=-3, psi_max=3, phi_min=0, phi_max=10)
    assert outer.contains_strip(inner)
    assert not inner.contains_strip(outer)


def test_strip_for_monotone_in_delta():
    # a wider delta never shrinks the strip
    for d1, d2 in [(0.2, 0.5), (0.5, 1.0), (0.1, 2.0)]:
        assert strip_for(100, d2).contains_strip(strip_for(100, d1))


def test_strip_for_rejects_bad_params():
    with pytest.raises(Exception):
        strip_for(0, 0.5)
    with pytest.raises(Exception):
        strip_for(10, 0.0)
    with pytest.raises(Exception):
        strip_for(10, -1.0)

"""Lattice points, diagonal coordinates and strip geometry.

Everything here is exact integer arithmetic. The diagonal coordinates are
phi = x + y (time, indexes anti-diagonals) and psi = x - y (space). An
up-right step changes phi by +1 and psi by +-1, so phi and psi always have
equal parity.
"""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class LatticePoint:
    x: int
    y: int

    def __add__(self, other: "LatticePoint") -> "LatticePoint":
        return LatticePoint(self.x + other.x, self.y + other.y)

    def __neg__(self) -> "LatticePoint":
        return LatticePoint(-self.x, -self.y)


@dataclass(frozen=True)
class DiagCoord:
    phi: int
    psi: int

    def __post_init__(self) -> None:
        if (self.phi + self.psi) % 2 != 0:
            raise ValueError(f"phi={self.phi} and psi={self.psi} differ in parity")


def to_diag(p: LatticePoint) -> DiagCoord:
    return DiagCoord(phi=p.x + p.y, psi=p.x - p.y)


def from_diag(d: DiagCoord) -> LatticePoint:
    # parity already checked by DiagCoord
    return LatticePoint((d.phi + d.psi) // 2, (d.phi - d.psi) // 2)


def leq(u: LatticePoint, v: LatticePoint) -> bool:
    """Coordinatewise partial order; exactly the reachability order for up-right paths."""
    return u.x <= v.x and u.y <= v.y


@dataclass(frozen=True)
class StripSpec:
    """Axis-aligned region in (phi, psi): psi_min <= psi <= psi_max, phi_min <= phi <= phi_max."""

    psi_min: int
    psi_max: int
    phi_min: int
    phi_max: int

    def __post_init__(self) -> None:
        if self.psi_min > self.psi_max:
            raise ValueError("psi_min > psi_max")
        if self.phi_min > self.phi_max:
            raise ValueError("phi_min > phi_max")

    def contains(self, p: LatticePoint) -> bool:
        d = to_diag(p)
        return (
            self.psi_min <= d.psi <= self.psi_max
            and self.phi_min <= d.phi <= self.phi_max
        )

    def contains_strip(self, other: "StripSpec") -> bool:
        return (
            self.psi_min <= other.psi_min
            and other.psi_max <= self.psi_max
            and self.phi_min <= other.phi_min
            and other.phi_max <= self.phi_max
        )


def cube_threshold(n: int, scale: float) -> float:
    """(scale * n^(2/3)) cubed, i.e. scale^3 * n^2, computed without the
    fractional power. For an integer k >= 0,

        k <= scale * n^(2/3)   iff   k^3 <= cube_threshold(n, scale),

    so integer-vs-threshold comparisons go through cubes. This keeps exact
    boundary cases exact: at scale 0.25, n = 1000 the product 0.25^3 * n^2
    is the integer 15625 with no rounding, whereas n**(2./3.) alone comes
    out just below 100 and would misclassify the boundary.
    """
    return (scale * scale * scale) * (n * n)


def effective_halfwidth(n: int, delta: float) -> int:
    """floor(delta * n^(2/3)), the integer psi halfwidth actually used.

    Evaluated through cube_threshold so exactly-integer widths stay exact.
    Callers log this so runs record the width that was really applied, not
    the nominal real value.
    """
    target = cube_threshold(n, delta)
    k = int(target ** (1.0 / 3.0)) + 2
    while k > 0 and k * k * k > target:
        k -= 1
    return k


def strip_for(n: int, delta: float) -> StripSpec:
    """The strip |psi| <= floor(delta*n^(2/3)), 0 <= phi <= 2n."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if delta <= 0:
        raise ValueError("delta must be > 0")
    w = effective_halfwidth(n, delta)
    return StripSpec(psi_min=-w, psi_max=w, phi_min=0, phi_max=2 * n)

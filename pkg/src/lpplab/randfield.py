"""Deterministic random-access Exp(1) weight field on Z^2.

The weight at (x, y) is a pure function of (seed, x, y), so any window, any
translate and any replica can be evaluated independently with no stream
state. The mixing recipe is a wire-level contract, bit-exact across
implementations:

    ux, uy   = two's-complement 64-bit views of x, y
    k        = seed XOR (ux * 0x9E3779B97F4A7C15) XOR (uy * 0xC2B2AE3D27D4EB4F)
               (wrapping multiplication)
    z        = splitmix64_finalizer(k)
    u        = ((z >> 11) + 1) * 2^-53          in (0, 1]
    weight   = -ln(u)

All 2^64 seeds must agree to the last bit of z and to IEEE-754 double
precision of the weight. ln is always computed by np.log (value-pure for a
given double regardless of array shape; math.log rounds differently).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .lattice import LatticePoint

_MASK64 = (1 << 64) - 1
_MIX_X = 0x9E3779B97F4A7C15
_MIX_Y = 0xC2B2AE3D27D4EB4F
_FIN_1 = 0xBF58476D1CE4E5B9
_FIN_2 = 0x94D049BB133111EB

_U_MIX_X = np.uint64(_MIX_X)
_U_MIX_Y = np.uint64(_MIX_Y)
_U_FIN_1 = np.uint64(_FIN_1)
_U_FIN_2 = np.uint64(_FIN_2)
_U_30 = np.uint64(30)
_U_27 = np.uint64(27)
_U_31 = np.uint64(31)
_U_11 = np.uint64(11)
_U_1 = np.uint64(1)
_TWO_NEG_53 = 2.0 ** -53


@dataclass(frozen=True)
class FieldSpec:
    seed: int

    def __post_init__(self) -> None:
        if not (0 <= self.seed <= _MASK64):
            raise ValueError("seed must fit in 64 unsigned bits")


def _finalize(z: np.ndarray) -> np.ndarray:
    z = z ^ (z >> _U_30)
    z = z * _U_FIN_1
    z = z ^ (z >> _U_27)
    z = z * _U_FIN_2
    z = z ^ (z >> _U_31)
    return z


def batch_weights(seeds: np.ndarray, xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
    """Weights at absolute coordinates, broadcasting (seeds, xs, ys).

    seeds must be uint64; xs, ys any signed integer dtype (viewed as
    two's-complement 64-bit). Typical engine call: seeds (R, 1) against
    xs, ys (W,) giving an (R, W) block.
    """
    ux = xs.astype(np.int64).view(np.uint64)
    uy = ys.astype(np.int64).view(np.uint64)
    with np.errstate(over="ignore"):
        k = seeds ^ (ux * _U_MIX_X) ^ (uy * _U_MIX_Y)
        z = _finalize(k)
    u = ((z >> _U_11) + _U_1).astype(np.float64) * _TWO_NEG_53
    return -np.log(u)


def weight(spec: FieldSpec, p: LatticePoint) -> float:
    """Scalar weight; same code path as batch_weights so values agree bit for bit."""
    out = batch_weights(
        np.array([spec.seed], dtype=np.uint64),
        np.array([p.x], dtype=np.int64),
        np.array([p.y], dtype=np.int64),
    )
    return float(out[0])


def replica_seed(base_seed: int, replica_index: int) -> int:
    """Derive the seed for one replica: finalizer(base + index * golden), wrapping."""
    k = (base_seed + (replica_index * _MIX_X & _MASK64)) & _MASK64
    z = _finalize(np.array([k], dtype=np.uint64))
    return int(z[0])

"""Weighted point sets on the unit cube.

Four constructions are provided: the plain Frolov set, its periodized
variant with window weights, the two-dimensional Fibonacci set and a seeded
uniform random baseline.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import ArgumentError, ConstructionError
from .kernels import window_weight
from .lattice import AdmissibleLattice, build_frolov_lattice, enumerate_dual_points


def frac(x) -> np.ndarray:
    """Coordinatewise fractional part, guaranteed to land in ``[0, 1)``."""
    x = np.asarray(x, dtype=float)
    f = x - np.floor(x)
    # x = -tiny rounds to exactly 1.0
    return np.where(f >= 1.0, 0.0, f)


@dataclass(frozen=True)
class WeightedPointSet:
    """Nodes in ``[0, 1)^d`` with real weights.

    ``pre_wrap_points`` holds the unwrapped nodes of a periodized Frolov set.
    """

    points: np.ndarray
    weights: np.ndarray
    meta: dict = field(default_factory=dict, compare=False)
    pre_wrap_points: Optional[np.ndarray] = field(default=None, compare=False)

    def __post_init__(self):
        pts = np.array(self.points, dtype=float)
        if pts.ndim == 1:
            pts = pts[:, None]
        w = np.array(self.weights, dtype=float).reshape(-1)
        if pts.ndim != 2 or len(pts) == 0:
            raise ArgumentError("a point set needs at least one point")
        if len(w) != len(pts):
            raise ArgumentError(f"{len(pts)} points but {len(w)} weights")
        if np.any(pts < 0) or np.any(pts >= 1):
            raise ArgumentError("all coordinates must lie in [0, 1)")
        if not np.all(np.isfinite(w)):
            raise ArgumentError("weights must be finite")
        pts.setflags(write=False)
        w.setflags(write=False)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "weights", w)
        if self.pre_wrap_points is not None:
            eta = np.array(self.pre_wrap_points, dtype=float).reshape(pts.shape)
            eta.setflags(write=False)
            object.__setattr__(self, "pre_wrap_points", eta)
        object.__setattr__(self, "meta", dict(self.meta))

    @property
    def m(self) -> int:
        return len(self.points)

    @property
    def d(self) -> int:
        return self.points.shape[1]

    @property
    def weight_mass(self) -> float:
        """``sum |lambda_mu|``."""
        return math.fsum(np.abs(self.weights))

    @property
    def weight_sum(self) -> float:
        return math.fsum(self.weights)

    def with_weights(self, weights, mode: str = "custom") -> "WeightedPointSet":
        meta = dict(self.meta, weight_mode=mode)
        return WeightedPointSet(self.points, weights, meta, self.pre_wrap_points)

    def equal_weights(self) -> "WeightedPointSet":
        return self.with_weights(np.full(self.m, 1.0 / self.m), "equal")

    def merged(self) -> "WeightedPointSet":
        """Merge coincident nodes by summing their weights."""
        uniq, inv = np.unique(self.points, axis=0, return_inverse=True)
        w = np.zeros(len(uniq))
        np.add.at(w, inv.reshape(-1), self.weights)
        return WeightedPointSet(uniq, w, dict(self.meta, merged=True))


def _lattice(d, a, lattice):
    if lattice is not None:
        return lattice
    return build_frolov_lattice(d, a)


def frolov_pointset(d: int, a: float, lattice: Optional[AdmissibleLattice] = None) -> WeightedPointSet:
    """Frolov nodes in ``[0, 1)^d`` with weight ``(a^d |det A|)^{-1}`` each.

    A prebuilt ``lattice`` (e.g. the one-dimensional integer lattice) may be
    passed instead of ``d, a``.
    """
    lat = _lattice(d, a, lattice)
    ms, pts = enumerate_dual_points(lat, np.zeros(lat.d), np.ones(lat.d))
    if len(pts) == 0:
        raise ConstructionError(f"no Frolov nodes in the unit cube for a={lat.a}")
    w0 = 1.0 / (lat.a**lat.d * abs(lat.det_A))
    meta = {"kind": "frolov", "d": lat.d, "a": lat.a, "N": len(pts), "weight_mode": "native"}
    return WeightedPointSet(frac(pts), np.full(len(pts), w0), meta)


def periodized_frolov_pointset(d: int, a: float, lattice: Optional[AdmissibleLattice] = None) -> WeightedPointSet:
    """Frolov nodes of ``[-1/2, 3/2)^d`` wrapped into the cube.

    Node ``eta`` becomes ``frac(eta)`` with weight
    ``(a^d |det A|)^{-1} * prod_j w(eta_j)``.  Coincident wrapped nodes are
    kept separately.
    """
    lat = _lattice(d, a, lattice)
    ms, eta = enumerate_dual_points(lat, np.full(lat.d, -0.5), np.full(lat.d, 1.5))
    if len(eta) == 0:
        raise ConstructionError(f"no Frolov nodes in [-1/2, 3/2)^d for a={lat.a}")
    w0 = 1.0 / (lat.a**lat.d * abs(lat.det_A))
    lam = w0 * window_weight(eta)
    meta = {"kind": "frolov-periodized", "d": lat.d, "a": lat.a, "N": len(eta), "weight_mode": "native"}
    return WeightedPointSet(frac(eta), lam, meta, pre_wrap_points=eta)


def fibonacci_numbers(n: int) -> tuple:
    """``(b_{n-1}, b_n)`` with ``b_1 = b_2 = 1``."""
    if n < 1:
        raise ArgumentError("Fibonacci index must be positive")
    prev, cur = 0, 1
    for _ in range(n - 1):
        prev, cur = cur, prev + cur
    return prev, cur


def fibonacci_pointset(n: int) -> WeightedPointSet:
    """``{(mu / b_n, {mu b_{n-1} / b_n})}`` for ``mu = 0..b_n-1``, equal weights."""
    if n < 3:
        raise ArgumentError("Fibonacci index must be at least 3")
    prev, bn = fibonacci_numbers(n)
    mu = np.arange(bn)
    pts = np.stack([mu / bn, (mu * prev % bn) / bn], axis=1)
    meta = {"kind": "fibonacci", "d": 2, "n": n, "b_n": bn, "b_n_minus_1": prev, "weight_mode": "native"}
    return WeightedPointSet(pts, np.full(bn, 1.0 / bn), meta)


_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)


def splitmix64(seed: int, count: int) -> np.ndarray:
    """``count`` outputs of the SplitMix64 generator started at ``seed``.

    State update ``s += 0x9E3779B97F4A7C15`` (mod 2^64); output
    ``z = s; z = (z ^ z>>30) * 0xBF58476D1CE4E5B9; z = (z ^ z>>27) *
    0x94D049BB133111EB; z ^ z>>31``.
    """
    with np.errstate(over="ignore"):
        s = np.uint64(seed % 2**64) + _GOLDEN * np.arange(1, count + 1, dtype=np.uint64)
        z = (s ^ (s >> np.uint64(30))) * _MIX1
        z = (z ^ (z >> np.uint64(27))) * _MIX2
        return z ^ (z >> np.uint64(31))


def uniform01(seed: int, count: int) -> np.ndarray:
    """Doubles in ``[0, 1)`` from the top 53 bits of SplitMix64 outputs."""
    return (splitmix64(seed, count) >> np.uint64(11)).astype(np.float64) * 2.0**-53


def random_pointset(m: int, d: int, seed: int) -> WeightedPointSet:
    """``m`` i.i.d. uniform points (row-major draws), weights ``1/m``."""
    if m < 1 or d < 1:
        raise ArgumentError("need m >= 1 and d >= 1")
    pts = uniform01(seed, m * d).reshape(m, d)
    meta = {"kind": "random", "d": d, "m": m, "seed": int(seed), "generator": "splitmix64", "weight_mode": "native"}
    return WeightedPointSet(pts, np.full(m, 1.0 / m), meta)


def build_pointset(kind: str, **params) -> WeightedPointSet:
    """Dispatch on ``kind`` in {frolov, frolov-periodized, fibonacci, random}."""
    if kind == "frolov":
        return frolov_pointset(int(params["d"]), float(params["a"]))
    if kind == "frolov-periodized":
        return periodized_frolov_pointset(int(params["d"]), float(params["a"]))
    if kind == "fibonacci":
        return fibonacci_pointset(int(params["n"]))
    if kind == "random":
        return random_pointset(int(params["m"]), int(params["d"]), int(params.get("seed", 0)))
    raise ArgumentError(f"unknown point set kind {kind!r}")


__all__ = [
    "WeightedPointSet",
    "frac",
    "frolov_pointset",
    "periodized_frolov_pointset",
    "fibonacci_numbers",
    "fibonacci_pointset",
    "splitmix64",
    "uniform01",
    "random_pointset",
    "build_pointset",
]

"""Experiment orchestration: rate fits, fixed-volume curves, lattice checks."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .discrepancy import (
    SearchSpec,
    b_r_discrepancy,
    fixed_volume_discrepancy,
    global_smooth_discrepancy,
    periodic_fixed_volume_discrepancy,
    star_discrepancy_exact,
)
from .errors import ArgumentError
from .lattice import (
    block_counts_by_order,
    box_point_count,
    build_frolov_lattice,
    norm_form_min,
    smallest_block_order,
)
from .pointsets import WeightedPointSet, uniform01


@dataclass(frozen=True)
class RateFit:
    """Least-squares line through ``(log x, log y)``."""

    log_x: tuple
    log_y: tuple
    slope: float
    intercept: float
    residual_rms: float

    @classmethod
    def fit(cls, x: Sequence[float], y: Sequence[float]) -> "RateFit":
        with np.errstate(divide="ignore", invalid="ignore"):
            lx = np.log(np.asarray(x, dtype=float))
            ly = np.log(np.asarray(y, dtype=float))
        if len(lx) < 3:
            raise ArgumentError("a rate fit needs at least three points")
        if not (np.all(np.isfinite(lx)) and np.all(np.isfinite(ly))):
            raise ArgumentError("rate fit needs positive finite values")
        if np.all(ly == ly[0]):
            # constant family: report the exact flat line
            return cls(tuple(lx), tuple(ly), 0.0, float(ly[0]), 0.0)
        A = np.stack([lx, np.ones_like(lx)], axis=1)
        (slope, intercept), *_ = np.linalg.lstsq(A, ly, rcond=None)
        resid = ly - (slope * lx + intercept)
        return cls(tuple(lx), tuple(ly), float(slope), float(intercept), float(np.sqrt(np.mean(resid**2))))

    def summary(self) -> dict:
        return {"slope": self.slope, "intercept": self.intercept, "residual_rms": self.residual_rms,
                "points": len(self.log_x)}


def measure(ps: WeightedPointSet, mode: str, r: int = 2, volume: Optional[float] = None,
            search: SearchSpec = SearchSpec(), weight_mode: str = "native", v_grid=None) -> float:
    """One discrepancy value of ``ps`` in the given mode."""
    if mode in ("periodic", "periodic_fixed_volume"):
        return periodic_fixed_volume_discrepancy(ps, r, volume, search, weight_mode).value
    if mode == "fixed_volume":
        return fixed_volume_discrepancy(ps, r, volume, search, weight_mode).value
    if mode == "global":
        return global_smooth_discrepancy(ps, r, search, v_grid or [volume], weight_mode).value
    if mode == "star":
        return star_discrepancy_exact(ps)
    if mode == "b_r":
        return b_r_discrepancy(ps, r, search, weight_mode).value
    raise ArgumentError(f"unknown discrepancy mode {mode!r}")


def rate_table(sets: Sequence[WeightedPointSet], mode: str, **kw):
    """Rows ``(m, value)`` per set and a fit of ``log value`` against ``log m``.

    The fit is ``None`` when fewer than three members are given.  A family
    with constant values fits with slope 0; an all-zero family is reported
    with slope 0 without taking logarithms.
    """
    rows = [(ps.m, measure(ps, mode, **kw)) for ps in sets]
    if len(rows) < 3:
        return rows, None
    ms, vals = zip(*rows)
    if all(v == 0 for v in vals):
        n = len(ms)
        return rows, RateFit(tuple(np.log(ms)), (-math.inf,) * n, 0.0, -math.inf, 0.0)
    return rows, RateFit.fit(ms, vals)


def fixed_volume_curve(ps: WeightedPointSet, r: int, v0: float, steps: int, search: SearchSpec = SearchSpec(),
                       base: Optional[float] = None, weight_mode: str = "native"):
    """Periodic discrepancy at ``v = v0 * 2^j`` for ``j = 0..steps-1``.

    Returns rows ``(j, v, value, ratio to previous)`` and the smallest
    constant ``C`` with ``value <= C * base * log(2 v / v0)^(d-1)`` on the
    grid.  ``base`` defaults to ``a^(-r d)`` for Frolov sets and ``m^-r``
    otherwise.
    """
    d = ps.d
    vs = [v0 * 2.0**j for j in range(steps)]
    if any(not 0 < v <= 2.0**-d for v in vs):
        raise ArgumentError(f"volume grid must lie in (0, 2^-d]; got up to {vs[-1]}")
    if base is None:
        a = ps.meta.get("a")
        base = float(a) ** (-r * d) if a else float(ps.m) ** (-r)
    rows, prev = [], None
    for j, v in enumerate(vs):
        val = periodic_fixed_volume_discrepancy(ps, r, v, search, weight_mode).value
        rows.append((j, v, val, None if prev in (None, 0.0) else val / prev))
        prev = val
    C = max(val / (base * math.log(2 * v / v0) ** (d - 1)) for _, v, val, _ in rows)
    return rows, {"C": C, "base": base, "v0": v0}


def random_boxes(d: int, count: int, seed: int, max_volume: float = 100.0, spread: float = 20.0):
    """Boxes in general position with volumes uniform in ``[0, max_volume]``."""
    raw = uniform01(seed, count * (2 * d + 1)).reshape(count, 2 * d + 1)
    vol = raw[:, 0] * max_volume
    # log-aspect ratios in [-1, 1] per side, renormalized to the volume
    logs = 2.0 * raw[:, 1 : d + 1] - 1.0
    logs -= logs.mean(axis=1, keepdims=True)
    sides = np.exp(logs) * vol[:, None] ** (1.0 / d)
    centre = (2.0 * raw[:, d + 1 :] - 1.0) * spread
    return centre - sides / 2, centre + sides / 2


def verify_lattice(d: int, a: float, M: int, boxes: int = 1000, seed: int = 1, max_volume: float = 100.0,
                   block_orders: Optional[Sequence[int]] = None) -> dict:
    """Numerical checks of the admissibility properties of the Frolov lattice.

    * minimum of the norm form over ``0 < ||m||_inf <= M`` (should be >= 1);
    * lattice point counts of random boxes against ``volume + 1``;
    * dyadic block counts: zero below order ``n0``, and the ratios
      ``count / 2^(n - n0)`` above it.
    """
    lat = build_frolov_lattice(d, a)
    nmin, argm = norm_form_min(lat, M)
    lo, hi = random_boxes(d, boxes, seed, max_volume)
    excess = -math.inf
    for l, h in zip(lo, hi):
        excess = max(excess, box_point_count(lat, l, h) - (float(np.prod(h - l)) + 1.0))
    n0 = smallest_block_order(a, d)
    orders = block_orders if block_orders is not None else range(1, n0 + 4)
    below_empty = True
    constants = {}
    for n in orders:
        counts = block_counts_by_order(lat, n)
        top = max(counts.values())
        if n < n0 and top:
            below_empty = False
        if n >= n0:
            constants[n] = top / 2.0 ** (n - n0)
    passed = nmin >= 1 - 1e-6 and excess <= 0 and below_empty
    return {
        "d": d,
        "a": a,
        "M": M,
        "norm_form_min": nmin,
        "norm_form_argmin": list(argm),
        "boxes": boxes,
        "worst_box_excess": excess,
        "n0": n0,
        "blocks_below_n0_empty": below_empty,
        "block_constants": {str(k): v for k, v in constants.items()},
        "pass": bool(passed),
    }

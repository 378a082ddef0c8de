"""Sup-type discrepancies and minimax cubature weights.

The smooth discrepancies are suprema over shifts ``z`` and widths ``u``.
They are estimated by evaluating a tensor grid of shifts for each sampled
width vector (the kernel factorizes, so a grid costs one small matrix
product per coordinate) followed by a coordinate pattern search around the
best candidate.  Every reported value is the maximum over evaluated
candidates and therefore a lower bound for the true supremum.

Width vectors on ``prod u_j = v`` with ``u_j <= c`` are parameterized by
exponents ``e`` on the unit simplex::

    u_j = c * (v / c^d) ** e_j
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import ArgumentError, NonconvergenceError, ResourceError
from .kernels import _hat, periodized_hat_1d
from .pointsets import WeightedPointSet
from .simplex import linprog_simplex

MODES = ("fixed_volume", "periodic_fixed_volume", "global", "star", "b_r")
WEIGHT_MODES = ("native", "equal", "optimized")

#: cap on (m + 2)^d for the exact star discrepancy
MAX_STAR_GRID = 10**8
MAX_LP_NODES = 500
MAX_LP_CONSTRAINTS = 20000


@dataclass(frozen=True)
class SearchSpec:
    """Discretization of a supremum: shift grid, width samples, refinement."""

    z_grid: int = 64
    u_samples: int = 32
    refine_iters: int = 20
    seed: int = 0
    volume: Optional[float] = None

    def __post_init__(self):
        if self.z_grid < 2:
            raise ArgumentError("z_grid must be at least 2")
        if self.u_samples < 1:
            raise ArgumentError("u_samples must be at least 1")
        if self.refine_iters < 0:
            raise ArgumentError("refine_iters must be nonnegative")


@dataclass
class DiscrepancyReport:
    value: float
    mode: str
    weight_mode: str
    r: int
    volume: Optional[float] = None
    argmax_z: Optional[tuple] = None
    argmax_u: Optional[tuple] = None
    argmax_t: Optional[tuple] = None
    search: Optional[dict] = None
    evaluations: int = 0
    weights: Optional[np.ndarray] = field(default=None, repr=False)

    def to_dict(self) -> dict:
        out = {k: v for k, v in asdict(self).items() if k != "weights"}
        return out


class _Best:
    """Running maximum with lexicographic tie-break on the key."""

    def __init__(self):
        self.value = -math.inf
        self.key = None
        self.count = 0

    def offer(self, value, key):
        self.count += 1
        if value > self.value or (value == self.value and key < self.key):
            self.value, self.key = float(value), key


def _key(*vectors):
    return tuple(tuple(float(x) for x in v) for v in vectors)


def simplex_exponents(count: int, d: int, seed: int) -> np.ndarray:
    """``count`` points of the unit simplex in ``R^d``; the first is the centre.

    The rest are sorted-uniform spacings from a seeded generator; a longer
    request extends a shorter one with the same seed.
    """
    out = [np.full(d, 1.0 / d)]
    if count > 1 and d > 1:
        rng = np.random.default_rng(seed)
        cuts = np.sort(rng.random((count - 1, d - 1)), axis=1)
        edges = np.concatenate([np.zeros((count - 1, 1)), cuts, np.ones((count - 1, 1))], axis=1)
        out.extend(np.diff(edges, axis=1))
    return np.array(out)


def widths_from_exponents(e, v: float, cap: float) -> np.ndarray:
    e = np.asarray(e, dtype=float)
    d = e.shape[-1]
    return cap * (v / cap**d) ** e


def _contract(H: Sequence[np.ndarray], lam: np.ndarray) -> np.ndarray:
    """``out[g_1..g_d] = sum_mu lam_mu prod_j H_j[g_j, mu]``."""
    d = len(H)
    if d == 1:
        return H[0] @ lam
    shape = tuple(h.shape[0] for h in H)
    heads = list(np.ndindex(*shape[:-1]))
    out = np.empty((len(heads), shape[-1]))
    step = 4096
    for start in range(0, len(heads), step):
        block = heads[start : start + step]
        P = np.broadcast_to(lam, (len(block), len(lam))).copy()
        for j in range(d - 1):
            P *= H[j][[h[j] for h in block]]
        out[start : start + len(block)] = P @ H[-1].T
    return out.reshape(shape)


def _resolve_weights(ps: WeightedPointSet, weight_mode: str, weights=None):
    if weights is not None:
        return np.asarray(weights, dtype=float)
    if weight_mode == "native":
        return ps.weights
    if weight_mode == "equal":
        return np.full(ps.m, 1.0 / ps.m)
    raise ArgumentError(f"unknown weight mode {weight_mode!r}")


# ---------------------------------------------------------------------------
# smooth (fixed-volume) discrepancies


class _SmoothProblem:
    """Objective ``|pr(u)^r - sum lam h(xi; z, u)|`` for one volume."""

    def __init__(self, ps, r, volume, periodic, lam):
        if not isinstance(r, (int, np.integer)) or r < 1:
            raise ArgumentError(f"smoothness order must be a positive integer, got {r!r}")
        self.ps, self.r, self.periodic, self.lam = ps, int(r), periodic, lam
        self.d = ps.d
        if periodic:
            self.cap = 0.5
            self.pr = float(volume)
            if not 0 < self.pr <= 2.0**-self.d:
                raise ArgumentError(f"periodic volume must lie in (0, 2^-d] = (0, {2.0 ** -self.d}], got {volume}")
        else:
            self.cap = 1.0 / r
            if not 0 < volume <= 1:
                raise ArgumentError(f"box volume must lie in (0, 1], got {volume}")
            self.pr = float(volume) / r**self.d
        self.integral = self.pr**self.r

    def kernel_1d(self, j, centres, u):
        diff = self.ps.points[None, :, j] - np.asarray(centres, dtype=float)[:, None]
        if self.periodic:
            return periodized_hat_1d(self.r, diff, u)
        return _hat(self.r, diff, np.float64(u))

    def centre_range(self, u):
        if self.periodic:
            return np.zeros(self.d), np.ones(self.d)
        half = 0.5 * self.r * np.asarray(u)
        return half, 1.0 - half

    def centre_axis(self, j, u, n):
        if self.periodic:
            return np.arange(n) / n
        lo, hi = self.centre_range(u)
        return np.linspace(lo[j], hi[j], n)

    def widths(self, e):
        return widths_from_exponents(e, self.pr, self.cap)

    def objective(self, z, u) -> float:
        prod = np.array(self.lam, dtype=float)
        for j in range(self.d):
            prod = prod * self.kernel_1d(j, [z[j]], u[j])[0]
        return abs(self.integral - math.fsum(prod))

    def clip_centre(self, z, u):
        if self.periodic:
            return np.mod(z, 1.0)
        lo, hi = self.centre_range(u)
        return np.clip(z, lo, hi)


def _search_smooth(prob: _SmoothProblem, search: SearchSpec, best: _Best):
    E = simplex_exponents(search.u_samples, prob.d, search.seed)
    for e in E:
        u = prob.widths(e)
        axes = [prob.centre_axis(j, u, search.z_grid) for j in range(prob.d)]
        H = [prob.kernel_1d(j, axes[j], u[j]) for j in range(prob.d)]
        err = np.abs(prob.integral - _contract(H, prob.lam))
        top = err.max()
        best.count += err.size - 1
        for idx in zip(*np.nonzero(err == top)):
            z = np.array([axes[j][i] for j, i in enumerate(idx)])
            best.offer(top, _key(z, u) + (tuple(e),))
    _refine_smooth(prob, search, best)


def _refine_smooth(prob, search, best):
    if search.refine_iters == 0 or best.key is None:
        return
    z = np.array(best.key[0])
    e = np.array(best.key[2])
    hz = 1.0 / search.z_grid
    he = 0.5 / max(1, search.u_samples) ** (1.0 / max(1, prob.d - 1))
    d = prob.d

    def evaluate(z, e):
        u = prob.widths(e)
        z = prob.clip_centre(z, u)
        val = prob.objective(z, u)
        best.offer(val, _key(z, u) + (tuple(e),))
        return val, z

    cur, z = evaluate(z, e)
    for _ in range(search.refine_iters):
        moves = []
        for j in range(d):
            for s in (-1.0, 1.0):
                z2 = z.copy()
                z2[j] += s * hz
                moves.append((z2, e))
        for i in range(d):
            for k in range(d):
                if i != k and e[i] > 0:
                    e2 = e.copy()
                    delta = min(he, e2[i])
                    e2[i] -= delta
                    e2[k] += delta
                    moves.append((z, e2))
        trial = [(evaluate(z2, e2), e2) for z2, e2 in moves]
        (val, z2), e2 = max(trial, key=lambda t: t[0][0])
        if val > cur:
            cur, z, e = val, z2, e2
        else:
            hz *= 0.5
            he *= 0.5


def _finish(best, prob, mode, weight_mode, r, volume, search, lam):
    u = np.array(best.key[1])
    return DiscrepancyReport(
        value=best.value,
        mode=mode,
        weight_mode=weight_mode,
        r=r,
        volume=volume,
        argmax_z=best.key[0],
        argmax_u=tuple(float(x) for x in u),
        search=asdict(search),
        evaluations=best.count,
        weights=lam,
    )


def fixed_volume_discrepancy(ps: WeightedPointSet, r: int, V: Optional[float] = None,
                             search: SearchSpec = SearchSpec(), weight_mode: str = "native",
                             weights=None) -> DiscrepancyReport:
    """Non-periodic r-smooth fixed-volume discrepancy (lower estimate).

    Boxes ``prod_j [x0_j - r u_j / 2, x0_j + r u_j / 2)`` of volume ``V``
    lying inside the unit cube, so ``u_j <= 1/r``.
    """
    V = search.volume if V is None else V
    if V is None:
        raise ArgumentError("a box volume is required")
    lam = _resolve_weights(ps, weight_mode, weights)
    prob = _SmoothProblem(ps, r, V, periodic=False, lam=lam)
    best = _Best()
    _search_smooth(prob, search, best)
    return _finish(best, prob, "fixed_volume", weight_mode if weights is None else "custom", r, V, search, lam)


def periodic_fixed_volume_discrepancy(ps: WeightedPointSet, r: int, v: Optional[float] = None,
                                      search: SearchSpec = SearchSpec(), weight_mode: str = "native",
                                      weights=None) -> DiscrepancyReport:
    """Periodic r-smooth discrepancy at ``pr(u) = v`` (lower estimate).

    ``weight_mode="optimized"`` first solves the minimax weight problem on a
    coarse subsample of the candidates, then searches with those weights.
    """
    v = search.volume if v is None else v
    if v is None:
        raise ArgumentError("a volume is required")
    if weights is None and weight_mode == "optimized":
        weights = _optimized_weights(ps, r, v, search)
        label = "optimized"
    else:
        label = weight_mode if weights is None else "custom"
    lam = _resolve_weights(ps, weight_mode if weight_mode != "optimized" else "native", weights)
    prob = _SmoothProblem(ps, r, v, periodic=True, lam=lam)
    best = _Best()
    _search_smooth(prob, search, best)
    return _finish(best, prob, "periodic_fixed_volume", label, r, v, search, lam)


def global_smooth_discrepancy(ps: WeightedPointSet, r: int, search: SearchSpec, v_grid: Sequence[float],
                              weight_mode: str = "native", weights=None) -> DiscrepancyReport:
    """Maximum of the periodic fixed-volume discrepancy over ``v_grid``."""
    if len(v_grid) == 0:
        raise ArgumentError("v_grid must be nonempty")
    best = None
    for v in v_grid:
        rep = periodic_fixed_volume_discrepancy(ps, r, v, search, weight_mode, weights)
        if best is None or rep.value > best.value:
            best = rep
    best.mode = "global"
    return best


def _optimized_weights(ps, r, v, search):
    if ps.m > MAX_LP_NODES:
        raise ResourceError(f"minimax weights limited to {MAX_LP_NODES} nodes, set has {ps.m}")
    d = ps.d
    E = simplex_exponents(search.u_samples, d, search.seed)
    per_u = max(1, MAX_LP_CONSTRAINTS // (2 * len(E)))
    g = max(2, min(search.z_grid, int(per_u ** (1.0 / d))))
    axis = np.arange(g) / g
    sample = []
    for e in E:
        u = widths_from_exponents(e, v, 0.5)
        for idx in np.ndindex(*(g,) * d):
            sample.append((axis[list(idx)], u))
    sample = sample[:MAX_LP_CONSTRAINTS]
    lam, _ = optimize_weights_minimax(ps.points, r, sample, [v**r] * len(sample))
    return lam


# ---------------------------------------------------------------------------
# minimax weights


@dataclass
class MinimaxResult:
    weights: np.ndarray
    value: float
    lp_objective: float
    iterations: int

    def __iter__(self):
        yield self.weights
        yield self.value


def kernel_matrix(positions, r: int, sample, periodic: bool = True) -> np.ndarray:
    """``H[i, mu] = h(positions[mu]; z_i, u_i)`` for the sampled kernels."""
    X = np.atleast_2d(np.asarray(positions, dtype=float))
    if X.shape[0] == 1 and X.shape[1] != len(np.atleast_1d(sample[0][1])):
        X = X.T
    H = np.ones((len(sample), len(X)))
    for i, (z, u) in enumerate(sample):
        z, u = np.atleast_1d(z), np.atleast_1d(u)
        for j in range(X.shape[1]):
            t = X[:, j] - z[j]
            H[i] *= periodized_hat_1d(r, t, u[j]) if periodic else _hat(r, t, np.float64(u[j]))
    return H


def optimize_weights_minimax(positions, r: int, constraint_sample, integrals, mass_bound: Optional[float] = None,
                             periodic: bool = True, max_iter: int = 50000) -> MinimaxResult:
    """Weights minimizing ``max_i |c_i - sum_mu lam_mu H[i, mu]|``.

    Solved as the linear program ``min t`` over ``lam = p - q`` (``p, q >= 0``)
    with two inequalities per constraint, optionally with
    ``sum(p + q) <= mass_bound``.
    """
    X = np.asarray(positions, dtype=float)
    if X.size == 0:
        raise ArgumentError("no node positions given")
    if len(constraint_sample) == 0:
        raise ArgumentError("constraint sample is empty")
    if mass_bound is not None and mass_bound < 0:
        raise ArgumentError("mass bound must be nonnegative")
    H = kernel_matrix(X, r, constraint_sample, periodic)
    n_s, m = H.shape
    if m > MAX_LP_NODES or n_s > MAX_LP_CONSTRAINTS:
        raise ResourceError(f"minimax LP limited to {MAX_LP_NODES} nodes and {MAX_LP_CONSTRAINTS} constraints")
    c = np.asarray(integrals, dtype=float).reshape(-1)
    if c.shape != (n_s,):
        raise ArgumentError("one integral value per constraint is required")
    # t = T0 - s with T0 = max|c| makes lam = 0, s = 0 a feasible vertex, so
    # every right-hand side is nonnegative and no phase I is needed
    T0 = float(np.max(np.abs(c)))
    ones = np.ones((n_s, 1))
    A = np.block([[H, -H, ones], [-H, H, ones]])
    b = np.concatenate([c + T0, T0 - c])
    A = np.vstack([A, np.concatenate([np.zeros(2 * m), [1.0]])])
    b = np.append(b, T0)
    if mass_bound is not None:
        A = np.vstack([A, np.concatenate([np.ones(2 * m), [0.0]])])
        b = np.append(b, mass_bound)
    cost = np.zeros(2 * m + 1)
    cost[-1] = -1.0
    primal = A.shape[0] <= A.shape[1]
    try:
        if primal:
            res = linprog_simplex(cost, A, b, max_iter=max_iter)
            x, lp_value = res.x, T0 + res.objective
        else:
            # more rows than columns: the dual min b.y  s.t. -A^T y <= cost,
            # y >= 0 has the smaller tableau; the primal optimum is recovered
            # from its row multipliers
            res = linprog_simplex(b, -A.T, cost, max_iter=max_iter)
            x, lp_value = np.maximum(-res.marginals, 0.0), T0 - res.objective
    except NonconvergenceError as exc:
        # best-so-far weights: the current primal vertex, or equal weights
        # when only a non-optimal dual vertex is available
        if primal and getattr(exc, "best", None) is not None:
            exc.best = exc.best[:m] - exc.best[m : 2 * m]
        else:
            exc.best = np.full(m, 1.0 / m)
        raise
    lam = x[:m] - x[m : 2 * m]
    value = float(np.max(np.abs(c - H @ lam)))
    return MinimaxResult(lam, value, lp_value, res.iterations)


# ---------------------------------------------------------------------------
# classical star discrepancy and B_r discrepancy


def star_discrepancy_exact(ps, cap: int = MAX_STAR_GRID) -> float:
    """Exact ``sup_b |prod b_j - #{xi in [0, b)} / m|`` (unweighted counts).

    The supremum is attained as a one-sided limit at ``b`` whose
    coordinates come from the points, 0 or 1: from above with closed
    counts ``#{xi <= b}``, from below with open counts ``#{xi < b}``.
    """
    pts = ps.points if isinstance(ps, WeightedPointSet) else np.atleast_2d(np.asarray(ps, dtype=float))
    m, d = pts.shape
    grids, idx = [], []
    for j in range(d):
        g = np.unique(np.concatenate([[0.0, 1.0], pts[:, j]]))
        grids.append(g)
        idx.append(np.searchsorted(g, pts[:, j]))
    shape = tuple(len(g) for g in grids)
    if float(np.prod(shape, dtype=float)) > cap:
        raise ResourceError(f"exact star discrepancy needs a {shape} grid; use b_r_discrepancy with r=1 instead")
    N = np.zeros(shape)
    np.add.at(N, tuple(idx), 1.0)
    closed = N
    for j in range(d):
        closed = np.cumsum(closed, axis=j)
    opened = np.zeros(shape)
    opened[(slice(1, None),) * d] = closed[(slice(None, -1),) * d]
    vol = np.ones(())
    for g in grids:
        vol = np.multiply.outer(vol, g)
    return float(max(np.max(closed / m - vol), np.max(vol - opened / m)))


def b_r_kernel(r: int, t, x):
    """``(t - x)_+^(r-1) / (r-1)!``; at ``r = 1`` the indicator of ``x < t``."""
    diff = np.asarray(t, dtype=float) - np.asarray(x, dtype=float)
    if r == 1:
        return (diff > 0).astype(float)
    return np.clip(diff, 0.0, None) ** (r - 1) / math.factorial(r - 1)


def b_r_discrepancy(ps: WeightedPointSet, r: int, t_search: SearchSpec = SearchSpec(),
                    weight_mode: str = "native", weights=None) -> DiscrepancyReport:
    """``sup_t |sum lam B_r(t, xi) - prod t_j^r / r!|`` over ``t in (0, 1]^d`` (lower estimate)."""
    if not isinstance(r, (int, np.integer)) or r < 1:
        raise ArgumentError("r must be a positive integer")
    lam = _resolve_weights(ps, weight_mode, weights)
    d, n = ps.d, t_search.z_grid
    axis = np.arange(1, n + 1) / n
    H = [b_r_kernel(r, axis[:, None], ps.points[None, :, j]) for j in range(d)]
    target = np.ones(())
    for _ in range(d):
        target = np.multiply.outer(target, axis**r / math.factorial(r))
    err = np.abs(_contract(H, lam) - target)
    best = _Best()
    best.count = err.size - 1
    top = err.max()
    for idx in zip(*np.nonzero(err == top)):
        best.offer(top, _key(axis[list(idx)]))

    def objective(t):
        prod = np.array(lam, dtype=float)
        for j in range(d):
            prod = prod * b_r_kernel(r, t[j], ps.points[:, j])
        return abs(math.fsum(prod) - math.prod(t) ** r / math.factorial(r) ** d)

    t = np.array(best.key[0])
    cur = objective(t)
    h = 1.0 / n
    for _ in range(t_search.refine_iters):
        trial = []
        for j in range(d):
            for s in (-1.0, 1.0):
                t2 = t.copy()
                t2[j] = min(1.0, max(t2[j] + s * h, 1e-15))
                val = objective(t2)
                best.offer(val, _key(t2))
                trial.append((val, tuple(t2)))
        val, t2 = max(trial)
        if val > cur:
            cur, t = val, np.array(t2)
        else:
            h *= 0.5
    return DiscrepancyReport(
        value=best.value,
        mode="b_r",
        weight_mode=weight_mode if weights is None else "custom",
        r=r,
        argmax_t=best.key[0],
        search=asdict(t_search),
        evaluations=best.count,
        weights=lam,
    )


__all__ = [
    "SearchSpec",
    "DiscrepancyReport",
    "MinimaxResult",
    "simplex_exponents",
    "widths_from_exponents",
    "fixed_volume_discrepancy",
    "periodic_fixed_volume_discrepancy",
    "global_smooth_discrepancy",
    "optimize_weights_minimax",
    "kernel_matrix",
    "star_discrepancy_exact",
    "b_r_kernel",
    "b_r_discrepancy",
]

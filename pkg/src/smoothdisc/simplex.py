"""Dense two-phase tableau simplex with Bland's anti-cycling rule.

Solves ``min c.x  s.t.  A_ub x <= b_ub,  x >= 0``.  Intended for the
small minimax-weight programs of this package (a few hundred variables,
a few thousand rows), not as a general LP code.

The entering column is the most negative reduced cost; after
``DEGENERATE_SWITCH`` consecutive pivots without progress the solver uses
Bland's smallest-index rule until the objective moves again, which rules
out cycling.  Degenerate programs are first solved with the right-hand
side relaxed by a tiny deterministic amount; the true right-hand side is
then restored and any slight infeasibility removed by dual simplex pivots,
which keep the reduced costs optimal.  Rows are equilibrated, pivots smaller than a fraction of the largest
candidate in their column are refused, and the tableau is periodically
recomputed from the original data so that round-off cannot accumulate.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ArgumentError, NonconvergenceError, NumericalError

#: pivots per fresh factorization of the basis
REFACTOR_EVERY = 50
#: a pivot must be at least this fraction of the largest entry of its column
PIVOT_REL = 1e-7
PIVOT_ABS = 1e-11
#: reduced costs below ``-UNBOUNDED_COST`` with no usable pivot mean unboundedness
UNBOUNDED_COST = 1e-7
#: consecutive degenerate pivots before Bland's rule takes over
DEGENERATE_SWITCH = 20
#: relative size of the right-hand-side relaxation
PERTURBATION = 1e-7


@dataclass
class LPResult:
    """Optimal point, value and the row multipliers ``d objective / d b_ub``.

    ``marginals`` are nonpositive at a minimum; their negation solves the
    dual program ``max -b.y  s.t.  A^T y >= -c,  y >= 0``.
    """

    x: np.ndarray
    objective: float
    iterations: int
    marginals: np.ndarray = None


class UnboundedError(NumericalError):
    """The objective is unbounded below on the feasible set."""


class InfeasibleError(NumericalError):
    """The constraints admit no nonnegative solution."""


class _Tableau:
    """Equality system ``M y = rhs`` (``y >= 0``) with a basis and its tableau."""

    def __init__(self, M, rhs, basis):
        self.M, self.rhs, self.basis = M, rhs, list(basis)
        self.T = None

    @property
    def nrows(self):
        return self.M.shape[0]

    @property
    def ncols(self):
        return self.M.shape[1]

    def refactor(self, cost):
        B = self.M[:, self.basis]
        try:
            body = np.linalg.solve(B, np.column_stack([self.M, self.rhs]))
        except np.linalg.LinAlgError:
            raise NumericalError("simplex basis became singular") from None
        cb = cost[self.basis]
        obj = np.append(cost, 0.0) - cb @ body
        self.T = np.vstack([body, obj])
        self.T[-1, self.basis] = 0.0

    def pivot(self, row, col):
        T = self.T
        T[row] /= T[row, col]
        colv = T[:, col].copy()
        colv[row] = 0.0
        T -= np.outer(colv, T[row])
        self.basis[row] = col

    def solution(self):
        y = np.zeros(self.ncols)
        y[self.basis] = np.maximum(self.T[:-1, -1], 0.0)
        return y


def _choose_pivot(tab, tol, bland):
    """Entering column and leaving row.

    Columns are tried by most negative reduced cost, or by smallest index
    when ``bland`` is set; the leaving row is the minimum ratio with ties
    broken by smallest basic index.  Returns ``(row, col, step)``, ``None``
    at optimality, or raises when a clearly improving column has no
    positive entry.
    """
    T = tab.T
    cost = T[-1, :-1]
    cand = np.nonzero(cost < -tol)[0]
    if not bland:
        cand = cand[np.argsort(cost[cand], kind="stable")]
    for col in cand:
        colv = T[:-1, col]
        top = colv.max()
        if top <= PIVOT_ABS:
            if cost[col] < -UNBOUNDED_COST and top <= 0.0:
                raise UnboundedError("linear program is unbounded")
            continue
        ok = colv > max(PIVOT_ABS, PIVOT_REL * top)
        ratios = np.full(tab.nrows, np.inf)
        # basic values are nonnegative up to round-off
        ratios[ok] = np.maximum(T[:-1, -1][ok], 0.0) / colv[ok]
        best = ratios.min()
        ties = np.nonzero(ratios <= best + tol * max(1.0, abs(best)))[0]
        row = int(ties[np.argmin(np.asarray(tab.basis)[ties])])
        return row, int(col), best
    return None


def _run(tab, cost, tol, max_iter, it):
    tab.refactor(cost)
    since = 0
    stalled = 0
    while True:
        choice = _choose_pivot(tab, tol, stalled >= DEGENERATE_SWITCH)
        if choice is None:
            if since == 0:
                return it
            # confirm optimality on a fresh factorization
            tab.refactor(cost)
            since = 0
            continue
        if it >= max_iter:
            raise NonconvergenceError(f"simplex hit the iteration cap ({max_iter})")
        row, col, step = choice
        stalled = stalled + 1 if step <= tol else 0
        tab.pivot(row, col)
        it += 1
        since += 1
        if since >= REFACTOR_EVERY:
            tab.refactor(cost)
            since = 0


def _dual_cleanup(tab, cost, tol, max_iter, it):
    """Dual simplex pivots until the basic values are nonnegative."""
    tab.refactor(cost)
    since = 0
    while True:
        T = tab.T
        rhs = T[:-1, -1]
        r = int(np.argmin(rhs))
        if rhs[r] >= -tol:
            return it
        if it >= max_iter:
            raise NonconvergenceError(f"simplex hit the iteration cap ({max_iter})")
        row = T[r, :-1]
        cand = np.nonzero(row < -PIVOT_ABS)[0]
        if len(cand) == 0:
            raise InfeasibleError("linear program is infeasible")
        ratios = np.maximum(T[-1, cand], 0.0) / -row[cand]
        col = int(cand[np.argmin(ratios)])
        tab.pivot(r, col)
        it += 1
        since += 1
        if since >= REFACTOR_EVERY:
            tab.refactor(cost)
            since = 0


def linprog_simplex(c, A_ub, b_ub, max_iter: int = 50000, tol: float = 1e-10) -> LPResult:
    """Minimize ``c.x`` subject to ``A_ub x <= b_ub``, ``x >= 0``."""
    c = np.asarray(c, dtype=float)
    A = np.atleast_2d(np.asarray(A_ub, dtype=float))
    b = np.asarray(b_ub, dtype=float).reshape(-1)
    nrows, n = A.shape
    if c.shape != (n,) or b.shape != (nrows,):
        raise ArgumentError("inconsistent linear program dimensions")
    if not (np.all(np.isfinite(A)) and np.all(np.isfinite(b)) and np.all(np.isfinite(c))):
        raise ArgumentError("linear program data must be finite")

    # equilibrate rows; the feasible set is unchanged
    scale = np.abs(A).max(axis=1)
    scale = np.where(scale > 0, scale, 1.0)
    A = A / scale[:, None]
    b = b / scale

    # relax every row a little; a feasible program stays feasible
    bump = PERTURBATION * (1.0 + np.abs(b)) * np.random.default_rng(0).uniform(0.5, 1.0, nrows)
    b_relaxed = b + bump
    neg = b_relaxed < 0
    sign = np.where(neg, -1.0, 1.0)
    art_rows = np.nonzero(neg)[0]
    nart = len(art_rows)
    # columns: x (n) | slack/surplus (nrows) | artificial (nart)
    M = np.zeros((nrows, n + nrows + nart))
    M[:, :n] = A * sign[:, None]
    M[np.arange(nrows), n + np.arange(nrows)] = sign
    M[art_rows, n + nrows + np.arange(nart)] = 1.0
    basis = [n + i for i in range(nrows)]
    for j, i in enumerate(art_rows):
        basis[i] = n + nrows + j
    tab = _Tableau(M, b_relaxed * sign, basis)

    it = 0
    if nart:
        cost1 = np.zeros(M.shape[1])
        cost1[n + nrows :] = 1.0
        it = _run(tab, cost1, tol, max_iter, it)
        if -tab.T[-1, -1] > 1e-8 * max(1.0, np.abs(b).max()):
            raise InfeasibleError("linear program is infeasible")
        # drive zero-level artificials out of the basis; drop redundant rows
        keep = []
        for i, bv in enumerate(list(tab.basis)):
            if bv < n + nrows:
                keep.append(i)
                continue
            row = np.abs(tab.T[i, : n + nrows])
            j = int(np.argmax(row))
            if row[j] > 1e-9:
                tab.pivot(i, j)
                keep.append(i)
        tab = _Tableau(tab.M[keep][:, : n + nrows], tab.rhs[keep], [tab.basis[i] for i in keep])
        kept_rows = np.array(keep, dtype=int)
    else:
        kept_rows = np.arange(nrows)

    cost2 = np.zeros(tab.ncols)
    cost2[:n] = c
    try:
        it = _run(tab, cost2, tol, max_iter, it)
        # restore the exact right-hand side, then re-optimize
        tab.rhs = (b * sign)[kept_rows]
        it = _dual_cleanup(tab, cost2, tol, max_iter, it)
        it = _run(tab, cost2, tol, max_iter, it)
    except NonconvergenceError as exc:
        exc.best = tab.solution()[:n]
        raise
    x = tab.solution()[:n]
    viol = float(np.max(A @ x - b, initial=0.0))
    if viol > 1e-8 * max(1.0, np.abs(b).max()):
        raise NumericalError(f"simplex solution violates a constraint by {viol:.3g}")
    # reduced cost of slack i is minus the multiplier of (scaled) row i
    marginals = -tab.T[-1, n : n + nrows] / scale
    return LPResult(x, float(c @ x), it, marginals)

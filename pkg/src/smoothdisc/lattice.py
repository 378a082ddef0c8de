"""Frolov admissible lattices.

The generator matrix is the Vandermonde matrix of the roots of

    P(x) = (x - 1)(x - 3)...(x - (2d - 1)) - 1,

so that ``L(m) = A m`` evaluates the integer polynomial with coefficient
vector ``m`` at every root.  The norm form ``prod_j L_j(m)`` is then the
field norm of an algebraic integer and hence a nonzero integer for ``m != 0``.

The convention is ``A[i, j] = roots[i] ** j`` (one row per root).  The
Frolov nodes are the points ``(A^{-1})^T m / a``; the frequencies that
enter the cubature error are ``a A m``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterator, Optional, Sequence

import numpy as np

from .errors import ArgumentError, ConditioningError, ConstructionError, ResourceError

#: default cap on the number of integer candidate vectors of one enumeration
MAX_CANDIDATES = 10**8
#: default cap on the l1 norm of a dyadic block index
MAX_BLOCK_ORDER = 40
MAX_CONDITION = 1e12
MIN_DIM, MAX_DIM = 2, 6

_CHUNK = 1 << 18


def _frozen(a) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class FrolovPolynomial:
    """``prod_{j=1}^d (x - (2j-1)) - 1`` with its real roots.

    ``coefficients`` are exact integers, leading coefficient first.
    """

    degree: int
    coefficients: tuple
    roots: tuple

    @classmethod
    def build(cls, d: int) -> "FrolovPolynomial":
        coeffs = [1]
        for j in range(1, d + 1):
            c = 2 * j - 1
            # multiply by (x - c), descending powers
            coeffs = [a - c * b for a, b in zip(coeffs + [0], [0] + coeffs)]
        coeffs[-1] -= 1
        coeffs = tuple(int(c) for c in coeffs)
        roots = tuple(_bracketed_root(coeffs, 2.0 * j - 2.0, 2.0 * j) for j in range(1, d + 1))
        scale = max(abs(c) for c in coeffs)
        for x in roots:
            if abs(horner(coeffs, x)) > 1e-10 * scale:
                raise ConstructionError(f"root {x!r} of degree-{d} Frolov polynomial did not converge")
        return cls(d, coeffs, roots)

    def __call__(self, x):
        return horner(self.coefficients, x)


def horner(coeffs: Sequence, x):
    """Evaluate a polynomial given leading-first coefficients."""
    acc = 0.0 * x
    for c in coeffs:
        acc = acc * x + c
    return acc


def _derivative(coeffs):
    n = len(coeffs) - 1
    return [c * (n - i) for i, c in enumerate(coeffs[:-1])]


def _bracketed_root(coeffs, lo, hi, tol=1e-14):
    flo, fhi = horner(coeffs, lo), horner(coeffs, hi)
    if flo == 0.0:
        return lo
    if fhi == 0.0:
        return hi
    if (flo > 0) == (fhi > 0):
        raise ConstructionError(f"no sign change of P on ({lo}, {hi})")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        fmid = horner(coeffs, mid)
        if fmid == 0.0:
            lo = hi = mid
            break
        if (fmid > 0) == (flo > 0):
            lo, flo = mid, fmid
        else:
            hi = mid
    x = 0.5 * (lo + hi)
    dcoeffs = _derivative(coeffs)
    for _ in range(2):
        dp = horner(dcoeffs, x)
        if dp != 0.0:
            x = x - horner(coeffs, x) / dp
    return x


@dataclass(frozen=True)
class AdmissibleLattice:
    """Lattice ``A Z^d`` together with the Frolov scale ``a``."""

    d: int
    a: float
    A: np.ndarray
    A_inv_T: np.ndarray
    det_A: float
    polynomial: Optional[FrolovPolynomial] = field(default=None, compare=False)

    @classmethod
    def from_matrix(cls, A, a: float, det_A: Optional[float] = None, polynomial=None) -> "AdmissibleLattice":
        A = np.atleast_2d(np.asarray(A, dtype=float))
        if A.ndim != 2 or A.shape[0] != A.shape[1]:
            raise ArgumentError("generator matrix must be square")
        if not a > 1:
            raise ArgumentError(f"scale a must exceed 1, got {a}")
        cond = np.linalg.cond(A)
        if not np.isfinite(cond) or cond > MAX_CONDITION:
            raise ConditioningError(f"generator matrix condition number {cond:.3g} exceeds {MAX_CONDITION:g}")
        A_inv_T = np.linalg.inv(A).T
        if det_A is None:
            det_A = float(np.linalg.det(A))
        return cls(A.shape[0], float(a), _frozen(A), _frozen(A_inv_T), float(det_A), polynomial)

    @property
    def coefficients(self):
        return None if self.polynomial is None else self.polynomial.coefficients

    @property
    def roots(self):
        return None if self.polynomial is None else self.polynomial.roots

    @property
    def dual_generator(self) -> np.ndarray:
        """Matrix mapping integer vectors to Frolov nodes, ``(A^{-1})^T / a``."""
        return self.A_inv_T / self.a

    @property
    def frequency_generator(self) -> np.ndarray:
        """Matrix mapping integer vectors to error frequencies, ``a A``."""
        return self.a * self.A

    def L(self, m) -> np.ndarray:
        """Lattice vector(s) ``A m``; ``m`` may be a stack of row vectors."""
        return np.asarray(m, dtype=float) @ self.A.T

    def to_dict(self) -> dict:
        return {
            "d": self.d,
            "a": self.a,
            "coefficients": list(self.coefficients) if self.polynomial else None,
            "roots": list(self.roots) if self.polynomial else None,
            "A": self.A.tolist(),
            "A_inv_T": self.A_inv_T.tolist(),
            "det_A": self.det_A,
        }


def build_frolov_lattice(d: int, a: float) -> AdmissibleLattice:
    """Frolov lattice of dimension ``2 <= d <= 6`` with scale ``a > 1``."""
    if not isinstance(d, (int, np.integer)) or not MIN_DIM <= d <= MAX_DIM:
        raise ArgumentError(f"dimension must be an integer in [{MIN_DIM}, {MAX_DIM}], got {d!r}")
    if not a > 1:
        raise ArgumentError(f"scale a must exceed 1, got {a}")
    poly = FrolovPolynomial.build(int(d))
    r = np.array(poly.roots)
    A = r[:, None] ** np.arange(d)[None, :]
    det = math.prod(r[j] - r[i] for i in range(d) for j in range(i + 1, d))
    return AdmissibleLattice.from_matrix(A, a, det_A=det, polynomial=poly)


def _as_box(lo, hi, d):
    lo = np.asarray(lo, dtype=float).reshape(-1)
    hi = np.asarray(hi, dtype=float).reshape(-1)
    if lo.shape != (d,) or hi.shape != (d,):
        raise ArgumentError(f"box corners must have length {d}")
    if not (np.all(np.isfinite(lo)) and np.all(np.isfinite(hi))):
        raise ArgumentError("box must be bounded")
    if np.any(hi < lo):
        raise ArgumentError("box has upper corner below lower corner")
    return lo, hi


def _prefix_batches(ranges):
    """Cartesian product of integer ranges as row stacks of bounded size."""
    if not ranges:
        yield np.zeros((1, 0), dtype=np.int64)
        return
    total = math.prod(len(r) for r in ranges)
    heads = [ranges[0]] if total <= _CHUNK else [np.array([v]) for v in ranges[0]]
    for head in heads:
        grids = np.meshgrid(head, *ranges[1:], indexing="ij")
        yield np.stack([g.reshape(-1) for g in grids], axis=1)


def lattice_points_in_box(M, lo, hi, cap: int = MAX_CANDIDATES):
    """All integer ``m`` with ``lo <= M m < hi`` coordinatewise.

    The integer range is bounded by interval arithmetic on ``M^{-1}``; the
    first ``d-1`` coordinates are scanned and the last is solved for
    directly.  Returns ``(ms, images)`` sorted lexicographically by ``m``.
    """
    M = np.atleast_2d(np.asarray(M, dtype=float))
    d = M.shape[0]
    lo, hi = _as_box(lo, hi, d)
    empty = (np.zeros((0, d), dtype=np.int64), np.zeros((0, d)))
    if np.any(hi <= lo):
        return empty
    Minv = np.linalg.inv(M)
    pos, neg = np.clip(Minv, 0, None), np.clip(Minv, None, 0)
    mlo = np.floor(pos @ lo + neg @ hi) - 1
    mhi = np.ceil(pos @ hi + neg @ lo) + 1
    sizes = (mhi - mlo + 1).astype(float)
    if float(np.prod(sizes)) > cap:
        raise ResourceError(f"enumeration needs {np.prod(sizes):.3g} candidates, cap is {cap:g}")
    mlo, mhi = mlo.astype(np.int64), mhi.astype(np.int64)

    col = M[:, d - 1]
    live = np.abs(col) > 0
    out = []
    prefix_ranges = [np.arange(mlo[i], mhi[i] + 1) for i in range(d - 1)]
    for P in _prefix_batches(prefix_ranges):
        partial = P @ M[:, : d - 1].T if d > 1 else np.zeros((1, d))
        a_lo = np.full(len(P), float(mlo[d - 1]))
        a_hi = np.full(len(P), float(mhi[d - 1]))
        for i in np.nonzero(live)[0]:
            b1 = (lo[i] - partial[:, i]) / col[i]
            b2 = (hi[i] - partial[:, i]) / col[i]
            a_lo = np.maximum(a_lo, np.minimum(b1, b2))
            a_hi = np.minimum(a_hi, np.maximum(b1, b2))
        start = np.ceil(a_lo).astype(np.int64) - 1
        stop = np.floor(a_hi).astype(np.int64) + 1
        counts = np.clip(stop - start + 1, 0, None)
        total = int(counts.sum())
        if total == 0:
            continue
        rows = np.repeat(np.arange(len(P)), counts)
        offs = np.arange(total) - np.repeat(np.cumsum(counts) - counts, counts)
        last = np.repeat(start, counts) + offs
        ms = np.concatenate([P[rows], last[:, None]], axis=1).astype(np.int64)
        img = ms @ M.T
        keep = np.all((img >= lo) & (img < hi), axis=1)
        if keep.any():
            out.append((ms[keep], img[keep]))
    if not out:
        return empty
    ms = np.concatenate([o[0] for o in out])
    img = np.concatenate([o[1] for o in out])
    order = np.lexsort(ms.T[::-1])
    return ms[order], img[order]


def norm_form_min(lat: AdmissibleLattice, M: int, cap: int = MAX_CANDIDATES):
    """Smallest ``|prod_j L_j(m)|`` over integers ``0 < ||m||_inf <= M``.

    Returns ``(value, m)``; ties go to the lexicographically first ``m``.
    """
    if M < 1:
        raise ArgumentError("search radius must be at least 1")
    d = lat.d
    if float(2 * M + 1) ** d > cap:
        raise ResourceError(f"norm form scan over {(2 * M + 1) ** d} vectors exceeds cap {cap:g}")
    axis = np.arange(-M, M + 1)
    best, best_m = math.inf, None
    tail = np.stack(np.meshgrid(*([axis] * (d - 1)), indexing="ij"), axis=-1).reshape(-1, d - 1) if d > 1 else None
    for first in axis:
        if d > 1:
            ms = np.concatenate([np.full((len(tail), 1), first), tail], axis=1)
        else:
            ms = np.array([[first]])
        nz = np.any(ms != 0, axis=1)
        ms = ms[nz]
        if len(ms) == 0:
            continue
        vals = np.abs(np.prod(lat.L(ms), axis=1))
        i = int(np.argmin(vals))
        if vals[i] < best:
            best, best_m = float(vals[i]), tuple(int(v) for v in ms[i])
    return best, best_m


def box_point_count(lat: AdmissibleLattice, lo, hi, cap: int = MAX_CANDIDATES) -> int:
    """Number of lattice points ``A m`` in the half-open box ``[lo, hi)``."""
    ms, _ = lattice_points_in_box(lat.A, lo, hi, cap=cap)
    return len(ms)


def enumerate_dual_points(lat: AdmissibleLattice, lo, hi, cap: int = MAX_CANDIDATES):
    """Frolov nodes ``(A^{-1})^T m / a`` lying in ``[lo, hi)``.

    Returns ``(ms, points)``.  The target must lie inside ``[-2, 3)^d``.
    """
    lo, hi = _as_box(lo, hi, lat.d)
    if np.any(lo < -2) or np.any(hi > 3):
        raise ArgumentError("target box must lie inside [-2, 3)^d")
    return lattice_points_in_box(lat.dual_generator, lo, hi, cap=cap)


@dataclass(frozen=True)
class DyadicBlock:
    """Index set ``{k : floor(2^(s_j - 1)) <= |k_j| < 2^s_j}``."""

    s: tuple

    def __post_init__(self):
        s = tuple(int(v) for v in self.s)
        if any(v < 0 for v in s):
            raise ArgumentError("dyadic block index must be nonnegative")
        object.__setattr__(self, "s", s)

    @property
    def order(self) -> int:
        return sum(self.s)

    @property
    def lower(self) -> np.ndarray:
        return np.array([math.floor(2.0 ** (v - 1)) for v in self.s], dtype=float)

    @property
    def upper(self) -> np.ndarray:
        return np.array([2.0**v for v in self.s])

    def contains(self, k) -> np.ndarray:
        ak = np.abs(np.atleast_2d(np.asarray(k, dtype=float)))
        return np.all((ak >= self.lower) & (ak < self.upper), axis=1)


def compositions(n: int, d: int) -> Iterator[tuple]:
    """All ``s`` in ``N_0^d`` with ``sum(s) == n``, in lexicographic order."""
    if d == 1:
        yield (n,)
        return
    for first in range(n + 1):
        for rest in compositions(n - first, d - 1):
            yield (first,) + rest


def smallest_block_order(a: float, d: int) -> int:
    """Smallest ``n0 >= 1`` with ``2^n0 >= a^d``."""
    n0 = max(1, math.ceil(d * math.log2(a)))
    while 2.0**n0 < a**d:
        n0 += 1
    while n0 > 1 and 2.0 ** (n0 - 1) >= a**d:
        n0 -= 1
    return n0


def count_points_in_dyadic_block(lat: AdmissibleLattice, s, max_order: int = MAX_BLOCK_ORDER,
                                 cap: int = MAX_CANDIDATES) -> int:
    """``|rho(s) ∩ {a A m : m != 0}|``."""
    block = s if isinstance(s, DyadicBlock) else DyadicBlock(tuple(s))
    if len(block.s) != lat.d:
        raise ArgumentError(f"block index must have length {lat.d}")
    if block.order > max_order:
        raise ResourceError(f"block order {block.order} exceeds cap {max_order}")
    up = block.upper
    ms, ks = lattice_points_in_box(lat.frequency_generator, -up, up, cap=cap)
    keep = np.any(ms != 0, axis=1) & block.contains(ks)
    return int(np.count_nonzero(keep))


def block_counts_by_order(lat: AdmissibleLattice, n: int, **kw) -> dict:
    """Counts for every block with ``||s||_1 == n``."""
    return {s: count_points_in_dyadic_block(lat, s, **kw) for s in compositions(n, lat.d)}


__all__ = [
    "FrolovPolynomial",
    "AdmissibleLattice",
    "DyadicBlock",
    "build_frolov_lattice",
    "lattice_points_in_box",
    "norm_form_min",
    "box_point_count",
    "enumerate_dual_points",
    "count_points_in_dyadic_block",
    "block_counts_by_order",
    "compositions",
    "smallest_block_order",
]

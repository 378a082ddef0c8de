"""Cubature, quadrature errors and exponential sums.

For a 1-periodic integrand with absolutely summable Fourier coefficients
``c(k)`` the cubature error of nodes ``xi`` and weights ``lambda`` is

    sum_mu lambda_mu f(xi_mu) - c(0) = sum_{k != 0} Lambda(k) c(k) + (Lambda(0) - 1) c(0),

where ``Lambda(k) = sum_mu lambda_mu exp(2 pi i (k, xi_mu))``.  The
periodized hat kernel has ``c(k) = prod_j exp(-2 pi i k_j z_j) (sin(pi u_j k_j) / (pi k_j))^r``,
so the frequency-side error can be truncated at ``||k||_inf <= K`` with a
certified tail bound.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.special import zeta

from .errors import ArgumentError, EvaluationError, ResourceError
from .kernels import HatSpec, hat_fourier, periodized_hat_eval
from .pointsets import WeightedPointSet

#: cap on (2K+1)^d * m for exponential-sum tables
MAX_SUM_WORK = 4 * 10**8
#: frequency rows per block when forming exponential sums
_BLOCK = 4096


def apply_cubature(ps: WeightedPointSet, f: Callable, weights=None) -> float:
    """``sum_mu lambda_mu f(xi_mu)`` with compensated summation.

    ``f`` is called once on the ``(m, d)`` array of nodes and must return
    ``m`` values.
    """
    lam = ps.weights if weights is None else np.asarray(weights, dtype=float)
    vals = np.asarray(f(ps.points), dtype=float)
    if vals.ndim == 0:
        vals = np.full(ps.m, float(vals))
    vals = vals.reshape(-1)
    if vals.shape != (ps.m,):
        raise ArgumentError(f"integrand returned {vals.shape[0]} values for {ps.m} nodes")
    bad = np.nonzero(~np.isfinite(vals))[0]
    if len(bad):
        i = int(bad[0])
        raise EvaluationError(f"integrand is not finite at node {i} = {ps.points[i].tolist()}")
    return math.fsum(lam * vals)


def quadrature_error_spatial(ps: WeightedPointSet, spec: HatSpec, weights=None) -> float:
    """Cubature value of the periodized kernel minus its integral ``pr(u)^r``."""
    if spec.d != ps.d:
        raise ArgumentError("kernel and point set dimensions differ")
    return apply_cubature(ps, lambda x: periodized_hat_eval(spec, x), weights) - spec.integral


@dataclass(frozen=True)
class ExponentialSumTable:
    """``Lambda(k)`` for all ``||k||_inf <= K``; ``values[k + K]`` holds ``Lambda(k)``."""

    K: int
    values: np.ndarray
    m: int
    weight_mass: float
    weight_sum: float

    @property
    def d(self) -> int:
        return self.values.ndim

    def at(self, k) -> complex:
        idx = tuple(int(v) + self.K for v in k)
        return complex(self.values[idx])

    def frequencies(self) -> np.ndarray:
        """Axis of frequencies ``-K..K`` shared by every coordinate."""
        return np.arange(-self.K, self.K + 1)

    def rows(self):
        """Iterate ``(k, Lambda(k))`` in lexicographic order of ``k``."""
        ax = self.frequencies()
        for idx in np.ndindex(*self.values.shape):
            yield tuple(int(ax[i]) for i in idx), complex(self.values[idx])


def _phase_matrix(K: int, x: np.ndarray) -> np.ndarray:
    """``exp(2 pi i k x_mu)`` for ``k = -K..K``, direct trigonometric evaluation."""
    k = np.arange(-K, K + 1, dtype=float)[:, None]
    t = np.mod(k * x[None, :], 1.0)
    return np.exp(2j * np.pi * t)


def exponential_sums(ps: WeightedPointSet, K: int, weights=None, cap: int = MAX_SUM_WORK) -> ExponentialSumTable:
    """Table of ``Lambda(k) = sum_mu lambda_mu exp(2 pi i (k, xi_mu))``."""
    if K < 0:
        raise ArgumentError("frequency cutoff must be nonnegative")
    d, m = ps.d, ps.m
    work = float(2 * K + 1) ** d * m
    if work > cap:
        raise ResourceError(f"exponential sums need {work:.3g} terms, cap is {cap:g}")
    lam = ps.weights if weights is None else np.asarray(weights, dtype=float)
    E = [_phase_matrix(K, ps.points[:, j]) for j in range(d)]
    n = 2 * K + 1
    out = np.empty((n,) * d, dtype=complex)
    if d == 1:
        out[:] = E[0] @ lam
    else:
        flat = out.reshape(-1, n)
        heads = list(np.ndindex(*(n,) * (d - 1)))
        for start in range(0, len(heads), _BLOCK):
            block = heads[start : start + _BLOCK]
            P = np.broadcast_to(lam, (len(block), m)).astype(complex)
            for j in range(d - 1):
                P = P * E[j][[h[j] for h in block]]
            flat[start : start + len(block)] = P @ E[d - 1].T
    out.setflags(write=False)
    return ExponentialSumTable(K, out, m, math.fsum(np.abs(lam)), math.fsum(lam))


def lambda_star(table: ExponentialSumTable) -> np.ndarray:
    """``|Lambda(k)|^2``, the exponential sums of the auxiliary cubature."""
    return np.abs(table.values) ** 2


def _tail_of_product(heads, tails) -> float:
    """``prod(h + t) - prod(h)`` expanded so that nothing cancels."""
    prod, diff = 1.0, 0.0
    for h, t in zip(heads, tails):
        diff = diff * (h + t) + prod * t
        prod *= h
    return diff


def _kernel_majorant_1d(K: int, u: float, r: int):
    """Sum over ``|k| <= K`` and over ``|k| > K`` of ``min(u^r, |k|^-r)``."""
    k = np.arange(1, K + 1, dtype=float)
    head = u**r + 2.0 * math.fsum(np.minimum(u**r, k ** (-r)))
    kstar = math.floor(1.0 / u)
    flat = max(0, kstar - K)
    tail = 2.0 * (flat * u**r + float(zeta(r, max(K, kstar) + 1)))
    return head, tail


def fourier_coefficients(spec: HatSpec, K: int) -> np.ndarray:
    """Fourier coefficients of the periodized kernel on the cube ``||k||_inf <= K``."""
    k = np.arange(-K, K + 1, dtype=float)
    out = np.ones((1,) * 0, dtype=complex)
    for j in range(spec.d):
        c = np.exp(-2j * np.pi * np.mod(k * spec.z[j], 1.0)) * hat_fourier(spec.r, k, spec.u[j])
        out = np.multiply.outer(out, c)
    return out


@dataclass(frozen=True)
class FourierError:
    """Frequency-side cubature error: truncated value and certified tail bound."""

    value: float
    tail_bound: float
    imag: float
    K: int

    def __iter__(self):
        yield self.value
        yield self.tail_bound


def quadrature_error_fourier(ps: WeightedPointSet, spec: HatSpec, K: int, table=None, weights=None,
                             cap: int = MAX_SUM_WORK) -> FourierError:
    """Cubature error of the periodized kernel via ``sum_{k != 0} Lambda(k) c(k)``.

    ``|true error - value| <= tail_bound`` holds for ``r >= 2``.
    """
    if spec.r < 2:
        raise ArgumentError("the Fourier error needs r >= 2 (absolutely convergent series)")
    if K < 1:
        raise ArgumentError("frequency cutoff must be at least 1")
    if spec.d != ps.d:
        raise ArgumentError("kernel and point set dimensions differ")
    if table is None:
        table = exponential_sums(ps, K, weights=weights, cap=cap)
    elif table.K < K:
        raise ArgumentError(f"table has cutoff {table.K} < {K}")
    vals = table.values
    if table.K > K:
        cut = slice(table.K - K, table.K + K + 1)
        vals = vals[(cut,) * spec.d]
    terms = vals * fourier_coefficients(spec, K)
    centre = (K,) * spec.d
    terms[centre] = 0.0
    flat = terms.reshape(-1)
    re = math.fsum(flat.real)
    im = math.fsum(flat.imag)
    value = re + (table.weight_sum - 1.0) * spec.integral
    heads, tails = zip(*(_kernel_majorant_1d(K, u, spec.r) for u in spec.u))
    tail = table.weight_mass * _tail_of_product(heads, tails)
    return FourierError(value, tail, im, K)


def lower_bound_functional(table: ExponentialSumTable, r: float):
    """``sum_{k != 0} |Lambda(k)|^2 nu(kbar)^-r`` truncated at the table cutoff.

    ``nu(kbar) = prod_j max(|k_j|, 1)``.  Returns ``(value, tail_bound)``.
    """
    if not r > 1:
        raise ArgumentError("the functional needs r > 1")
    K = table.K
    k = np.arange(-K, K + 1, dtype=float)
    g = np.maximum(np.abs(k), 1.0) ** (-r)
    weight = np.ones(())
    for _ in range(table.d):
        weight = np.multiply.outer(weight, g)
    terms = lambda_star(table) * weight
    terms[(K,) * table.d] = 0.0
    value = math.fsum(terms.reshape(-1))
    head = 1.0 + 2.0 * math.fsum(g[K + 1 :])
    tail1 = 2.0 * float(zeta(r, K + 1))
    tail = table.weight_mass**2 * _tail_of_product([head] * table.d, [tail1] * table.d)
    return value, tail


def sigma_r(n: int, u, r: float) -> float:
    """``sum_{||s||_1 = n} prod_j min((2^s_j u_j)^(r/2), (2^s_j u_j)^(-r/2))``.

    Summed exactly over all compositions of ``n`` by iterated convolution.
    """
    if n < 0 or n > 60:
        raise ArgumentError("n must lie in [0, 60]")
    u = np.atleast_1d(np.asarray(u, dtype=float))
    s = np.arange(n + 1, dtype=float)
    acc = None
    for uj in u:
        # log-domain: min(x^(r/2), x^(-r/2)) = exp(-(r/2) |log x|)
        seq = np.exp(-0.5 * r * np.abs(s * math.log(2.0) + math.log(uj)))
        acc = seq if acc is None else np.convolve(acc, seq)[: n + 1]
    return float(acc[n])


__all__ = [
    "apply_cubature",
    "quadrature_error_spatial",
    "ExponentialSumTable",
    "exponential_sums",
    "lambda_star",
    "fourier_coefficients",
    "FourierError",
    "quadrature_error_fourier",
    "lower_bound_functional",
    "sigma_r",
]

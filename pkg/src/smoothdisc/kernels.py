"""Smooth hat kernels, their periodizations and the partition-of-unity window.

``h^r(., u)`` is the r-fold convolution of the indicator of ``[-u/2, u/2)``,
i.e. a scaled cardinal B-spline of order r.  It is evaluated in closed form
through truncated powers::

    h^r(x, u) = 1/(r-1)! * sum_{k=0}^r (-1)^k C(r, k) (x + r u/2 - k u)_+^(r-1)

For r = 2 this is the triangle ``u - |x|`` on ``[-u, u]``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ArgumentError


def _check_order(r):
    if not isinstance(r, (int, np.integer)) or r < 1:
        raise ArgumentError(f"smoothness order must be a positive integer, got {r!r}")


def _check_width(u, upper=0.5):
    u = np.asarray(u, dtype=float)
    if np.any(~(u > 0)) or np.any(u > upper):
        raise ArgumentError(f"widths must lie in (0, {upper}], got {u.tolist()}")
    return u


def hat_eval(r: int, x, u):
    """Evaluate ``h^r(x, u)``; vectorized over ``x`` (and broadcast ``u``).

    For ``r == 1`` this is the indicator of ``[-u/2, u/2)``.
    """
    _check_order(r)
    _check_width(u)
    return _hat(r, np.asarray(x, dtype=float), np.asarray(u, dtype=float))


def _hat(r, x, u):
    if r == 1:
        out = ((x >= -0.5 * u) & (x < 0.5 * u)).astype(float)
        return out if out.ndim else float(out)
    half = 0.5 * r * u
    inside = np.abs(x) < half
    # symmetric for r >= 2; the left half has fewer active terms, less cancellation
    y = half - np.abs(x)
    acc = np.zeros(np.broadcast(x, u).shape)
    for k in range(r + 1):
        t = np.clip(y - k * u, 0.0, None)
        acc = acc + ((-1) ** k * math.comb(r, k)) * t ** (r - 1)
    out = np.where(inside, acc / math.factorial(r - 1), 0.0)
    out = np.clip(out, 0.0, None)
    return out if out.ndim else float(out)


def hat_integral(r: int, u) -> float:
    """``integral of h^r(x, u) dx = u**r``."""
    _check_order(r)
    _check_width(u)
    return float(u) ** r


def hat_fourier(r: int, y, u):
    """Fourier transform ``(sin(pi u y) / (pi y))**r`` (``u**r`` at ``y = 0``)."""
    _check_order(r)
    _check_width(u)
    y = np.asarray(y, dtype=float)
    u = np.asarray(u, dtype=float)
    # np.sinc(t) = sin(pi t)/(pi t); this form has no removable singularity
    out = (u * np.sinc(u * y)) ** r
    return out if out.ndim else float(out)


@dataclass(frozen=True)
class HatSpec:
    """Tensor hat kernel ``prod_j h^r(x_j - z_j, u_j)``.

    ``u`` is restricted to ``(0, 1/2]^d`` (the periodic setting); pass
    ``max_width`` to relax this for the non-periodic fixed-volume search.
    """

    r: int
    z: tuple
    u: tuple
    max_width: float = 0.5

    def __post_init__(self):
        _check_order(self.r)
        z = tuple(float(v) for v in np.atleast_1d(self.z))
        u = tuple(float(v) for v in np.atleast_1d(self.u))
        if len(z) != len(u):
            raise ArgumentError("shift and width vectors differ in length")
        _check_width(u, self.max_width)
        object.__setattr__(self, "z", z)
        object.__setattr__(self, "u", u)

    @property
    def d(self) -> int:
        return len(self.u)

    @property
    def pr(self) -> float:
        """Product of the widths."""
        return math.prod(self.u)

    @property
    def integral(self) -> float:
        """``prod_j u_j**r``, the integral of both the kernel and its periodization."""
        return self.pr**self.r

    @property
    def support_halfwidth(self) -> np.ndarray:
        return 0.5 * self.r * np.asarray(self.u)


def _points(x, d):
    x = np.asarray(x, dtype=float)
    if x.ndim == 1:
        if x.shape[0] != d:
            raise ArgumentError(f"point has dimension {x.shape[0]}, kernel has {d}")
        return x[None, :], True
    if x.ndim != 2 or x.shape[1] != d:
        raise ArgumentError(f"points must have shape (n, {d})")
    return x, False


def tensor_hat_eval(spec: HatSpec, x):
    """Evaluate the tensor kernel at one point or a stack of points."""
    pts, single = _points(x, spec.d)
    out = np.ones(len(pts))
    for j in range(spec.d):
        out *= _hat(spec.r, pts[:, j] - spec.z[j], np.float64(spec.u[j]))
    return float(out[0]) if single else out


def shift_range(r: int) -> range:
    """Integer shifts needed to periodize ``h^r`` with widths at most 1/2."""
    s = math.ceil(r / 4) + 1
    return range(-s, s + 1)


def periodized_hat_1d(r: int, t, u: float):
    """``sum_n h^r(t + n, u)`` for a univariate offset ``t`` (any real)."""
    t = np.asarray(t, dtype=float)
    # reduce to [-1/2, 1/2) so that the fixed shift range always suffices
    t = t - np.floor(t + 0.5)
    acc = np.zeros(t.shape)
    for n in shift_range(r):
        acc = acc + _hat(r, t + n, np.float64(u))
    return acc if acc.ndim else float(acc)


def periodized_hat_eval(spec: HatSpec, x):
    """Evaluate the 1-periodization of the tensor kernel in every coordinate."""
    if any(v > 0.5 for v in spec.u):
        raise ArgumentError("periodization requires widths in (0, 1/2]")
    pts, single = _points(x, spec.d)
    out = np.ones(len(pts))
    for j in range(spec.d):
        out *= periodized_hat_1d(spec.r, pts[:, j] - spec.z[j], spec.u[j])
    return float(out[0]) if single else out


def _sigma(t):
    t = np.asarray(t, dtype=float)
    safe = np.where(t > 0, t, 1.0)
    return np.where(t > 0, np.exp(-1.0 / safe), 0.0)


def smooth_step(t):
    """C-infinity step: 0 for ``t <= 0``, 1 for ``t >= 1``."""
    a, b = _sigma(t), _sigma(1.0 - np.asarray(t, dtype=float))
    return a / (a + b)


def window_eval(t):
    """Window ``w`` with support in ``(-1/2, 3/2)`` and ``sum_k w(t + k) = 1``."""
    t = np.asarray(t, dtype=float)
    out = np.where(t <= 0.5, smooth_step(t + 0.5), smooth_step(1.5 - t))
    return out if out.ndim else float(out)


def window_weight(eta):
    """Tensor window ``prod_j w(eta_j)`` for one point or a stack of points."""
    eta = np.asarray(eta, dtype=float)
    return np.prod(window_eval(eta), axis=-1)


__all__ = [
    "HatSpec",
    "hat_eval",
    "hat_integral",
    "hat_fourier",
    "tensor_hat_eval",
    "periodized_hat_1d",
    "periodized_hat_eval",
    "shift_range",
    "smooth_step",
    "window_eval",
    "window_weight",
]

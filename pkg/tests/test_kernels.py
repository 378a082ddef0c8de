import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from oracles import convolution_oracle, fourier_oracle
from smoothdisc.errors import ArgumentError
from smoothdisc.kernels import (
    HatSpec,
    hat_eval,
    hat_fourier,
    hat_integral,
    periodized_hat_1d,
    periodized_hat_eval,
    smooth_step,
    tensor_hat_eval,
    window_eval,
    window_weight,
)

orders = st.integers(1, 6)
widths = st.floats(1e-3, 0.5)


def test_center_values():
    assert hat_eval(1, 0.0, 0.5) == 1.0
    assert hat_eval(2, 0.0, 0.5) == pytest.approx(0.5, abs=1e-15)


def test_indicator_is_half_open():
    assert hat_eval(1, -0.25, 0.5) == 1.0
    assert hat_eval(1, 0.25, 0.5) == 0.0


def test_triangle_form():
    x = np.linspace(-0.7, 0.7, 141)
    np.testing.assert_allclose(hat_eval(2, x, 0.5), np.clip(0.5 - np.abs(x), 0, None), atol=1e-15)


def test_r3_matches_trapezoid_convolution():
    y = np.linspace(-0.2, 0.2, 100001)
    ref = np.trapezoid(hat_eval(2, 0.1 - y, 0.4), y)
    assert hat_eval(3, 0.1, 0.4) == pytest.approx(ref, abs=1e-7)


@pytest.mark.parametrize("r", [2, 3, 4, 5])
@pytest.mark.parametrize("u", [0.1, 0.3, 0.5])
def test_convolution_recursion(r, u):
    xs = np.linspace(-r * u / 2 - 0.01, r * u / 2 + 0.01, 37)
    ref = np.array([convolution_oracle(r, x, u) for x in xs])
    np.testing.assert_allclose(hat_eval(r, xs, u), ref, atol=1e-9)


@pytest.mark.parametrize("r,u,ref", [(1, 0.5, 0.5), (3, 0.5, 0.125), (2, 0.3, 0.09)])
def test_integral(r, u, ref):
    assert hat_integral(r, u) == pytest.approx(ref, abs=1e-15)
    x = np.linspace(-r * u / 2, r * u / 2, 200001)
    if r > 1:
        assert np.trapezoid(hat_eval(r, x, u), x) == pytest.approx(ref, abs=1e-9)


def test_fourier_examples():
    assert hat_fourier(2, 0.0, 0.5) == pytest.approx(0.25, abs=1e-15)
    assert hat_fourier(2, 1.0, 0.5) == pytest.approx(1 / math.pi**2, abs=1e-12)
    assert abs(hat_fourier(4, 2.0, 0.5)) < 1e-15
    assert hat_fourier(2, 1.0, 0.5) == pytest.approx(fourier_oracle(2, 1.0, 0.5), abs=1e-9)


@pytest.mark.parametrize("r", [2, 3])
def test_fourier_against_quadrature(r):
    for y in [0.0, 0.7, 3.0, 11.5]:
        assert hat_fourier(r, y, 0.3) == pytest.approx(fourier_oracle(r, y, 0.3), abs=1e-9)


@pytest.mark.parametrize("bad", [(0, 0.1, 0.3), (2, 0.1, 0.0), (2, 0.1, 0.6), (1.5, 0.1, 0.3)])
def test_argument_errors(bad):
    with pytest.raises(ArgumentError):
        hat_eval(*bad)


@settings(max_examples=200, deadline=None)
@given(r=orders, u=widths, x=st.floats(-2, 2))
def test_hat_properties(r, u, x):
    v = hat_eval(r, x, u)
    assert 0 <= v <= u ** (r - 1) + 1e-15
    if r > 1:
        assert v == hat_eval(r, -x, u)
    if abs(x) >= r * u / 2:
        assert v == 0


@settings(max_examples=200, deadline=None)
@given(r=orders, u=widths, y=st.floats(-1e3, 1e3))
def test_fourier_decay_bound(r, u, y):
    v = abs(hat_fourier(r, y, u))
    bound = u**r if math.pi * abs(y) * u <= 1 else (math.pi * abs(y)) ** (-r)
    assert v <= bound * (1 + 1e-12)


def test_tensor_examples():
    spec = HatSpec(2, (0.5, 0.5), (0.25, 0.5))
    assert tensor_hat_eval(spec, [0.6, 0.7]) == pytest.approx(0.15 * 0.3, abs=1e-15)
    assert tensor_hat_eval(spec, [0.5, 0.5]) == pytest.approx(0.25 * 0.5)
    assert tensor_hat_eval(spec, [0.76, 0.5]) == 0.0
    with pytest.raises(ArgumentError):
        tensor_hat_eval(spec, [0.5, 0.5, 0.5])
    with pytest.raises(ArgumentError):
        HatSpec(2, (0.5,), (0.25, 0.25))


def test_periodized_examples():
    assert periodized_hat_1d(2, 0.9, 0.5) == pytest.approx(0.4, abs=1e-15)
    spec = HatSpec(2, (0.0,), (0.5,))
    x = (np.arange(10**4) + 0.5) / 10**4
    assert np.mean(periodized_hat_eval(spec, x[:, None])) == pytest.approx(0.25, abs=1e-6)
    with pytest.raises(ArgumentError):
        HatSpec(2, (0.0,), (0.6,))


@settings(max_examples=200, deadline=None)
@given(r=orders, u=widths, t=st.floats(-3, 3), n=st.integers(-3, 3))
def test_periodicity(r, u, t, n):
    assert periodized_hat_1d(r, t + n, u) == pytest.approx(periodized_hat_1d(r, t, u), abs=1e-12)


@pytest.mark.parametrize("r", [1, 2, 3, 5, 8])
def test_periodized_sum_uses_enough_shifts(r):
    # compare against a generous direct sum over shifts
    t = np.linspace(-0.5, 0.5, 401)
    ref = sum(hat_eval(r, t + n, 0.5) for n in range(-10, 11))
    np.testing.assert_allclose(periodized_hat_1d(r, t, 0.5), ref, atol=1e-14)


def test_window_examples():
    assert window_eval(0.5) == 1.0
    assert window_eval(-0.6) == 0.0
    assert window_eval(1.6) == 0.0
    assert smooth_step(0.5) == pytest.approx(0.5)


def test_partition_of_unity():
    t = np.linspace(-0.5, 0.5, 1000)
    assert np.max(np.abs(window_eval(t) + window_eval(t + 1) - 1)) <= 1e-12
    t = np.linspace(0, 1, 1000)
    total = sum(window_eval(t + k) for k in range(-2, 3))
    assert np.max(np.abs(total - 1)) <= 1e-12


def test_window_weight_is_tensor():
    eta = np.array([[0.1, 1.2], [-0.3, 0.5]])
    np.testing.assert_allclose(window_weight(eta), window_eval(eta[:, 0]) * window_eval(eta[:, 1]))

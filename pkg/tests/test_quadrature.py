import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from smoothdisc.errors import ArgumentError, EvaluationError, ResourceError
from smoothdisc.kernels import HatSpec, periodized_hat_eval
from smoothdisc.pointsets import WeightedPointSet, fibonacci_pointset, periodized_frolov_pointset, random_pointset
from smoothdisc.quadrature import (
    apply_cubature,
    exponential_sums,
    fourier_coefficients,
    lambda_star,
    lower_bound_functional,
    quadrature_error_fourier,
    quadrature_error_spatial,
    sigma_r,
)

ORIGIN = WeightedPointSet([[0.0]], [1.0])


def naive_sums(ps, K):
    """Direct double loop over frequencies and nodes."""
    d = ps.d
    out = {}
    for k in itertools.product(range(-K, K + 1), repeat=d):
        out[k] = sum(w * np.exp(2j * np.pi * np.dot(k, x)) for x, w in zip(ps.points, ps.weights))
    return out


def test_cubature_constants():
    ps = fibonacci_pointset(10)
    assert apply_cubature(ps, lambda x: np.ones(len(x))) == 1.0
    assert apply_cubature(ps, lambda x: np.zeros(len(x))) == 0.0
    spec = HatSpec(2, (0.0,), (0.5,))
    assert apply_cubature(ORIGIN, lambda x: periodized_hat_eval(spec, x)) == pytest.approx(0.5)


def test_cubature_reports_bad_node():
    ps = fibonacci_pointset(5)
    f = lambda x: np.where(x[:, 0] > 0.5, np.inf, 1.0)
    with pytest.raises(EvaluationError, match="node 3"):
        apply_cubature(ps, f)


def test_spatial_error_examples():
    spec = HatSpec(2, (0.0,), (0.5,))
    assert quadrature_error_spatial(ORIGIN, spec) == pytest.approx(0.25, abs=1e-15)
    ps = fibonacci_pointset(6)
    spec2 = HatSpec(3, (0.2, 0.7), (0.3, 0.4))
    assert quadrature_error_spatial(ps, spec2, weights=np.zeros(ps.m)) == -spec2.integral


def test_exponential_sums_against_naive():
    ps = random_pointset(7, 2, 3)
    tab = exponential_sums(ps, 3)
    ref = naive_sums(ps, 3)
    for k, v in tab.rows():
        assert abs(v - ref[k]) < 1e-13


def test_exponential_sums_properties():
    ps = fibonacci_pointset(10)
    tab = exponential_sums(ps, 20)
    assert tab.at((0, 0)) == pytest.approx(1.0, abs=1e-14)
    assert np.all(np.abs(tab.values) <= tab.weight_mass + 1e-12)
    ls = lambda_star(tab)
    np.testing.assert_allclose(ls, ls[::-1, ::-1], atol=1e-13)


def test_fibonacci_dual_lattice_character_sums():
    ps = fibonacci_pointset(5)
    tab = exponential_sums(ps, 6)
    for k, v in tab.rows():
        ref = 1.0 if (k[0] + 3 * k[1]) % 5 == 0 else 0.0
        assert abs(v - ref) < 1e-13
    np.testing.assert_allclose(lambda_star(tab), np.abs(tab.values), atol=1e-13)


def test_lambda_star_single_point():
    tab = exponential_sums(ORIGIN, 5)
    np.testing.assert_allclose(lambda_star(tab), 1.0)


def test_work_cap():
    with pytest.raises(ResourceError):
        exponential_sums(fibonacci_pointset(10), 200, cap=10**5)


def test_fourier_coefficients_at_zero():
    spec = HatSpec(2, (0.3, 0.1), (0.5, 0.25))
    c = fourier_coefficients(spec, 4)
    assert c[4, 4] == pytest.approx(spec.integral)


def test_fourier_error_single_point():
    spec = HatSpec(2, (0.0,), (0.5,))
    val, tail = quadrature_error_fourier(ORIGIN, spec, 64)
    assert abs(val - 0.25) <= tail
    val2, tail2 = quadrature_error_fourier(ORIGIN, spec, 256)
    assert abs(val2 - 0.25) <= tail2 < tail


def test_fourier_error_zero_weights():
    ps = fibonacci_pointset(7)
    spec = HatSpec(2, (0.2, 0.4), (0.5, 0.25))
    res = quadrature_error_fourier(ps, spec, 16, weights=np.zeros(ps.m))
    assert res.value == -spec.integral
    assert res.tail_bound == 0.0


def test_fibonacci_bracket_at_centre():
    ps = fibonacci_pointset(10)
    spec = HatSpec(2, (0.0, 0.0), (0.5, 0.5))
    res = quadrature_error_fourier(ps, spec, 128)
    assert abs(quadrature_error_spatial(ps, spec) - res.value) <= res.tail_bound
    assert abs(res.imag) <= 1e-10


def test_fourier_needs_r_at_least_two():
    with pytest.raises(ArgumentError):
        quadrature_error_fourier(ORIGIN, HatSpec(1, (0.0,), (0.5,)), 8)


@settings(max_examples=40, deadline=None)
@given(
    r=st.integers(2, 4),
    z=st.tuples(st.floats(0, 1), st.floats(0, 1)),
    u=st.tuples(st.floats(0.02, 0.5), st.floats(0.02, 0.5)),
    K=st.sampled_from([8, 32, 64]),
)
def test_bracket_property(r, z, u, K):
    ps = periodized_frolov_pointset(2, 4)
    spec = HatSpec(r, z, u)
    res = quadrature_error_fourier(ps, spec, K)
    assert abs(quadrature_error_spatial(ps, spec) - res.value) <= res.tail_bound


def test_table_reuse_with_larger_cutoff():
    ps = fibonacci_pointset(8)
    spec = HatSpec(2, (0.1, 0.6), (0.3, 0.2))
    big = exponential_sums(ps, 40)
    a = quadrature_error_fourier(ps, spec, 20, table=big)
    b = quadrature_error_fourier(ps, spec, 20)
    assert a.value == pytest.approx(b.value, abs=1e-15)


def test_lower_bound_examples():
    val, _ = lower_bound_functional(exponential_sums(ORIGIN, 2), 2)
    assert val == pytest.approx(2.5, abs=1e-14)
    zero = ORIGIN.with_weights([0.0])
    assert lower_bound_functional(exponential_sums(zero, 4), 2) == (0.0, 0.0)
    with pytest.raises(ArgumentError):
        lower_bound_functional(exponential_sums(ORIGIN, 2), 1)


def test_lower_bound_tail_brackets_larger_cutoff():
    ps = fibonacci_pointset(8)
    v_small, tail = lower_bound_functional(exponential_sums(ps, 16), 2)
    v_big, _ = lower_bound_functional(exponential_sums(ps, 128), 2)
    assert v_small <= v_big <= v_small + tail


def test_lower_bound_fibonacci_55_positive():
    ps = fibonacci_pointset(10)
    val, _ = lower_bound_functional(exponential_sums(ps, 256), 2)
    m = ps.m
    assert val / (m**-2 * math.log(m)) > 0


def sigma_brute(n, u, r):
    total = 0.0
    for s in itertools.product(range(n + 1), repeat=len(u)):
        if sum(s) == n:
            x = np.array([2.0**sj * uj for sj, uj in zip(s, u)])
            total += np.prod(np.minimum(x ** (r / 2), x ** (-r / 2)))
    return total


def test_sigma_examples():
    assert sigma_r(0, (0.5, 0.5), 2) == pytest.approx(0.25)
    x = 2.0**5 * 0.1
    assert sigma_r(5, 0.1, 3) == pytest.approx(min(x**1.5, x**-1.5))
    for n in [0, 3, 9]:
        assert sigma_r(n, (0.3, 0.05, 0.4), 2) == pytest.approx(sigma_brute(n, (0.3, 0.05, 0.4), 2), rel=1e-12)
    with pytest.raises(ArgumentError):
        sigma_r(61, 0.5, 2)


@pytest.mark.parametrize("u", [(0.5, 0.5), (0.1, 0.3), (0.02, 0.4)])
def test_sigma_decay_shape(u):
    pr = math.prod(u)
    ratios = [
        sigma_r(n, u, 2) / (math.log(2 ** (n + 1) * pr) / (2**n * pr))
        for n in range(31)
        if 2**n * pr >= 1
    ]
    assert max(ratios) <= 4
    assert min(ratios) > 0

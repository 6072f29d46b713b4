import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cdshift.series import (
    CenterMismatchError,
    ScalarSeries,
    UnitDivisionError,
    VectorSeries,
    root_test_radius,
    series_div,
    series_eval,
    series_inner,
    series_mul,
)


def _random_unit_series(rng, K, center=0.0):
    # |c_k| <= 2^-k keeps the series zero-free on the unit disc, so division is well conditioned
    u = np.sqrt(rng.uniform(size=K + 1)) * np.exp(2j * np.pi * rng.uniform(size=K + 1))
    c = u * 0.5 ** np.arange(K + 1)
    c[0] = 1.0
    return ScalarSeries(c, center)


def test_geometric_inverse():
    one = ScalarSeries.constant(1.0, 10)
    q = series_div(one, ScalarSeries.polynomial([1, -1], 10))
    np.testing.assert_allclose(q.coefficients, np.ones(11))


def test_product_truncates_at_shorter_order():
    a = ScalarSeries.polynomial([1, 1], 3)
    b = ScalarSeries.polynomial([1, 1], 5)
    p = series_mul(a, b)
    assert p.order == 3
    np.testing.assert_allclose(p.coefficients, [1, 2, 1, 0])


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**31 - 1), st.integers(1, 40))
def test_mul_div_roundtrip(seed, K):
    rng = np.random.default_rng(seed)
    a, b = _random_unit_series(rng, K), _random_unit_series(rng, K)
    back = series_div(series_mul(a, b), b)
    assert np.max(np.abs(back.coefficients - a.coefficients)) <= 1e-12


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**31 - 1), st.complex_numbers(max_magnitude=10, allow_nan=False, allow_infinity=False))
def test_series_inner_is_conjugate_linear_in_v(seed, c):
    rng = np.random.default_rng(seed)
    f = rng.normal(size=(6, 5)) + 1j * rng.normal(size=(6, 5))
    v = rng.normal(size=5) + 1j * rng.normal(size=5)
    w = rng.normal(size=5) + 1j * rng.normal(size=5)
    lam = VectorSeries(f)
    lhs = series_inner(lam, c * v + w).coefficients
    rhs = np.conj(c) * series_inner(lam, v).coefficients + series_inner(lam, w).coefficients
    assert np.max(np.abs(lhs - rhs)) <= 1e-12 * (1 + np.max(np.abs(lhs)))


def test_series_inner_coefficients():
    f = np.array([[1, 0], [0, 1j]])
    s = series_inner(VectorSeries(f), np.array([1, 1]))
    np.testing.assert_array_equal(s.coefficients, [1, 1j])


def test_vector_series_scalar_product():
    h = ScalarSeries.polynomial([1, 1], 2)
    f = VectorSeries(np.eye(3))
    p = series_mul(h, f)
    np.testing.assert_array_equal(p.coefficients, [[1, 0, 0], [1, 1, 0], [0, 1, 1]])


def test_center_mismatch_and_zero_constant_term():
    with pytest.raises(CenterMismatchError):
        series_mul(ScalarSeries.constant(1, 3, 0.0), ScalarSeries.constant(1, 3, 1.0))
    with pytest.raises(UnitDivisionError):
        series_div(ScalarSeries.constant(1, 3), ScalarSeries.polynomial([0, 1], 3))


def test_root_test_radius_of_geometric_coefficients():
    s = ScalarSeries(2.0 ** -np.arange(41))
    assert abs(root_test_radius(s) - 2.0) < 1e-12


def test_eval_tail_bound_contains_true_error():
    K = 30
    s = ScalarSeries(np.ones(K + 1))
    for z in (0.2, 0.5j, -0.7):
        v = series_eval(s, z)
        assert not v.out_of_radius
        assert abs(v.value - 1 / (1 - z)) <= v.tail_bound


def test_eval_outside_radius_flagged():
    v = series_eval(ScalarSeries(np.ones(11)), 1.5)
    assert v.out_of_radius and np.isinf(v.tail_bound)


def test_eval_at_center_is_exact():
    v = series_eval(ScalarSeries(np.arange(1, 5), 0.5), 0.5)
    assert v.value == 1 and v.tail_bound == 0.0

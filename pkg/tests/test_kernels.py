import math

import mpmath
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from fracdiffeq.exceptions import DomainError, UsageError
from fracdiffeq.kernels import (
    FracOrder,
    cesaro_kernel,
    conv,
    forward_diff,
    mittag_leffler,
    ztrans_partial,
)

orders = st.floats(min_value=0.05, max_value=3.0)

# 50-digit reference values
K15_AT_100 = 11.3260442808605408716963
ML_15_15_03 = 1.286346013805305768918166


def test_kernel_first_entries():
    for a in (0.3, 1.0, 1.5, 2.7):
        k = cesaro_kernel(a, 5)
        assert k[0] == 1.0
        assert k[1] == pytest.approx(a, rel=1e-15)


def test_kernel_order_two_is_n_plus_one():
    np.testing.assert_array_equal(cesaro_kernel(2.0, 30), np.arange(1, 32, dtype=float))


def test_kernel_vs_log_gamma_and_mpmath():
    k = cesaro_kernel(1.5, 100)
    direct = math.exp(math.lgamma(101.5) - math.lgamma(1.5) - math.lgamma(101))
    assert abs(k[100] / direct - 1) <= 1e-13
    assert abs(k[100] / K15_AT_100 - 1) <= 1e-14


def test_kernel_allows_negative_order_above_minus_one():
    k = cesaro_kernel(-0.5, 10)
    ref = [float(mpmath.rf(-0.5, n) / mpmath.factorial(n)) for n in range(11)]
    np.testing.assert_allclose(k, ref, rtol=1e-14)


def test_kernel_rejects_bad_input():
    with pytest.raises(UsageError):
        cesaro_kernel(1.5, -1)
    with pytest.raises(DomainError):
        cesaro_kernel(float("nan"), 3)


@pytest.mark.parametrize("a", [0.3, 0.7, 1.5, 1.9])
@pytest.mark.parametrize("b", [0.3, 0.7, 1.5, 1.9])
def test_semigroup(a, b):
    lhs = conv(cesaro_kernel(a, 200), cesaro_kernel(b, 200))
    ref = cesaro_kernel(a + b, 200)
    assert np.max(np.abs(lhs - ref) / ref) <= 1e-12


@given(orders)
def test_asymptotics(a):
    n = np.arange(50, 501)
    k = cesaro_kernel(a, 500)[50:]
    err = np.abs(k * math.gamma(a) / n ** (a - 1) - 1)
    # error is O(1/n) with a constant near |a (a-1)| / 2
    C = float(np.max(err * n))
    assert math.isfinite(C) and C <= abs(a * (a - 1)) / 2 + 0.1


def test_conv_identity_and_bruteforce(rng):
    v = rng.standard_normal((65, 3))
    delta = np.zeros(65)
    delta[0] = 1
    np.testing.assert_array_equal(conv(delta, v), v)
    u = rng.standard_normal(65)
    w = rng.standard_normal(65)
    brute = np.array([sum(u[j] * w[n - j] for j in range(n + 1)) for n in range(65)])
    np.testing.assert_allclose(conv(u, w), brute, rtol=1e-12, atol=1e-12)


@given(st.integers(min_value=0, max_value=2**31 - 1))
def test_conv_commutative_associative(seed):
    r = np.random.default_rng(seed)
    u, v, w = r.standard_normal((3, 33))
    np.testing.assert_allclose(conv(u, v), conv(v, u), rtol=1e-12, atol=1e-12)
    lhs, rhs = conv(conv(u, v), w), conv(u, conv(v, w))
    scale = np.max(np.abs(lhs))
    assert np.max(np.abs(lhs - rhs)) <= 1e-12 * scale * 33


def test_conv_length_mismatch():
    with pytest.raises(UsageError):
        conv(np.ones(3), np.ones(4))


def test_generating_function():
    for a in (0.3, 0.7, 1.5, 1.9):
        for z in (0.2, 0.5, -0.5):
            s = ztrans_partial(cesaro_kernel(a, 200), 1.0 / z, 200)
            assert abs(s * (1 - z) ** a - 1) <= 1e-10


def test_ztrans_delta_and_product(rng):
    delta = np.zeros(40)
    delta[0] = 1
    assert ztrans_partial(delta, 2.5) == 1.0
    n = np.arange(81)
    u = 0.5**n * rng.uniform(-1, 1, 81)
    v = 0.6**n * rng.uniform(-1, 1, 81)
    z = 1.5
    lhs = ztrans_partial(conv(u, v), z)
    rhs = ztrans_partial(u, z) * ztrans_partial(v, z)
    # truncation tail decays like n (0.6/1.5)^n; the rest is rounding
    tail = sum(k * (0.6 / 1.5) ** k for k in range(81, 400))
    assert abs(lhs - rhs) <= tail + 1e-15


def test_ztrans_rejects_zero_and_long_truncation():
    with pytest.raises(DomainError):
        ztrans_partial(np.ones(3), 0)
    with pytest.raises(UsageError):
        ztrans_partial(np.ones(3), 2.0, 5)


def test_forward_diff():
    np.testing.assert_array_equal(forward_diff(np.full(10, 3.0), 1), np.zeros(9))
    k = cesaro_kernel(2.5, 30)
    np.testing.assert_allclose(forward_diff(k, 1), cesaro_kernel(1.5, 31)[1:31], rtol=1e-13)


@given(st.integers(0, 2**31 - 1), st.integers(1, 5))
def test_forward_diff_composition(seed, m):
    u = np.random.default_rng(seed).standard_normal(30)
    it = u
    for _ in range(m):
        it = np.diff(it)
    np.testing.assert_allclose(forward_diff(u, m), it, rtol=1e-13, atol=1e-13 * 2**m)


def test_forward_diff_short_sequence():
    with pytest.raises(UsageError):
        forward_diff(np.ones(2), 2)


def test_mittag_leffler_reductions():
    for z in np.linspace(-10, 10, 21):
        assert mittag_leffler(1, 1, z) == pytest.approx(math.exp(z), rel=1e-12)
    for z in (0.1, 1.0, 4.0, 25.0):
        assert mittag_leffler(2, 1, z) == pytest.approx(math.cosh(math.sqrt(z)), rel=1e-13)
    assert mittag_leffler(1.5, 1.5, 0.3) == pytest.approx(ML_15_15_03, rel=1e-14)


def test_mittag_leffler_cancellation_side():
    # e^{-50} needs the extended-precision resummation
    assert mittag_leffler(1, 1, -50) == pytest.approx(math.exp(-50), rel=1e-12)
    ref = float(mpmath.nsum(lambda k: (-30) ** k / mpmath.gamma(1.7 * k + 1.2), [0, mpmath.inf]))
    assert mittag_leffler(1.7, 1.2, -30) == pytest.approx(ref, rel=1e-10, abs=1e-15)
    with pytest.raises(DomainError):
        mittag_leffler(1.5, 1.0, -60)


def test_fracorder():
    a = FracOrder.coerce(1.5)
    assert (a.m, a.gap, a.is_integer) == (2, 0.5, False)
    b = FracOrder.coerce(2)
    assert (b.m, b.gap, b.is_integer) == (2, 0.0, True)
    with pytest.raises(DomainError):
        FracOrder.coerce(0.5).require_solver_range()

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from fracdiffeq.exceptions import DomainError, UsageError
from fracdiffeq.fracdiff import caputo_diff, frac_sum, rl_diff, rl_diff_of_conv
from fracdiffeq.kernels import cesaro_kernel, conv, forward_diff

seeds = st.integers(0, 2**31 - 1)
solver_orders = st.floats(min_value=1.05, max_value=1.95)


def _kernel_direct(a, N):
    # independent of cesaro_kernel: log-Gamma quotient
    from scipy.special import gammaln

    n = np.arange(N + 1)
    return np.exp(gammaln(a + n) - gammaln(a) - gammaln(n + 1))


def _binom_diff(w, m):
    from math import comb

    return np.array([sum((-1) ** (m - j) * comb(m, j) * w[n + j] for j in range(m + 1))
                     for n in range(len(w) - m)])


def test_frac_sum_delta_and_kernel():
    x = np.array([1.0, -2.0, 0.5])
    delta = np.zeros((21, 3))
    delta[0] = x
    np.testing.assert_allclose(frac_sum(0.7, delta), np.outer(cesaro_kernel(0.7, 20), x))
    np.testing.assert_allclose(frac_sum(0.6, cesaro_kernel(1.3, 40)), cesaro_kernel(1.9, 40),
                               rtol=1e-12)


def test_frac_sum_bruteforce(rng):
    u = rng.standard_normal(49)
    k = _kernel_direct(0.5, 48)
    brute = np.array([sum(k[n - j] * u[j] for j in range(n + 1)) for n in range(49)])
    np.testing.assert_allclose(frac_sum(0.5, u), brute, rtol=1e-12, atol=1e-12)


def test_rl_of_kernel():
    a, b = 1.5, 3.0
    N = 40
    rl = rl_diff(a, cesaro_kernel(b, N))
    ref = cesaro_kernel(b - a, N)[2:]
    assert np.max(np.abs(rl / ref - 1)) <= 1e-12


def test_rl_of_constant():
    c = 2.5
    rl = rl_diff(1.3, np.full(31, c))
    np.testing.assert_allclose(rl, c * cesaro_kernel(-0.3, 31)[2:31], rtol=1e-12, atol=1e-15)


def test_rl_bruteforce(rng):
    u = rng.standard_normal(41)
    k = _kernel_direct(0.5, 40)
    s = np.array([sum(k[n - j] * u[j] for j in range(n + 1)) for n in range(41)])
    ref = _binom_diff(s, 2)
    np.testing.assert_allclose(rl_diff(1.5, u), ref, rtol=1e-11, atol=1e-11)


def test_caputo_bruteforce_and_affine(rng):
    u = rng.standard_normal(41)
    d2 = _binom_diff(u, 2)
    k = _kernel_direct(0.5, 38)
    ref = np.array([sum(k[n - j] * d2[j] for j in range(n + 1)) for n in range(39)])
    np.testing.assert_allclose(caputo_diff(1.5, u), ref, rtol=1e-11, atol=1e-11)
    affine = 3.0 - 0.25 * np.arange(30)
    np.testing.assert_allclose(caputo_diff(1.7, affine), 0.0, atol=1e-13)


@pytest.mark.parametrize("a", [1.1, 1.5, 1.9])
@pytest.mark.parametrize("d", [1, 3])
def test_caputo_rl_relation(a, d, rng):
    for _ in range(17):
        u = rng.standard_normal((41, d))
        k = cesaro_kernel(2 - a, 41)
        rhs = rl_diff(a, u) - k[1:40, None] * (u[1] - 2 * u[0]) - k[2:41, None] * u[0]
        scale = np.maximum(np.abs(rhs), np.max(np.abs(u)))
        assert np.max(np.abs(caputo_diff(a, u) - rhs) / scale) <= 1e-11


@given(seeds, solver_orders)
def test_left_inverse(seed, a):
    # Delta^2 (k^{2-a} * k^a * u)(n) = u(n+2)
    u = np.random.default_rng(seed).standard_normal(33)
    got = rl_diff(a, frac_sum(a, u))
    scale = np.max(np.abs(u))
    assert np.max(np.abs(got - u[2:])) <= 1e-12 * scale * 33


@given(seeds, solver_orders, st.floats(-3, 3), st.floats(-3, 3))
def test_linearity(seed, a, s, t):
    r = np.random.default_rng(seed)
    u, v = r.standard_normal((2, 25))
    for op in (rl_diff, caputo_diff):
        lhs = op(a, s * u + t * v)
        rhs = s * op(a, u) + t * op(a, v)
        assert np.max(np.abs(lhs - rhs)) <= 1e-12 * (1 + np.max(np.abs(rhs)))


def test_order_two_limit(rng):
    u = np.sin(0.3 * np.arange(40))
    near = rl_diff(2 - 1e-8, u)
    exact = forward_diff(u, 2)
    assert np.max(np.abs(near - exact)) <= 1e-6 * np.max(np.abs(exact))
    np.testing.assert_array_equal(rl_diff(2, u), exact)


def test_convolution_rule_delta_and_random(rng):
    v = rng.standard_normal(33)
    delta = np.zeros(33)
    delta[0] = 1
    np.testing.assert_allclose(rl_diff_of_conv(1.5, delta, v), rl_diff(1.5, v), rtol=1e-12,
                               atol=1e-13)
    k = cesaro_kernel(1.5, 32)
    np.testing.assert_allclose(rl_diff_of_conv(1.5, k, v), rl_diff(1.5, conv(k, v)),
                               rtol=1e-12, atol=1e-12)
    for a in (1.2, 1.5, 1.9):
        u, w = rng.standard_normal((2, 33))
        assert np.max(np.abs(rl_diff_of_conv(a, u, w) - rl_diff(a, conv(u, w)))) <= 1e-12


def test_convolution_rule_vector_v(rng):
    u = rng.standard_normal(20)
    v = rng.standard_normal((20, 3))
    np.testing.assert_allclose(rl_diff_of_conv(1.4, u, v), rl_diff(1.4, conv(u, v)), atol=1e-12)


def test_errors():
    with pytest.raises(DomainError):
        rl_diff_of_conv(0.5, np.ones(10), np.ones(10))
    with pytest.raises(UsageError):
        rl_diff(1.5, np.ones(2))
    with pytest.raises(UsageError):
        rl_diff_of_conv(1.5, np.ones(10), np.ones(11))
    with pytest.raises(DomainError):
        frac_sum(1.5, [1.0, np.nan])

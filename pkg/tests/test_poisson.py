import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from fracdiffeq.exceptions import DomainError, InadmissibleGrowthError, UsageError
from fracdiffeq.kernels import cesaro_kernel, conv
from fracdiffeq.linop import DenseOperator, DiagonalOperator
from fracdiffeq.poisson import (
    QuadratureSpec,
    TimeFunction,
    exp_function,
    galpha_function,
    parse_function,
    poisson_inner,
    poisson_mass,
    poisson_ml_closed,
    poisson_transform,
    poisson_weight,
    subordinate_family,
    verify_sampling_identity,
)
from fracdiffeq.resolvent import build_recurrence, build_series

# poisson_ml_closed(1.5, 1.5, 0.3, n), 25-digit mpmath sums
PML = {0: 1.428571428571428571428571, 10: 688.7782993452863211558134,
       40: 38302876497.87240161814503}


def test_weight_values():
    assert poisson_weight(0, 0.0) == 1.0
    assert poisson_weight(3, 0.0) == 0.0
    assert poisson_weight(2, 1.5) == pytest.approx(math.exp(-1.5) * 1.5**2 / 2, rel=1e-15)
    with pytest.raises(DomainError):
        poisson_weight(1, -1.0)


@pytest.mark.parametrize("n", [0, 1, 5, 20, 60, 150])
def test_mass_is_one(n):
    assert abs(poisson_mass(n) - 1.0) <= 1e-12


def test_inner_products():
    worst = 0.0
    for n in range(21):
        for m in range(21):
            ref = math.exp(math.lgamma(n + m + 1) - math.lgamma(n + 1) - math.lgamma(m + 1)
                           - (n + m + 1) * math.log(2))
            worst = max(worst, abs(poisson_inner(n, m) - ref) / ref)
    assert worst <= 1e-12
    assert poisson_inner(3, 5) == poisson_inner(5, 3)


@pytest.mark.parametrize("lam", [-0.5, 0.0, 0.5, 2.0])
def test_exponential(lam):
    n = np.arange(40)
    got = poisson_transform(exp_function(lam), n)
    np.testing.assert_allclose(got, (1.0 + lam) ** -(n + 1.0), rtol=1e-12)


@pytest.mark.parametrize("a", [0.5, 1.0, 1.5, 2.5])
def test_galpha_gives_kernel(a):
    n = np.arange(40)
    np.testing.assert_allclose(poisson_transform(galpha_function(a), n),
                               cesaro_kernel(a, 39), rtol=1e-12)


def test_ml_frozen_and_quadrature():
    for n, ref in PML.items():
        assert poisson_ml_closed(1.5, 1.5, 0.3, n) == pytest.approx(ref, rel=1e-13)
    for a, b, lam in [(1.5, 1.5, 0.5), (1.8, 2.0, 0.3), (1.2, 1.0, 0.25)]:
        n = np.arange(0, 31, 5)
        quad = poisson_transform(parse_function(f"ml:{a},{b},{lam}"), n)
        closed = [poisson_ml_closed(a, b, lam, int(k)) for k in n]
        np.testing.assert_allclose(quad, closed, rtol=1e-10)
    # negative lambda leaves the z >= -50 range of E_{a,b} on the quadrature window
    assert math.isfinite(poisson_ml_closed(1.5, 1.5, -0.3, 10))
    with pytest.raises(DomainError):
        poisson_transform(parse_function("ml:1.5,1.5,-0.3"), 10)
    assert poisson_ml_closed(1.5, 2.0, 0.0, 7) == pytest.approx(cesaro_kernel(2.0, 7)[7])


def test_parse_function_errors():
    for bad in ("sin:1", "exp:", "ml:1,2", "galpha:x"):
        with pytest.raises(UsageError):
            parse_function(bad)
    with pytest.raises(DomainError):
        parse_function("ml:1.5,1.5,1.2")


def test_growth_rejected():
    with pytest.raises(InadmissibleGrowthError):
        poisson_transform(exp_function(-1.5), 3)
    lying = TimeFunction(lambda t: np.exp(0.5 * t), M=1.0, omega=0.1, name="liar")
    with pytest.raises(InadmissibleGrowthError):
        poisson_transform(lying, 3)


def test_vector_valued():
    psi = TimeFunction(lambda t: np.stack([np.exp(-t), t], axis=1), M=1.0, omega=0.5)
    out = poisson_transform(psi, np.arange(5))
    assert out.shape == (5, 2)
    np.testing.assert_allclose(out[:, 0], 0.5 ** (np.arange(5) + 1.0), rtol=1e-12)
    np.testing.assert_allclose(out[:, 1], np.arange(5) + 1.0, rtol=1e-12)


@given(st.integers(0, 30), st.integers(0, 30))
def test_convolution_homomorphism(i, j):
    lam, mu = i / 10, j / 10
    # e_lam * e_mu in continuous time maps to the discrete convolution
    def fn(t):
        if lam == mu:
            return t * np.exp(-lam * t)
        return np.exp(-mu * t) * -np.expm1(-(lam - mu) * t) / (lam - mu)

    psi = TimeFunction(fn, M=2.0, omega=0.5)
    n = np.arange(25)
    lhs = poisson_transform(psi, n)
    rhs = conv((1 + lam) ** -(n + 1.0), (1 + mu) ** -(n + 1.0))
    np.testing.assert_allclose(lhs, rhs, rtol=1e-10, atol=1e-15)


@given(st.floats(0.1, 3.0))
def test_positivity_and_bound(lam):
    # 0 <= psi <= 1 implies 0 <= P(psi) <= 1
    psi = TimeFunction(lambda t: 1.0 / (1.0 + lam * t), M=1.0, omega=0.0)
    vals = poisson_transform(psi, np.arange(30))
    assert np.all(vals > 0) and np.all(vals <= 1.0 + 1e-12)
    assert np.all(np.diff(vals) < 0)


def test_z_laplace_bridge():
    # sum_n P(g_a)(n) z^-n = L(g_a)(1 - 1/z) = (1 - 1/z)^-a
    a, z = 1.5, 3.0
    vals = poisson_transform(galpha_function(a), np.arange(120))
    total = float(np.sum(vals * z ** -np.arange(120.0)))
    assert total == pytest.approx((1 - 1 / z) ** -a, rel=1e-12)


def test_quadrature_spec():
    q = QuadratureSpec(tail_tol=1e-20)
    assert q.tail_mass(10) <= 1e-20 * (1 + 1e-12)
    assert QuadratureSpec().tail_mass(30) <= 1e-14
    with pytest.raises(UsageError):
        QuadratureSpec(panels_per_unit=0)
    t, w = QuadratureSpec().nodes(5.0, gamma=-0.5)
    assert float(np.sum(w * t**-0.5)) == pytest.approx(2 * math.sqrt(5.0), rel=1e-13)


def test_sampling_identity():
    for b, a in [(2.5, 1.5), (3.0, 1.2), (2.2, 1.9)]:
        assert verify_sampling_identity(b, a, 30)["deviation"] <= 1e-12
        assert verify_sampling_identity(b, a, 30, route="quadrature")["deviation"] <= 1e-9
    with pytest.raises(DomainError):
        verify_sampling_identity(1.0, 1.5, 10)


def test_subordinate_family_matches_recurrence(rng):
    M = rng.standard_normal((3, 3))
    A = DenseOperator(0.3 * M / np.linalg.norm(M, 2))
    F = subordinate_family(A, 1.6, 20)
    G = build_recurrence(A, 1.6, 20)
    rel = np.linalg.norm(F.table - G.table, axis=(1, 2)) / G.norms()
    assert np.max(rel) <= 1e-11
    np.testing.assert_array_equal(F.table, build_series(A, 1.6, 20).table)
    s04 = subordinate_family(DiagonalOperator([0.4]), 1.5, 40)
    r04 = build_recurrence(DiagonalOperator([0.4]), 1.5, 40)
    np.testing.assert_allclose(s04.table, r04.table, rtol=1e-10)
    m = [0.1, 0.35, 0.7]
    D3 = subordinate_family(DiagonalOperator(m), 1.7, 25)
    for i, mi in enumerate(m):
        ref = [poisson_ml_closed(1.7, 1.7, mi, n) for n in range(26)]
        np.testing.assert_allclose(D3.table[:, i, i], ref, rtol=1e-12)
    D = DiagonalOperator([0.2, 0.05])
    Q = subordinate_family(D, 1.6, 15, route="quadrature")
    np.testing.assert_allclose(Q.table, build_recurrence(D, 1.6, 15).table, rtol=1e-10,
                               atol=1e-14)
    with pytest.raises(DomainError):
        subordinate_family(DiagonalOperator([1.2]), 1.6, 5)
    with pytest.raises(UsageError):
        subordinate_family(A, 1.6, 5, route="quadrature")

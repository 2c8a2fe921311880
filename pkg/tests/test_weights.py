import math
from fractions import Fraction

import numpy as np
import pytest

from fracdiffeq.exceptions import DomainError, UsageError
from fracdiffeq.weights import admissibility, weighted_norm


def test_n_factorial_constant():
    W = admissibility("n_factorial", 50)
    assert W.H == 1 / 18
    assert W.argmax == 3
    assert max(W.exact_ratios()) == Fraction(1, 18)
    assert W.admissible
    assert list(W.zero_set) == [0]


def test_n_factorial_ratios_closed_form():
    # sum_{k<=n-2} k k! = (n-1)! - 1
    W = admissibility("n_factorial", 30)
    for n in range(2, 31):
        ref = Fraction(math.factorial(n - 1) - 1, n * math.factorial(n))
        assert W.exact_ratios()[n] == ref
        assert W.ratios[n] == float(ref)


def test_factorial_and_geometric():
    W = admissibility("factorial", 40)
    assert W.H == 0.5 and W.argmax == 2 and W.admissible
    G = admissibility("geometric", 40, param=2.0)
    assert not G.admissible
    assert G.ratios[40] == pytest.approx(0.5, rel=1e-10)
    with pytest.raises(DomainError):
        admissibility("geometric", 10)


def test_custom_weight_matches_builtin():
    vals = np.array([k * math.factorial(k) for k in range(21)], dtype=float)
    C = admissibility("custom", 20, values=vals)
    np.testing.assert_allclose(C.ratios, admissibility("n_factorial", 20).ratios, rtol=1e-12)
    with pytest.raises(UsageError):
        C.exact_weights()
    with pytest.raises(UsageError):
        admissibility("custom", 20, values=vals[:5])
    with pytest.raises(DomainError):
        admissibility("custom", 4, values=[1, -1, 1, 1, 1])
    with pytest.raises(UsageError):
        admissibility("bogus", 10)
    with pytest.raises(UsageError):
        admissibility("factorial", 3)


def test_weighted_norm():
    W = admissibility("n_factorial", 10)
    u = np.zeros((11, 2))
    assert weighted_norm(u, W) == 0.0
    u[3] = [3.0, 4.0]
    assert weighted_norm(u, W) == pytest.approx(5.0 / 18.0, rel=1e-14)
    u[0] = [1.0, 0.0]
    assert weighted_norm(u, W) == math.inf
    with pytest.raises(UsageError):
        weighted_norm(np.zeros((12, 2)), W)
    v = np.zeros((11, 1))
    v[2, 0] = -2.0
    assert weighted_norm(v, W, norm=lambda x: 2 * abs(x[0])) == pytest.approx(1.0)


def test_weighted_norm_of_factorially_growing_sequence_is_finite():
    W = admissibility("n_factorial", 60)
    n = np.arange(61, dtype=float)
    u = np.exp(0.5 * n)[:, None] * n[:, None]
    assert math.isfinite(weighted_norm(u, W))

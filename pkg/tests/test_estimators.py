import doctest

import numpy as np
import pytest
from sklearn.base import clone

import fracdiffeq.estimators as est
from fracdiffeq.estimators import (
    CaputoDifference,
    DiscreteResolvent,
    FractionalSum,
    RiemannLiouvilleDifference,
)
from fracdiffeq.fracdiff import caputo_diff, frac_sum, rl_diff


def test_module_doctest():
    assert doctest.testmod(est).failed == 0


def test_transformers_match_functions(rng):
    X = rng.standard_normal((12, 3))
    for cls, fn in ((FractionalSum, frac_sum), (RiemannLiouvilleDifference, rl_diff),
                    (CaputoDifference, caputo_diff)):
        t = cls(alpha=1.4).fit(X)
        assert t.n_features_in_ == 3 and t.horizon_ == 11
        np.testing.assert_array_equal(t.transform(X), fn(1.4, X))
        c = clone(t)
        assert c.get_params() == {"alpha": 1.4}


def test_transform_requires_fit():
    from sklearn.exceptions import NotFittedError

    with pytest.raises(NotFittedError):
        FractionalSum().transform(np.ones(3))


def test_discrete_resolvent(rng):
    A = 0.2 * np.eye(2)
    r = DiscreteResolvent(alpha=1.5, horizon=20).fit(A)
    assert r.n_features_in_ == 2
    X = rng.standard_normal((4, 2))
    np.testing.assert_allclose(r.transform(X), X @ r.family_.table[-1].T)
    u = r.solve([1.0, 0.0], [0.0, 1.0])
    assert u.shape == (21, 2)
    assert -1e-10 <= r.score(u) <= 0.0
    assert clone(r).get_params() == {"alpha": 1.5, "horizon": 20, "method": "auto"}
    with pytest.raises(ValueError):
        DiscreteResolvent(method="magic").fit(A)
    with pytest.raises(ValueError):
        r.transform(np.ones((1, 3)))

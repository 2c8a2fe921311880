"""scikit-learn style wrappers around the functional core.

The difference operators are stateless transformers: ``fit`` only records
the input width, ``transform`` maps a sequence (time on axis 0) to its
fractional sum or difference.  :class:`DiscreteResolvent` is fitted to an
operator and then solves initial value problems with it.

>>> import numpy as np
>>> FractionalSum(alpha=0.5).fit_transform(np.ones(4)).round(4).tolist()
[1.0, 1.5, 1.875, 2.1875]
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from ._validation import check_horizon, check_sequence, check_vector
from .fracdiff import caputo_diff, frac_sum, rl_diff
from .kernels import FracOrder
from .linop import DenseOperator, LinOperator
from .resolvent import METHODS, build_family
from .solver import ProblemSpec, residual, solve

__all__ = [
    "FractionalSum",
    "RiemannLiouvilleDifference",
    "CaputoDifference",
    "DiscreteResolvent",
]


class _SequenceTransformer(TransformerMixin, BaseEstimator):
    def __init__(self, alpha: float = 1.5):
        self.alpha = alpha

    def _order(self) -> FracOrder:
        return FracOrder.coerce(self.alpha)

    def fit(self, X, y=None):
        X = check_sequence(X, name="X")
        self._order()
        self.n_features_in_ = 1 if X.ndim == 1 else int(np.prod(X.shape[1:]))
        self.horizon_ = X.shape[0] - 1
        return self

    def transform(self, X):
        check_is_fitted(self, "n_features_in_")
        return self._apply(self._order(), check_sequence(X, name="X"))


class FractionalSum(_SequenceTransformer):
    """Fractional sum ``(k^alpha * X)(n)``; output keeps the input shape."""

    def _apply(self, a, X):
        return frac_sum(a, X)


class RiemannLiouvilleDifference(_SequenceTransformer):
    """Riemann-Liouville difference; the output is ``m = ceil(alpha)`` rows shorter."""

    def _apply(self, a, X):
        return rl_diff(a, X)


class CaputoDifference(_SequenceTransformer):
    """Caputo difference; the output is ``m = ceil(alpha)`` rows shorter."""

    def _apply(self, a, X):
        return caputo_diff(a, X)


class DiscreteResolvent(BaseEstimator):
    """Resolvent family of a fitted operator.

    Parameters
    ----------
    alpha : float
        Order in ``(1, 2]``.
    horizon : int
        Largest index ``N`` of the family.
    method : {"auto", "recurrence", "series", "beta"}

    Attributes
    ----------
    family_ : ResolventFamily
    sup_norm_ : float
    n_features_in_ : int
        Operator dimension.
    """

    def __init__(self, alpha: float = 1.5, horizon: int = 50, method: str = "auto"):
        self.alpha = alpha
        self.horizon = horizon
        self.method = method

    def fit(self, A, y=None):
        if self.method not in ("auto",) + METHODS:
            raise ValueError(f"unknown method {self.method!r}")
        FracOrder.coerce(self.alpha).require_solver_range()
        N = check_horizon(self.horizon, name="horizon", minimum=1)
        if not isinstance(A, LinOperator):
            A = DenseOperator(np.atleast_2d(np.asarray(A, dtype=float)))
        self.operator_ = A
        self.family_ = build_family(A, self.alpha, N, self.method)
        self.sup_norm_ = self.family_.sup_norm
        self.n_features_in_ = A.dim
        return self

    def transform(self, X):
        """Propagate each row of ``X``: returns ``S(N) x`` per row."""
        check_is_fitted(self, "family_")
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if X.shape[1] != self.n_features_in_:
            raise ValueError(f"X has {X.shape[1]} columns, expected {self.n_features_in_}")
        return X @ self.family_.table[-1].T

    def solve(self, u0, u1, forcing=None):
        """Solution ``u(0..N)`` of ``Delta^alpha u(n) = A u(n+2) + f(n, u(n))``."""
        check_is_fitted(self, "family_")
        d = self.n_features_in_
        P = ProblemSpec(self.alpha, self.operator_, check_vector(u0, d, "u0"),
                        check_vector(u1, d, "u1"), self.family_.N, forcing)
        self.last_problem_ = P
        return solve(P, self.family_)

    def score(self, u) -> float:
        """Negative residual of ``u`` for the last solved problem."""
        check_is_fitted(self, "last_problem_")
        return -residual(u, self.last_problem_)

r"""Second-order problems whose right side is not of the form ``A u(n+2)``.

Shifted form
    :math:`\Delta^2 u(n) = (B + 2\gamma) u(n+1) + g(n, u(n))` becomes
    :math:`\Delta^2 u(n) = T u(n+2) + T u(n) + (I-T) g(n, u(n))` with
    :math:`T = I - 2(2(1+\gamma) + B)^{-1}`.
Delayed form
    :math:`\Delta^2 u(n) = B u(n) + g(n+1, u(n+1))` becomes
    :math:`\Delta^2 u(n) = T u(n+2) - 2T u(n+1) + (I-T) g(n+1, u(n+1))` with
    :math:`T = I - (I - B)^{-1}`.

Both canonical forms are solved with the ``alpha = 2`` family of ``T``.  The
extra ``T`` terms depend on ``u(n)`` or ``u(n+1)`` only, so the convolution
recursion stays explicit.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from ._validation import check_horizon, check_vector
from .exceptions import DomainError, UsageError
from .kernels import forward_diff
from .linop import DenseOperator, DiagonalOperator, LinOperator
from .resolvent import ResolventFamily, build_family
from .solver import ProblemSpec, StateForcing, _homogeneous, causal_solve

__all__ = [
    "reformulate_shifted",
    "reformulate_delayed",
    "ReformulatedSolution",
    "solve_shifted",
    "solve_delayed",
]


def _wrap(B: LinOperator, M: np.ndarray) -> LinOperator:
    # keep the diagonal representation when B has it
    if isinstance(B, DiagonalOperator):
        return DiagonalOperator(np.diag(M).copy(), B.grid)
    return DenseOperator(M)


def reformulate_shifted(B: LinOperator, shift: float = 0.0) -> LinOperator:
    """``T = I - 2 (2(1+shift) + B)^{-1}``, materialized by ``d`` resolvent solves.

    Returns a diagonal operator when ``B`` is diagonal, a dense one otherwise.
    """
    shift = float(shift)
    if not shift >= 0:
        raise DomainError(f"shift must be >= 0, got {shift}")
    d = B.dim
    # (c + B)^{-1} = -((-c) I - B)^{-1}
    R = -B.resolve(-2.0 * (1.0 + shift), np.eye(d))
    return _wrap(B, np.eye(d) - 2.0 * R)


def reformulate_delayed(B: LinOperator) -> LinOperator:
    """``T = I - (I - B)^{-1}``."""
    d = B.dim
    return _wrap(B, np.eye(d) - B.resolve(1.0, np.eye(d)))


@dataclass
class ReformulatedSolution:
    """Solution of a reformulated problem and its residuals.

    ``original_residual`` measures the equation as first posed;
    ``canonical_residual`` the ``T``-form that was actually solved.
    """

    u: np.ndarray
    T: LinOperator
    family: ResolventFamily
    original_residual: float
    canonical_residual: float
    meta: dict = field(default_factory=dict)


def _rel(res: np.ndarray, u: np.ndarray) -> float:
    scale = max(1.0, float(np.max(np.linalg.norm(u, axis=1))))
    return float(np.max(np.linalg.norm(res, axis=1))) / scale


def _zero_g(n, x):
    return np.zeros_like(x)


def _setup(B, u0, u1, N):
    N = check_horizon(N, minimum=4)
    return N, check_vector(u0, B.dim, "u0"), check_vector(u1, B.dim, "u1")


def solve_shifted(B: LinOperator, u0, u1, N: int, *, shift: float = 0.0,
                  g: Callable | None = None, method: str = "auto") -> ReformulatedSolution:
    """Solve ``Delta^2 u(n) = (B + 2 shift) u(n+1) + g(n, u(n))``."""
    N, u0, u1 = _setup(B, u0, u1, N)
    g = g or _zero_g
    T = reformulate_shifted(B, shift)
    F = build_family(T, 2.0, N, method)
    I_T = lambda x: x - T.apply(x)  # noqa: E731

    def canonical_f(n, x):
        return T.apply(x) + I_T(g(n, x))

    tnorm = T.norm_estimate()
    P = ProblemSpec(2.0, T, u0, u1, N, StateForcing(canonical_f, tnorm, name="shifted"))
    u = causal_solve(F, _homogeneous(P, F), lambda k, v: canonical_f(k, v[k]))
    # original equation
    Bu = B.apply(u[1:N].T).T + 2.0 * shift * u[1:N]
    gs = np.array([g(n, u[n]) for n in range(N - 1)])
    orig = _rel(forward_diff(u, 2) - Bu - gs, u)
    canon = _rel(forward_diff(u, 2) - T.apply(u[2:].T).T
                 - np.array([canonical_f(n, u[n]) for n in range(N - 1)]), u)
    return ReformulatedSolution(u, T, F, orig, canon, {"shift": shift, "T_norm": tnorm})


def solve_delayed(B: LinOperator, u0, u1, N: int, *, g: Callable | None = None,
                  method: str = "auto") -> ReformulatedSolution:
    """Solve ``Delta^2 u(n) = B u(n) + g(n+1, u(n+1))``."""
    N, u0, u1 = _setup(B, u0, u1, N)
    g = g or _zero_g
    T = reformulate_delayed(B)
    F = build_family(T, 2.0, N, method)

    def forcing(k, v):
        x = v[k + 1]
        gx = g(k + 1, x)
        return -2.0 * T.apply(x) + gx - T.apply(gx)

    P = ProblemSpec(2.0, T, u0, u1, N)
    u = causal_solve(F, _homogeneous(P, F), forcing)
    Bu = B.apply(u[: N - 1].T).T
    gs = np.array([g(n + 1, u[n + 1]) for n in range(N - 1)])
    orig = _rel(forward_diff(u, 2) - Bu - gs, u)
    canon = _rel(forward_diff(u, 2) - T.apply(u[2:].T).T
                 - np.array([forcing(n, u) for n in range(N - 1)]), u)
    if not np.all(np.isfinite(u)):
        raise UsageError("reformulated solution is not finite")
    return ReformulatedSolution(u, T, F, orig, canon, {"T_norm": T.norm_estimate()})

r"""Poisson transformation of continuous-time functions.

.. math::

    \mathcal P(\psi)(n) = \int_0^\infty p_n(t)\,\psi(t)\,dt,
    \qquad p_n(t) = e^{-t}\frac{t^n}{n!}.

Integrals are evaluated by composite 16-point Gauss rules on ``[0, T(n)]``.
On ``[0, 1]`` the panels are geometrically graded toward the origin and the
first panel uses a Gauss-Jacobi rule that absorbs an endpoint factor
``t**gamma`` declared by the integrand; ``[1, T(n)]`` is covered by uniform
Gauss-Legendre panels.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.special import gammaincc, gammainccinv, gammaln, roots_jacobi, roots_legendre

from ._validation import check_horizon
from .exceptions import ConvergenceError, DomainError, InadmissibleGrowthError, UsageError
from .fracdiff import rl_diff
from .kernels import FracOrder, cesaro_kernel, mittag_leffler
from .linop import DiagonalOperator
from .resolvent import ResolventFamily, _prepare, build_series

__all__ = [
    "QuadratureSpec",
    "TimeFunction",
    "poisson_weight",
    "poisson_transform",
    "poisson_mass",
    "poisson_inner",
    "poisson_ml_closed",
    "exp_function",
    "galpha_function",
    "ml_function",
    "parse_function",
    "subordinate_family",
    "verify_sampling_identity",
]

_ORDER = 16
_GL_X, _GL_W = roots_legendre(_ORDER)
# conservative truncation point for tail mass <= 1e-14
_DEFAULT_TAIL = 1e-14


def poisson_weight(n: int, t):
    """``p_n(t) = exp(-t + n log t - lgamma(n+1))`` with ``p_n(0) = [n == 0]``."""
    n = check_horizon(n, name="n")
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr < 0) or not np.all(np.isfinite(t_arr)):
        raise DomainError("the Poisson weight needs finite t >= 0")
    with np.errstate(divide="ignore"):
        logt = np.log(t_arr)
    if n == 0:
        out = np.exp(-t_arr)
    else:
        out = np.where(t_arr > 0, np.exp(-t_arr + n * logt - gammaln(n + 1)), 0.0)
    return float(out) if np.ndim(out) == 0 else out


@dataclass(frozen=True)
class QuadratureSpec:
    """Composite-rule settings.

    Parameters
    ----------
    panels_per_unit : int
        Uniform Gauss-Legendre panels per unit length on ``[1, T]``.
    tail_tol : float
        Bound on the omitted Poisson tail mass beyond ``T``.
    graded_panels : int
        Geometrically graded panels on ``[0, 1]`` (ratio 1/4).
    """

    panels_per_unit: int = 1
    tail_tol: float = _DEFAULT_TAIL
    graded_panels: int = 12

    def __post_init__(self):
        if int(self.panels_per_unit) < 1 or int(self.graded_panels) < 1:
            raise UsageError("panel counts must be positive")
        if not 0 < self.tail_tol < 1:
            raise UsageError("tail_tol must lie in (0, 1)")

    def max_t(self, n: int, omega: float = 0.0) -> float:
        r"""Truncation point ``T(n)`` with Poisson tail mass below ``tail_tol``.

        The default tolerance uses the closed bound
        :math:`n + 40 + 10\sqrt{n+1}`; smaller tolerances invert the
        regularized incomplete Gamma function.  Growth ``e^{\omega t}``
        stretches the window by ``1 / (1 - omega)``.
        """
        if self.tail_tol >= _DEFAULT_TAIL:
            T = n + 40.0 + 10.0 * math.sqrt(n + 1.0)
        else:
            T = max(float(gammainccinv(n + 1, self.tail_tol)), n + 1.0)
        return T / (1.0 - max(omega, 0.0))

    def tail_mass(self, n: int, omega: float = 0.0) -> float:
        """Exact Poisson mass beyond ``max_t`` (for ``omega <= 0``)."""
        return float(gammaincc(n + 1, self.max_t(n, omega)))

    def nodes(self, T: float, gamma: float = 0.0):
        """Nodes and weights on ``[0, T]``; the weights include ``t**-gamma``
        so that ``sum(w * psi(t))`` integrates ``psi = t**gamma * smooth``."""
        if gamma <= -1:
            raise DomainError(f"endpoint exponent must exceed -1, got {gamma}")
        edges = [0.0] + [0.25**k for k in range(self.graded_panels - 1, -1, -1)]
        if T > 1.0:
            count = max(1, math.ceil((T - 1.0) * self.panels_per_unit))
            edges += list(np.linspace(1.0, T, count + 1)[1:])
        ts, ws = [], []
        h0 = edges[1]
        xj, wj = roots_jacobi(_ORDER, 0.0, gamma)
        t0 = 0.5 * h0 * (1.0 + xj)
        ts.append(t0)
        ws.append(wj * (0.5 * h0) ** (gamma + 1.0) * t0 ** (-gamma))
        for lo, hi in zip(edges[1:-1], edges[2:]):
            half = 0.5 * (hi - lo)
            ts.append(lo + half * (1.0 + _GL_X))
            ws.append(half * _GL_W)
        return np.concatenate(ts), np.concatenate(ws)


@dataclass(frozen=True)
class TimeFunction:
    """A function of ``t >= 0`` with a declared growth bound.

    Attributes
    ----------
    fn : callable
        Vectorized: maps a 1-D array of ``t`` to an array whose axis 0
        matches ``t``; trailing axes give vector or matrix values.
    M, omega : float
        Declared bound ``||psi(t)|| <= M exp(omega t)``; ``omega < 1`` is
        required for the transform to converge.
    endpoint_power : float
        ``gamma`` in ``psi(t) ~ t**gamma`` as ``t -> 0``; absorbed by the
        first quadrature panel.
    name : str
    """

    fn: Callable[[np.ndarray], np.ndarray]
    M: float = 1.0
    omega: float = 0.0
    endpoint_power: float = 0.0
    name: str = "psi"

    def __call__(self, t):
        return np.asarray(self.fn(np.atleast_1d(np.asarray(t, dtype=float))), dtype=float)

    def check_growth(self, samples: int = 60, rtol: float = 1e-9) -> None:
        """Spot-check the declared bound on ``t`` in ``[1, 60]``."""
        if not self.omega < 1.0:
            raise InadmissibleGrowthError(
                f"{self.name}: growth rate omega = {self.omega} >= 1, the transform may diverge"
            )
        t = np.linspace(1.0, 60.0, samples)
        vals = self(t).reshape(samples, -1)
        size = np.max(np.abs(vals), axis=1)
        bound = self.M * np.exp(self.omega * t)
        bad = np.nonzero(size > bound * (1.0 + rtol))[0]
        if bad.size:
            i = int(bad[0])
            raise InadmissibleGrowthError(
                f"{self.name}: |psi({t[i]:.6g})| = {size[i]:.6g} exceeds the declared "
                f"bound {bound[i]:.6g}"
            )


def exp_function(lam: float) -> TimeFunction:
    """``e_lambda(t) = exp(-lambda t)``, requires ``lambda > -1``."""
    lam = float(lam)
    return TimeFunction(lambda t: np.exp(-lam * t), 1.0, -lam, 0.0, f"exp:{lam:g}")


def galpha_function(alpha: float) -> TimeFunction:
    """``g_alpha(t) = t**(alpha-1) / Gamma(alpha)``."""
    a = FracOrder.coerce(alpha).alpha
    ga = math.gamma(a)
    # sup over t >= 1 of t**(a-1) exp(-t/2)
    t_star = max(1.0, 2.0 * (a - 1.0))
    M = t_star ** (a - 1.0) * math.exp(-0.5 * t_star) / ga
    return TimeFunction(lambda t: t ** (a - 1.0) / ga, M, 0.5, a - 1.0, f"galpha:{a:g}")


def ml_function(alpha: float, beta: float, lam: float) -> TimeFunction:
    r"""``s(t) = t**(beta-1) E_{alpha,beta}(lam t**alpha)``, ``|lam| < 1``.

    Grows like :math:`\exp(\lambda^{1/\alpha} t)` for ``lam > 0``; the declared
    rate adds a margin of 0.05 and ``M`` is taken from samples on ``[1, 60]``
    with a factor of two.
    """
    a, b, lam = float(alpha), float(beta), float(lam)
    if a <= 0 or b <= 0:
        raise DomainError("Mittag-Leffler parameters must be positive")
    if abs(lam) >= 1:
        raise DomainError(f"need |lambda| < 1, got {lam}")
    omega = (lam ** (1.0 / a) if lam > 0 else 0.0) + 0.05
    ml = np.vectorize(lambda x: mittag_leffler(a, b, x), otypes=[float])

    def fn(t):
        return t ** (b - 1.0) * ml(lam * t**a)

    t = np.linspace(1.0, 60.0, 60)
    M = 2.0 * float(np.max(np.abs(fn(t)) * np.exp(-omega * t)))
    return TimeFunction(fn, M, omega, b - 1.0, f"ml:{a:g},{b:g},{lam:g}")


def parse_function(desc: str) -> TimeFunction:
    """Parse ``exp:<lambda>``, ``galpha:<alpha>`` or ``ml:<alpha>,<beta>,<lambda>``."""
    kind, _, payload = desc.partition(":")
    try:
        args = [float(x) for x in payload.split(",")] if payload else []
    except ValueError:
        raise UsageError(f"malformed function descriptor {desc!r}") from None
    table = {"exp": (exp_function, 1), "galpha": (galpha_function, 1), "ml": (ml_function, 3)}
    if kind not in table or len(args) != table[kind][1]:
        raise UsageError(
            f"unknown function descriptor {desc!r}; expected exp:<lambda>, "
            "galpha:<alpha> or ml:<alpha>,<beta>,<lambda>"
        )
    factory, _ = table[kind]
    return factory(*args)


def poisson_transform(psi: TimeFunction, n, q: QuadratureSpec | None = None):
    """Quadrature value of ``P(psi)(n)``.

    ``n`` may be an integer or a sequence of integers; for a sequence the
    function is sampled once on the node set of the largest ``n`` and the
    result is stacked along axis 0.
    """
    q = q or QuadratureSpec()
    psi.check_growth()
    scalar = np.ndim(n) == 0
    ns = [check_horizon(int(k), name="n") for k in np.atleast_1d(n)]
    T = q.max_t(max(ns), psi.omega)
    t, w = q.nodes(T, psi.endpoint_power)
    values = psi(t)
    if not np.all(np.isfinite(values)):
        raise DomainError(f"{psi.name} is not finite on the quadrature nodes")
    logt = np.log(t)
    out = []
    for k in ns:
        pw = w * np.exp(-t + k * logt - gammaln(k + 1))
        out.append(np.tensordot(pw, values, axes=1))
    res = np.array(out)
    if scalar:
        res = res[0]
        return float(res) if np.ndim(res) == 0 else res
    return res


def poisson_mass(n: int, q: QuadratureSpec | None = None) -> float:
    """Quadrature value of ``int_0^inf p_n(t) dt`` (exactly 1)."""
    q = q or QuadratureSpec()
    n = check_horizon(n, name="n")
    t, w = q.nodes(q.max_t(n))
    return float(np.sum(w * np.exp(-t + n * np.log(t) - gammaln(n + 1))))


def poisson_inner(n: int, m: int, q: QuadratureSpec | None = None) -> float:
    """Quadrature value of ``int_0^inf p_n(t) p_m(t) dt``.

    The closed form is ``(n+m)! / (n! m! 2^(n+m+1))``.
    """
    q = q or QuadratureSpec()
    n = check_horizon(n, name="n")
    m = check_horizon(m, name="m")
    # e^{-2t} t^{n+m} has the Poisson(n+m) tail at 2t
    t, w = q.nodes(max(q.max_t(n + m) / 2.0, 1.0))
    logp = -2.0 * t + (n + m) * np.log(t) - gammaln(n + 1) - gammaln(m + 1)
    return float(np.sum(w * np.exp(logp)))


_ML_SERIES_TOL = 1e-16
_ML_SERIES_CAP = 10_000


def poisson_ml_closed(alpha: float, beta: float, lam: float, n: int) -> float:
    r"""Closed form :math:`\sum_k \lambda^k\,\Gamma(n+\alpha k+\beta)/(n!\,\Gamma(\alpha k+\beta))`.

    This is :math:`\mathcal P(t^{\beta-1}E_{\alpha,\beta}(\lambda t^\alpha))(n)`,
    summed with log-Gamma terms for ``|lambda| < 1``.
    """
    a, b, lam = float(alpha), float(beta), float(lam)
    n = check_horizon(n, name="n")
    if abs(lam) >= 1:
        raise DomainError(f"need |lambda| < 1, got {lam}")
    if lam == 0.0:
        return float(cesaro_kernel(b, n)[n])
    logl = math.log(abs(lam))
    sign = -1.0 if lam < 0 else 1.0
    total = 0.0
    prev = -math.inf
    for k in range(_ML_SERIES_CAP):
        c = a * k + b
        lt = k * logl + math.lgamma(n + c) - math.lgamma(n + 1) - math.lgamma(c)
        term = sign**k * math.exp(lt)
        total += term
        if lt < prev and abs(term) < _ML_SERIES_TOL * abs(total):
            return total
        prev = lt
    raise ConvergenceError(f"series not converged in {_ML_SERIES_CAP} terms")


def subordinate_family(A, alpha, N: int, *, route: str = "series",
                       q: QuadratureSpec | None = None) -> ResolventFamily:
    r"""Discrete family as the Poisson transform of the continuous family
    :math:`t^{\alpha-1}E_{\alpha,\alpha}(A t^\alpha)`.

    ``route="series"`` transforms the Mittag-Leffler expansion term by term:
    :math:`\mathcal P(g_{\alpha(k+1)}) = k^{\alpha(k+1)}`, so
    :math:`S(n) = \sum_k k^{\alpha(k+1)}(n) A^k`, summed by
    :func:`~fracdiffeq.resolvent.build_series` (including its exact
    fallback for cancelling sums).  ``route="quadrature"``
    (diagonal operators only) integrates each multiplier's scalar family
    numerically.
    """
    A, a, N = _prepare(A, alpha, N)
    norm_a = A.norm_estimate()
    if norm_a >= 1.0:
        raise DomainError(f"subordination needs ||A|| < 1, estimated {norm_a:.6g}")
    d = A.dim
    if route == "quadrature":
        if not isinstance(A, DiagonalOperator):
            raise UsageError("the quadrature route is available for diagonal operators")
        S = np.zeros((N + 1, d, d))
        for i, m in enumerate(A.multipliers):
            S[:, i, i] = poisson_transform(ml_function(a, a, m), np.arange(N + 1), q)
        return ResolventFamily(a, "subordination", S, A, {"route": "quadrature"})
    if route != "series":
        raise UsageError(f"unknown route {route!r}")
    # term k of the expansion is A^k g_{alpha(k+1)}(t) with Poisson image
    # A^k k^{alpha(k+1)}(n), so the sum is the series construction
    F = build_series(A, a, N)
    return ResolventFamily(a, "subordination", F.table, A, {"route": "series", **F.diagnostics})


def verify_sampling_identity(beta: float, alpha, N: int, *, route: str = "kernel",
                             q: QuadratureSpec | None = None) -> dict:
    r"""Check :math:`\mathcal P(D^\alpha_t g_\beta)(n+2) = \Delta^\alpha \mathcal P(g_\beta)(n)`.

    With :math:`D^\alpha_t g_\beta = g_{\beta-\alpha}` the left side is
    :math:`\mathcal P(g_{\beta-\alpha})(n+2)`.  ``route="kernel"`` uses
    :math:`\mathcal P(g_\gamma) = k^\gamma`; ``route="quadrature"`` computes
    both transforms numerically.  Returns the maximum relative deviation over
    ``n <= N-2``.
    """
    a = FracOrder.coerce(alpha)
    N = check_horizon(N, minimum=2)
    beta = float(beta)
    if beta <= a.alpha:
        raise DomainError(f"need beta > alpha, got beta={beta}, alpha={a.alpha}")
    if route == "kernel":
        lhs = cesaro_kernel(beta - a.alpha, N)[2:]
        rhs = rl_diff(a, cesaro_kernel(beta, N))
    elif route == "quadrature":
        lhs = poisson_transform(galpha_function(beta - a.alpha), np.arange(2, N + 1), q)
        rhs = rl_diff(a, poisson_transform(galpha_function(beta), np.arange(N + 1), q))
    else:
        raise UsageError(f"unknown route {route!r}")
    dev = np.abs(lhs - rhs) / np.maximum(np.abs(lhs), 1e-300)
    return {"beta": beta, "alpha": a.alpha, "N": N, "route": route, "deviation": float(np.max(dev))}

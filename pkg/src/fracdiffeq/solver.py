r"""Initial value problems

.. math::

    \Delta^\alpha u(n) = A u(n+2) + f(n, u(n)),\qquad u(0) = u_0,\ u(1) = u_1,

for ``1 < alpha <= 2``, solved through a discrete resolvent family ``S``:

* homogeneous:   :math:`u(n) = S(n)(I-A)u_0 - \alpha S(n-1)u_0 + S(n-1)(I-A)u_1`
* forced:        add :math:`\sum_{k=0}^{n-2} S(n-2-k) f(k)`

with the convention ``S(-1) = 0``.  For state-dependent forcing the sum only
involves ``u(0..n-2)``, so the recursion is explicit; Picard iteration in a
weighted space is provided as a certified-contraction check of the same
fixed point.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from ._validation import check_horizon, check_vector, rng_from_env
from .exceptions import ForcingError, UsageError
from .fracdiff import rl_diff
from .kernels import FracOrder
from .linop import LinOperator
from .resolvent import ResolventFamily
from .weights import WeightedSpace, weighted_norm

__all__ = [
    "StateForcing",
    "ProblemSpec",
    "PicardResult",
    "solve_homogeneous",
    "solve_inhomogeneous",
    "solve_nonlinear_direct",
    "solve_nonlinear_picard",
    "solve",
    "residual",
    "hypothesis_report",
]

LIPSCHITZ_SLACK = 1e-9


@dataclass(frozen=True, eq=False)
class StateForcing:
    """State-dependent forcing ``f(n, x)`` with declared constants.

    Attributes
    ----------
    fn : callable
        ``(n, x) -> vector``; must be pure in ``(n, x)``.
    L : float
        Declared Lipschitz constant in ``x``, uniform in ``n``.
    M : callable or None
        Envelope with ``||f(n, x)|| <= M(n) W(||x||)``.
    W : callable or None
    C : float or None
        Constant with ``W(y) <= C y``.
    name : str
    """

    fn: Callable[[int, np.ndarray], np.ndarray]
    L: float
    M: Callable[[int], float] | None = None
    W: Callable[[float], float] | None = None
    C: float | None = None
    name: str = "f"

    def __post_init__(self):
        if not (math.isfinite(self.L) and self.L >= 0):
            raise UsageError(f"declared Lipschitz constant must be finite and >= 0, got {self.L}")

    def __call__(self, n: int, x: np.ndarray) -> np.ndarray:
        y = np.asarray(self.fn(n, x), dtype=float)
        if y.shape != x.shape:
            raise ForcingError(f"{self.name}({n}, x) returned shape {y.shape}, expected {x.shape}", n)
        if not np.all(np.isfinite(y)):
            raise ForcingError(f"{self.name}({n}, x) returned non-finite values", n)
        return y

    def check_lipschitz(self, d: int, N: int, pairs: int = 1000, rng=None) -> float:
        """Sample ``pairs`` random ``(n, x, y)`` and return the largest observed
        quotient; raise :class:`ForcingError` if it exceeds ``L`` by more than
        ``LIPSCHITZ_SLACK``."""
        rng = rng if rng is not None else rng_from_env()
        worst = 0.0
        for _ in range(pairs):
            n = int(rng.integers(0, max(N - 1, 1)))
            scale = 10.0 ** rng.uniform(-3, 3)
            x = scale * rng.standard_normal(d)
            y = x + scale * 10.0 ** rng.uniform(-3, 0) * rng.standard_normal(d)
            dx = float(np.linalg.norm(x - y))
            if dx == 0:
                continue
            q = float(np.linalg.norm(self(n, x) - self(n, y))) / dx
            worst = max(worst, q)
            if q > self.L + LIPSCHITZ_SLACK * max(1.0, self.L):
                raise ForcingError(
                    f"{self.name}: observed Lipschitz quotient {q:.6g} at n={n} exceeds "
                    f"the declared L = {self.L:.6g}",
                    n,
                )
        return worst


@dataclass(eq=False)
class ProblemSpec:
    """``Delta^alpha u(n) = A u(n+2) + f(n, u(n))`` on ``n = 0..N-2``.

    ``forcing`` is ``None``, a sequence ``g(0..N-2)`` of shape
    ``(N-1, d)``, or a :class:`StateForcing`.
    """

    alpha: FracOrder
    A: LinOperator
    u0: np.ndarray
    u1: np.ndarray
    N: int
    forcing: object = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.alpha = FracOrder.coerce(self.alpha).require_solver_range()
        self.N = check_horizon(self.N, minimum=1)
        d = self.A.dim
        self.u0 = check_vector(self.u0, d, "u0")
        self.u1 = check_vector(self.u1, d, "u1")
        if self.forcing is not None and not isinstance(self.forcing, StateForcing):
            g = np.asarray(self.forcing, dtype=float)
            if g.ndim == 1 and d == 1:
                g = g[:, None]
            if g.ndim != 2 or g.shape[1] != d or g.shape[0] < self.N - 1:
                raise UsageError(
                    f"forcing sequence must have shape ({self.N - 1}, {d}), got {g.shape}"
                )
            if not np.all(np.isfinite(g)):
                raise UsageError("forcing sequence contains non-finite entries")
            self.forcing = g[: max(self.N - 1, 0)]

    @property
    def d(self) -> int:
        return self.A.dim

    @property
    def kind(self) -> str:
        if self.forcing is None:
            return "homogeneous"
        return "nonlinear" if isinstance(self.forcing, StateForcing) else "inhomogeneous"

    def forcing_at(self, n: int, x: np.ndarray) -> np.ndarray:
        if self.forcing is None:
            return np.zeros(self.d)
        if isinstance(self.forcing, StateForcing):
            return self.forcing(n, x)
        return self.forcing[n]


def _check_family(P: ProblemSpec, F: ResolventFamily):
    if abs(F.alpha - P.alpha.alpha) > 1e-15:
        raise UsageError(f"family built for alpha={F.alpha}, problem has alpha={P.alpha.alpha}")
    if F.d != P.d:
        raise UsageError(f"family dimension {F.d} does not match problem dimension {P.d}")
    if F.N < P.N:
        raise UsageError(f"family horizon {F.N} is shorter than the problem horizon {P.N}")


def _homogeneous(P: ProblemSpec, F: ResolventFamily) -> np.ndarray:
    S = F.table[: P.N + 1]
    a0 = P.u0 - P.A.apply(P.u0)
    a1 = P.u1 - P.A.apply(P.u1)
    u = S @ a0
    u[1:] += S[:-1] @ (a1 - P.alpha.alpha * P.u0)
    return u


def solve_homogeneous(P: ProblemSpec, F: ResolventFamily) -> np.ndarray:
    """Solution with ``f = 0``; returns shape ``(N+1, d)``."""
    _check_family(P, F)
    if P.forcing is not None:
        raise UsageError("solve_homogeneous needs a problem without forcing")
    return _homogeneous(P, F)


def solve_inhomogeneous(P: ProblemSpec, F: ResolventFamily) -> np.ndarray:
    """Solution with a forcing sequence ``g(0..N-2)``."""
    _check_family(P, F)
    if isinstance(P.forcing, StateForcing):
        raise UsageError("state-dependent forcing needs solve_nonlinear_direct")
    u = _homogeneous(P, F)
    if P.forcing is None or P.N < 2:
        return u
    g = P.forcing
    S = F.table
    for n in range(2, P.N + 1):
        # sum_k S(n-2-k) g(k) for k = 0..n-2
        u[n] += np.einsum("kij,kj->i", S[n - 2 :: -1][: n - 1], g[: n - 1])
    return u


def causal_solve(F: ResolventFamily, u_hom: np.ndarray,
                 forcing: Callable[[int, np.ndarray], np.ndarray]) -> np.ndarray:
    r"""Explicit recursion :math:`u(n) = u_h(n) + \sum_{k\le n-2} S(n-2-k)F_k`.

    ``forcing(k, u)`` returns :math:`F_k`; it may read ``u[0..k+1]``, which
    are final by the time it is called.
    """
    u = np.array(u_hom, dtype=float, copy=True)
    N = u.shape[0] - 1
    d = u.shape[1]
    Fk = np.zeros((max(N - 1, 0), d))
    S = F.table
    for n in range(2, N + 1):
        k = n - 2
        Fk[k] = forcing(k, u)
        if not np.all(np.isfinite(Fk[k])):
            raise ForcingError(f"forcing is not finite at n={k}", k)
        u[n] += np.einsum("kij,kj->i", S[n - 2 :: -1][: n - 1], Fk[: n - 1])
    return u


def solve_nonlinear_direct(P: ProblemSpec, F: ResolventFamily) -> np.ndarray:
    """Explicit forward recursion for state-dependent forcing.

    Each ``u(n)`` depends on ``u(0..n-2)`` only, so no iteration is needed.
    Nonzero initial data enter through the homogeneous part.
    """
    _check_family(P, F)
    if not isinstance(P.forcing, StateForcing):
        return solve_inhomogeneous(P, F)
    f = P.forcing
    return causal_solve(F, _homogeneous(P, F), lambda k, u: f(k, u[k]))


@dataclass
class PicardResult:
    """Outcome of :func:`solve_nonlinear_picard`.

    ``contraction_estimate`` is the largest observed ratio of successive
    weighted increments; ``bound`` is ``L * ||S||_inf * H``.
    """

    u: np.ndarray
    iterations: int
    converged: bool
    contraction_estimate: float
    increments: list
    bound: float


def solve_nonlinear_picard(P: ProblemSpec, F: ResolventFamily, W: WeightedSpace,
                           tol: float = 1e-13, max_iter: int = 200,
                           initial: np.ndarray | None = None) -> PicardResult:
    r"""Iterate :math:`u \mapsto G u`, :math:`Gu(n) = \sum_{k\le n-2} S(n-2-k) f(k, u(k))`,
    from ``u = 0`` until the weighted increment drops below ``tol``.

    Requires zero initial data.  On a finite window the iteration reaches the
    direct-recursion solution after at most ``N/2`` steps; it is kept as a
    check of the contraction constant.
    """
    _check_family(P, F)
    if np.any(P.u0 != 0) or np.any(P.u1 != 0):
        raise UsageError("Picard iteration requires u0 = u1 = 0")
    if W.N < P.N:
        raise UsageError(f"weight window {W.N} is shorter than the problem horizon {P.N}")
    L = P.forcing.L if isinstance(P.forcing, StateForcing) else 0.0
    f = P.forcing_at
    sup = float(np.max(F.norms()[: max(P.N - 1, 1)]))
    bound = L * sup * W.H
    S = F.table
    N, d = P.N, P.d
    u = np.zeros((N + 1, d)) if initial is None else np.array(initial, dtype=float)
    increments = []
    estimate = 0.0
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        fk = np.array([f(k, u[k]) for k in range(max(N - 1, 0))]).reshape(-1, d)
        new = np.zeros_like(u)
        for n in range(2, N + 1):
            new[n] = np.einsum("kij,kj->i", S[n - 2 :: -1][: n - 1], fk[: n - 1])
        inc = weighted_norm(new - u, W)
        if increments and increments[-1] > 0 and inc > 0:
            estimate = max(estimate, inc / increments[-1])
        increments.append(inc)
        u = new
        if inc < tol:
            converged = True
            break
    return PicardResult(u, it, converged, estimate, increments, bound)


def solve(P: ProblemSpec, F: ResolventFamily) -> np.ndarray:
    """Dispatch on the forcing kind."""
    if P.kind == "homogeneous":
        return solve_homogeneous(P, F)
    if P.kind == "inhomogeneous":
        return solve_inhomogeneous(P, F)
    return solve_nonlinear_direct(P, F)


def residual(u, P: ProblemSpec) -> float:
    """``max_n ||Delta^alpha u(n) - A u(n+2) - f(n, u(n))|| / max(1, ||u||_inf)``
    over ``n <= N-2``, computed with :func:`~fracdiffeq.fracdiff.rl_diff`."""
    u = np.asarray(u, dtype=float)
    if u.shape != (P.N + 1, P.d):
        raise UsageError(f"solution must have shape {(P.N + 1, P.d)}, got {u.shape}")
    check_horizon(P.N, minimum=4)
    lhs = rl_diff(P.alpha, u)
    Au = P.A.apply(u[2:].T).T
    f = np.array([P.forcing_at(n, u[n]) for n in range(P.N - 1)])
    res = np.linalg.norm(lhs - Au - f, axis=1)
    scale = max(1.0, float(np.max(np.linalg.norm(u, axis=1))))
    return float(np.max(res)) / scale


def hypothesis_report(P: ProblemSpec, F: ResolventFamily, W: WeightedSpace,
                      samples: int = 200, rng=None) -> dict:
    """Evaluate the existence hypotheses from declared data.

    * Lipschitz route: ``L ||S||_inf H < 1``, with ``L`` spot-checked.
    * Growth route: ``||f(k, x)|| <= M(k) W(||x||)`` with bounded ``M`` and
      ``W(y) <= C y``, both sampled.  Continuity of the Nemytskii operator
      follows from the Lipschitz bound; compactness is automatic in finite
      dimension.
    """
    rng = rng if rng is not None else rng_from_env()
    out: dict = {"sup_norm": F.sup_norm, "H": W.H, "weight_admissible": W.admissible}
    f = P.forcing
    if not isinstance(f, StateForcing):
        out["lipschitz"] = {"L": 0.0, "product": 0.0, "satisfied": True}
        return out
    observed = f.check_lipschitz(P.d, P.N, rng=rng)
    product = f.L * F.sup_norm * W.H
    out["lipschitz"] = {"L": f.L, "observed_L": observed, "product": product,
                        "satisfied": bool(product < 1.0)}
    if f.M is not None and f.W is not None:
        ks = np.arange(max(P.N - 1, 1))
        Mk = np.array([f.M(int(k)) for k in ks])
        ok_env = True
        ok_w = True
        for _ in range(samples):
            k = int(rng.integers(0, ks.size))
            x = 10.0 ** rng.uniform(-3, 3) * rng.standard_normal(P.d)
            nx = float(np.linalg.norm(x))
            ok_env &= float(np.linalg.norm(f(k, x))) <= Mk[k] * f.W(nx) * (1 + 1e-12) + 1e-300
            if f.C is not None:
                ok_w &= f.W(nx) <= f.C * nx * (1 + 1e-12)
        out["growth"] = {"M_sup": float(np.max(Mk)), "C": f.C,
                         "envelope_holds": bool(ok_env), "W_linear_bound": bool(ok_w),
                         "satisfied": bool(ok_env and ok_w and np.isfinite(np.max(Mk)))}
    return out

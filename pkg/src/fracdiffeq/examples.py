"""Worked problems: heat equation, multiplication operator, shifted
second-order problem on ``[pi, 2 pi]`` and the Chebyshev recurrence.

Each builder returns an :class:`ExampleResult` whose ``checks`` list the
identities verified on the computed solution.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .checks import Check
from .linop import DiagonalOperator, Laplacian1D
from .resolvent import ResolventFamily, build_family
from .reformulate import solve_shifted
from .solver import (
    ProblemSpec,
    StateForcing,
    hypothesis_report,
    residual,
    solve_homogeneous,
    solve_nonlinear_direct,
    solve_nonlinear_picard,
)
from .weights import admissibility, weighted_norm

__all__ = ["ExampleResult", "EXAMPLES", "heat", "multiplication", "shifted", "chebyshev",
           "multiplication_closed_family"]


@dataclass
class ExampleResult:
    name: str
    u: np.ndarray
    grid: np.ndarray
    checks: list
    meta: dict = field(default_factory=dict)
    family: ResolventFamily | None = None

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)


def heat(dim: int = 40, alpha: float = 1.6, steps: int = 50, source: float = 1.0,
         method: str = "auto") -> ExampleResult:
    r"""Fractional heat problem on ``(0, pi)`` with Dirichlet boundary:

    .. math::

        \Delta^\alpha u(n) = \partial_{xx} u(n+2)
            + \frac{\sin n}{1+n^3}\frac{u(n)}{1+\|u(n)\|_{L^2}} + s(n),

    ``u(0) = u(1) = 0``.  With ``source = 0`` the unique solution is zero;
    the default adds the pulse ``s(0) = source * sin(x)`` so the solution
    is nontrivial.  Lipschitz constant ``L = 2``, weight ``h(n) = n n!``.
    """
    A = Laplacian1D(0.0, math.pi, dim)
    x = A.grid
    dx = A.dx

    def l2(v):
        return math.sqrt(dx) * float(np.linalg.norm(v))

    pulse = source * np.sin(x)

    def f(n, v):
        out = math.sin(n) / (1.0 + n**3) * v / (1.0 + l2(v))
        return out + pulse if n == 0 else out

    envelope = {}
    if source == 0.0:
        envelope = dict(M=lambda n: 1.0 / (1.0 + n**3),
                        W=lambda y: y / (1.0 + math.sqrt(dx) * y), C=1.0)
    forcing = StateForcing(f, 2.0, name="heat", **envelope)
    P = ProblemSpec(alpha, A, np.zeros(dim), np.zeros(dim), steps, forcing)
    F = build_family(A, alpha, steps, method)
    u = solve_nonlinear_direct(P, F)
    W = admissibility("n_factorial", steps)
    pic = solve_nonlinear_picard(P, F, W)
    res = residual(u, P)
    wn = weighted_norm(u, W, norm=l2)
    hyp = hypothesis_report(P, F, W)
    sup = float(np.max(F.norms()[: steps - 1]))
    checks = [
        Check("residual", res, 1e-9),
        Check("weighted_norm_finite", wn, relation="finite"),
        Check("picard_converged", float(pic.converged), relation="true"),
        Check("picard_direct_distance", weighted_norm(u - pic.u, W), 1e-10),
        Check("contraction_vs_bound", pic.contraction_estimate, sup * W.H * 2.0 * (1 + 1e-6)),
        Check("lipschitz_hypothesis_product", hyp["lipschitz"]["product"], 1.0, "<"),
    ]
    meta = {
        "alpha": alpha, "dim": dim, "steps": steps, "source": source, "method": F.method,
        "H": W.H, "sup_norm": F.sup_norm, "weighted_norm_L2": wn, "K": wn**2,
        "picard_iterations": pic.iterations, "contraction_estimate": pic.contraction_estimate,
        "contraction_bound": sup * W.H * 2.0, "hypotheses": hyp,
    }
    return ExampleResult("heat", u, x, checks, meta, F)


def multiplication_closed_family(m: np.ndarray, N: int) -> np.ndarray:
    """Diagonal ``alpha = 2`` family of ``A = diag(m)``, ``0 < m < 1``:
    ``S(n) = ((1 - sqrt m)^{-(n+1)} - (1 + sqrt m)^{-(n+1)}) / (2 sqrt m)``."""
    r = np.sqrt(np.asarray(m, dtype=float))
    n = np.arange(N + 1)[:, None]
    vals = ((1 - r) ** -(n + 1.0) - (1 + r) ** -(n + 1.0)) / (2 * r)
    out = np.zeros((N + 1, r.size, r.size))
    idx = np.arange(r.size)
    out[:, idx, idx] = vals
    return out


def multiplication(dim: int = 40, steps: int = 50, method: str = "auto") -> ExampleResult:
    r"""``Delta^2 u(n) = m(x) u(n+2)`` with ``m(x) = 0.1 + 0.3 x`` on a grid of
    ``[0, 1]``, ``u0 = sin(pi x)``, ``u1 = x (1 - x)``; compared with the
    closed-form sine-family solution."""
    x = np.linspace(0.0, 1.0, dim)
    m = 0.1 + 0.3 * x
    A = DiagonalOperator(m, x)
    u0, u1 = np.sin(np.pi * x), x * (1 - x)
    F = build_family(A, 2.0, steps, method)
    P = ProblemSpec(2.0, A, u0, u1, steps)
    u = solve_homogeneous(P, F)
    Sc = multiplication_closed_family(m, steps)
    uc = np.einsum("nij,j->ni", Sc, (1 - m) * u0)
    uc[1:] += np.einsum("nij,j->ni", Sc[:-1], (1 - m) * u1 - 2.0 * u0)
    fam_dev = float(np.max(np.linalg.norm(F.table - Sc, axis=(1, 2))
                           / np.linalg.norm(Sc, axis=(1, 2))))
    sol_dev = float(np.max(np.linalg.norm(u - uc, axis=1) / np.linalg.norm(uc, axis=1)))
    checks = [
        Check("family_vs_closed_form", fam_dev, 1e-9),
        Check("solution_vs_closed_form", sol_dev, 1e-9),
        Check("residual", residual(u, P), 1e-9),
        Check("initial_u0", float(np.max(np.abs(u[0] - u0))), 1e-12),
        Check("initial_u1", float(np.max(np.abs(u[1] - u1))), 1e-12),
    ]
    return ExampleResult("multiplication", u, x, checks,
                         {"dim": dim, "steps": steps, "method": F.method}, F)


def _explicit_shifted(b: np.ndarray, shift: float, u0, u1, N):
    u = np.zeros((N + 1, b.size))
    u[0], u[1] = u0, u1
    for n in range(N - 1):
        u[n + 2] = (2.0 + b + 2.0 * shift) * u[n + 1] - u[n]
    return u


def shifted(dim: int = 40, steps: int = 50, shift: float = 0.0, zero_data: bool = False,
            method: str = "auto") -> ExampleResult:
    r"""``Delta^2 u(n) = (B + 2 shift) u(n+1)`` with
    ``B = 2 (1/(1+x) - (1+shift))`` on a grid of ``[pi, 2 pi]``, so that the
    reformulated operator is ``T = -x``.  Default data ``u0 = 0``,
    ``u1 = sin x``; ``zero_data`` gives the trivial instance."""
    x = np.linspace(math.pi, 2 * math.pi, dim)
    B = DiagonalOperator(2.0 * (1.0 / (1.0 + x) - (1.0 + shift)), x)
    u0 = np.zeros(dim)
    u1 = np.zeros(dim) if zero_data else np.sin(x)
    sol = solve_shifted(B, u0, u1, steps, shift=shift, method=method)
    W = admissibility("n_factorial", steps)
    T = sol.T
    Td = T.to_dense()
    t_dev = float(np.max(np.abs(Td - np.diag(-x))))
    tnorm = T.norm_estimate()
    sup = sol.family.sup_norm
    ref = _explicit_shifted(B.multipliers, shift, u0, u1, steps)
    scale = max(1.0, float(np.max(np.abs(ref))))
    checks = [
        Check("T_equals_minus_x", t_dev, 1e-10),
        Check("T_norm_le_2pi", tnorm, 2 * math.pi * (1 + 1e-12)),
        Check("sup_norm_le_inv_sqrt_pi", sup, 1 / math.sqrt(math.pi) + 1e-6),
        Check("contraction_product", tnorm * sup * W.H, 1.0, "<"),
        Check("original_residual", sol.original_residual, 1e-9),
        Check("explicit_recurrence_agreement", float(np.max(np.abs(sol.u - ref))) / scale, 1e-9),
    ]
    meta = {"dim": dim, "steps": steps, "shift": shift, "T_norm": tnorm, "sup_norm": sup,
            "H": W.H, "contraction_product": tnorm * sup * W.H,
            "canonical_residual": sol.canonical_residual,
            "sup_norm_reference": {"verified_bound": 1 / math.sqrt(math.pi),
                                   "stated_constant": math.sqrt(math.pi)}}
    return ExampleResult("shifted", sol.u, x, checks, meta, sol.family)


def chebyshev(dim: int = 40, steps: int = 50, method: str = "auto") -> ExampleResult:
    r"""``T(n+2, x) = 2x T(n+1, x) - T(n, x)`` written as
    ``Delta^2 u(n) = (2x - 2) u(n+1)`` on ``x_i = i/dim`` (``x = 0`` is
    avoided since the reformulation needs ``-2`` in the resolvent set of
    ``B``); compared with ``cos(n arccos x)``."""
    x = np.arange(1, dim + 1) / dim
    B = DiagonalOperator(2.0 * x - 2.0, x)
    sol = solve_shifted(B, np.ones(dim), x, steps, method=method)
    n = np.arange(steps + 1)[:, None]
    ref = np.cos(n * np.arccos(x))
    checks = [
        Check("chebyshev_agreement", float(np.max(np.abs(sol.u - ref))), 1e-9),
        Check("original_residual", sol.original_residual, 1e-9),
    ]
    return ExampleResult("chebyshev", sol.u, x, checks,
                         {"dim": dim, "steps": steps, "T_norm": sol.T.norm_estimate()}, sol.family)


EXAMPLES = {"heat": heat, "multiplication": multiplication, "shifted": shifted,
            "chebyshev": chebyshev}

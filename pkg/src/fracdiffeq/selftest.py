"""Acceptance suite: fifteen numbered identity and property checks.

``run_selftest`` evaluates every criterion, and the CLI ``selftest`` command
prints one pass/fail line per criterion.  Random inputs come from
:func:`~fracdiffeq._validation.rng_from_env`, so ``FRACDIFF_SEED`` makes
them reproducible.
"""

from __future__ import annotations

import itertools
import math
import time
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy.special import gammaln

from ._validation import rng_from_env
from .checks import Check
from .examples import heat, multiplication, shifted
from .fracdiff import caputo_diff, rl_diff, rl_diff_of_conv
from .kernels import cesaro_kernel, conv, ztrans_partial
from .linop import DenseOperator, DiagonalOperator, Laplacian1D
from .poisson import (
    exp_function,
    galpha_function,
    ml_function,
    poisson_inner,
    poisson_ml_closed,
    poisson_transform,
    verify_sampling_identity,
)
from .resolvent import beta_coefficients, build_family, verify_ztransform
from .solver import ProblemSpec, residual, solve_homogeneous, solve_inhomogeneous
from .weights import admissibility

__all__ = ["Criterion", "CRITERIA", "run_selftest", "report_lines"]

ORDERS = (0.3, 0.7, 1.5, 1.9)


@dataclass
class Criterion:
    number: int
    title: str
    checks: list = field(default_factory=list)
    elapsed: float = 0.0

    @property
    def passed(self) -> bool:
        return bool(self.checks) and all(c.passed for c in self.checks)

    def line(self) -> str:
        mark = "PASS" if self.passed else "FAIL"
        worst = next((c for c in self.checks if not c.passed), self.checks[0] if self.checks else None)
        detail = "" if worst is None else worst.line().split("] ", 1)[1]
        return f"[{mark}] {self.number:2d}. {self.title} ({self.elapsed:.2f} s): {detail}"

    def as_dict(self) -> dict:
        return {"number": self.number, "title": self.title, "passed": self.passed,
                "elapsed": self.elapsed, "checks": [c.as_dict() for c in self.checks]}


def _rel(a, b) -> float:
    a, b = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
    return float(np.max(np.abs(a - b) / np.abs(b)))


def kernel_semigroup(rng):
    t0 = time.perf_counter()
    worst = 0.0
    for a, b in itertools.product(ORDERS, repeat=2):
        lhs = conv(cesaro_kernel(a, 200), cesaro_kernel(b, 200))
        worst = max(worst, _rel(lhs, cesaro_kernel(a + b, 200)))
    return [Check("semigroup_rel_err", worst, 1e-12),
            Check("runtime_s", time.perf_counter() - t0, 1.0, "<")]


def generating_function(rng):
    worst = 0.0
    for a, z in itertools.product(ORDERS, (0.2, 0.5)):
        # sum_j k(j) z^j = (1-z)^{-alpha}; ztrans_partial sums w^{-j}
        s = ztrans_partial(cesaro_kernel(a, 200), 1.0 / z, 200)
        worst = max(worst, abs(s / (1.0 - z) ** -a - 1.0))
    return [Check("partial_sum_rel_err", worst, 1e-10)]


def caputo_rl(rng):
    worst = 0.0
    for i in range(100):
        d = (1, 3)[i % 2]
        a = (1.1, 1.5, 1.9)[i % 3]
        u = rng.standard_normal((41, d))
        k = cesaro_kernel(2.0 - a, 41)
        rhs = rl_diff(a, u) - k[1:40, None] * (u[1] - 2.0 * u[0]) - k[2:41, None] * u[0]
        lhs = caputo_diff(a, u)
        # componentwise, normalized by the magnitude of the sequence
        scale = np.maximum(np.abs(rhs), np.max(np.abs(u)))
        worst = max(worst, float(np.max(np.abs(lhs - rhs) / scale)))
    return [Check("caputo_rl_rel_err", worst, 1e-11)]


def convolution_rule(rng):
    worst = 0.0
    for a in (1.1, 1.5, 1.9, 2.0):
        u = rng.standard_normal(33)
        v = rng.standard_normal(33)
        worst = max(worst, float(np.max(np.abs(rl_diff_of_conv(a, u, v) - rl_diff(a, conv(u, v))))))
    return [Check("conv_rule_abs_residual", worst, 1e-12)]


def _random_dense(rng, d, bound=0.5):
    M = rng.standard_normal((d, d))
    return M * (bound * rng.uniform(0.2, 1.0) / np.linalg.norm(M, 2))


def _family_rel(F, G, n_max):
    num = np.linalg.norm(F.table[: n_max + 1] - G.table[: n_max + 1], axis=(1, 2))
    den = np.linalg.norm(G.table[: n_max + 1], axis=(1, 2))
    return float(np.max(num / den))


def cross_method(rng, store=None):
    series_dev = beta_dev = 0.0
    for i in range(20):
        d = int(rng.integers(1, 7))
        A = DenseOperator(_random_dense(rng, d))
        a = (1.2, 1.5, 1.9)[i % 3]
        rec = build_family(A, a, 40, "recurrence")
        ser = build_family(A, a, 40, "series")
        bet = build_family(A, a, 15, "beta")
        series_dev = max(series_dev, _family_rel(rec, ser, 40))
        beta_dev = max(beta_dev, _family_rel(rec, bet, 15))
        if store is not None:
            store.extend([rec, ser, bet])
    return [Check("recurrence_vs_series_rel", series_dev, 1e-9),
            Check("recurrence_vs_beta_rel", beta_dev, 1e-7)]


def difference_equation(rng):
    fams = []
    cross_method(rng, fams)
    fams.append(build_family(Laplacian1D(0.0, math.pi, 40), 1.6, 50, "recurrence"))
    fams.append(build_family(DiagonalOperator([-0.5, -0.2, 0.05, 0.1]), 1.5, 60, "series"))
    # beta tables lose about log10(cancellation) digits; 15 is their validated range
    fams.append(build_family(DenseOperator(np.zeros((2, 2))), 1.7, 15, "beta"))
    worst = max(float(np.max(F.difference_residual())) for F in fams)
    lap = float(np.max(fams[-3].difference_residual()))
    return [Check("difference_residual_all", worst, 1e-9),
            Check("difference_residual_laplacian", lap, 1e-9)]


def combinatorial(rng):
    worst = 0.0
    for a in (1.3, 1.7):
        B = beta_coefficients(a, 20)
        for n in range(1, 21):
            j = np.arange(1, n + 1)
            row = B.row(n)
            for l in range(11):
                binom = np.exp(gammaln(l + 1 + j) - gammaln(l + 1) - gammaln(j + 1))
                lhs = float(np.dot(row, binom))
                rhs = float(np.exp(gammaln(a * (l + 1) + n) - gammaln(a * (l + 1))
                                   - gammaln(n + 1)))
                worst = max(worst, abs(lhs - rhs) / abs(rhs))
    return [Check("identity_rel_err", worst, 1e-8)]


def ztransform(rng):
    cases = [DiagonalOperator([0.1]), DiagonalOperator([-0.4]),
             DiagonalOperator([-0.5, -0.2, 0.05, 0.1])]
    worst = 0.0
    statuses = []
    for A in cases:
        F = build_family(A, 1.5, 60, "recurrence")
        for rec in verify_ztransform(F, (2.0, 3.0, 5.0), rng=rng):
            worst = max(worst, rec["deviation"])
            statuses.append(rec["status"])
    return [Check("ztransform_deviation", worst, 1e-10),
            Check("all_conclusive", float(all(s == "pass" for s in statuses)), relation="true")]


def solution_formulas(rng):
    res = ic = 0.0
    for i in range(6):
        d = int(rng.integers(1, 5))
        A = DenseOperator(_random_dense(rng, d))
        a = (1.2, 1.5, 2.0)[i % 3]
        N = 30
        u0, u1 = rng.standard_normal(d), rng.standard_normal(d)
        F = build_family(A, a, N)
        P = ProblemSpec(a, A, u0, u1, N)
        Pg = ProblemSpec(a, A, u0, u1, N, rng.standard_normal((N - 1, d)))
        for Q, u in ((P, solve_homogeneous(P, F)), (Pg, solve_inhomogeneous(Pg, F))):
            res = max(res, residual(u, Q))
            ic = max(ic, float(np.max(np.abs(u[0] - u0))), float(np.max(np.abs(u[1] - u1))))
    ex = multiplication()
    closed = max(c.value for c in ex.checks if c.name.endswith("closed_form"))
    return [Check("residual", res, 1e-9), Check("initial_data", ic, 1e-12),
            Check("multiplication_closed_form", closed, 1e-9)]


def poisson_closed_forms(rng):
    ns = np.arange(41)
    worst = 0.0
    for lam in (0.5, 2.0):
        worst = max(worst, _rel(poisson_transform(exp_function(lam), ns),
                                (1.0 + lam) ** -(ns + 1.0)))
    for a in (0.5, 1.5, 2.5):
        worst = max(worst, _rel(poisson_transform(galpha_function(a), ns), cesaro_kernel(a, 40)))
    for a, b, lam in ((1.5, 1.5, 0.5), (1.8, 2.0, 0.3), (1.2, 1.0, 0.25)):
        ref = [poisson_ml_closed(a, b, lam, int(n)) for n in ns]
        worst = max(worst, _rel(poisson_transform(ml_function(a, b, lam), ns), ref))
    inner = max(abs(poisson_inner(n, m) / (math.comb(n + m, n) / 2.0 ** (n + m + 1)) - 1.0)
                for n in range(21) for m in range(21))
    return [Check("closed_form_rel_err", worst, 1e-8), Check("inner_product_rel_err", inner, 1e-10)]


def sampling_identity(rng):
    kern = quad = 0.0
    for beta, a in ((2.5, 1.5), (3.0, 1.2), (2.2, 1.9)):
        kern = max(kern, verify_sampling_identity(beta, a, 30, route="kernel")["deviation"])
        quad = max(quad, verify_sampling_identity(beta, a, 30, route="quadrature")["deviation"])
    return [Check("kernel_route", kern, 1e-12), Check("quadrature_route", quad, 1e-8)]


def weighted_constants(rng):
    W = admissibility("n_factorial", 18)
    H_ok = max(W.exact_ratios()) == Fraction(1, 18) and W.H == 1 / 18
    fact = 1
    sums_ok = True
    acc = 0
    for k in range(1, 19):
        fact *= k
        acc += k * fact
        sums_ok &= acc == math.factorial(k + 1) - 1
    return [Check("H_equals_1_18", float(H_ok), relation="true"),
            Check("sum_k_kfactorial", float(sums_ok), relation="true")]


def heat_example(rng):
    out = []
    for a in (1.3, 1.6, 1.9):
        ex = heat(dim=40, alpha=a, steps=50)
        out.extend(Check(f"alpha{a}_{c.name}", c.value, c.threshold, c.relation) for c in ex.checks)
    return out


def shifted_example(rng):
    ex = shifted(dim=40, steps=50)
    keep = ("T_equals_minus_x", "contraction_product", "original_residual")
    return [c for c in ex.checks if c.name in keep]


CRITERIA = [
    (1, "kernel semigroup", kernel_semigroup),
    (2, "generating function", generating_function),
    (3, "Caputo vs Riemann-Liouville", caputo_rl),
    (4, "convolution difference rule", convolution_rule),
    (5, "resolvent cross-method agreement", cross_method),
    (6, "difference equation for families", difference_equation),
    (7, "combinatorial identity", combinatorial),
    (8, "Z-transform characterization", ztransform),
    (9, "solution formulas", solution_formulas),
    (10, "Poisson closed forms", poisson_closed_forms),
    (11, "sampling identity", sampling_identity),
    (12, "weighted-space constants", weighted_constants),
    (13, "heat example", heat_example),
    (14, "shifted example", shifted_example),
]

TIME_LIMIT = 60.0


def run_selftest(seed: int | None = None, only=None) -> list[Criterion]:
    """Evaluate the criteria (all, or the numbers in ``only``)."""
    rng = rng_from_env(seed)
    out = []
    t_start = time.perf_counter()
    for number, title, fn in CRITERIA:
        if only is not None and number not in only:
            continue
        t0 = time.perf_counter()
        try:
            checks = fn(rng)
        except Exception as exc:  # a crash is a failed criterion, not an abort
            checks = [Check(f"raised {type(exc).__name__}: {exc}", 0.0, relation="true")]
        out.append(Criterion(number, title, checks, time.perf_counter() - t0))
    if only is None or 15 in only:
        total = time.perf_counter() - t_start
        out.append(Criterion(15, "suite runtime", [Check("total_s", total, TIME_LIMIT, "<")], total))
    return out


def report_lines(results: list[Criterion]) -> list[str]:
    lines = [c.line() for c in results]
    n_pass = sum(c.passed for c in results)
    lines.append(f"{n_pass}/{len(results)} criteria passed")
    return lines

r"""Discrete :math:`\alpha`-resolvent families generated by a matrix operator.

The family :math:`S(n)` is the unique operator sequence with

.. math::

    S(n) = k^\alpha(n) I + A (k^\alpha * S)(n),\qquad n \ge 0,

and three constructions are offered:

``recurrence``
    isolate :math:`S(n)` using :math:`k^\alpha(0) = 1`, one LU of ``I - A``;
``series``
    :math:`S(n) = \sum_j k^{\alpha(j+1)}(n) A^j`, for ``||A|| < 1``;
``beta``
    :math:`S(n) = \sum_{j=1}^n \beta_{\alpha,n}(j) (I-A)^{-(j+1)}`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import mpmath
import numpy as np

from ._accurate import accurate_sum, two_prod
from ._validation import check_horizon
from .exceptions import ConvergenceError, MethodInapplicableError, UsageError
from .fracdiff import rl_diff
from .kernels import FracOrder, cesaro_kernel, conv
from .linop import DenseOperator, LinOperator

__all__ = [
    "METHODS",
    "ResolventFamily",
    "BetaTable",
    "beta_coefficients",
    "build_recurrence",
    "build_series",
    "build_beta",
    "build_family",
    "verify_ztransform",
]

METHODS = ("recurrence", "series", "beta")

# recurrence: cancellation ratio that triggers defect correction
RECURRENCE_CANCELLATION_LIMIT = 1e4
RECURRENCE_MAX_REFINEMENTS = 3
# refinement is skipped above this many (N+1)^2 d^2 defect terms
RECURRENCE_REFINE_BUDGET = 3e7
# series: lost-digit ratio that triggers the exact fixed-point re-evaluation
SERIES_CANCELLATION_LIMIT = 1e4
SERIES_MAX_TERMS = 2000
# beta: ratio above which a table entry is marked untrusted
BETA_CANCELLATION_LIMIT = 1e12


def _spectral_norms(table: np.ndarray) -> np.ndarray:
    if table.shape[1] == 0:
        return np.zeros(table.shape[0])
    return np.linalg.norm(table, ord=2, axis=(1, 2))


@dataclass(frozen=True, eq=False)
class ResolventFamily:
    """Table ``S(0..N)`` of ``d x d`` matrices with construction metadata.

    Attributes
    ----------
    alpha : float
    method : str
        One of ``recurrence``, ``series``, ``beta``, ``subordination``.
    table : ndarray, shape (N+1, d, d)
        Read-only.
    operator : LinOperator or None
        Generator, when known; needed by the residual checks.
    diagnostics : dict
        Method-specific numbers (term counts, cancellation ratios, flags).
    """

    alpha: float
    method: str
    table: np.ndarray
    operator: LinOperator | None = None
    diagnostics: dict = field(default_factory=dict)
    sup_norm: float = field(init=False)

    def __post_init__(self):
        t = np.array(self.table, dtype=float)
        if t.ndim != 3 or t.shape[1] != t.shape[2]:
            raise UsageError(f"family table must have shape (N+1, d, d), got {t.shape}")
        t.setflags(write=False)
        object.__setattr__(self, "table", t)
        object.__setattr__(self, "alpha", float(self.alpha))
        object.__setattr__(self, "sup_norm", float(np.max(_spectral_norms(t))))

    @property
    def N(self) -> int:
        return self.table.shape[0] - 1

    @property
    def d(self) -> int:
        return self.table.shape[1]

    def __getitem__(self, n):
        return self.table[n]

    def norms(self) -> np.ndarray:
        """Spectral norms ``||S(n)||`` for ``n = 0..N``."""
        return _spectral_norms(self.table)

    def _require_operator(self, A):
        A = A if A is not None else self.operator
        if A is None:
            raise UsageError("this check needs the generating operator")
        if A.dim != self.d:
            raise UsageError(f"operator dimension {A.dim} does not match family dimension {self.d}")
        return A

    def _apply_table(self, A, T):
        # A applied to every matrix of a (M, d, d) stack
        M = T.shape[0]
        cols = np.moveaxis(T, 0, 1).reshape(self.d, -1)
        return np.moveaxis(A.apply(cols).reshape(self.d, M, self.d), 1, 0)

    def functional_residual(self, A: LinOperator | None = None) -> np.ndarray:
        """``||S(n) - k(n) I - A (k * S)(n)|| / max(1, ||S(n)||)`` per ``n``."""
        A = self._require_operator(A)
        k = cesaro_kernel(self.alpha, self.N)
        rhs = k[:, None, None] * np.eye(self.d) + self._apply_table(A, conv(k, self.table))
        return _spectral_norms(self.table - rhs) / np.maximum(1.0, self.norms())

    def difference_residual(self, A: LinOperator | None = None) -> np.ndarray:
        """``||Delta^alpha S(n) - A S(n+2)|| / max(1, ||S(n+2)||)`` for ``n <= N-2``."""
        A = self._require_operator(A)
        lhs = rl_diff(self.alpha, self.table)
        rhs = self._apply_table(A, self.table[2:])
        return _spectral_norms(lhs - rhs) / np.maximum(1.0, self.norms()[2:])

    def commutation_residual(self, A: LinOperator | None = None) -> np.ndarray:
        """``||A S(n) - S(n) A|| / (||A|| ||S(n)||)`` per ``n``."""
        A = self._require_operator(A)
        Ad = A.to_dense()
        AS = self._apply_table(A, self.table)
        SA = self.table @ Ad
        scale = max(A.norm_estimate(), 1e-300) * np.maximum(self.norms(), 1e-300)
        return _spectral_norms(AS - SA) / scale

    def to_json(self) -> dict:
        return {
            "alpha": self.alpha,
            "method": self.method,
            "N": self.N,
            "d": self.d,
            "matrices": self.table.tolist(),
            "sup_norm": self.sup_norm,
        }

    @classmethod
    def from_json(cls, obj: dict, operator: LinOperator | None = None) -> "ResolventFamily":
        try:
            table = np.asarray(obj["matrices"], dtype=float)
            fam = cls(obj["alpha"], obj["method"], table, operator)
            N, d = int(obj["N"]), int(obj["d"])
        except KeyError as exc:
            raise UsageError(f"family JSON lacks field {exc}") from None
        if (fam.N, fam.d) != (N, d):
            raise UsageError(f"family JSON declares N={N}, d={d} but holds {fam.table.shape}")
        return fam


@dataclass(frozen=True, eq=False)
class BetaTable:
    """Triangle ``beta_{alpha,n}(j)``, ``1 <= j <= n <= N``.

    Stored as a square array ``values[n, j]``; entries with ``j > n`` are
    zero and ``values[0, 0] = 1`` stands for ``S(0) = (I - A)^{-1}``.
    """

    alpha: float
    values: np.ndarray

    @property
    def N(self) -> int:
        return self.values.shape[0] - 1

    def row(self, n: int) -> np.ndarray:
        """``[beta_n(1), ..., beta_n(n)]``."""
        if not 1 <= n <= self.N:
            raise UsageError(f"row index must lie in 1..{self.N}, got {n}")
        return self.values[n, 1 : n + 1].copy()

    def __call__(self, n: int, j: int) -> float:
        return float(self.values[n, j])


def beta_coefficients(alpha: float, N: int) -> BetaTable:
    r"""Coefficients with :math:`S(n) = \sum_{j=1}^n \beta_{\alpha,n}(j) R^{j+1}`,
    :math:`R = (I-A)^{-1}`.

    Substituting the expansion into the recurrence and using
    :math:`A R^{j+1} = R^{j+1} - R^j` gives, with :math:`\beta_0(0) = 1`,

    .. math::

        \beta_n(l) = \sum_{i<n} k^\alpha(n-i)\,[\beta_i(l-1) - \beta_i(l)].

    For ``l = 1`` this is :math:`k(n) - \sum_{i=1}^{n-1} k(n-i)\beta_i(1)`, for
    ``l = n`` it collapses to :math:`\alpha\,\beta_{n-1}(n-1) = \alpha^n`, and
    for ``2 <= l <= n-1`` it is the two-sum middle rule.  The small rows
    ``n = 1, 2, 3`` are the same formula.
    """
    N = check_horizon(N, minimum=1)
    a = FracOrder.coerce(alpha).alpha
    k = cesaro_kernel(a, N)
    B = np.zeros((N + 1, N + 1))
    B[0, 0] = 1.0
    for n in range(1, N + 1):
        D = B[:n, :n] - B[:n, 1 : n + 1]
        B[n, 1 : n + 1] = k[n:0:-1] @ D
        B[n, n] = a**n
    B.setflags(write=False)
    return BetaTable(a, B)


def _prepare(A, alpha, N):
    if not isinstance(A, LinOperator):
        A = DenseOperator(np.atleast_2d(np.asarray(A, dtype=float)))
    return A, FracOrder.coerce(alpha).alpha, check_horizon(N)


def _recurrence_pass(A, solve, k, rhs):
    """Solve ``X(n) = rhs(n) + A sum_{j<=n} k(n-j) X(j)`` by forward substitution."""
    X = np.empty_like(rhs)
    for n in range(rhs.shape[0]):
        acc = np.tensordot(k[n:0:-1], X[:n], axes=1) if n else np.zeros(rhs.shape[1:])
        X[n] = solve(rhs[n] + A.apply(acc))
    return X


def _kernel_pair(a, N):
    """``k^a(0..N)`` as unevaluated sums ``hi + lo`` from a 40-digit product."""
    hi = np.empty(N + 1)
    lo = np.empty(N + 1)
    with mpmath.workdps(40):
        am = mpmath.mpf(a)
        x = mpmath.mpf(1)
        for n in range(N + 1):
            if n:
                x = x * (am + n - 1) / n
            hi[n] = float(x)
            lo[n] = float(x - hi[n])
    return hi, lo


def _row_pattern(Ad):
    """Nonzeros of ``Ad`` padded per row: ``cols[i, s]``, ``vals[i, s]``."""
    d = Ad.shape[0]
    rows = [np.nonzero(Ad[i])[0] for i in range(d)]
    width = max([len(r) for r in rows] + [1])
    cols = np.zeros((d, width), dtype=int)
    vals = np.zeros((d, width))
    for i, r in enumerate(rows):
        cols[i, : len(r)] = r
        vals[i, : len(r)] = Ad[i, r]
    return cols, vals


def _defect(Ad, khi, klo, S):
    """``k(n) I + A (k * S)(n) - S(n)`` with about twice double precision."""
    N, d = S.shape[0] - 1, S.shape[1]
    eye = np.eye(d)
    cols, vals = _row_pattern(Ad)
    R = np.empty_like(S)
    for n in range(N + 1):
        p, e = two_prod(khi[n::-1, None, None], S[: n + 1])
        c_hi, c_lo = accurate_sum(np.concatenate([p, e, klo[n::-1, None, None] * S[: n + 1]]))
        # slot s of row i holds A[i, cols[i, s]] * c_hi[cols[i, s], :]
        p2, e2 = two_prod(vals.T[:, :, None], c_hi[cols.T])
        rest = np.stack([Ad @ c_lo, khi[n] * eye, klo[n] * eye, -S[n]])
        hi, lo = accurate_sum(np.concatenate([p2, e2, rest]))
        R[n] = hi + lo
    return R


def build_recurrence(A, alpha, N: int) -> ResolventFamily:
    """Build ``S(0..N)`` from ``S(n) = (I-A)^{-1}[k(n) I + A sum_{j<n} k(n-j) S(j)]``.

    Where ``S(n)`` is a strongly cancelling combination of earlier terms
    (ratio above ``RECURRENCE_CANCELLATION_LIMIT``, typical near sign changes
    of oscillating families) double precision only gives absolute accuracy.
    The table is then refined by defect correction: the defect of the
    defining equation is evaluated with error-free products and compensated
    sums, and the correction solves the same recurrence.
    """
    A, a, N = _prepare(A, alpha, N)
    solve = A.resolvent_solver(1.0)
    d = A.dim
    k = cesaro_kernel(a, N)
    rhs = np.zeros((N + 1, d, d))
    rhs[:, np.arange(d), np.arange(d)] = k[:, None]
    S = _recurrence_pass(A, solve, k, rhs)
    norms = _spectral_norms(S)
    # scale of the terms combined into S(n): k(n) R + (R - I) sum_{j<n} k(n-j) S(j)
    r0 = float(norms[0])
    ra = float(np.linalg.norm(S[0] - np.eye(d), 2)) if d else 0.0
    scale = np.abs(k) * r0 + ra * (conv(np.abs(k), norms) - norms)
    ratio = scale / np.maximum(norms, 1e-300)
    diag = {"cancellation_ratio": float(np.max(ratio)), "refinements": 0}
    needed = np.max(ratio) > RECURRENCE_CANCELLATION_LIMIT
    if needed and ((N + 1) * d) ** 2 > RECURRENCE_REFINE_BUDGET:
        diag["refinement_skipped"] = "size"
    elif needed and not np.all(np.abs(S) < 1e250):
        diag["refinement_skipped"] = "magnitude"
    elif needed:
        Ad = A.to_dense()
        khi, klo = _kernel_pair(a, N)
        for it in range(1, RECURRENCE_MAX_REFINEMENTS + 1):
            E = _recurrence_pass(A, solve, k, _defect(Ad, khi, klo, S))
            S = S + E
            diag["refinements"] = it
            rel = _spectral_norms(E) / np.maximum(_spectral_norms(S), 1e-300)
            if np.max(rel) <= 1e-15:
                break
    return ResolventFamily(a, "recurrence", S, A, diag)


def _series_double(Ad, a, N, norm_a, tol):
    d = Ad.shape[0]
    S = np.zeros((N + 1, d, d))
    bound_sum = np.zeros(N + 1)
    P = np.eye(d)
    prev = None
    for j in range(SERIES_MAX_TERMS + 1):
        k = cesaro_kernel(a * (j + 1), N)
        S += k[:, None, None] * P
        bound = k * norm_a**j
        bound_sum += bound
        if norm_a == 0.0:
            return S, j, bound_sum
        size = _spectral_norms(S) / math.sqrt(d)
        if prev is not None and np.all(bound <= prev) and np.all(bound < tol * size):
            return S, j, bound_sum
        prev = bound
        P = P @ Ad
    raise ConvergenceError(f"matrix power series not converged after {SERIES_MAX_TERMS} terms")


def _series_fixed_point(Ad, a, N, norm_a, tol, bits):
    """Exact-integer evaluation of the series with its own stop rule.

    Numbers are Python integers scaled by ``2**bits``; rounding happens
    only in the floor divisions, so the alternating sum keeps its digits.
    Returns the float table and the index of the last term used.
    """
    d = Ad.shape[0]
    one = 1 << bits
    Ai = np.array([[int(round(x * one)) for x in row] for row in Ad], dtype=object)
    P = np.empty((d, d), dtype=object)
    for r in range(d):
        for c in range(d):
            P[r, c] = one if r == c else 0
    S = np.zeros((N + 1, d, d), dtype=object)
    fa = Fraction(a)
    shift = 2 * bits - 64
    to_float = np.vectorize(lambda x: math.ldexp(float(x >> shift), -64), otypes=[float])
    prev = None
    for j in range(SERIES_MAX_TERMS + 1):
        b = fa * (j + 1)
        bn, bd = b.numerator, b.denominator
        ks = np.empty(N + 1, dtype=object)
        kj = one
        ks[0] = kj
        for n in range(N):
            kj = kj * (bn + n * bd) // (bd * (n + 1))
            ks[n + 1] = kj
        S += ks[:, None, None] * P[None]
        bound = cesaro_kernel(a * (j + 1), N) * norm_a**j
        if prev is not None and np.all(bound <= prev):
            size = _spectral_norms(to_float(S)) / math.sqrt(d)
            if np.all(bound < tol * size):
                denom = one * one
                return np.vectorize(lambda x: float(Fraction(x, denom)), otypes=[float])(S), j
        prev = bound
        P = P.dot(Ai) >> bits
    raise ConvergenceError(f"matrix power series not converged after {SERIES_MAX_TERMS} terms")


def _guard_bits(a, N, J, smallest):
    # the largest coefficient entering the sum sets the integer size; the
    # smallest ||S(n)|| sets how far below it the result may sit
    kmax = max(float(np.max(cesaro_kernel(a * (j + 1), N))) for j in (0, J))
    bits = 64 + math.log2(max(kmax, 1.0)) + math.log2(J + 2) - math.log2(max(smallest, 1e-300))
    return max(80, int(bits) + 1)


def build_series(A, alpha, N: int, tol: float = 1e-16) -> ResolventFamily:
    r"""Sum :math:`S(n) = \sum_j k^{\alpha(j+1)}(n) A^j`.

    The series is truncated once the term bound
    :math:`k^{\alpha(j+1)}(n)\|A\|^j` is non-increasing in ``j`` and below
    ``tol`` times the entry scale of :math:`S(n)`, for every ``n``.

    For operators with negative or mixed spectrum the terms alternate and
    can exceed :math:`\|S(n)\|` by many orders of magnitude.  When the ratio
    of the term-bound sum to :math:`\|S(n)\|` exceeds
    ``SERIES_CANCELLATION_LIMIT`` the same truncated series is re-evaluated
    in exact integer fixed point with enough guard bits to absorb the
    cancellation.

    Raises
    ------
    MethodInapplicableError
        If ``norm_estimate(A) >= 1``.
    ConvergenceError
        If more than ``SERIES_MAX_TERMS`` terms would be needed.
    """
    A, a, N = _prepare(A, alpha, N)
    norm_a = A.norm_estimate()
    if norm_a >= 1.0:
        raise MethodInapplicableError(
            f"series construction needs ||A|| < 1, estimated ||A|| = {norm_a:.6g}"
        )
    Ad = A.to_dense()
    S, J, bound_sum = _series_double(Ad, a, N, norm_a, tol)
    norms = _spectral_norms(S)
    ratio = bound_sum / np.maximum(norms, 1e-300)
    diag = {"terms": J + 1, "cancellation_ratio": float(np.max(ratio)), "extended_precision": False}
    if np.max(ratio) > SERIES_CANCELLATION_LIMIT:
        # the double-precision truncation index is unreliable here, so the
        # exact pass finds its own and is repeated if it needed more bits
        smallest = float(np.min(bound_sum)) / float(np.max(ratio))
        bits = _guard_bits(a, N, J, smallest)
        for _ in range(3):
            S, J = _series_fixed_point(Ad, a, N, norm_a, tol, bits)
            needed = _guard_bits(a, N, J, float(np.min(_spectral_norms(S))))
            if needed <= bits:
                break
            bits = needed
        diag.update(terms=J + 1, extended_precision=True, guard_bits=bits)
    return ResolventFamily(a, "series", S, A, diag)


def build_beta(A, alpha, N: int) -> ResolventFamily:
    r"""Expand :math:`S(n) = \sum_{j=1}^n \beta_{\alpha,n}(j) R^{j+1}`.

    The coefficients alternate in sign.  ``diagnostics["cancellation_ratio"]``
    holds :math:`\sum_j |\beta_n(j)|\,\|R\|^{j+1} / \|S(n)\|` and
    ``diagnostics["flagged"]`` lists the ``n`` where it exceeds
    ``BETA_CANCELLATION_LIMIT``; those matrices should not be trusted.
    """
    A, a, N = _prepare(A, alpha, N)
    d = A.dim
    R = A.resolvent_solver(1.0)(np.eye(d))
    norm_r = float(np.linalg.norm(R, 2)) if d else 0.0
    S = np.empty((N + 1, d, d))
    S[0] = R
    if N == 0:
        return ResolventFamily(a, "beta", S, A, {"cancellation_ratio": [1.0], "flagged": []})
    B = beta_coefficients(a, N).values
    powers = np.empty((N + 1, d, d))
    powers[0] = R @ R
    for j in range(1, N):
        powers[j] = powers[j - 1] @ R
    bound = np.zeros(N + 1)
    bound[0] = norm_r
    for n in range(1, N + 1):
        S[n] = np.tensordot(B[n, 1 : n + 1], powers[:n], axes=1)
        bound[n] = float(np.sum(np.abs(B[n, 1 : n + 1]) * norm_r ** np.arange(2, n + 2)))
    ratio = bound / np.maximum(_spectral_norms(S), 1e-300)
    flagged = [int(n) for n in np.nonzero(ratio > BETA_CANCELLATION_LIMIT)[0]]
    return ResolventFamily(a, "beta", S, A, {"cancellation_ratio": ratio.tolist(), "flagged": flagged})


def build_family(A, alpha, N: int, method: str = "auto", tol: float = 1e-16) -> ResolventFamily:
    """Dispatch on ``method`` in ``{"auto", "recurrence", "series", "beta"}``.

    ``auto`` uses the recurrence: it is accurate in double precision for any
    operator with ``1`` in its resolvent set and needs a single factorization.
    """
    if method in ("auto", "recurrence"):
        return build_recurrence(A, alpha, N)
    if method == "series":
        return build_series(A, alpha, N, tol)
    if method == "beta":
        return build_beta(A, alpha, N)
    raise UsageError(f"unknown construction method {method!r}")


def verify_ztransform(
    F: ResolventFamily,
    lambdas,
    A: LinOperator | None = None,
    *,
    probes: int = 3,
    rng: np.random.Generator | None = None,
    tol: float = 1e-10,
) -> list[dict]:
    r"""Compare :math:`(((\lambda-1)/\lambda)^\alpha - A)^{-1}x` with
    :math:`\sum_{n\le N}\lambda^{-n}S(n)x` on random probe vectors.

    The omitted tail is bounded from the growth rate ``r`` of ``||S(n)||``
    over the last ten indices: relative to ``||lhs||`` it is at most
    ``||S(N)|| lambda^-N r / (1 - r) * ||z I - A||``, independent of the
    probes.  When that bound exceeds ``tol / 10`` the truncated sum cannot
    decide the comparison and the entry is reported ``inconclusive``.
    Deviations are normwise per probe.

    Returns
    -------
    list of dict
        One record per ``lambda`` with keys ``lambda``, ``deviation``,
        ``tail_estimate`` and ``status`` (``pass``, ``fail`` or
        ``inconclusive``).
    """
    A = F._require_operator(A)
    rng = rng if rng is not None else np.random.default_rng(0)
    X = rng.standard_normal((F.d, probes))
    norms = F.norms()
    N = F.N
    lag = min(10, N)
    a_norm = A.norm_estimate()
    out = []
    for lam in lambdas:
        lam = float(lam)
        if lam <= 1.0:
            raise UsageError(f"lambda samples must exceed 1, got {lam}")
        z = ((lam - 1.0) / lam) ** F.alpha
        lhs = A.resolve(z, X)
        w = lam ** -np.arange(N + 1, dtype=float)
        rhs = np.tensordot(w, F.table, axes=1) @ X
        col = np.maximum(np.linalg.norm(lhs, axis=0), 1e-300)
        dev = float(np.max(np.linalg.norm(lhs - rhs, axis=0) / col))
        if lag > 0 and norms[N - lag] > 0:
            r = (norms[N] / norms[N - lag]) ** (1.0 / lag) / lam
        else:
            r = 0.0
        tail = math.inf if r >= 1.0 else norms[N] * lam**-N * r / (1.0 - r) * (abs(z) + a_norm)
        if tail > 0.1 * tol:
            status = "inconclusive"
        else:
            status = "pass" if dev <= tol else "fail"
        out.append({"lambda": lam, "deviation": dev, "tail_estimate": float(tail),
                    "status": status})
    return out

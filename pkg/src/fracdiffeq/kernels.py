r"""Scalar sequence calculus: Cesàro kernels, finite convolution, partial
Z-transforms, forward differences and the Mittag-Leffler function.

The Cesàro kernel of order :math:`\beta` is

.. math::

    k^\beta(n) = \frac{\Gamma(\beta + n)}{\Gamma(\beta)\Gamma(n + 1)},

the discrete counterpart of :math:`t^{\beta-1}/\Gamma(\beta)`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import mpmath
import numpy as np
from scipy.linalg import toeplitz

from ._validation import check_horizon, check_same_horizon, check_sequence
from .exceptions import ConvergenceError, DomainError, UsageError

__all__ = [
    "FracOrder",
    "cesaro_kernel",
    "conv",
    "ztrans_partial",
    "forward_diff",
    "mittag_leffler",
]


@dataclass(frozen=True)
class FracOrder:
    """Real order ``alpha > 0`` with its ceiling ``m`` and gap ``m - alpha``."""

    alpha: float
    m: int = field(init=False)
    gap: float = field(init=False)

    def __post_init__(self):
        a = float(self.alpha)
        if not math.isfinite(a) or a <= 0:
            raise DomainError(f"order must be a finite positive real, got {self.alpha!r}")
        object.__setattr__(self, "alpha", a)
        object.__setattr__(self, "m", math.ceil(a))
        object.__setattr__(self, "gap", math.ceil(a) - a)

    @property
    def is_integer(self) -> bool:
        return self.gap == 0.0

    @classmethod
    def coerce(cls, order) -> "FracOrder":
        return order if isinstance(order, cls) else cls(order)

    def require_solver_range(self) -> "FracOrder":
        """Check ``1 < alpha <= 2``, the range the solvers are written for."""
        if not 1.0 < self.alpha <= 2.0:
            raise DomainError(f"solvers need 1 < alpha <= 2, got {self.alpha}")
        return self


def cesaro_kernel(beta: float, N: int) -> np.ndarray:
    """Return ``k^beta(0..N)``.

    Evaluated with the recurrence ``k(n+1) = k(n) (beta + n) / (n + 1)``, an
    exact rearrangement of the Gamma quotient that never overflows.  Orders in
    ``(-1, 0)`` are accepted (they arise as differences of kernels).
    """
    N = check_horizon(N)
    beta = float(beta)
    if not math.isfinite(beta) or beta == 0.0 or beta <= -1.0:
        raise DomainError(f"kernel order must lie in (-1, 0) or (0, inf), got {beta}")
    if beta.is_integer():
        # binomial coefficients C(n + beta - 1, n), correctly rounded
        b = int(beta)
        return np.array([float(math.comb(n + b - 1, n)) for n in range(N + 1)])
    n = np.arange(N, dtype=float)
    k = np.empty(N + 1)
    k[0] = 1.0
    k[1:] = np.cumprod((beta + n) / (n + 1.0))
    return k


def _lower_toeplitz(u: np.ndarray) -> np.ndarray:
    return toeplitz(u, np.zeros_like(u))


def conv(u, v) -> np.ndarray:
    r"""Finite Cauchy convolution :math:`(u*v)(n) = \sum_{j\le n} u(n-j)v(j)`.

    ``u`` is a scalar sequence; ``v`` may carry trailing state axes (vectors,
    matrices).  Both must share the horizon ``N``.
    """
    u = check_sequence(u, name="u")
    v = check_sequence(v, name="v")
    if u.ndim != 1:
        raise UsageError("the left convolution factor must be a scalar sequence")
    check_same_horizon(u, v)
    flat = v.reshape(v.shape[0], -1)
    return (_lower_toeplitz(u) @ flat).reshape(v.shape)


def ztrans_partial(u, z: complex, J: int | None = None):
    r"""Partial Z-transform :math:`\sum_{j=0}^{J} z^{-j} u(j)`.

    A verification functional only; nothing here inverts a transform.
    """
    u = check_sequence(u, name="u", allow_complex=True)
    if z == 0:
        raise DomainError("the Z-transform is not defined at z = 0")
    J = u.shape[0] - 1 if J is None else check_horizon(J, name="J")
    if J > u.shape[0] - 1:
        raise UsageError(f"truncation index {J} exceeds the horizon {u.shape[0] - 1}")
    w = 1.0 / z
    acc = u[J].copy()
    for j in range(J - 1, -1, -1):
        acc = acc * w + u[j]
    if np.isrealobj(z) or complex(z).imag == 0:
        if np.all(np.imag(acc) == 0):
            acc = np.real(acc)
    return acc.item() if np.ndim(acc) == 0 else acc


def forward_diff(u, m: int) -> np.ndarray:
    """``m``-th forward difference from the binomial formula.

    The output has horizon ``N - m``; ``m = 0`` returns a copy of ``u``.
    """
    m = check_horizon(m, name="m")
    u = check_sequence(u, name="u", min_horizon=m)
    N = u.shape[0] - 1
    out = np.zeros((N - m + 1,) + u.shape[1:])
    for j in range(m + 1):
        out += math.comb(m, j) * (-1) ** (m - j) * u[j : j + N - m + 1]
    return out


_ML_TOL = 1e-17
_ML_MAX_TERMS = 10_000
_ML_NEG_LIMIT = 50.0
# sum/|result| ratio above which the double-precision alternating sum is redone
_ML_CANCELLATION = 1e3


def _ml_terms_double(a, b, z):
    """Sum the series in double precision; return (value, sum of |terms|)."""
    if z == 0.0:
        return 1.0 / math.gamma(b), 1.0 / abs(math.gamma(b))
    logz = math.log(abs(z))
    sign = -1.0 if z < 0 else 1.0
    total = 0.0
    abs_total = 0.0
    prev_log = -math.inf
    for k in range(_ML_MAX_TERMS):
        log_t = k * logz - math.lgamma(a * k + b)
        try:
            term = (sign**k) * math.exp(log_t)
        except OverflowError:
            raise DomainError(f"E_{{{a},{b}}}({z}) overflows double precision") from None
        total += term
        abs_total += abs(term)
        # log-terms are concave in k, so once they fall they keep falling
        if log_t < prev_log and abs(term) < _ML_TOL * (1.0 + abs(total)):
            return total, abs_total
        prev_log = log_t
    raise ConvergenceError(f"Mittag-Leffler series did not converge in {_ML_MAX_TERMS} terms")


def mittag_leffler(a: float, b: float, z: float) -> float:
    r"""Two-parameter Mittag-Leffler function :math:`E_{a,b}(z)` for real ``z``.

    The defining series is summed with log-Gamma terms.  Negative arguments
    are limited to ``z >= -50``; when the alternating sum cancels more than
    three digits it is re-summed with :mod:`mpmath` at a working precision
    that covers the lost digits, so the double result stays accurate.
    """
    if a <= 0 or b <= 0:
        raise DomainError(f"Mittag-Leffler parameters must be positive, got a={a}, b={b}")
    z = float(z)
    if not math.isfinite(z):
        raise DomainError("Mittag-Leffler argument must be finite")
    if z < -_ML_NEG_LIMIT:
        raise DomainError(f"Mittag-Leffler restricted to z >= -{_ML_NEG_LIMIT:g}, got {z}")
    value, abs_sum = _ml_terms_double(a, b, z)
    if z >= 0 or abs_sum <= _ML_CANCELLATION * abs(value):
        return value
    # the double value may itself be noise, so raise precision until it covers
    # the cancellation measured at the current precision
    digits = 30 + int(math.log10(abs_sum / max(abs(value), 1e-300)))
    for _ in range(8):
        result = _ml_mp(a, b, z, digits)
        needed = 30 + int(math.log10(abs_sum / max(abs(result), 1e-300)))
        if needed <= digits:
            return result
        digits = needed
    raise ConvergenceError(f"E_{{{a},{b}}}({z}): precision escalation did not settle")


def _ml_mp(a, b, z, digits):
    with mpmath.workdps(digits):
        zz = mpmath.mpf(z)
        aa, bb = mpmath.mpf(a), mpmath.mpf(b)
        total = mpmath.mpf(0)
        eps = mpmath.mpf(10) ** (-digits)
        for k in range(_ML_MAX_TERMS):
            term = zz**k * mpmath.rgamma(aa * k + bb)
            total += term
            if k > abs(z) ** (1 / a) and abs(term) < eps * (1 + abs(total)):
                return float(total)
    raise ConvergenceError(f"Mittag-Leffler series did not converge in {_ML_MAX_TERMS} terms")

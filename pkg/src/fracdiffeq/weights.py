r"""Weighted sequence spaces :math:`l^\infty_h`.

A weight ``h`` is admissible when

.. math::

    r(n) = \frac{1}{h(n)} \sum_{k=0}^{n-2} h(k) \longrightarrow 0,

and :math:`H = \sup_n r(n)` is the constant entering the contraction bound
:math:`L\,\|S\|_\infty H < 1`.  Weights are stored as logarithms; indices
with ``h(n) = 0`` form the zero set.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy.special import gammaln, logsumexp

from ._validation import check_horizon
from .exceptions import DomainError, UsageError

__all__ = ["WEIGHT_KINDS", "WeightedSpace", "admissibility", "weighted_norm"]

WEIGHT_KINDS = ("n_factorial", "factorial", "geometric", "custom")


@dataclass(frozen=True, eq=False)
class WeightedSpace:
    """Weight ``h(0..N)`` with its ratio sequence and admissibility data.

    Attributes
    ----------
    kind : str
    log_h : ndarray
        ``log h(n)``; ``-inf`` on the zero set.
    ratios : ndarray
        ``r(n)`` for ``n = 0..N`` (``r(0) = r(1) = 0``).
    H : float
        ``max_n r(n)`` over the window.
    admissible : bool
        Finite-window heuristic: ``r`` non-increasing over the last ``N/2``
        indices and ``r(N) < r(4) / 10``.
    param : float or None
        Ratio of the geometric weight.
    """

    kind: str
    log_h: np.ndarray
    ratios: np.ndarray
    H: float
    admissible: bool
    param: float | None = None
    _exact: tuple | None = None

    @property
    def N(self) -> int:
        return self.log_h.shape[0] - 1

    @property
    def zero_set(self) -> np.ndarray:
        return np.nonzero(np.isneginf(self.log_h))[0]

    @property
    def argmax(self) -> int:
        return int(np.argmax(self.ratios))

    def h(self) -> np.ndarray:
        return np.exp(self.log_h)

    def exact_weights(self) -> list[Fraction]:
        """Weights as exact rationals (integer kinds and geometric ratios)."""
        if self._exact is None:
            raise UsageError("exact weights are unavailable for custom floating weights")
        return list(self._exact)

    def exact_ratios(self) -> list[Fraction]:
        """``r(n)`` in rational arithmetic; ``r(n) = 0`` where ``h(n) = 0``."""
        h = self.exact_weights()
        out = []
        partial = Fraction(0)
        for n in range(len(h)):
            if n >= 2:
                partial += h[n - 2]
            out.append(partial / h[n] if h[n] != 0 else Fraction(0))
        return out

    def describe(self) -> dict:
        return {
            "kind": self.kind,
            "N": self.N,
            "H": self.H,
            "argmax": self.argmax,
            "admissible": self.admissible,
            "admissibility_test": "finite window: tail ratios non-increasing and r(N) < r(4)/10",
        }


def _log_weights(kind, N, param, values):
    n = np.arange(N + 1, dtype=float)
    exact = None
    if kind == "n_factorial":
        with np.errstate(divide="ignore"):
            log_h = np.log(n) + gammaln(n + 1)
        exact = tuple(Fraction(k * math.factorial(k)) for k in range(N + 1))
    elif kind == "factorial":
        log_h = gammaln(n + 1)
        exact = tuple(Fraction(math.factorial(k)) for k in range(N + 1))
    elif kind == "geometric":
        if param is None or not param > 0:
            raise DomainError(f"geometric weight needs a ratio > 0, got {param!r}")
        log_h = n * math.log(param)
        q = Fraction(param)
        exact = tuple(q**k for k in range(N + 1))
    elif kind == "custom":
        h = np.asarray(values, dtype=float).reshape(-1)
        if h.shape[0] != N + 1:
            raise UsageError(f"custom weight needs {N + 1} values, got {h.shape[0]}")
        if not np.all(np.isfinite(h)) or np.any(h[1:] <= 0) or h[0] < 0:
            raise DomainError("custom weights must be finite and positive for n >= 1")
        with np.errstate(divide="ignore"):
            log_h = np.log(h)
    else:
        raise UsageError(f"unknown weight kind {kind!r}; expected one of {WEIGHT_KINDS}")
    return log_h, exact


def admissibility(kind: str = "n_factorial", N: int = 50, *, param: float | None = None,
                  values=None) -> WeightedSpace:
    """Build the weighted space of ``kind`` on ``0..N`` (``N >= 4``).

    ``n_factorial`` is ``h(n) = n n!`` with ``h(0) = 0`` kept in the sums,
    ``factorial`` is ``n!``, ``geometric`` is ``param**n`` and ``custom``
    takes explicit ``values``.
    """
    N = check_horizon(N, minimum=4)
    log_h, exact = _log_weights(kind, N, param, values)
    ratios = np.zeros(N + 1)
    for n in range(2, N + 1):
        if np.isneginf(log_h[n]):
            continue
        head = log_h[: n - 1]
        if np.all(np.isneginf(head)):
            continue
        ratios[n] = math.exp(float(logsumexp(head[np.isfinite(head)])) - log_h[n])
    if exact is not None:
        # rational ratios are exact; the log-domain values carry rounding
        W0 = WeightedSpace(kind, log_h, ratios, 0.0, False, param, exact)
        ratios = np.array([float(r) for r in W0.exact_ratios()])
    tail = ratios[N - N // 2 :]
    admissible = bool(np.all(np.diff(tail) <= 0) and ratios[N] < ratios[4] / 10)
    return WeightedSpace(kind, log_h, ratios, float(np.max(ratios)), admissible, param, exact)


def weighted_norm(u, W: WeightedSpace, norm=None) -> float:
    r""":math:`\sup_n \|u(n)\| / h(n)`, evaluated in the log domain.

    Indices in the zero set are skipped when ``u(n) = 0`` there and make the
    norm ``inf`` otherwise.  ``norm`` maps a state vector to its norm
    (Euclidean by default).
    """
    u = np.asarray(u, dtype=float)
    if u.shape[0] > W.N + 1:
        raise UsageError(f"sequence horizon {u.shape[0] - 1} exceeds the weight window {W.N}")
    flat = u.reshape(u.shape[0], -1)
    sizes = np.array([norm(x) for x in flat]) if norm else np.linalg.norm(flat, axis=1)
    log_h = W.log_h[: u.shape[0]]
    zero = np.isneginf(log_h)
    if np.any(sizes[zero] > 0):
        return math.inf
    live = ~zero & (sizes > 0)
    if not np.any(live):
        return 0.0
    return float(np.exp(np.max(np.log(sizes[live]) - log_h[live])))

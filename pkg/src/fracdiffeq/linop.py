"""Finite-dimensional representations of the operator ``A``.

Three representations are provided: a dense matrix, a diagonal
(multiplication) operator and the Dirichlet Laplacian on an interval
discretized by second-order finite differences on interior points.

Resolvent solves ``(lam I - A) x = y`` are direct.  A value ``lam`` is
treated as outside the resolvent set when a pivot of the factorization falls
below ``PIVOT_RTOL`` times the scale of ``lam I - A``.
"""

from __future__ import annotations

import math
import warnings
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
import scipy.linalg

from .exceptions import DomainError, ResolventSetError, UsageError

__all__ = [
    "PIVOT_RTOL",
    "LinOperator",
    "DenseOperator",
    "DiagonalOperator",
    "Laplacian1D",
    "operator_from_descriptor",
    "apply",
    "resolve",
    "norm_estimate",
    "entrywise_nonneg",
]

PIVOT_RTOL = 1e-13


class LinOperator(ABC):
    """Common interface of the operator representations."""

    kind: str = ""

    @property
    @abstractmethod
    def dim(self) -> int: ...

    @abstractmethod
    def _apply(self, x: np.ndarray) -> np.ndarray: ...

    @abstractmethod
    def _factorize(self, lam: float): ...

    @abstractmethod
    def norm_estimate(self) -> float: ...

    @abstractmethod
    def to_dense(self) -> np.ndarray: ...

    @abstractmethod
    def to_descriptor(self) -> dict: ...

    def _check_operand(self, x, name="x"):
        arr = np.asarray(x, dtype=float)
        if arr.ndim not in (1, 2) or arr.shape[0] != self.dim:
            raise UsageError(
                f"{name} must have leading dimension {self.dim}, got shape {arr.shape}"
            )
        return arr

    def apply(self, x) -> np.ndarray:
        """Return ``A x``; ``x`` is a vector or a matrix of column vectors."""
        return self._apply(self._check_operand(x))

    def resolvent_solver(self, lam: float):
        """Factorize ``lam I - A`` once and return a solve callable."""
        return self._cached_factorization(float(lam))

    def resolve(self, lam: float, y) -> np.ndarray:
        """Solve ``(lam I - A) x = y``."""
        return self.resolvent_solver(lam)(self._check_operand(y, "y"))

    def entrywise_nonneg(self) -> bool:
        return bool(np.all(self.to_dense() >= 0.0))

    def __post_init__(self):
        self._cached_factorization = lru_cache(maxsize=8)(self._factorize)


def _singular(lam, pivot, scale):
    return ResolventSetError(
        f"lambda = {lam:.17g} is numerically in the spectrum "
        f"(pivot {pivot:.3e} below {PIVOT_RTOL:g} * scale {scale:.3e})"
    )


@dataclass(eq=False)
class DenseOperator(LinOperator):
    """General real ``d x d`` matrix."""

    matrix: np.ndarray
    kind = "dense"

    def __post_init__(self):
        M = np.array(self.matrix, dtype=float)
        if M.ndim != 2 or M.shape[0] != M.shape[1]:
            raise UsageError(f"dense operator needs a square matrix, got shape {M.shape}")
        if not np.all(np.isfinite(M)):
            raise DomainError("dense operator has non-finite entries")
        M.setflags(write=False)
        self.matrix = M
        super().__post_init__()

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def _apply(self, x):
        return self.matrix @ x

    def _factorize(self, lam):
        B = lam * np.eye(self.dim) - self.matrix
        scale = float(np.max(np.abs(B))) if B.size else 0.0
        with warnings.catch_warnings():
            # exact singularity is reported through the pivot test below
            warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
            lu, piv = scipy.linalg.lu_factor(B, check_finite=False)
        pivot = float(np.min(np.abs(np.diag(lu)))) if B.size else 1.0
        if scale == 0.0 or pivot < PIVOT_RTOL * scale:
            raise _singular(lam, pivot, scale)
        return lambda y: scipy.linalg.lu_solve((lu, piv), y, check_finite=False)

    def norm_estimate(self) -> float:
        # exact spectral norm from the SVD; d is small
        return float(np.linalg.norm(self.matrix, 2)) if self.dim else 0.0

    def to_dense(self):
        return self.matrix.copy()

    def to_descriptor(self):
        return {"type": "dense", "matrix": self.matrix.tolist()}


@dataclass(eq=False)
class DiagonalOperator(LinOperator):
    """Multiplication operator ``(A f)(x_i) = m_i f(x_i)``.

    ``grid`` optionally records the points ``x_i`` the multipliers were
    sampled at; it does not enter any computation.
    """

    multipliers: np.ndarray
    grid: np.ndarray | None = None
    kind = "diagonal"

    def __post_init__(self):
        m = np.array(self.multipliers, dtype=float).reshape(-1)
        if not np.all(np.isfinite(m)):
            raise DomainError("diagonal operator has non-finite multipliers")
        m.setflags(write=False)
        self.multipliers = m
        if self.grid is not None:
            g = np.array(self.grid, dtype=float).reshape(-1)
            if g.shape != m.shape:
                raise UsageError("grid and multipliers differ in length")
            g.setflags(write=False)
            self.grid = g
        super().__post_init__()

    @property
    def dim(self) -> int:
        return self.multipliers.shape[0]

    def _apply(self, x):
        return self.multipliers.reshape((-1,) + (1,) * (x.ndim - 1)) * x

    def _factorize(self, lam):
        den = lam - self.multipliers
        scale = abs(lam) + (float(np.max(np.abs(self.multipliers))) if self.dim else 0.0)
        pivot = float(np.min(np.abs(den))) if self.dim else 1.0
        if scale == 0.0 or pivot < PIVOT_RTOL * scale:
            raise _singular(lam, pivot, scale)
        return lambda y: y / den.reshape((-1,) + (1,) * (y.ndim - 1))

    def norm_estimate(self) -> float:
        return float(np.max(np.abs(self.multipliers))) if self.dim else 0.0

    def entrywise_nonneg(self) -> bool:
        return bool(np.all(self.multipliers >= 0.0))

    def to_dense(self):
        return np.diag(self.multipliers)

    def to_descriptor(self):
        out = {"type": "diagonal", "multipliers": self.multipliers.tolist()}
        if self.grid is not None:
            out["grid"] = self.grid.tolist()
        return out


@dataclass(eq=False)
class Laplacian1D(LinOperator):
    """Dirichlet Laplacian on ``[a, b]`` with ``points`` interior nodes.

    Materializes to ``tridiag(1, -2, 1) / dx**2`` with
    ``dx = (b - a) / (points + 1)``.
    """

    a: float
    b: float
    points: int
    kind = "laplacian1d"
    dx: float = field(init=False)

    def __post_init__(self):
        if isinstance(self.points, bool) or not isinstance(self.points, (int, np.integer)):
            raise UsageError(f"points must be an integer, got {self.points!r}")
        if self.points < 1:
            raise UsageError("the Laplacian needs at least one interior point")
        self.a, self.b, self.points = float(self.a), float(self.b), int(self.points)
        if not (math.isfinite(self.a) and math.isfinite(self.b)) or self.b <= self.a:
            raise DomainError(f"invalid interval [{self.a}, {self.b}]")
        self.dx = (self.b - self.a) / (self.points + 1)
        super().__post_init__()

    @property
    def dim(self) -> int:
        return self.points

    @property
    def grid(self) -> np.ndarray:
        return self.a + self.dx * np.arange(1, self.points + 1)

    def eigenvalues(self) -> np.ndarray:
        k = np.arange(1, self.points + 1)
        return -(4.0 / self.dx**2) * np.sin(k * np.pi / (2 * (self.points + 1))) ** 2

    def _apply(self, x):
        out = -2.0 * x
        out[1:] += x[:-1]
        out[:-1] += x[1:]
        return out / self.dx**2

    def _factorize(self, lam):
        # Thomas algorithm on lam I - A: diagonal lam + 2/dx^2, off-diagonals -1/dx^2
        d = self.points
        off = -1.0 / self.dx**2
        diag = lam + 2.0 / self.dx**2
        scale = abs(lam) + 4.0 / self.dx**2
        c = np.empty(d)
        piv = np.empty(d)
        piv[0] = diag
        for i in range(1, d):
            if abs(piv[i - 1]) < PIVOT_RTOL * scale:
                raise _singular(lam, abs(piv[i - 1]), scale)
            c[i - 1] = off / piv[i - 1]
            piv[i] = diag - c[i - 1] * off
        if abs(piv[-1]) < PIVOT_RTOL * scale:
            raise _singular(lam, abs(piv[-1]), scale)

        def solve(y):
            z = np.array(y, dtype=float, copy=True)
            for i in range(1, d):
                z[i] -= c[i - 1] * z[i - 1]
            z[-1] /= piv[-1]
            for i in range(d - 2, -1, -1):
                z[i] = (z[i] - off * z[i + 1]) / piv[i]
            return z

        return solve

    def norm_estimate(self) -> float:
        return float(np.max(np.abs(self.eigenvalues())))

    def entrywise_nonneg(self) -> bool:
        return False

    def to_dense(self):
        d = self.points
        return (
            np.diag(np.full(d, -2.0)) + np.diag(np.ones(d - 1), 1) + np.diag(np.ones(d - 1), -1)
        ) / self.dx**2

    def to_descriptor(self):
        return {"type": "laplacian1d", "interval": [self.a, self.b], "points": self.points}


def operator_from_descriptor(desc: dict) -> LinOperator:
    """Build an operator from its JSON descriptor.

    Accepted forms::

        {"type": "dense", "matrix": [[...], ...]}
        {"type": "diagonal", "multipliers": [...], "grid": [...]}   # grid optional
        {"type": "laplacian1d", "interval": [a, b], "points": d}
        {"type": "zero", "dim": d}
    """
    if not isinstance(desc, dict) or "type" not in desc:
        raise UsageError("operator descriptor must be an object with a 'type' field")
    kind = desc["type"]
    try:
        if kind == "dense":
            return DenseOperator(desc["matrix"])
        if kind == "diagonal":
            return DiagonalOperator(desc["multipliers"], desc.get("grid"))
        if kind == "laplacian1d":
            a, b = desc["interval"]
            return Laplacian1D(a, b, desc["points"])
        if kind == "zero":
            return DenseOperator(np.zeros((int(desc["dim"]), int(desc["dim"]))))
    except KeyError as exc:
        raise UsageError(f"operator descriptor of type {kind!r} lacks field {exc}") from None
    raise UsageError(f"unknown operator type {kind!r}")


def apply(A: LinOperator, x) -> np.ndarray:
    return A.apply(x)


def resolve(A: LinOperator, lam: float, y) -> np.ndarray:
    return A.resolve(lam, y)


def norm_estimate(A: LinOperator) -> float:
    return A.norm_estimate()


def entrywise_nonneg(A: LinOperator) -> bool:
    return A.entrywise_nonneg()

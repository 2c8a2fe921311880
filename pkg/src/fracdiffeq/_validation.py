"""Input validation helpers in the spirit of ``sklearn.utils.validation``.

Sequences are numpy arrays whose axis 0 is the time index ``n = 0..N``;
any trailing axes are the state (vector or matrix) shape.
"""

from __future__ import annotations

import math
import os
from numbers import Real

import numpy as np

from .exceptions import DomainError, UsageError


def check_sequence(u, *, name="u", min_horizon=0, allow_complex=False):
    """Return ``u`` as a float array with time on axis 0.

    Raises :class:`UsageError` when fewer than ``min_horizon + 1`` points are
    given and :class:`DomainError` when any entry is NaN or infinite.
    """
    dtype = np.complex128 if allow_complex else np.float64
    try:
        arr = np.asarray(u, dtype=dtype)
    except (TypeError, ValueError) as exc:
        raise UsageError(f"{name} is not a numeric array: {exc}") from None
    if arr.ndim == 0:
        raise UsageError(f"{name} must be a sequence, got a scalar")
    if arr.shape[0] < min_horizon + 1:
        raise UsageError(
            f"{name} has horizon {arr.shape[0] - 1}, at least {min_horizon} is required"
        )
    if not np.all(np.isfinite(arr)):
        raise DomainError(f"{name} contains non-finite entries")
    return arr


def check_same_horizon(u, v, names=("u", "v")):
    if u.shape[0] != v.shape[0]:
        raise UsageError(
            f"{names[0]} and {names[1]} have different horizons "
            f"({u.shape[0] - 1} vs {v.shape[0] - 1})"
        )


def check_horizon(N, *, name="N", minimum=0):
    if isinstance(N, bool) or not isinstance(N, (int, np.integer)):
        raise UsageError(f"{name} must be an integer, got {N!r}")
    if N < minimum:
        raise UsageError(f"{name} must be >= {minimum}, got {N}")
    return int(N)


def check_positive_real(x, name):
    if not isinstance(x, Real) or not math.isfinite(x) or x <= 0:
        raise DomainError(f"{name} must be a finite positive real, got {x!r}")
    return float(x)


def check_vector(x, d, name="x"):
    arr = np.asarray(x, dtype=float)
    if arr.shape[:1] != (d,):
        raise UsageError(f"{name} must have leading dimension {d}, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise DomainError(f"{name} contains non-finite entries")
    return arr


SEED_ENV = "FRACDIFF_SEED"


def rng_from_env(seed=None) -> np.random.Generator:
    """Generator seeded by ``seed``, else ``$FRACDIFF_SEED``, else 0."""
    if seed is None:
        raw = os.environ.get(SEED_ENV, "0")
        try:
            seed = int(raw)
        except ValueError:
            raise UsageError(f"{SEED_ENV} must be an integer, got {raw!r}") from None
    return np.random.default_rng(seed)

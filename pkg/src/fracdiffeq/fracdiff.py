r"""Fractional sums and fractional differences of sequences.

All operators act along axis 0 (time) and componentwise on trailing axes.
With :math:`m = \lceil\alpha\rceil`,

* fractional sum      :math:`\Delta^{-\alpha}u = k^\alpha * u`
* Riemann-Liouville   :math:`\Delta^\alpha u = \Delta^m (k^{m-\alpha} * u)`
* Caputo              :math:`{}^C\Delta^\alpha u = k^{m-\alpha} * \Delta^m u`

A difference of order ``alpha`` consumes ``m`` trailing indices, so an input
of horizon ``N`` yields an output of horizon ``N - m``.
"""

from __future__ import annotations

import numpy as np

from ._validation import check_same_horizon, check_sequence
from .exceptions import DomainError, UsageError
from .kernels import FracOrder, cesaro_kernel, conv, forward_diff

__all__ = ["frac_sum", "rl_diff", "caputo_diff", "rl_diff_of_conv"]


def _order(order) -> FracOrder:
    try:
        return FracOrder.coerce(order)
    except DomainError:
        raise
    except (TypeError, ValueError) as exc:
        raise DomainError(f"invalid order {order!r}: {exc}") from None


def frac_sum(order, u) -> np.ndarray:
    """Fractional sum ``(k^alpha * u)(n)`` for ``n = 0..N``."""
    a = _order(order)
    u = check_sequence(u, name="u")
    return conv(cesaro_kernel(a.alpha, u.shape[0] - 1), u)


def rl_diff(order, u) -> np.ndarray:
    """Riemann-Liouville fractional difference, horizon ``N - m``.

    Integer orders are routed to :func:`~fracdiffeq.kernels.forward_diff`,
    which avoids the degenerate kernel ``k^0``.
    """
    a = _order(order)
    u = check_sequence(u, name="u", min_horizon=a.m)
    if a.is_integer:
        return forward_diff(u, a.m)
    return forward_diff(frac_sum(a.gap, u), a.m)


def caputo_diff(order, u) -> np.ndarray:
    """Caputo fractional difference, horizon ``N - m``."""
    a = _order(order)
    u = check_sequence(u, name="u", min_horizon=a.m)
    du = forward_diff(u, a.m)
    if a.is_integer:
        return du
    return conv(cesaro_kernel(a.gap, du.shape[0] - 1), du)


def rl_diff_of_conv(order, u, v) -> np.ndarray:
    r"""Evaluate :math:`\Delta^\alpha(u * v)` through the convolution rule

    .. math::

        \Delta^\alpha(u*v)(n) = (\Delta^\alpha u * v)(n)
            + (u(1) - \alpha u(0))\, v(n+1) + u(0)\, v(n+2),

    valid for ``1 < alpha <= 2``.  This is a second evaluation path meant to
    cross-check ``rl_diff(order, conv(u, v))``.

    Parameters
    ----------
    order : float or FracOrder
    u : array_like, shape (N+1,)
        Scalar sequence.
    v : array_like, shape (N+1, ...)
        Scalar or vector sequence with the same horizon.

    Returns
    -------
    ndarray, shape (N-1, ...)
    """
    a = _order(order)
    if a.m != 2:
        raise DomainError(f"the convolution rule is implemented for 1 < alpha <= 2, got {a.alpha}")
    u = check_sequence(u, name="u", min_horizon=4)
    v = check_sequence(v, name="v", min_horizon=4)
    if u.ndim != 1:
        raise UsageError("u must be a scalar sequence")
    check_same_horizon(u, v)
    N = u.shape[0] - 1
    du = rl_diff(a, u)
    head = conv(du, v[: N - 1])
    return head + (u[1] - a.alpha * u[0]) * v[1:N] + u[0] * v[2:]

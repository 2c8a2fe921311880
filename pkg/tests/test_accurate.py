from fractions import Fraction

import numpy as np
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from fracdiffeq._accurate import accurate_sum, two_prod, two_sum

finite = st.floats(-1e100, 1e100, allow_nan=False, allow_subnormal=False)


@given(finite, finite)
def test_two_sum_exact(a, b):
    s, e = two_sum(a, b)
    assert Fraction(s) + Fraction(e) == Fraction(a) + Fraction(b)


@given(st.floats(-1e150, 1e150, allow_subnormal=False), st.floats(-1e150, 1e150, allow_subnormal=False))
def test_two_prod_exact(a, b):
    p, e = two_prod(a, b)
    # below about 1e-290 the rounding error itself is not representable
    if abs(float(p)) > 1e-280 or a == 0 or b == 0:
        assert Fraction(float(p)) + Fraction(float(e)) == Fraction(a) * Fraction(b)


@given(arrays(np.float64, st.integers(1, 200), elements=st.floats(-1e6, 1e6)))
def test_accurate_sum_near_exact(t):
    t = np.append(t, -np.sum(t))
    hi, lo = accurate_sum(t)
    exact = sum(Fraction(x) for x in t)
    err = abs(Fraction(float(hi)) + Fraction(float(lo)) - exact)
    m = t.size
    assert float(err) <= m**2 * 2.0**-104 * float(np.max(np.abs(t))) + 1e-300


def test_accurate_sum_axis_and_cancellation():
    t = np.array([[1e16, 1.0], [1.0, 1e-20], [-1e16, -1.0]])
    hi, lo = accurate_sum(t, axis=0)
    assert hi[0] + lo[0] == 1.0
    assert hi[1] == 1e-20

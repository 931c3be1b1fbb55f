from fractions import Fraction as F
from math import factorial

import pytest
from hypothesis import given, settings, strategies as st

from ihpair.exact import (
    ILSeries,
    MPoly,
    NonUnitError,
    SeriesRing,
    TruncationError,
    bernoulli,
    coeff_extract,
    format_rat,
    one_minus_exp_inv,
    series_exp,
    series_invert,
)

V = ("x1", "x2", "d2")


def bernoulli_by_inversion(n_max):
    """Independent oracle: invert (e^u - 1)/u = sum u^k/(k+1)! as a power series."""
    a = [F(1, factorial(k + 1)) for k in range(n_max + 1)]
    b = [F(0)] * (n_max + 1)
    b[0] = F(1)
    for n in range(1, n_max + 1):
        b[n] = -sum(a[k] * b[n - k] for k in range(1, n + 1))
    return [b[n] * factorial(n) for n in range(n_max + 1)]


def test_bernoulli_examples():
    assert bernoulli(0) == 1
    assert bernoulli(1) == F(-1, 2)
    assert bernoulli(2) == F(1, 6)


def test_bernoulli_matches_series_inversion():
    assert [bernoulli(n) for n in range(21)] == bernoulli_by_inversion(20)


def test_format_rat():
    assert format_rat(F(3)) == "3"
    assert format_rat(F(-1, 2)) == "-1/2"


# -- MPoly

coef = st.fractions(min_value=-5, max_value=5, max_denominator=4)
expo = st.tuples(st.integers(0, 2), st.integers(0, 2), st.integers(-1, 2))
polys = st.dictionaries(expo, coef, max_size=4).map(lambda d: MPoly(V, d))


@settings(max_examples=60, deadline=None)
@given(polys, polys, polys)
def test_ring_axioms(p, q, r):
    assert (p * q) * r == p * (q * r)
    assert p * (q + r) == p * q + p * r
    assert p + q == q + p
    assert p * q == q * p
    assert (p - p).is_zero()


def test_mpoly_no_zero_coefficients_and_equality():
    p = MPoly(V, {(1, 0, 0): F(1), (0, 1, 0): F(0)})
    assert len(p) == 1
    assert p == MPoly.var(V, "x1")


def test_mpoly_negative_d2_power():
    d = MPoly.var(V, "d2")
    assert (d ** -2) * d ** 2 == MPoly.const(V, 1)


def test_mpoly_substitute_and_diff():
    x1, x2 = MPoly.var(V, "x1"), MPoly.var(V, "x2")
    p = (x1 - x2) ** 3
    assert p.diff("x1") == (x1 - x2) ** 2 * 3
    q = p.substitute({"x1": x2 + 1}, V)
    assert q == MPoly.const(V, 1)


def test_coeff_extract_examples():
    d = ("d2", "d3")
    assert coeff_extract(MPoly(d, {(3, 0): F(1, 24)}), {"d2": 3}) == F(1, 24)
    assert coeff_extract(MPoly(d, {(2, 0): F(1)}), {"d2": 1, "d3": 1}) == 0


# -- iterated series

R2 = SeriesRing(2, 1)
R1 = SeriesRing(1, 1)


def test_invert_one():
    one = ILSeries.one(R2)
    assert series_invert(one).terms == one.terms


def test_invert_geometric():
    s = ILSeries(R2, {(1, 0, 0): F(1), (0, 1, 0): F(-1)})  # y1 - y2
    inv = series_invert(s, (-1, 3, None))
    expected = {(-1 - t, t, 0): F(1) for t in range(4)}
    assert inv.terms == expected


def test_invert_monomial():
    s = ILSeries(R1, {(1, 1): F(1)})
    assert series_invert(s).terms == {(-1, -1): F(1)}


def test_invert_non_unit():
    # y1 and y2 both present with the y1 term carrying a nilpotent: no plain leading term
    ring = SeriesRing(1, 2, (2,))
    s = ILSeries(ring, {(1, 0, 1): F(1)})
    with pytest.raises(NonUnitError, match="non-unit leading term"):
        series_invert(s)


def test_exp_examples():
    assert series_exp(ILSeries(R1, {}), (3, None)).terms == {(0, 0): F(1)}
    s = ILSeries(R1, {(1, 1): F(-1, 4)})
    e = series_exp(s, (3, None))
    assert e.terms == {(0, 0): F(1), (1, 1): F(-1, 4), (2, 2): F(1, 32), (3, 3): F(-1, 384)}


def test_exp_rejects_constant_term():
    with pytest.raises(ValueError):
        series_exp(ILSeries(R1, {(0, 0): F(1)}))


def test_one_minus_exp_inv_examples():
    minus_y = ILSeries(R1, {(1, 0): F(-1)})
    s = one_minus_exp_inv(minus_y, (3, None))
    assert s.terms == {(-1, 0): F(1), (0, 0): F(1, 2), (1, 0): F(1, 12), (3, 0): F(-1, 720)}
    plus_y = ILSeries(R1, {(1, 0): F(1)})
    s = one_minus_exp_inv(plus_y, (1, None))
    assert s.terms == {(-1, 0): F(-1), (0, 0): F(1, 2), (1, 0): F(-1, 12)}


def test_one_minus_exp_inv_bernoulli_coefficients():
    minus_y = ILSeries(R1, {(1, 0): F(-1)})
    s = one_minus_exp_inv(minus_y, (11, None))
    for n in range(13):
        assert s.terms.get((n - 1, 0), 0) == (-1) ** n * bernoulli(n) / factorial(n)


def test_one_minus_exp_inv_identity_and_delta_coefficient():
    u = ILSeries(R1, {(1, 1): F(-1, 2)})
    inv = one_minus_exp_inv(u, (5, None))
    one_minus = ILSeries.one(R1) - series_exp(u, (8, None))
    prod = one_minus.mul(inv, (5, None))
    assert prod.terms == {(0, 0): F(1)}
    assert inv.coefficient((1, 1)) == F(1, 24)


def test_coefficient_outside_window_raises():
    s = ILSeries(R1, {(0, 0): F(1)}, cap=(2, None))
    with pytest.raises(TruncationError, match="truncation too small"):
        s.coefficient((3, 0))


def test_nilpotent_caps_truncate():
    ring = SeriesRing(1, 2, (1,))
    s = ILSeries(ring, {(0, 0, 1): F(1), (0, 0, 2): F(1)})
    assert (0, 0, 2) not in s.terms


lin = st.tuples(st.integers(1, 3), st.integers(-3, 3), st.integers(0, 2))


@settings(max_examples=40, deadline=None)
@given(a=st.integers(-3, 3).filter(bool), b=st.integers(-3, 3), c=st.integers(-3, 3), e=st.integers(0, 1))
def test_invert_times_self_is_one(a, b, c, e):
    # s = a*y1*d2 + b*y2*d2 + c*d3*y1^2 (nilpotent d3, cap 2)
    ring = SeriesRing(2, 2, (2,))
    s = ILSeries(ring, {(1, 0, 1, 0): F(a), (0, 1, 1, 0): F(b), (2 - e, e, 0, 1): F(c)})
    cap = (2, 2, None)
    inv = series_invert(s, cap)
    prod = s.mul(inv, cap)
    assert prod.terms == {(0, 0, 0, 0): F(1)}


@settings(max_examples=30, deadline=None)
@given(a=st.integers(-3, 3), b=st.integers(-3, 3), c=st.integers(-2, 2))
def test_exp_group_law(a, b, c):
    ring = SeriesRing(2, 2, (2,))
    s = ILSeries(ring, {(1, 0, 1, 0): F(a), (0, 1, 1, 0): F(b), (1, 1, 0, 1): F(c)})
    cap = (4, 4, None)
    prod = series_exp(s, cap).mul(series_exp(-s, cap), cap)
    assert prod.terms == {(0, 0, 0, 0): F(1)}


@settings(max_examples=30, deadline=None)
@given(a=st.integers(1, 3), b=st.integers(-3, 3), c=st.integers(-2, 2), bump=st.integers(1, 3))
def test_widening_windows_changes_nothing_inside(a, b, c, bump):
    ring = SeriesRing(2, 2, (1,))
    u = ILSeries(ring, {(1, 0, 1, 0): F(-a), (0, 1, 1, 0): F(b), (2, 0, 0, 1): F(c)})
    cap = (1, 2, None)
    wide = tuple(x + bump for x in cap[:2]) + (None,)
    narrow = one_minus_exp_inv(u, cap)
    widened = one_minus_exp_inv(u, wide)
    assert narrow.agrees_with(widened)
    assert all(widened.terms.get(k) == v for k, v in narrow.terms.items())

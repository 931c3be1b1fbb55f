from fractions import Fraction as F
from itertools import combinations, combinations_with_replacement, permutations

import pytest
from hypothesis import given, settings, strategies as st

from ihpair.exact import MPoly
from ihpair.iber import measure_factor
from ihpair.roots import basis_from_permutation, c_vector, hamiltonian_family, root
from ihpair.symfun import (
    QSpec,
    hessian_det,
    hessian_matrix,
    lagrange_sum_cleared,
    q_directional,
    second_partials,
    tau_poly,
    x_names,
)


def _eval(p, values):
    return p.evaluate(dict(zip(p.vars, values)))


def test_tau_examples():
    names = x_names(2)
    x1, x2 = MPoly.var(names, "x1"), MPoly.var(names, "x2")
    assert tau_poly(2, 2) == (x1 - x2) ** 2 * F(-1, 4)
    n3 = x_names(3)
    y = [MPoly.var(n3, n) for n in n3]
    expected = ((y[0] - y[1]) ** 2 + (y[0] - y[2]) ** 2 + (y[1] - y[2]) ** 2) * F(-1, 6)
    assert tau_poly(2, 3) == expected


def test_tau_out_of_range():
    with pytest.raises(ValueError):
        tau_poly(4, 3)


points = st.lists(st.fractions(min_value=-5, max_value=5, max_denominator=5), min_size=4, max_size=4)


@settings(max_examples=40, deadline=None)
@given(points)
def test_tau_matches_centered_elementary(pt):
    r = 4
    mean = sum(pt) / r
    centered = [v - mean for v in pt]
    for k in range(2, r + 1):
        direct = sum((_prod(c) for c in combinations(centered, k)), F(0))
        assert _eval(tau_poly(k, r), pt) == direct


@settings(max_examples=30, deadline=None)
@given(points, st.permutations(range(4)), st.fractions(min_value=-3, max_value=3))
def test_tau_symmetric_and_translation_invariant(pt, perm, shift):
    for k in (2, 3, 4):
        t = tau_poly(k, 4)
        assert _eval(t, [pt[i] for i in perm]) == _eval(t, pt)
        assert _eval(t, [v + shift for v in pt]) == _eval(t, pt)


def _prod(values):
    out = F(1)
    for v in values:
        out *= v
    return out


def test_q_directional_rank2():
    q = QSpec(2)
    b = basis_from_permutation([1, 2])
    qy = q.in_y(b)
    y, d = MPoly.var(qy.vars, "y1"), MPoly.var(qy.vars, "d2")
    assert qy == y ** 2 * d * F(-1, 4)
    # Euclidean direction: derivative along alpha^{12} is twice d/dy
    assert q_directional(q, b, root(1, 2, 2)) == -(y * d)
    assert q_directional(q, b, c_vector(2)) == y * d * F(-1, 2)
    assert q_directional(q, b, root(1, 2, 2).scale(0)).is_zero()


def test_hessian_rank2():
    q = QSpec(2)
    b = basis_from_permutation([1, 2])
    det = hessian_det(q, b)
    assert det == -MPoly.var(det.vars, "d2")


@pytest.mark.parametrize("r", [2, 3, 4])
def test_second_partials_symmetric(r):
    q = QSpec(r)
    for b in hamiltonian_family(r, 1)[:2]:
        m = second_partials(q, b)
        assert all(m[i][j] == m[j][i] for i in range(r - 1) for j in range(r - 1))


def test_hessian_not_symmetric_at_rank3():
    m = hessian_matrix(QSpec(3), basis_from_permutation([1, 2, 3]))
    assert m[0][1] != m[1][0]


@pytest.mark.parametrize("r", [2, 3, 4])
def test_measure_matches_hessian_det(r):
    q = QSpec(r)
    for b in hamiltonian_family(r, r):
        assert measure_factor(q, b) == hessian_det(q, b)


@pytest.mark.parametrize("r", [2, 3, 4])
def test_lagrange_identity_cleared(r):
    for m in range(0, r + 4):
        lhs, rhs = lagrange_sum_cleared(m, r)
        assert lhs == rhs


@settings(max_examples=40, deadline=None)
@given(st.lists(st.integers(-20, 20), min_size=3, max_size=3, unique=True), st.integers(0, 7))
def test_lagrange_identity_pointwise(pt, m):
    # independent oracle: evaluate the rational sum directly and count monomials for h
    r = len(pt)
    total = F(0)
    for i, xi in enumerate(pt):
        den = _prod(xi - xj for j, xj in enumerate(pt) if j != i)
        total += F(xi) ** m / den
    k = m - r + 1
    h = F(0) if k < 0 else sum((_prod(c) for c in combinations_with_replacement(pt, k)), F(0))
    assert total == h

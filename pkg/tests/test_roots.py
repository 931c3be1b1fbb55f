from fractions import Fraction as F
from itertools import permutations
from math import factorial

import pytest
from hypothesis import given, settings, strategies as st

from ihpair.checks import check_half_weight
from ihpair.exact import MPoly
from ihpair.roots import (
    RootBasis,
    WeightVector,
    basis_from_permutation,
    c_vector,
    coords_in_basis,
    dual_direction,
    hamiltonian_family,
    lattice_reduce,
    orthonormal_basis,
    root,
    to_y_coordinates,
)
from ihpair.symfun import tau_poly, xd_vars


def test_weight_vector_must_sum_to_zero():
    with pytest.raises(ValueError):
        WeightVector.of(1, 0)


def test_basis_from_permutation_examples():
    assert basis_from_permutation([1, 2]).pairs == ((1, 2),)
    assert basis_from_permutation([1, 2, 3]).pairs == ((2, 3), (1, 2))
    assert basis_from_permutation([2, 1, 3]).pairs == ((1, 3), (2, 1))


def test_hamiltonian_family_examples():
    assert [b.pairs for b in hamiltonian_family(2, 1)] == [((1, 2),)]
    assert [b.pairs for b in hamiltonian_family(3, 1)] == [((2, 3), (1, 2)), ((3, 2), (1, 3))]


@pytest.mark.parametrize("r", [2, 3, 4])
def test_family_sizes_and_fixed_point(r):
    for m in range(1, r + 1):
        fam = hamiltonian_family(r, m)
        assert len(fam) == factorial(r - 1)
        assert len(set(fam)) == len(fam)


def test_coords_examples():
    b2 = basis_from_permutation([1, 2])
    b3 = basis_from_permutation([1, 2, 3])
    assert coords_in_basis(b3[0], b3) == (1, 0)
    assert coords_in_basis(c_vector(2), b2) == (F(1, 2),)
    assert coords_in_basis(c_vector(3), b3) == (F(2, 3), F(1, 3))


def test_lattice_reduce_examples():
    b2 = basis_from_permutation([1, 2])
    b3 = basis_from_permutation([1, 2, 3])
    a = root(1, 3, 3) + root(2, 3, 3)
    assert lattice_reduce(a, b3) == (a, WeightVector.zero(3))
    assert lattice_reduce(c_vector(2), b2) == (WeightVector.zero(2), c_vector(2))
    assert lattice_reduce(c_vector(3), b3)[0] == WeightVector.zero(3)


weights3 = st.lists(st.fractions(min_value=-4, max_value=4, max_denominator=6), min_size=2, max_size=2).map(
    lambda v: WeightVector((F(v[0]), F(v[1]), -F(v[0]) - F(v[1]))))
bases3 = st.sampled_from([basis_from_permutation(p) for p in permutations((1, 2, 3))])


@settings(max_examples=80, deadline=None)
@given(weights3, bases3)
def test_lattice_reduce_properties(a, basis):
    whole, frac = lattice_reduce(a, basis)
    assert whole + frac == a
    assert all(c.denominator == 1 for c in coords_in_basis(whole, basis))
    assert all(0 <= c < 1 for c in coords_in_basis(frac, basis))


@settings(max_examples=60, deadline=None)
@given(weights3, weights3, st.fractions(min_value=-3, max_value=3, max_denominator=3), bases3)
def test_dual_direction_linear(a, b, t, basis):
    da, db, dab = dual_direction(a, basis), dual_direction(b, basis), dual_direction(a + b.scale(t), basis)
    assert dab == tuple(x + t * y for x, y in zip(da, db))


def test_dual_direction_is_gram_column():
    # Euclidean convention: the direction of a basis root is its Gram column
    b = basis_from_permutation([1, 2, 3])
    assert dual_direction(b[0], b) == tuple(row[0] for row in b.gram())
    assert dual_direction(c_vector(2), basis_from_permutation([1, 2])) == (1,)


def test_to_y_coordinates_examples():
    v = xd_vars(2)
    x1, x2 = MPoly.var(v, "x1"), MPoly.var(v, "x2")
    b2 = basis_from_permutation([1, 2])
    y = to_y_coordinates(x1 - x2, b2)
    assert y == MPoly.var(y.vars, "y1")
    t = to_y_coordinates(tau_poly(2, 2).extend(v), b2)
    assert t == MPoly.var(t.vars, "y1") ** 2 * F(-1, 4)

    v3 = xd_vars(3)
    xs = [MPoly.var(v3, f"x{i}") for i in (1, 2, 3)]
    b3 = basis_from_permutation([1, 2, 3])
    y1 = MPoly.var(to_y_coordinates(xs[0] - xs[1], b3).vars, "y1")
    y2 = MPoly.var(y1.vars, "y2")
    assert to_y_coordinates(xs[1] - xs[2], b3) == y1
    assert to_y_coordinates(xs[0] - xs[1], b3) == y2
    assert to_y_coordinates(xs[0] - xs[2], b3) == y1 + y2


def test_to_y_rejects_non_invariant():
    with pytest.raises(ValueError):
        to_y_coordinates(MPoly.var(xd_vars(2), "x1"), basis_from_permutation([1, 2]))


@pytest.mark.parametrize("r", [2, 3, 4])
def test_orthonormal_basis_gram_identity(r):
    o = orthonormal_basis(r)
    gram = o.gram_normalized()
    assert all(gram[i][j] == (1 if i == j else 0) for i in range(r - 1) for j in range(r - 1))
    for v in o.vectors:
        assert sum(v) == 0


def test_orthonormal_r2_norm():
    o = orthonormal_basis(2)
    assert o.norms == (2,)


def test_half_weight_remark():
    # the reduced weights of c and c/2 agree on every Hamiltonian basis, r <= 4
    results = check_half_weight(4)
    assert results and all(r.ok for r in results)


def test_root_basis_rejects_dependent_pairs():
    with pytest.raises(ValueError):
        RootBasis(3, ((1, 2), (2, 1)))

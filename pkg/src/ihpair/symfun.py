"""Symmetric functions of the centered Chern roots and the deformation polynomial Q."""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import combinations_with_replacement, permutations
from typing import List, Sequence, Tuple

from .exact import MPoly
from .roots import RootBasis, WeightVector, dual_direction, to_y_coordinates


def x_names(r: int) -> Tuple[str, ...]:
    return tuple(f"x{i}" for i in range(1, r + 1))


def delta_names(r: int) -> Tuple[str, ...]:
    return tuple(f"d{k}" for k in range(2, r + 1))


def xd_vars(r: int) -> Tuple[str, ...]:
    """Variable list for integrands written in x: x1..xr, d2..dr."""
    return x_names(r) + delta_names(r)


def yd_vars(r: int) -> Tuple[str, ...]:
    return tuple(f"y{k}" for k in range(1, r)) + delta_names(r)


@lru_cache(maxsize=None)
def tau_poly(k: int, r: int) -> MPoly:
    """k-th elementary symmetric polynomial of x_i - (x_1 + ... + x_r)/r."""
    if not 2 <= k <= r:
        raise ValueError(f"tau_{k} undefined for r={r}")
    names = x_names(r)
    mean = {n: Fraction(1, r) for n in names}
    centered = []
    for n in names:
        coeffs = {m: -c for m, c in mean.items()}
        coeffs[n] += 1
        centered.append(MPoly.linear(names, coeffs))
    # e_j via the product of (1 + xbar_i t), one degree at a time
    elem = [MPoly.const(names, 1)] + [MPoly.zero(names)] * k
    for xb in centered:
        for j in range(k, 0, -1):
            elem[j] = elem[j] + elem[j - 1] * xb
    return elem[k]


@dataclass(frozen=True)
class QSpec:
    """Q = sum_{k=2}^r d_k tau_k, over variables x1..xr, d2..dr."""

    r: int

    @property
    def vars(self) -> Tuple[str, ...]:
        return xd_vars(self.r)

    @property
    def poly(self) -> MPoly:
        return _q_poly(self.r)

    def in_y(self, basis: RootBasis) -> MPoly:
        return _q_in_y(self.r, basis)


@lru_cache(maxsize=None)
def _q_poly(r: int) -> MPoly:
    vars_ = xd_vars(r)
    q = MPoly.zero(vars_)
    for k in range(2, r + 1):
        q = q + tau_poly(k, r).extend(vars_) * MPoly.var(vars_, f"d{k}")
    return q


@lru_cache(maxsize=None)
def _q_in_y(r: int, basis: RootBasis) -> MPoly:
    return to_y_coordinates(_q_poly(r), basis)


def directional(p: MPoly, basis: RootBasis, alpha: WeightVector) -> MPoly:
    """Derivative of a y-polynomial along the weight alpha."""
    coeffs = dual_direction(alpha, basis)
    return p.directional({f"y{k + 1}": c for k, c in enumerate(coeffs) if c})


def x_directional(p: MPoly, vector: Sequence[Fraction]) -> MPoly:
    """sum_i v_i d/dx_i of an x-polynomial."""
    return p.directional({f"x{i + 1}": v for i, v in enumerate(vector) if v})


def q_directional(q: QSpec, basis: RootBasis, alpha: WeightVector) -> MPoly:
    """Q rewritten in the B-coordinates y, then differentiated along alpha."""
    return directional(q.in_y(basis), basis, alpha)


def hessian_matrix(q: QSpec, basis: RootBasis) -> List[List[MPoly]]:
    """H_ij = d/dy_i of Q_{beta_j}."""
    qy = q.in_y(basis)
    n = basis.rank
    firsts = [directional(qy, basis, basis[j]) for j in range(n)]
    return [[firsts[j].diff(f"y{i + 1}") for j in range(n)] for i in range(n)]


def second_partials(q: QSpec, basis: RootBasis) -> List[List[MPoly]]:
    qy = q.in_y(basis)
    n = basis.rank
    return [[qy.diff(f"y{i + 1}").diff(f"y{j + 1}") for j in range(n)] for i in range(n)]


def _perm_sign(p: Sequence[int]) -> int:
    sign = 1
    p = list(p)
    for i in range(len(p)):
        while p[i] != i:
            j = p[i]
            p[i], p[j] = p[j], p[i]
            sign = -sign
    return sign


def determinant(matrix: List[List[MPoly]]) -> MPoly:
    n = len(matrix)
    vars_ = matrix[0][0].vars
    total = MPoly.zero(vars_)
    for perm in permutations(range(n)):
        term = MPoly.const(vars_, _perm_sign(perm))
        for i, j in enumerate(perm):
            term = term * matrix[i][j]
            if term.is_zero():
                break
        total = total + term
    return total


def hessian_det(q: QSpec, basis: RootBasis) -> MPoly:
    """det Hess_B(Q) as a polynomial in y and the deltas."""
    return determinant(hessian_matrix(q, basis))


def complete_homogeneous(k: int, names: Sequence[str]) -> MPoly:
    """h_k in the given variables; h_0 = 1 and h_k = 0 for k < 0."""
    names = tuple(names)
    if k < 0:
        return MPoly.zero(names)
    terms = {}
    for combo in combinations_with_replacement(range(len(names)), k):
        e = [0] * len(names)
        for i in combo:
            e[i] += 1
        terms[tuple(e)] = Fraction(1)
    return MPoly(names, terms)


def power_sum(k: int, names: Sequence[str]) -> MPoly:
    names = tuple(names)
    out = MPoly.zero(names)
    for n in names:
        out = out + MPoly.var(names, n, k)
    return out


def lagrange_sum_cleared(m: int, r: int) -> Tuple[MPoly, MPoly]:
    """Both sides of  h_{m-r+1} = sum_i x_i^m / prod_{j != i}(x_i - x_j)
    multiplied by the Vandermonde-type product prod_{i<j}(x_i - x_j)."""
    names = x_names(r)
    x = [MPoly.var(names, n) for n in names]
    vdm = MPoly.const(names, 1)
    for i in range(r):
        for j in range(i + 1, r):
            vdm = vdm * (x[i] - x[j])
    rhs = MPoly.zero(names)
    for i in range(r):
        # prod_{a<b}(x_a - x_b) / prod_{j != i}(x_i - x_j) is a polynomial
        rest = MPoly.const(names, 1)
        for a in range(r):
            for b in range(a + 1, r):
                if i not in (a, b):
                    rest = rest * (x[a] - x[b])
        sign = (-1) ** i  # factors (x_j - x_i) with j < i flip sign
        rhs = rhs + x[i] ** m * rest * sign
    lhs = complete_homogeneous(m - r + 1, names) * vdm
    return lhs, rhs

"""Exterior algebra on the torus generators and the Berezin integral.

Generators ``zeta_a^j`` (a = 1..r-1, j = 1..2g) sit at bit positions sorted by
``(j, a)``.  Monomials are bitmasks whose generators are multiplied in increasing
bit order; coefficients are :class:`MPoly` (or rationals).
"""
from __future__ import annotations

from fractions import Fraction
from math import factorial
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

from .exact import MPoly
from .roots import OrthoBasis, orthonormal_basis
from .symfun import QSpec, tau_poly, x_directional, xd_vars


def _popcount(x: int) -> int:
    return bin(x).count("1")


def _merge_sign(a: int, b: int) -> int:
    """Sign of reordering (gens of a)(gens of b) into increasing order."""
    swaps = 0
    bb = b
    while bb:
        low = bb & -bb
        swaps += _popcount(a & ~((low << 1) - 1))
        bb ^= low
    return -1 if swaps & 1 else 1


class GrassElem:
    """Sparse element of an exterior algebra on ``ngen`` generators."""

    __slots__ = ("ngen", "terms")

    def __init__(self, ngen: int, terms: Optional[Mapping[int, object]] = None):
        self.ngen = ngen
        self.terms: Dict[int, object] = {}
        if terms:
            for m, c in terms.items():
                if c:
                    self.terms[m] = c

    @classmethod
    def scalar(cls, ngen: int, c) -> "GrassElem":
        return cls(ngen, {0: c})

    @classmethod
    def generator(cls, ngen: int, pos: int, c=Fraction(1)) -> "GrassElem":
        return cls(ngen, {1 << pos: c})

    def __bool__(self):
        return bool(self.terms)

    def __eq__(self, other):
        return isinstance(other, GrassElem) and self.ngen == other.ngen and self.terms == other.terms

    def __add__(self, other: "GrassElem") -> "GrassElem":
        out = dict(self.terms)
        for m, c in other.terms.items():
            if m in out:
                v = out[m] + c
                if v:
                    out[m] = v
                else:
                    del out[m]
            else:
                out[m] = c
        return GrassElem(self.ngen, out)

    def __neg__(self):
        return GrassElem(self.ngen, {m: -c for m, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c) -> "GrassElem":
        return GrassElem(self.ngen, {m: v * c for m, v in self.terms.items()})

    def __mul__(self, other):
        if isinstance(other, GrassElem):
            return wedge_mul(self, other)
        return self.scale(other)

    def degrees(self) -> set:
        return {_popcount(m) for m in self.terms}

    def top_coefficient(self):
        return self.terms.get((1 << self.ngen) - 1, 0)

    def __repr__(self):
        parts = [f"{c}*[{m:0{self.ngen}b}]" for m, c in sorted(self.terms.items())]
        return " + ".join(parts) or "0"


def wedge_mul(u: GrassElem, v: GrassElem) -> GrassElem:
    if u.ngen != v.ngen:
        raise ValueError("generator count mismatch")
    out: Dict[int, object] = {}
    for ma, ca in u.terms.items():
        for mb, cb in v.terms.items():
            if ma & mb:
                continue
            c = ca * cb
            if _merge_sign(ma, mb) < 0:
                c = -c
            m = ma | mb
            if m in out:
                s = out[m] + c
                if s:
                    out[m] = s
                else:
                    del out[m]
            elif c:
                out[m] = c
    return GrassElem(u.ngen, out)


def gr_exp_even(u: GrassElem, bound: Optional[int] = None) -> GrassElem:
    """exp(u) for u with even components of positive degree."""
    if 0 in u.terms:
        raise ValueError("exp of an element with a degree-0 component")
    if any(d % 2 for d in u.degrees()):
        raise ValueError("exp needs an even element")
    one = next(iter(u.terms.values()), Fraction(1))
    unit = one * 0 + 1 if isinstance(one, MPoly) else Fraction(1)
    result = GrassElem.scalar(u.ngen, unit)
    power = GrassElem.scalar(u.ngen, unit)
    n = 0
    limit = bound if bound is not None else u.ngen // 2
    while n < limit:
        n += 1
        power = wedge_mul(power, u)
        if not power:
            break
        result = result + power.scale(Fraction(1, factorial(n)))
    return result


# -- torus layout


def torus_ngen(r: int, g: int) -> int:
    return 2 * g * (r - 1)


def zeta_pos(a: int, j: int, r: int) -> int:
    """Bit position of zeta_a^j (1-indexed a, j)."""
    return (j - 1) * (r - 1) + (a - 1)


def zeta(a: int, j: int, r: int, g: int, c=Fraction(1)) -> GrassElem:
    return GrassElem.generator(torus_ngen(r, g), zeta_pos(a, j, r), c)


def _reference_sign(r: int, g: int) -> int:
    """Sign of prod_j prod_a (zeta_a^j zeta_a^{g+j}) relative to increasing order."""
    order = []
    for j in range(1, g + 1):
        for a in range(1, r):
            order.append(zeta_pos(a, j, r))
            order.append(zeta_pos(a, j + g, r))
    inv = sum(1 for i in range(len(order)) for k in range(i + 1, len(order)) if order[i] > order[k])
    return -1 if inv & 1 else 1


def berezin_integral(u: GrassElem, r: int, g: int):
    """r^g times the coefficient of the reference top monomial."""
    if u.ngen != torus_ngen(r, g):
        raise ValueError("element does not live on the (r, g) torus generators")
    c = u.top_coefficient()
    if not c:
        return c
    return c * (_reference_sign(r, g) * r ** g)


def standard_torus_form(r: int, g: int) -> GrassElem:
    """sum_{j<=g} sum_a zeta_a^j zeta_a^{g+j}."""
    n = torus_ngen(r, g)
    out = GrassElem(n)
    for j in range(1, g + 1):
        for a in range(1, r):
            out = out + wedge_mul(zeta(a, j, r, g), zeta(a, j + g, r, g))
    return out


# -- the torus integrand


def _check_table(l_table: Mapping[Tuple[int, int], int], r: int, g: int) -> List[Tuple[int, int]]:
    odd = []
    for (k, j), e in sorted(l_table.items()):
        if not 2 <= k <= r or not 1 <= j <= 2 * g:
            raise ValueError(f"b-class index ({k}, {j}) out of range for r={r}, g={g}")
        if e > 1:
            raise ValueError("odd class squared")
        if e < 0:
            raise ValueError("negative exponent")
        if e == 1:
            odd.append((k, j))
    return odd


def _torus_data(r: int, ortho: OrthoBasis, odd: Sequence[Tuple[int, int]]):
    vars_ = xd_vars(r)
    q = QSpec(r).poly
    n = r - 1
    first = [x_directional(q, w) for w in ortho.vectors]
    second = [[x_directional(first[b], ortho.vectors[a]) for b in range(n)] for a in range(n)]
    taus = {}
    for k in sorted({k for k, _ in odd}):
        t = tau_poly(k, r).extend(vars_)
        taus[k] = [x_directional(t, w) for w in ortho.vectors]
    return vars_, second, taus


def _finish(value, r: int, g: int, ortho: OrthoBasis, vars_):
    # computed with eta_a = zeta_a / sqrt(n_a), so the top monomial in eta is
    # the zeta top monomial divided by prod_a n_a^g
    scale = Fraction(1) / ortho.norm_product() ** g
    if isinstance(value, MPoly):
        return value.scale(scale)
    return MPoly.const(vars_, Fraction(value) * scale)


def torus_factor(r: int, g: int, l_table: Mapping[Tuple[int, int], int],
                 ortho: Optional[OrthoBasis] = None, factorized: bool = True) -> MPoly:
    """Berezin integral of exp(-sum zeta_a^j zeta_b^{j+g} Q_{u_a u_b}) * prod (sum_a zeta_a^j tau_{k,u_a})^l.

    Returned as an MPoly over x1..xr, d2..dr.  Odd factors are multiplied in
    increasing (k, j) order.
    """
    if ortho is None:
        ortho = orthonormal_basis(r)
    odd = _check_table(l_table, r, g)
    vars_, second, taus = _torus_data(r, ortho, odd)
    if len(odd) % 2:
        return MPoly.zero(vars_)
    if factorized:
        value = _torus_blocks(r, g, odd, second, taus, vars_)
    else:
        value = _torus_brute(r, g, odd, second, taus, vars_)
    return _finish(value, r, g, ortho, vars_)


def _torus_brute(r, g, odd, second, taus, vars_):
    n = r - 1
    ngen = torus_ngen(r, g)
    expo = GrassElem(ngen)
    for j in range(1, g + 1):
        for a in range(1, r):
            for b in range(1, r):
                c = second[a - 1][b - 1]
                if c:
                    expo = expo + wedge_mul(zeta(a, j, r, g), zeta(b, j + g, r, g, -c))
    elem = gr_exp_even(expo)
    for k, j in odd:
        factor = GrassElem(ngen)
        for a in range(1, n + 1):
            c = taus[k][a - 1]
            if c:
                factor = factor + zeta(a, j, r, g, c)
        elem = wedge_mul(elem, factor)
    top = elem.top_coefficient()
    if not top:
        return MPoly.zero(vars_)
    return top * (_reference_sign(r, g) * r ** g)


def _torus_blocks(r, g, odd, second, taus, vars_):
    """Same integral computed one (j, j+g) block at a time.

    The exponential splits into commuting even factors, one per block.  The odd
    factors are stably regrouped by block (tracking the permutation sign) and
    each block's top coefficient is taken in a 2(r-1)-generator algebra where
    zeta_a^j, zeta_a^{j+g} become the local generators zeta_a^1, zeta_a^2.
    """
    n = r - 1
    blocks = [((j - 1) % g) + 1 for _, j in odd]
    inv = sum(1 for i in range(len(blocks)) for k in range(i + 1, len(blocks)) if blocks[i] > blocks[k])
    sign = -1 if inv & 1 else 1
    local_n = 2 * n
    expo = GrassElem(local_n)
    for a in range(1, r):
        for b in range(1, r):
            c = second[a - 1][b - 1]
            if c:
                expo = expo + wedge_mul(zeta(a, 1, r, 1), zeta(b, 2, r, 1, -c))
    local_exp = gr_exp_even(expo)
    ref = _reference_sign(r, 1)
    total = MPoly.const(vars_, sign * ref ** g * r ** g)
    for p in range(1, g + 1):
        here = [(k, j) for (k, j) in odd if ((j - 1) % g) + 1 == p]
        if len(here) % 2:
            return MPoly.zero(vars_)
        elem = local_exp
        for k, j in here:
            side = 1 if j <= g else 2
            factor = GrassElem(local_n)
            for a in range(1, n + 1):
                c = taus[k][a - 1]
                if c:
                    factor = factor + zeta(a, side, r, 1, c)
            elem = wedge_mul(elem, factor)
        top = elem.top_coefficient()
        if not top:
            return MPoly.zero(vars_)
        total = total * top
    return total

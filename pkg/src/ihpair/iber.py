"""The iterated residue operator iBer_{B,Q}[f](a).

In the coordinates ``y_k = <beta_k, x>`` the operator is the iterated residue
(innermost ``y_{r-1}`` first) of

    f * exp(Q_a) * prod_k 1/(1 - exp(Q_{beta_k})) * dQ_{beta_1} ^ ... ^ dQ_{beta_{r-1}}

expanded in the order ``y_1 >> y_2 >> ... >> y_{r-1}``.  The integrands of the
pairing formulas carry ``1/det Hess_B(Q)``, which cancels the measure exactly;
``cancel=False`` recomputes both sides instead.

Truncation windows are derived a priori.  Every factor has a provable lower
bound on the valuation of its terms; a factor is expanded only as far as can
still reach the residue coefficient given the lower bounds of the others.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

from .exact import (
    ILSeries,
    MPoly,
    SeriesRing,
    TruncationError,
    bernoulli,
    compose_floor,
    invert_floor,
    one_minus_exp_inv,
    one_minus_exp_inv_floor,
    series_exp,
    series_invert,
)
from .grassmann import GrassElem, wedge_mul
from .roots import RootBasis, WeightVector, to_y_coordinates
from .symfun import QSpec, delta_names, directional, hessian_det, q_directional, xd_vars, yd_vars

__all__ = [
    "IberInput",
    "IberOutput",
    "to_y_coordinates",
    "iterated_residue",
    "iber",
    "iber_full",
    "iber_rank2",
    "measure_factor",
]


@dataclass(frozen=True)
class IberInput:
    """Integrand data for one basis.

    ``numerator`` is an MPoly over x1..xr, d2..dr.  ``poles[(i, j)] = e`` puts
    ``(x_i - x_j)^e`` in the denominator.  ``weight`` is the evaluation point;
    each of ``exp_weights`` contributes an extra factor ``exp(Q_v)`` to the
    numerator.  ``hessian_in_denominator`` marks integrands carrying
    ``1/det Hess_B(Q)``.
    """

    numerator: MPoly
    poles: Tuple[Tuple[Tuple[int, int], int], ...]
    weight: WeightVector
    basis: RootBasis
    q: QSpec
    exp_weights: Tuple[WeightVector, ...] = ()
    hessian_in_denominator: bool = True

    @classmethod
    def make(cls, numerator, poles: Mapping[Tuple[int, int], int], weight, basis, q=None,
             exp_weights=(), hessian_in_denominator=True) -> "IberInput":
        if q is None:
            q = QSpec(basis.r)
        clean = tuple(sorted((tuple(k), int(e)) for k, e in poles.items() if e))
        return cls(numerator, clean, weight, basis, q, tuple(exp_weights), hessian_in_denominator)

    @property
    def r(self) -> int:
        return self.basis.r


@dataclass
class IberOutput:
    value: MPoly
    windows: Dict[str, object] = field(default_factory=dict)


def iterated_residue(s: ILSeries) -> MPoly:
    """Coefficient of y_{r-1}^{-1}, then y_{r-2}^{-1}, ..., then y_1^{-1}.

    Extracting those one at a time is the same as reading off the coefficient
    of ``y_1^{-1} ... y_{r-1}^{-1}`` in the iterated expansion.
    """
    return s.y_coefficient((-1,) * s.ring.ny)


def _pole_poly(inp: IberInput) -> MPoly:
    vars_ = xd_vars(inp.r)
    out = MPoly.const(vars_, 1)
    for (i, j), e in inp.poles:
        if i == j:
            raise ValueError("pole factor must be a root")
        lin = MPoly.var(vars_, f"x{i}") - MPoly.var(vars_, f"x{j}")
        out = out * lin ** e
    return out


def measure_factor(q: QSpec, basis: RootBasis) -> MPoly:
    """Coefficient of dy_1 ^ ... ^ dy_{r-1} in dQ_{beta_1} ^ ... ^ dQ_{beta_{r-1}}."""
    qy = q.in_y(basis)
    n = basis.rank
    vars_ = qy.vars
    form = GrassElem.scalar(n, MPoly.const(vars_, 1))
    for i in range(n):
        qi = directional(qy, basis, basis[i])
        one_form = GrassElem(n, {1 << j: qi.diff(f"y{j + 1}") for j in range(n)})
        form = wedge_mul(form, one_form)
    top = form.top_coefficient()
    return top if top else MPoly.zero(vars_)


class _Factor:
    """A factor of the residue integrand together with a floor and a builder."""

    def __init__(self, name, floor, build, exact=None):
        self.name = name
        self.floor = floor
        self._build = build
        self.exact = exact

    def build(self, cap):
        if self.exact is not None:
            return self.exact.truncate(cap)
        return self._build(cap)


def _ring_for(r: int, nil_caps: Sequence[int]) -> SeriesRing:
    return SeriesRing(r - 1, r - 1, tuple(nil_caps))


def _factors(inp: IberInput, ring: SeriesRing, cancel: bool) -> List[_Factor]:
    basis, q = inp.basis, inp.q
    r = inp.r
    yv = yd_vars(r)

    def series(p: MPoly) -> ILSeries:
        return ILSeries.from_mpoly(ring, p.extend(yv) if p.vars != yv else p)

    out: List[_Factor] = []
    num = series(to_y_coordinates(inp.numerator, basis))
    out.append(_Factor("numerator", num.floor, None, num))

    for idx, w in enumerate((inp.weight,) + inp.exp_weights):
        if w.is_zero():
            continue
        arg = series(q_directional(q, basis, w))
        if not arg.terms:
            continue
        out.append(_Factor(f"exp{idx}", compose_floor(arg), lambda cap, a=arg: series_exp(a, cap)))

    for k in range(basis.rank):
        arg = series(q_directional(q, basis, basis[k]))
        out.append(_Factor(f"char{k + 1}", one_minus_exp_inv_floor(arg),
                           lambda cap, a=arg: one_minus_exp_inv(a, cap)))

    if inp.poles:
        poles = series(to_y_coordinates(_pole_poly(inp), basis))
        out.append(_Factor("poles", invert_floor(poles), lambda cap, p=poles: series_invert(p, cap)))

    if not cancel or not inp.hessian_in_denominator:
        meas = series(measure_factor(q, basis))
        out.append(_Factor("measure", meas.floor, None, meas))
    if not cancel and inp.hessian_in_denominator:
        hess = series(hessian_det(q, basis))
        out.append(_Factor("hessian", invert_floor(hess), lambda cap, h=hess: series_invert(h, cap)))
    return out


def _sub(a, b):
    return tuple(None if x is None else x - y for x, y in zip(a, b))


def iber_full(inp: IberInput, delta_caps: Optional[Mapping[str, int]] = None, *,
              cancel: bool = True, window_bump: int = 0) -> IberOutput:
    """Evaluate iBer and report the windows used.

    ``delta_caps`` bounds the delta parameters: ``d3..dr`` default to 0 (they
    are nilpotent and vanish beyond their cap); ``d2`` defaults to unbounded.
    The result is exact for every delta monomial within the caps.
    """
    r = inp.r
    caps = dict(delta_caps or {})
    unknown = set(caps) - set(delta_names(r))
    if unknown:
        raise ValueError(f"unknown delta parameters {sorted(unknown)}")
    nil = tuple(int(caps.get(f"d{k}", 0)) for k in range(3, r + 1))
    d2cap = caps.get("d2")
    ring = _ring_for(r, nil)
    dn = ring.names[ring.ny:]
    if inp.numerator.is_zero():
        return IberOutput(MPoly.zero(dn), {"target": None, "factors": {}})

    target = ring.valuation(ring.y_key((-1,) * ring.ny, 0))
    target = target[:-1] + (d2cap,)
    if window_bump:
        target = tuple(None if t is None else t + window_bump for t in target)

    factors = _factors(inp, ring, cancel)
    floors = [f.floor for f in factors]
    total_floor = tuple(sum(col) for col in zip(*floors))
    windows = {"target": list(target), "factors": {}}
    built = []
    for f in factors:
        others = tuple(t - fl for t, fl in zip(total_floor, f.floor))
        cap = _sub(target, others)
        windows["factors"][f.name] = list(cap)
        built.append(f.build(cap))

    # multiply the small exact factors first; prune against the remaining floors
    order = sorted(range(len(built)), key=lambda i: (factors[i].exact is None, len(built[i])))
    remaining = total_floor
    acc = None
    for i in order:
        s = built[i]
        remaining = tuple(a - b for a, b in zip(remaining, floors[i]))
        cap = _sub(target, remaining)
        acc = s.truncate(cap) if acc is None else acc.mul(s, cap)
        if not acc.terms:
            return IberOutput(MPoly.zero(dn), windows)
    value = iterated_residue(acc)
    return IberOutput(value, windows)


def iber(inp: IberInput, delta_caps: Optional[Mapping[str, int]] = None, *,
         cancel: bool = True, window_bump: int = 0) -> MPoly:
    """iBer_{B,Q}[f](a) as a Laurent polynomial in d2 (and polynomial in d3..dr)."""
    return iber_full(inp, delta_caps, cancel=cancel, window_bump=window_bump).value


# ---------------------------------------------------------------------------
# rank 2: a single variable, written out with plain coefficient lists


def iber_rank2(inp: IberInput) -> MPoly:
    """Independent one-variable evaluation for r = 2.

    Every factor is a Laurent series in y whose coefficients are Laurent
    polynomials in d2; the residue is the y^{-1} coefficient.
    """
    if inp.r != 2:
        raise ValueError("one-variable path is for r = 2 only")
    basis, q = inp.basis, inp.q
    dv = ("d2",)

    def slope(w: WeightVector) -> Fraction:
        # Q_w = slope * d2 * y
        p = q_directional(q, basis, w)
        extra = set(p.terms) - {(1, 1)}
        if extra:
            raise ValueError("unexpected shape of a rank-2 directional derivative")
        return p.terms.get((1, 1), Fraction(0))

    # each factor: (lowest y exponent, {y exponent: MPoly in d2})
    factors: List[Tuple[int, Dict[int, MPoly]]] = []
    num = to_y_coordinates(inp.numerator, basis)
    series: Dict[int, MPoly] = {}
    for (ey, ed), c in num.terms.items():
        series[ey] = series.get(ey, MPoly.zero(dv)) + MPoly(dv, {(ed,): c})
    if not series:
        return MPoly.zero(dv)
    factors.append(("poly", series))

    lam = sum((slope(w) for w in (inp.weight,) + inp.exp_weights), Fraction(0))
    if lam:
        factors.append(("exp", lam))
    factors.append(("char", slope(basis[0])))
    pole_deg = 0
    pole_const = Fraction(1)
    for (i, j), e in inp.poles:
        # x_i - x_j = s * y with s = +-1 for the single root of the basis
        co = basis.coords(WeightVector.of(*[(1 if t == i else -1 if t == j else 0) for t in (1, 2)]))[0]
        pole_deg += e
        pole_const *= co ** e
    low = {"poly": min(series), "exp": 0, "char": -1}
    lows = [low[k] for k, _ in factors]
    total_low = sum(lows) - pole_deg

    def expand(kind, data, top):
        if kind == "poly":
            return {k: v for k, v in data.items() if k <= top}
        out = {}
        if kind == "exp":
            fact = Fraction(1)
            for n in range(0, top + 1):
                if n:
                    fact *= n
                out[n] = MPoly(dv, {(n,): data ** n / fact})
            return out
        # 1/(1 - e^{mu d2 y}) = -sum_n B_n (mu d2 y)^{n-1} / n!
        fact = Fraction(1)
        for n in range(0, top + 2):
            if n:
                fact *= n
            b = bernoulli(n)
            if b:
                out[n - 1] = MPoly(dv, {(n - 1,): -b * data ** (n - 1) / fact})
        return out

    acc: Dict[int, MPoly] = {0: MPoly.const(dv, 1)}
    acc_low = 0
    for (kind, data), lo in zip(factors, lows):
        # need exponents of this factor up to -1 + pole_deg - (lowest of all others)
        top = -1 + pole_deg - (total_low + pole_deg - lo)
        part = expand(kind, data, top)
        new: Dict[int, MPoly] = {}
        for a, ca in acc.items():
            for b, cb in part.items():
                new[a + b] = new.get(a + b, MPoly.zero(dv)) + ca * cb
        acc = {k: v for k, v in new.items() if not v.is_zero()}
        acc_low += lo
    res = acc.get(-1 + pole_deg, MPoly.zero(dv))
    return res.scale(Fraction(1) / pole_const)

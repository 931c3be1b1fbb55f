"""Intersection pairings assembled from the residue engine, plus rank-2 closed forms.

Three targets are supported:

``m1``  integral over the smooth moduli space of degree-1 bundles,
``p0``  integral over the parabolic moduli space (with a power of z),
``ih``  the Poincare-Verdier pairing on intersection cohomology of the degree-0 space.

Inputs use the generators a_k (degree 2k), f_k (degree 2k-2), b_k^j (degree 2k-1)
and z (degree 2).  Values are monomial integrals: the delta-coefficient of the
exponential generating function times prod n_k!.
"""
from __future__ import annotations

import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from itertools import combinations
from math import comb, factorial
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

from .exact import MPoly, bernoulli
from .grassmann import torus_factor
from .iber import IberInput, iber_full, iber_rank2
from .roots import RootBasis, c_vector, hamiltonian_family, lattice_reduce
from .symfun import QSpec, tau_poly, xd_vars

ENGINE_VERSION = "ihpair-1.0"
TARGETS = ("ih", "m1", "p0")


@dataclass(frozen=True)
class PairingSpec:
    """A monomial a^m f^n b^l (times z^z for p0) on one of the targets.

    ``a`` and ``f`` are sorted ``(k, exponent)`` pairs with nonzero exponents;
    ``b`` lists the odd classes ``(k, j)`` present, in increasing order.
    """

    target: str
    r: int
    g: int
    z: int = 0
    a: Tuple[Tuple[int, int], ...] = ()
    f: Tuple[Tuple[int, int], ...] = ()
    b: Tuple[Tuple[int, int], ...] = ()

    def __post_init__(self):
        target = self.target.lower()
        object.__setattr__(self, "target", target)
        if target not in TARGETS:
            raise ValueError(f"unknown target {self.target!r}")
        if self.r < 2:
            raise ValueError("rank must be at least 2")
        if self.g < 2:
            raise ValueError("genus must be at least 2")
        if self.z < 0:
            raise ValueError("z exponent must be non-negative")
        if self.z and target != "p0":
            raise ValueError("the class z only exists on the parabolic space (target p0)")
        for name in ("a", "f"):
            items = _clean_exponents(getattr(self, name), self.r, name)
            object.__setattr__(self, name, items)
        b = tuple(sorted(tuple(x) for x in self.b))
        if len(set(b)) != len(b):
            raise ValueError("odd class squared")
        for k, j in b:
            if not 2 <= k <= self.r or not 1 <= j <= 2 * self.g:
                raise ValueError(f"b-class ({k}, {j}) out of range for r={self.r}, g={self.g}")
        object.__setattr__(self, "b", b)

    @classmethod
    def build(cls, target, r, g, z=0, a=None, f=None, b=()) -> "PairingSpec":
        return cls(target, r, g, z, tuple((a or {}).items()), tuple((f or {}).items()), tuple(b))

    @property
    def a_exp(self) -> Dict[int, int]:
        return dict(self.a)

    @property
    def f_exp(self) -> Dict[int, int]:
        return dict(self.f)

    def l_table(self) -> Dict[Tuple[int, int], int]:
        return {kj: 1 for kj in self.b}

    def degree(self) -> int:
        d = 2 * self.z
        d += sum(2 * k * m for k, m in self.a)
        d += sum((2 * k - 2) * n for k, n in self.f)
        d += sum(2 * k - 1 for k, _ in self.b)
        return d

    def target_dimension(self) -> int:
        base = (self.r ** 2 - 1) * (self.g - 1)
        return base + (self.r - 1 if self.target == "p0" else 0)

    def as_dict(self) -> dict:
        return {
            "target": self.target,
            "r": self.r,
            "g": self.g,
            "z": self.z,
            "a": {str(k): m for k, m in self.a},
            "f": {str(k): n for k, n in self.f},
            "b": [list(x) for x in self.b],
        }


def _clean_exponents(items, r, name):
    out = {}
    for k, e in (items.items() if isinstance(items, Mapping) else items):
        k, e = int(k), int(e)
        if not 2 <= k <= r:
            raise ValueError(f"class {name}_{k} undefined for r={r}")
        if e < 0:
            raise ValueError(f"negative exponent for {name}_{k}")
        if e:
            out[k] = out.get(k, 0) + e
    return tuple(sorted(out.items()))


@dataclass
class PairingResult:
    value: Fraction
    spec: PairingSpec
    windows: Dict[str, object] = field(default_factory=dict)
    family_index: int = 0
    ms: int = 0
    engine: str = ENGINE_VERSION
    degree_ok: bool = True


def degree_check(spec: PairingSpec) -> bool:
    """True iff the cohomological degree equals twice the target dimension."""
    return spec.degree() == 2 * spec.target_dimension()


def sign_prefactor(r: int, g: int) -> int:
    return -1 if (comb(r, 2) * (g - 1)) % 2 else 1


@lru_cache(maxsize=None)
def _torus(r: int, g: int, b: Tuple[Tuple[int, int], ...]) -> MPoly:
    return torus_factor(r, g, {kj: 1 for kj in b})


def build_integrand(spec: PairingSpec, basis: RootBasis) -> IberInput:
    """The residue integrand of the target formula for one Hamiltonian basis."""
    r, g = spec.r, spec.g
    vars_ = xd_vars(r)
    num = MPoly.const(vars_, 1)
    for k, m in spec.a:
        num = num * tau_poly(k, r).extend(vars_) ** m
    xs = [MPoly.var(vars_, f"x{i}") for i in range(1, r + 1)]
    shift = MPoly.zero(vars_)
    for xj in xs:
        shift = shift + (xj - xs[-1])
    shift = shift.scale(Fraction(1, r))  # (1/r) sum_j (x_j - x_r)
    if spec.target == "p0" and spec.z:
        num = num * (-shift) ** spec.z
    elif spec.target == "ih":
        num = num * shift ** (r - 1)
    num = num * _torus(r, g, spec.b)

    poles = {(i, j): 2 * g - 2 for i in range(1, r + 1) for j in range(i + 1, r + 1)}
    if spec.target in ("p0", "ih"):
        for i in range(1, r):
            poles[(r, i)] = poles.get((r, i), 0) + 1
    c = c_vector(r)
    weight = -lattice_reduce(c, basis)[0]
    extra = (c,) if spec.target == "m1" else ()
    return IberInput.make(num, poles, weight, basis, QSpec(r), exp_weights=extra)


def _delta_caps(spec: PairingSpec) -> Dict[str, int]:
    f = spec.f_exp
    return {f"d{k}": f.get(k, 0) for k in range(2, spec.r + 1)}


def _one_basis(args):
    spec, basis, cancel, window_bump, one_variable = args
    inp = build_integrand(spec, basis)
    caps = _delta_caps(spec)
    if one_variable:
        value = iber_rank2(inp)
        return value.coeff({"d2": caps["d2"]}), {}
    out = iber_full(inp, caps, cancel=cancel, window_bump=window_bump)
    return out.value.coeff(caps), out.windows


def _prefactor(spec: PairingSpec) -> Fraction:
    r, g = spec.r, spec.g
    nfact = 1
    for _, n in spec.f:
        nfact *= factorial(n)
    denom = factorial(r) if spec.target == "m1" else factorial(r - 1)
    return Fraction(sign_prefactor(r, g) * nfact, denom)


def evaluate(spec: PairingSpec, family_index: Optional[int] = None, *, cancel: bool = True,
             window_bump: int = 0, force: bool = False, one_variable: bool = False,
             jobs: int = 1) -> PairingResult:
    """Evaluate a pairing; degree mismatches give 0 without running the engine
    unless ``force`` is set or cancellation is disabled (debug path)."""
    start = time.perf_counter()
    n = spec.r if family_index is None else family_index
    ok = degree_check(spec)
    if not ok and cancel and not force:
        return PairingResult(Fraction(0), spec, {}, n, _ms(start), ENGINE_VERSION, False)
    if one_variable and spec.r != 2:
        raise ValueError("the one-variable path only exists for r = 2")
    bases = hamiltonian_family(spec.r, n)
    work = [(spec, b, cancel, window_bump, one_variable) for b in bases]
    if jobs > 1 and len(work) > 1:
        with ProcessPoolExecutor(max_workers=min(jobs, len(work))) as pool:
            parts = list(pool.map(_one_basis, work))
    else:
        parts = [_one_basis(w) for w in work]
    total = sum((p[0] for p in parts), Fraction(0))
    windows = {b.label(): w for b, (_, w) in zip(bases, parts)}
    value = _prefactor(spec) * total
    return PairingResult(value, spec, windows, n, _ms(start), ENGINE_VERSION, ok)


def _ms(start: float) -> int:
    return int(round((time.perf_counter() - start) * 1000))


def integrate_m1(spec: PairingSpec, family_index: Optional[int] = None, **kw) -> PairingResult:
    if spec.target != "m1":
        raise ValueError("integrate_m1 needs target m1")
    return evaluate(spec, family_index, **kw)


def integrate_p0(spec: PairingSpec, family_index: Optional[int] = None, **kw) -> PairingResult:
    if spec.target != "p0":
        raise ValueError("integrate_p0 needs target p0")
    return evaluate(spec, family_index, **kw)


def ih_pairing(spec: PairingSpec, family_index: Optional[int] = None, **kw) -> PairingResult:
    if spec.target != "ih":
        raise ValueError("ih_pairing needs target ih")
    return evaluate(spec, family_index, **kw)


# ---------------------------------------------------------------------------
# b-class products


def _merge_odd(first: Sequence[Tuple[int, int]], second: Sequence[Tuple[int, int]]):
    """Sort the concatenation of two ordered odd products; (sign, merged) or None."""
    seq = list(first) + list(second)
    if len(set(seq)) != len(seq):
        return None
    inv = sum(1 for i in range(len(seq)) for k in range(i + 1, len(seq)) if seq[i] > seq[k])
    return (-1 if inv % 2 else 1), tuple(sorted(seq))


def gamma_expand(p: int, g: int) -> List[Tuple[int, Dict[Tuple[int, int], int]]]:
    """gamma^p with gamma = sum_{j<=g} b_2^j b_2^{j+g}, as (coefficient, l-table) pairs.

    Each term prod_{j in S} b^j b^{j+g} is reordered into increasing (k, j)
    order; the reordering sign is folded into the coefficient p! * sign.
    """
    if p < 0:
        raise ValueError("p must be non-negative")
    if p > g:
        return []
    out = []
    for subset in combinations(range(1, g + 1), p):
        seq = []
        for j in subset:
            seq += [(2, j), (2, j + g)]
        sign, merged = _merge_odd(seq, [])
        out.append((factorial(p) * sign, {kj: 1 for kj in merged}))
    return out


def expand_with_gamma(spec: PairingSpec, p: int) -> List[Tuple[int, PairingSpec]]:
    """spec * gamma^p as a signed list of monomial specs."""
    out = []
    for coeff, table in gamma_expand(p, spec.g):
        merged = _merge_odd(spec.b, sorted(table))
        if merged is None:
            continue
        sign, b = merged
        out.append((coeff * sign, PairingSpec(spec.target, spec.r, spec.g, spec.z, spec.a, spec.f, b)))
    return out


def evaluate_with_gamma(spec: PairingSpec, p: int = 0, family_index=None, **kw) -> PairingResult:
    """Pairing of spec * gamma^p (rank-2 convenience)."""
    if not p:
        return evaluate(spec, family_index, **kw)
    start = time.perf_counter()
    total = Fraction(0)
    windows = {}
    for coeff, s in expand_with_gamma(spec, p):
        res = evaluate(s, family_index, **kw)
        total += coeff * res.value
        windows[",".join(f"{k}.{j}" for k, j in s.b)] = res.windows
    n = spec.r if family_index is None else family_index
    ok = spec.degree() + 6 * p == 2 * spec.target_dimension()
    return PairingResult(total, spec, windows, n, _ms(start), ENGINE_VERSION, ok)


# ---------------------------------------------------------------------------
# rank-2 closed forms


def residue_y_power_over_one_minus_exp(e: int) -> Fraction:
    """Res_{y=0} y^e / (1 - e^{-y})."""
    k = -1 - e  # need the y^k coefficient of 1/(1 - e^{-y})
    if k < -1:
        return Fraction(0)
    # 1/(1 - e^{-y}) = -sum_n B_n (-y)^{n-1} / n!
    n = k + 1
    sign = -1 if k % 2 else 1
    return -bernoulli(n) * sign / factorial(n)


def rank2_residue_form(g: int, m: int, n: int, p: int) -> Fraction:
    """Closed form of <a_2^m f_2^n gamma^p> on the rank-2 intersection cohomology."""
    if g < 2:
        raise ValueError("genus must be at least 2")
    if min(m, n, p) < 0 or 2 * m + n + 3 * p != 3 * g - 3:
        raise ValueError("need 2m + n + 3p = 3g - 3")
    if p > g:
        return Fraction(0)
    sign = -1 if (g + m) % 2 else 1
    scale = Fraction(2) ** -(1 + 2 * m + p - g)
    count = Fraction(factorial(n) * factorial(g), factorial(g - p))
    return sign * scale * count * residue_y_power_over_one_minus_exp(2 + 2 * m + 2 * p - 2 * g)


def kappa(j: int) -> Fraction:
    """t / tanh(t) = sum_j kappa_j t^{2j}."""
    if j < 0:
        raise ValueError("j must be non-negative")
    return Fraction(2) ** (2 * j) * bernoulli(2 * j) / factorial(2 * j)


def kiem_pairing(g: int, m: int, n: int) -> Fraction:
    """<beta^m alpha^n> = (-1)^g n! 2^{2g-2} kappa_{g-1-m}, with alpha = 2 f_2, beta = -4 a_2."""
    if 2 * m + n != 3 * g - 3 or m < 0 or n < 0:
        raise ValueError("need 2m + n = 3g - 3")
    if m >= g - 1:
        raise ValueError("need m < g - 1")
    return (-1) ** g * factorial(n) * Fraction(2) ** (2 * g - 2) * kappa(g - 1 - m)


def rank2_ih(g: int, m: int, n: int, p: int = 0, **kw) -> Fraction:
    spec = PairingSpec.build("ih", 2, g, a={2: m}, f={2: n})
    return evaluate_with_gamma(spec, p, **kw).value


def fundamental_class_check(g: int, **kw) -> Fraction:
    """Pairing of the claimed fundamental class with 1; equals 1 when correct.

    alpha^{g-2} beta^{g-2} (alpha beta - 4 gamma) / ((g-2)! (-4)^{g-1})
    with alpha = 2 f_2, beta = -4 a_2.
    """
    if g < 2:
        raise ValueError("genus must be at least 2")
    e = g - 1
    first = Fraction(2) ** e * Fraction(-4) ** e * rank2_ih(g, e, e, 0, **kw)
    second = -4 * Fraction(2) ** (e - 1) * Fraction(-4) ** (e - 1) * rank2_ih(g, e - 1, e - 1, 1, **kw)
    return (first + second) / (factorial(g - 2) * Fraction(-4) ** (g - 1))

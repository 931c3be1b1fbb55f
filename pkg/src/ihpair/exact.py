"""Exact arithmetic substrate.

Rationals are :class:`fractions.Fraction`.  On top of that this module provides

* :class:`MPoly` -- sparse multivariate (Laurent) polynomials over named variables,
* :func:`bernoulli` -- Bernoulli numbers with ``u/(e^u - 1) = sum B_n u^n/n!``,
* :class:`ILSeries` -- truncated iterated Laurent series in ordered variables
  ``y1 >> y2 >> ... >> yp`` with coefficients in Laurent polynomials of ``d2``
  and nilpotent parameters ``d3, ..., dr``.

Valuations of :class:`ILSeries` terms are the suffix sums of the y-exponents
(plus the d2 exponent).  Under the substitution ``y_j = s_1 s_2 ... s_j`` these are
the exponents of the ``s`` variables, so the iterated expansion becomes an ordinary
multivariate Laurent expansion and box truncation in the valuation is exact.
"""
from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from math import comb, factorial
from typing import Dict, Iterable, Mapping, Optional, Sequence, Tuple

Rat = Fraction
Exps = Tuple[int, ...]


class TruncationError(ArithmeticError):
    """A requested coefficient lies outside the window a series is known on."""


class NonUnitError(ArithmeticError):
    pass


def as_rat(value) -> Fraction:
    if isinstance(value, Fraction):
        return value
    return Fraction(value)


def format_rat(value: Fraction) -> str:
    value = as_rat(value)
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"


def parse_rat(text: str) -> Fraction:
    return Fraction(text.strip())


# ---------------------------------------------------------------------------
# sparse multivariate polynomials


def _add_exps(a: Exps, b: Exps) -> Exps:
    return tuple(x + y for x, y in zip(a, b))


class MPoly:
    """Sparse polynomial over an ordered tuple of variable names.

    Exponents may be negative (used for the Laurent parameter d2).  Values are
    immutable; no zero coefficient is ever stored.
    """

    __slots__ = ("vars", "terms", "_hash")

    def __init__(self, variables: Sequence[str], terms: Optional[Mapping[Exps, Fraction]] = None):
        self.vars = tuple(variables)
        n = len(self.vars)
        clean: Dict[Exps, Fraction] = {}
        if terms:
            for e, c in terms.items():
                if c:
                    if len(e) != n:
                        raise ValueError(f"exponent {e} does not match variables {self.vars}")
                    clean[tuple(e)] = as_rat(c)
        self.terms = clean
        self._hash = None

    @classmethod
    def _raw(cls, variables: Tuple[str, ...], terms: Dict[Exps, Fraction]) -> "MPoly":
        p = cls.__new__(cls)
        p.vars = variables
        p.terms = terms
        p._hash = None
        return p

    @classmethod
    def zero(cls, variables: Sequence[str]) -> "MPoly":
        return cls._raw(tuple(variables), {})

    @classmethod
    def const(cls, variables: Sequence[str], c) -> "MPoly":
        variables = tuple(variables)
        c = as_rat(c)
        return cls._raw(variables, {(0,) * len(variables): c} if c else {})

    @classmethod
    def var(cls, variables: Sequence[str], name: str, power: int = 1) -> "MPoly":
        variables = tuple(variables)
        e = [0] * len(variables)
        e[variables.index(name)] = power
        return cls._raw(variables, {tuple(e): Fraction(1)})

    @classmethod
    def linear(cls, variables: Sequence[str], coeffs: Mapping[str, Fraction]) -> "MPoly":
        variables = tuple(variables)
        terms = {}
        for name, c in coeffs.items():
            if c:
                e = [0] * len(variables)
                e[variables.index(name)] = 1
                terms[tuple(e)] = as_rat(c)
        return cls._raw(variables, terms)

    # -- basic protocol
    def is_zero(self) -> bool:
        return not self.terms

    def __bool__(self):
        return bool(self.terms)

    def __len__(self):
        return len(self.terms)

    def __eq__(self, other):
        if isinstance(other, MPoly):
            return self.vars == other.vars and self.terms == other.terms
        if isinstance(other, (int, Fraction)):
            return self.terms == MPoly.const(self.vars, other).terms
        return NotImplemented

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.vars, frozenset(self.terms.items())))
        return self._hash

    def _coerce(self, other) -> "MPoly":
        if isinstance(other, MPoly):
            if other.vars != self.vars:
                raise ValueError(f"variable mismatch: {self.vars} vs {other.vars}")
            return other
        if isinstance(other, (int, Fraction)):
            return MPoly.const(self.vars, other)
        raise TypeError(f"cannot combine MPoly with {type(other).__name__}")

    def __add__(self, other):
        try:
            other = self._coerce(other)
        except TypeError:
            return NotImplemented
        out = dict(self.terms)
        for e, c in other.terms.items():
            v = out.get(e, 0) + c
            if v:
                out[e] = v
            else:
                out.pop(e, None)
        return MPoly._raw(self.vars, out)

    __radd__ = __add__

    def __neg__(self):
        return MPoly._raw(self.vars, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other):
        try:
            other = self._coerce(other)
        except TypeError:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def scale(self, c) -> "MPoly":
        c = as_rat(c)
        if not c:
            return MPoly.zero(self.vars)
        return MPoly._raw(self.vars, {e: v * c for e, v in self.terms.items()})

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        if not isinstance(other, MPoly):
            return NotImplemented
        other = self._coerce(other)
        out: Dict[Exps, Fraction] = {}
        get = out.get
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                v = get(e, 0) + c1 * c2
                if v:
                    out[e] = v
                else:
                    out.pop(e, None)
        return MPoly._raw(self.vars, out)

    def __rmul__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        return NotImplemented

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.scale(Fraction(1) / as_rat(other))
        return NotImplemented

    def __pow__(self, n: int):
        if n < 0:
            if len(self.terms) == 1:
                (e, c), = self.terms.items()
                return MPoly._raw(self.vars, {tuple(-x * -n for x in e): Fraction(1) / c ** -n})
            raise ValueError("negative power of a non-monomial")
        result = MPoly.const(self.vars, 1)
        base = self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    # -- inspection
    def constant_term(self) -> Fraction:
        return self.terms.get((0,) * len(self.vars), Fraction(0))

    def coeff(self, monomial: Mapping[str, int]) -> Fraction:
        e = [0] * len(self.vars)
        for name, k in monomial.items():
            e[self.vars.index(name)] = k
        return self.terms.get(tuple(e), Fraction(0))

    def coeff_in(self, names: Sequence[str], exps: Sequence[int]) -> "MPoly":
        """Coefficient of ``prod names**exps`` as a polynomial in the other variables."""
        idx = [self.vars.index(n) for n in names]
        keep = [i for i in range(len(self.vars)) if i not in idx]
        out: Dict[Exps, Fraction] = {}
        for e, c in self.terms.items():
            if all(e[i] == k for i, k in zip(idx, exps)):
                out[tuple(e[i] for i in keep)] = c
        return MPoly._raw(tuple(self.vars[i] for i in keep), out)

    def degree_in(self, name: str) -> int:
        i = self.vars.index(name)
        return max((e[i] for e in self.terms), default=0)

    def total_degree(self, names: Optional[Iterable[str]] = None) -> int:
        idx = range(len(self.vars)) if names is None else [self.vars.index(n) for n in names]
        return max((sum(e[i] for i in idx) for e in self.terms), default=0)

    def is_homogeneous_in(self, names: Iterable[str]) -> bool:
        idx = [self.vars.index(n) for n in names]
        degs = {sum(e[i] for i in idx) for e in self.terms}
        return len(degs) <= 1

    # -- calculus and substitution
    def diff(self, name: str) -> "MPoly":
        i = self.vars.index(name)
        out = {}
        for e, c in self.terms.items():
            k = e[i]
            if k:
                ne = list(e)
                ne[i] = k - 1
                out[tuple(ne)] = c * k
        return MPoly._raw(self.vars, out)

    def directional(self, direction: Mapping[str, Fraction]) -> "MPoly":
        out = MPoly.zero(self.vars)
        for name, c in direction.items():
            if c:
                out = out + self.diff(name).scale(c)
        return out

    def extend(self, variables: Sequence[str]) -> "MPoly":
        """Re-express over a larger variable list (a superset of ``self.vars``)."""
        variables = tuple(variables)
        pos = [variables.index(v) for v in self.vars]
        out = {}
        for e, c in self.terms.items():
            ne = [0] * len(variables)
            for p, k in zip(pos, e):
                ne[p] = k
            out[tuple(ne)] = c
        return MPoly._raw(variables, out)

    def restrict(self, variables: Sequence[str]) -> "MPoly":
        """Drop variables that do not occur (error if one does)."""
        variables = tuple(variables)
        pos = [self.vars.index(v) for v in variables]
        dropped = [i for i in range(len(self.vars)) if i not in pos]
        out = {}
        for e, c in self.terms.items():
            if any(e[i] for i in dropped):
                raise ValueError("cannot restrict: polynomial uses a dropped variable")
            out[tuple(e[p] for p in pos)] = c
        return MPoly._raw(variables, out)

    def substitute(self, images: Mapping[str, "MPoly"], target_vars: Sequence[str]) -> "MPoly":
        """Substitute each variable by a polynomial over ``target_vars``.

        Variables without an image must themselves occur in ``target_vars``.
        """
        target_vars = tuple(target_vars)
        imgs = []
        for name in self.vars:
            if name in images:
                img = images[name]
                if img.vars != target_vars:
                    img = img.extend(target_vars) if set(img.vars) <= set(target_vars) else img
                imgs.append(img)
            else:
                imgs.append(MPoly.var(target_vars, name))
        power_cache: Dict[Tuple[int, int], MPoly] = {}

        def power(i, k):
            key = (i, k)
            if key not in power_cache:
                if k == 0:
                    power_cache[key] = MPoly.const(target_vars, 1)
                elif k < 0:
                    power_cache[key] = imgs[i] ** k
                else:
                    power_cache[key] = power(i, k - 1) * imgs[i]
            return power_cache[key]

        out = MPoly.zero(target_vars)
        for e, c in self.terms.items():
            term = MPoly.const(target_vars, c)
            for i, k in enumerate(e):
                if k:
                    term = term * power(i, k)
            out = out + term
        return out

    def evaluate(self, values: Mapping[str, Fraction]) -> Fraction:
        total = Fraction(0)
        for e, c in self.terms.items():
            v = c
            for name, k in zip(self.vars, e):
                if k:
                    v *= as_rat(values[name]) ** k
            total += v
        return total

    def __repr__(self):
        if not self.terms:
            return "0"
        parts = []
        for e, c in sorted(self.terms.items(), reverse=True):
            mono = "*".join(
                name if k == 1 else f"{name}^{k}" for name, k in zip(self.vars, e) if k
            )
            coeff = format_rat(c)
            if not mono:
                parts.append(coeff)
            elif c == 1:
                parts.append(mono)
            elif c == -1:
                parts.append("-" + mono)
            else:
                parts.append(f"{coeff}*{mono}")
        return " + ".join(parts).replace("+ -", "- ")


def coeff_extract(p, monomial: Mapping[str, int]):
    """Coefficient of a delta-monomial.

    For an :class:`MPoly` purely in delta parameters this returns a rational; if
    other variables remain the coefficient is returned as an :class:`MPoly` in
    them.  For an :class:`ILSeries` the coefficient is taken in every term (the
    y-part is kept), giving an :class:`ILSeries` over the remaining layout.
    """
    if isinstance(p, ILSeries):
        return p.delta_coeff(monomial)
    names = [n for n in p.vars if n in monomial or n.startswith("d")]
    exps = [monomial.get(n, 0) for n in names]
    rest = p.coeff_in(names, exps)
    if not rest.vars:
        return rest.terms.get((), Fraction(0))
    return rest


# ---------------------------------------------------------------------------
# Bernoulli numbers


@lru_cache(maxsize=None)
def bernoulli(n: int) -> Fraction:
    """B_n with the convention u/(e^u - 1) = sum B_n u^n / n!  (so B_1 = -1/2)."""
    if n < 0:
        raise ValueError("n must be non-negative")
    if n == 0:
        return Fraction(1)
    if n > 1 and n % 2:
        return Fraction(0)
    # sum_{k<=n} C(n+1, k) B_k = 0
    s = sum(comb(n + 1, k) * bernoulli(k) for k in range(n))
    return -s / (n + 1)


def bernoulli_egf_coeff(n: int) -> Fraction:
    return bernoulli(n) / factorial(n)


# ---------------------------------------------------------------------------
# iterated Laurent series


class SeriesRing:
    """Layout of :class:`ILSeries` keys: ``(y1..yp, d2, d3..dr)``.

    ``nil_caps[k]`` is the exact truncation order of the nilpotent parameter
    ``d_{k+3}``: monomials with a larger exponent are identically zero.
    """

    __slots__ = ("ny", "ndelta", "nil_caps", "names", "nval", "_nil_total")

    def __init__(self, ny: int, ndelta: int = 1, nil_caps: Optional[Sequence[int]] = None):
        if ndelta < 1:
            raise ValueError("at least the d2 parameter is required")
        self.ny = ny
        self.ndelta = ndelta
        if nil_caps is None:
            nil_caps = (0,) * (ndelta - 1)
        nil_caps = tuple(int(c) for c in nil_caps)
        if len(nil_caps) != ndelta - 1:
            raise ValueError("one nilpotency cap per d3..dr is required")
        self.nil_caps = nil_caps
        self._nil_total = sum(nil_caps)
        self.names = tuple(f"y{i + 1}" for i in range(ny)) + tuple(
            f"d{k + 2}" for k in range(ndelta)
        )
        self.nval = ny + 1

    def __eq__(self, other):
        return isinstance(other, SeriesRing) and (self.ny, self.ndelta, self.nil_caps) == (
            other.ny,
            other.ndelta,
            other.nil_caps,
        )

    def __hash__(self):
        return hash((self.ny, self.ndelta, self.nil_caps))

    def __repr__(self):
        return f"SeriesRing(ny={self.ny}, ndelta={self.ndelta}, nil_caps={self.nil_caps})"

    @property
    def nil_total(self) -> int:
        return self._nil_total

    def valuation(self, key: Exps) -> Exps:
        ny = self.ny
        out = [0] * (ny + 1)
        acc = 0
        for i in range(ny - 1, -1, -1):
            acc += key[i]
            out[i] = acc
        out[ny] = key[ny]
        return tuple(out)

    def nil_degree(self, key: Exps) -> int:
        return sum(key[self.ny + 1:])

    def nil_ok(self, key: Exps) -> bool:
        base = self.ny + 1
        for k, cap in enumerate(self.nil_caps):
            if key[base + k] > cap:
                return False
        return True

    def one_key(self) -> Exps:
        return (0,) * (self.ny + self.ndelta)

    def y_key(self, exps: Sequence[int], d2: int = 0) -> Exps:
        return tuple(exps) + (d2,) + (0,) * (self.ndelta - 1)

    def target_cap(self, y_exps: Sequence[int], d2: Optional[int]) -> Tuple[Optional[int], ...]:
        v = self.valuation(self.y_key(y_exps, 0 if d2 is None else d2))
        return v[:-1] + (d2 if d2 is None else v[-1],)


Cap = Tuple[Optional[int], ...]


def _cap_min(a: Cap, b: Cap) -> Cap:
    return tuple(x if y is None else y if x is None else min(x, y) for x, y in zip(a, b))


def _cap_shift(a: Cap, shift: Sequence[int]) -> Cap:
    return tuple(None if x is None else x + s for x, s in zip(a, shift))


def _within(v: Exps, cap: Cap) -> bool:
    for x, c in zip(v, cap):
        if c is not None and x > c:
            return False
    return True


class ILSeries:
    """Truncated iterated Laurent series.

    ``terms`` maps keys over ``ring.names`` to rationals.  ``cap`` is the window:
    every coefficient whose valuation is componentwise ``<= cap`` is exact
    (``None`` = unbounded).  ``floor`` is a componentwise lower bound on the
    valuation of every term of the *untruncated* series.
    """

    __slots__ = ("ring", "terms", "cap", "floor")

    def __init__(self, ring: SeriesRing, terms: Mapping[Exps, Fraction], cap: Optional[Cap] = None,
                 floor: Optional[Exps] = None):
        self.ring = ring
        if cap is None:
            cap = (None,) * ring.nval
        self.cap = tuple(cap)
        clean = {}
        for k, c in terms.items():
            if c and ring.nil_ok(k) and _within(ring.valuation(k), self.cap):
                clean[tuple(k)] = as_rat(c)
        self.terms = clean
        if floor is None:
            floor = self._actual_min()
        self.floor = tuple(floor)

    @classmethod
    def _raw(cls, ring, terms, cap, floor):
        s = cls.__new__(cls)
        s.ring = ring
        s.terms = terms
        s.cap = cap
        s.floor = floor
        return s

    def _actual_min(self) -> Exps:
        vals = [self.ring.valuation(k) for k in self.terms]
        if not vals:
            return (0,) * self.ring.nval
        return tuple(min(col) for col in zip(*vals))

    # -- constructors
    @classmethod
    def from_mpoly(cls, ring: SeriesRing, p: MPoly) -> "ILSeries":
        if p.vars != ring.names:
            p = p.extend(ring.names)
        return cls(ring, p.terms)

    @classmethod
    def one(cls, ring: SeriesRing) -> "ILSeries":
        return cls(ring, {ring.one_key(): Fraction(1)})

    @classmethod
    def monomial(cls, ring: SeriesRing, key: Exps, c=1) -> "ILSeries":
        return cls(ring, {tuple(key): as_rat(c)})

    def is_exact(self) -> bool:
        return all(c is None for c in self.cap)

    def to_mpoly(self) -> MPoly:
        if not self.is_exact():
            raise TruncationError("series is truncated; not a polynomial")
        return MPoly(self.ring.names, self.terms)

    # -- arithmetic
    def _check(self, other: "ILSeries"):
        if other.ring != self.ring:
            raise ValueError("series over different rings")

    def __add__(self, other):
        if isinstance(other, (int, Fraction)):
            other = ILSeries.one(self.ring).scale(other)
        self._check(other)
        cap = _cap_min(self.cap, other.cap)
        out = dict(self.terms)
        for k, c in other.terms.items():
            v = out.get(k, 0) + c
            if v:
                out[k] = v
            else:
                out.pop(k, None)
        floor = tuple(min(a, b) for a, b in zip(self.floor, other.floor))
        return ILSeries(self.ring, out, cap, floor)

    __radd__ = __add__

    def __neg__(self):
        return ILSeries._raw(self.ring, {k: -c for k, c in self.terms.items()}, self.cap, self.floor)

    def __sub__(self, other):
        if isinstance(other, (int, Fraction)):
            return self + (-as_rat(other))
        return self + (-other)

    def scale(self, c) -> "ILSeries":
        c = as_rat(c)
        if not c:
            return ILSeries._raw(self.ring, {}, self.cap, self.floor)
        return ILSeries._raw(self.ring, {k: v * c for k, v in self.terms.items()}, self.cap, self.floor)

    def mul(self, other: "ILSeries", cap: Optional[Cap] = None) -> "ILSeries":
        """Product, optionally truncated further to ``cap``."""
        self._check(other)
        ring = self.ring
        natural = _cap_min(_cap_shift(self.cap, other.floor), _cap_shift(other.cap, self.floor))
        if cap is not None:
            natural = _cap_min(natural, cap)
        floor = tuple(a + b for a, b in zip(self.floor, other.floor))
        val = ring.valuation
        a_items = [(k, c, val(k)) for k, c in self.terms.items()]
        b_items = [(k, c, val(k)) for k, c in other.terms.items()]
        bounded = [(i, c) for i, c in enumerate(natural) if c is not None]
        base = ring.ny + 1
        nil_caps = ring.nil_caps
        out: Dict[Exps, Fraction] = {}
        get = out.get
        for ka, ca, va in a_items:
            for kb, cb, vb in b_items:
                skip = False
                for i, c in bounded:
                    if va[i] + vb[i] > c:
                        skip = True
                        break
                if skip:
                    continue
                k = tuple(x + y for x, y in zip(ka, kb))
                if nil_caps:
                    bad = False
                    for j, nc in enumerate(nil_caps):
                        if k[base + j] > nc:
                            bad = True
                            break
                    if bad:
                        continue
                v = get(k, 0) + ca * cb
                if v:
                    out[k] = v
                else:
                    out.pop(k, None)
        return ILSeries._raw(ring, out, natural, floor)

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        if isinstance(other, ILSeries):
            return self.mul(other)
        return NotImplemented

    __rmul__ = __mul__

    def truncate(self, cap: Cap) -> "ILSeries":
        return ILSeries(self.ring, self.terms, _cap_min(self.cap, cap), self.floor)

    def widen_floor(self, floor: Exps) -> "ILSeries":
        return ILSeries._raw(self.ring, self.terms, self.cap,
                             tuple(min(a, b) for a, b in zip(self.floor, floor)))

    # -- extraction
    def coefficient(self, key: Exps) -> Fraction:
        v = self.ring.valuation(key)
        if not _within(v, self.cap):
            raise TruncationError(f"truncation too small: {key} outside window {self.cap}")
        return self.terms.get(tuple(key), Fraction(0))

    def y_coefficient(self, y_exps: Sequence[int]) -> MPoly:
        """Coefficient of ``y^y_exps`` as a Laurent polynomial in the deltas.

        Every delta exponent whose full key lies outside the window raises
        :class:`TruncationError` only if the window is bounded in d2; with a
        bounded d2 window the result contains the d2 exponents up to that cap.
        """
        ring = self.ring
        ny = ring.ny
        y_exps = tuple(y_exps)
        probe = ring.valuation(y_exps + (0,) * ring.ndelta)
        if not _within(probe[:ny], self.cap[:ny]):
            raise TruncationError(f"truncation too small: y^{y_exps} outside window {self.cap}")
        dnames = ring.names[ny:]
        out = {}
        for k, c in self.terms.items():
            if k[:ny] == y_exps:
                out[k[ny:]] = c
        return MPoly(dnames, out)

    def delta_coeff(self, monomial: Mapping[str, int]) -> "ILSeries":
        ring = self.ring
        ny = ring.ny
        want = tuple(monomial.get(n, 0) for n in ring.names[ny:])
        out = {}
        for k, c in self.terms.items():
            if k[ny:] == want:
                out[k] = c
        return ILSeries(ring, out, self.cap, self.floor)

    def __eq__(self, other):
        if not isinstance(other, ILSeries):
            return NotImplemented
        return self.ring == other.ring and self.terms == other.terms and self.cap == other.cap

    def agrees_with(self, other: "ILSeries") -> bool:
        """True iff both series agree on their common window."""
        cap = _cap_min(self.cap, other.cap)
        a = {k: c for k, c in self.terms.items() if _within(self.ring.valuation(k), cap)}
        b = {k: c for k, c in other.terms.items() if _within(self.ring.valuation(k), cap)}
        return a == b

    def __len__(self):
        return len(self.terms)

    def __repr__(self):
        return f"ILSeries({MPoly(self.ring.names, self.terms)!r}, cap={self.cap})"

    # -- structure used by invert / exp
    def _split(self):
        """(non-nilpotent terms, nilpotent-bearing terms)."""
        ring = self.ring
        plain, nil = {}, {}
        for k, c in self.terms.items():
            (nil if ring.nil_degree(k) else plain)[k] = c
        return plain, nil

    def _negmin(self, terms: Mapping[Exps, Fraction]) -> Exps:
        val = self.ring.valuation
        out = [0] * self.ring.nval
        for k in terms:
            for i, x in enumerate(val(k)):
                if x < out[i]:
                    out[i] = x
        return tuple(out)


# ---------------------------------------------------------------------------
# series operations

_MAX_ITERATIONS = 100_000


def _power_sum(eps: ILSeries, coeffs, target: Cap, negmin: Exps) -> Dict[Exps, Fraction]:
    """sum_t coeffs(t) * eps^t truncated to ``target`` (valuations of the sum).

    Pruning is sound: a term of nilpotent degree d can still be lowered by at
    most ``(nil_total - d) * negmin`` through further factors of ``eps``.
    """
    ring = eps.ring
    val = ring.valuation
    total = ring.nil_total
    base = ring.ny + 1
    nil_caps = ring.nil_caps
    eps_items = [(k, c, val(k)) for k, c in eps.terms.items()]
    bounded = [(i, c) for i, c in enumerate(target) if c is not None]

    def alive(v, nd):
        slack = total - nd
        for i, c in bounded:
            if v[i] + slack * negmin[i] > c:
                return False
        return True

    one = ring.one_key()
    power = {one: (Fraction(1), val(one), 0)}
    acc: Dict[Exps, Fraction] = {}
    c0 = coeffs(0)
    if c0:
        acc[one] = c0
    t = 0
    while power:
        t += 1
        if t > _MAX_ITERATIONS:
            raise TruncationError("series expansion does not terminate; window is unbounded")
        nxt: Dict[Exps, list] = {}
        for k1, (c1, v1, d1) in power.items():
            for k2, c2, v2 in eps_items:
                k = tuple(a + b for a, b in zip(k1, k2))
                if nil_caps:
                    bad = False
                    for j, nc in enumerate(nil_caps):
                        if k[base + j] > nc:
                            bad = True
                            break
                    if bad:
                        continue
                v = tuple(a + b for a, b in zip(v1, v2))
                d = d1 + sum(k2[base:])
                if not alive(v, d):
                    continue
                slot = nxt.get(k)
                if slot is None:
                    nxt[k] = [c1 * c2, v, d]
                else:
                    slot[0] += c1 * c2
        power = {k: (s[0], s[1], s[2]) for k, s in nxt.items() if s[0]}
        ct = coeffs(t)
        if ct:
            for k, (c, v, _) in power.items():
                if _within(v, target):
                    nv = acc.get(k, 0) + c * ct
                    if nv:
                        acc[k] = nv
                    else:
                        acc.pop(k, None)
    return acc


def _leading_term(s: ILSeries):
    plain, _ = s._split()
    if not plain:
        raise NonUnitError("non-unit leading term")
    val = s.ring.valuation
    items = [(k, val(k)) for k in plain]
    for k, v in items:
        if all(all(a <= b for a, b in zip(v, w)) for _, w in items):
            return k, plain[k]
    raise NonUnitError("non-unit leading term")


def _require_exact(s: ILSeries, what: str):
    if not s.is_exact():
        raise TruncationError(f"{what} needs an exactly known argument")


def series_invert(s: ILSeries, cap: Optional[Cap] = None) -> ILSeries:
    """Multiplicative inverse ``t`` with ``s*t = 1`` on the window ``cap``.

    The leading term (componentwise smallest valuation among terms free of
    nilpotent parameters) must dominate: after dividing by it, every other
    term without nilpotents has strictly positive valuation.
    """
    ring = s.ring
    _require_exact(s, "inversion")
    if cap is None:
        cap = (None,) * ring.nval
    lead_key, lead_c = _leading_term(s)
    inv_key = tuple(-x for x in lead_key)
    inv_c = Fraction(1) / lead_c
    lead_val = ring.valuation(lead_key)
    eps_terms = {}
    for k, c in s.terms.items():
        if k != lead_key:
            eps_terms[tuple(a + b for a, b in zip(k, inv_key))] = -c * inv_c
    eps = ILSeries._raw(ring, eps_terms, (None,) * ring.nval, None)
    plain, nil = eps._split()
    for k in plain:
        v = ring.valuation(k)
        if any(x < 0 for x in v) or not any(v):
            raise NonUnitError("non-unit leading term")
    negmin = eps._negmin(nil)
    floor = tuple(-lv + ring.nil_total * nm for lv, nm in zip(lead_val, negmin))
    acc = _power_sum(eps, lambda t: Fraction(1), _cap_shift(cap, lead_val), negmin)
    out = {tuple(a + b for a, b in zip(k, inv_key)): c * inv_c for k, c in acc.items()}
    return ILSeries(ring, out, cap, floor)


def _check_small(s: ILSeries, what: str):
    ring = s.ring
    one = ring.one_key()
    if s.terms.get(one):
        raise ValueError(f"{what} of a series with nonzero constant term")
    plain, nil = s._split()
    for k in plain:
        v = ring.valuation(k)
        if any(x < 0 for x in v) or not any(v):
            raise ValueError(f"{what}: argument is not topologically small")
    return s._negmin(nil)


def _compose(s: ILSeries, coeffs, cap: Optional[Cap], what: str) -> ILSeries:
    ring = s.ring
    if cap is None:
        cap = (None,) * ring.nval
    _require_exact(s, what)
    negmin = _check_small(s, what)
    floor = tuple(ring.nil_total * nm for nm in negmin)
    acc = _power_sum(s, coeffs, cap, negmin)
    return ILSeries(ring, acc, cap, floor)


def series_exp(s: ILSeries, cap: Optional[Cap] = None) -> ILSeries:
    """exp(s) for s with zero constant term."""
    return _compose(s, lambda n: Fraction(1, factorial(n)), cap, "exp")


def bernoulli_series(u: ILSeries, cap: Optional[Cap] = None) -> ILSeries:
    """u/(e^u - 1) = sum B_n u^n / n!  composed with u."""
    return _compose(u, bernoulli_egf_coeff, cap, "bernoulli series")


def compose_floor(u: ILSeries) -> Exps:
    """Lower bound on the valuation of any power series in ``u``."""
    negmin = _check_small(u, "composition")
    return tuple(u.ring.nil_total * nm for nm in negmin)


def invert_floor(s: ILSeries) -> Exps:
    """Lower bound on the valuation of ``1/s`` (without expanding it)."""
    ring = s.ring
    lead_key, lead_c = _leading_term(s)
    inv_key = tuple(-x for x in lead_key)
    eps_terms = {tuple(a + b for a, b in zip(k, inv_key)): c for k, c in s.terms.items() if k != lead_key}
    eps = ILSeries._raw(ring, eps_terms, (None,) * ring.nval, None)
    _, nil = eps._split()
    negmin = eps._negmin(nil)
    lead_val = ring.valuation(lead_key)
    return tuple(-lv + ring.nil_total * nm for lv, nm in zip(lead_val, negmin))


def one_minus_exp_inv(u: ILSeries, cap: Optional[Cap] = None) -> ILSeries:
    """1/(1 - e^u) = -(1/u) * sum B_n u^n/n!, expanded on the window ``cap``."""
    ring = u.ring
    if cap is None:
        cap = (None,) * ring.nval
    f_inv = invert_floor(u)
    f_b = compose_floor(u)
    inv = series_invert(u, _cap_shift(cap, tuple(-x for x in f_b)))
    bern = bernoulli_series(u, _cap_shift(cap, tuple(-x for x in f_inv)))
    return -(inv.mul(bern, cap))


def one_minus_exp_inv_floor(u: ILSeries) -> Exps:
    return tuple(a + b for a, b in zip(invert_floor(u), compose_floor(u)))

"""Verification suites: closed-form oracles and internal identities.

Each check returns a list of :class:`CheckResult`; the CLI ``verify`` command
prints them as a table.
"""
from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Dict, List, Sequence

from .exact import MPoly, format_rat
from .grassmann import berezin_integral, gr_exp_even, standard_torus_form, torus_factor
from .iber import IberInput, iber
from .pairings import (
    PairingSpec,
    degree_check,
    evaluate,
    fundamental_class_check,
    kiem_pairing,
    rank2_ih,
    rank2_residue_form,
)
from .roots import RootBasis, WeightVector, basis_from_permutation, c_vector, hamiltonian_family, lattice_reduce
from .symfun import lagrange_sum_cleared, tau_poly, xd_vars


@dataclass
class CheckResult:
    suite: str
    case: str
    expected: str
    got: str
    ok: bool


def _res(suite, case, expected, got) -> CheckResult:
    e = format_rat(expected) if isinstance(expected, (int, Fraction)) else str(expected)
    g = format_rat(got) if isinstance(got, (int, Fraction)) else str(got)
    return CheckResult(suite, case, e, g, expected == got)


def rank2_triples(g: int):
    for p in range(0, g + 1):
        for m in range(0, (3 * g - 3 - 3 * p) // 2 + 1):
            n = 3 * g - 3 - 3 * p - 2 * m
            if n >= 0:
                yield m, n, p


def check_rank2(genera: Sequence[int] = (2, 3)) -> List[CheckResult]:
    out = []
    for g in genera:
        for m, n, p in rank2_triples(g):
            out.append(_res("rank2", f"g={g} a^{m} f^{n} gamma^{p}", rank2_residue_form(g, m, n, p),
                            rank2_ih(g, m, n, p)))
    return out


def check_kiem(genera: Sequence[int] = (2, 3)) -> List[CheckResult]:
    out = []
    for g in genera:
        for m in range(0, g - 1):
            n = 3 * g - 3 - 2 * m
            got = Fraction(-4) ** m * 2 ** n * rank2_ih(g, m, n)
            out.append(_res("kiem", f"g={g} m={m} n={n}", kiem_pairing(g, m, n), got))
    return out


def check_fundamental(genera: Sequence[int] = (2, 3)) -> List[CheckResult]:
    return [_res("fundamental", f"g={g}", Fraction(1), fundamental_class_check(g)) for g in genera]


def check_berezin(max_r: int = 4, max_g: int = 3, brute_r: int = 3, brute_g: int = 2) -> List[CheckResult]:
    out = []
    for r in range(2, max_r + 1):
        for g in range(1, max_g + 1):
            val = berezin_integral(gr_exp_even(standard_torus_form(r, g)), r, g)
            out.append(_res("berezin", f"exp form r={r} g={g}", Fraction(r ** g), val))
    rng = random.Random(7)
    for r in range(2, brute_r + 1):
        for g in range(1, brute_g + 1):
            gens = [(k, j) for k in range(2, r + 1) for j in range(1, 2 * g + 1)]
            for _ in range(3):
                size = rng.choice([s for s in (0, 2, 4) if s <= len(gens)])
                table = {kj: 1 for kj in rng.sample(gens, size)}
                fast = torus_factor(r, g, table)
                slow = torus_factor(r, g, table, factorized=False)
                out.append(CheckResult("berezin", f"blocks vs brute r={r} g={g} {sorted(table)}",
                                       "equal", "equal" if fast == slow else "differ", fast == slow))
    return out


def representative_specs(r: int, g: int) -> List[PairingSpec]:
    dim = (r * r - 1) * (g - 1)
    # f_2 has degree 2, so f_2^dim is top degree
    specs = [PairingSpec.build("ih", r, g, f={2: dim})]
    specs.append(PairingSpec.build("m1", r, g, f={2: dim}))
    specs.append(PairingSpec.build("p0", r, g, z=r - 1, f={2: dim}))
    specs.append(PairingSpec.build("ih", r, g, a={2: 1}, f={2: dim - 2}))
    if r >= 3:
        specs.append(PairingSpec.build("m1", r, g, f={2: dim - 4, 3: 2}))
    return specs


def check_basis_independence(r: int = 3, g: int = 2) -> List[CheckResult]:
    out = []
    for spec in representative_specs(r, g):
        vals = [evaluate(spec, n).value for n in range(1, r + 1)]
        same = all(v == vals[0] for v in vals)
        out.append(CheckResult("basis-independence", f"{spec.target} a={dict(spec.a)} f={dict(spec.f)} z={spec.z}",
                               format_rat(vals[0]), " ".join(format_rat(v) for v in vals), same))
    return out


def check_lemma(max_r: int = 4) -> List[CheckResult]:
    out = []
    for r in range(2, max_r + 1):
        for m in range(0, r + 4):
            lhs, rhs = lagrange_sum_cleared(m, r)
            out.append(CheckResult("lemma", f"r={r} m={m}", "equal", "equal" if lhs == rhs else "differ", lhs == rhs))
    return out


# -- randomized residue identities


def random_translation_invariant(r: int, rng: random.Random, max_factors: int = 3) -> MPoly:
    """A random polynomial in root differences and tau_k, with delta parameters."""
    vars_ = xd_vars(r)
    total = MPoly.zero(vars_)
    for _ in range(rng.randint(1, 3)):
        term = MPoly.const(vars_, Fraction(rng.randint(-3, 3) or 1, rng.randint(1, 3)))
        for _ in range(rng.randint(0, max_factors)):
            if rng.random() < 0.7:
                i, j = rng.sample(range(1, r + 1), 2)
                term = term * (MPoly.var(vars_, f"x{i}") - MPoly.var(vars_, f"x{j}"))
            else:
                term = term * tau_poly(rng.randint(2, r), r).extend(vars_)
        if rng.random() < 0.5:
            term = term * MPoly.var(vars_, f"d{rng.randint(2, r)}")
        total = total + term
    return total


def random_poles(r: int, rng: random.Random) -> Dict[tuple, int]:
    poles = {}
    for _ in range(rng.randint(1, r + 1)):
        i, j = rng.sample(range(1, r + 1), 2)
        poles[(i, j)] = poles.get((i, j), 0) + 1
    return poles


def random_lattice(r: int, rng: random.Random) -> WeightVector:
    comps = [rng.randint(-2, 2) for _ in range(r - 1)]
    return WeightVector(tuple(Fraction(c) for c in comps + [-sum(comps)]))


def _delta_caps(r):
    return {f"d{k}": 1 for k in range(3, r + 1)}


def shift_instance(rng: random.Random, r: int):
    sigma = list(range(1, r + 1))
    rng.shuffle(sigma)
    basis = basis_from_permutation(sigma)
    f = random_translation_invariant(r, rng)
    poles = random_poles(r, rng)
    a = -lattice_reduce(c_vector(r), basis)[0]
    v = random_lattice(r, rng)
    caps = _delta_caps(r)
    lhs = iber(IberInput.make(f, poles, a + v, basis), caps)
    rhs = iber(IberInput.make(f, poles, a, basis, exp_weights=(v,)), caps)
    return lhs, rhs


def permute_poly(p: MPoly, sigma: Sequence[int]) -> MPoly:
    """x_m -> x_{sigma^{-1}(m)}."""
    r = len(sigma)
    inv = {s: i + 1 for i, s in enumerate(sigma)}
    images = {f"x{m}": MPoly.var(p.vars, f"x{inv[m]}") for m in range(1, r + 1)}
    return p.substitute(images, p.vars)


def permute_weight(a: WeightVector, sigma: Sequence[int]) -> WeightVector:
    """(sigma a)_{sigma(i)} = a_i."""
    comps = [Fraction(0)] * len(sigma)
    for i, s in enumerate(sigma):
        comps[s - 1] = a[i]
    return WeightVector(tuple(comps))


def permute_basis(basis: RootBasis, sigma: Sequence[int]) -> RootBasis:
    return RootBasis(basis.r, tuple((sigma[i - 1], sigma[j - 1]) for i, j in basis.pairs))


def permutation_instance(rng: random.Random, r: int):
    tau = list(range(1, r + 1))
    rng.shuffle(tau)
    basis = basis_from_permutation(tau)
    sigma = list(range(1, r + 1))
    rng.shuffle(sigma)
    f = random_translation_invariant(r, rng)
    poles = random_poles(r, rng)
    c = c_vector(r)
    a = random_lattice(r, rng)
    sb = permute_basis(basis, sigma)
    sc = permute_weight(c, sigma)
    caps = _delta_caps(r)
    lhs = iber(IberInput.make(f, poles, permute_weight(a, sigma) - lattice_reduce(sc, sb)[0], sb), caps)
    inv = {s: i + 1 for i, s in enumerate(sigma)}
    moved = {(inv[i], inv[j]): e for (i, j), e in poles.items()}
    rhs = iber(IberInput.make(permute_poly(f, sigma), moved, a - lattice_reduce(c, basis)[0], basis), caps)
    return lhs, rhs


def check_residue_identities(count: int = 20, seed: int = 11) -> List[CheckResult]:
    """``count`` instances of each identity with a nonzero left-hand side."""
    rng = random.Random(seed)
    out = []
    for name, make in (("shift", shift_instance), ("permutation", permutation_instance)):
        t = 0
        found = 0
        while found < count:
            r = 2 if t % 3 == 0 else 3
            lhs, rhs = make(rng, r)
            t += 1
            if lhs.is_zero() and rhs.is_zero():
                continue
            found += 1
            out.append(CheckResult(name, f"#{found} r={r}", repr(lhs), repr(rhs), lhs == rhs))
    return out


def random_mismatched_spec(rng: random.Random) -> PairingSpec:
    while True:
        r = rng.choice([2, 2, 3])
        g = 2
        target = rng.choice(["ih", "m1", "p0"])
        a = {k: rng.randint(0, 1) for k in range(2, r + 1)}
        f = {k: rng.randint(0, 5 if k == 2 else 1) for k in range(2, r + 1)}
        z = rng.randint(0, r) if target == "p0" else 0
        gens = [(k, j) for k in range(2, r + 1) for j in range(1, 2 * g + 1)]
        b = rng.sample(gens, rng.choice([0, 0, 1, 2]))
        spec = PairingSpec.build(target, r, g, z=z, a=a, f=f, b=b)
        if not degree_check(spec):
            return spec


def check_degree_vanishing(count: int = 20, seed: int = 5) -> List[CheckResult]:
    rng = random.Random(seed)
    out = []
    for t in range(count):
        spec = random_mismatched_spec(rng)
        val = evaluate(spec, cancel=False).value
        out.append(_res("degree", f"#{t} {spec.target} r={spec.r} deg={spec.degree()}", Fraction(0), val))
    return out


def check_half_weight(max_r: int = 4) -> List[CheckResult]:
    out = []
    for r in range(2, max_r + 1):
        c = c_vector(r)
        half = c.scale(Fraction(1, 2))
        for m in range(1, r + 1):
            for basis in hamiltonian_family(r, m):
                a = lattice_reduce(c, basis)[0]
                b = lattice_reduce(half, basis)[0]
                out.append(CheckResult("half-weight", f"r={r} {basis.label()}", repr(a), repr(b), a == b))
    return out


SUITES: Dict[str, Callable[..., List[CheckResult]]] = {
    "rank2": lambda r=None, g=None: check_rank2((g,) if g else (2, 3)),
    "kiem": lambda r=None, g=None: check_kiem((g,) if g else (2, 3)),
    "fundamental": lambda r=None, g=None: check_fundamental((g,) if g else (2, 3)),
    "berezin": lambda r=None, g=None: check_berezin(),
    "basis-independence": lambda r=None, g=None: check_basis_independence(r or 3, g or 2),
    "lemma": lambda r=None, g=None: check_lemma(),
    "residue-identities": lambda r=None, g=None: check_residue_identities(),
    "degree": lambda r=None, g=None: check_degree_vanishing(),
    "half-weight": lambda r=None, g=None: check_half_weight(),
}

"""Root-space combinatorics for the A_{r-1} root system.

Weights live in ``V* = {a in Q^r : sum a_i = 0}``.  A root ``alpha(i, j)`` is
``e_i - e_j`` (1-indexed).  Ordered root bases are built from permutations;
coordinates ``y_k = <beta_k, x>`` are the B-coordinates used by the residue engine.

Directions: a weight ``a`` acts on functions of x by ``sum_i a_i d/dx_i`` (the
Euclidean identification of V* with V).  In B-coordinates this is
``sum_k <beta_k, a> d/dy_k``, see :func:`dual_direction`.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import permutations
from math import floor
from typing import Dict, List, Optional, Sequence, Tuple

from .exact import MPoly, as_rat


@dataclass(frozen=True)
class WeightVector:
    components: Tuple[Fraction, ...]

    def __post_init__(self):
        comps = tuple(as_rat(c) for c in self.components)
        object.__setattr__(self, "components", comps)
        if sum(comps) != 0:
            raise ValueError(f"weight {comps} does not sum to zero")

    @classmethod
    def of(cls, *values) -> "WeightVector":
        return cls(tuple(as_rat(v) for v in values))

    @classmethod
    def zero(cls, r: int) -> "WeightVector":
        return cls((Fraction(0),) * r)

    @property
    def r(self) -> int:
        return len(self.components)

    def __getitem__(self, i):
        return self.components[i]

    def __iter__(self):
        return iter(self.components)

    def __add__(self, other: "WeightVector") -> "WeightVector":
        return WeightVector(tuple(a + b for a, b in zip(self, other)))

    def __sub__(self, other: "WeightVector") -> "WeightVector":
        return WeightVector(tuple(a - b for a, b in zip(self, other)))

    def __neg__(self) -> "WeightVector":
        return WeightVector(tuple(-a for a in self))

    def scale(self, c) -> "WeightVector":
        c = as_rat(c)
        return WeightVector(tuple(c * a for a in self))

    def dot(self, other: Sequence) -> Fraction:
        return sum((a * as_rat(b) for a, b in zip(self, other)), Fraction(0))

    def is_integral(self) -> bool:
        return all(c.denominator == 1 for c in self.components)

    def is_zero(self) -> bool:
        return not any(self.components)

    def __repr__(self):
        from .exact import format_rat

        return "W(" + ", ".join(format_rat(c) for c in self.components) + ")"


def root(i: int, j: int, r: int) -> WeightVector:
    """alpha^{ij} = e_i - e_j."""
    if i == j or not (1 <= i <= r and 1 <= j <= r):
        raise ValueError(f"invalid root indices ({i}, {j}) for r={r}")
    comps = [Fraction(0)] * r
    comps[i - 1] += 1
    comps[j - 1] -= 1
    return WeightVector(tuple(comps))


def c_vector(r: int) -> WeightVector:
    """(1/r, ..., 1/r, 1/r - 1)."""
    return WeightVector(tuple([Fraction(1, r)] * (r - 1) + [Fraction(1, r) - 1]))


def s_vector(r: int) -> WeightVector:
    """((1 - r)/r, 1/r, ..., 1/r)."""
    return WeightVector(tuple([Fraction(1 - r, r)] + [Fraction(1, r)] * (r - 1)))


def half_c_vector(r: int) -> WeightVector:
    return c_vector(r).scale(Fraction(1, 2))


def _solve(matrix: List[List[Fraction]], rhs: List[Fraction]) -> List[Fraction]:
    n = len(matrix)
    aug = [list(row) + [b] for row, b in zip(matrix, rhs)]
    for col in range(n):
        piv = next((i for i in range(col, n) if aug[i][col]), None)
        if piv is None:
            raise ValueError("singular system")
        aug[col], aug[piv] = aug[piv], aug[col]
        p = aug[col][col]
        aug[col] = [x / p for x in aug[col]]
        for i in range(n):
            if i != col and aug[i][col]:
                f = aug[i][col]
                aug[i] = [x - f * y for x, y in zip(aug[i], aug[col])]
    return [aug[i][n] for i in range(n)]


def _inverse(matrix: List[List[Fraction]]) -> List[List[Fraction]]:
    n = len(matrix)
    cols = [_solve(matrix, [Fraction(int(i == j)) for i in range(n)]) for j in range(n)]
    return [[cols[j][i] for j in range(n)] for i in range(n)]


@dataclass(frozen=True)
class RootBasis:
    """Ordered basis (beta_1, ..., beta_{r-1}) of V* made of roots.

    ``pairs[k]`` is ``(i, j)`` with ``beta_{k+1} = e_i - e_j``.
    """

    r: int
    pairs: Tuple[Tuple[int, int], ...]
    _to_coords: Tuple[Tuple[Fraction, ...], ...] = field(init=False, repr=False, compare=False)
    _from_coords: Tuple[Tuple[Fraction, ...], ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        pairs = tuple(tuple(p) for p in self.pairs)
        object.__setattr__(self, "pairs", pairs)
        if len(pairs) != self.r - 1:
            raise ValueError("a basis of V* needs r - 1 roots")
        vecs = [root(i, j, self.r) for i, j in pairs]
        # columns are the basis vectors restricted to the first r-1 coordinates;
        # dropping the last coordinate is an isomorphism on V*
        n = self.r - 1
        mat = [[vecs[k][i] for k in range(n)] for i in range(n)]
        try:
            inv = _inverse(mat)
        except ValueError:
            raise ValueError(f"roots {pairs} are not linearly independent") from None
        object.__setattr__(self, "_from_coords", tuple(tuple(row) for row in mat))
        object.__setattr__(self, "_to_coords", tuple(tuple(row) for row in inv))

    @property
    def rank(self) -> int:
        return self.r - 1

    def vectors(self) -> Tuple[WeightVector, ...]:
        return tuple(root(i, j, self.r) for i, j in self.pairs)

    def __getitem__(self, k) -> WeightVector:
        i, j = self.pairs[k]
        return root(i, j, self.r)

    def coords(self, a: WeightVector) -> Tuple[Fraction, ...]:
        head = a.components[: self.r - 1]
        return tuple(sum((m * x for m, x in zip(row, head)), Fraction(0)) for row in self._to_coords)

    def from_coords(self, coeffs: Sequence[Fraction]) -> WeightVector:
        out = WeightVector.zero(self.r)
        for c, v in zip(coeffs, self.vectors()):
            out = out + v.scale(c)
        return out

    def gram(self) -> Tuple[Tuple[Fraction, ...], ...]:
        vecs = self.vectors()
        return tuple(tuple(u.dot(v) for v in vecs) for u in vecs)

    def y_names(self) -> Tuple[str, ...]:
        return tuple(f"y{k + 1}" for k in range(self.r - 1))

    def x_images(self) -> Dict[str, Dict[str, Fraction]]:
        """x_i expressed linearly in y, after fixing x_r = 0."""
        r = self.r
        names = self.y_names()
        out = {}
        for i in range(1, r):
            co = self.coords(root(i, r, r))
            out[f"x{i}"] = {n: c for n, c in zip(names, co) if c}
        out[f"x{r}"] = {}
        return out

    def label(self) -> str:
        return "(" + ", ".join(f"a{i}{j}" for i, j in self.pairs) + ")"


def basis_from_permutation(sigma: Sequence[int]) -> RootBasis:
    """B_sigma = (alpha^{s(r-1) s(r)}, alpha^{s(r-2) s(r-1)}, ..., alpha^{s(1) s(2)}).

    ``sigma`` lists the images ``(sigma(1), ..., sigma(r))``.
    """
    sigma = tuple(sigma)
    r = len(sigma)
    if sorted(sigma) != list(range(1, r + 1)):
        raise ValueError(f"{sigma} is not a permutation of 1..{r}")
    pairs = tuple((sigma[k - 1], sigma[k]) for k in range(r - 1, 0, -1))
    return RootBasis(r, pairs)


def hamiltonian_family(r: int, m: int) -> List[RootBasis]:
    """{B_sigma : sigma(1) = m}, in lexicographic order of sigma."""
    if not 1 <= m <= r:
        raise ValueError(f"family index {m} outside 1..{r}")
    seen = set()
    out = []
    for sigma in permutations(range(1, r + 1)):
        if sigma[0] != m:
            continue
        b = basis_from_permutation(sigma)
        if b.pairs not in seen:
            seen.add(b.pairs)
            out.append(b)
    return out


def coords_in_basis(a: WeightVector, basis: RootBasis) -> Tuple[Fraction, ...]:
    return basis.coords(a)


def lattice_reduce(a: WeightVector, basis: RootBasis) -> Tuple[WeightVector, WeightVector]:
    """([a]_B, {a}_B): integer and fractional parts of the B-coordinates."""
    co = basis.coords(a)
    integer = basis.from_coords([Fraction(floor(c)) for c in co])
    return integer, a - integer


def dual_direction(alpha: WeightVector, basis: RootBasis) -> Tuple[Fraction, ...]:
    """Coefficients ``c_k`` with ``d_alpha = sum_k c_k d/dy_k``.

    ``c_k = <beta_k, alpha>`` (Euclidean pairing), so a function written in
    B-coordinates is differentiated along alpha by the chain rule.
    """
    return tuple(b.dot(alpha.components) for b in basis.vectors())


def to_y_coordinates(p: MPoly, basis: RootBasis) -> MPoly:
    """Rewrite a translation-invariant polynomial in x as a polynomial in y.

    Variables other than x1..xr (the delta parameters) are kept.
    """
    r = basis.r
    xnames = tuple(f"x{i}" for i in range(1, r + 1))
    present = [n for n in xnames if n in p.vars]
    if present:
        total = MPoly.zero(p.vars)
        for n in present:
            total = total + p.diff(n)
        if not total.is_zero():
            raise ValueError("polynomial is not expressible in root differences")
    rest = tuple(v for v in p.vars if v not in xnames)
    target = basis.y_names() + rest
    images = {}
    for name, lin in basis.x_images().items():
        if name in p.vars:
            images[name] = MPoly.linear(target, lin)
    return p.substitute(images, target)


@dataclass(frozen=True)
class OrthoBasis:
    """Orthogonal basis of V with rational vectors ``w_a`` and squared norms ``n_a``.

    The orthonormal vectors are ``u_a = w_a / sqrt(n_a)``; the square roots are
    never formed.  Downstream code rescales the torus generators by the same
    factors so that everything stays rational.
    """

    r: int
    vectors: Tuple[Tuple[Fraction, ...], ...]
    norms: Tuple[Fraction, ...]

    def gram_normalized(self) -> Tuple[Tuple[Fraction, ...], ...]:
        """<u_a, u_b>^2 with sign, computed exactly: identity iff orthonormal."""
        out = []
        for a, (wa, na) in enumerate(zip(self.vectors, self.norms)):
            row = []
            for b, (wb, nb) in enumerate(zip(self.vectors, self.norms)):
                ip = sum((x * y for x, y in zip(wa, wb)), Fraction(0))
                sq = ip * ip / (na * nb)
                row.append(sq if ip >= 0 else -sq)
            out.append(tuple(row))
        return tuple(out)

    def norm_product(self) -> Fraction:
        p = Fraction(1)
        for n in self.norms:
            p *= n
        return p


def orthonormal_basis(r: int, order: Optional[Sequence[int]] = None) -> OrthoBasis:
    """Gram-Schmidt applied to the simple roots e_i - e_{i+1}.

    ``order`` permutes the simple roots (1-indexed) before orthogonalizing,
    giving a different orthonormal basis of the same space.
    """
    if r < 2:
        raise ValueError("r must be at least 2")
    idx = list(order) if order is not None else list(range(1, r))
    if sorted(idx) != list(range(1, r)):
        raise ValueError("order must permute 1..r-1")
    vecs: List[Tuple[Fraction, ...]] = []
    norms: List[Fraction] = []
    for i in idx:
        v = list(root(i, i + 1, r).components)
        for w, n in zip(vecs, norms):
            ip = sum((x * y for x, y in zip(v, w)), Fraction(0))
            v = [x - ip / n * y for x, y in zip(v, w)]
        vecs.append(tuple(v))
        norms.append(sum((x * x for x in v), Fraction(0)))
    return OrthoBasis(r, tuple(vecs), tuple(norms))

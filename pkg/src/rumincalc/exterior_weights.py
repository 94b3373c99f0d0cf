"""Exterior algebra of the left-invariant coframe on H^n, graded by weight.

The coframe is omega_1..omega_2n (duals of X_1..X_n, Y_1..Y_n, weight 1) and
theta (dual of T, weight 2). A covector is stored as a dict from bitmasks over
the 2n+1 indices to Fraction coefficients; the monomial covectors are declared
orthonormal, which fixes the inner product on every degree.

The differential of the coframe is computed from the structure equations
d omega(U, V) = -omega([U, V]) on frame fields, not hardcoded; with the group
conventions here this yields d theta = -sum_j omega_j ^ omega_{j+n}, and the
Lefschetz operator is wedging with the horizontal 2-covector d theta.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping

from . import linalg
from .envelope import EnvOp


def _merge_sign(a: int, b: int) -> int:
    """Sign of sorting the concatenation of two disjoint ascending masks."""
    sign = 1
    bb = b
    while bb:
        low = bb & -bb
        i = low.bit_length() - 1
        if (a >> (i + 1)).bit_count() % 2:
            sign = -sign
        bb ^= low
    return sign


class Covector:
    __slots__ = ("n", "terms")

    def __init__(self, n: int, terms: Mapping[int, object] | None = None):
        self.n = n
        clean = {}
        if terms:
            limit = 1 << (2 * n + 1)
            for mask, c in terms.items():
                c = Fraction(c)
                if c == 0:
                    continue
                if not 0 <= mask < limit:
                    raise ValueError(f"mask {mask} out of range")
                clean[mask] = c
        self.terms = clean

    @classmethod
    def zero(cls, n: int) -> "Covector":
        return cls(n)

    @classmethod
    def basis(cls, n: int, mask: int) -> "Covector":
        return cls(n, {mask: Fraction(1)})

    @classmethod
    def one_form(cls, n: int, i: int) -> "Covector":
        return cls.basis(n, 1 << i)

    def __add__(self, other: "Covector") -> "Covector":
        terms = dict(self.terms)
        for m, c in other.terms.items():
            s = terms.get(m, Fraction(0)) + c
            if s == 0:
                terms.pop(m, None)
            else:
                terms[m] = s
        out = Covector.__new__(Covector)
        out.n, out.terms = self.n, terms
        return out

    def __neg__(self) -> "Covector":
        out = Covector.__new__(Covector)
        out.n = self.n
        out.terms = {m: -c for m, c in self.terms.items()}
        return out

    def __sub__(self, other: "Covector") -> "Covector":
        return self + (-other)

    def scale(self, c) -> "Covector":
        c = Fraction(c)
        if c == 0:
            return Covector.zero(self.n)
        out = Covector.__new__(Covector)
        out.n = self.n
        out.terms = {m: c * v for m, v in self.terms.items()}
        return out

    def __eq__(self, other) -> bool:
        return isinstance(other, Covector) and self.n == other.n and self.terms == other.terms

    def __bool__(self) -> bool:
        return bool(self.terms)

    def __repr__(self) -> str:
        if not self.terms:
            return "0"
        names = (
            [f"w{i+1}" for i in range(2 * self.n)] + ["theta"]
        )
        bits = []
        for mask, c in sorted(self.terms.items()):
            factors = [names[i] for i in range(2 * self.n + 1) if mask >> i & 1]
            bits.append(f"({c})" + "^".join(factors))
        return " + ".join(bits)

    def degrees(self) -> set:
        return {mask.bit_count() for mask in self.terms}

    def is_homogeneous(self) -> bool:
        return len(self.degrees()) <= 1

    def is_horizontal(self) -> bool:
        theta_bit = 1 << (2 * self.n)
        return all(not mask & theta_bit for mask in self.terms)

    def weight_of_mask(self, mask: int) -> int:
        theta_bit = 1 << (2 * self.n)
        horiz = (mask & ~theta_bit).bit_count()
        return horiz + (2 if mask & theta_bit else 0)

    def weights(self) -> set:
        return {self.weight_of_mask(m) for m in self.terms}

    def pure_weight_part(self, w: int) -> "Covector":
        return Covector(self.n, {m: c for m, c in self.terms.items() if self.weight_of_mask(m) == w})

    def horizontal_part(self) -> "Covector":
        theta_bit = 1 << (2 * self.n)
        return Covector(self.n, {m: c for m, c in self.terms.items() if not m & theta_bit})

    def theta_complement(self) -> "Covector":
        """beta with the theta-part of self equal to theta ^ beta."""
        theta_bit = 1 << (2 * self.n)
        terms = {}
        for mask, c in self.terms.items():
            if not mask & theta_bit:
                continue
            rest = mask & ~theta_bit
            # omega_rest ^ theta = (-1)^(deg rest) theta ^ omega_rest
            sign = -1 if rest.bit_count() % 2 else 1
            terms[rest] = sign * c
        return Covector(self.n, terms)


def wedge(a: Covector, b: Covector) -> Covector:
    if a.n != b.n:
        raise ValueError("covectors on different groups")
    terms: dict = {}
    for m1, c1 in a.terms.items():
        for m2, c2 in b.terms.items():
            if m1 & m2:
                continue
            m = m1 | m2
            s = terms.get(m, Fraction(0)) + _merge_sign(m1, m2) * c1 * c2
            if s == 0:
                terms.pop(m, None)
            else:
                terms[m] = s
    return Covector(a.n, terms)


def inner(a: Covector, b: Covector) -> Fraction:
    """Inner product making the monomial covectors orthonormal."""
    if a.n != b.n:
        raise ValueError("covectors on different groups")
    small, big = (a.terms, b.terms) if len(a.terms) <= len(b.terms) else (b.terms, a.terms)
    return sum((c * big[m] for m, c in small.items() if m in big), Fraction(0))


def frame_bracket(n: int, a: int, b: int) -> EnvOp:
    wa, wb = EnvOp.generator(n, a), EnvOp.generator(n, b)
    return wa * wb - wb * wa


def structure_d_one_form(n: int, i: int) -> Covector:
    """d of the i-th coframe element, from d omega(W_a, W_b) = -omega([W_a, W_b]).

    The bracket is computed in the enveloping algebra; omega_i pairs with the
    coefficient of generator i in it. No sign is assumed up front.
    """
    terms: dict = {}
    e_i = tuple(1 if g == i else 0 for g in range(2 * n + 1))
    for a in range(2 * n + 1):
        for b in range(a + 1, 2 * n + 1):
            pairing = frame_bracket(n, a, b).terms.get(e_i, Fraction(0))
            if pairing:
                terms[(1 << a) | (1 << b)] = -pairing
    return Covector(n, terms)


def dtheta(n: int) -> Covector:
    return structure_d_one_form(n, 2 * n)


def algebraic_d(c: Covector) -> Covector:
    """d on constant-coefficient covectors, by Leibniz over the factors.

    Horizontal coframe elements are closed here; only theta contributes. This
    is exactly the weight-preserving piece d_0 acting on basis covectors.
    """
    n = c.n
    ds = {i: structure_d_one_form(n, i) for i in range(2 * n + 1)}
    out = Covector.zero(n)
    for mask, coeff in c.terms.items():
        indices = [i for i in range(2 * n + 1) if mask >> i & 1]
        for pos, i in enumerate(indices):
            di = ds[i]
            if not di:
                continue
            before = 0
            for j in indices[:pos]:
                before |= 1 << j
            after = 0
            for j in indices[pos + 1 :]:
                after |= 1 << j
            sign = -1 if pos % 2 else 1
            piece = wedge(wedge(Covector.basis(n, before), di), Covector.basis(n, after))
            out = out + piece.scale(sign * coeff)
    return out


def lefschetz(a: Covector) -> Covector:
    """Wedge with the horizontal part of d theta; defined on horizontal input."""
    if not a.is_horizontal():
        raise ValueError("lefschetz expects a horizontal covector")
    return wedge(dtheta(a.n), a)


# -- graded bases and the splitting subspaces --------------------------------


def lambda_masks(n: int, h: int, horizontal_only: bool = False) -> list:
    width = 2 * n + (0 if horizontal_only else 1)
    masks = [m for m in range(1 << width) if m.bit_count() == h]
    return sorted(masks)


def covector_coords(c: Covector, masks: list) -> list:
    return [c.terms.get(m, Fraction(0)) for m in masks]


def covector_from_coords(n: int, masks: list, coords: list) -> Covector:
    return Covector(n, {m: v for m, v in zip(masks, coords) if v != 0})


@dataclass
class Subspace:
    """A subspace of some Lambda^h, with a pairwise-orthogonal rational basis.

    norms2 holds the squared norms (the diagonal Gram matrix); true
    orthonormalization would need square roots and is deliberately avoided.
    """

    n: int
    degree: int
    basis: list
    norms2: list

    @property
    def dim(self) -> int:
        return len(self.basis)

    def project(self, c: Covector) -> Covector:
        out = Covector.zero(self.n)
        for b, n2 in zip(self.basis, self.norms2):
            coeff = inner(c, b) / n2
            if coeff != 0:
                out = out + b.scale(coeff)
        return out

    def contains(self, c: Covector) -> bool:
        return self.project(c) == c


def _subspace_from_vectors(n: int, degree: int, masks: list, vectors: list) -> Subspace:
    ortho, norms2 = linalg.gram_schmidt(vectors)
    basis = [covector_from_coords(n, masks, v) for v in ortho]
    return Subspace(n, degree, basis, norms2)


def _eye(dim: int) -> list:
    return [[Fraction(1) if j == i else Fraction(0) for j in range(dim)] for i in range(dim)]


def _kernel(matrix: list, src_dim: int) -> list:
    """Nullspace, treating a matrix with no rows as the zero map."""
    if not matrix or not matrix[0]:
        return _eye(src_dim)
    return linalg.nullspace(matrix)


def d0_matrix(n: int, h: int) -> list:
    """Matrix of the algebraic differential Lambda^h -> Lambda^{h+1}."""
    src = lambda_masks(n, h)
    dst = lambda_masks(n, h + 1)
    cols = [algebraic_d(Covector.basis(n, m)) for m in src]
    return [[col.terms.get(dm, Fraction(0)) for col in cols] for dm in dst]


def build_spaces(n: int, h: int):
    """The complement spaces V, W and the core E0 = V ∩ ker(d0) in degree h.

    Both complements are chosen orthogonal: W ⟂ ker(d0) within Lambda^h and
    V ⟂ im(d0). The explicit Lefschetz-kernel/image descriptions of the same
    spaces are built independently in ``case_formula_spaces`` and compared in
    tests rather than assumed.
    """
    if not 0 <= h <= 2 * n + 1:
        raise ValueError(f"degree {h} out of range")
    masks = lambda_masks(n, h)
    dim = len(masks)
    d_here = d0_matrix(n, h)  # empty at top degree, where d0 ends the complex
    ker = _kernel(d_here, dim)
    if h > 0:
        below = d0_matrix(n, h - 1)
        image_raw = [[below[r][c] for r in range(dim)] for c in range(len(below[0]))]
        red, pivots = linalg.rref(image_raw)
        image = [red[i] for i in range(len(pivots))]
    else:
        image = []

    w_vectors = _kernel(ker, dim)
    v_vectors = _kernel(image, dim)
    e0_constraints = list(image) + [row for row in d_here]
    e0_vectors = _kernel(e0_constraints, dim)
    V = _subspace_from_vectors(n, h, masks, v_vectors)
    W = _subspace_from_vectors(n, h, masks, w_vectors)
    E0 = _subspace_from_vectors(n, h, masks, e0_vectors)
    return V, W, E0


def _lefschetz_power_matrix(n: int, k: int, power: int) -> list:
    """Matrix of L^power from horizontal degree k to degree k + 2 power."""
    src = lambda_masks(n, k, horizontal_only=True)
    dst = lambda_masks(n, k + 2 * power, horizontal_only=True)
    cols = []
    for m in src:
        c = Covector.basis(n, m)
        for _ in range(power):
            c = lefschetz(c)
        cols.append(c)
    return [[col.terms.get(dm, Fraction(0)) for col in cols] for dm in dst]


def _embed_horizontal(n: int, h: int, vec_masks: list, vec: list, with_theta: bool) -> list:
    """Coordinates in Lambda^h of a horizontal covector, optionally theta-wedged."""
    masks = lambda_masks(n, h)
    c = covector_from_coords(n, vec_masks, vec)
    if with_theta:
        c = wedge(Covector.one_form(n, 2 * n), c)
    return covector_coords(c, masks)


def case_formula_spaces(n: int, h: int):
    """V, W, E0 from the explicit Lefschetz kernel/image case formulas.

    Low degrees constrain the horizontal part by a Lefschetz power; high
    degrees force it to vanish. This is the independent route used to check
    ``build_spaces`` and to supply brute-force dimensions.
    """
    masks = lambda_masks(n, h)
    hmasks = lambda_masks(n, h, horizontal_only=True)
    hmasks_lower = lambda_masks(n, h - 1, horizontal_only=True) if h > 0 else []

    theta_block = []
    for i, _ in enumerate(hmasks_lower):
        vec = [Fraction(1) if j == i else Fraction(0) for j in range(len(hmasks_lower))]
        theta_block.append(_embed_horizontal(n, h, hmasks_lower, vec, with_theta=True))

    if h <= n:
        lp = _lefschetz_power_matrix(n, h, n - h + 1)
        prim = _kernel(lp, len(hmasks))
        v_vectors = [
            _embed_horizontal(n, h, hmasks, v, with_theta=False) for v in prim
        ] + theta_block
        e0_vectors = [_embed_horizontal(n, h, hmasks, v, with_theta=False) for v in prim]
    else:
        v_vectors = list(theta_block)
        l_once = _lefschetz_power_matrix(n, h - 1, 1)
        ker = _kernel(l_once, len(hmasks_lower))
        e0_vectors = [_embed_horizontal(n, h, hmasks_lower, v, with_theta=True) for v in ker]

    s = max(h - n, 0)
    src_deg = h - 1 - 2 * s
    if h == 0 or src_deg < 0:
        w_vectors = []
    else:
        src = lambda_masks(n, src_deg, horizontal_only=True)
        w_vectors = []
        for m in src:
            c = Covector.basis(n, m)
            for _ in range(s):
                c = lefschetz(c)
            if not c:
                continue
            coords = _embed_horizontal(
                n, h, lambda_masks(n, h - 1, horizontal_only=True),
                covector_coords(c, lambda_masks(n, h - 1, horizontal_only=True)),
                with_theta=True,
            )
            w_vectors.append(coords)
        red, pivots = linalg.rref(w_vectors) if w_vectors else ([], [])
        w_vectors = [red[i] for i in range(len(pivots))]

    V = _subspace_from_vectors(n, h, masks, v_vectors)
    W = _subspace_from_vectors(n, h, masks, w_vectors)
    E0 = _subspace_from_vectors(n, h, masks, e0_vectors)
    return V, W, E0


def core_dimension_oracle(n: int, h: int) -> int:
    """dim E0^h by brute-force Lefschetz ranks, independent of build_spaces."""
    if not 0 <= h <= 2 * n + 1:
        return 0
    if h <= n:
        hmasks = lambda_masks(n, h, horizontal_only=True)
        lp = _lefschetz_power_matrix(n, h, n - h + 1)
        r = linalg.rank(lp) if lp and lp[0] else 0
        return len(hmasks) - r
    hmasks = lambda_masks(n, h - 1, horizontal_only=True)
    l_once = _lefschetz_power_matrix(n, h - 1, 1)
    r = linalg.rank(l_once) if l_once and l_once[0] else 0
    return len(hmasks) - r


def subspaces_equal(a: Subspace, b: Subspace) -> bool:
    masks = lambda_masks(a.n, a.degree)
    va = [covector_coords(c, masks) for c in a.basis]
    vb = [covector_coords(c, masks) for c in b.basis]
    return linalg.same_span(va, vb)

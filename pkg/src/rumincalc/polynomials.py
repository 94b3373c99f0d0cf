"""Sparse multivariate polynomials with exact rational coefficients.

Representation: a polynomial in ``nvars`` variables is a dict mapping exponent
tuples (length ``nvars``, non-negative ints) to nonzero ``Fraction``
coefficients. The zero polynomial is the empty dict. All operations are exact;
no floating point enters until a caller explicitly evaluates.

Instances are treated as immutable: every operation returns a new ``Poly``.

Example:
    >>> x, y = Poly.var(2, 0), Poly.var(2, 1)
    >>> p = (x + y) * (x - y)
    >>> p == x * x - y * y
    True
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Mapping, Sequence


def _as_fraction(c) -> Fraction:
    if isinstance(c, Fraction):
        return c
    if isinstance(c, int):
        return Fraction(c)
    raise TypeError(f"expected int or Fraction coefficient, got {type(c).__name__}")


class Poly:
    __slots__ = ("nvars", "terms")

    def __init__(self, nvars: int, terms: Mapping[tuple, object] | None = None):
        self.nvars = nvars
        clean = {}
        if terms:
            for exp, c in terms.items():
                c = _as_fraction(c)
                if c == 0:
                    continue
                if len(exp) != nvars or any(e < 0 for e in exp):
                    raise ValueError(f"bad exponent tuple {exp} for {nvars} variables")
                clean[tuple(exp)] = c
        self.terms = clean

    # -- constructors ------------------------------------------------------

    @classmethod
    def zero(cls, nvars: int) -> "Poly":
        return cls(nvars)

    @classmethod
    def const(cls, nvars: int, c) -> "Poly":
        return cls(nvars, {(0,) * nvars: _as_fraction(c)})

    @classmethod
    def var(cls, nvars: int, i: int) -> "Poly":
        if not 0 <= i < nvars:
            raise ValueError(f"variable index {i} out of range")
        exp = tuple(1 if j == i else 0 for j in range(nvars))
        return cls(nvars, {exp: Fraction(1)})

    @classmethod
    def monomial(cls, nvars: int, exp: Sequence[int], c=1) -> "Poly":
        return cls(nvars, {tuple(exp): _as_fraction(c)})

    # -- ring operations ---------------------------------------------------

    def _check_ring(self, other: "Poly") -> None:
        if self.nvars != other.nvars:
            raise ValueError("polynomials live in different rings")

    def __add__(self, other):
        if isinstance(other, (int, Fraction)):
            other = Poly.const(self.nvars, other)
        self._check_ring(other)
        terms = dict(self.terms)
        for exp, c in other.terms.items():
            s = terms.get(exp, Fraction(0)) + c
            if s == 0:
                terms.pop(exp, None)
            else:
                terms[exp] = s
        out = Poly.__new__(Poly)
        out.nvars, out.terms = self.nvars, terms
        return out

    __radd__ = __add__

    def __neg__(self):
        out = Poly.__new__(Poly)
        out.nvars = self.nvars
        out.terms = {e: -c for e, c in self.terms.items()}
        return out

    def __sub__(self, other):
        if isinstance(other, (int, Fraction)):
            other = Poly.const(self.nvars, other)
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            c = _as_fraction(other)
            if c == 0:
                return Poly.zero(self.nvars)
            out = Poly.__new__(Poly)
            out.nvars = self.nvars
            out.terms = {e: c * v for e, v in self.terms.items()}
            return out
        self._check_ring(other)
        terms: dict = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                s = terms.get(e, Fraction(0)) + c1 * c2
                if s == 0:
                    terms.pop(e, None)
                else:
                    terms[e] = s
        out = Poly.__new__(Poly)
        out.nvars, out.terms = self.nvars, terms
        return out

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if k < 0:
            raise ValueError("negative power")
        result = Poly.const(self.nvars, 1)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = Poly.const(self.nvars, other)
        return isinstance(other, Poly) and self.nvars == other.nvars and self.terms == other.terms

    def __bool__(self):
        return bool(self.terms)

    def __hash__(self):
        return hash((self.nvars, frozenset(self.terms.items())))

    def __repr__(self):
        if not self.terms:
            return "0"
        bits = []
        for exp, c in sorted(self.terms.items()):
            mono = "*".join(f"v{i}^{e}" if e > 1 else f"v{i}" for i, e in enumerate(exp) if e)
            bits.append(f"{c}" + (f"*{mono}" if mono else ""))
        return " + ".join(bits)

    def scale(self, c) -> "Poly":
        return self * _as_fraction(c)

    # -- calculus and structure --------------------------------------------

    def partial(self, i: int) -> "Poly":
        """Partial derivative with respect to variable ``i``."""
        terms = {}
        for exp, c in self.terms.items():
            if exp[i] == 0:
                continue
            e = list(exp)
            k = e[i]
            e[i] = k - 1
            terms[tuple(e)] = terms.get(tuple(e), Fraction(0)) + c * k
        return Poly(self.nvars, terms)

    def degree(self) -> int | None:
        """Total degree, or None for the zero polynomial."""
        if not self.terms:
            return None
        return max(sum(e) for e in self.terms)

    def weighted_degrees(self, weights: Sequence[int]) -> set:
        """Set of weighted degrees present (dot of exponent with weights)."""
        return {sum(a * w for a, w in zip(e, weights)) for e in self.terms}

    def weighted_degree(self, weights: Sequence[int]) -> int | None:
        degs = self.weighted_degrees(weights)
        return max(degs) if degs else None

    def coefficient(self, exp: Sequence[int]) -> Fraction:
        return self.terms.get(tuple(exp), Fraction(0))

    def compose(self, images: Sequence["Poly"]) -> "Poly":
        """Substitute images[i] for variable i. Images share one target ring."""
        if len(images) != self.nvars:
            raise ValueError("need one image per variable")
        nv_out = images[0].nvars
        # Cache powers of each image as they come up; degrees stay small here.
        pow_cache: dict = {}

        def power(i: int, k: int) -> Poly:
            key = (i, k)
            if key not in pow_cache:
                pow_cache[key] = images[i] ** k
            return pow_cache[key]

        total = Poly.zero(nv_out)
        for exp, c in self.terms.items():
            term = Poly.const(nv_out, c)
            for i, e in enumerate(exp):
                if e:
                    term = term * power(i, e)
            total = total + term
        return total

    def eliminate_unit_integral(self, i: int) -> "Poly":
        """Integrate variable ``i`` over [0, 1] (the variable disappears)."""
        terms: dict = {}
        for exp, c in self.terms.items():
            e = list(exp)
            d = e[i]
            e[i] = 0
            key = tuple(e)
            terms[key] = terms.get(key, Fraction(0)) + c / (d + 1)
        return Poly(self.nvars, terms)

    def evaluate_exact(self, values: Sequence) -> Fraction:
        total = Fraction(0)
        for exp, c in self.terms.items():
            v = c
            for i, e in enumerate(exp):
                for _ in range(e):
                    v = v * values[i]
            total += v
        return total

    def evaluate_float(self, values: Sequence):
        """Evaluate with float coefficients; values may be numpy arrays."""
        total = 0.0
        for exp, c in self.terms.items():
            v = float(c)
            for i, e in enumerate(exp):
                if e:
                    v = v * values[i] ** e
            total = total + v
        return total


def symmetric_box_integral(p: Poly) -> Fraction:
    """Exact integral of ``p`` over the box [-1, 1]^nvars.

    Odd monomials vanish; an even power k contributes 2/(k+1) per axis.
    """
    total = Fraction(0)
    for exp, c in p.terms.items():
        if any(e % 2 for e in exp):
            continue
        v = c
        for e in exp:
            v = v * Fraction(2, e + 1)
        total += v
    return total

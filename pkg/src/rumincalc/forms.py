"""Differential forms with exact polynomial coefficients, in two coframes.

A form is a dict from coframe bitmasks (as in ``exterior_weights``) to Poly
coefficients in the 2n+1 coordinates (x_1..x_n, y_1..y_n, t). Two frames are
supported:

* ``"left"``  - the left-invariant coframe omega_1..omega_2n, theta; the
  exterior differential uses the frame fields X_i, Y_i, T on coefficients and
  the structure equations on the coframe, and splits by weight into
  d = d0 + d1 + d2.
* ``"coord"`` - the coordinate coframe dx_i, dy_i, dt, where every basis
  covector is closed and d only differentiates coefficients. This is the
  frame the cone homotopy integrates in.

Conversion between the frames substitutes
theta = dt - 1/2 sum_j (x_j dy_j - y_j dx_j) and back.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Mapping

from .envelope import derive
from .exterior_weights import Covector, _merge_sign, algebraic_d
from .polynomials import Poly

FRAMES = ("left", "coord")


class Form:
    __slots__ = ("n", "frame", "coeffs")

    def __init__(self, n: int, frame: str = "left", coeffs: Mapping[int, Poly] | None = None):
        if frame not in FRAMES:
            raise ValueError(f"unknown frame {frame!r}")
        self.n = n
        self.frame = frame
        nv = 2 * n + 1
        clean = {}
        if coeffs:
            limit = 1 << nv
            for mask, p in coeffs.items():
                if not 0 <= mask < limit:
                    raise ValueError(f"mask {mask} out of range")
                if p.nvars != nv:
                    raise ValueError("coefficient has wrong variable count")
                if p.terms:
                    clean[mask] = p
        self.coeffs = clean

    # -- constructors ---------------------------------------------------

    @classmethod
    def zero(cls, n: int, frame: str = "left") -> "Form":
        return cls(n, frame)

    @classmethod
    def from_function(cls, n: int, p: Poly, frame: str = "left") -> "Form":
        return cls(n, frame, {0: p})

    @classmethod
    def monomial(cls, n: int, mask: int, p: Poly, frame: str = "left") -> "Form":
        return cls(n, frame, {mask: p})

    @classmethod
    def from_covector(cls, c: Covector, frame: str = "left") -> "Form":
        nv = 2 * c.n + 1
        return cls(c.n, frame, {m: Poly.const(nv, v) for m, v in c.terms.items()})

    # -- arithmetic -----------------------------------------------------

    def _check(self, other: "Form"):
        if self.n != other.n:
            raise ValueError("forms on different groups")
        if self.frame != other.frame:
            raise ValueError("forms in different frames")

    def __add__(self, other: "Form") -> "Form":
        self._check(other)
        coeffs = dict(self.coeffs)
        for m, p in other.coeffs.items():
            s = coeffs.get(m)
            s = p if s is None else s + p
            if s.terms:
                coeffs[m] = s
            else:
                coeffs.pop(m, None)
        out = Form.__new__(Form)
        out.n, out.frame, out.coeffs = self.n, self.frame, coeffs
        return out

    def __neg__(self) -> "Form":
        out = Form.__new__(Form)
        out.n, out.frame = self.n, self.frame
        out.coeffs = {m: -p for m, p in self.coeffs.items()}
        return out

    def __sub__(self, other: "Form") -> "Form":
        return self + (-other)

    def scale(self, c) -> "Form":
        c = Fraction(c)
        if c == 0:
            return Form.zero(self.n, self.frame)
        out = Form.__new__(Form)
        out.n, out.frame = self.n, self.frame
        out.coeffs = {m: p.scale(c) for m, p in self.coeffs.items()}
        return out

    def mul_poly(self, p: Poly) -> "Form":
        return Form(self.n, self.frame, {m: q * p for m, q in self.coeffs.items()})

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Form)
            and self.n == other.n
            and self.frame == other.frame
            and self.coeffs == other.coeffs
        )

    def __bool__(self) -> bool:
        return bool(self.coeffs)

    def __repr__(self) -> str:
        if not self.coeffs:
            return "0"
        if self.frame == "left":
            names = [f"w{i+1}" for i in range(2 * self.n)] + ["theta"]
        else:
            names = (
                [f"dx{i+1}" for i in range(self.n)]
                + [f"dy{i+1}" for i in range(self.n)]
                + ["dt"]
            )
        bits = []
        for mask in sorted(self.coeffs):
            factors = "^".join(names[i] for i in range(2 * self.n + 1) if mask >> i & 1)
            bits.append(f"[{self.coeffs[mask]}]{factors}" if factors else f"[{self.coeffs[mask]}]")
        return " + ".join(bits)

    # -- structure queries ----------------------------------------------

    def degrees(self) -> set:
        return {m.bit_count() for m in self.coeffs}

    def degree(self) -> int:
        degs = self.degrees()
        if len(degs) > 1:
            raise ValueError("form is not of pure degree")
        return degs.pop() if degs else 0

    def is_horizontal(self) -> bool:
        theta_bit = 1 << (2 * self.n)
        return all(not m & theta_bit for m in self.coeffs)

    def weight_of_mask(self, mask: int) -> int:
        theta_bit = 1 << (2 * self.n)
        return (mask & ~theta_bit).bit_count() + (2 if mask & theta_bit else 0)

    def pure_weight_part(self, w: int) -> "Form":
        return Form(
            self.n, self.frame,
            {m: p for m, p in self.coeffs.items() if self.weight_of_mask(m) == w},
        )

    def coefficient(self, mask: int) -> Poly:
        return self.coeffs.get(mask, Poly.zero(2 * self.n + 1))

    def evaluate(self, coords) -> Covector:
        """Exact evaluation at a point given as a sequence of 2n+1 Fractions."""
        terms = {m: p.evaluate_exact(coords) for m, p in self.coeffs.items()}
        return Covector(self.n, terms)

    def norm2_poly(self) -> Poly:
        """Pointwise squared norm as a Poly; frame monomials are orthonormal."""
        nv = 2 * self.n + 1
        out = Poly.zero(nv)
        for p in self.coeffs.values():
            out = out + p * p
        return out


def wedge_forms(a: Form, b: Form) -> Form:
    a._check(b)
    coeffs: dict = {}
    for m1, p1 in a.coeffs.items():
        for m2, p2 in b.coeffs.items():
            if m1 & m2:
                continue
            m = m1 | m2
            term = (p1 * p2).scale(_merge_sign(m1, m2))
            s = coeffs.get(m)
            s = term if s is None else s + term
            if s.terms:
                coeffs[m] = s
            else:
                coeffs.pop(m, None)
    return Form(a.n, a.frame, coeffs)


# -- exterior differential --------------------------------------------------


def exterior_d(form: Form) -> Form:
    """d in the form's own frame.

    Left frame: df = sum_i (W_i f) omega_i + (Tf) theta on coefficients plus
    the structure-equation d on each coframe monomial. Coordinate frame: the
    coframe is closed, only coefficients differentiate.
    """
    n = form.n
    nv = 2 * n + 1
    out = Form.zero(n, form.frame)
    for mask, p in form.coeffs.items():
        if form.frame == "left":
            for i in range(nv):
                dp = derive(n, i, p)
                if dp.terms:
                    out = out + wedge_forms(
                        Form.monomial(n, 1 << i, dp, form.frame),
                        Form.monomial(n, mask, Poly.const(nv, 1), form.frame),
                    )
            dS = algebraic_d(Covector.basis(n, mask))
            if dS:
                out = out + Form.from_covector(dS, form.frame).mul_poly(p)
        else:
            for i in range(nv):
                dp = p.partial(i)
                if dp.terms:
                    out = out + wedge_forms(
                        Form.monomial(n, 1 << i, dp, form.frame),
                        Form.monomial(n, mask, Poly.const(nv, 1), form.frame),
                    )
    return out


def split_d(form: Form):
    """(d0, d1, d2): the weight 0, +1, +2 pieces of d in the left frame.

    d0 is algebraic (structure equations only), d1 differentiates along the
    horizontal frame, d2 along T with a theta.
    """
    if form.frame != "left":
        raise ValueError("weight splitting needs the left-invariant frame")
    n = form.n
    nv = 2 * n + 1
    d0 = Form.zero(n)
    d1 = Form.zero(n)
    d2 = Form.zero(n)
    one = Poly.const(nv, 1)
    for mask, p in form.coeffs.items():
        dS = algebraic_d(Covector.basis(n, mask))
        if dS:
            d0 = d0 + Form.from_covector(dS).mul_poly(p)
        for i in range(2 * n):
            dp = derive(n, i, p)
            if dp.terms:
                d1 = d1 + wedge_forms(
                    Form.monomial(n, 1 << i, dp), Form.monomial(n, mask, one)
                )
        dp = derive(n, 2 * n, p)
        if dp.terms:
            d2 = d2 + wedge_forms(
                Form.monomial(n, 1 << (2 * n), dp), Form.monomial(n, mask, one)
            )
    return d0, d1, d2


def d0_form(form: Form) -> Form:
    return split_d(form)[0]


# -- frame conversion --------------------------------------------------------


def _one_form_images(n: int, direction: str) -> list:
    """Images of the 2n+1 basis one-forms under the frame change."""
    nv = 2 * n + 1
    one = Poly.const(nv, 1)
    half = Fraction(1, 2)
    images = []
    for i in range(2 * n):
        target = "coord" if direction == "left_to_coord" else "left"
        images.append(Form.monomial(n, 1 << i, one, target))
    if direction == "left_to_coord":
        # theta = dt - 1/2 sum (x_j dy_j - y_j dx_j)
        coeffs = {1 << (2 * n): one}
        for j in range(n):
            coeffs[1 << (n + j)] = Poly.var(nv, j).scale(-half)
            coeffs[1 << j] = Poly.var(nv, n + j).scale(half)
        images.append(Form(n, "coord", coeffs))
    else:
        # dt = theta + 1/2 sum (x_j dy_j - y_j dx_j)
        coeffs = {1 << (2 * n): one}
        for j in range(n):
            coeffs[1 << (n + j)] = Poly.var(nv, j).scale(half)
            coeffs[1 << j] = Poly.var(nv, n + j).scale(-half)
        images.append(Form(n, "left", coeffs))
    return images


def _convert(form: Form, direction: str, target: str) -> Form:
    n = form.n
    nv = 2 * n + 1
    images = _one_form_images(n, direction)
    out = Form.zero(n, target)
    unit = Poly.const(nv, 1)
    for mask, p in form.coeffs.items():
        prod = Form.from_function(n, unit, target)
        for i in range(nv):
            if mask >> i & 1:
                prod = wedge_forms(prod, images[i])
        out = out + prod.mul_poly(p)
    return out


def to_coordinate_frame(form: Form) -> Form:
    if form.frame == "coord":
        return form
    return _convert(form, "left_to_coord", "coord")


def to_left_frame(form: Form) -> Form:
    if form.frame == "left":
        return form
    return _convert(form, "coord_to_left", "left")


# -- pullback under translation + dilation -----------------------------------


def translation_dilation_images(n: int, base, r) -> list:
    """Coordinate polynomials of q -> base * delta_r(q) as Polys in q."""
    nv = 2 * n + 1
    r = Fraction(r)
    half = Fraction(1, 2)
    images = []
    for i in range(n):
        images.append(Poly.var(nv, i).scale(r) + Poly.const(nv, base.x[i]))
    for i in range(n):
        images.append(Poly.var(nv, n + i).scale(r) + Poly.const(nv, base.y[i]))
    t_img = Poly.var(nv, 2 * n).scale(r * r) + Poly.const(nv, base.t)
    for j in range(n):
        t_img = t_img + Poly.var(nv, n + j).scale(half * r * Fraction(base.x[j]))
        t_img = t_img - Poly.var(nv, j).scale(half * r * Fraction(base.y[j]))
    images.append(t_img)
    return images


def pullback_translation_dilation(form: Form, base, r) -> Form:
    """Pullback along q -> base * delta_r(q), in the left-invariant frame.

    Left translations preserve the left-invariant coframe and the dilation
    scales it by its weight, so the coframe monomial just picks up r^weight
    while the coefficient is composed with the map.
    """
    if form.frame != "left":
        raise ValueError("pullback is implemented in the left-invariant frame")
    n = form.n
    r = Fraction(r)
    images = translation_dilation_images(n, base, r)
    coeffs = {}
    for mask, p in form.coeffs.items():
        factor = r ** form.weight_of_mask(mask)
        q = p.compose(images).scale(factor)
        if q.terms:
            coeffs[mask] = q
    return Form(n, "left", coeffs)


# -- linear maps given by exact matrices in a graded basis --------------------


def apply_mask_matrix(matrix: list, src_masks: list, dst_masks: list, form: Form) -> Form:
    """Apply a Fraction matrix (dst x src over coframe masks) coefficientwise."""
    n = form.n
    nv = 2 * n + 1
    src = [form.coeffs.get(m, Poly.zero(nv)) for m in src_masks]
    extra = set(form.coeffs) - set(src_masks)
    if extra:
        raise ValueError("form has components outside the source basis")
    coeffs = {}
    for i, dm in enumerate(dst_masks):
        acc = Poly.zero(nv)
        for j, p in enumerate(src):
            c = matrix[i][j]
            if c != 0 and p.terms:
                acc = acc + p.scale(c)
        if acc.terms:
            coeffs[dm] = acc
    return Form(n, form.frame, coeffs)

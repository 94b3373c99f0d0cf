"""Exact cone homotopies and the intrinsic primitive operator on H^n.

The Euclidean ingredient is the cone homotopy centered at a point y,

    K_y omega(x) = int_0^1 s^{k-1} iota_{x-y} omega(y + s(x-y)) ds,

evaluated exactly on polynomial k-forms in the coordinate coframe; averaging
over y against a normalized weight psi keeps everything rational because only
monomial moments of psi enter. The intrinsic primitive operator is the
composite K = P_E0 . P_E . K_Euc . P_E, which satisfies omega = d_c K omega
exactly on d_c-closed sections of E0 in positive degree.

The Poincare quotient and its dilation scaling probe live here too: the
primitive is exact, only the L^p/L^q ball norms are quadrature.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from fractions import Fraction

from . import grid as gridmod
from .forms import (
    Form,
    exterior_d,
    pullback_translation_dilation,
    to_coordinate_frame,
    to_left_frame,
)
from .group_geometry import Ball, Point, euclidean_inradius, homogeneous_dimension, identity
from .polynomials import Poly
from .rumin_complex import RuminContext


@dataclass(frozen=True)
class AveragingWeight:
    """A normalized averaging measure for the cone-center y.

    Either the point mass at the origin, or the polynomial bump
    c (1 - |y|^2/r0^2)^m on the Euclidean ball of radius r0, normalized to
    total mass 1. Only monomial moments are ever needed and they are exact
    rationals; odd moments vanish by symmetry.
    """

    kind: str  # "point_mass_at_origin" | "polynomial_bump"
    exponent: int = 3
    radius: Fraction = Fraction(1, 2)
    mass: Fraction = Fraction(1)

    def __post_init__(self):
        if self.kind not in ("point_mass_at_origin", "polynomial_bump"):
            raise ValueError(f"unknown weight kind {self.kind!r}")
        if self.kind == "polynomial_bump" and (self.exponent < 0 or self.radius <= 0):
            raise ValueError("bump needs exponent >= 0 and positive radius")

    @classmethod
    def point_mass(cls) -> "AveragingWeight":
        return cls(kind="point_mass_at_origin")

    @classmethod
    def bump(cls, radius, exponent: int = 3) -> "AveragingWeight":
        return cls(kind="polynomial_bump", exponent=exponent, radius=Fraction(radius))

    def moment(self, beta: tuple, dimension: int) -> Fraction:
        """int y^beta psi(y) dy over R^dimension, exactly."""
        if self.kind == "point_mass_at_origin":
            return Fraction(1) if not any(beta) else Fraction(0)
        if any(b % 2 for b in beta):
            return Fraction(0)
        gammas = [b // 2 for b in beta]
        total = sum(gammas)
        num = Fraction(1)
        for g in gammas:
            for j in range(g):
                num *= Fraction(2 * j + 1, 2)
        den = Fraction(1)
        base = Fraction(dimension, 2) + self.exponent + 1
        for j in range(total):
            den *= base + j
        return self.radius ** (2 * total) * num / den


@dataclass(frozen=True)
class ConvexDomain:
    """A gauge or Euclidean ball used as the averaging domain."""

    kind: str  # "koranyi_ball" | "euclidean_ball"
    center: Point
    radius: Fraction

    def __post_init__(self):
        if self.kind not in ("koranyi_ball", "euclidean_ball"):
            raise ValueError(f"unknown domain kind {self.kind!r}")
        if self.radius <= 0:
            raise ValueError("radius must be positive")

    def euclidean_inradius(self) -> Fraction:
        if self.kind == "euclidean_ball":
            return self.radius
        return min(self.radius, self.radius * self.radius)

    def default_weight(self, exponent: int = 3) -> AveragingWeight:
        return AveragingWeight.bump(self.euclidean_inradius() / 2, exponent)


# -- Euclidean cone homotopy ---------------------------------------------------


def _cone_homotopy_doubled(omega: Form) -> dict:
    """K_y omega over the doubled ring Q[x, y], mask -> Poly(2 nv).

    x occupies variables 0..nv-1, the cone center y occupies nv..2nv-1; the
    cone parameter is integrated out exactly.
    """
    n = omega.n
    nv = 2 * n + 1
    big = 2 * nv + 1  # x block, y block, cone parameter s
    s_index = 2 * nv
    s = Poly.var(big, s_index)
    sub_images = [
        Poly.var(big, nv + i) + s * (Poly.var(big, i) - Poly.var(big, nv + i))
        for i in range(nv)
    ]
    segment = [Poly.var(big, i) - Poly.var(big, nv + i) for i in range(nv)]

    out: dict = {}
    for mask, p in omega.coeffs.items():
        k = mask.bit_count()
        p_sub = p.compose(sub_images)
        weighted = p_sub * s ** (k - 1)
        indices = [i for i in range(nv) if mask >> i & 1]
        for pos, idx in enumerate(indices):
            sign = -1 if pos % 2 else 1
            integrand = (weighted * segment[idx]).scale(sign)
            integrated = integrand.eliminate_unit_integral(s_index)
            reduced = Poly(2 * nv, {exp[:-1]: c for exp, c in integrated.terms.items()})
            rest = mask & ~(1 << idx)
            acc = out.get(rest)
            acc = reduced if acc is None else acc + reduced
            if acc.terms:
                out[rest] = acc
            else:
                out.pop(rest, None)
    return out


def _collapse_y(n: int, doubled: dict, y_images: list) -> Form:
    nv = 2 * n + 1
    images = [Poly.var(nv, i) for i in range(nv)] + y_images
    coeffs = {}
    for mask, p in doubled.items():
        q = p.compose(images)
        if q.terms:
            coeffs[mask] = q
    return Form(n, "coord", coeffs)


def cartan_homotopy(y, omega: Form, k: int | None = None) -> Form:
    """The cone homotopy centered at the concrete point y, exactly.

    omega must be a coordinate-frame polynomial form of pure degree k >= 1;
    y is a sequence of 2n+1 rationals.
    """
    if omega.frame != "coord":
        raise ValueError("cartan_homotopy works in the coordinate coframe")
    degree = omega.degree()
    if k is None:
        k = degree
    if k == 0:
        raise ValueError("the cone homotopy needs degree >= 1")
    if omega and degree != k:
        raise ValueError(f"form has degree {degree}, not {k}")
    n = omega.n
    nv = 2 * n + 1
    y = [Fraction(v) for v in y]
    if len(y) != nv:
        raise ValueError("y needs 2n+1 coordinates")
    doubled = _cone_homotopy_doubled(omega)
    return _collapse_y(n, doubled, [Poly.const(nv, v) for v in y])


def averaged_homotopy(weight: AveragingWeight, omega: Form, k: int | None = None) -> Form:
    """K_Euc omega: the cone homotopy averaged over y against the weight."""
    if weight.mass != 1:
        raise ValueError("averaging weight must have total mass 1")
    if omega.frame != "coord":
        raise ValueError("averaged_homotopy works in the coordinate coframe")
    degree = omega.degree()
    if k is None:
        k = degree
    if k == 0:
        raise ValueError("the cone homotopy needs degree >= 1")
    if omega and degree != k:
        raise ValueError(f"form has degree {degree}, not {k}")
    n = omega.n
    nv = 2 * n + 1
    doubled = _cone_homotopy_doubled(omega)
    coeffs = {}
    for mask, p in doubled.items():
        terms: dict = {}
        for exp, c in p.terms.items():
            alpha, beta = exp[:nv], exp[nv:]
            m = weight.moment(beta, nv)
            if m != 0:
                terms[alpha] = terms.get(alpha, Fraction(0)) + c * m
        q = Poly(nv, terms)
        if q.terms:
            coeffs[mask] = q
    return Form(n, "coord", coeffs)


def euclidean_homotopy_residual(weight: AveragingWeight, omega: Form) -> Form:
    """omega - d K omega - K d omega, which must vanish for degree >= 1."""
    if not omega:
        return omega
    k = omega.degree()
    out = omega - exterior_d(averaged_homotopy(weight, omega, k))
    d_omega = exterior_d(omega)
    if d_omega:
        out = out - averaged_homotopy(weight, d_omega, k + 1)
    return out


# -- intrinsic primitive -------------------------------------------------------


def rumin_homotopy_K(ctx: RuminContext, weight: AveragingWeight, omega: Form) -> Form:
    """K omega = P_E0 P_E K_Euc P_E omega, exactly, for omega in E0^h, h >= 1.

    When d_c omega = 0 this is an intrinsic primitive: omega = d_c K omega.
    """
    if omega.frame != "left":
        raise ValueError("rumin_homotopy_K expects the left-invariant frame")
    if not omega:
        return Form.zero(ctx.n)
    h = omega.degree()
    if h == 0:
        raise ValueError("degree 0 has no primitive")
    if ctx.project_core(omega) != omega:
        raise ValueError("input is not a section of E0")
    embedded = ctx.project_rumin(omega)
    euc = averaged_homotopy(weight, to_coordinate_frame(embedded), h)
    back = to_left_frame(euc)
    return ctx.project_core(ctx.project_rumin(back))


def rumin_primitive_residual(ctx: RuminContext, weight: AveragingWeight, omega: Form) -> Form:
    return omega - ctx.rumin_d(rumin_homotopy_K(ctx, weight, omega))


# -- Poincare quotient and its scaling -----------------------------------------


def _admissible_gap(n: int, h: int) -> Fraction:
    Q = homogeneous_dimension(n)
    return Fraction(2 if h == n + 1 else 1, Q)


def poincare_quotient(
    ctx: RuminContext,
    omega: Form,
    ball: Ball,
    ball_prime: Ball,
    p: float,
    q: float,
    weight: AveragingWeight | None = None,
    resolution: int = 32,
) -> dict:
    """ratio = ||K omega||_{L^q(B)} / ||omega||_{L^p(B')} for closed omega.

    The primitive K omega is exact; the two ball norms are midpoint
    quadrature over a dilation-adapted grid. Exponents beyond the admissible
    gap (1/p - 1/q larger than 1/Q, or 2/Q across the middle) only warn.
    """
    if weight is None:
        weight = AveragingWeight.point_mass()
    if ball.center != ball_prime.center:
        raise ValueError("balls must be concentric")
    if not ball_prime.radius > ball.radius:
        raise ValueError("the outer ball must be strictly larger (lambda > 1)")
    residual = ctx.rumin_d(omega)
    if residual:
        raise ValueError("input form is not d_c-closed")
    n = ctx.n
    h = omega.degree() if omega else 0
    gap = _admissible_gap(n, h)
    admissible = Fraction(1) / Fraction(p).limit_denominator(10**6) - Fraction(1) / Fraction(
        q
    ).limit_denominator(10**6) <= gap
    if not admissible:
        warnings.warn("exponent pair exceeds the admissible gap; reporting anyway")
    report = {
        "n": n,
        "h": h,
        "p": p,
        "q": q,
        "radius": float(ball.radius),
        "lam": float(ball_prime.radius) / float(ball.radius),
        "admissible": bool(admissible),
        "resolution": resolution,
        "weight": weight.kind,
    }
    if not omega:
        report.update({"ratio": 0.0, "numerator": 0.0, "denominator": 0.0})
        return report
    primitive = rumin_homotopy_K(ctx, weight, omega)
    R = float(ball_prime.radius)
    num = gridmod.form_lp_norm(
        primitive, q, R, resolution,
        mask_fn=lambda g: gridmod.gauge_mask(g, ball.center, float(ball.radius)),
    )
    den = gridmod.form_lp_norm(
        omega, p, R, resolution,
        mask_fn=lambda g: gridmod.gauge_mask(g, ball_prime.center, R),
    )
    report.update({
        "ratio": num / den if den else math.inf,
        "numerator": num,
        "denominator": den,
    })
    return report


def scaling_probe(
    ctx: RuminContext,
    omega: Form,
    p: float,
    q: float,
    radii=(Fraction(1), Fraction(2)),
    lam: Fraction = Fraction(2),
    weight: AveragingWeight | None = None,
    resolution: int = 32,
) -> dict:
    """Dilate closed data across two radii and fit the quotient's power law.

    The r-family is omega_r = pullback of omega under delta_{1/r}, measured
    on balls scaled by r; the grids are dilation-adapted so the quadrature
    errors cancel in the exponent fit. Expected slope:
    Q/q - Q/p + 1, or + 2 when h = n + 1.
    """
    if weight is None:
        weight = AveragingWeight.point_mass()
    n = ctx.n
    h = omega.degree()
    Q = homogeneous_dimension(n)
    e = identity(n)
    rows = []
    for r in radii:
        r = Fraction(r)
        omega_r = pullback_translation_dilation(omega, e, Fraction(1) / r)
        rows.append(
            poincare_quotient(
                ctx, omega_r,
                Ball(e, r), Ball(e, r * lam),
                p, q, weight=weight, resolution=resolution,
            )
        )
    expected = Q / q - Q / p + (2 if h == n + 1 else 1)
    r1, r2 = float(radii[0]), float(radii[-1])
    ratio1, ratio2 = rows[0]["ratio"], rows[-1]["ratio"]
    slope = math.log(ratio2 / ratio1) / math.log(r2 / r1)
    return {
        "n": n,
        "h": h,
        "p": p,
        "q": q,
        "expected_exponent": expected,
        "fitted_exponent": slope,
        "relative_error": abs(slope - expected) / abs(expected) if expected else abs(slope),
        "rows": rows,
    }

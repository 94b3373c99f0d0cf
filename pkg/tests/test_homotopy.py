import random
import warnings
from fractions import Fraction

import pytest

from conftest import random_core_form, random_form
from rumincalc.forms import Form, exterior_d, to_coordinate_frame, to_left_frame
from rumincalc.group_geometry import Ball, from_coords, identity
from rumincalc.homotopy_exact import (
    AveragingWeight,
    ConvexDomain,
    averaged_homotopy,
    cartan_homotopy,
    euclidean_homotopy_residual,
    poincare_quotient,
    rumin_homotopy_K,
    rumin_primitive_residual,
    scaling_probe,
)
from rumincalc.polynomials import Poly


POINT = AveragingWeight.point_mass()
BUMP = AveragingWeight.bump(Fraction(1, 2))


def test_cone_homotopy_primitive_of_dx():
    # K(dx_1) centered at the origin is x_1 itself
    n = 1
    dx = Form.monomial(n, 1 << 0, Poly.const(3, 1), frame="coord")
    out = cartan_homotopy([Fraction(0)] * 3, dx)
    assert out == Form.from_function(n, Poly.var(3, 0), frame="coord")
    # centered elsewhere it is x_1 - y_1
    out_y = cartan_homotopy([Fraction(2), Fraction(0), Fraction(0)], dx)
    assert out_y == Form.from_function(
        n, Poly.var(3, 0) - Poly.const(3, 2), frame="coord"
    )


def test_point_mass_equals_cartan_at_origin():
    rng = random.Random(0)
    n = 2
    for k in (1, 2, 3):
        omega = random_form(rng, n, k, 3, frame="coord")
        assert averaged_homotopy(POINT, omega) == cartan_homotopy(
            [Fraction(0)] * 5, omega
        )


def test_homotopy_drops_the_degree():
    rng = random.Random(1)
    n = 2
    for k in (1, 2, 3):
        omega = random_form(rng, n, k, 2, frame="coord")
        for w in (POINT, BUMP):
            out = averaged_homotopy(w, omega, k)
            if out:
                assert out.degree() == k - 1


def test_euclidean_residual_vanishes_exactly():
    rng = random.Random(2)
    for n in (1, 2):
        for k in (1, 2, 3):
            if k > 2 * n + 1:
                continue
            for w in (POINT, BUMP):
                for _ in range(5):
                    omega = random_form(rng, n, k, 4, frame="coord")
                    assert not euclidean_homotopy_residual(w, omega)


def test_degree_zero_identity_reconstruction():
    # for functions, f = K(df) + f(averaging point); with the point mass at 0
    n = 1
    f = Poly.var(3, 0) * Poly.var(3, 1) + Poly.var(3, 2) ** 2
    df = exterior_d(Form.from_function(n, f, frame="coord"))
    kf = averaged_homotopy(POINT, df)
    assert kf == Form.from_function(n, f, frame="coord")  # f(0) = 0 here


def test_moment_examples():
    # total mass is 1 for every weight
    assert POINT.moment((0, 0, 0), 3) == 1
    assert BUMP.moment((0, 0, 0), 3) == 1
    # odd moments vanish
    assert BUMP.moment((1, 0, 0), 3) == 0
    assert BUMP.moment((1, 2, 0), 3) == 0
    # hand-checked even moments
    w1 = AveragingWeight.bump(Fraction(1), exponent=1)
    assert w1.moment((2,), 1) == Fraction(1, 5)
    w3 = AveragingWeight.bump(Fraction(1, 2), exponent=3)
    assert w3.moment((2, 0, 0), 3) == Fraction(1, 44)
    # point mass has no spread at all
    assert POINT.moment((2, 0, 0), 3) == 0


def test_weight_constructors_validate():
    with pytest.raises(ValueError):
        AveragingWeight.bump(Fraction(0))
    with pytest.raises(ValueError):
        AveragingWeight.bump(Fraction(1), exponent=-1)
    scaled = AveragingWeight(
        kind="polynomial_bump", exponent=3, radius=Fraction(1, 2), mass=Fraction(2)
    )
    omega = Form.monomial(1, 1, Poly.const(3, 1), frame="coord")
    with pytest.raises(ValueError, match="total mass 1"):
        averaged_homotopy(scaled, omega)


def test_homotopy_error_contracts():
    n = 1
    f = Form.from_function(n, Poly.var(3, 0), frame="coord")
    with pytest.raises(ValueError, match="degree >= 1"):
        averaged_homotopy(POINT, f)
    left = Form.monomial(n, 1, Poly.const(3, 1))
    with pytest.raises(ValueError, match="coordinate coframe"):
        averaged_homotopy(POINT, left)
    with pytest.raises(ValueError, match="coordinate coframe"):
        cartan_homotopy([0, 0, 0], left)
    mixed = Form.monomial(n, 1, Poly.const(3, 1), frame="coord")
    with pytest.raises(ValueError, match="degree"):
        averaged_homotopy(POINT, mixed, 2)
    with pytest.raises(ValueError, match="2n\\+1 coordinates"):
        cartan_homotopy([0, 0], Form.monomial(n, 1, Poly.const(3, 1), frame="coord"))


def test_convex_domain_default_weight():
    ball = ConvexDomain("koranyi_ball", identity(1), Fraction(2))
    assert ball.euclidean_inradius() == 2  # min(R, R^2) with R = 2
    small = ConvexDomain("koranyi_ball", identity(1), Fraction(1, 2))
    assert small.euclidean_inradius() == Fraction(1, 4)
    w = small.default_weight()
    assert w.kind == "polynomial_bump"
    assert w.radius == Fraction(1, 8)
    with pytest.raises(ValueError):
        ConvexDomain("koranyi_ball", identity(1), Fraction(0))
    with pytest.raises(ValueError):
        ConvexDomain("cube", identity(1), Fraction(1))


def test_rumin_primitive_residual_vanishes(ctx1, ctx2):
    rng = random.Random(3)
    for ctx in (ctx1, ctx2):
        top = 2 * ctx.n + 1
        for h in range(top):
            if ctx.core(h).dim == 0 or ctx.core(h + 1).dim == 0:
                continue
            for w in (POINT, BUMP):
                phi = random_core_form(rng, ctx, h, 2)
                omega = ctx.rumin_d(phi)
                if not omega:
                    continue
                assert not rumin_primitive_residual(ctx, w, omega)


def test_rumin_homotopy_error_contracts(ctx1):
    with pytest.raises(ValueError, match="degree 0"):
        rumin_homotopy_K(ctx1, POINT, Form.from_function(1, Poly.var(3, 0)))
    coord = Form.monomial(1, 1, Poly.const(3, 1), frame="coord")
    with pytest.raises(ValueError, match="left-invariant frame"):
        rumin_homotopy_K(ctx1, POINT, coord)
    theta = Form.monomial(1, 1 << 2, Poly.const(3, 1))
    with pytest.raises(ValueError, match="not a section of E0"):
        rumin_homotopy_K(ctx1, POINT, theta)


def test_poincare_quotient_conventions(ctx1):
    e = identity(1)
    inner, outer = Ball(e, Fraction(1)), Ball(e, Fraction(2))
    zero = Form.zero(1)
    report = poincare_quotient(ctx1, zero, inner, outer, 2.0, 2.0, resolution=8)
    assert report["ratio"] == 0.0
    # non-closed input is rejected
    bad = ctx1.form_from_core(1, [Poly.var(3, 2), Poly.zero(3)])
    assert ctx1.rumin_d(bad)
    with pytest.raises(ValueError, match="not d_c-closed"):
        poincare_quotient(ctx1, bad, inner, outer, 2.0, 2.0, resolution=8)
    # geometric preconditions
    with pytest.raises(ValueError, match="concentric"):
        poincare_quotient(
            ctx1, zero, Ball(from_coords([1, 0, 0]), Fraction(1)), outer, 2.0, 2.0
        )
    with pytest.raises(ValueError, match="strictly larger"):
        poincare_quotient(ctx1, zero, outer, inner, 2.0, 2.0)


def test_poincare_quotient_warns_beyond_gap(ctx1):
    e = identity(1)
    omega = ctx1.rumin_d(Form.from_function(1, Poly.var(3, 0) ** 2))
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        report = poincare_quotient(
            ctx1, omega, Ball(e, Fraction(1)), Ball(e, Fraction(2)),
            1.01, 100.0, resolution=8,
        )
    assert not report["admissible"]
    assert any("admissible gap" in str(w.message) for w in caught)
    assert report["ratio"] > 0


def test_scaling_probe_exact_power_law(ctx1):
    # closed one-form data: slope Q/q - Q/p + 1
    omega = ctx1.rumin_d(Form.from_function(1, Poly.var(3, 0) ** 2))
    probe = scaling_probe(ctx1, omega, 2.0, 2.0, resolution=12)
    assert probe["expected_exponent"] == 1.0
    assert probe["relative_error"] < 1e-12
    # two-form data crosses the middle: slope gains the extra unit
    phi = ctx1.form_from_core(1, [Poly.var(3, 0) ** 2 * Poly.var(3, 1), Poly.zero(3)])
    omega2 = ctx1.rumin_d(phi)
    assert omega2
    probe2 = scaling_probe(ctx1, omega2, 2.0, 2.0, resolution=12)
    assert probe2["expected_exponent"] == 2.0
    assert probe2["relative_error"] < 1e-12
    # mixed exponents shift by Q/q - Q/p
    probe3 = scaling_probe(ctx1, omega, 2.0, 4.0, resolution=12)
    assert probe3["expected_exponent"] == 0.0
    assert abs(probe3["fitted_exponent"]) < 1e-12


def test_primitive_converts_frames_consistently(ctx1):
    rng = random.Random(4)
    phi = random_core_form(rng, ctx1, 1, 2)
    omega = ctx1.rumin_d(phi)
    primitive = rumin_homotopy_K(ctx1, BUMP, omega)
    assert primitive.frame == "left"
    assert ctx1.project_core(primitive) == primitive
    assert to_left_frame(to_coordinate_frame(primitive)) == primitive

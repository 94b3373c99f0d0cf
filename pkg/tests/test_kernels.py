import math

import numpy as np
import pytest

from rumincalc.grid import Grid, euclidean_mask, gauge_mask
from rumincalc.group_geometry import from_coords, homogeneous_dimension, identity, inverse, multiply
from rumincalc.kernels import (
    CutoffKernel,
    HomogeneousKernel,
    bump_grid,
    decay_slope_probe,
    fundamental_gauge_scan,
    gauge_ball_volume,
    group_convolve,
    kernel_split,
    lp_lq_probe,
    scalar_sobolev_check,
    tail_smoothing_probe,
)


def test_gauge_ball_volume_closed_form():
    assert gauge_ball_volume(1) == pytest.approx(math.pi**2 / 2.0, rel=1e-12)
    # scaling t by sqrt(a) divides the volume by sqrt(a)
    assert gauge_ball_volume(1, t_weight=16.0) == pytest.approx(
        math.pi**2 / 8.0, rel=1e-12
    )


@pytest.mark.parametrize("n", [1, 2])
def test_gauge_ball_volume_against_grid_count(n):
    res = 48 if n == 1 else 24
    g = Grid.empty(n, 1.0, res, t_half_width=1.0, t_resolution=res)
    mask = gauge_mask(g, identity(n), 1.0)
    counted = mask.sum() * g.cell_volume
    assert counted == pytest.approx(gauge_ball_volume(n), rel=0.05)


def test_kernel_homogeneity_exact():
    k = HomogeneousKernel(1, 2.0)
    pts = [np.array([0.3]), np.array([-0.4]), np.array([0.1])]
    scaled = [2.0 * pts[0], 2.0 * pts[1], 4.0 * pts[2]]
    assert k.evaluate(scaled) == pytest.approx(
        2.0 ** (k.mu - k.Q) * k.evaluate(pts), rel=1e-14
    )
    assert k.Q == 4


def test_cell_estimate_policies():
    Q = 4
    assert HomogeneousKernel(1, -1.0).cell_estimate(0.1) == "pv"
    assert HomogeneousKernel(1, 0.0).cell_estimate(0.1) == "pv"
    eps = 0.1
    mu = 2.0
    val = HomogeneousKernel(1, mu).cell_estimate(eps)
    assert val == pytest.approx((Q / mu) * eps ** (mu - Q))
    assert HomogeneousKernel(1, 4.0).cell_estimate(0.1) is None
    assert HomogeneousKernel(1, 5.0).cell_estimate(0.1) is None
    # the derivative drops one homogeneity and one cell
    d = HomogeneousKernel(1, 2.0).horizontal_derivative(1)
    assert d.mu == pytest.approx(1.0)
    assert d.cell_estimate(0.1) == 0.0
    assert HomogeneousKernel(1, 1.0).horizontal_derivative(2).cell_estimate(0.1) == "pv"


def test_horizontal_derivative_index_validation():
    k = HomogeneousKernel(1, 2.0)
    with pytest.raises(ValueError):
        k.horizontal_derivative(0)
    with pytest.raises(ValueError):
        k.horizontal_derivative(3)


def test_kernel_split_reconstructs_exactly():
    k = HomogeneousKernel(1, 2.0)
    local, tail = kernel_split(k, 0.5)
    xs = [np.linspace(-1, 1, 7), np.linspace(-1, 1, 7), np.linspace(-0.5, 0.5, 7)]
    mesh = np.meshgrid(*xs, indexing="ij")
    total = local.evaluate(mesh) + tail.evaluate(mesh)
    base = k.evaluate(mesh)
    finite = np.isfinite(base)
    assert np.allclose(total[finite], base[finite], rtol=1e-12)
    # tail vanishes inside R/2 and matches k outside R
    rho = k.gauge(mesh)
    assert np.all(tail.evaluate(mesh)[rho <= 0.25] == 0.0)
    far = rho >= 0.5
    assert np.allclose(tail.evaluate(mesh)[far], base[far], rtol=1e-12)
    # tail is globally bounded even at the origin
    assert tail.cell_estimate(0.01) == 0.0
    assert local.cell_estimate(0.01) == k.cell_estimate(0.01)


def test_cutoff_kernel_validation():
    k = HomogeneousKernel(1, 2.0)
    with pytest.raises(ValueError):
        CutoffKernel(k, 0.5, "middle")
    with pytest.raises(ValueError):
        CutoffKernel(k, -1.0, "tail")


def test_tail_smoothing_probe_bounded():
    report = tail_smoothing_probe(1, 2.0)
    assert report["bounded"], report


def test_convolution_is_an_approximate_identity_at_high_mu():
    # mu = Q gives rho^0 = 1; convolving with it integrates f
    f = bump_grid(1, 1.0, 16, 0.5)
    ones = HomogeneousKernel(1, 4.0)
    out, report = group_convolve(f, ones, output_points=np.zeros((1, 3)))
    assert report["singular_policy"] == "none"
    assert out[0] == pytest.approx(f.integrate(), rel=1e-10)


def _bump3(x, y, t, r):
    s2 = (x * x + y * y + t * t) / (r * r)
    return np.where(s2 < 1.0, (1.0 - np.minimum(s2, 1.0)) ** 3, 0.0)


def _invariance_sides(a_coords, probes, res=24):
    # (L_a f) * k at the probes vs (f * k) at a^{-1} . probes, with the
    # translated input evaluated in closed form
    n = 1
    k = HomogeneousKernel(n, 2.0)
    ax, ay, at = a_coords
    a_inv = inverse(from_coords(list(a_coords)))
    f = Grid.from_function(n, 1.0, res, lambda x, y, t: _bump3(x, y, t, 0.4))
    translated = Grid.from_function(
        n, 1.0, res,
        lambda x, y, t: _bump3(
            x - ax, y - ay, t - at - 0.5 * (ax * y - ay * x), 0.4
        ),
    )
    lhs, _ = group_convolve(translated, k, output_points=probes)
    moved = np.empty_like(probes)
    for r, row in enumerate(probes):
        q = multiply(a_inv, from_coords(row))
        moved[r] = [float(q.x[0]), float(q.y[0]), float(q.t)]
    rhs, _ = group_convolve(f, k, output_points=moved)
    return lhs, rhs


def test_group_convolution_left_invariance_vertical_exact():
    # a central translation by a lattice multiple maps the lattice to itself,
    # so both Riemann sums agree to rounding even across the singular cells
    t_step = 2.0 / 24.0
    probes = np.array([[0.1, 0.0, 0.0], [0.0, 0.2, 0.05], [-0.15, 0.1, 0.0]])
    lhs, rhs = _invariance_sides((0.0, 0.0, 3 * t_step), probes)
    assert np.allclose(lhs, rhs, rtol=1e-10)


def test_group_convolution_left_invariance_generic():
    # generic translation, read off away from the supports where the
    # integrand is smooth and quadrature error is second order
    probes = np.array([[0.8, 0.0, 0.0], [0.0, 0.7, 0.3], [-0.75, 0.2, 0.0]])
    lhs, rhs = _invariance_sides((0.25, -0.25, 0.125), probes)
    assert np.allclose(lhs, rhs, rtol=0.02)


def test_decay_slopes():
    for mu, expected in ((1.0, -3.0), (2.0, -2.0)):
        report = decay_slope_probe(1, mu, resolution=32)
        assert report["expected_slope"] == expected
        assert report["relative_error"] < 0.05, report


def test_decay_slope_along_t_axis():
    report = decay_slope_probe(
        1, 2.0, resolution=32, direction=np.array([0.0, 0.0, 1.0])
    )
    assert report["relative_error"] < 0.05, report


def test_lp_lq_probe_critical_is_dilation_invariant():
    report = lp_lq_probe(1, 1.0, 2.0, resolution=16)
    assert report["at_critical"]
    assert report["critical_q"] == pytest.approx(4.0)
    assert report["max_relative_spread"] < 0.05, report
    assert report["expected_drift_exponent"] == pytest.approx(0.0)


def test_lp_lq_probe_fractional_alpha():
    report = lp_lq_probe(1, 2.0, 1.5, resolution=14, lambdas=(1.0, 2.0))
    assert report["critical_q"] == pytest.approx(6.0)
    assert report["max_relative_spread"] < 0.05, report


def test_lp_lq_probe_off_critical_drifts_monotonically():
    report = lp_lq_probe(1, 1.0, 2.0, q=3.0, resolution=14)
    assert not report["at_critical"]
    assert report["expected_drift_exponent"] < 0
    ratios = [r["ratio"] for r in report["rows"]]
    assert ratios[0] > ratios[1] > ratios[2]
    fitted = np.polyfit(
        np.log([r["lambda"] for r in report["rows"]]), np.log(ratios), 1
    )[0]
    assert np.sign(fitted) == np.sign(report["expected_drift_exponent"])


def test_lp_lq_probe_validation():
    with pytest.raises(ValueError, match="alpha"):
        lp_lq_probe(1, 5.0, 1.5)
    with pytest.raises(ValueError, match="p"):
        lp_lq_probe(1, 2.0, 3.0)
    with pytest.raises(ValueError, match="p"):
        lp_lq_probe(1, 1.0, 1.0)


def test_scalar_sobolev_check_invariance():
    u = bump_grid(1, 1.0, 16, 0.5)
    report = scalar_sobolev_check(1, 2.0, u, lambdas=(1.0, 2.0, 4.0))
    assert report["q"] == pytest.approx(4.0)
    assert report["max_relative_spread"] < 0.02, report


def test_scalar_sobolev_check_zero_and_validation():
    zero = Grid.empty(1, 1.0, 8)
    report = scalar_sobolev_check(1, 2.0, zero)
    assert all(r["ratio"] == 0.0 for r in report["rows"])
    assert report["max_relative_spread"] == 0.0
    with pytest.raises(ValueError, match="1 < p < Q"):
        scalar_sobolev_check(1, 1.0, zero)
    bad = Grid.from_function(1, 1.0, 8, lambda x, y, t: 1.0 + 0 * x)
    with pytest.raises(ValueError, match="interior"):
        scalar_sobolev_check(1, 2.0, bad)


def test_fundamental_gauge_scan_prefers_sixteen():
    report = fundamental_gauge_scan(1, t_weights=(4.0, 16.0, 32.0), resolution=32)
    assert report["best_t_weight"] == 16.0
    by_weight = {r["t_weight"]: r["residual"] for r in report["rows"]}
    assert by_weight[16.0] < 0.5 * by_weight[4.0]
    assert by_weight[16.0] < 0.5 * by_weight[32.0]


def test_convolution_commutes_with_projected_derivative():
    # P(f * g) = f * (P g) for the horizontal flow derivative P
    n = 1
    res = 22
    f = bump_grid(n, 1.0, res, 0.35)
    k = HomogeneousKernel(n, 2.0)
    conv, _ = group_convolve(f, k)
    from rumincalc.grid import discrete_horizontal_derivative

    left, _ = discrete_horizontal_derivative(conv, 1)
    dk = k.horizontal_derivative(1)
    right, _ = group_convolve(f, dk)
    interior = euclidean_mask(conv, identity(n), 0.6)
    num = np.abs(left.values - right.values)[interior]
    den = np.abs(right.values)[interior] + 1e-12
    rel = num / den
    assert float(np.median(rel)) < 0.05

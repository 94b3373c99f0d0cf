"""Anisotropic grids, discrete horizontal derivatives, and norms on H^n.

Grids are midpoint lattices over a box [-H, H]^{2n} x [-H_t, H_t]; the t
half-width defaults to the square of the horizontal one so that the grid is
stable under the group dilations used by the scaling probes.

The discrete horizontal derivative follows the flow of the frame field: a
central difference between u(p . (h e_i)) and u(p . (-h e_i)). The x/y part
of that step is one lattice cell; the induced t-shift -(h/2) y_i (or
+(h/2) x_i) is generally a fraction of a t-cell and is realized by linear
interpolation along the t-axis, slice by slice.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .group_geometry import Point


@dataclass
class Grid:
    """Samples of a scalar function on an anisotropic midpoint lattice."""

    n: int
    half_widths: tuple  # length 2n+1
    shape: tuple        # points per axis, length 2n+1
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        if len(self.half_widths) != 2 * self.n + 1 or len(self.shape) != 2 * self.n + 1:
            raise ValueError("half_widths and shape must have 2n+1 entries")
        if tuple(self.values.shape) != tuple(self.shape):
            raise ValueError("values shape mismatch")

    # -- geometry ---------------------------------------------------------

    def axis(self, i: int) -> np.ndarray:
        H, N = self.half_widths[i], self.shape[i]
        step = 2.0 * H / N
        return -H + (np.arange(N) + 0.5) * step

    def steps(self) -> tuple:
        return tuple(2.0 * H / N for H, N in zip(self.half_widths, self.shape))

    @property
    def cell_volume(self) -> float:
        v = 1.0
        for s in self.steps():
            v *= s
        return v

    def meshes(self) -> list:
        return np.meshgrid(*[self.axis(i) for i in range(2 * self.n + 1)], indexing="ij")

    @property
    def flat(self) -> np.ndarray:
        return self.values.reshape(-1)

    def copy_with(self, values: np.ndarray) -> "Grid":
        return Grid(self.n, self.half_widths, self.shape, values)

    # -- constructors -------------------------------------------------------

    @classmethod
    def empty(cls, n: int, horizontal_half_width: float, resolution: int,
              t_half_width: float | None = None, t_resolution: int | None = None) -> "Grid":
        H = float(horizontal_half_width)
        Ht = H * H if t_half_width is None else float(t_half_width)
        Nt = resolution if t_resolution is None else t_resolution
        hw = tuple([H] * (2 * n) + [Ht])
        shape = tuple([resolution] * (2 * n) + [Nt])
        return cls(n, hw, shape, np.zeros(shape))

    @classmethod
    def from_function(cls, n: int, horizontal_half_width: float, resolution: int, fn,
                      t_half_width: float | None = None, t_resolution: int | None = None) -> "Grid":
        g = cls.empty(n, horizontal_half_width, resolution, t_half_width, t_resolution)
        vals = np.asarray(fn(*g.meshes()), dtype=float)
        if vals.shape != g.values.shape:  # constant integrands return scalars
            vals = np.broadcast_to(vals, g.values.shape).copy()
        g.values = vals
        return g

    @classmethod
    def from_poly(cls, n: int, horizontal_half_width: float, resolution: int, poly,
                  t_half_width: float | None = None, t_resolution: int | None = None) -> "Grid":
        return cls.from_function(
            n, horizontal_half_width, resolution,
            lambda *axes: poly.evaluate_float(list(axes)),
            t_half_width, t_resolution,
        )

    # -- quadrature ----------------------------------------------------------

    def integrate(self, mask: np.ndarray | None = None) -> float:
        vals = self.values if mask is None else self.values * mask
        return float(vals.sum()) * self.cell_volume

    def lp_norm(self, p: float, mask: np.ndarray | None = None) -> float:
        vals = np.abs(self.values) ** p
        if mask is not None:
            vals = vals * mask
        return float(vals.sum() * self.cell_volume) ** (1.0 / p)


def gauge_mask(grid: Grid, center: Point, radius: float, t_weight: float = 1.0) -> np.ndarray:
    """Boolean mask of grid cells inside the gauge ball around ``center``.

    The gauge is rho^4 = |z|^4 + t_weight * t^2 evaluated on center^{-1} . p.
    """
    n = grid.n
    meshes = grid.meshes()
    cx = [float(v) for v in center.x]
    cy = [float(v) for v in center.y]
    ct = float(center.t)
    xs = [meshes[i] - cx[i] for i in range(n)]
    ys = [meshes[n + i] - cy[i] for i in range(n)]
    twist = sum(cx[j] * meshes[n + j] - cy[j] * meshes[j] for j in range(n))
    t = meshes[2 * n] - ct - 0.5 * twist
    sq = sum(u * u for u in xs) + sum(v * v for v in ys)
    gauge4 = sq * sq + t_weight * t * t
    return gauge4 < float(radius) ** 4


def euclidean_mask(grid: Grid, center: Point, radius: float) -> np.ndarray:
    n = grid.n
    meshes = grid.meshes()
    c = [float(v) for v in list(center.x) + list(center.y) + [center.t]]
    d2 = sum((meshes[i] - c[i]) ** 2 for i in range(2 * n + 1))
    return d2 < float(radius) ** 2


def _interp_t(values: np.ndarray, offsets: np.ndarray, t_axis: int) -> tuple:
    """Shift along the t axis by a per-point fractional cell offset.

    offsets broadcasts against values; linear interpolation between the two
    neighbouring t-cells, clamped at the ends. Returns (shifted, out_of_range)
    with out_of_range flagging points whose stencil left the grid.
    """
    Nt = values.shape[t_axis]
    idx = np.arange(Nt).reshape([-1 if a == t_axis else 1 for a in range(values.ndim)])
    pos = idx + offsets
    lo = np.floor(pos).astype(int)
    frac = pos - lo
    out = (pos < 0) | (pos > Nt - 1)
    lo_c = np.clip(lo, 0, Nt - 1)
    hi_c = np.clip(lo + 1, 0, Nt - 1)
    lo_b = np.broadcast_to(lo_c, values.shape)
    hi_b = np.broadcast_to(hi_c, values.shape)
    frac_b = np.broadcast_to(frac, values.shape)
    shifted = (
        np.take_along_axis(values, lo_b, axis=t_axis) * (1.0 - frac_b)
        + np.take_along_axis(values, hi_b, axis=t_axis) * frac_b
    )
    return shifted, np.broadcast_to(out, values.shape)


def _flow_shift(grid: Grid, i: int, direction: int) -> tuple:
    """Samples of u(p . (direction * h e_i)) with h one lattice step.

    For i < n the step moves x_i and shifts t by -(h/2) y_i; for i >= n it
    moves y_{i-n} and shifts t by +(h/2) x_{i-n}. Returns (values, invalid).
    """
    n = grid.n
    t_axis = 2 * n
    h = grid.steps()[i]
    v = grid.values
    shifted = np.roll(v, -direction, axis=i)
    invalid_axis = np.zeros(grid.shape, dtype=bool)
    edge = [slice(None)] * v.ndim
    edge[i] = slice(-1, None) if direction > 0 else slice(0, 1)
    invalid_axis[tuple(edge)] = True

    if i < n:
        coord = grid.axis(n + i)  # y_i
        sign = -1.0
        coord_axis = n + i
    else:
        coord = grid.axis(i - n)  # x_{i-n}
        sign = +1.0
        coord_axis = i - n
    t_step = grid.steps()[t_axis]
    offs_shape = [1] * v.ndim
    offs_shape[coord_axis] = -1
    offsets = (direction * h / 2.0) * sign * coord.reshape(offs_shape) / t_step
    shifted, out = _interp_t(shifted, offsets, t_axis)
    return shifted, invalid_axis | out


def discrete_horizontal_derivative(grid: Grid, i: int) -> tuple:
    """Central difference along the flow of W_i (1-based horizontal index).

    Returns (Grid, report); report['boundary_fraction'] is the share of cells
    whose centered stencil left the grid, where a one-sided difference (or
    zero at a doubly-clipped corner) is substituted and flagged.
    """
    n = grid.n
    if not 1 <= i <= 2 * n:
        raise ValueError("horizontal index out of range")
    a = i - 1
    h = grid.steps()[a]
    fwd, bad_f = _flow_shift(grid, a, +1)
    bwd, bad_b = _flow_shift(grid, a, -1)
    centered = (fwd - bwd) / (2.0 * h)
    one_sided_f = (fwd - grid.values) / h
    one_sided_b = (grid.values - bwd) / h
    out = np.where(bad_f & ~bad_b, one_sided_b, np.where(bad_b & ~bad_f, one_sided_f, centered))
    out = np.where(bad_f & bad_b, 0.0, out)
    report = {
        "boundary_fraction": float((bad_f | bad_b).mean()),
        "axis": i,
        "step": h,
    }
    return grid.copy_with(out), report


def discrete_t_derivative(grid: Grid) -> tuple:
    """Central difference along the vertical axis (the field T)."""
    t_axis = 2 * grid.n
    h = grid.steps()[t_axis]
    v = grid.values
    fwd = np.roll(v, -1, axis=t_axis)
    bwd = np.roll(v, 1, axis=t_axis)
    centered = (fwd - bwd) / (2.0 * h)
    bad = np.zeros(grid.shape, dtype=bool)
    first = [slice(None)] * v.ndim
    first[t_axis] = slice(0, 1)
    last = [slice(None)] * v.ndim
    last[t_axis] = slice(-1, None)
    bad[tuple(first)] = True
    bad[tuple(last)] = True
    one_f = (fwd - v) / h
    one_b = (v - bwd) / h
    out = np.where(bad, 0.0, centered)
    out[tuple(first)] = one_f[tuple(first)]
    out[tuple(last)] = one_b[tuple(last)]
    report = {"boundary_fraction": float(bad.mean()), "axis": "t", "step": h}
    return grid.copy_with(out), report


def second_order_multi_indices(n: int) -> list:
    """PBW multi-indices I with homogeneous degree d(I) = 2.

    Ordered pairs (a, b) with a <= b over the 2n horizontal generators, plus
    the single T (which weighs 2 by itself).
    """
    out = []
    for a in range(1, 2 * n + 1):
        for b in range(a, 2 * n + 1):
            out.append(("WW", a, b))
    out.append(("T",))
    return out


def sobolev_norm(grid: Grid, m: int, p: float, mask: np.ndarray | None = None) -> dict:
    """Homogeneous-order-m Sobolev norm: u together with all W^I u, d(I) = m.

    Returns a report with the combined norm, per-index norms, and the worst
    boundary fraction of the discrete stencils. m is capped at 2.
    """
    if m < 0 or m > 2:
        raise ValueError("m must be 0, 1, or 2")
    n = grid.n
    pieces = {"u": grid}
    boundary = 0.0
    if m == 1:
        for i in range(1, 2 * n + 1):
            g, rep = discrete_horizontal_derivative(grid, i)
            pieces[f"W{i}"] = g
            boundary = max(boundary, rep["boundary_fraction"])
    elif m == 2:
        firsts = {}
        for b in range(1, 2 * n + 1):
            firsts[b], rep = discrete_horizontal_derivative(grid, b)
            boundary = max(boundary, rep["boundary_fraction"])
        for idx in second_order_multi_indices(n):
            if idx[0] == "WW":
                a, b = idx[1], idx[2]
                g, rep = discrete_horizontal_derivative(firsts[b], a)
                pieces[f"W{a}W{b}"] = g
                boundary = max(boundary, rep["boundary_fraction"])
            else:
                g, rep = discrete_t_derivative(grid)
                pieces["T"] = g
                boundary = max(boundary, rep["boundary_fraction"])
    total = 0.0
    per_index = {}
    for name, g in pieces.items():
        nrm = g.lp_norm(p, mask)
        per_index[name] = nrm
        total += nrm ** p
    return {
        "norm": total ** (1.0 / p),
        "per_index": per_index,
        "order": m,
        "p": p,
        "boundary_fraction": boundary,
    }


def derivative_convergence(n: int, i: int = 1, resolutions=(16, 24, 32),
                           poly=None) -> dict:
    """Observed convergence order of the discrete flow derivative.

    Compares against the symbolic derivation on a quartic (or the supplied
    polynomial), measuring the L2 error over the fixed interior region
    |coordinate| < 0.5 so that the region sampled does not change with the
    resolution; fits the log-log slope across the resolutions.
    """
    from .envelope import derive
    from .polynomials import Poly

    nv = 2 * n + 1
    if poly is None:
        total = Poly.zero(nv)
        for j in range(nv):
            total = total + Poly.var(nv, j).scale(j + 1)
        poly = total**4 + Poly.var(nv, 0) ** 2 * Poly.var(nv, 2 * n)
    exact = derive(n, i - 1, poly)
    errs = []
    steps = []
    for res in resolutions:
        g = Grid.from_poly(n, 1.0, res, poly)
        target = Grid.from_poly(n, 1.0, res, exact)
        approx, rep = discrete_horizontal_derivative(g, i)
        interior = np.ones(g.shape, dtype=bool)
        for axis in range(nv):
            coords_shape = [1] * nv
            coords_shape[axis] = -1
            interior &= np.abs(g.axis(axis)).reshape(coords_shape) < 0.5
        diff = (approx.values - target.values)[interior]
        errs.append(float(np.sqrt(np.mean(diff**2))))
        steps.append(rep["step"])
    order = float(np.polyfit(np.log(steps), np.log(errs), 1)[0])
    return {
        "n": n,
        "axis": i,
        "resolutions": list(resolutions),
        "errors": errs,
        "observed_order": order,
    }


def gauss_legendre_box_integral(poly, bounds, nodes: int = 8) -> float:
    """Gauss-Legendre quadrature of a Poly over a box, exact for low degree.

    bounds is a list of (lo, hi) per variable. With ``nodes`` points per axis
    the rule is exact for polynomial degree <= 2*nodes - 1 up to rounding.
    """
    x, w = np.polynomial.legendre.leggauss(nodes)
    axes = []
    weights = []
    for lo, hi in bounds:
        lo, hi = float(lo), float(hi)
        axes.append(0.5 * (hi - lo) * x + 0.5 * (hi + lo))
        weights.append(0.5 * (hi - lo) * w)
    mesh = np.meshgrid(*axes, indexing="ij")
    wmesh = np.meshgrid(*weights, indexing="ij")
    vals = poly.evaluate_float(list(mesh))
    total = np.asarray(vals, dtype=float)
    for wm in wmesh:
        total = total * wm
    return float(total.sum())


def form_lp_norm(form, p: float, horizontal_half_width: float, resolution: int,
                 mask_fn=None) -> float:
    """L^p norm of a left-frame form's pointwise length over a masked grid.

    The frame monomials are orthonormal, so |omega(x)|^2 is the sum of squared
    coefficients; that polynomial is evaluated on the grid directly.
    """
    norm2 = form.norm2_poly()
    g = Grid.from_poly(form.n, horizontal_half_width, resolution, norm2)
    mask = None if mask_fn is None else mask_fn(g)
    vals = np.maximum(g.values, 0.0) ** (p / 2.0)
    if mask is not None:
        vals = vals * mask
    return float(vals.sum() * g.cell_volume) ** (1.0 / p)

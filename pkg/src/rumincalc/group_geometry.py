"""Heisenberg group H^n in exponential coordinates.

A point is p = (x, y, t) with x, y in R^n and t in R. The group law is

    p * p' = (x + x', y + y', t + t' + (1/2) sum_j (x_j y'_j - y_j x'_j)),

the identity is 0 and the inverse is -p. Anisotropic dilations scale the
horizontal layer linearly and the center quadratically. The gauge is
rho(p) = (|(x, y)|^4 + t^2)^(1/4) and d(p, q) = rho(p^{-1} * q).

Scalars are duck-typed: exact (int / Fraction) and float points go through the
same code paths. The gauge itself needs a fourth root, so ``gauge`` returns a
float; ``gauge4`` stays exact on exact input.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction

from .polynomials import Poly


@dataclass(frozen=True)
class Point:
    x: tuple
    y: tuple
    t: object

    def __post_init__(self):
        if len(self.x) != len(self.y):
            raise ValueError("x and y must have equal length")
        object.__setattr__(self, "x", tuple(self.x))
        object.__setattr__(self, "y", tuple(self.y))

    @property
    def n(self) -> int:
        return len(self.x)

    def coords(self) -> tuple:
        return self.x + self.y + (self.t,)


def identity(n: int) -> Point:
    zero = Fraction(0)
    return Point((zero,) * n, (zero,) * n, zero)


def from_coords(coords) -> Point:
    if len(coords) % 2 != 1:
        raise ValueError("need 2n+1 coordinates")
    n = len(coords) // 2
    return Point(tuple(coords[:n]), tuple(coords[n : 2 * n]), coords[2 * n])


def multiply(p: Point, q: Point) -> Point:
    if p.n != q.n:
        raise ValueError("points on different groups")
    half = Fraction(1, 2)
    twist = sum(p.x[j] * q.y[j] - p.y[j] * q.x[j] for j in range(p.n))
    return Point(
        tuple(a + b for a, b in zip(p.x, q.x)),
        tuple(a + b for a, b in zip(p.y, q.y)),
        p.t + q.t + half * twist,
    )


def inverse(p: Point) -> Point:
    return Point(tuple(-a for a in p.x), tuple(-a for a in p.y), -p.t)


def dilate(lam, p: Point) -> Point:
    return Point(
        tuple(lam * a for a in p.x),
        tuple(lam * a for a in p.y),
        (lam * lam) * p.t,
    )


def homogeneous_dimension(n: int) -> int:
    return 2 * n + 2


def gauge4(p: Point):
    """Fourth power of the gauge; exact on exact input."""
    h2 = sum(a * a for a in p.x) + sum(a * a for a in p.y)
    return h2 * h2 + p.t * p.t


def gauge(p: Point) -> float:
    return float(gauge4(p)) ** 0.25


def distance(p: Point, q: Point) -> float:
    return gauge(multiply(inverse(p), q))


def euclidean_norm(p: Point) -> float:
    return float(sum(a * a for a in p.coords())) ** 0.5


@dataclass(frozen=True)
class Ball:
    """Gauge ball B(center, radius) = {q : rho(center^{-1} q) < radius}."""

    center: Point
    radius: float

    def contains(self, q: Point) -> bool:
        return distance(self.center, q) < self.radius


def euclidean_inradius(radius: float) -> float:
    """Euclidean inradius of the gauge ball B(e, radius).

    The gauge of a Euclidean s-ball peaks at max(s, sqrt(s)) (horizontal
    versus central direction), so the inradius is min(radius, radius^2).
    """
    return min(radius, radius * radius)


def group_law_polys(n: int) -> list:
    """Coordinates of g * p as polynomials in (g, p).

    Variables are ordered g_x, g_y, g_t, p_x, p_y, p_t (2 * (2n+1) in total).
    Used for symbolic checks such as the left-translation Jacobian.
    """
    nv = 2 * (2 * n + 1)
    g = [Poly.var(nv, i) for i in range(2 * n + 1)]
    p = [Poly.var(nv, 2 * n + 1 + i) for i in range(2 * n + 1)]
    out = [g[i] + p[i] for i in range(2 * n)]
    twist = Poly.zero(nv)
    for j in range(n):
        twist = twist + g[j] * p[n + j] - g[n + j] * p[j]
    out.append(g[2 * n] + p[2 * n] + Fraction(1, 2) * twist)
    return out


def gauge_vs_euclidean(n: int, radius: float, samples: int, rng) -> dict:
    """Sample the near-identity comparison between gauge and Euclidean norm.

    Checks rho(p) <= |p|^(1/2) on samples with |p| <= radius (the bound needs
    the horizontal part below 1, automatic for radius <= 1) and estimates the
    smallest c0 with |p| <= c0^2 rho(p). Returns a report dict.
    """
    violations = 0
    c0_sq = 0.0
    max_ratio = 0.0
    for _ in range(samples):
        coords = [rng.uniform(-1.0, 1.0) for _ in range(2 * n + 1)]
        p = from_coords(coords)
        nrm = euclidean_norm(p)
        if nrm == 0.0 or nrm > radius:
            continue
        rho = gauge(p)
        if rho > nrm ** 0.5 * (1 + 1e-12):
            violations += 1
        max_ratio = max(max_ratio, rho / nrm ** 0.5)
        c0_sq = max(c0_sq, nrm / rho)
    return {
        "n": n,
        "radius": radius,
        "samples": samples,
        "upper_bound_violations": violations,
        "max_gauge_to_sqrt_euclidean": max_ratio,
        "c0_estimate": c0_sq ** 0.5,
    }


def point_to_json(p: Point) -> str:
    """Serialize as a JSON array [x..., y..., t].

    Exact non-integer rationals are emitted as "num/den" strings so the
    round trip stays exact; ints and floats are emitted as JSON numbers.
    """

    def enc(v):
        if isinstance(v, Fraction):
            return int(v) if v.denominator == 1 else f"{v.numerator}/{v.denominator}"
        return v

    return json.dumps([enc(v) for v in p.coords()])


def point_from_json(s: str) -> Point:
    raw = json.loads(s)

    def dec(v):
        if isinstance(v, str):
            num, den = v.split("/")
            return Fraction(int(num), int(den))
        if isinstance(v, int):
            return Fraction(v)
        return v

    return from_coords([dec(v) for v in raw])

"""One-point compactification of the plane and the field at infinity.

The plane is identified with the sphere minus the north pole by stereographic
projection; projecting from the south pole gives the second chart.  The
transition map is the inversion (x, y) -> (x, y) / (x^2 + y^2).  In the second
chart a degree-n field becomes v1 / (x^2 + y^2)^n with v1 polynomial; the
field actually used near the pole is v_inf = (x^2 + y^2) * v1, whose extra
factor pins the pole as a singular point so sphere trajectories match plane
trajectories one-to-one.

The inversion is orientation-reversing, so chirality read in the second chart
must be flipped to express it in the plane's orientation; consumers receive
that via ``INFINITE_CHART_FLIPS_ORIENTATION``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction

from .poly import BiPoly, VectorField

# The transition map has negative Jacobian determinant everywhere.
INFINITE_CHART_FLIPS_ORIENTATION = True


class Chart(Enum):
    FINITE = 0
    INFINITE = 1


@dataclass(frozen=True)
class ChartField:
    """A polynomial vector field attached to one of the two charts."""

    chart: Chart
    field: VectorField


@dataclass(frozen=True)
class SpherePoint:
    """A point on the sphere, tagged with the chart its coordinates live in."""

    chart: Chart
    x: float
    y: float

    def radius(self) -> float:
        return math.hypot(self.x, self.y)

    def other_chart(self) -> "SpherePoint":
        r2 = self.x * self.x + self.y * self.y
        if r2 == 0.0:
            raise ZeroDivisionError("pole has no image in the other chart")
        other = Chart.INFINITE if self.chart is Chart.FINITE else Chart.FINITE
        return SpherePoint(other, self.x / r2, self.y / r2)

    def to_finite(self) -> tuple[float, float]:
        """Finite-chart coordinates; the infinite point itself maps to inf."""
        if self.chart is Chart.FINITE:
            return self.x, self.y
        r2 = self.x * self.x + self.y * self.y
        if r2 == 0.0:
            return math.inf, math.inf
        return self.x / r2, self.y / r2

    def sphere_distance(self, other: "SpherePoint") -> float:
        """Chordal distance on the unit sphere model."""
        a = _embed(self)
        b = _embed(other)
        return math.sqrt(sum((u - v) ** 2 for u, v in zip(a, b)))


def _embed(p: SpherePoint) -> tuple[float, float, float]:
    """Stereographic embedding into R^3 (unit sphere)."""
    x, y = p.x, p.y
    r2 = x * x + y * y
    if p.chart is Chart.FINITE:
        return (2 * x / (1 + r2), 2 * y / (1 + r2), (r2 - 1) / (r2 + 1))
    # second chart: its origin is the north pole
    return (2 * x / (1 + r2), 2 * y / (1 + r2), (1 - r2) / (1 + r2))


INFINITE_POINT = SpherePoint(Chart.INFINITE, 0.0, 0.0)


def pushforward_numerator(v: VectorField) -> VectorField:
    """The polynomial field v1 with pushforward(v) = v1 / (x^2+y^2)^n.

    Exact computation: with rho^2 = u^2 + w^2 and P* = rho^(2n) P(u/rho^2,
    w/rho^2), the chain rule for the inversion gives
        u' = (w^2 - u^2) P* - 2 u w Q*,
        w' = -2 u w P* + (u^2 - w^2) Q*,
    all divided by rho^(2n).
    """
    n = v.degree
    rho2 = BiPoly.from_terms([(2, 0, 1), (0, 2, 1)])
    p_star = _cleared_substitution(v.p, n, rho2)
    q_star = _cleared_substitution(v.q, n, rho2)
    u2 = BiPoly.from_terms([(2, 0, 1)])
    w2 = BiPoly.from_terms([(0, 2, 1)])
    uw = BiPoly.from_terms([(1, 1, 1)])
    comp_u = (w2 - u2) * p_star - uw.scale(2) * q_star
    comp_w = uw.scale(-2) * p_star + (u2 - w2) * q_star
    return VectorField(comp_u, comp_w)


def _cleared_substitution(f: BiPoly, n: int, rho2: BiPoly) -> BiPoly:
    """rho^(2n) * f(u/rho^2, w/rho^2) as an exact polynomial."""
    out = BiPoly.zero()
    powers = [BiPoly.const(1)]
    for _ in range(n):
        powers.append(powers[-1] * rho2)
    for (i, j), c in f.coeffs.items():
        term = BiPoly.from_terms([(i, j, c)]) * powers[n - i - j]
        out = out + term
    return out


def to_infinite_chart(v: VectorField) -> ChartField:
    """The field v_inf = (u^2 + w^2) * v1 governing the second chart."""
    v1 = pushforward_numerator(v)
    rho2 = BiPoly.from_terms([(2, 0, 1), (0, 2, 1)])
    return ChartField(Chart.INFINITE, VectorField(rho2 * v1.p, rho2 * v1.q))


def transition_velocity(x: float, y: float, vx: float, vy: float) -> tuple[float, float]:
    """Push a velocity vector at (x, y) through the inversion chart map."""
    r2 = x * x + y * y
    r4 = r2 * r2
    jxx = (y * y - x * x) / r4
    jxy = -2.0 * x * y / r4
    jyy = (x * x - y * y) / r4
    return jxx * vx + jxy * vy, jxy * vx + jyy * vy

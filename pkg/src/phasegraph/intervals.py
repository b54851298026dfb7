"""Small interval-arithmetic kit for isolation certificates.

Only what root certification needs: rectangle evaluation of exact-coefficient
polynomials and the Krawczyk existence/uniqueness test for 2x2 systems.
Outward rounding is approximated by a tiny relative inflation, which is
adequate for the desk-scale certificates produced here.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .poly import BiPoly, VectorField

_INFLATE = 1e-14


@dataclass(frozen=True)
class Interval:
    lo: float
    hi: float

    def __post_init__(self):
        if self.lo > self.hi:
            raise ValueError("empty interval")

    @staticmethod
    def point(v: float) -> "Interval":
        return Interval(v, v)

    def width(self) -> float:
        return self.hi - self.lo

    def mid(self) -> float:
        return 0.5 * (self.lo + self.hi)

    def __add__(self, other):
        other = _coerce(other)
        return _inflate(self.lo + other.lo, self.hi + other.hi)

    def __sub__(self, other):
        other = _coerce(other)
        return _inflate(self.lo - other.hi, self.hi - other.lo)

    def __mul__(self, other):
        other = _coerce(other)
        vals = (self.lo * other.lo, self.lo * other.hi, self.hi * other.lo, self.hi * other.hi)
        return _inflate(min(vals), max(vals))

    __radd__ = __add__
    __rmul__ = __mul__

    def __neg__(self):
        return Interval(-self.hi, -self.lo)

    def contains(self, v: float) -> bool:
        return self.lo <= v <= self.hi

    def inside(self, other: "Interval") -> bool:
        return other.lo < self.lo and self.hi < other.hi

    def straddles_zero(self) -> bool:
        return self.lo <= 0.0 <= self.hi

    def pow(self, k: int) -> "Interval":
        if k == 0:
            return Interval(1.0, 1.0)
        if k % 2 == 1 or self.lo >= 0:
            return _inflate(self.lo ** k, self.hi ** k)
        if self.hi <= 0:
            return _inflate(self.hi ** k, self.lo ** k)
        return _inflate(0.0, max(self.lo ** k, self.hi ** k))


def _coerce(v) -> Interval:
    return v if isinstance(v, Interval) else Interval.point(float(v))


def _inflate(lo: float, hi: float) -> Interval:
    pad = _INFLATE * max(1.0, abs(lo), abs(hi))
    return Interval(lo - pad, hi + pad)


def eval_interval(f: BiPoly, ix: Interval, iy: Interval) -> Interval:
    total = Interval(0.0, 0.0)
    for (i, j), c in f.coeffs.items():
        total = total + ix.pow(i) * iy.pow(j) * float(c)
    return total


def krawczyk_certify(v: VectorField, x: float, y: float, radius: float) -> float | None:
    """Certify a unique zero of (P, Q) in the box of the given radius.

    Returns the certified radius, or None if the test fails (e.g. the
    Jacobian is singular at a degenerate zero).
    """
    px, py = v.p.partial_x(), v.p.partial_y()
    qx, qy = v.q.partial_x(), v.q.partial_y()
    for _ in range(30):
        ix = Interval(x - radius, x + radius)
        iy = Interval(y - radius, y + radius)
        a = px.evaluate(x, y)
        b = py.evaluate(x, y)
        c = qx.evaluate(x, y)
        d = qy.evaluate(x, y)
        det = a * d - b * c
        if det == 0.0 or not math.isfinite(det):
            return None
        # Y = midpoint-Jacobian inverse
        ya, yb, yc, yd = d / det, -b / det, -c / det, a / det
        fx = v.p.evaluate(x, y)
        fy = v.q.evaluate(x, y)
        # K = m - Y f(m) + (I - Y J(X)) (X - m)
        jxx = eval_interval(px, ix, iy)
        jxy = eval_interval(py, ix, iy)
        jyx = eval_interval(qx, ix, iy)
        jyy = eval_interval(qy, ix, iy)
        exx = Interval(1.0, 1.0) - (jxx * ya + jyx * yb)
        exy = -(jxy * ya + jyy * yb)
        eyx = -(jxx * yc + jyx * yd)
        eyy = Interval(1.0, 1.0) - (jxy * yc + jyy * yd)
        dx = Interval(-radius, radius)
        dy = Interval(-radius, radius)
        kx = Interval.point(x - (ya * fx + yb * fy)) + exx * dx + exy * dy
        ky = Interval.point(y - (yc * fx + yd * fy)) + eyx * dx + eyy * dy
        if kx.inside(ix) and ky.inside(iy):
            return radius
        radius *= 0.6
        if radius < 1e-13 * max(1.0, abs(x), abs(y)):
            return None
    return None


def boundary_isolation(v: VectorField, x: float, y: float, radius: float, segments: int = 24) -> bool:
    """Weaker fallback: |P| + |Q| bounded away from zero on the box boundary.

    Certifies that no zero set crosses the boundary, so all zeros inside are
    isolated from the outside; used for degenerate points where Krawczyk
    cannot apply.
    """
    lo_x, hi_x = x - radius, x + radius
    lo_y, hi_y = y - radius, y + radius
    edges = [
        ((lo_x, hi_x), (lo_y, lo_y)),
        ((lo_x, hi_x), (hi_y, hi_y)),
        ((lo_x, lo_x), (lo_y, hi_y)),
        ((hi_x, hi_x), (lo_y, hi_y)),
    ]
    for (x0, x1), (y0, y1) in edges:
        for k in range(segments):
            t0, t1 = k / segments, (k + 1) / segments
            ix = Interval(x0 + (x1 - x0) * t0, x0 + (x1 - x0) * t1)
            iy = Interval(y0 + (y1 - y0) * t0, y0 + (y1 - y0) * t1)
            ip = eval_interval(v.p, ix, iy)
            iq = eval_interval(v.q, ix, iy)
            if ip.straddles_zero() and iq.straddles_zero():
                return False
    return True

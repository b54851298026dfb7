"""Tracing closed level ovals of R = P^2 + Q^2 around singular points.

For small eps > 0 the level set {R = eps} has a nonsingular oval enveloping
each singular point; the tangency points of the field with that oval govern
the hyperbolic/elliptic sector count.  The tracer is a predictor-corrector
walker along the level set with Newton projection, robust to the strongly
non-circular ovals that degenerate points produce.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geom import point_in_polygon
from .poly import BiPoly


@dataclass
class Oval:
    center: tuple[float, float]
    eps: float
    points: np.ndarray            # closed polyline (first point not repeated)
    arc: np.ndarray               # cumulative arc length per point
    total_arc: float

    def position(self, s: float) -> tuple[float, float]:
        """Point at arc-length s (wrapping)."""
        s = s % self.total_arc
        k = int(np.searchsorted(self.arc, s, side="right")) - 1
        k = max(0, min(k, len(self.points) - 1))
        s0 = self.arc[k]
        nxt = (k + 1) % len(self.points)
        seg = self.total_arc - s0 if nxt == 0 else self.arc[nxt] - s0
        t = 0.0 if seg <= 0 else (s - s0) / seg
        p0, p1 = self.points[k], self.points[nxt]
        return float(p0[0] + t * (p1[0] - p0[0])), float(p0[1] + t * (p1[1] - p0[1]))

    def max_radius(self) -> float:
        dx = self.points[:, 0] - self.center[0]
        dy = self.points[:, 1] - self.center[1]
        return float(np.max(np.hypot(dx, dy)))

    def min_radius(self) -> float:
        dx = self.points[:, 0] - self.center[0]
        dy = self.points[:, 1] - self.center[1]
        return float(np.min(np.hypot(dx, dy)))


class OvalTraceError(Exception):
    pass


def _project(r: BiPoly, rx: BiPoly, ry: BiPoly, eps: float, x: float, y: float,
             iters: int = 6) -> tuple[float, float]:
    for _ in range(iters):
        val = r.evaluate(x, y) - eps
        gx = rx.evaluate(x, y)
        gy = ry.evaluate(x, y)
        g2 = gx * gx + gy * gy
        if g2 < 1e-300:
            raise OvalTraceError("vanishing gradient on level set")
        step = val / g2
        x -= step * gx
        y -= step * gy
        if abs(val) < 1e-15 * max(eps, 1e-30):
            break
    return x, y


def find_level_start(r: BiPoly, eps: float, cx: float, cy: float, r_max: float) -> tuple[float, float]:
    """First crossing of R = eps walking from the center along +x."""
    n_steps = 400
    prev_t = r_max / n_steps * 0.01
    prev_val = r.evaluate(cx + prev_t, cy) - eps
    for k in range(1, n_steps + 1):
        t = r_max * k / n_steps
        val = r.evaluate(cx + t, cy) - eps
        if prev_val < 0.0 <= val:
            lo, hi = prev_t, t
            for _ in range(80):
                mid = 0.5 * (lo + hi)
                if r.evaluate(cx + mid, cy) - eps < 0.0:
                    lo = mid
                else:
                    hi = mid
            return cx + 0.5 * (lo + hi), cy
        prev_t, prev_val = t, val
    raise OvalTraceError("no level crossing found along the probe ray")


def trace_oval(r: BiPoly, eps: float, cx: float, cy: float, r_bound: float,
               max_steps: int = 8000) -> Oval:
    """Trace the closed component of {R = eps} around (cx, cy).

    Raises OvalTraceError when the component fails to close inside the probe
    disk, which callers treat as a shrink-eps signal.
    """
    rx = r.partial_x()
    ry = r.partial_y()

    def tangent_at(px: float, py: float) -> tuple[float, float]:
        gx = rx.evaluate(px, py)
        gy = ry.evaluate(px, py)
        gn = math.hypot(gx, gy)
        if gn < 1e-300:
            raise OvalTraceError("singular level point")
        # gradient rotated +90 deg walks counterclockwise around the minimum
        return -gy / gn, gx / gn

    x0, y0 = find_level_start(r, eps, cx, cy, r_bound)
    x0, y0 = _project(r, rx, ry, eps, x0, y0)
    x, y = x0, y0
    tx, ty = tangent_at(x, y)
    pts = [(x, y)]
    turning = 0.0
    start_radius = math.hypot(x0 - cx, y0 - cy)
    h_max = max(start_radius * 0.08, 1e-10)
    h = h_max * 0.5
    closed = False
    for _ in range(max_steps):
        try:
            nx, ny = _project(r, rx, ry, eps, x + h * tx, y + h * ty)
            ntx, nty = tangent_at(nx, ny)
        except OvalTraceError:
            h *= 0.5
            if h < 1e-13:
                raise
            continue
        moved = math.hypot(nx - x, ny - y)
        dtheta = math.atan2(tx * nty - ty * ntx,
                            max(-1.0, min(1.0, tx * ntx + ty * nty)))
        if moved > 2.5 * h or abs(dtheta) > 0.6:
            h *= 0.5
            if h < 1e-13:
                raise OvalTraceError("step collapsed at a sharp feature")
            continue
        x, y, tx, ty = nx, ny, ntx, nty
        turning += dtheta
        pts.append((x, y))
        if math.hypot(x - cx, y - cy) > r_bound:
            raise OvalTraceError("level component escapes the probe disk")
        if len(pts) > 8 and abs(turning) > 2 * math.pi - 0.3 \
                and math.hypot(x - x0, y - y0) < 1.6 * h:
            closed = True
            break
        if abs(dtheta) < 0.05:
            h = min(h * 1.4, h_max)
    if not closed:
        raise OvalTraceError("oval did not close within the step budget")
    poly = np.array(pts)
    if len(poly) < 8:
        raise OvalTraceError("oval degenerated to too few points")
    if not point_in_polygon(poly, cx, cy):
        raise OvalTraceError("traced component does not enclose the point")
    if signed_turn(poly) < 0:
        poly = poly[::-1].copy()
    seg = np.hypot(np.diff(poly[:, 0], append=poly[0, 0]),
                   np.diff(poly[:, 1], append=poly[0, 1]))
    arc = np.concatenate([[0.0], np.cumsum(seg)[:-1]])
    return Oval((cx, cy), eps, poly, arc, float(np.sum(seg)))


def signed_turn(poly: np.ndarray) -> float:
    x = poly[:, 0]
    y = poly[:, 1]
    return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))


def tangency_points(oval: Oval, lr: BiPoly, tol: float = 1e-12) -> list[float]:
    """Arc positions on the oval where L_v(R) changes sign (odd tangencies).

    Exact zeros on the sample grid are handled by comparing the flanking
    nonzero values, so a tangency landing on the trace seam is not lost.
    """
    n = max(len(oval.points), 256)
    s_grid = np.linspace(0.0, oval.total_arc, n, endpoint=False)
    vals = np.array([lr.evaluate(*oval.position(s)) for s in s_grid])
    nonzero = [k for k in range(n) if vals[k] != 0.0]
    if not nonzero:
        return []
    out: list[float] = []
    m = len(nonzero)
    for idx in range(m):
        i = nonzero[idx]
        j = nonzero[(idx + 1) % m]
        a, b = vals[i], vals[j]
        if (a < 0) == (b < 0):
            continue
        gap = (j - i) % n
        if gap > 1:
            # the zero(s) on the grid are the tangency; report the middle one
            mid_idx = (i + gap // 2 + (gap % 2)) % n
            out.append(float(s_grid[mid_idx]))
            continue
        lo = float(s_grid[i])
        hi = lo + oval.total_arc / n
        flo = a
        for _ in range(60):
            mid = 0.5 * (lo + hi)
            fm = lr.evaluate(*oval.position(mid % oval.total_arc))
            if fm == 0.0:
                lo = hi = mid
                break
            if (flo < 0) == (fm < 0):
                lo, flo = mid, fm
            else:
                hi = mid
            if hi - lo < tol:
                break
        out.append(0.5 * (lo + hi) % oval.total_arc)
    return sorted(out)

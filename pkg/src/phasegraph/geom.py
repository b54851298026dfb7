"""Planar polyline geometry used by flow analysis and graph embedding."""

from __future__ import annotations

import math

import numpy as np


def signed_area(poly: np.ndarray) -> float:
    """Signed area of a closed polyline (positive = counterclockwise)."""
    x = poly[:, 0]
    y = poly[:, 1]
    return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))


def point_in_polygon(poly: np.ndarray, x: float, y: float) -> bool:
    """Even-odd test against a closed polyline (last point need not repeat)."""
    px = poly[:, 0]
    py = poly[:, 1]
    qx = np.roll(px, -1)
    qy = np.roll(py, -1)
    crosses = (py > y) != (qy > y)
    with np.errstate(divide="ignore", invalid="ignore"):
        xint = px + (y - py) * (qx - px) / (qy - py)
    hits = crosses & (x < xint)
    return bool(np.count_nonzero(hits) % 2)


def nearest_on_polyline(poly: np.ndarray, x: float, y: float, closed: bool = False):
    """Nearest point on a polyline.

    Returns (distance, segment_index, parameter, side) where side is the sign
    of the cross product of the segment direction with the offset to the
    query point (+1 = left of travel direction).
    """
    p = poly
    q = np.roll(poly, -1, axis=0) if closed else poly[1:]
    if not closed:
        p = poly[:-1]
    d = q - p
    len2 = np.einsum("ij,ij->i", d, d)
    len2 = np.where(len2 == 0.0, 1e-300, len2)
    w = np.stack([x - p[:, 0], y - p[:, 1]], axis=1)
    t = np.clip(np.einsum("ij,ij->i", w, d) / len2, 0.0, 1.0)
    proj = p + t[:, None] * d
    dist2 = (proj[:, 0] - x) ** 2 + (proj[:, 1] - y) ** 2
    k = int(np.argmin(dist2))
    cross = d[k, 0] * (y - p[k, 1]) - d[k, 1] * (x - p[k, 0])
    side = 1 if cross >= 0 else -1
    return math.sqrt(float(dist2[k])), k, float(t[k]), side


def segment_intersection(a0, a1, b0, b1):
    """Proper intersection of two segments; returns (s, t, point) or None."""
    ax, ay = a1[0] - a0[0], a1[1] - a0[1]
    bx, by = b1[0] - b0[0], b1[1] - b0[1]
    denom = ax * by - ay * bx
    if denom == 0.0:
        return None
    cx, cy = b0[0] - a0[0], b0[1] - a0[1]
    s = (cx * by - cy * bx) / denom
    t = (cx * ay - cy * ax) / denom
    if -1e-12 <= s <= 1 + 1e-12 and -1e-12 <= t <= 1 + 1e-12:
        return s, t, (a0[0] + s * ax, a0[1] + s * ay)
    return None


def polyline_crossings(a: np.ndarray, b: np.ndarray, closed_b: bool = True):
    """All transversal crossings of polyline a with polyline b.

    Returns a list of (i, s, j, t, point): segment indices and local
    parameters on each polyline plus the crossing point.
    """
    out = []
    bq = np.roll(b, -1, axis=0) if closed_b else b[1:]
    bp = b if closed_b else b[:-1]
    # coarse bounding-box prefilter per a-segment
    bminx = np.minimum(bp[:, 0], bq[:, 0])
    bmaxx = np.maximum(bp[:, 0], bq[:, 0])
    bminy = np.minimum(bp[:, 1], bq[:, 1])
    bmaxy = np.maximum(bp[:, 1], bq[:, 1])
    for i in range(len(a) - 1):
        a0, a1 = a[i], a[i + 1]
        lox, hix = min(a0[0], a1[0]), max(a0[0], a1[0])
        loy, hiy = min(a0[1], a1[1]), max(a0[1], a1[1])
        mask = (bminx <= hix) & (bmaxx >= lox) & (bminy <= hiy) & (bmaxy >= loy)
        for j in np.nonzero(mask)[0]:
            hit = segment_intersection(a0, a1, bp[j], bq[j])
            if hit is not None:
                s, t, pt = hit
                out.append((i, s, int(j), t, pt))
    # drop duplicate hits at shared segment endpoints
    dedup = []
    for item in sorted(out, key=lambda r: (r[0], r[1])):
        if dedup and abs(item[0] + item[1] - dedup[-1][0] - dedup[-1][1]) < 1e-9:
            continue
        dedup.append(item)
    return dedup


def polygon_contains_polyline(container: np.ndarray, inner: np.ndarray) -> bool:
    """True if a representative sample of `inner` lies inside `container`."""
    step = max(1, len(inner) // 8)
    pts = inner[::step]
    votes = sum(point_in_polygon(container, float(px), float(py)) for px, py in pts)
    return votes > len(pts) / 2


def offset_closed_polyline(poly: np.ndarray, distance: float) -> np.ndarray:
    """Offset a closed polyline along its outward-ish normals.

    Positive distance offsets to the left of the traversal direction.
    """
    prev = np.roll(poly, 1, axis=0)
    nxt = np.roll(poly, -1, axis=0)
    tang = nxt - prev
    norms = np.hypot(tang[:, 0], tang[:, 1])
    norms = np.where(norms == 0.0, 1.0, norms)
    nx = -tang[:, 1] / norms
    ny = tang[:, 0] / norms
    return np.stack([poly[:, 0] + distance * nx, poly[:, 1] + distance * ny], axis=1)


def resample_closed(poly: np.ndarray, count: int) -> np.ndarray:
    """Resample a closed polyline to `count` roughly equal arc-length points."""
    closed = np.vstack([poly, poly[:1]])
    seg = np.hypot(np.diff(closed[:, 0]), np.diff(closed[:, 1]))
    s = np.concatenate([[0.0], np.cumsum(seg)])
    total = s[-1]
    targets = np.linspace(0.0, total, count, endpoint=False)
    xs = np.interp(targets, s, closed[:, 0])
    ys = np.interp(targets, s, closed[:, 1])
    return np.stack([xs, ys], axis=1)

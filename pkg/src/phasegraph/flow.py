"""Limit cycles, separatrices, polycycles, nests, and contact-free cycles.

Everything here works on the compactified sphere through the shared
integrator.  Cycles come from Poincare return maps on radial transversals
cast from every monodromic point; separatrices are launched from the germ
data the sector analysis produced and traced to their limit objects;
polycycles are cycles of the continuation relation on co-oriented
separatrices; nests come from the containment order of cycle polylines.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field

import numpy as np

from .chart import Chart, SpherePoint
from .config import RunConfig
from .errors import (
    AmbiguousConnection,
    CollarTooTight,
    InequalityViolation,
    NonIsolatedFixedPoints,
    UnresolvedDegeneracy,
)
from .geom import (
    nearest_on_polyline,
    offset_closed_polyline,
    point_in_polygon,
    polyline_crossings,
    resample_closed,
    signed_area,
)
from .integrate import CollarTerminal, PointTerminal, Ray, SphereIntegrator
from .poly import VectorField
from .singular import SingularPointReport, exact_symmetry_witness

ALPHA = "alpha"
OMEGA = "omega"
ZERO = "zero"
EMPTY = "empty"


@dataclass
class LimitCycle:
    cycle_id: int
    points: np.ndarray            # closed polyline, finite chart
    period: float
    side_inner: str               # alpha | omega | empty
    side_outer: str
    residual: float
    is_boundary: bool = False
    removed_side: str | None = None   # "inner" / "outer" after nest removal

    def side_pair(self) -> tuple[str, str]:
        return self.side_inner, self.side_outer

    def contains(self, x: float, y: float) -> bool:
        return point_in_polygon(self.points, x, y)

    def scale(self) -> float:
        return float(np.max(np.hypot(self.points[:, 0], self.points[:, 1])))

    def to_dict(self) -> dict:
        return {
            "cycle_id": self.cycle_id,
            "period": self.period,
            "sides": [self.side_inner, self.side_outer],
            "residual": self.residual,
            "is_boundary": self.is_boundary,
            "removed_side": self.removed_side,
            "samples": [[round(float(x), 6), round(float(y), 6)]
                        for x, y in self.points[::max(1, len(self.points) // 64)]],
        }


@dataclass
class SeparatrixEnd:
    kind: str                     # "point" | "cycle" | "polycycle" | "unknown"
    obj_id: int | None = None
    germ_index: int | None = None
    hyperbolic_boundary: bool = False
    spiral: bool = False          # approach winds (focus / cycle / polycycle)


@dataclass
class Separatrix:
    sep_id: int
    samples: list[tuple[int, float, float]]
    alpha_end: SeparatrixEnd
    omega_end: SeparatrixEnd
    nice: bool = False
    mark_left: str = EMPTY        # alpha | omega | zero | empty, left of travel
    mark_right: str = EMPTY
    ambiguous: bool = False
    truncated_at: tuple[float, float] | None = None
    contact_id: int | None = None

    def finite_polyline(self) -> np.ndarray:
        pts = []
        for chart_val, x, y in self.samples:
            if chart_val == Chart.FINITE.value:
                pts.append((x, y))
            else:
                r2 = x * x + y * y
                if r2 > 1e-12:
                    pts.append((x / r2, y / r2))
        return np.array(pts) if pts else np.zeros((0, 2))

    def to_dict(self) -> dict:
        def end(e):
            return {"kind": e.kind, "obj_id": e.obj_id,
                    "hyperbolic_boundary": e.hyperbolic_boundary}
        return {
            "sep_id": self.sep_id,
            "alpha": end(self.alpha_end),
            "omega": end(self.omega_end),
            "nice": self.nice,
            "marks": [self.mark_left, self.mark_right],
            "ambiguous": self.ambiguous,
        }


@dataclass
class Polycycle:
    poly_id: int
    vertices: list[int]               # singular point ids, cyclic, repetitions ok
    separatrices: list[tuple[int, str]]  # (sep_id, positive side "left"/"right")
    limit_kind: str                   # "alpha" | "zero" | "omega"

    def to_dict(self) -> dict:
        return {"poly_id": self.poly_id, "vertices": self.vertices,
                "separatrices": self.separatrices, "limit_kind": self.limit_kind}


@dataclass
class Nest:
    inner_cycle: int
    outer_cycle: int
    contained_cycles: list[int]

    def to_dict(self) -> dict:
        return {"inner": self.inner_cycle, "outer": self.outer_cycle,
                "contained": self.contained_cycles}


@dataclass
class ClosedOrbitCell:
    owner_point: int
    z_lo: float
    z_hi: float


@dataclass
class ContactFreeCycle:
    contact_id: int
    owner_kind: str               # "focus" | "cycle-inner" | "cycle-outer" | "polycycle"
    owner_id: int
    points: np.ndarray            # closed polyline, finite chart, counterclockwise
    min_transversality: float

    def to_dict(self) -> dict:
        return {"contact_id": self.contact_id, "owner_kind": self.owner_kind,
                "owner_id": self.owner_id,
                "min_transversality": self.min_transversality}


# ---------------------------------------------------------------------------
# limit cycle detection
# ---------------------------------------------------------------------------

def _pick_ray_angle(report: SingularPointReport,
                    others: list[SingularPointReport]) -> float:
    """Probe angle whose ray stays clear of the other singular points."""
    best = (0.0, -1.0)
    for k in range(16):
        ang = 2.0 * math.pi * k / 16.0 + 0.0390625
        clear = math.inf
        for other in others:
            if other.point_id == report.point_id or other.chart is not report.chart:
                continue
            dx = other.x - report.x
            dy = other.y - report.y
            d = math.hypot(dx, dy)
            off = abs(-math.sin(ang) * dx + math.cos(ang) * dy)
            along = math.cos(ang) * dx + math.sin(ang) * dy
            clear = min(clear, off + (0.0 if along > 0 else d))
        if clear > best[1]:
            best = (ang, clear)
    return best[0]


def _return_map(integrator: SphereIntegrator, report, ray: Ray, z: float,
                cfg: RunConfig) -> float | None:
    f = integrator.fields[report.chart]
    sx = report.x + z * math.cos(ray.angle)
    sy = report.y + z * math.sin(ray.angle)
    vx = f.p.evaluate(sx, sy)
    vy = f.q.evaluate(sx, sy)
    nv = math.hypot(vx, vy)
    if nv < 1e-300:
        return None
    h = 1e-8 * max(1.0, z)
    res = integrator.run(
        SpherePoint(report.chart, sx + h * vx / nv, sy + h * vy / nv),
        forward=True, ray=ray, s_max=140.0, record=False,
    )
    if res.status != "ray":
        return None
    return res.ray_z


def detect_limit_cycles(v: VectorField, integrator: SphereIntegrator,
                        reports: list[SingularPointReport], cfg: RunConfig):
    """Cycles from return maps on transversals out of every monodromic point.

    Returns (cycles, closed-orbit cells, searched-region records).
    """
    cycles: list[LimitCycle] = []
    cells: list[ClosedOrbitCell] = []
    searched: list[dict] = []
    for rep in reports:
        if not rep.monodromic:
            continue
        angle = _pick_ray_angle(rep, reports)
        z_max = 1.2 if rep.chart is Chart.FINITE else 0.7
        z_max = min(z_max, _clearance_along(rep, reports, angle))
        z_min = max(rep.capture_radius() * 1.5, 1e-4)
        if z_min >= z_max:
            continue
        ray = Ray(rep.chart, rep.x, rep.y, angle, z_min=z_min * 0.2, z_max=z_max * 1.6)
        n = cfg.cycle_scan_samples
        zs = [z_min + (z_max - z_min) * k / (n - 1) for k in range(n)]
        disp = [( z, _return_map(integrator, rep, ray, z, cfg)) for z in zs]
        searched.append({"point_id": rep.point_id, "chart": rep.chart.name,
                         "angle": angle, "z_range": [z_min, z_max],
                         "samples": n})
        # period annulus: vanishing displacement across a stretch
        flat = [z for z, g in disp if g is not None and abs(g - z) < cfg.center_displacement]
        if len(flat) >= 3 and rep.kind == "center":
            cells.append(ClosedOrbitCell(rep.point_id, min(flat), max(flat)))
        elif len(flat) >= 3:
            if exact_symmetry_witness(integrator.fields[rep.chart], rep.x, rep.y):
                cells.append(ClosedOrbitCell(rep.point_id, min(flat), max(flat)))
            else:
                raise NonIsolatedFixedPoints(
                    f"return map vanishes on an interval at point {rep.point_id} "
                    "without a symmetry witness")
        pairs = [(z, g) for z, g in disp if g is not None]
        for (z0, g0), (z1, g1) in zip(pairs, pairs[1:]):
            d0, d1 = g0 - z0, g1 - z1
            if abs(d0) < cfg.center_displacement or abs(d1) < cfg.center_displacement:
                continue
            if (d0 < 0) == (d1 < 0):
                continue
            z_star = _bisect_cycle(integrator, rep, ray, z0, d0, z1, d1, cfg)
            if z_star is None:
                continue
            cyc = _extract_cycle(v, integrator, rep, ray, z_star, cfg, len(cycles))
            if cyc is not None and not any(_same_cycle(cyc, c) for c in cycles):
                cycles.append(cyc)
    cycles.sort(key=lambda c: c.scale())
    for k, c in enumerate(cycles):
        c.cycle_id = k
    return cycles, cells, searched


def _clearance_along(rep, reports, angle) -> float:
    clear = math.inf
    for other in reports:
        if other.point_id == rep.point_id:
            continue
        ox, oy = _project(other, rep.chart)
        if ox is None:
            continue
        dx, dy = ox - rep.x, oy - rep.y
        along = math.cos(angle) * dx + math.sin(angle) * dy
        off = abs(-math.sin(angle) * dx + math.cos(angle) * dy)
        if along > 0 and off < 0.05:
            clear = min(clear, along - 0.1)
    return clear


def _project(report, chart: Chart):
    if report.chart is chart:
        return report.x, report.y
    r2 = report.x ** 2 + report.y ** 2
    if r2 < 1e-12:
        return None, None
    return report.x / r2, report.y / r2


def _bisect_cycle(integrator, rep, ray, z0, d0, z1, d1, cfg) -> float | None:
    for _ in range(48):
        zm = 0.5 * (z0 + z1)
        gm = _return_map(integrator, rep, ray, zm, cfg)
        if gm is None:
            return None
        dm = gm - zm
        if abs(dm) < 1e-13 or (z1 - z0) < 1e-12:
            return zm
        if (dm < 0) == (d0 < 0):
            z0, d0 = zm, dm
        else:
            z1, d1 = zm, dm
    return 0.5 * (z0 + z1)


def _extract_cycle(v, integrator, rep, ray, z_star, cfg, cycle_id) -> LimitCycle | None:
    f = integrator.fields[rep.chart]
    sx = rep.x + z_star * math.cos(ray.angle)
    sy = rep.y + z_star * math.sin(ray.angle)
    vx = f.p.evaluate(sx, sy)
    vy = f.q.evaluate(sx, sy)
    nv = math.hypot(vx, vy)
    if nv < 1e-300:
        return None
    h = 1e-8 * max(1.0, z_star)
    res = integrator.run(
        SpherePoint(rep.chart, sx + h * vx / nv, sy + h * vy / nv),
        forward=True, ray=ray, s_max=140.0, record=True, max_seg=0.02,
    )
    if res.status != "ray":
        return None
    residual = abs(res.ray_z - z_star)
    pts = []
    for chart_val, x, y in res.samples:
        if chart_val == Chart.FINITE.value:
            pts.append((x, y))
        else:
            r2 = x * x + y * y
            if r2 > 1e-12:
                pts.append((x / r2, y / r2))
    poly = np.array(pts)
    if len(poly) < 8:
        return None
    poly = resample_closed(poly, max(192, min(len(poly), 512)))
    # side marks from displacement signs just off the cycle
    delta = max(1e-5, 8.0 * residual, 1e-4 * z_star)
    g_in = _return_map(integrator, rep, ray, z_star - delta, cfg)
    g_out = _return_map(integrator, rep, ray, z_star + delta, cfg)
    x_in = rep.x + (z_star - delta) * math.cos(ray.angle)
    y_in = rep.y + (z_star - delta) * math.sin(ray.angle)
    fx, fy = _chart_pt(rep.chart, x_in, y_in)
    inner_is_minus = point_in_polygon(poly, fx, fy)
    side_minus = EMPTY
    side_plus = EMPTY
    if g_in is not None:
        side_minus = OMEGA if g_in > z_star - delta else ALPHA
    if g_out is not None:
        side_plus = OMEGA if g_out < z_star + delta else ALPHA
    if inner_is_minus:
        side_inner, side_outer = side_minus, side_plus
    else:
        side_inner, side_outer = side_plus, side_minus
    if side_inner == EMPTY and side_outer == EMPTY:
        return None
    return LimitCycle(cycle_id, poly, res.time_elapsed, side_inner, side_outer,
                      residual)


def _chart_pt(chart: Chart, x: float, y: float):
    if chart is Chart.FINITE:
        return x, y
    r2 = x * x + y * y
    return (x / r2, y / r2) if r2 > 1e-12 else (1e9, 1e9)


def _same_cycle(a: LimitCycle, b: LimitCycle) -> bool:
    step = max(1, len(a.points) // 12)
    tol = 0.02 * max(a.scale(), b.scale(), 0.1)
    for x, y in a.points[::step]:
        d, _, _, _ = nearest_on_polyline(b.points, float(x), float(y), closed=True)
        if d > tol:
            return False
    return True


# ---------------------------------------------------------------------------
# separatrix tracing
# ---------------------------------------------------------------------------

def trace_separatrices(integrator: SphereIntegrator,
                       reports: list[SingularPointReport],
                       cycles: list[LimitCycle],
                       cfg: RunConfig) -> list[Separatrix]:
    terminals: list = [r.terminal(cfg) for r in reports]
    for c in cycles:
        terminals.append(_cycle_collar_terminal(c, reports))
    by_id = {r.point_id: r for r in reports}
    raw = []
    for rep in reports:
        if rep.kind != "characteristic":
            continue
        for germ_index, germ in enumerate(rep.germs):
            raw.append(_trace_one(integrator, rep, germ_index, germ,
                                  germ.outgoing or germ.loop,
                                  terminals, by_id, cfg))
            if germ.loop:
                raw.append(_trace_one(integrator, rep, germ_index, germ, False,
                                      terminals, by_id, cfg))
    raw = [t for t in raw if t is not None]
    merged: list[Separatrix] = []
    for t in raw:
        dup = next((m for m in merged if _same_separatrix(m, t)), None)
        if dup is None:
            t.sep_id = len(merged)
            merged.append(t)
        else:
            # the second trace certifies the other end's hyperbolic flag
            for mine, theirs in ((dup.alpha_end, t.alpha_end),
                                 (dup.omega_end, t.omega_end)):
                mine.hyperbolic_boundary = mine.hyperbolic_boundary or theirs.hyperbolic_boundary
    return merged


def _cycle_collar_terminal(cycle: LimitCycle, reports) -> CollarTerminal:
    scale = cycle.scale()
    band = 0.05 * scale
    for rep in reports:
        fx, fy = _project(rep, Chart.FINITE)
        if fx is None:
            continue
        d, _, _, _ = nearest_on_polyline(cycle.points, fx, fy, closed=True)
        band = min(band, 0.45 * d)
    ccw = signed_area(cycle.points) > 0
    # left of travel is the interior for a counterclockwise polyline
    inner_side = 0 if ccw else 1
    fwd = [False, False]
    bwd = [False, False]
    inner_omega = cycle.side_inner == OMEGA
    outer_omega = cycle.side_outer == OMEGA
    fwd[inner_side] = inner_omega
    fwd[1 - inner_side] = outer_omega
    bwd[inner_side] = cycle.side_inner == ALPHA
    bwd[1 - inner_side] = cycle.side_outer == ALPHA
    poly = cycle.points
    if len(poly) > 256:
        poly = resample_closed(poly, 256)
    return CollarTerminal(cycle.cycle_id, "cycle", poly, band,
                          tuple(fwd), tuple(bwd))


def _trace_one(integrator, rep, germ_index, germ, forward, terminals, by_id, cfg):
    launch = SpherePoint(rep.chart, *germ.launch)
    res = integrator.run(
        launch, forward=forward,
        terminals=terminals,
        s_max=cfg.t_max, record=True, max_seg=0.04,
    )
    near = SeparatrixEnd("point", rep.point_id, germ_index, True)
    if res.status == "point":
        target = by_id.get(res.terminal_id)
        if target is not None and target.monodromic:
            far = SeparatrixEnd("point", res.terminal_id, None, False, spiral=True)
        else:
            far = SeparatrixEnd(
                "point", res.terminal_id,
                res.germ_match.index if res.germ_match else None,
                res.germ_match is not None)
    elif res.status == "collar":
        far = SeparatrixEnd("cycle", res.terminal_id, None, False, spiral=True)
    else:
        far = SeparatrixEnd("unknown", None, None, False)
    samples = res.samples
    if forward:
        alpha_end, omega_end = near, far
    else:
        alpha_end, omega_end = far, near
        samples = samples[::-1]
    sep = Separatrix(-1, samples, alpha_end, omega_end, ambiguous=res.ambiguous)
    sep.nice = _is_nice(sep)
    return sep


def _is_nice(sep: Separatrix) -> bool:
    """Nice iff both ends are singular points reached in a definite direction.

    An end at a focus, limit cycle, or polycycle spirals, so its germ is not
    C1-extendable; an end at a characteristic point approaches along a ray.
    """
    for end in (sep.alpha_end, sep.omega_end):
        if end.kind != "point" or end.spiral:
            return False
    return True


def _same_separatrix(a: Separatrix, b: Separatrix) -> bool:
    ka = (a.alpha_end.kind, a.alpha_end.obj_id, a.alpha_end.germ_index)
    kb = (b.alpha_end.kind, b.alpha_end.obj_id, b.alpha_end.germ_index)
    oa = (a.omega_end.kind, a.omega_end.obj_id, a.omega_end.germ_index)
    ob = (b.omega_end.kind, b.omega_end.obj_id, b.omega_end.germ_index)
    if ka != kb or oa != ob:
        return False
    if ka[2] is None or oa[2] is None:
        return False
    pa = a.finite_polyline()
    pb = b.finite_polyline()
    if len(pa) < 2 or len(pb) < 2:
        return True
    mid = pa[len(pa) // 2]
    d, _, _, _ = nearest_on_polyline(pb, float(mid[0]), float(mid[1]))
    return d < 0.05


# ---------------------------------------------------------------------------
# polycycles
# ---------------------------------------------------------------------------

def detect_polycycles(separatrices: list[Separatrix],
                      reports: list[SingularPointReport],
                      integrator: SphereIntegrator,
                      cfg: RunConfig) -> list[Polycycle]:
    """Cycles of the continuation relation on co-oriented separatrices."""
    by_id = {r.point_id: r for r in reports}
    candidates = [s for s in separatrices
                  if s.alpha_end.kind == "point" and s.omega_end.kind == "point"
                  and s.alpha_end.germ_index is not None
                  and s.omega_end.germ_index is not None]
    if any(s.ambiguous for s in separatrices):
        raise AmbiguousConnection(
            "a saddle connection matched only inside the guard band")
    nodes = [(s.sep_id, side) for s in candidates for side in ("left", "right")]
    step = {}
    for s in candidates:
        for side in ("left", "right"):
            nxt = _continuation(s, side, candidates, by_id)
            if nxt is not None:
                step[(s.sep_id, side)] = nxt
    seen: set = set()
    polys: list[Polycycle] = []
    for node in nodes:
        if node in seen or node not in step:
            continue
        chain = [node]
        chain_set = {node}
        cur = node
        closed = False
        while True:
            cur = step.get(cur)
            if cur is None:
                break
            if cur == chain[0]:
                closed = True
                break
            if cur in chain_set:
                break
            chain.append(cur)
            chain_set.add(cur)
        seen.update(chain)
        if not closed:
            continue
        canon = min(range(len(chain)), key=lambda k: chain[k])
        chain = chain[canon:] + chain[:canon]
        if any(polys and set(chain) == set(p.separatrices) for p in polys):
            continue
        sep_map = {s.sep_id: s for s in candidates}
        vertices = [sep_map[sid].omega_end.obj_id for sid, _ in chain]
        kind = _polycycle_kind(chain, sep_map, by_id, integrator, cfg)
        polys.append(Polycycle(len(polys), vertices, chain, kind))
    return polys


def _continuation(sep: Separatrix, side: str, candidates, by_id):
    """The unique continuation of a co-oriented separatrix, if any."""
    target = by_id.get(sep.omega_end.obj_id)
    if target is None or target.kind != "characteristic":
        return None
    pairs = _h_sector_pairs(target)
    in_idx = sep.omega_end.germ_index
    # the sector adjacent to the arrival germ on the chosen side:
    # left of the arriving trajectory = clockwise side of the germ ray
    want_ccw = side == "right"
    for lo_idx, hi_idx in pairs:
        roles = {}
        for idx in (lo_idx, hi_idx):
            g = target.germs[idx]
            if g.loop:
                roles.setdefault("in", idx)
                roles.setdefault("out", idx)
            elif g.outgoing:
                roles.setdefault("out", idx)
            else:
                roles.setdefault("in", idx)
        if roles.get("in") != in_idx:
            continue
        # sector spans counterclockwise from germ lo to germ hi
        sector_ccw_of_arrival = (in_idx == lo_idx)
        if sector_ccw_of_arrival != want_ccw:
            continue
        out_idx = roles.get("out")
        if out_idx is None:
            continue
        nxt = next((s for s in candidates
                    if s.alpha_end.obj_id == target.point_id
                    and s.alpha_end.germ_index == out_idx), None)
        if nxt is None:
            return None
        # side of the next separatrix: the shared sector must be on its
        # positive side; leaving along germ out, the sector counterclockwise
        # of the departure ray is on the trajectory's left
        sector_ccw_of_departure = (out_idx == lo_idx)
        nxt_side = "left" if sector_ccw_of_departure else "right"
        return (nxt.sep_id, nxt_side)
    return None


def _h_sector_pairs(report: SingularPointReport) -> list[tuple[int, int]]:
    """Indices of the (lo, hi) boundary germs of each hyperbolic sector.

    Germ order follows the counterclockwise angular order at the point; the
    sector between consecutive germs is hyperbolic when the sector list says
    so.  Elementary saddles carry implicit [H, H, H, H] structure.
    """
    n = len(report.germs)
    if n == 0:
        return []
    order = sorted(range(n), key=lambda k: report.germs[k].angle % (2 * math.pi))
    pairs = []
    if report.sector_spans and report.oval is not None:
        # spans carry oval arc positions; germ launch points sit on boundaries
        germ_arc = []
        for k in order:
            g = report.germs[k]
            ang = g.angle % (2 * math.pi)
            germ_arc.append((ang, k))
        spans = report.sector_spans
        for kind, lo, hi in spans:
            if kind != "H":
                continue
            lo_pt = report.oval.position(lo % report.oval.total_arc)
            hi_pt = report.oval.position(hi % report.oval.total_arc)
            lo_ang = math.atan2(lo_pt[1] - report.y, lo_pt[0] - report.x) % (2 * math.pi)
            hi_ang = math.atan2(hi_pt[1] - report.y, hi_pt[0] - report.x) % (2 * math.pi)
            lo_idx = min(range(n), key=lambda k: _ang_gap(report.germs[k].angle, lo_ang))
            hi_idx = min(range(n), key=lambda k: _ang_gap(report.germs[k].angle, hi_ang))
            if lo_idx != hi_idx:
                pairs.append((lo_idx, hi_idx))
        return pairs
    # elementary saddle: every consecutive germ pair bounds a hyperbolic sector
    if report.sectors == ["H"] * 4 and n == 4:
        for i in range(4):
            pairs.append((order[i], order[(i + 1) % 4]))
    return pairs


def _ang_gap(a: float, b: float) -> float:
    d = (a - b) % (2 * math.pi)
    return min(d, 2 * math.pi - d)


def _polycycle_kind(chain, sep_map, by_id, integrator, cfg) -> str:
    """Classify the monodromy on a positive-side transversal."""
    sep_id, side = chain[0]
    sep = sep_map[sep_id]
    poly = sep.finite_polyline()
    if len(poly) < 4:
        raise UnresolvedDegeneracy("polycycle separatrix without geometry")
    mid_idx = len(poly) // 2
    p0 = poly[mid_idx]
    p1 = poly[min(mid_idx + 1, len(poly) - 1)]
    tx, ty = p1[0] - p0[0], p1[1] - p0[1]
    tn = math.hypot(tx, ty)
    if tn < 1e-12:
        raise UnresolvedDegeneracy("degenerate transversal on a polycycle")
    # left normal of travel
    nx, ny = -ty / tn, tx / tn
    if side == "right":
        nx, ny = -nx, -ny
    angle = math.atan2(ny, nx)
    scale = 0.05 * max(1.0, math.hypot(p0[0], p0[1]))
    ray = Ray(Chart.FINITE, float(p0[0]), float(p0[1]), angle,
              z_min=1e-6, z_max=3.0 * scale)
    disps = []
    for frac in (0.2, 0.35, 0.5):
        z = scale * frac
        sx = p0[0] + z * nx
        sy = p0[1] + z * ny
        f = integrator.fields[Chart.FINITE]
        vx = f.p.evaluate(sx, sy)
        vy = f.q.evaluate(sx, sy)
        nv = math.hypot(vx, vy)
        if nv < 1e-300:
            continue
        h = 1e-8
        res = integrator.run(
            SpherePoint(Chart.FINITE, sx + h * vx / nv, sy + h * vy / nv),
            forward=True, ray=ray, s_max=220.0, record=False,
        )
        if res.status == "ray":
            disps.append(res.ray_z - z)
    if not disps:
        raise UnresolvedDegeneracy("polycycle monodromy map could not be evaluated")
    tol = cfg.center_displacement * 100.0
    vertex = by_id.get(sep.omega_end.obj_id)
    witness = vertex is not None and exact_symmetry_witness(
        integrator.fields[vertex.chart], vertex.x, vertex.y)
    if all(abs(d) < tol for d in disps):
        if witness:
            return ZERO
        raise UnresolvedDegeneracy(
            "identity-like polycycle monodromy without a symmetry witness")
    if all(d < 0 for d in disps):
        return OMEGA
    if all(d > 0 for d in disps):
        return ALPHA
    raise UnresolvedDegeneracy("polycycle monodromy with mixed displacement signs")


# ---------------------------------------------------------------------------
# nests
# ---------------------------------------------------------------------------

def find_nests(cycles: list[LimitCycle],
               reports: list[SingularPointReport]) -> tuple[list[Nest], dict]:
    """Maximal nests and the nest-count certificate.

    A covering pair of cycles with no singular point between them opens a
    nest; maximal chains of such pairs are the maximal nests.
    """
    n = len(cycles)
    inside = [[False] * n for _ in range(n)]
    for i, a in enumerate(cycles):
        for j, b in enumerate(cycles):
            if i != j:
                x, y = a.points[0]
                inside[i][j] = b.contains(float(x), float(y))
    finite_pts = [(r.x, r.y) for r in reports if r.chart is Chart.FINITE]

    def annulus_clear(inner: int, outer: int) -> bool:
        for (px, py) in finite_pts:
            if cycles[outer].contains(px, py) and not cycles[inner].contains(px, py):
                return False
        return True

    covers: dict[int, int] = {}
    for i in range(n):
        parents = [j for j in range(n) if inside[i][j]]
        if not parents:
            continue
        direct = min(parents, key=lambda j: sum(inside[k][j] for k in range(n)))
        if annulus_clear(i, direct):
            covers[i] = direct
    # chains of covering edges are the nest towers
    nests: list[Nest] = []
    used_edges = set()
    for start in sorted(covers):
        if start in used_edges:
            continue
        if any(covers.get(k) == start for k in covers):
            continue  # not the innermost of its chain
        chain = [start]
        while chain[-1] in covers:
            used_edges.add(chain[-1])
            chain.append(covers[chain[-1]])
        if len(chain) >= 2:
            nests.append(Nest(chain[0], chain[-1], chain[1:-1]))
    belong = set()
    for nest in nests:
        belong.add(nest.inner_cycle)
        belong.add(nest.outer_cycle)
        belong.update(nest.contained_cycles)
    un_nested = [c.cycle_id for c in cycles if c.cycle_id not in belong]
    count = len(nests) + len(un_nested)
    bound = len(finite_pts)
    cert = {
        "certificate": "nest-inequality",
        "maximal_nests": len(nests),
        "unnested_cycles": len(un_nested),
        "singular_points": bound,
        "pass": count <= bound,
    }
    if not cert["pass"]:
        raise InequalityViolation(
            f"nest inequality failed: {count} > {bound}")
    return nests, cert


# ---------------------------------------------------------------------------
# contact-free cycles
# ---------------------------------------------------------------------------

def build_contact_free_cycles(integrator: SphereIntegrator,
                              reports: list[SingularPointReport],
                              cycles: list[LimitCycle],
                              polycycles: list[Polycycle],
                              separatrices: list[Separatrix],
                              cfg: RunConfig) -> list[ContactFreeCycle]:
    """Transversal collars for foci, cycle sides, and alpha/omega polycycles."""
    out: list[ContactFreeCycle] = []
    avoid_polys = [s.finite_polyline() for s in separatrices if s.nice and len(s.samples) > 1]
    avoid_polys += [c.points for c in cycles]

    def clearance(px, py, skip_point=None):
        best = math.inf
        for rep in reports:
            if skip_point is not None and rep.point_id == skip_point:
                continue
            fx, fy = _project(rep, Chart.FINITE)
            if fx is None:
                continue
            best = min(best, math.hypot(px - fx, py - fy))
        for poly in avoid_polys:
            if len(poly) > 1:
                d, _, _, _ = nearest_on_polyline(poly, px, py)
                best = min(best, d)
        return best

    for rep in reports:
        if rep.kind != "focus":
            continue
        circle = _focus_contact_circle(integrator, rep, cfg, clearance)
        if circle is not None:
            pts, trans = circle
            out.append(ContactFreeCycle(len(out), "focus", rep.point_id, pts, trans))
        else:
            raise CollarTooTight(f"no transversal circle around focus {rep.point_id}")

    for cyc in cycles:
        for side_name, removed in (("inner", "outer"), ("outer", "inner")):
            if cyc.removed_side == side_name:
                continue
            mark = cyc.side_inner if side_name == "inner" else cyc.side_outer
            if mark == EMPTY:
                continue
            collar = _cycle_offset_collar(integrator, cyc, side_name, cfg)
            if collar is None:
                raise CollarTooTight(
                    f"no transversal offset on {side_name} side of cycle {cyc.cycle_id}")
            pts, trans = collar
            out.append(ContactFreeCycle(len(out), f"cycle-{side_name}",
                                        cyc.cycle_id, pts, trans))

    sep_map = {s.sep_id: s for s in separatrices}
    for poly in polycycles:
        if poly.limit_kind == ZERO:
            continue
        collar = _polycycle_collar(integrator, poly, sep_map, cfg)
        if collar is None:
            raise CollarTooTight(f"no transversal collar for polycycle {poly.poly_id}")
        pts, trans = collar
        out.append(ContactFreeCycle(len(out), "polycycle", poly.poly_id, pts, trans))
    return out


def _transversality(integrator: SphereIntegrator, poly: np.ndarray) -> float:
    f = integrator.fields[Chart.FINITE]
    worst = math.inf
    n = len(poly)
    for k in range(n):
        x, y = poly[k]
        nx_, ny_ = poly[(k + 1) % n]
        tx, ty = nx_ - x, ny_ - y
        tn = math.hypot(tx, ty)
        if tn < 1e-15:
            continue
        vx = f.p.evaluate(float(x), float(y))
        vy = f.q.evaluate(float(x), float(y))
        vn = math.hypot(vx, vy)
        if vn < 1e-300:
            return 0.0
        worst = min(worst, abs(tx * vy - ty * vx) / (tn * vn))
    return worst


def _focus_contact_circle(integrator, rep, cfg, clearance):
    """A small transversal circle around a focus, in its own chart.

    The polyline is stored projected to the finite chart (a focus at the
    pole yields a large finite-chart circle).
    """
    if rep.chart is Chart.FINITE:
        r = min(0.5 * clearance(rep.x, rep.y, skip_point=rep.point_id),
                0.4 * rep.local_scale)
    else:
        r = 0.3
    r = max(min(r, 1.0), 1e-4)
    for _ in range(18):
        angles = np.linspace(0.0, 2 * math.pi, 96, endpoint=False)
        pts = np.stack([rep.x + r * np.cos(angles),
                        rep.y + r * np.sin(angles)], axis=1)
        if rep.chart is Chart.INFINITE:
            r2 = pts[:, 0] ** 2 + pts[:, 1] ** 2
            pts = pts / r2[:, None]
        if signed_area(pts) < 0:
            pts = pts[::-1].copy()
        trans = _transversality(integrator, pts)
        ok_clear = True
        if rep.chart is Chart.FINITE:
            ok_clear = all(clearance(float(px), float(py), skip_point=rep.point_id)
                           > 0.2 * r for px, py in pts[::8])
        if trans > cfg.transversality_floor and ok_clear:
            return pts, trans
        r *= 0.65
    return None


def _cycle_offset_collar(integrator, cyc: LimitCycle, side_name: str, cfg):
    ccw = signed_area(cyc.points) > 0
    # positive offset goes left of travel = inside for counterclockwise
    sign = 1.0 if (side_name == "inner") == ccw else -1.0
    scale = cyc.scale()
    d = 0.08 * scale
    base = resample_closed(cyc.points, 192)
    for _ in range(16):
        pts = offset_closed_polyline(base, sign * d)
        if signed_area(pts) < 0:
            pts = pts[::-1].copy()
        trans = _transversality(integrator, pts)
        if trans > cfg.transversality_floor:
            return pts, trans
        d *= 0.6
    return None


def _polycycle_collar(integrator, poly: Polycycle, sep_map, cfg):
    chains = []
    for sid, side in poly.separatrices:
        chains.append(sep_map[sid].finite_polyline())
    if not chains:
        return None
    loop = np.vstack(chains)
    base = resample_closed(loop, 256)
    inward = 1.0 if signed_area(base) > 0 else -1.0
    first_side = poly.separatrices[0][1]
    sign = inward if first_side == "left" else -inward
    d = 0.05 * float(np.max(np.abs(base)))
    for _ in range(14):
        pts = offset_closed_polyline(base, sign * d)
        if signed_area(pts) < 0:
            pts = pts[::-1].copy()
        trans = _transversality(integrator, pts)
        if trans > cfg.transversality_floor:
            return pts, trans
        d *= 0.6
    return None


# ---------------------------------------------------------------------------
# truncation of nasty separatrices (the large-graph contract)
# ---------------------------------------------------------------------------

def truncate_nasty(separatrices: list[Separatrix],
                   contacts: list[ContactFreeCycle]) -> list[dict]:
    """Cut each nasty separatrix at its unique contact-cycle crossing.

    Returns crossing records; raises if the single-crossing contract fails.
    """
    records = []
    for sep in separatrices:
        if sep.nice:
            continue
        if sep.alpha_end.kind == "unknown" or sep.omega_end.kind == "unknown":
            continue
        poly = sep.finite_polyline()
        if len(poly) < 2:
            continue
        hits = []
        for contact in contacts:
            crossings = polyline_crossings(poly, contact.points, closed_b=True)
            for (i, s, j, t, pt) in crossings:
                hits.append((contact.contact_id, i, s, pt))
        if len(hits) != 1:
            raise UnresolvedDegeneracy(
                f"nasty separatrix {sep.sep_id} crosses contact cycles "
                f"{len(hits)} times; expected exactly one")
        contact_id, seg, s, pt = hits[0]
        sep.truncated_at = (float(pt[0]), float(pt[1]))
        sep.contact_id = contact_id
        records.append({"sep_id": sep.sep_id, "contact_id": contact_id,
                        "point": [float(pt[0]), float(pt[1])]})
    return records

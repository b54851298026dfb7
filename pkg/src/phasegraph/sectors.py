"""Sector decomposition of degenerate singular points via level-oval tangencies.

The neighborhood of a characteristic point splits into hyperbolic, elliptic
and parabolic sectors.  Working on a small oval of R = P^2 + Q^2 around the
point, orbits launched from oval samples are classified by whether each time
direction ends at the point, and sector boundaries (separatrix crossings) are
localized by jumps in where neighbouring orbits leave the neighborhood.
Hyperbolic and elliptic sectors each carry at least one odd tangency of the
field with the oval, which pins the complexity count to the tangency census.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .chart import Chart, SpherePoint
from .config import RunConfig
from .errors import EpsilonTooLarge, UnresolvedDegeneracy
from .integrate import PointTerminal, SphereIntegrator
from .oval import Oval, OvalTraceError, tangency_points, trace_oval
from .poly import BiPoly, VectorField, directional_derivative


@dataclass
class GermSpec:
    """Launch data for one separatrix germ found on the oval."""

    angle: float                      # direction from the point, local chart
    outgoing: bool
    launch: tuple[float, float]       # point on the separatrix (local chart)
    loop: bool = False                # boundary of an elliptic sector


@dataclass
class SectorAnalysis:
    kind: str                         # "characteristic" | "monodromic"
    sectors: list[str]                # cyclic H/E/P list (characteristic only)
    complexity: int
    germs: list[GermSpec]
    eps: float
    oval: Oval
    tangency_arcs: list[float]
    stability: str | None = None      # uniform in/out flow ("attracting"/"repelling")
    angular_floor: float = 0.0        # min normalized angular speed on the oval


# -- eps selection -----------------------------------------------------------


def select_oval(local: VectorField, x: float, y: float, base_scale: float,
                cfg: RunConfig, avoid: list[tuple[float, float]]) -> Oval:
    """Pick eps and trace the level oval, shrinking on failure.

    Starts from the smaller of the squared-distance heuristic and the actual
    minimum of R on the probe circle, then halves, up to the retry budget.
    """
    r_poly = local.p * local.p + local.q * local.q
    r_star = base_scale / 4.0
    circle_min = min(
        r_poly.evaluate(x + r_star * math.cos(2 * math.pi * k / 64),
                        y + r_star * math.sin(2 * math.pi * k / 64))
        for k in range(64)
    )
    eps = min(r_star * r_star, 0.9 * circle_min)
    if eps <= 0:
        raise EpsilonTooLarge("probe circle touches the zero set")
    last_err: Exception | None = None
    for _ in range(cfg.eps_retries):
        try:
            oval = trace_oval(r_poly, eps, x, y, r_bound=4.0 * r_star)
        except OvalTraceError as exc:
            last_err = exc
            eps *= 0.5
            continue
        if any(_poly_contains(oval, ax, ay) for ax, ay in avoid):
            eps *= 0.5
            last_err = EpsilonTooLarge("oval encloses a foreign singular point")
            continue
        return oval
    raise EpsilonTooLarge(f"no admissible oval after retries: {last_err}")


def _poly_contains(oval: Oval, ax: float, ay: float) -> bool:
    from .geom import point_in_polygon

    return point_in_polygon(oval.points, ax, ay)


# -- orbit classing ------------------------------------------------------------


@dataclass
class _Sample:
    s: float                          # arc position on the oval
    label: str                        # "LOOP" | "IN" | "OUT" | "PASS" | "U"
    fwd_sig: tuple
    bwd_sig: tuple
    min_dist: float = math.inf        # closest approach of either orbit to the point


class SectorEngine:
    def __init__(self, integrator: SphereIntegrator, local_chart: Chart,
                 point_id: int, x: float, y: float, cfg: RunConfig,
                 terminals: list[PointTerminal], far_radius: float,
                 capture_radius: float):
        self.integ = integrator
        self.chart = local_chart
        self.point_id = point_id
        self.x = x
        self.y = y
        self.cfg = cfg
        self.far_radius = far_radius
        self.self_terminal = PointTerminal(
            point_id, local_chart, x, y, capture_radius, "both")
        self.terminals = [self.self_terminal] + [
            t for t in terminals if t.point_id != point_id]
        # the pole of the compactification is always a singular point; give
        # stray orbits heading there a terminal even when the caller has not
        # classified it yet
        if not any(t.chart is Chart.INFINITE and math.hypot(t.x, t.y) < 1e-9
                   for t in self.terminals):
            self.terminals.append(PointTerminal(
                -1, Chart.INFINITE, 0.0, 0.0, 0.02, "both"))
        self._cache: dict[float, _Sample] = {}

    # orbit end signature: kind plus an angle or object id
    def _one_direction(self, px: float, py: float, forward: bool):
        res = self.integ.run(
            SpherePoint(self.chart, px, py),
            forward=forward,
            terminals=self.terminals,
            s_max=60.0,
            record=True,
            max_seg=0.1,
        )
        m = self._min_dist(res.samples)
        if res.status == "point" and res.terminal_id == self.point_id:
            # loops in adjacent elliptic sectors differ in traversal
            # orientation or in the germ they arrive along
            ex, ey = _project_to(self.chart, res.end)
            arrive = math.atan2(ey - self.y, ex - self.x) if ex is not None else 0.0
            orient = self._loop_orientation(res.samples)
            return "p", ("loop", arrive, orient), 0.0
        if res.status == "point":
            term = next(t for t in self.terminals if t.point_id == res.terminal_id)
            tx, ty = _project_to(term.chart, res.end)
            ang = math.atan2(ty - term.y, tx - term.x) if tx is not None else 0.0
            return "obj", ("objp", res.terminal_id, ang), m
        if res.status == "collar":
            return "obj", ("objc", res.terminal_id), m
        # budget ran out: an orbit parked far from the point has left its
        # sector structure for good; one still nearby is undecided
        ex, ey = _project_to(self.chart, res.end)
        if ex is not None and math.hypot(ex - self.x, ey - self.y) < self.far_radius:
            return "unknown", ("unknown",), m
        ang = math.atan2(ey - self.y, ex - self.x) if ex is not None else 0.0
        return "far", ("far", ang), m

    def _apex_angle(self, samples) -> float:
        best = (0.0, -1.0)
        for chart_val, sx, sy in samples:
            px, py = _chart_to_chart(chart_val, sx, sy, self.chart)
            if px is None:
                continue
            d = math.hypot(px - self.x, py - self.y)
            if d > best[1]:
                best = (math.atan2(py - self.y, px - self.x), d)
        return best[0]

    def _loop_orientation(self, samples) -> int:
        """Sign of the signed area swept by the orbit polyline around the point."""
        area = 0.0
        prev = None
        for chart_val, sx, sy in samples:
            px, py = _chart_to_chart(chart_val, sx, sy, self.chart)
            if px is None:
                continue
            if prev is not None:
                area += (prev[0] - self.x) * (py - self.y) - (prev[1] - self.y) * (px - self.x)
            prev = (px, py)
        return 1 if area > 0 else -1 if area < 0 else 0

    def _min_dist(self, samples) -> float:
        """Closest approach of the recorded orbit to the point (segment-wise)."""
        best = math.inf
        prev = None
        for chart_val, sx, sy in samples:
            px, py = _chart_to_chart(chart_val, sx, sy, self.chart)
            if px is None:
                prev = None
                continue
            if prev is not None:
                best = min(best, _point_segment_dist(self.x, self.y, prev, (px, py)))
            else:
                best = min(best, math.hypot(px - self.x, py - self.y))
            prev = (px, py)
        return best

    def classify(self, oval: Oval, s: float) -> _Sample:
        if s in self._cache:
            return self._cache[s]
        px, py = oval.position(s)
        fkind, fsig, fm = self._one_direction(px, py, True)
        bkind, bsig, bm = self._one_direction(px, py, False)
        if fkind == "unknown" or bkind == "unknown":
            label = "U"
        elif fkind == "p" and bkind == "p":
            label = "LOOP"
        elif fkind == "p":
            label = "IN"
        elif bkind == "p":
            label = "OUT"
        else:
            label = "PASS"
        sample = _Sample(s, label, fsig, bsig, min(fm, bm))
        self._cache[s] = sample
        return sample

    def signature_jump(self, a: _Sample, b: _Sample, thresh: float = 0.7) -> bool:
        both_loops = a.label == "LOOP" and b.label == "LOOP"
        return (_sig_jump(a.fwd_sig, b.fwd_sig, thresh, both_loops)
                or _sig_jump(a.bwd_sig, b.bwd_sig, thresh, both_loops))


def _sig_jump(sa: tuple, sb: tuple, thresh: float, orientation_counts: bool = False) -> bool:
    if sa[0] != sb[0]:
        return True
    if sa[0] == "far":
        return _angle_dist(sa[1], sb[1]) > thresh
    if sa[0] == "loop":
        # traversal orientation is meaningful only for genuine loops; for
        # one-sided arrivals the swept-area sign is noise
        if orientation_counts and sa[2] != sb[2]:
            return True
        return _angle_dist(sa[1], sb[1]) > thresh
    if sa[0] == "objp":
        return sa[1] != sb[1] or _angle_dist(sa[2], sb[2]) > thresh
    if sa[0] == "objc":
        return sa[1:] != sb[1:]
    return False


def _angle_dist(a: float, b: float) -> float:
    d = (a - b) % (2 * math.pi)
    return min(d, 2 * math.pi - d)


def _point_segment_dist(qx: float, qy: float, a: tuple[float, float],
                        b: tuple[float, float]) -> float:
    ax, ay = a
    bx, by = b
    dx, dy = bx - ax, by - ay
    len2 = dx * dx + dy * dy
    if len2 <= 0.0:
        return math.hypot(qx - ax, qy - ay)
    t = max(0.0, min(1.0, ((qx - ax) * dx + (qy - ay) * dy) / len2))
    return math.hypot(qx - ax - t * dx, qy - ay - t * dy)


def _project_to(chart: Chart, pt: SpherePoint):
    return _chart_to_chart(pt.chart.value, pt.x, pt.y, chart)


def _chart_to_chart(chart_val: int, x: float, y: float, target: Chart):
    if chart_val == target.value:
        return x, y
    r2 = x * x + y * y
    if r2 < 1e-30:
        return None, None
    return x / r2, y / r2


# -- sector reconstruction ------------------------------------------------------


def run_sector_analysis(engine: SectorEngine, oval: Oval, tangencies: list[float],
                        cfg: RunConfig):
    """Build the cyclic sector list, germ launch specs, and sector arc spans."""
    total = oval.total_arc
    n_base = max(cfg.class_samples, 10 * (len(tangencies) + 1))
    positions = set()
    if tangencies:
        # samples concentrated per tangency arc plus a uniform background
        arcs = _arcs(tangencies, total)
        for lo, hi in arcs:
            span = (hi - lo) % total or total
            count = max(6, int(n_base * span / total))
            for k in range(count):
                positions.add((lo + span * (k + 0.5) / count) % total)
    for k in range(n_base):
        positions.add(total * k / n_base)
    ordered = sorted(positions)
    samples = [engine.classify(oval, s) for s in ordered]
    unknown = sum(1 for s in samples if s.label == "U")
    if unknown > 0.2 * len(samples):
        raise UnresolvedDegeneracy(
            f"{unknown}/{len(samples)} orbit classes undecidable at tolerances")
    samples = _fold_unknown(samples)
    samples = _despeckle(samples)
    boundaries = _find_boundaries(engine, oval, samples, cfg)
    boundaries = _merge_boundary_clusters(boundaries, oval, total / n_base)
    for _ in range(3):
        added = _repair_multitangency_spans(engine, oval, samples, boundaries, tangencies)
        if not added:
            break
        boundaries = sorted(boundaries + added, key=lambda b: b.s)
    sectors, germs, spans = _emit_sectors(engine, oval, samples, boundaries, tangencies)
    return sectors, germs, spans


def _repair_multitangency_spans(engine: SectorEngine, oval: Oval,
                                samples: list[_Sample],
                                boundaries: list[_Boundary],
                                tangencies: list[float]) -> list[_Boundary]:
    """Hunt for boundaries hidden inside spans holding several tangencies.

    Hyperbolic and elliptic sectors carry at least one odd tangency each, so
    two tangencies in one passing span usually mean an undetected separatrix
    between them; probe the tangency orbits for an end-signature jump, then
    fall back on a closest-approach dip search.
    """
    if not boundaries or not tangencies:
        return []
    total = oval.total_arc
    added: list[_Boundary] = []
    nb = len(boundaries)
    for i in range(nb):
        lo = boundaries[i].s
        hi = boundaries[(i + 1) % nb].s
        hi_l = hi if hi > lo else hi + total
        inside = sorted(t if t > lo else t + total
                        for t in tangencies if lo < _lift(t, lo, total) < hi_l)
        if len(inside) < 2:
            continue
        span_samples = [s for s in samples if lo < _lift(s.s, lo, total) < hi_l]
        majority = _majority(span_samples) if span_samples else "PASS"
        if majority not in ("PASS", "LOOP"):
            continue
        for t0, t1 in zip(inside, inside[1:]):
            a = engine.classify(oval, t0 % total)
            b = engine.classify(oval, t1 % total)
            bd = None
            if engine.signature_jump(a, b) or a.label != b.label:
                bd = _bisect_boundary(engine, oval, a, t0, b, t1)
            if bd is None:
                mid = engine.classify(oval, (0.5 * (t0 + t1)) % total)
                bd = _refine_dip(engine, oval, a, mid, b)
            if bd is not None and not any(
                    _arc_dist(bd.s, other.s, total) < 1e-3 * total
                    for other in boundaries + added):
                added.append(bd)
    return added


def _bisect_boundary(engine: SectorEngine, oval: Oval, a: _Sample, a_s: float,
                     b: _Sample, b_s: float) -> _Boundary | None:
    total = oval.total_arc
    lo, hi = a, b
    lo_s, hi_s = a_s, b_s
    for _ in range(10):
        if hi_s - lo_s < total * 1e-4:
            break
        mid_s = 0.5 * (lo_s + hi_s)
        mid = engine.classify(oval, mid_s % total)
        if mid.label != lo.label or engine.signature_jump(lo, mid):
            hi, hi_s = mid, mid_s
        else:
            lo, lo_s = mid, mid_s
    if lo.label == hi.label and not engine.signature_jump(lo, hi):
        return None
    return _Boundary(0.5 * (lo_s + hi_s) % total, lo.label, hi.label,
                     _boundary_kind(lo.label, hi.label))


def _merge_boundary_clusters(boundaries: list[_Boundary], oval: Oval,
                             spacing: float) -> list[_Boundary]:
    """Collapse boundary clusters created by the capture ball.

    Orbits passing very close to the point on either side of one separatrix
    reach the capture ball and earn a sliver of non-PASS labels whose edges
    all localize within a couple of sample spacings; a cluster is one
    separatrix, and the sliver labels reveal its time orientation.
    """
    n = len(boundaries)
    if n < 2:
        return boundaries
    total = oval.total_arc
    gaps = [(boundaries[(i + 1) % n].s - boundaries[i].s) % total for i in range(n)]
    link = 1.6 * spacing
    if all(g <= link for g in gaps):
        return boundaries  # unresolvable at this sampling density
    start = next(i for i in range(n) if gaps[i - 1] > link)
    clusters: list[list[_Boundary]] = [[boundaries[start]]]
    idx = start
    for _ in range(n - 1):
        nxt = (idx + 1) % n
        if gaps[idx] <= link:
            clusters[-1].append(boundaries[nxt])
        else:
            clusters.append([boundaries[nxt]])
        idx = nxt
    out: list[_Boundary] = []
    for group in clusters:
        if len(group) == 1:
            out.append(group[0])
            continue
        lift0 = group[0].s
        mean = lift0 + sum((b.s - lift0) % total for b in group) / len(group)
        member_kinds = [b.kind for b in group if b.kind not in ("none", "pass-pass")]
        interior = [b.left_label for b in group[1:]] + [b.right_label for b in group[:-1]]
        flanks_pass = group[0].left_label == "PASS" and group[-1].right_label == "PASS"
        if member_kinds:
            kind = member_kinds[0]
        elif flanks_pass and "IN" in interior:
            kind = "in"
        elif flanks_pass and "OUT" in interior:
            kind = "out"
        elif flanks_pass and "LOOP" in interior:
            kind = "loop"
        elif flanks_pass:
            kind = "pass-pass"
        else:
            kind = "none"
        out.append(_Boundary(mean % total, group[0].left_label,
                             group[-1].right_label, kind))
    return sorted(out, key=lambda b: b.s)


def _arcs(tangencies: list[float], total: float) -> list[tuple[float, float]]:
    out = []
    for i, t in enumerate(tangencies):
        nxt = tangencies[(i + 1) % len(tangencies)]
        if i == len(tangencies) - 1:
            nxt += total
        out.append((t, nxt))
    return out


def _fold_unknown(samples: list[_Sample]) -> list[_Sample]:
    n = len(samples)
    out = list(samples)
    for i, s in enumerate(out):
        if s.label != "U":
            continue
        for off in range(1, n):
            left = out[(i - off) % n]
            if left.label != "U":
                out[i] = _Sample(s.s, left.label, left.fwd_sig, left.bwd_sig)
                break
    return out


def _despeckle(samples: list[_Sample]) -> list[_Sample]:
    n = len(samples)
    if n < 3:
        return samples
    out = list(samples)
    for i in range(n):
        prev = out[(i - 1) % n]
        nxt = out[(i + 1) % n]
        if prev.label == nxt.label != out[i].label:
            out[i] = _Sample(out[i].s, prev.label, prev.fwd_sig, prev.bwd_sig)
    return out


@dataclass
class _Boundary:
    s: float
    left_label: str
    right_label: str
    kind: str          # "in", "out", "loop", "none"


def _find_boundaries(engine: SectorEngine, oval: Oval, samples: list[_Sample],
                     cfg: RunConfig) -> list[_Boundary]:
    n = len(samples)
    out: list[_Boundary] = []
    for i in range(n):
        a = samples[i]
        b = samples[(i + 1) % n]
        label_change = a.label != b.label
        jump = engine.signature_jump(a, b)
        if not label_change and not jump:
            continue
        lo, hi = a, b
        hi_s = b.s if b.s > a.s else b.s + oval.total_arc
        lo_s = a.s
        for _ in range(9):
            if hi_s - lo_s < oval.total_arc * 1e-4:
                break
            mid_s = 0.5 * (lo_s + hi_s)
            mid = engine.classify(oval, mid_s % oval.total_arc)
            if mid.label != lo.label or engine.signature_jump(lo, mid):
                hi, hi_s = mid, mid_s
            else:
                lo, lo_s = mid, mid_s
        # confirm a pure-signature jump survives refinement
        if not label_change and not engine.signature_jump(lo, hi):
            continue
        out.append(_Boundary(
            0.5 * (lo_s + hi_s) % oval.total_arc,
            lo.label, hi.label, _boundary_kind(lo.label, hi.label)))
    out.extend(_dip_boundaries(engine, oval, samples, out))
    out.sort(key=lambda b: b.s)
    # cyclic dedupe: the same crossing can be localized from both flanking gaps
    deduped: list[_Boundary] = []
    for b in out:
        if deduped and _arc_dist(b.s, deduped[-1].s, oval.total_arc) < 5e-4 * oval.total_arc:
            continue
        deduped.append(b)
    if len(deduped) > 1 and _arc_dist(deduped[0].s, deduped[-1].s, oval.total_arc) \
            < 5e-4 * oval.total_arc:
        deduped.pop()
    return deduped


def _dip_boundaries(engine: SectorEngine, oval: Oval, samples: list[_Sample],
                    known: list[_Boundary]) -> list[_Boundary]:
    """Separatrix crossings invisible to end signatures.

    Two hyperbolic sectors can share their exit asymptote (a cusp does), so
    neighbouring orbits end indistinguishably; the crossing still shows up as
    a dip of the orbit's closest approach to the point, which tends to zero
    at the separatrix.  Local minima of that closest approach are refined and
    confirmed when the interior probe orbit reaches the capture ball.
    """
    n = len(samples)
    total = oval.total_arc
    out: list[_Boundary] = []
    finite = [s.min_dist for s in samples if math.isfinite(s.min_dist)]
    if not finite:
        return out
    floor = 0.9 * min(max(x, 1e-300) for x in finite)
    for i in range(n):
        prev, cur, nxt = samples[(i - 1) % n], samples[i], samples[(i + 1) % n]
        if cur.label != "PASS":
            continue
        if not (cur.min_dist <= prev.min_dist and cur.min_dist <= nxt.min_dist):
            continue
        if any(_arc_dist(cur.s, b.s, total) < 3.0 * total / max(n, 1) for b in known + out):
            continue
        bd = _refine_dip(engine, oval, prev, cur, nxt)
        if bd is not None:
            out.append(bd)
    return out


def _refine_dip(engine: SectorEngine, oval: Oval, prev: _Sample, cur: _Sample,
                nxt: _Sample) -> _Boundary | None:
    total = oval.total_arc
    a_s = prev.s
    b_s = cur.s if cur.s > a_s else cur.s + total
    c_s = nxt.s if nxt.s > b_s else nxt.s + total
    best = cur
    m0 = max(cur.min_dist, 1e-300)
    for _ in range(16):
        left_s = 0.5 * (a_s + b_s)
        right_s = 0.5 * (b_s + c_s)
        left = engine.classify(oval, left_s % total)
        right = engine.classify(oval, right_s % total)
        for cand, cand_s in ((left, left_s), (right, right_s)):
            if cand.label in ("IN", "OUT", "LOOP"):
                kind = {"IN": "in", "OUT": "out", "LOOP": "loop"}[cand.label]
                return _Boundary(cand_s % total, "PASS", "PASS", kind)
        if left.min_dist < best.min_dist and left.min_dist <= right.min_dist:
            c_s, b_s = b_s, left_s
            best = left
        elif right.min_dist < best.min_dist:
            a_s, b_s = b_s, right_s
            best = right
        else:
            a_s, c_s = left_s, right_s
        if c_s - a_s < total * 1e-5:
            break
    if best.min_dist < 0.2 * m0 and best.min_dist < 0.5 * oval.min_radius():
        # closest approach keeps collapsing: accept as a separatrix crossing
        probe = engine.classify(oval, best.s % total)
        kind = {"IN": "in", "OUT": "out", "LOOP": "loop"}.get(probe.label, "pass-pass")
        return _Boundary(best.s % total, "PASS", "PASS", kind)
    return None


def _arc_dist(a: float, b: float, total: float) -> float:
    d = (a - b) % total
    return min(d, total - d)


def _boundary_kind(left: str, right: str) -> str:
    pair = {left, right}
    if pair == {"PASS"}:
        return "pass-pass"
    if "PASS" in pair and "IN" in pair:
        return "in"
    if "PASS" in pair and "OUT" in pair:
        return "out"
    if "LOOP" in pair:
        return "loop"
    return "none"


def _emit_sectors(engine: SectorEngine, oval: Oval, samples: list[_Sample],
                  boundaries: list[_Boundary],
                  tangencies: list[float]):
    if not boundaries:
        label = _majority(samples)
        if label in ("PASS", "LOOP"):
            raise UnresolvedDegeneracy(
                f"{label.lower()} orbits with no detectable sector boundary")
        return ["P"], [], [("P", 0.0, oval.total_arc)]
    sectors: list[str] = []
    spans: list[tuple[str, float, float]] = []
    raw_labels: list[str] = []
    germs: list[GermSpec] = []
    nb = len(boundaries)
    for i, bd in enumerate(boundaries):
        nxt = boundaries[(i + 1) % nb]
        lo = bd.s
        hi = nxt.s if nxt.s > bd.s else nxt.s + oval.total_arc
        inside = [s for s in samples if lo < _lift(s.s, lo, oval.total_arc) < hi]
        label = _majority(inside) if inside else bd.right_label
        raw_labels.append(label)
        kind = {"PASS": "H", "LOOP": "E", "IN": "P", "OUT": "P"}.get(label, "P")
        sectors.append(kind)
        spans.append((kind, lo, hi))
    # a germ-less divider between two parabolic spans is sampling noise
    # (arrival-direction spikes inside a node region); fuse those spans
    while nb > 1:
        fuse = next((i for i in range(nb)
                     if boundaries[i].kind in ("none", "pass-pass")
                     and sectors[i] == "P" and sectors[(i - 1) % nb] == "P"
                     and raw_labels[i] == raw_labels[(i - 1) % nb]), None)
        if fuse is None:
            break
        prev = (fuse - 1) % nb
        spans[prev] = ("P", spans[prev][1], spans[fuse][2])
        del boundaries[fuse], sectors[fuse], spans[fuse], raw_labels[fuse]
        nb -= 1
    for i, bd in enumerate(boundaries):
        px, py = oval.position(bd.s)
        ang = math.atan2(py - oval.center[1], px - oval.center[0])
        kind = bd.kind
        if kind in ("none", "pass-pass"):
            # infer the germ from the flavor of the adjacent spans: the
            # boundary orbit of a hyperbolic sector shares the fate of the
            # neighbouring parabolic region when there is one
            left_raw = raw_labels[(i - 1) % nb]
            right_raw = raw_labels[i]
            h_adjacent = "H" in (sectors[(i - 1) % nb], sectors[i])
            flavors = {left_raw, right_raw} - {"PASS"}
            if h_adjacent and flavors == {"IN"}:
                kind = "in"
            elif h_adjacent and flavors == {"OUT"}:
                kind = "out"
            elif h_adjacent and flavors == {"LOOP"}:
                kind = "loop"
            elif h_adjacent and not flavors:
                probe = engine.classify(oval, bd.s)
                kind = {"IN": "in", "OUT": "out", "LOOP": "loop"}.get(probe.label, "in")
            else:
                kind = "skip"
        if kind == "in":
            germs.append(GermSpec(ang, False, (px, py)))
        elif kind == "out":
            germs.append(GermSpec(ang, True, (px, py)))
        elif kind == "loop":
            # a loop orbit is a separatrix only when it bounds a hyperbolic
            # sector; the divider between two elliptic petals is not one
            if "H" in (sectors[(i - 1) % nb], sectors[i]):
                germs.append(GermSpec(ang, False, (px, py), loop=True))
    return sectors, germs, spans


def _lift(s: float, lo: float, total: float) -> float:
    while s <= lo:
        s += total
    return s


def _majority(samples: list[_Sample]) -> str:
    counts: dict[str, int] = {}
    for s in samples:
        counts[s.label] = counts.get(s.label, 0) + 1
    return max(counts, key=lambda k: counts[k]) if counts else "U"

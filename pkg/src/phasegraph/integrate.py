"""Trajectory integration on the compactified sphere.

Orbits are integrated in unit-speed (arc-length) parametrization of the
current chart's field, which keeps progress uniform near degenerate points
where |v| collapses; positive reparametrization preserves orbits and their
time orientation.  The integrator switches charts on leaving the disk of
radius ``switch_out`` and supports three kinds of terminal condition:

* point capture (sink residence or germ alignment at characteristic points),
* collar capture near a known limit cycle or polycycle,
* transversal-ray crossing (for Poincare return maps).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp

from .chart import Chart, SpherePoint
from .config import RunConfig
from .geom import nearest_on_polyline
from .poly import VectorField, compile_poly

_FAR = 1e9


@dataclass(frozen=True)
class Germ:
    """A separatrix direction at a characteristic singular point.

    ``angle`` is the direction from the point (in its own chart), ``outgoing``
    is True when orbits leave the point along it; ``index`` refers back to the
    owning report's germ list.
    """

    angle: float
    outgoing: bool
    index: int = -1


@dataclass
class PointTerminal:
    point_id: int
    chart: Chart
    x: float
    y: float
    capture_radius: float
    style: str                       # "attract", "repel", "germ", "inert"
    germs: tuple[Germ, ...] = ()
    scale: float = 1.0               # local length scale for angle allowances


@dataclass
class CollarTerminal:
    object_id: int
    kind: str                        # "cycle" or "polycycle"
    polyline: np.ndarray             # closed, finite chart
    band: float
    side_forward: tuple[bool, bool] = (True, True)   # (left, right): capture on forward runs
    side_backward: tuple[bool, bool] = (True, True)


@dataclass
class Ray:
    """A radial transversal: points origin + z * (cos a, sin a), z in (0, z_max]."""

    chart: Chart
    ox: float
    oy: float
    angle: float
    z_min: float
    z_max: float


@dataclass
class IntegrationResult:
    status: str                      # "point", "collar", "ray", "budget"
    terminal_id: int | None
    end: SpherePoint
    samples: list[tuple[int, float, float]]
    arc_length: float
    germ_match: Germ | None = None
    germ_residual: float | None = None
    ambiguous: bool = False
    ray_z: float | None = None
    time_elapsed: float = 0.0        # physical time accumulated along the run


def _to_chart(chart_from: Chart, x: float, y: float, chart_to: Chart) -> tuple[float, float]:
    if chart_from is chart_to:
        return x, y
    r2 = x * x + y * y
    if r2 < 1e-30:
        return _FAR, _FAR
    return x / r2, y / r2


class SphereIntegrator:
    def __init__(self, v: VectorField, v_inf: VectorField, cfg: RunConfig):
        self.fields = {Chart.FINITE: v, Chart.INFINITE: v_inf}
        self.cfg = cfg

    # -- right-hand sides ---------------------------------------------------

    def _rhs(self, chart: Chart, sign: float):
        f = self.fields[chart]
        pf = compile_poly(f.p)
        qf = compile_poly(f.q)
        hypot = math.hypot

        def rhs(_s, state):
            x, y = state
            vx = pf(x, y)
            vy = qf(x, y)
            norm = hypot(vx, vy)
            # freeze inside the numerical zero set: unit-speed would otherwise
            # chatter across an unlisted singular point forever
            if norm < 1e-30:
                return [0.0, 0.0]
            return [sign * vx / norm, sign * vy / norm]

        return rhs

    def velocity(self, pt: SpherePoint) -> tuple[float, float]:
        f = self.fields[pt.chart]
        return f.p.evaluate(pt.x, pt.y), f.q.evaluate(pt.x, pt.y)

    # -- main loop ------------------------------------------------------------

    def run(
        self,
        start: SpherePoint,
        forward: bool = True,
        terminals: list | None = None,
        ray: Ray | None = None,
        s_max: float | None = None,
        record: bool = True,
        max_seg: float = 0.05,
        skip_collars: set | None = None,
        far_from: tuple | None = None,
    ) -> IntegrationResult:
        cfg = self.cfg
        terminals = terminals or []
        s_budget = s_max if s_max is not None else cfg.t_max
        sign = 1.0 if forward else -1.0
        chart = start.chart
        x, y = start.x, start.y
        if math.hypot(x, y) > cfg.switch_out:
            x, y = _to_chart(chart, x, y, _other(chart))
            chart = _other(chart)
        samples: list[tuple[int, float, float]] = [(chart.value, x, y)]
        used = 0.0
        time_total = 0.0
        masked_collars: set[int] = set(skip_collars or ())
        point_terms = [t for t in terminals if isinstance(t, PointTerminal)]
        collar_terms = [t for t in terminals if isinstance(t, CollarTerminal)]
        segments = 0

        feature = 2.0
        for t in point_terms:
            feature = min(feature, t.capture_radius)
        for t in collar_terms:
            feature = min(feature, t.band)
        step_cap = min(2.0, max(0.02, 0.8 * feature))

        while used < s_budget and segments < 600:
            segments += 1
            events, tags = self._build_events(chart, point_terms, collar_terms,
                                              masked_collars, ray, forward, far_from)
            span = min(s_budget - used, 25.0)
            sol = solve_ivp(
                self._rhs(chart, sign),
                (0.0, span),
                [x, y],
                method="RK45",
                rtol=cfg.tol_integrator,
                atol=cfg.atol_integrator,
                events=events,
                dense_output=True,
                max_step=step_cap,
            )
            hit_index = None
            hit_s = sol.t[-1]
            for k, ev_s in enumerate(sol.t_events):
                if len(ev_s) and (hit_index is None or ev_s[0] < hit_s):
                    hit_index = k
                    hit_s = float(ev_s[0])
            seg_samples, seg_time = self._collect(sol, hit_s, chart, max_seg, record)
            time_total += seg_time
            samples.extend(seg_samples)
            if hit_index is None:
                if sol.t[-1] >= span - 1e-12 and used + span >= s_budget:
                    x, y = float(sol.y[0][-1]), float(sol.y[1][-1])
                    used += sol.t[-1]
                    break
                x, y = float(sol.y[0][-1]), float(sol.y[1][-1])
                used += sol.t[-1]
                # leaving the masked collar re-enables it
                masked_collars = self._unmask(chart, x, y, collar_terms, masked_collars)
                continue
            used += hit_s
            ex, ey = (float(c) for c in sol.sol(hit_s))
            tag_kind, tag_obj = tags[hit_index]
            if tag_kind == "switch":
                x, y = _to_chart(chart, ex, ey, _other(chart))
                chart = _other(chart)
                samples.append((chart.value, x, y))
                continue
            if tag_kind == "far":
                return IntegrationResult(
                    "far", None, SpherePoint(chart, ex, ey), samples, used,
                    time_elapsed=time_total,
                )
            if tag_kind == "ray":
                z = self._ray_param(ray, chart, ex, ey)
                if z is not None:
                    return IntegrationResult(
                        "ray", None, SpherePoint(chart, ex, ey), samples, used,
                        ray_z=z, time_elapsed=time_total,
                    )
                x, y = self._nudge(chart, ex, ey, sign)
                continue
            if tag_kind == "point":
                term: PointTerminal = tag_obj
                res = self._point_decision(term, chart, ex, ey, sign, forward, used, samples, time_total)
                if res is not None:
                    return res
                x, y = self._nudge(chart, ex, ey, sign)
                continue
            if tag_kind == "collar":
                term = tag_obj
                ok = self._collar_decision(term, chart, ex, ey, forward)
                if ok:
                    return IntegrationResult(
                        "collar", term.object_id, SpherePoint(chart, ex, ey),
                        samples, used, time_elapsed=time_total,
                    )
                masked_collars.add(id(term))
                x, y = self._nudge(chart, ex, ey, sign)
                continue
        return IntegrationResult(
            "budget", None, SpherePoint(chart, x, y), samples, used, time_elapsed=time_total
        )

    # -- events ---------------------------------------------------------------

    def _build_events(self, chart, point_terms, collar_terms, masked, ray, forward,
                      far_from=None):
        cfg = self.cfg
        events = []
        tags = []

        if far_from is not None:
            f_chart, fx0, fy0, f_rad = far_from

            def far_event(_s, state):
                tx, ty = _to_chart(chart, state[0], state[1], f_chart)
                if tx == _FAR:
                    return 1.0
                return (tx - fx0) ** 2 + (ty - fy0) ** 2 - f_rad ** 2

            far_event.terminal = True
            far_event.direction = 1
            events.append(far_event)
            tags.append(("far", None))

        def switch_event(_s, state):
            return state[0] ** 2 + state[1] ** 2 - cfg.switch_out ** 2

        switch_event.terminal = True
        switch_event.direction = 1
        events.append(switch_event)
        tags.append(("switch", None))

        for term in point_terms:
            def ev(_s, state, term=term):
                tx, ty = _to_chart(chart, state[0], state[1], term.chart)
                if tx == _FAR:
                    return _FAR
                return (tx - term.x) ** 2 + (ty - term.y) ** 2 - term.capture_radius ** 2
            ev.terminal = True
            ev.direction = -1
            events.append(ev)
            tags.append(("point", term))

        for term in collar_terms:
            if id(term) in masked:
                continue
            def ev(_s, state, term=term):
                fx, fy = _to_chart(chart, state[0], state[1], Chart.FINITE)
                if fx == _FAR:
                    return _FAR
                dist, _, _, _ = nearest_on_polyline(term.polyline, fx, fy, closed=True)
                return dist - term.band
            ev.terminal = True
            ev.direction = -1
            events.append(ev)
            tags.append(("collar", term))

        if ray is not None:
            ca, sa = math.cos(ray.angle), math.sin(ray.angle)

            def rev(_s, state):
                rx, ry = _to_chart(chart, state[0], state[1], ray.chart)
                if rx == _FAR:
                    return _FAR
                return -sa * (rx - ray.ox) + ca * (ry - ray.oy)
            rev.terminal = True
            events.append(rev)
            tags.append(("ray", None))

        return events, tags

    def _ray_param(self, ray: Ray, chart, x, y) -> float | None:
        rx, ry = _to_chart(chart, x, y, ray.chart)
        ca, sa = math.cos(ray.angle), math.sin(ray.angle)
        z = ca * (rx - ray.ox) + sa * (ry - ray.oy)
        if ray.z_min <= z <= ray.z_max:
            return z
        return None

    # -- terminal decisions ------------------------------------------------------

    def _point_decision(self, term, chart, ex, ey, sign, forward, used, samples, time_total):
        converging_styles = {"attract", "both"} if forward else {"repel", "both"}
        end = SpherePoint(chart, ex, ey)
        if term.style in converging_styles:
            samples.append((chart.value, ex, ey))
            return IntegrationResult("point", term.point_id, end, samples, used,
                                     time_elapsed=time_total)
        if term.style == "germ":
            converged, match, residual, ambiguous = self._germ_alignment(
                term, chart, ex, ey, sign, forward)
            if converged or match is not None:
                samples.append((chart.value, ex, ey))
                return IntegrationResult("point", term.point_id, end, samples, used,
                                         germ_match=match, germ_residual=residual,
                                         ambiguous=ambiguous, time_elapsed=time_total)
        return None

    def _germ_alignment(self, term: PointTerminal, chart, ex, ey, sign, forward):
        """Follow the orbit inward and test alignment with a boundary germ.

        The angular tolerance gets a curvature allowance proportional to the
        current distance, since separatrices are straight only to first order.
        """
        cfg = self.cfg
        want_outgoing = not forward
        cands = [g for g in term.germs if g.outgoing == want_outgoing]
        if not cands:
            return None, None, False
        x, y = _to_chart(chart, ex, ey, term.chart)
        cur_chart = term.chart
        best = (None, math.inf)
        r0 = math.hypot(x - term.x, y - term.y)
        target = r0 / 8.0
        rhs = self._rhs(cur_chart, sign)
        # crude inward march with small unit-speed RK4 steps
        px, py = x, y
        for _ in range(4000):
            r = math.hypot(px - term.x, py - term.y)
            ang = math.atan2(py - term.y, px - term.x)
            for g in cands:
                d = _angle_dist(ang, g.angle)
                if d < best[1]:
                    best = (g, d)
            if r <= target:
                break
            h = min(0.2 * r, 0.05 * term.scale)
            k1 = rhs(0.0, [px, py])
            k2 = rhs(0.0, [px + 0.5 * h * k1[0], py + 0.5 * h * k1[1]])
            k3 = rhs(0.0, [px + 0.5 * h * k2[0], py + 0.5 * h * k2[1]])
            k4 = rhs(0.0, [px + h * k3[0], py + h * k3[1]])
            nx = px + h * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0]) / 6.0
            ny = py + h * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1]) / 6.0
            nr = math.hypot(nx - term.x, ny - term.y)
            if nr > r * 1.5 and r < r0 * 0.9:
                break  # veered off: passing orbit
            px, py = nx, ny
        g, d = best
        if g is None:
            return None, None, False
        r_final = max(math.hypot(px - term.x, py - term.y), target)
        allowance = max(cfg.tol_connection_angle, 2.0 * r_final / max(term.scale, 1e-9))
        if d <= allowance:
            return g, d, False
        if d <= cfg.connection_guard * allowance:
            return g, d, True
        return None, d, False

    def _collar_decision(self, term: CollarTerminal, chart, ex, ey, forward) -> bool:
        fx, fy = _to_chart(chart, ex, ey, Chart.FINITE)
        _, _, _, side = nearest_on_polyline(term.polyline, fx, fy, closed=True)
        flags = term.side_forward if forward else term.side_backward
        return flags[0] if side > 0 else flags[1]

    # -- helpers -----------------------------------------------------------------

    def _collect(self, sol, s_stop, chart, max_seg, record):
        out = []
        time_acc = 0.0
        f = self.fields[chart]
        ts = [t for t in sol.t if t <= s_stop + 1e-15]
        if not ts or ts[-1] < s_stop:
            ts.append(s_stop)
        prev_t = 0.0
        prev_xy = sol.sol(0.0)
        for t in ts[1:]:
            xy = sol.sol(t)
            dist = math.hypot(xy[0] - prev_xy[0], xy[1] - prev_xy[1])
            n_sub = max(1, int(dist / max_seg))
            for k in range(1, n_sub + 1):
                tt = prev_t + (t - prev_t) * k / n_sub
                sx, sy = (float(c) for c in sol.sol(tt))
                if record:
                    out.append((chart.value, sx, sy))
                vx = f.p.evaluate(sx, sy)
                vy = f.q.evaluate(sx, sy)
                speed = math.hypot(vx, vy)
                step_s = (t - prev_t) / n_sub
                if speed > 1e-300:
                    time_acc += step_s / speed
            prev_t = t
            prev_xy = xy
        return out, time_acc

    def _nudge(self, chart, x, y, sign, h: float = 1e-9):
        rhs = self._rhs(chart, sign)
        d = rhs(0.0, [x, y])
        return x + h * d[0], y + h * d[1]

    def _unmask(self, chart, x, y, collar_terms, masked):
        still = set()
        for term in collar_terms:
            if id(term) not in masked:
                continue
            fx, fy = _to_chart(chart, x, y, Chart.FINITE)
            if fx == _FAR:
                still.add(id(term))
                continue
            dist, _, _, _ = nearest_on_polyline(term.polyline, fx, fy, closed=True)
            if dist <= term.band * 1.05:
                still.add(id(term))
        return still


def _other(chart: Chart) -> Chart:
    return Chart.INFINITE if chart is Chart.FINITE else Chart.FINITE


def _angle_dist(a: float, b: float) -> float:
    d = (a - b) % (2 * math.pi)
    return min(d, 2 * math.pi - d)

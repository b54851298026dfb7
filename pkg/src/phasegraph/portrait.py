"""End-to-end phase portrait assembly.

Runs the full pipeline on a polynomial field: reduction, singular point
classification (finite and infinite), limit cycle detection, separatrix
tracing, polycycle extraction, nests, contact-free cycles, and the
theorem-backed certificates.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field as dc_field

from .chart import Chart, SpherePoint, to_infinite_chart
from .config import RunConfig
from .errors import AnalysisError, UnresolvedDegeneracy
from .flow import (
    ClosedOrbitCell,
    ContactFreeCycle,
    LimitCycle,
    Nest,
    Polycycle,
    Separatrix,
    build_contact_free_cycles,
    detect_limit_cycles,
    detect_polycycles,
    find_nests,
    trace_separatrices,
    truncate_nasty,
)
from .integrate import SphereIntegrator
from .poly import VectorField, make_star_field
from .singular import (
    FoundPoint,
    SingularPointReport,
    classify_elementary,
    find_singular_points,
    sector_decomposition,
    tangency_census,
    total_complexity_check,
)


@dataclass
class PhasePortrait:
    field: VectorField
    star: VectorField
    common_factor_degree: int
    degree: int
    reports: list[SingularPointReport]
    cycles: list[LimitCycle]
    cells: list[ClosedOrbitCell]
    separatrices: list[Separatrix]
    polycycles: list[Polycycle]
    nests: list[Nest]
    contacts: list[ContactFreeCycle]
    certificates: dict
    searched: list[dict]
    integrator: SphereIntegrator
    cfg: RunConfig
    truncations: list[dict] = dc_field(default_factory=list)

    @property
    def infinite_report(self) -> SingularPointReport:
        return next(r for r in self.reports if r.chart is Chart.INFINITE)

    def finite_reports(self) -> list[SingularPointReport]:
        return [r for r in self.reports if r.chart is Chart.FINITE]

    def limit_cycle_count(self) -> int:
        return len(self.cycles)

    def to_dict(self) -> dict:
        return {
            "degree": self.degree,
            "common_factor_degree": self.common_factor_degree,
            "singular_points": [r.to_dict() for r in self.reports],
            "limit_cycles": [c.to_dict() for c in self.cycles],
            "closed_orbit_cells": [
                {"owner": c.owner_point, "z_range": [c.z_lo, c.z_hi]}
                for c in self.cells],
            "separatrices": [s.to_dict() for s in self.separatrices],
            "polycycles": [p.to_dict() for p in self.polycycles],
            "nests": [n.to_dict() for n in self.nests],
            "contact_cycles": [c.to_dict() for c in self.contacts],
            "certificates": self.certificates,
            "searched_regions": self.searched,
            "truncations": self.truncations,
        }

    def dump_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1, sort_keys=True)


def analyze(v: VectorField, cfg: RunConfig | None = None) -> PhasePortrait:
    cfg = cfg or RunConfig()
    cfg.validate()
    star, factor = make_star_field(v)
    n = star.degree
    inf_field = to_infinite_chart(star).field
    integrator = SphereIntegrator(star, inf_field, cfg)

    finite_pts = find_singular_points(star, cfg)
    reports: list[SingularPointReport] = []
    scales = _local_scales(finite_pts)
    # elementary points first so their terminals guide the degenerate ones
    pending: list[tuple[FoundPoint, int, float]] = []
    for k, pt in enumerate(finite_pts):
        rep = classify_elementary(star, pt, k, Chart.FINITE, scales[k])
        if rep is None:
            pending.append((pt, k, scales[k]))
        else:
            reports.append(rep)
    for pt, k, scale in pending:
        avoid = [(q.x, q.y) for q in finite_pts if (q.x, q.y) != (pt.x, pt.y)]
        terminals = [r.terminal(cfg) for r in reports]
        reports.append(sector_decomposition(
            star, pt, k, Chart.FINITE, integrator, cfg, terminals, avoid, scale))
    reports.sort(key=lambda r: r.point_id)

    inf_id = len(finite_pts)
    inf_report = _analyze_infinite(star, inf_field, finite_pts, reports,
                                   integrator, cfg, inf_id)
    reports.append(inf_report)

    certificates = {}
    certificates["total_complexity"] = total_complexity_check(reports, n)
    certificates["tangency_census"] = tangency_census(star, reports, cfg, n)

    cycles, cells, searched = detect_limit_cycles(star, integrator, reports, cfg)
    separatrices = trace_separatrices(integrator, reports, cycles, cfg)
    if any(s.alpha_end.kind == "unknown" or s.omega_end.kind == "unknown"
           for s in separatrices):
        raise UnresolvedDegeneracy(
            "a separatrix end could not be classified within budget")
    polycycles = detect_polycycles(separatrices, reports, integrator, cfg)
    _mark_polycycle_sides(separatrices, polycycles)
    nests, nest_cert = find_nests(cycles, reports)
    certificates["nest_inequality"] = nest_cert
    contacts = build_contact_free_cycles(
        integrator, reports, cycles, polycycles, separatrices, cfg)
    truncations = truncate_nasty(separatrices, contacts)

    return PhasePortrait(
        v, star, factor.degree if not factor.is_constant() else 0, n,
        reports, cycles, cells, separatrices, polycycles, nests, contacts,
        certificates, searched, integrator, cfg, truncations,
    )


def _local_scales(points: list[FoundPoint]) -> list[float]:
    out = []
    for p in points:
        dmin = min((math.hypot(p.x - q.x, p.y - q.y)
                    for q in points if q is not p), default=1.0)
        out.append(min(max(dmin, 1e-3), 1.0))
    return out


def _analyze_infinite(star, inf_field, finite_pts, reports, integrator, cfg,
                      inf_id) -> SingularPointReport:
    """Sector analysis of the pole; v_inf always vanishes there."""
    images = []
    for p in finite_pts:
        r2 = p.x * p.x + p.y * p.y
        if r2 > 1e-12:
            images.append((p.x / r2, p.y / r2))
    base = min((math.hypot(ix, iy) for ix, iy in images), default=1.0)
    base = min(max(base, 1e-3), 1.0)
    pt = FoundPoint(0.0, 0.0, 0.01, True)
    terminals = [r.terminal(cfg) for r in reports]
    rep = sector_decomposition(inf_field, pt, inf_id, Chart.INFINITE,
                               integrator, cfg, terminals,
                               [im for im in images if math.hypot(*im) < 2.5],
                               base)
    return rep


def _mark_polycycle_sides(separatrices, polycycles) -> None:
    symbol = {"alpha": "alpha", "omega": "omega", "zero": "zero"}
    by_id = {s.sep_id: s for s in separatrices}
    for poly in polycycles:
        for sid, side in poly.separatrices:
            sep = by_id[sid]
            mark = symbol[poly.limit_kind]
            if side == "left":
                sep.mark_left = mark
            else:
                sep.mark_right = mark


def infinite_point_report(v: VectorField, cfg: RunConfig | None = None
                          ) -> SingularPointReport:
    """Classification of the point at infinity alone."""
    cfg = cfg or RunConfig()
    star, _ = make_star_field(v)
    inf_field = to_infinite_chart(star).field
    integrator = SphereIntegrator(star, inf_field, cfg)
    finite_pts = find_singular_points(star, cfg)
    reports = []
    scales = _local_scales(finite_pts)
    for k, pt in enumerate(finite_pts):
        rep = classify_elementary(star, pt, k, Chart.FINITE, scales[k])
        if rep is not None:
            reports.append(rep)
    rep = _analyze_infinite(star, inf_field, finite_pts, reports, integrator,
                            cfg, len(finite_pts))
    bound = 2 * star.degree + 2
    if rep.complexity > bound:
        from .errors import BoundViolation
        raise BoundViolation(
            f"infinite point complexity {rep.complexity} exceeds {bound}")
    return rep


def integrate_orbit(portrait: PhasePortrait, start: SpherePoint,
                    forward: bool = True, s_max: float | None = None):
    """Trajectory from a start point with terminal classification.

    Returns the integration result; the terminal object is a singular point
    report, a limit cycle, or None when the budget ran out (honest Unknown).
    """
    from .flow import _cycle_collar_terminal

    terminals = [r.terminal(portrait.cfg) for r in portrait.reports]
    terminals += [_cycle_collar_terminal(c, portrait.reports)
                  for c in portrait.cycles]
    res = portrait.integrator.run(start, forward=forward, terminals=terminals,
                                  s_max=s_max, record=True)
    obj = None
    if res.status == "point":
        obj = ("point", res.terminal_id)
    elif res.status == "collar":
        obj = ("cycle", res.terminal_id)
    return res, obj

"""Locating and classifying singular points of planar polynomial fields.

Locations come from exact resultants plus numeric polishing; every point gets
an isolation box, certified by a Krawczyk test when the Jacobian allows and by
interval boundary positivity otherwise.  Elementary points (saddle, node,
focus) are classified from the linearization; everything else goes through
the level-oval sector machinery.  Focus-versus-center is decided numerically
only in the conservative direction: CENTER requires a vanishing return map
plus an exact time-reversal symmetry witness of the polynomial field.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field
from fractions import Fraction

import numpy as np

from .chart import Chart, SpherePoint, to_infinite_chart
from .config import RunConfig
from .errors import (
    BoundViolation,
    DegenerateSystem,
    UnresolvedDegeneracy,
)
from .integrate import Germ, PointTerminal, Ray, SphereIntegrator
from .intervals import boundary_isolation, krawczyk_certify
from .oval import Oval, tangency_points
from .poly import (
    BiPoly,
    VectorField,
    directional_derivative,
    is_star_field,
    resultant_x,
    resultant_y,
)
from .sectors import GermSpec, SectorEngine, run_sector_analysis, select_oval

HYPERBOLIC = "H"
ELLIPTIC = "E"
PARABOLIC = "P"


@dataclass
class SingularPointReport:
    point_id: int
    chart: Chart
    x: float
    y: float
    isolation_radius: float
    certified: bool
    kind: str                      # "focus" | "center" | "characteristic"
    stability: str | None          # "attracting" | "repelling" | None
    rotation: str | None           # "ccw" | "cw" in the plane's orientation
    sectors: list[str]
    complexity: int
    germs: list[GermSpec] = dc_field(default_factory=list)
    eps: float | None = None
    tangency_count: int | None = None
    degenerate: bool = False
    symmetry_witness: bool = False
    oval: Oval | None = None
    sector_spans: list[tuple[str, float, float]] = dc_field(default_factory=list)
    local_scale: float = 1.0

    @property
    def monodromic(self) -> bool:
        return self.kind in ("focus", "center")

    @property
    def is_infinite(self) -> bool:
        return self.chart is Chart.INFINITE

    def location(self) -> SpherePoint:
        return SpherePoint(self.chart, self.x, self.y)

    def terminal(self, cfg: RunConfig) -> PointTerminal:
        style = "inert"
        if self.kind == "focus" or (self.kind == "characteristic"
                                    and all(s == PARABOLIC for s in self.sectors)):
            style = {"attracting": "attract", "repelling": "repel"}.get(self.stability, "inert")
        elif self.kind == "characteristic":
            # with hyperbolic sectors, passing orbits must be let through and
            # true arrivals certified by the inward march; without them every
            # converging entry is an arrival
            style = "germ" if HYPERBOLIC in self.sectors else "both"
        germs = tuple(Germ(g.angle, g.outgoing, k)
                      for k, g in enumerate(self.germs) if not g.loop)
        loop_germs = tuple(
            gg for k, g in enumerate(self.germs) if g.loop
            for gg in (Germ(g.angle, False, k), Germ(g.angle, True, k))
        )
        return PointTerminal(
            self.point_id, self.chart, self.x, self.y,
            capture_radius=self.capture_radius(),
            style=style, germs=germs + loop_germs, scale=self.local_scale,
        )

    def capture_radius(self) -> float:
        return max(0.02 * self.local_scale, 2.0 * self.isolation_radius)

    def to_dict(self) -> dict:
        return {
            "point_id": self.point_id,
            "chart": self.chart.name,
            "location": [self.x, self.y],
            "isolation_radius": self.isolation_radius,
            "certified": self.certified,
            "kind": self.kind,
            "stability": self.stability,
            "rotation": self.rotation,
            "sectors": list(self.sectors),
            "complexity": self.complexity,
            "epsilon": self.eps,
            "tangency_count": self.tangency_count,
            "degenerate": self.degenerate,
            "symmetry_witness": self.symmetry_witness,
        }


# ---------------------------------------------------------------------------
# location
# ---------------------------------------------------------------------------

@dataclass
class FoundPoint:
    x: float
    y: float
    radius: float
    certified: bool


def _real_roots(coeffs: list[Fraction]) -> list[float]:
    """Real roots of an exact univariate polynomial (squarefree reduction)."""
    from .poly import _uni_divmod, _uni_gcd, _uni_trim

    p = [Fraction(c) for c in coeffs]
    _uni_trim(p)
    if len(p) <= 1:
        return []
    dp = [c * (k + 1) for k, c in enumerate(p[1:])]
    g = _uni_gcd(p, dp)
    if len(g) > 1:
        p, _ = _uni_divmod(p, g)
    arr = np.array([float(c) for c in p][::-1])
    scale = np.max(np.abs(arr))
    if scale == 0.0:
        return []
    arr = arr / scale
    arr = np.trim_zeros(arr, "f")
    if len(arr) <= 1:
        return []
    roots = np.roots(arr)
    out = []
    mag = max(1.0, float(np.max(np.abs(roots))) if len(roots) else 1.0)
    for r in roots:
        if abs(r.imag) < 1e-7 * mag:
            out.append(float(r.real))
    return sorted(out)


def _newton_polish(v: VectorField, x: float, y: float) -> tuple[float, float] | None:
    from scipy.optimize import least_squares

    def fun(z):
        return [v.p.evaluate(z[0], z[1]), v.q.evaluate(z[0], z[1])]

    def jac(z):
        j = v.jacobian(z[0], z[1])
        return [[j[0][0], j[0][1]], [j[1][0], j[1][1]]]

    try:
        sol = least_squares(fun, [x, y], jac=jac, xtol=1e-15, ftol=1e-15, gtol=1e-15)
    except Exception:
        return None
    res = max(abs(sol.fun[0]), abs(sol.fun[1]))
    scale = max(1.0, abs(sol.x[0]), abs(sol.x[1]))
    if res > 1e-9 * scale:
        return None
    return float(sol.x[0]), float(sol.x[1])


def find_singular_points(v: VectorField, cfg: RunConfig | None = None) -> list[FoundPoint]:
    """All real common zeros of (P, Q), with certified isolation boxes."""
    cfg = cfg or RunConfig()
    if not is_star_field(v):
        raise DegenerateSystem("gcd(P, Q) is nonconstant; reduce the field first")
    if v.degree == 0:
        return []
    res_in_x = resultant_y(v.p, v.q)
    res_in_y = resultant_x(v.p, v.q)
    xs = _real_roots(res_in_x) if res_in_x else []
    ys = _real_roots(res_in_y) if res_in_y else []
    if not res_in_x:
        # both polynomials y-free cannot happen for a star field with zeros
        xs = []
    candidates: list[tuple[float, float]] = [(x, y) for x in xs for y in ys]
    # per-x root candidates add robustness when resultant roots cluster
    for x0 in xs:
        for base in (v.p, v.q):
            coeffs: dict[int, Fraction] = {}
            for (i, j), c in base.coeffs.items():
                coeffs[j] = coeffs.get(j, Fraction(0)) + c * Fraction(x0).limit_denominator(1 << 40) ** i
            dense = [coeffs.get(k, Fraction(0)) for k in range(max(coeffs, default=0) + 1)]
            for y0 in _real_roots(dense):
                candidates.append((x0, y0))
    found: list[tuple[float, float]] = []
    for cx, cy in candidates:
        polished = _newton_polish(v, cx, cy)
        if polished is None:
            continue
        px, py = polished
        if any(math.hypot(px - fx, py - fy) < 1e-7 * max(1.0, abs(px), abs(py))
               for fx, fy in found):
            continue
        found.append((px, py))
    found.sort()
    n = v.degree
    if len(found) > n * n:
        raise BoundViolation(
            f"{len(found)} singular points exceed the Bezout bound {n * n}")
    out = []
    for px, py in found:
        min_dist = min(
            (math.hypot(px - ox, py - oy) for ox, oy in found if (ox, oy) != (px, py)),
            default=1.0,
        )
        box = min(0.05 * max(1.0, math.hypot(px, py)), 0.25 * min_dist)
        cert = krawczyk_certify(v, px, py, box)
        if cert is not None:
            out.append(FoundPoint(px, py, cert, True))
        elif boundary_isolation(v, px, py, box):
            out.append(FoundPoint(px, py, box, True))
        else:
            out.append(FoundPoint(px, py, box, False))
    return out


# ---------------------------------------------------------------------------
# elementary classification
# ---------------------------------------------------------------------------

def classify_elementary(v: VectorField, pt: FoundPoint, point_id: int = 0,
                        chart: Chart = Chart.FINITE,
                        local_scale: float = 1.0) -> SingularPointReport | None:
    """Linearization-based classification; None means sector analysis is needed."""
    j = v.jacobian(pt.x, pt.y)
    a, b = j[0]
    c, d = j[1]
    norm2 = a * a + b * b + c * c + d * d
    det = a * d - b * c
    tr = a + d
    if norm2 < 1e-14 or abs(det) < 1e-9 * max(1.0, norm2):
        return None
    disc = tr * tr - 4.0 * det
    flip = chart is Chart.INFINITE
    if det < 0.0:
        lam1 = 0.5 * (tr + math.sqrt(disc))
        lam2 = 0.5 * (tr - math.sqrt(disc))
        unstable = _eigvec(a, b, c, d, max(lam1, lam2))
        stable = _eigvec(a, b, c, d, min(lam1, lam2))
        germs = []
        for sgn in (1.0, -1.0):
            ang_u = math.atan2(sgn * unstable[1], sgn * unstable[0])
            germs.append(GermSpec(ang_u, True,
                                  (pt.x + sgn * pt.radius * unstable[0],
                                   pt.y + sgn * pt.radius * unstable[1])))
            ang_s = math.atan2(sgn * stable[1], sgn * stable[0])
            germs.append(GermSpec(ang_s, False,
                                  (pt.x + sgn * pt.radius * stable[0],
                                   pt.y + sgn * pt.radius * stable[1])))
        return SingularPointReport(
            point_id, chart, pt.x, pt.y, pt.radius, pt.certified,
            "characteristic", None, None,
            [HYPERBOLIC] * 4, 4, germs=germs, local_scale=local_scale,
        )
    if abs(tr) < 1e-9 * max(1.0, math.sqrt(norm2)):
        return None  # pure imaginary: focus-vs-center undecided by linearization
    stability = "attracting" if tr < 0 else "repelling"
    if disc < 0.0:
        spin = "ccw" if c > 0 else "cw"
        if flip:
            spin = "cw" if spin == "ccw" else "ccw"
        return SingularPointReport(
            point_id, chart, pt.x, pt.y, pt.radius, pt.certified,
            "focus", stability, spin, [], 0, local_scale=local_scale,
        )
    return SingularPointReport(
        point_id, chart, pt.x, pt.y, pt.radius, pt.certified,
        "characteristic", stability, None, [PARABOLIC], 0, local_scale=local_scale,
    )


def _eigvec(a, b, c, d, lam) -> tuple[float, float]:
    # (A - lam I) v = 0: pick the better-conditioned row
    r1 = (a - lam, b)
    r2 = (c, d - lam)
    row = r1 if math.hypot(*r1) >= math.hypot(*r2) else r2
    vx, vy = -row[1], row[0]
    n = math.hypot(vx, vy)
    if n == 0.0:
        return 1.0, 0.0
    return vx / n, vy / n


# ---------------------------------------------------------------------------
# symmetry witness (exact)
# ---------------------------------------------------------------------------

def exact_symmetry_witness(v: VectorField, x: float, y: float) -> bool:
    """Time-reversal symmetry about a coordinate axis through the point.

    Checks (x, y, t) -> (x, -y, -t) and (-x, y, -t) invariance of the field
    translated (exactly) so the point is the origin; both tests are exact
    coefficient-parity checks, valid only when the point itself rationalizes
    to an exact zero of the field.
    """
    rx = Fraction(x).limit_denominator(10 ** 6)
    ry = Fraction(y).limit_denominator(10 ** 6)
    if abs(float(rx) - x) > 1e-7 or abs(float(ry) - y) > 1e-7:
        return False
    if v.p.evaluate_exact(rx, ry) != 0 or v.q.evaluate_exact(rx, ry) != 0:
        return False
    w = v.shift(rx, ry)
    if _odd_in(w.p, "y") and _even_in(w.q, "y"):
        return True
    if _even_in(w.p, "x") and _odd_in(w.q, "x"):
        return True
    return False


def _odd_in(f: BiPoly, var: str) -> bool:
    idx = 1 if var == "y" else 0
    return all(m[idx] % 2 == 1 for m in f.coeffs)


def _even_in(f: BiPoly, var: str) -> bool:
    idx = 1 if var == "y" else 0
    return all(m[idx] % 2 == 0 for m in f.coeffs)


# ---------------------------------------------------------------------------
# sector decomposition and monodromic classification
# ---------------------------------------------------------------------------

def sector_decomposition(
    local: VectorField,
    pt: FoundPoint,
    point_id: int,
    chart: Chart,
    integrator: SphereIntegrator,
    cfg: RunConfig,
    other_terminals: list[PointTerminal],
    avoid: list[tuple[float, float]],
    base_scale: float,
) -> SingularPointReport:
    """Full sector analysis of a (possibly degenerate) singular point."""
    oval = select_oval(local, pt.x, pt.y, base_scale, cfg, avoid)
    lr = directional_derivative(local, local.p * local.p + local.q * local.q)
    tangs = tangency_points(oval, lr)
    flip = chart is Chart.INFINITE

    if not tangs:
        swirl = _min_angular_component(local, oval)
        if swirl > cfg.monodromy_floor:
            return _classify_monodromic(local, pt, point_id, chart, integrator,
                                        cfg, oval, flip, base_scale)
        stability = _uniform_crossing(lr, oval)
        if stability is None:
            raise UnresolvedDegeneracy(
                "contact-free oval with indefinite crossing direction")
        return SingularPointReport(
            point_id, chart, pt.x, pt.y, pt.radius, pt.certified,
            "characteristic", stability, None, [PARABOLIC], 0,
            eps=oval.eps, tangency_count=0, degenerate=True,
            oval=oval, sector_spans=[(PARABOLIC, 0.0, oval.total_arc)],
            local_scale=base_scale,
        )

    far_radius = min(4.0 * oval.max_radius(), 0.9 * cfg.switch_out)
    capture = 0.3 * oval.min_radius()
    engine = SectorEngine(integrator, chart, point_id, pt.x, pt.y, cfg,
                          other_terminals, far_radius, capture)
    sectors, germs, spans = run_sector_analysis(engine, oval, tangs, cfg)
    complexity = sum(1 for s in sectors if s in (HYPERBOLIC, ELLIPTIC))
    stability = None
    if all(s == PARABOLIC for s in sectors):
        stability = _uniform_crossing(lr, oval)
    return SingularPointReport(
        point_id, chart, pt.x, pt.y, pt.radius, pt.certified,
        "characteristic", stability, None, sectors, complexity,
        germs=germs, eps=oval.eps, tangency_count=len(tangs), degenerate=True,
        oval=oval, sector_spans=spans, local_scale=base_scale,
    )


def _min_angular_component(local: VectorField, oval: Oval) -> float:
    cx, cy = oval.center
    worst = math.inf
    for px, py in oval.points:
        vx = local.p.evaluate(px, py)
        vy = local.q.evaluate(px, py)
        rx, ry = px - cx, py - cy
        nv = math.hypot(vx, vy)
        nr = math.hypot(rx, ry)
        if nv < 1e-300 or nr < 1e-300:
            return 0.0
        worst = min(worst, abs(rx * vy - ry * vx) / (nv * nr))
    return worst


def _uniform_crossing(lr: BiPoly, oval: Oval) -> str | None:
    vals = [lr.evaluate(px, py) for px, py in oval.points[::2]]
    if all(v < 0 for v in vals):
        return "attracting"
    if all(v > 0 for v in vals):
        return "repelling"
    return None


def _classify_monodromic(local, pt, point_id, chart, integrator, cfg, oval,
                         flip, base_scale) -> SingularPointReport:
    spin_local = _rotation_sign(local, oval)
    if spin_local == 0:
        raise UnresolvedDegeneracy("monodromic point with indefinite rotation")
    displacements, z_used = _return_displacements(
        local, pt, chart, integrator, cfg, oval, spin_local)
    if displacements is None:
        raise UnresolvedDegeneracy("return map could not be evaluated")
    witness = exact_symmetry_witness(local, pt.x, pt.y)
    spin = "ccw" if spin_local > 0 else "cw"
    if flip:
        spin = "cw" if spin == "ccw" else "ccw"
    tol = cfg.center_displacement
    if all(abs(d) < tol for d in displacements) and len(displacements) >= 8 and witness:
        return SingularPointReport(
            point_id, chart, pt.x, pt.y, pt.radius, pt.certified,
            "center", None, spin, [], 0, eps=oval.eps, tangency_count=0,
            degenerate=True, symmetry_witness=True, oval=oval,
            local_scale=base_scale,
        )
    inner = [d for d, _ in sorted(zip(displacements, z_used), key=lambda t: t[1])]
    signs = {1 if d > 0 else -1 for d in inner if abs(d) >= tol}
    if not signs:
        raise UnresolvedDegeneracy(
            "return displacement below tolerance without a symmetry witness")
    lead = inner[0] if abs(inner[0]) >= tol else next(d for d in inner if abs(d) >= tol)
    stability = "attracting" if lead < 0 else "repelling"
    return SingularPointReport(
        point_id, chart, pt.x, pt.y, pt.radius, pt.certified,
        "focus", stability, spin, [], 0, eps=oval.eps, tangency_count=0,
        degenerate=True, symmetry_witness=witness, oval=oval,
        local_scale=base_scale,
    )


def _rotation_sign(local: VectorField, oval: Oval) -> int:
    cx, cy = oval.center
    votes = 0
    for px, py in oval.points[::4]:
        vx = local.p.evaluate(px, py)
        vy = local.q.evaluate(px, py)
        cross = (px - cx) * vy - (py - cy) * vx
        votes += 1 if cross > 0 else -1 if cross < 0 else 0
    n = len(oval.points[::4])
    if votes == n:
        return 1
    if votes == -n:
        return -1
    return 0


def _return_displacements(local, pt, chart, integrator, cfg, oval, spin_local):
    """Poincare displacements g(z) - z on a radial transversal."""
    angle = 0.0
    # radial extent of the oval along the probe angle
    r_ray = None
    for px, py in oval.points:
        ang = math.atan2(py - pt.y, px - pt.x)
        if abs(_wrap(ang - angle)) < 0.1:
            r_ray = math.hypot(px - pt.x, py - pt.y)
            break
    if r_ray is None:
        r_ray = oval.min_radius()
    ray = Ray(chart, pt.x, pt.y, angle, z_min=1e-4 * r_ray, z_max=3.0 * r_ray)
    zs = [r_ray * f for f in (0.15, 0.25, 0.35, 0.45, 0.55, 0.65, 0.75, 0.85)]
    disp = []
    used = []
    for z in zs:
        z1 = _first_return(integrator, chart, pt, angle, z, ray, cfg)
        if z1 is None:
            continue
        disp.append(z1 - z)
        used.append(z)
    if len(disp) < 4:
        return None, None
    return disp, used


def _first_return(integrator, chart, pt, angle, z, ray, cfg):
    start_x = pt.x + z * math.cos(angle)
    start_y = pt.y + z * math.sin(angle)
    # nudge off the section so the crossing event arms cleanly
    f = integrator.fields[chart]
    vx = f.p.evaluate(start_x, start_y)
    vy = f.q.evaluate(start_x, start_y)
    nv = math.hypot(vx, vy)
    if nv < 1e-300:
        return None
    h = 1e-7 * max(z, 1.0)
    res = integrator.run(
        SpherePoint(chart, start_x + h * vx / nv, start_y + h * vy / nv),
        forward=True,
        ray=ray,
        s_max=80.0 * max(z, 0.05),
        record=False,
    )
    if res.status != "ray":
        return None
    return res.ray_z


def _wrap(a: float) -> float:
    return (a + math.pi) % (2 * math.pi) - math.pi


# ---------------------------------------------------------------------------
# bound certificates
# ---------------------------------------------------------------------------

def total_complexity_check(reports: list[SingularPointReport], n: int) -> dict:
    """Certificate for the finite and infinite complexity bounds."""
    finite_total = sum(r.complexity for r in reports if not r.is_infinite)
    finite_bound = 6 * n * n - 2 * n if n >= 1 else 0
    inf_total = sum(r.complexity for r in reports if r.is_infinite)
    inf_bound = 2 * n + 2
    cert = {
        "certificate": "total-complexity",
        "degree": n,
        "finite_total": finite_total,
        "finite_bound": finite_bound,
        "infinite_total": inf_total,
        "infinite_bound": inf_bound,
        "pass": finite_total <= finite_bound and inf_total <= inf_bound,
    }
    if not cert["pass"]:
        raise BoundViolation(
            f"complexity certificate failed: {finite_total} > {finite_bound} "
            f"or {inf_total} > {inf_bound}")
    return cert


def tangency_census(local: VectorField, reports: list[SingularPointReport],
                    cfg: RunConfig, n: int) -> dict:
    """Count odd tangencies of v with a shared-eps level set of R = P^2+Q^2.

    Builds one oval per finite singular point at a common eps and counts
    tangency points; the Bezout bound 6n^2-2n from the tangency system is
    checked exactly on the total.
    """
    finite = [r for r in reports if not r.is_infinite]
    if not finite:
        return {"certificate": "tangency-census", "count": 0,
                "bound": 6 * n * n - 2 * n if n else 0, "pass": True,
                "epsilon": None, "per_point": []}
    positions = [(r.x, r.y) for r in finite]
    ovals: dict[int, Oval] = {}
    eps_common = None
    for rep in finite:
        others = [p for p in positions if p != (rep.x, rep.y)]
        base = min((math.hypot(rep.x - ox, rep.y - oy) for ox, oy in others),
                   default=1.0)
        base = min(max(base, 1e-3), 1.0)
        oval = select_oval(local, rep.x, rep.y, base, cfg, others)
        ovals[rep.point_id] = oval
        eps_common = oval.eps if eps_common is None else min(eps_common, oval.eps)
    lr = directional_derivative(local, local.p * local.p + local.q * local.q)
    per_point = []
    total = 0
    for rep in finite:
        oval = ovals[rep.point_id]
        if oval.eps > eps_common * 1.0000001:
            others = [p for p in positions if p != (rep.x, rep.y)]
            from .oval import trace_oval
            r_poly = local.p * local.p + local.q * local.q
            oval = trace_oval(r_poly, eps_common, rep.x, rep.y,
                              r_bound=4.0 * oval.max_radius() + 1.0)
        count = len(tangency_points(oval, lr))
        per_point.append({"point_id": rep.point_id, "tangencies": count})
        total += count
    bound = 6 * n * n - 2 * n if n >= 1 else 0
    cert = {
        "certificate": "tangency-census",
        "epsilon": eps_common,
        "count": total,
        "bound": bound,
        "per_point": per_point,
        "pass": total <= bound,
    }
    if not cert["pass"]:
        raise BoundViolation(f"tangency census {total} exceeds bound {bound}")
    return cert

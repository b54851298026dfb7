"""Tests for singular point location, classification, and sector analysis."""

import math

import pytest

from phasegraph.chart import Chart, to_infinite_chart
from phasegraph.config import RunConfig
from phasegraph.errors import BoundViolation, DegenerateSystem
from phasegraph.integrate import SphereIntegrator
from phasegraph.singular import (
    FoundPoint,
    SingularPointReport,
    classify_elementary,
    exact_symmetry_witness,
    find_singular_points,
    sector_decomposition,
    total_complexity_check,
)

from test_poly import p
from phasegraph.poly import VectorField


CFG = RunConfig()


def vf(ps, qs):
    return VectorField(p(ps), p(qs))


def analyze(field, pt=None, chart=Chart.FINITE, local=None):
    vinf = to_infinite_chart(field).field
    integ = SphereIntegrator(field, vinf, CFG)
    if pt is None:
        pt = find_singular_points(field, CFG)[0]
    return sector_decomposition(local if local is not None else field, pt,
                                0 if chart is Chart.FINITE else 99, chart,
                                integ, CFG, [], [], base_scale=0.5)


# -- location ------------------------------------------------------------------

def test_find_origin_only():
    pts = find_singular_points(vf("x", "y"), CFG)
    assert len(pts) == 1
    assert pts[0].x == pytest.approx(0.0, abs=1e-12)
    assert pts[0].y == pytest.approx(0.0, abs=1e-12)
    assert pts[0].certified


def test_find_two_points():
    pts = find_singular_points(vf("x**2 - 1", "y"), CFG)
    locs = sorted((round(q.x, 8), round(q.y, 8)) for q in pts)
    assert locs == [(-1.0, 0.0), (1.0, 0.0)]


def test_find_van_der_pol_origin():
    # substitution: y = 0 forces x = 0
    pts = find_singular_points(vf("y", "-x + (1 - x**2)*y"), CFG)
    assert len(pts) == 1
    assert math.hypot(pts[0].x, pts[0].y) < 1e-10


def test_degenerate_system_rejected():
    with pytest.raises(DegenerateSystem):
        find_singular_points(vf("x*(x - 1)", "y*(x - 1)"), CFG)


# -- elementary classification ----------------------------------------------------

def test_saddle_classification():
    field = vf("x", "-y")
    rep = classify_elementary(field, find_singular_points(field, CFG)[0])
    assert rep.kind == "characteristic"
    assert rep.sectors == ["H", "H", "H", "H"]
    assert rep.complexity == 4
    outgoing = sorted(round(math.degrees(g.angle)) % 360 for g in rep.germs if g.outgoing)
    incoming = sorted(round(math.degrees(g.angle)) % 360 for g in rep.germs if not g.outgoing)
    assert outgoing == [0, 180]
    assert incoming == [90, 270]


def test_linear_center_defers_to_sector_analysis():
    field = vf("-y", "x")
    assert classify_elementary(field, find_singular_points(field, CFG)[0]) is None


def test_focus_classification():
    field = vf("x + y", "-x + y")
    rep = classify_elementary(field, find_singular_points(field, CFG)[0])
    assert rep.kind == "focus"
    assert rep.stability == "repelling"
    assert rep.rotation == "cw"


def test_node_classification():
    field = vf("-x", "-2*y")
    rep = classify_elementary(field, find_singular_points(field, CFG)[0])
    assert rep.kind == "characteristic"
    assert rep.stability == "attracting"
    assert rep.sectors == ["P"]
    assert rep.complexity == 0


# -- sector analysis ----------------------------------------------------------------

def test_center_sector_analysis():
    rep = analyze(vf("-y", "x"))
    assert rep.kind == "center"
    assert rep.rotation == "ccw"
    assert rep.complexity == 0
    assert rep.sectors == []
    assert rep.symmetry_witness


def test_saddle_through_sector_machinery():
    rep = analyze(vf("x", "-y"))
    assert rep.sectors == ["H", "H", "H", "H"]
    assert rep.complexity == 4
    assert rep.tangency_count == 4


def test_cusp_two_hyperbolic_sectors():
    rep = analyze(vf("y", "x**2"))
    assert sorted(rep.sectors) == ["H", "H"]
    assert rep.complexity == 2
    assert rep.tangency_count is not None and rep.tangency_count >= rep.complexity


def test_saddle_node_sectors():
    rep = analyze(vf("x**2", "y"))
    assert sorted(rep.sectors) == ["H", "H", "P"]
    assert rep.complexity == 2
    kinds = sorted((g.outgoing for g in rep.germs))
    assert kinds == [False, True, True]


def test_cusp_complexity_stable_under_eps_halving():
    field = vf("y", "x**2")
    rep = analyze(field)
    cfg2 = RunConfig()
    # force a smaller eps by shrinking the probe scale
    vinf = to_infinite_chart(field).field
    integ = SphereIntegrator(field, vinf, cfg2)
    pt = find_singular_points(field, cfg2)[0]
    rep2 = sector_decomposition(field, pt, 0, Chart.FINITE, integ, cfg2, [], [],
                                base_scale=0.25)
    assert rep2.eps < rep.eps
    assert rep2.complexity == rep.complexity == 2


# -- infinite point -----------------------------------------------------------------

def test_radial_field_attracts_at_infinity():
    field = vf("x", "y")
    vinf = to_infinite_chart(field).field
    rep = analyze(field, pt=FoundPoint(0.0, 0.0, 0.01, True),
                  chart=Chart.INFINITE, local=vinf)
    assert rep.kind == "characteristic"
    assert rep.stability == "attracting"
    assert rep.complexity == 0


def test_rotation_field_center_at_infinity():
    field = vf("-y", "x")
    vinf = to_infinite_chart(field).field
    rep = analyze(field, pt=FoundPoint(0.0, 0.0, 0.01, True),
                  chart=Chart.INFINITE, local=vinf)
    assert rep.kind == "center"
    assert rep.rotation == "cw"  # chirality flips through the pole chart


def test_constant_field_two_elliptic_sectors_at_infinity():
    field = vf("1", "0")
    vinf = to_infinite_chart(field).field
    rep = analyze(field, pt=FoundPoint(0.0, 0.0, 0.01, True),
                  chart=Chart.INFINITE, local=vinf)
    assert rep.sectors == ["E", "E"]
    assert rep.complexity == 2  # exactly the 2n+2 bound for n = 0


# -- symmetry witness ------------------------------------------------------------------

def test_symmetry_witness_accepts_center():
    assert exact_symmetry_witness(vf("-y", "x"), 0.0, 0.0)
    assert exact_symmetry_witness(vf("y", "x - x**3"), 0.0, 0.0)


def test_symmetry_witness_rejects_damped():
    assert not exact_symmetry_witness(vf("y", "x - x**3 - y/10"), 0.0, 0.0)


def test_symmetry_witness_rejects_off_zero():
    assert not exact_symmetry_witness(vf("-y", "x"), 0.5, 0.0)


# -- complexity certificates ------------------------------------------------------------

def _mk_report(complexity, infinite=False):
    return SingularPointReport(
        0, Chart.INFINITE if infinite else Chart.FINITE, 0.0, 0.0, 0.01, True,
        "characteristic", None, None, ["H"] * complexity, complexity)


def test_total_complexity_single_saddle():
    cert = total_complexity_check([_mk_report(4)], 1)
    assert cert["pass"] and cert["finite_bound"] == 4


def test_total_complexity_two_saddles_quadratic():
    cert = total_complexity_check([_mk_report(4), _mk_report(4)], 2)
    assert cert["pass"] and cert["finite_bound"] == 20


def test_total_complexity_violation_raises():
    with pytest.raises(BoundViolation):
        total_complexity_check([_mk_report(5)], 1)

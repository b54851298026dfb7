"""Tests for the second chart and the field at infinity."""

import math
import random

import pytest
import sympy

from phasegraph.chart import (
    Chart,
    SpherePoint,
    pushforward_numerator,
    to_infinite_chart,
    transition_velocity,
)
from phasegraph.poly import BiPoly, VectorField

from test_poly import from_sympy, p, to_sympy

X, Y = sympy.symbols("x y")


def sympy_pushforward(pe, qe):
    """Independent symbolic oracle for the chart-2 numerator field.

    Computes d/dt of (u, w) = (x, y)/(x^2+y^2) along the field, substitutes
    the inverse transition, and clears the (u^2+w^2)^n denominator.
    """
    u, w = sympy.symbols("u w")
    r2 = X**2 + Y**2
    du = sympy.diff(X / r2, X) * pe + sympy.diff(X / r2, Y) * qe
    dw = sympy.diff(Y / r2, X) * pe + sympy.diff(Y / r2, Y) * qe
    rho2 = u**2 + w**2
    sub = {X: u / rho2, Y: w / rho2}
    n = max(sympy.Poly(pe, X, Y).total_degree(), sympy.Poly(qe, X, Y).total_degree())
    comp_u = sympy.simplify(sympy.together(du.subs(sub)) * rho2**n)
    comp_w = sympy.simplify(sympy.together(dw.subs(sub)) * rho2**n)
    comp_u = sympy.expand(sympy.cancel(comp_u))
    comp_w = sympy.expand(sympy.cancel(comp_w))
    return comp_u.subs({u: X, w: Y}), comp_w.subs({u: X, w: Y})


@pytest.mark.parametrize("pe,qe", [
    (X, Y),
    (-Y, X),
    (sympy.Integer(1), sympy.Integer(0)),
    (Y, -X + (1 - X**2) * Y),
])
def test_pushforward_matches_symbolic_oracle(pe, qe):
    v = VectorField(from_sympy(pe), from_sympy(qe))
    v1 = pushforward_numerator(v)
    ou, ow = sympy_pushforward(pe, qe)
    assert sympy.expand(to_sympy(v1.p) - ou) == 0
    assert sympy.expand(to_sympy(v1.q) - ow) == 0


def test_radial_field_inverts_sign():
    v = VectorField(p("x"), p("y"))
    inf = to_infinite_chart(v)
    # v_inf = -(u^2+w^2)^2 (u, w)
    rho2 = p("x**2 + y**2")
    assert inf.field.p == (rho2 * rho2 * p("x")).scale(-1)
    assert inf.field.q == (rho2 * rho2 * p("y")).scale(-1)


def test_rotation_field_at_infinity():
    v = VectorField(p("-y"), p("x"))
    inf = to_infinite_chart(v)
    rho2 = p("x**2 + y**2")
    assert inf.field.p == rho2 * rho2 * p("-y")
    assert inf.field.q == rho2 * rho2 * p("x")


def test_constant_field_numerator_degree_two():
    v1 = pushforward_numerator(VectorField(p("1"), BiPoly.zero()))
    assert v1.p == p("y**2 - x**2")
    assert v1.q == p("-2*x*y")
    assert v1.degree == 2


def test_chart_agreement_on_overlap():
    rng = random.Random(0)
    v = VectorField(p("y"), p("-x + (1 - x**2)*y"))
    inf = to_infinite_chart(v).field
    checked = 0
    while checked < 200:
        x = rng.uniform(-1.5, 1.5)
        y = rng.uniform(-1.5, 1.5)
        r2 = x * x + y * y
        if not (0.5 < r2 < 2.0):
            continue
        vx, vy = v.evaluate(x, y)
        speed = math.hypot(vx, vy)
        if speed < 1e-6:
            continue
        # push the finite-chart velocity into chart 2 by the transition Jacobian
        tu, tw = transition_velocity(x, y, vx, vy)
        tnorm = math.hypot(tu, tw)
        u, w = x / r2, y / r2
        iu, iw = inf.evaluate(u, w)
        inorm = math.hypot(iu, iw)
        assert tnorm > 0 and inorm > 0
        cross = abs((tu / tnorm) * (iw / inorm) - (tw / tnorm) * (iu / inorm))
        dot = (tu / tnorm) * (iu / inorm) + (tw / tnorm) * (iw / inorm)
        assert cross < 1e-8
        assert dot > 0  # v_inf = rho^(2n+2) * pushforward: positive multiple
        checked += 1


def test_double_pushforward_restores_direction():
    rng = random.Random(1)
    v = VectorField(p("x + y"), p("-x + y**2"))
    v1 = pushforward_numerator(v)
    v2 = pushforward_numerator(v1)
    for _ in range(50):
        x = rng.uniform(-1.2, 1.2)
        y = rng.uniform(-1.2, 1.2)
        if x * x + y * y < 0.3:
            continue
        ax, ay = v.evaluate(x, y)
        bx, by = v2.evaluate(x, y)
        na, nb = math.hypot(ax, ay), math.hypot(bx, by)
        if na < 1e-9 or nb < 1e-9:
            continue
        cross = abs((ax / na) * (by / nb) - (ay / na) * (bx / nb))
        dot = (ax / na) * (bx / nb) + (ay / na) * (by / nb)
        assert cross < 1e-8
        assert dot > 0


def test_sphere_point_transitions():
    pt = SpherePoint(Chart.FINITE, 3.0, 4.0)
    other = pt.other_chart()
    assert other.chart is Chart.INFINITE
    assert other.x == pytest.approx(3.0 / 25.0)
    assert other.y == pytest.approx(4.0 / 25.0)
    back = other.other_chart()
    assert back.x == pytest.approx(3.0) and back.y == pytest.approx(4.0)
    assert pt.sphere_distance(other) == pytest.approx(0.0, abs=1e-12)

"""Tests for the exact polynomial core.

The GCD examples are checked against sympy, which plays the role of the
independent exact-arithmetic oracle; the implementation under test never
touches sympy.
"""

from fractions import Fraction

import pytest
import sympy
from hypothesis import given, settings, strategies as st

from phasegraph.errors import IdenticallyZeroField
from phasegraph.poly import (
    BiPoly,
    VectorField,
    degree_bounds,
    directional_derivative,
    field_from_json,
    field_to_json,
    make_star_field,
    poly_divexact,
    poly_gcd,
    resultant_y,
)

X, Y = sympy.symbols("x y")


def to_sympy(f: BiPoly):
    expr = sympy.Integer(0)
    for (i, j), c in f.coeffs.items():
        expr += sympy.Rational(c.numerator, c.denominator) * X**i * Y**j
    return sympy.expand(expr)


def from_sympy(expr) -> BiPoly:
    poly = sympy.Poly(sympy.expand(expr), X, Y)
    terms = []
    for (i, j), c in poly.terms():
        c = sympy.Rational(c)
        terms.append((i, j, Fraction(int(c.p), int(c.q))))
    return BiPoly.from_terms(terms)


def p(expr_str: str) -> BiPoly:
    return from_sympy(sympy.sympify(expr_str))


# -- evaluate ---------------------------------------------------------------

def test_evaluate_sum_of_squares():
    f = p("x**2 + y**2")
    assert f.evaluate(1, 1) == pytest.approx(2.0)


def test_evaluate_zero_polynomial():
    assert BiPoly.zero().evaluate(3.7, -2.0) == 0.0
    assert BiPoly.zero().is_zero
    assert BiPoly.zero().degree == 0


def test_evaluate_harmonic_cubic():
    # hand arithmetic: 8 - 6 = 2
    f = p("x**3 - 3*x*y**2")
    assert f.evaluate(2, 1) == pytest.approx(2.0)


# -- make_star_field --------------------------------------------------------

def test_star_field_shared_linear_factor():
    v = VectorField(p("x*(x-1)"), p("y*(x-1)"))
    reduced, f = make_star_field(v)
    assert reduced.p == p("x")
    assert reduced.q == p("y")
    assert f == p("x - 1")


def test_star_field_already_reduced():
    v = VectorField(p("x"), p("y"))
    reduced, f = make_star_field(v)
    assert reduced.p == p("x") and reduced.q == p("y")
    assert f.is_constant()


def test_star_field_circle_factor_against_sympy_oracle():
    pe = sympy.expand((X**2 + Y**2 - 1) * Y)
    qe = sympy.expand(-(X**2 + Y**2 - 1) * X)
    v = VectorField(from_sympy(pe), from_sympy(qe))
    reduced, f = make_star_field(v)
    oracle = sympy.gcd(sympy.Poly(pe, X, Y), sympy.Poly(qe, X, Y)).as_expr()
    # oracle and result may differ by a rational unit
    ratio = sympy.simplify(to_sympy(f) / oracle)
    assert ratio.is_number and ratio != 0
    assert reduced.p == p("y")
    assert reduced.q == p("-x")


def test_zero_field_rejected():
    with pytest.raises(IdenticallyZeroField):
        VectorField(BiPoly.zero(), BiPoly.zero())


# -- directional derivative --------------------------------------------------

def test_lie_derivative_euler_identity():
    v = VectorField(p("x"), p("y"))
    assert directional_derivative(v, p("x**2 + y**2")) == p("2*x**2 + 2*y**2")


def test_lie_derivative_rotation_preserves_radius():
    v = VectorField(p("-y"), p("x"))
    assert directional_derivative(v, p("x**2 + y**2")).is_zero


def test_lie_derivative_van_der_pol_radius():
    v = VectorField(p("y"), p("-x + (1 - x**2)*y"))
    f = p("x**2 + y**2")
    got = directional_derivative(v, f)
    # symbolic expansion oracle
    oracle = sympy.expand(Y * sympy.diff(X**2 + Y**2, X)
                          + (-X + (1 - X**2) * Y) * sympy.diff(X**2 + Y**2, Y))
    assert to_sympy(got) == oracle
    assert got == p("2*y**2*(1 - x**2)")


# -- degree bounds ------------------------------------------------------------

@pytest.mark.parametrize("field,expected", [
    ((p("x**2 - 1"), p("y + x*y")), (4, 20)),   # n = 2
    ((p("x"), p("y")), (1, 4)),                 # n = 1
    ((p("x**3"), p("y")), (9, 48)),             # n = 3
])
def test_degree_bounds(field, expected):
    assert degree_bounds(VectorField(*field)) == expected


def test_degree_bounds_constant_field():
    assert degree_bounds(VectorField(p("1"), BiPoly.zero())) == (1, 0)


# -- properties ---------------------------------------------------------------

def small_polys(max_terms=4, max_deg=3):
    monos = st.tuples(st.integers(0, max_deg), st.integers(0, max_deg))
    coeff = st.fractions(min_value=-3, max_value=3, max_denominator=3)
    return st.dictionaries(monos, coeff, min_size=0, max_size=max_terms).map(BiPoly)


@settings(max_examples=40, deadline=None)
@given(f=small_polys(), g=small_polys(), h=small_polys())
def test_gcd_absorbs_common_factor(f, g, h):
    if h.is_zero or (f.is_zero and g.is_zero):
        return
    base = poly_gcd(f, g)
    lifted = poly_gcd(f * h, g * h)
    expected = base * h if not base.is_zero else h
    # associates: lifted / (base*h) is a nonzero rational constant
    ratio_num = poly_divexact(lifted, poly_gcd(lifted, expected))
    ratio_den = poly_divexact(expected, poly_gcd(lifted, expected))
    assert ratio_num.is_constant() and ratio_den.is_constant()


@settings(max_examples=40, deadline=None)
@given(f=small_polys(), g=small_polys())
def test_lie_derivative_linear(f, g):
    v = VectorField(p("y"), p("x**2"))
    lhs = directional_derivative(v, f + g)
    rhs = directional_derivative(v, f) + directional_derivative(v, g)
    assert lhs == rhs


def test_lie_derivative_matches_finite_differences():
    import random

    rng = random.Random(7)
    v = VectorField(p("y + x**2"), p("-x + x*y"))
    f = p("x**3 - 2*x*y + y**2 + 1")
    lf = directional_derivative(v, f)
    step = 1e-6
    checked = 0
    for _ in range(100):
        x = rng.uniform(-1.5, 1.5)
        y = rng.uniform(-1.5, 1.5)
        px, qy = v.evaluate(x, y)
        norm = (px * px + qy * qy) ** 0.5
        if norm < 1e-3:
            continue
        h = step / norm
        fd = (f.evaluate(x + h * px, y + h * qy) - f.evaluate(x - h * px, y - h * qy)) / (2 * h)
        exact = lf.evaluate(x, y)
        if abs(exact) < 1e-9:
            assert abs(fd) < 1e-4
        else:
            assert fd == pytest.approx(exact, rel=1e-6, abs=1e-7)
        checked += 1
    assert checked >= 80


# -- resultants ----------------------------------------------------------------

def test_resultant_matches_sympy():
    f = p("x**2 + y**2 - 1")
    g = p("x - y")
    res = resultant_y(f, g)
    oracle = sympy.resultant(to_sympy(f), to_sympy(g), Y)
    got = sum(sympy.Rational(c.numerator, c.denominator) * X**i for i, c in enumerate(res))
    assert sympy.expand(got - oracle) == 0


# -- serialization ---------------------------------------------------------------

def test_field_json_roundtrip():
    v = VectorField(p("x/2 - y**3"), p("7*y"))
    text = field_to_json(v, name="demo")
    back, name = field_from_json(text)
    assert back == v
    assert name == "demo"

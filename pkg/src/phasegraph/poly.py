"""Exact bivariate polynomial arithmetic and planar polynomial vector fields.

A polynomial is a sparse map from exponent pairs ``(i, j)`` to nonzero
``Fraction`` coefficients.  All ring operations are exact; floating point
enters only at evaluation boundaries.  The GCD is computed by
content/primitive-part recursion on ``y`` with a primitive pseudo-remainder
sequence, which is plenty at the degrees this library targets (n <= 6 or so).
"""

from __future__ import annotations

import json
from fractions import Fraction
from math import gcd as int_gcd
from typing import Iterable, Mapping

from .errors import DegenerateSystem, IdenticallyZeroField

Monomial = tuple[int, int]


class BiPoly:
    """Bivariate polynomial with exact rational coefficients.

    Invariants: no stored coefficient is zero; ``degree`` is the maximal
    total exponent (0 for the zero polynomial, flagged by ``is_zero``).
    """

    __slots__ = ("coeffs", "degree", "_fn")

    def __init__(self, coeffs: Mapping[Monomial, Fraction | int] | None = None):
        clean: dict[Monomial, Fraction] = {}
        if coeffs:
            for (i, j), c in coeffs.items():
                if i < 0 or j < 0:
                    raise ValueError(f"negative exponent in monomial {(i, j)}")
                c = Fraction(c)
                if c != 0:
                    clean[(int(i), int(j))] = c
        self.coeffs = clean
        self.degree = max((i + j for i, j in clean), default=0)
        self._fn = None

    # -- constructors ------------------------------------------------------

    @staticmethod
    def zero() -> "BiPoly":
        return BiPoly()

    @staticmethod
    def const(c) -> "BiPoly":
        return BiPoly({(0, 0): Fraction(c)})

    @staticmethod
    def x() -> "BiPoly":
        return BiPoly({(1, 0): Fraction(1)})

    @staticmethod
    def y() -> "BiPoly":
        return BiPoly({(0, 1): Fraction(1)})

    @staticmethod
    def from_terms(terms: Iterable[tuple[int, int, Fraction | int]]) -> "BiPoly":
        acc: dict[Monomial, Fraction] = {}
        for i, j, c in terms:
            acc[(i, j)] = acc.get((i, j), Fraction(0)) + Fraction(c)
        return BiPoly(acc)

    # -- predicates --------------------------------------------------------

    @property
    def is_zero(self) -> bool:
        return not self.coeffs

    def is_constant(self) -> bool:
        return all(m == (0, 0) for m in self.coeffs)

    def __eq__(self, other) -> bool:
        return isinstance(other, BiPoly) and self.coeffs == other.coeffs

    def __hash__(self):
        return hash(frozenset(self.coeffs.items()))

    def __repr__(self) -> str:
        if self.is_zero:
            return "BiPoly(0)"
        parts = []
        for (i, j), c in sorted(self.coeffs.items()):
            parts.append(f"({c})*x^{i}*y^{j}")
        return "BiPoly(" + " + ".join(parts) + ")"

    # -- ring operations ---------------------------------------------------

    def __add__(self, other: "BiPoly") -> "BiPoly":
        acc = dict(self.coeffs)
        for m, c in other.coeffs.items():
            acc[m] = acc.get(m, Fraction(0)) + c
        return BiPoly(acc)

    def __sub__(self, other: "BiPoly") -> "BiPoly":
        acc = dict(self.coeffs)
        for m, c in other.coeffs.items():
            acc[m] = acc.get(m, Fraction(0)) - c
        return BiPoly(acc)

    def __neg__(self) -> "BiPoly":
        return BiPoly({m: -c for m, c in self.coeffs.items()})

    def __mul__(self, other: "BiPoly") -> "BiPoly":
        acc: dict[Monomial, Fraction] = {}
        for (i1, j1), c1 in self.coeffs.items():
            for (i2, j2), c2 in other.coeffs.items():
                m = (i1 + i2, j1 + j2)
                acc[m] = acc.get(m, Fraction(0)) + c1 * c2
        return BiPoly(acc)

    def scale(self, c) -> "BiPoly":
        c = Fraction(c)
        if c == 0:
            return BiPoly.zero()
        return BiPoly({m: cc * c for m, cc in self.coeffs.items()})

    def pow(self, k: int) -> "BiPoly":
        if k < 0:
            raise ValueError("negative power")
        out = BiPoly.const(1)
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    # -- calculus ----------------------------------------------------------

    def partial_x(self) -> "BiPoly":
        return BiPoly({(i - 1, j): c * i for (i, j), c in self.coeffs.items() if i > 0})

    def partial_y(self) -> "BiPoly":
        return BiPoly({(i, j - 1): c * j for (i, j), c in self.coeffs.items() if j > 0})

    # -- evaluation --------------------------------------------------------

    def evaluate(self, x: float, y: float) -> float:
        """Floating-point value from exact coefficients."""
        fn = self._fn
        if fn is None:
            fn = self._fn = compile_poly(self)
        return fn(x, y)

    def evaluate_exact(self, x: Fraction, y: Fraction) -> Fraction:
        total = Fraction(0)
        for (i, j), c in self.coeffs.items():
            total += c * (x ** i) * (y ** j)
        return total

    # -- substitution ------------------------------------------------------

    def compose_linear(self, a, b, c, d) -> "BiPoly":
        """Substitute x -> a*x + b*y, y -> c*x + d*y (exact)."""
        u = BiPoly({(1, 0): Fraction(a), (0, 1): Fraction(b)})
        w = BiPoly({(1, 0): Fraction(c), (0, 1): Fraction(d)})
        return self.compose(u, w)

    def compose(self, u: "BiPoly", w: "BiPoly") -> "BiPoly":
        """Substitute x -> u(x, y), y -> w(x, y) (exact)."""
        max_i = max((i for i, _ in self.coeffs), default=0)
        max_j = max((j for _, j in self.coeffs), default=0)
        pow_u = [BiPoly.const(1)]
        for _ in range(max_i):
            pow_u.append(pow_u[-1] * u)
        pow_w = [BiPoly.const(1)]
        for _ in range(max_j):
            pow_w.append(pow_w[-1] * w)
        out = BiPoly.zero()
        for (i, j), c in self.coeffs.items():
            out = out + (pow_u[i] * pow_w[j]).scale(c)
        return out

    def shift(self, x0: Fraction, y0: Fraction) -> "BiPoly":
        """Substitute x -> x + x0, y -> y + y0 (exact translation)."""
        u = BiPoly({(1, 0): Fraction(1), (0, 0): Fraction(x0)})
        w = BiPoly({(0, 1): Fraction(1), (0, 0): Fraction(y0)})
        return self.compose(u, w)

    # -- serialization -----------------------------------------------------

    def to_records(self) -> list[list[int]]:
        recs = []
        for (i, j), c in sorted(self.coeffs.items()):
            recs.append([i, j, c.numerator, c.denominator])
        return recs

    @staticmethod
    def from_records(recs: Iterable[Iterable[int]]) -> "BiPoly":
        return BiPoly.from_terms((int(i), int(j), Fraction(int(n), int(d))) for i, j, n, d in recs)


def compile_poly(poly: "BiPoly"):
    """Generate a fast float evaluator for a polynomial (cached per instance).

    Emits straight-line code with explicit power chains; the hot integration
    loops call these millions of times.
    """
    if poly._fn is not None:
        return poly._fn
    if not poly.coeffs:
        fn = lambda x, y: 0.0
        poly._fn = fn
        return fn
    max_i = max(i for i, _ in poly.coeffs)
    max_j = max(j for _, j in poly.coeffs)
    lines = ["def _f(x, y):"]
    for k in range(2, max_i + 1):
        prev = "x" if k == 2 else f"x{k - 1}"
        lines.append(f"    x{k} = {prev} * x")
    for k in range(2, max_j + 1):
        prev = "y" if k == 2 else f"y{k - 1}"
        lines.append(f"    y{k} = {prev} * y")

    def mono(i, j):
        parts = []
        if i == 1:
            parts.append("x")
        elif i > 1:
            parts.append(f"x{i}")
        if j == 1:
            parts.append("y")
        elif j > 1:
            parts.append(f"y{j}")
        return " * ".join(parts)

    terms = []
    for (i, j), c in sorted(poly.coeffs.items()):
        m = mono(i, j)
        cf = repr(float(c))
        terms.append(f"{cf} * {m}" if m else cf)
    lines.append("    return " + " + ".join(terms))
    ns: dict = {}
    exec("\n".join(lines), ns)  # noqa: S102 - generated from exact coefficients
    fn = ns["_f"]
    poly._fn = fn
    return fn


# ---------------------------------------------------------------------------
# univariate helpers over Q (dense coefficient lists, low degree first)
# ---------------------------------------------------------------------------

def _uni_trim(p: list[Fraction]) -> list[Fraction]:
    while p and p[-1] == 0:
        p.pop()
    return p


def _uni_mul(a: list[Fraction], b: list[Fraction]) -> list[Fraction]:
    if not a or not b:
        return []
    out = [Fraction(0)] * (len(a) + len(b) - 1)
    for i, ca in enumerate(a):
        if ca == 0:
            continue
        for j, cb in enumerate(b):
            out[i + j] += ca * cb
    return _uni_trim(out)


def _uni_sub(a: list[Fraction], b: list[Fraction]) -> list[Fraction]:
    out = list(a) + [Fraction(0)] * max(0, len(b) - len(a))
    for i, cb in enumerate(b):
        out[i] -= cb
    return _uni_trim(out)


def _uni_divmod(a: list[Fraction], b: list[Fraction]) -> tuple[list[Fraction], list[Fraction]]:
    if not b:
        raise ZeroDivisionError("univariate division by zero")
    q = [Fraction(0)] * max(0, len(a) - len(b) + 1)
    r = list(a)
    while len(r) >= len(b) and _uni_trim(r):
        k = len(r) - len(b)
        c = r[-1] / b[-1]
        q[k] = c
        for i, cb in enumerate(b):
            r[k + i] -= c * cb
        _uni_trim(r)
    return _uni_trim(q), r


def _uni_gcd(a: list[Fraction], b: list[Fraction]) -> list[Fraction]:
    a, b = list(a), list(b)
    while b:
        _, r = _uni_divmod(a, b)
        a, b = b, r
    if a:
        lead = a[-1]
        a = [c / lead for c in a]
    return a


# ---------------------------------------------------------------------------
# bivariate GCD via content / primitive part recursion on y
# ---------------------------------------------------------------------------

def _to_y_recursive(f: BiPoly) -> list[list[Fraction]]:
    """View f as a polynomial in y whose coefficients are dense polys in x."""
    if f.is_zero:
        return []
    deg_y = max(j for _, j in f.coeffs)
    out: list[list[Fraction]] = [[] for _ in range(deg_y + 1)]
    for (i, j), c in f.coeffs.items():
        col = out[j]
        if len(col) <= i:
            col.extend([Fraction(0)] * (i + 1 - len(col)))
        col[i] = c
    return [_uni_trim(col) for col in out]


def _from_y_recursive(rec: list[list[Fraction]]) -> BiPoly:
    acc: dict[Monomial, Fraction] = {}
    for j, col in enumerate(rec):
        for i, c in enumerate(col):
            if c != 0:
                acc[(i, j)] = c
    return BiPoly(acc)


def _rec_trim(rec: list[list[Fraction]]) -> list[list[Fraction]]:
    while rec and not rec[-1]:
        rec.pop()
    return rec


def _rec_content(rec: list[list[Fraction]]) -> list[Fraction]:
    g: list[Fraction] = []
    for col in rec:
        if col:
            g = _uni_gcd(g, col) if g else [c / col[-1] for c in col]
    return g


def _rec_primitive(rec: list[list[Fraction]]) -> tuple[list[Fraction], list[list[Fraction]]]:
    cont = _rec_content(rec)
    if not cont:
        return [], []
    pp = []
    for col in rec:
        q, r = _uni_divmod(col, cont) if col else ([], [])
        assert not r, "content must divide every coefficient"
        pp.append(q)
    return cont, pp


def _rec_scale(rec: list[list[Fraction]], s: list[Fraction]) -> list[list[Fraction]]:
    return [_uni_mul(col, s) for col in rec]


def _rec_pseudo_rem(f: list[list[Fraction]], g: list[list[Fraction]]) -> list[list[Fraction]]:
    """Pseudo-remainder of f by g as polynomials in y over Q[x]."""
    f = [list(c) for c in f]
    dg = len(g) - 1
    lg = g[-1]
    while len(f) - 1 >= dg and _rec_trim(f):
        df = len(f) - 1
        lf = f[-1]
        # f := lg * f - lf * y^(df-dg) * g
        f = _rec_scale(f, lg)
        shift = df - dg
        for k, col in enumerate(g):
            idx = k + shift
            f[idx] = _uni_sub(f[idx], _uni_mul(col, lf))
        _rec_trim(f)
        if len(f) - 1 == df and f:  # no progress guard (cannot happen)
            break
    return f


def poly_gcd(f: BiPoly, g: BiPoly) -> BiPoly:
    """Exact GCD of two bivariate polynomials, content-normalized.

    The result is normalized to have integer coprime coefficients with the
    leading (graded-lex greatest) coefficient positive; the GCD of anything
    with zero is the other argument normalized.
    """
    if f.is_zero and g.is_zero:
        return BiPoly.zero()
    if f.is_zero:
        return _normalize(g)
    if g.is_zero:
        return _normalize(f)
    a = _to_y_recursive(f)
    b = _to_y_recursive(g)
    cont_a, pp_a = _rec_primitive(a)
    cont_b, pp_b = _rec_primitive(b)
    cont_gcd = _uni_gcd(cont_a, cont_b)
    if len(pp_a) < len(pp_b):
        pp_a, pp_b = pp_b, pp_a
    # primitive PRS on y
    while True:
        if not _rec_trim(pp_b):
            gcd_pp = pp_a
            break
        if len(pp_b) == 1:
            # y-free remainder: only an x-factor can still be shared
            shared = _uni_gcd(pp_b[0], _rec_content(pp_a)) or [Fraction(1)]
            gcd_pp = [shared]
            break
        r = _rec_pseudo_rem(pp_a, pp_b)
        _, r = _rec_primitive(r) if _rec_trim(r) else ([], [])
        pp_a, pp_b = pp_b, r
    result = _from_y_recursive(_rec_scale(gcd_pp, cont_gcd) if cont_gcd else gcd_pp)
    return _normalize(result)


def _normalize(f: BiPoly) -> BiPoly:
    """Scale so all coefficients are coprime integers, leading one positive."""
    if f.is_zero:
        return f
    denom = 1
    for c in f.coeffs.values():
        denom = denom * c.denominator // int_gcd(denom, c.denominator)
    numer = 0
    for c in f.coeffs.values():
        numer = int_gcd(numer, abs(c.numerator * (denom // c.denominator)))
    lead = f.coeffs[max(f.coeffs, key=lambda m: (m[0] + m[1], m))]
    s = Fraction(denom, numer)
    if lead < 0:
        s = -s
    return f.scale(s)


def poly_divexact(f: BiPoly, g: BiPoly) -> BiPoly:
    """Exact division f / g; raises if the division leaves a remainder."""
    if g.is_zero:
        raise ZeroDivisionError("division by zero polynomial")
    if f.is_zero:
        return BiPoly.zero()
    rem = dict(f.coeffs)
    out: dict[Monomial, Fraction] = {}
    g_lead = max(g.coeffs, key=lambda m: (m[0] + m[1], m))
    g_lc = g.coeffs[g_lead]
    while rem:
        m = max(rem, key=lambda mm: (mm[0] + mm[1], mm))
        di, dj = m[0] - g_lead[0], m[1] - g_lead[1]
        if di < 0 or dj < 0:
            raise ArithmeticError("inexact polynomial division")
        c = rem[m] / g_lc
        out[(di, dj)] = out.get((di, dj), Fraction(0)) + c
        for (i, j), gc in g.coeffs.items():
            mm = (i + di, j + dj)
            new = rem.get(mm, Fraction(0)) - c * gc
            if new == 0:
                rem.pop(mm, None)
            else:
                rem[mm] = new
    return BiPoly(out)


# ---------------------------------------------------------------------------
# resultants (Sylvester matrix + fraction-free Bareiss over Q[x])
# ---------------------------------------------------------------------------

def _rec_lead_scale_row(entries, s):
    return [_uni_mul(e, s) if e else [] for e in entries]


def resultant_y(f: BiPoly, g: BiPoly) -> list[Fraction]:
    """Resultant of f and g with respect to y, as a dense polynomial in x."""
    a = _to_y_recursive(f)
    b = _to_y_recursive(g)
    m, n = len(a) - 1, len(b) - 1
    if m < 0 or n < 0:
        return []
    if m == 0 and n == 0:
        return [Fraction(1)]
    size = m + n
    mat: list[list[list[Fraction]]] = [[[] for _ in range(size)] for _ in range(size)]
    for r in range(n):
        for k, col in enumerate(a):
            mat[r][r + (m - k)] = list(col)
    for r in range(m):
        for k, col in enumerate(b):
            mat[n + r][r + (n - k)] = list(col)
    # Bareiss elimination with exact polynomial division
    prev = [Fraction(1)]
    sign = 1
    for k in range(size - 1):
        if not mat[k][k]:
            swap = next((r for r in range(k + 1, size) if mat[r][k]), None)
            if swap is None:
                return []
            mat[k], mat[swap] = mat[swap], mat[k]
            sign = -sign
        for i in range(k + 1, size):
            for j in range(k + 1, size):
                num = _uni_sub(_uni_mul(mat[i][j], mat[k][k]), _uni_mul(mat[i][k], mat[k][j]))
                if num:
                    q, r = _uni_divmod(num, prev)
                    assert not r, "Bareiss division must be exact"
                    mat[i][j] = q
                else:
                    mat[i][j] = []
            mat[i][k] = []
        prev = mat[k][k] if mat[k][k] else prev
    det = mat[size - 1][size - 1]
    return [c * sign for c in det] if sign < 0 else det


def resultant_x(f: BiPoly, g: BiPoly) -> list[Fraction]:
    """Resultant with respect to x, as a dense polynomial in y."""
    swap = lambda p: BiPoly({(j, i): c for (i, j), c in p.coeffs.items()})
    return resultant_y(swap(f), swap(g))


# ---------------------------------------------------------------------------
# vector fields
# ---------------------------------------------------------------------------

class VectorField:
    """Planar polynomial vector field v = P d/dx + Q d/dy."""

    __slots__ = ("p", "q", "degree")

    def __init__(self, p: BiPoly, q: BiPoly):
        if p.is_zero and q.is_zero:
            raise IdenticallyZeroField("both components are identically zero")
        self.p = p
        self.q = q
        self.degree = max(p.degree if not p.is_zero else 0,
                          q.degree if not q.is_zero else 0)

    def __repr__(self):
        return f"VectorField(p={self.p!r}, q={self.q!r})"

    def __eq__(self, other):
        return isinstance(other, VectorField) and self.p == other.p and self.q == other.q

    def evaluate(self, x: float, y: float) -> tuple[float, float]:
        return self.p.evaluate(x, y), self.q.evaluate(x, y)

    def jacobian(self, x: float, y: float) -> tuple[tuple[float, float], tuple[float, float]]:
        return (
            (self.p.partial_x().evaluate(x, y), self.p.partial_y().evaluate(x, y)),
            (self.q.partial_x().evaluate(x, y), self.q.partial_y().evaluate(x, y)),
        )

    def scale(self, c) -> "VectorField":
        return VectorField(self.p.scale(c), self.q.scale(c))

    def shift(self, x0: Fraction, y0: Fraction) -> "VectorField":
        return VectorField(self.p.shift(x0, y0), self.q.shift(x0, y0))

    def transform_linear(self, a, b, c, d) -> "VectorField":
        """Pull the field back along (x, y) -> (a x + b y, c x + d y).

        The transformed field is T^-1 v(T(x, y)); orbits map onto orbits.
        """
        a, b, c, d = (Fraction(v) for v in (a, b, c, d))
        det = a * d - b * c
        if det == 0:
            raise ValueError("transform must be invertible")
        pT = self.p.compose_linear(a, b, c, d)
        qT = self.q.compose_linear(a, b, c, d)
        new_p = pT.scale(d / det) + qT.scale(-b / det)
        new_q = pT.scale(-c / det) + qT.scale(a / det)
        return VectorField(new_p, new_q)


def make_star_field(v: VectorField) -> tuple[VectorField, BiPoly]:
    """Divide out the common factor F = gcd(P, Q); returns (reduced field, F)."""
    f = poly_gcd(v.p, v.q)
    if f.is_constant():
        return v, f
    p = poly_divexact(v.p, f)
    q = poly_divexact(v.q, f)
    return VectorField(p, q), f


def is_star_field(v: VectorField) -> bool:
    return poly_gcd(v.p, v.q).is_constant()


def directional_derivative(v: VectorField, f: BiPoly) -> BiPoly:
    """Lie derivative L_v f = P df/dx + Q df/dy, exact."""
    return v.p * f.partial_x() + v.q * f.partial_y()


def degree_bounds(v: VectorField) -> tuple[int, int]:
    """Bezout bound on singular points and the tangency-point bound.

    For degree n >= 1 the pair is (n^2, 6n^2 - 2n); a nonzero constant field
    is reported as (1, 0).
    """
    n = v.degree
    if n == 0:
        return 1, 0
    return n * n, 6 * n * n - 2 * n


def check_star_field(v: VectorField) -> None:
    if not is_star_field(v):
        raise DegenerateSystem("components share a nonconstant factor")


# ---------------------------------------------------------------------------
# field file format
# ---------------------------------------------------------------------------

def field_to_json(v: VectorField, name: str | None = None) -> str:
    doc = {"p": v.p.to_records(), "q": v.q.to_records()}
    if name is not None:
        doc["name"] = name
    return json.dumps(doc, indent=2, sort_keys=True)


def field_from_json(text: str) -> tuple[VectorField, str | None]:
    doc = json.loads(text)
    if "p" not in doc or "q" not in doc:
        raise ValueError("field file must contain 'p' and 'q' record lists")
    p = BiPoly.from_records(doc["p"])
    q = BiPoly.from_records(doc["q"])
    return VectorField(p, q), doc.get("name")


def load_field(path: str) -> tuple[VectorField, str | None]:
    with open(path, "r", encoding="utf-8") as fh:
        return field_from_json(fh.read())


def save_field(path: str, v: VectorField, name: str | None = None) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(field_to_json(v, name))
        fh.write("\n")

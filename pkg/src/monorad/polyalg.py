"""Exact polynomial arithmetic over the Gaussian rationals.

Polynomials are sparse maps from exponent tuples to :class:`ExactScalar`
coefficients.  The module also holds the front-end parser, the Sylvester
resultant and the branch polynomial ``P_n * Res_y(P, dP/dy)`` of a family.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction
from functools import reduce

from .errors import ParseError

UNKNOWN = "y"
IMAGINARY_UNIT = "I"


def _frac(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, float):
        return Fraction(x)
    return Fraction(x)


@dataclass(frozen=True)
class ExactScalar:
    """A Gaussian rational ``re + im*i``; Fractions keep lowest terms."""

    re: Fraction = Fraction(0)
    im: Fraction = Fraction(0)

    def __post_init__(self):
        object.__setattr__(self, "re", _frac(self.re))
        object.__setattr__(self, "im", _frac(self.im))

    @classmethod
    def coerce(cls, x) -> "ExactScalar":
        if isinstance(x, ExactScalar):
            return x
        if isinstance(x, complex):
            return cls(Fraction(x.real), Fraction(x.imag))
        return cls(_frac(x))

    @classmethod
    def approximate(cls, z, max_den: int = 10**12) -> "ExactScalar":
        z = complex(z)
        return cls(Fraction(z.real).limit_denominator(max_den),
                   Fraction(z.imag).limit_denominator(max_den))

    @property
    def real_num(self):
        return self.re.numerator

    @property
    def real_den(self):
        return self.re.denominator

    @property
    def imag_num(self):
        return self.im.numerator

    @property
    def imag_den(self):
        return self.im.denominator

    def is_zero(self) -> bool:
        return self.re == 0 and self.im == 0

    def __bool__(self):
        return not self.is_zero()

    def __add__(self, other):
        o = ExactScalar.coerce(other)
        return ExactScalar(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __neg__(self):
        return ExactScalar(-self.re, -self.im)

    def __sub__(self, other):
        return self + (-ExactScalar.coerce(other))

    def __rsub__(self, other):
        return ExactScalar.coerce(other) - self

    def __mul__(self, other):
        o = ExactScalar.coerce(other)
        return ExactScalar(self.re * o.re - self.im * o.im,
                           self.re * o.im + self.im * o.re)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = ExactScalar.coerce(other)
        norm = o.re * o.re + o.im * o.im
        if norm == 0:
            raise ZeroDivisionError("division by zero scalar")
        return ExactScalar((self.re * o.re + self.im * o.im) / norm,
                           (self.im * o.re - self.re * o.im) / norm)

    def __rtruediv__(self, other):
        return ExactScalar.coerce(other) / self

    def __pow__(self, k: int):
        if k < 0:
            return ExactScalar(1) / self ** (-k)
        result = ExactScalar(1)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def conjugate(self):
        return ExactScalar(self.re, -self.im)

    def __complex__(self):
        return complex(float(self.re), float(self.im))

    def __str__(self):
        if self.im == 0:
            return str(self.re)
        imag = "I" if self.im == 1 else "-I" if self.im == -1 else f"{self.im}*I"
        if self.re == 0:
            return imag
        if imag.startswith("-"):
            return f"({self.re}{imag})"
        return f"({self.re}+{imag})"


ZERO = ExactScalar(0)
ONE = ExactScalar(1)


class MultiPoly:
    """Sparse multivariate polynomial with exact Gaussian-rational coefficients."""

    __slots__ = ("variables", "terms")

    def __init__(self, variables, terms=None):
        self.variables = tuple(variables)
        clean = {}
        for exps, c in (terms or {}).items():
            c = ExactScalar.coerce(c)
            if c.is_zero():
                continue
            exps = tuple(exps)
            if len(exps) != len(self.variables):
                raise ValueError("exponent tuple length does not match variables")
            clean[exps] = c
        self.terms = clean

    @classmethod
    def constant(cls, c, variables=()):
        variables = tuple(variables)
        return cls(variables, {(0,) * len(variables): c})

    @classmethod
    def variable(cls, name, variables):
        variables = tuple(variables)
        exps = tuple(1 if v == name else 0 for v in variables)
        if name not in variables:
            raise ValueError(f"unknown variable {name!r}")
        return cls(variables, {exps: ONE})

    # -- structure ----------------------------------------------------------
    def is_zero(self) -> bool:
        return not self.terms

    def is_constant(self) -> bool:
        return all(not any(e) for e in self.terms)

    def constant_value(self) -> ExactScalar:
        return self.terms.get((0,) * len(self.variables), ZERO)

    def total_degree(self) -> int:
        return max((sum(e) for e in self.terms), default=-1)

    def degree(self, var) -> int:
        k = self.variables.index(var)
        return max((e[k] for e in self.terms), default=-1)

    def leading(self):
        """Lexicographically largest (exponents, coefficient)."""
        e = max(self.terms)
        return e, self.terms[e]

    def _check(self, other):
        if self.variables != other.variables:
            raise ValueError(f"variable mismatch: {self.variables} vs {other.variables}")

    def _lift(self, other):
        if isinstance(other, MultiPoly):
            self._check(other)
            return other
        return MultiPoly.constant(other, self.variables)

    def with_variables(self, variables):
        """Re-express over a superset of the current variables."""
        variables = tuple(variables)
        idx = [variables.index(v) for v in self.variables]
        terms = {}
        for e, c in self.terms.items():
            new = [0] * len(variables)
            for k, j in enumerate(idx):
                new[j] = e[k]
            terms[tuple(new)] = c
        return MultiPoly(variables, terms)

    # -- arithmetic -----------------------------------------------------------
    def __add__(self, other):
        other = self._lift(other)
        terms = dict(self.terms)
        for e, c in other.terms.items():
            terms[e] = terms.get(e, ZERO) + c
        return MultiPoly(self.variables, terms)

    __radd__ = __add__

    def __neg__(self):
        return MultiPoly(self.variables, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-self._lift(other))

    def __rsub__(self, other):
        return self._lift(other) - self

    def __mul__(self, other):
        if not isinstance(other, MultiPoly):
            c = ExactScalar.coerce(other)
            return MultiPoly(self.variables, {e: v * c for e, v in self.terms.items()})
        self._check(other)
        terms = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                terms[e] = terms.get(e, ZERO) + c1 * c2
        return MultiPoly(self.variables, terms)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if k < 0:
            raise ValueError("negative powers are not polynomial")
        result = MultiPoly.constant(ONE, self.variables)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def __eq__(self, other):
        if isinstance(other, MultiPoly):
            return self.variables == other.variables and self.terms == other.terms
        return self == MultiPoly.constant(other, self.variables)

    def __hash__(self):
        return hash((self.variables, frozenset(self.terms.items())))

    def exact_div(self, divisor: "MultiPoly") -> "MultiPoly":
        """Quotient of an exact division; raises ArithmeticError otherwise."""
        divisor = self._lift(divisor)
        if divisor.is_zero():
            raise ZeroDivisionError("division by the zero polynomial")
        if divisor.is_constant():
            c = divisor.constant_value()
            return MultiPoly(self.variables, {e: v / c for e, v in self.terms.items()})
        lead_e, lead_c = divisor.leading()
        rem = dict(self.terms)
        quot = {}
        while rem:
            e = max(rem)
            shift = tuple(a - b for a, b in zip(e, lead_e))
            if min(shift) < 0:
                raise ArithmeticError("polynomial division is not exact")
            qc = rem[e] / lead_c
            quot[shift] = qc
            for de, dc in divisor.terms.items():
                te = tuple(a + b for a, b in zip(de, shift))
                v = rem.get(te, ZERO) - qc * dc
                if v.is_zero():
                    rem.pop(te, None)
                else:
                    rem[te] = v
        return MultiPoly(self.variables, quot)

    def diff(self, var) -> "MultiPoly":
        k = self.variables.index(var)
        terms = {}
        for e, c in self.terms.items():
            if e[k]:
                ne = list(e)
                ne[k] -= 1
                terms[tuple(ne)] = c * e[k]
        return MultiPoly(self.variables, terms)

    def coefficients_in(self, var):
        """Descending coefficient list in ``var``, over the remaining variables."""
        k = self.variables.index(var)
        rest = self.variables[:k] + self.variables[k + 1:]
        deg = self.degree(var)
        buckets = [dict() for _ in range(max(deg, 0) + 1)]
        for e, c in self.terms.items():
            buckets[e[k]][e[:k] + e[k + 1:]] = c
        return [MultiPoly(rest, b) for b in reversed(buckets)]

    # -- evaluation -------------------------------------------------------------
    def evaluate(self, point, ctx=None):
        from ._numeric import context

        ctx = ctx or context()
        if len(point) != len(self.variables):
            raise ValueError("point dimension does not match variables")
        xs = [ctx.c(p) for p in point]
        acc = ctx.c(0)
        for e, c in self.terms.items():
            term = ctx.c(c)
            for x, k in zip(xs, e):
                if k:
                    term = term * x ** k
            acc = acc + term
        return acc

    def evaluate_exact(self, point) -> ExactScalar:
        point = [ExactScalar.coerce(p) for p in point]
        acc = ZERO
        for e, c in self.terms.items():
            term = c
            for x, k in zip(point, e):
                if k:
                    term = term * x ** k
            acc = acc + term
        return acc

    def substitute_line(self, origin, direction):
        """Restrict to ``x = origin + t*direction``; descending list in ``t``."""
        n = len(self.variables)
        if len(origin) != n or len(direction) != n:
            raise ValueError("line dimension does not match variables")
        lines = [[ExactScalar.coerce(o), ExactScalar.coerce(d)]
                 for o, d in zip(origin, direction)]
        powers = [{0: [ONE]} for _ in range(n)]

        def power(j, k):
            cache = powers[j]
            if k not in cache:
                cache[k] = upoly_mul_asc(power(j, k - 1), lines[j])
            return cache[k]

        acc = [ZERO]
        for e, c in self.terms.items():
            term = [c]
            for j, k in enumerate(e):
                if k:
                    term = upoly_mul_asc(term, power(j, k))
            acc = upoly_add_asc(acc, term)
        return upoly_trim(list(reversed(acc)))

    # -- normalization / printing -------------------------------------------------
    def normalized(self) -> "MultiPoly":
        """Scale to coprime Gaussian-integer coefficients, lex-leading term in
        the quadrant ``re > 0, im >= 0``."""
        if self.is_zero():
            return self
        dens = [c.re.denominator for c in self.terms.values()]
        dens += [c.im.denominator for c in self.terms.values()]
        lcm = reduce(lambda a, b: a * b // math.gcd(a, b), dens, 1)
        nums = []
        for c in self.terms.values():
            nums += [int(c.re * lcm), int(c.im * lcm)]
        g = reduce(math.gcd, nums, 0)
        scale = ExactScalar(Fraction(lcm, g))
        _, lead = self.leading()
        lead = lead * scale
        for unit in (ONE, ExactScalar(0, -1), ExactScalar(-1), ExactScalar(0, 1)):
            v = lead * unit
            if v.re > 0 and v.im >= 0:
                break
        return self * (scale * unit)

    def __str__(self):
        if not self.terms:
            return "0"
        parts = []
        for e in sorted(self.terms, reverse=True):
            c = self.terms[e]
            mono = "*".join(
                v if k == 1 else f"{v}^{k}" for v, k in zip(self.variables, e) if k)
            negative = (c.im == 0 and c.re < 0) or (c.re == 0 and c.im < 0)
            mag = -c if negative else c
            if mono and mag == ONE:
                body = mono
            elif mono:
                body = f"{mag}*{mono}"
            else:
                body = str(mag)
            parts.append(("-" if negative else "+", body))
        sign, body = parts[0]
        out = ("-" if sign == "-" else "") + body
        for sign, body in parts[1:]:
            out += f" {sign} {body}"
        return out

    def __repr__(self):
        return f"MultiPoly({self.variables}, {str(self)!r})"


# -- univariate helpers (ascending / descending lists of ExactScalar) ---------------

def upoly_trim(desc):
    i = 0
    while i < len(desc) - 1 and desc[i].is_zero():
        i += 1
    return desc[i:] if desc else [ZERO]


def upoly_add_asc(a, b):
    out = [ZERO] * max(len(a), len(b))
    for i, c in enumerate(a):
        out[i] = out[i] + c
    for i, c in enumerate(b):
        out[i] = out[i] + c
    return out


def upoly_mul_asc(a, b):
    out = [ZERO] * (len(a) + len(b) - 1)
    for i, ca in enumerate(a):
        if ca.is_zero():
            continue
        for j, cb in enumerate(b):
            out[i + j] = out[i + j] + ca * cb
    return out


def upoly_is_zero(desc) -> bool:
    return all(c.is_zero() for c in desc)


def upoly_degree(desc) -> int:
    desc = upoly_trim(desc)
    return -1 if upoly_is_zero(desc) else len(desc) - 1


def upoly_derivative(desc):
    n = len(desc) - 1
    if n <= 0:
        return [ZERO]
    return [c * (n - i) for i, c in enumerate(desc[:-1])]


def upoly_divmod(num, den):
    num = list(upoly_trim(num))
    den = upoly_trim(den)
    if upoly_is_zero(den):
        raise ZeroDivisionError("division by zero polynomial")
    dn = len(den) - 1
    if len(num) - 1 < dn:
        return [ZERO], num
    quot = []
    rem = num
    while len(rem) - 1 >= dn and not upoly_is_zero(rem):
        c = rem[0] / den[0]
        quot.append(c)
        rem = [r - c * d for r, d in zip(rem, den + [ZERO] * (len(rem) - len(den)))][1:]
    while len(quot) < len(num) - dn:
        quot.append(ZERO)
    return upoly_trim(quot), upoly_trim(rem) if rem else [ZERO]


def upoly_gcd(a, b):
    a, b = upoly_trim(a), upoly_trim(b)
    while not upoly_is_zero(b):
        _, r = upoly_divmod(a, b)
        a, b = b, r
    if upoly_is_zero(a):
        return a
    return [c / a[0] for c in a]


def upoly_squarefree(desc):
    """Squarefree part ``f / gcd(f, f')``, made monic."""
    desc = upoly_trim(desc)
    if upoly_degree(desc) <= 0:
        return desc
    g = upoly_gcd(desc, upoly_derivative(desc))
    q, _ = upoly_divmod(desc, g)
    return [c / q[0] for c in q]


# -- parser ------------------------------------------------------------------------

_TOKEN = re.compile(r"\s*(?:(\d+(?:\.\d*)?|\.\d+)|([A-Za-z_][A-Za-z_0-9]*)|(\*\*|[-+*/^()]))")


def _tokenize(text):
    tokens = []
    pos = 0
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise ParseError(f"unexpected character {text[pos]!r}", pos)
        start = m.start(m.lastindex)
        if m.group(1):
            tokens.append(("num", m.group(1), start))
        elif m.group(2):
            tokens.append(("ident", m.group(2), start))
        else:
            op = "^" if m.group(3) == "**" else m.group(3)
            tokens.append(("op", op, start))
        pos = m.end()
    tokens.append(("end", None, len(text)))
    return tokens


class _Parser:
    def __init__(self, text, variables):
        self.tokens = _tokenize(text)
        self.i = 0
        self.variables = variables

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect_op(self, op):
        kind, val, pos = self.take()
        if kind != "op" or val != op:
            raise ParseError(f"expected {op!r}", pos)

    def parse(self):
        if self.peek()[0] == "end":
            raise ParseError("empty expression", 0)
        value = self.expr()
        kind, val, pos = self.peek()
        if kind != "end":
            raise ParseError(f"unexpected token {val!r}", pos)
        return value

    def expr(self):
        value = self.term()
        while True:
            kind, val, _ = self.peek()
            if kind == "op" and val in "+-":
                self.take()
                rhs = self.term()
                value = value + rhs if val == "+" else value - rhs
            else:
                return value

    def term(self):
        value = self.unary()
        while True:
            kind, val, pos = self.peek()
            if kind == "op" and val in "*/":
                self.take()
                rhs = self.unary()
                if val == "*":
                    value = value * rhs
                else:
                    if not rhs.is_constant():
                        raise ParseError(
                            "non-polynomial input: division by an expression with variables",
                            pos)
                    c = rhs.constant_value()
                    if c.is_zero():
                        raise ParseError("division by zero literal", pos)
                    value = value * (ONE / c)
            else:
                return value

    def unary(self):
        kind, val, _ = self.peek()
        if kind == "op" and val in "+-":
            self.take()
            inner = self.unary()
            return -inner if val == "-" else inner
        return self.factor()

    def factor(self):
        base = self.base()
        kind, val, pos = self.peek()
        if kind == "op" and val == "^":
            self.take()
            kind, exp, epos = self.take()
            if kind != "num" or not exp.isdigit():
                raise ParseError("exponent must be a non-negative integer", epos)
            base = base ** int(exp)
        return base

    def base(self):
        kind, val, pos = self.take()
        if kind == "num":
            return MultiPoly.constant(Fraction(val), self.variables)
        if kind == "ident":
            if val == IMAGINARY_UNIT:
                return MultiPoly.constant(ExactScalar(0, 1), self.variables)
            return MultiPoly.variable(val, self.variables)
        if kind == "op" and val == "(":
            inner = self.expr()
            self.expect_op(")")
            return inner
        if kind == "end":
            raise ParseError("unexpected end of input", pos)
        raise ParseError(f"unexpected token {val!r}", pos)


def parse_poly(text: str, variables=None) -> MultiPoly:
    """Parse a polynomial; variables default to the sorted identifiers used."""
    if variables is None:
        names = {val for kind, val, _ in _tokenize(text) if kind == "ident"}
        names.discard(IMAGINARY_UNIT)
        variables = tuple(sorted(names))
    return _Parser(text, tuple(variables)).parse()


def parse_scalar(text: str) -> ExactScalar:
    poly = parse_poly(text, ())
    return poly.constant_value()


@dataclass(frozen=True)
class AlgebraicFamily:
    """``P_n y^n + ... + P_0 = 0`` with coefficients polynomial in ``var_names``."""

    n: int
    coeffs: tuple
    var_names: tuple

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("degree in y must be at least 1")
        if len(self.coeffs) != self.n + 1:
            raise ValueError("need n+1 coefficients")
        if self.coeffs[0].is_zero():
            raise ValueError("leading coefficient P_n is the zero polynomial")
        for c in self.coeffs:
            if c.variables != tuple(self.var_names):
                raise ValueError("coefficients must share the family's variables")

    @classmethod
    def from_poly(cls, poly: MultiPoly, unknown: str = UNKNOWN) -> "AlgebraicFamily":
        if unknown not in poly.variables or poly.degree(unknown) < 1:
            raise ParseError(f"zero degree in {unknown}")
        coeffs = poly.coefficients_in(unknown)
        var_names = coeffs[0].variables
        return cls(len(coeffs) - 1, tuple(coeffs), var_names)

    @property
    def nvars(self) -> int:
        return len(self.var_names)

    def to_poly(self) -> MultiPoly:
        variables = (UNKNOWN,) + tuple(self.var_names)
        y = MultiPoly.variable(UNKNOWN, variables)
        acc = MultiPoly(variables)
        for k, c in enumerate(self.coeffs):
            acc = acc + c.with_variables(variables) * y ** (self.n - k)
        return acc

    def __str__(self):
        return str(self.to_poly())


def parse_family(text: str) -> AlgebraicFamily:
    poly = parse_poly(text)
    if UNKNOWN not in poly.variables:
        raise ParseError(f"zero degree in {UNKNOWN}", 0)
    return AlgebraicFamily.from_poly(poly)


def eval_coeffs(fam: AlgebraicFamily, point, ctx=None):
    """``(P_n(point), ..., P_0(point))`` at working precision."""
    if len(point) != fam.nvars:
        raise ValueError(f"expected a point with {fam.nvars} coordinates")
    return [c.evaluate(point, ctx) for c in fam.coeffs]


# -- resultants -------------------------------------------------------------------

def sylvester_matrix(f_coeffs, g_coeffs):
    """Sylvester matrix of two descending coefficient lists (MultiPoly entries)."""
    m, n = len(f_coeffs) - 1, len(g_coeffs) - 1
    zero = f_coeffs[0] * 0
    size = m + n
    rows = []
    for i in range(n):
        rows.append([zero] * i + list(f_coeffs) + [zero] * (size - m - 1 - i))
    for i in range(m):
        rows.append([zero] * i + list(g_coeffs) + [zero] * (size - n - 1 - i))
    return rows


def bareiss_det(matrix):
    """Fraction-free elimination determinant of a square MultiPoly matrix."""
    n = len(matrix)
    if n == 0:
        return None
    m = [list(row) for row in matrix]
    one = m[0][0] ** 0
    sign = 1
    prev = one
    for k in range(n - 1):
        if m[k][k].is_zero():
            swap = next((i for i in range(k + 1, n) if not m[i][k].is_zero()), None)
            if swap is None:
                return m[0][0] * 0
            m[k], m[swap] = m[swap], m[k]
            sign = -sign
        pivot = m[k][k]
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                m[i][j] = (m[i][j] * pivot - m[i][k] * m[k][j]).exact_div(prev)
        prev = pivot
    det = m[n - 1][n - 1]
    return -det if sign < 0 else det


def resultant_y(f: MultiPoly, g: MultiPoly, var: str = UNKNOWN) -> MultiPoly:
    """Determinant of the Sylvester matrix of ``f`` and ``g`` with respect to ``var``."""
    if f.variables != g.variables:
        variables = tuple(sorted(set(f.variables) | set(g.variables)))
        f, g = f.with_variables(variables), g.with_variables(variables)
    if f.degree(var) < 1 or g.degree(var) < 1:
        raise ValueError(f"both polynomials need positive degree in {var}")
    return bareiss_det(sylvester_matrix(f.coefficients_in(var), g.coefficients_in(var)))


def branch_poly(fam: AlgebraicFamily) -> MultiPoly:
    """Normalized ``P_n * Res_y(P, dP/dy)``; its zero set contains the branch locus.

    For ``n == 1`` the discriminant factor is vacuous and ``P_n`` alone is returned.
    """
    lead = fam.coeffs[0]
    if fam.n == 1:
        return lead.normalized()
    poly = fam.to_poly()
    disc = resultant_y(poly, poly.diff(UNKNOWN))
    return (lead * disc).normalized()

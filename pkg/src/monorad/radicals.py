"""Expressing roots in radicals, or certifying that it cannot be done.

Elements of the root field are expression DAGs over root symbols ``y_i``.  The
monodromy group acts on them exactly, by relabeling symbols; everything else
is evaluated numerically on a :class:`SampleGrid` of labeled fibers.

For a solvable group with derived series ``M = G_0 > G_1 > ... > G_m = e`` the
tower is built top-down.  An element fixed by ``G_i`` is split into Lagrange
resolvents, eigencomponents for the abelian quotient ``G_{i-1}/G_i``; the
``e``-th power of a component of eigen-order ``e`` is fixed by ``G_{i-1}`` and
is expressed one level down.  Elements fixed by the whole group are
single-valued, hence rational in the slice parameter, and are recovered by
interpolation.
"""
from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from fractions import Fraction

from ._numeric import NumContext, horner
from .errors import (EigenCheckFailed, NoFit, PreconditionError, StepCollapse,
                     VerificationFailed)
from .groups import (CharacterTable, DerivedSeries, Perm, PermGroup, RootOfUnity,
                     derived_series, quotient_characters)
from .monodromy import MonodromyRep, SlicedFamily, track_fiber
from .polyalg import ExactScalar, MultiPoly, parse_scalar
from .roots import Fiber

DEFAULT_DEGREE_CAP = 12
DROP_TOL = 1e-9
EIG_TOL = 1e-8


def default_samples(degree_cap: int = DEFAULT_DEGREE_CAP) -> int:
    return 2 * degree_cap + 8


def default_verify_tol(bits: int) -> float:
    return 2.0 ** (-(bits - 33))


# ---------------------------------------------------------------------------
# field elements

class FieldElem:
    """Node of an element DAG; identity-hashed so DAGs can share subterms."""

    __slots__ = ("__weakref__",)

    def __add__(self, other):
        return Add((self, _elem(other)))

    def __radd__(self, other):
        return Add((_elem(other), self))

    def __sub__(self, other):
        return Add((self, Scale(ExactScalar(-1), _elem(other))))

    def __mul__(self, other):
        return Mul((self, _elem(other)))

    def __rmul__(self, other):
        return Mul((_elem(other), self))

    def __truediv__(self, other):
        return Div(self, _elem(other))

    def __pow__(self, k: int):
        return Pow(self, int(k))

    def __neg__(self):
        return Scale(ExactScalar(-1), self)


def _elem(x):
    return x if isinstance(x, FieldElem) else Const(ExactScalar.coerce(x))


class Sym(FieldElem):
    """The root germ ``y_index`` (0-based) at the base point."""

    __slots__ = ("index",)

    def __init__(self, index: int):
        self.index = int(index)

    def __repr__(self):
        return f"y{self.index + 1}"


class Const(FieldElem):
    __slots__ = ("value",)

    def __init__(self, value):
        self.value = value

    def __repr__(self):
        return str(self.value)


class RatLeaf(FieldElem):
    __slots__ = ("func",)

    def __init__(self, func):
        self.func = func

    def __repr__(self):
        return f"R[{self.func}]"


class Add(FieldElem):
    __slots__ = ("children",)

    def __init__(self, children):
        self.children = tuple(children)

    def __repr__(self):
        return "(" + " + ".join(map(repr, self.children)) + ")"


class Mul(FieldElem):
    __slots__ = ("children",)

    def __init__(self, children):
        self.children = tuple(children)

    def __repr__(self):
        return "*".join(map(repr, self.children))


class Div(FieldElem):
    __slots__ = ("num", "den")

    def __init__(self, num, den):
        self.num, self.den = num, den

    def __repr__(self):
        return f"({self.num!r})/({self.den!r})"


class Pow(FieldElem):
    __slots__ = ("base", "k")

    def __init__(self, base, k):
        self.base, self.k = base, k

    def __repr__(self):
        return f"({self.base!r})^{self.k}"


class Scale(FieldElem):
    """``coef * child`` with an exact scalar or root-of-unity coefficient."""

    __slots__ = ("coef", "child")

    def __init__(self, coef, child):
        self.coef, self.child = coef, child

    def __repr__(self):
        return f"{self.coef}*{self.child!r}"


class Act(FieldElem):
    """Lazy relabeling of ``child`` by ``perm``."""

    __slots__ = ("perm", "child")

    def __init__(self, perm, child):
        self.perm, self.child = perm, child

    def __repr__(self):
        return f"{self.perm}.{self.child!r}"


def max_symbol(e: FieldElem) -> int:
    """Largest root-symbol index appearing in ``e`` (-1 if none)."""
    seen = {}

    def walk(node):
        key = id(node)
        if key in seen:
            return seen[key]
        if isinstance(node, Sym):
            out = node.index
        elif isinstance(node, (Add, Mul)):
            out = max((walk(c) for c in node.children), default=-1)
        elif isinstance(node, Div):
            out = max(walk(node.num), walk(node.den))
        elif isinstance(node, (Pow,)):
            out = walk(node.base)
        elif isinstance(node, (Scale, Act)):
            out = walk(node.child)
        else:
            out = -1
        seen[key] = out
        return out

    return walk(e)


def act(p: Perm, e: FieldElem) -> FieldElem:
    """The automorphism induced by ``p``: ``y_i -> y_p(i)``."""
    if max_symbol(e) >= p.degree:
        raise ValueError("permutation degree does not cover the element's symbols")
    if isinstance(e, Sym):
        return Sym(p(e.index))
    if isinstance(e, (Const, RatLeaf)):
        return e
    if p.is_identity():
        return e
    if isinstance(e, Act):
        return Act(p * e.perm, e.child)
    return Act(p, e)


class Evaluator:
    """Evaluates elements at one labeled fiber; memoizes per (node, labeling)."""

    def __init__(self, roots, t, ctx: NumContext):
        self.roots = list(roots)
        self.t = t
        self.ctx = ctx
        self.memo = {}

    def __call__(self, e: FieldElem, sigma=None):
        key = (e, sigma)
        hit = self.memo.get(key)
        if hit is not None:
            return hit
        val = self._eval(e, sigma)
        self.memo[key] = val
        return val

    def _eval(self, e, sigma):
        ctx = self.ctx
        if isinstance(e, Sym):
            i = e.index if sigma is None else sigma[e.index]
            return self.roots[i]
        if isinstance(e, Const):
            return _scalar_value(e.value, ctx)
        if isinstance(e, RatLeaf):
            return e.func(self.t, ctx)
        if isinstance(e, Add):
            acc = ctx.c(0)
            for c in e.children:
                acc = acc + self(c, sigma)
            return acc
        if isinstance(e, Mul):
            acc = ctx.c(1)
            for c in e.children:
                acc = acc * self(c, sigma)
            return acc
        if isinstance(e, Div):
            return self(e.num, sigma) / self(e.den, sigma)
        if isinstance(e, Pow):
            return self(e.base, sigma) ** e.k
        if isinstance(e, Scale):
            return _scalar_value(e.coef, ctx) * self(e.child, sigma)
        if isinstance(e, Act):
            composed = e.perm.images if sigma is None else tuple(sigma[j] for j in e.perm.images)
            return self(e.child, composed)
        raise TypeError(f"unknown node {type(e).__name__}")

    def magnitude(self, e: FieldElem, sigma=None) -> float:
        """Size of ``e`` with every sum taken in absolute value; the scale
        below which a computed value of ``e`` is pure cancellation noise."""
        key = (e, sigma, "abs")
        hit = self.memo.get(key)
        if hit is not None:
            return hit
        if isinstance(e, (Sym, Const, RatLeaf)):
            val = float(abs(self(e, sigma)))
        elif isinstance(e, Add):
            val = sum(self.magnitude(c, sigma) for c in e.children)
        elif isinstance(e, Mul):
            val = math.prod(self.magnitude(c, sigma) for c in e.children)
        elif isinstance(e, Div):
            den = float(abs(self(e.den, sigma)))
            val = self.magnitude(e.num, sigma) / den if den else math.inf
        elif isinstance(e, Pow):
            val = self.magnitude(e.base, sigma) ** e.k
        elif isinstance(e, Scale):
            val = float(abs(_scalar_value(e.coef, self.ctx))) * self.magnitude(e.child, sigma)
        elif isinstance(e, Act):
            composed = e.perm.images if sigma is None else tuple(sigma[j] for j in e.perm.images)
            val = self.magnitude(e.child, composed)
        else:
            raise TypeError(f"unknown node {type(e).__name__}")
        self.memo[key] = val
        return val


def _scalar_value(v, ctx):
    if isinstance(v, RootOfUnity):
        return v.value(ctx)
    return ctx.c(v)


# ---------------------------------------------------------------------------
# sample grid

@dataclass
class SampleGrid:
    """Labeled fibers on a circle around ``t0``, reached by straight paths.

    Index 0 of ``ts``/``fibers`` is the base point itself.
    """

    sliced: SlicedFamily
    ts: list
    paths: list
    fibers: list
    radius: float
    evaluators: list = field(default_factory=list, repr=False)

    def __post_init__(self):
        ctx = self.sliced.ctx
        self.evaluators = [Evaluator(f.roots, t, ctx) for f, t in zip(self.fibers, self.ts)]

    @property
    def ctx(self) -> NumContext:
        return self.sliced.ctx

    @property
    def t0(self):
        return self.ts[0]

    @property
    def n_samples(self) -> int:
        return len(self.ts) - 1

    def values(self, e: FieldElem):
        return [ev(e) for ev in self.evaluators]

    def base_value(self, e: FieldElem):
        return self.evaluators[0](e)


def build_grid(sliced: SlicedFamily, base: Fiber, branch_values, *, n_samples: int | None = None,
               seed: int = 0, radius_frac: float = 0.5) -> SampleGrid:
    """Sample points on a circle around the base point, clear of branch points."""
    ctx = sliced.ctx
    t0 = base.t
    n_samples = n_samples or default_samples()
    dists = [float(abs(b - t0)) for b in branch_values]
    radius = radius_frac * (min(dists) if dists else 1 + float(abs(t0)))
    phase = random.Random(seed).random()
    ts = [t0]
    paths = [[t0]]
    fibers = [base]
    for j in range(n_samples):
        t = t0 + ctx.c(radius) * ctx.expj(2 * ctx.pi * (j + phase) / n_samples)
        path = [t0, t]
        fibers.append(track_fiber(sliced, path, base) if base.n > 1 else _single_fiber(sliced, t))
        ts.append(t)
        paths.append(path)
    return SampleGrid(sliced, ts, paths, fibers, radius)


def _single_fiber(sliced, t):
    coeffs = sliced.coeffs_at(t)
    root = -coeffs[1] / coeffs[0]
    return Fiber(sliced.slice.point(t, sliced.ctx), (root,), 0.0, float("inf"), t)


# ---------------------------------------------------------------------------
# invariance and resolvents

def invariance_residual(e: FieldElem, perms, grid: SampleGrid) -> float:
    """``max |h.e - e| / scale`` over ``perms`` and the grid."""
    vals = grid.values(e)
    scale = max((float(abs(v)) for v in vals), default=0.0)
    if scale == 0:
        return 0.0
    worst = 0.0
    for h in perms:
        moved = grid.values(act(h, e))
        worst = max(worst, max(float(abs(a - b)) for a, b in zip(moved, vals)))
    return worst / scale


def is_invariant(e: FieldElem, H, grid: SampleGrid, tol: float = EIG_TOL) -> bool:
    gens = H.generators if isinstance(H, PermGroup) else H
    return invariance_residual(e, gens, grid) <= tol


@dataclass
class Component:
    label: tuple
    order: int
    elem: FieldElem
    magnitude: float


@dataclass
class SplitResult:
    components: list
    dropped: list
    scale: float
    reassembly_residual: float
    eigen_residual: float


def resolvent_split(f: FieldElem, table: CharacterTable, grid: SampleGrid, *,
                    drop_tol: float = DROP_TOL, eig_tol: float = EIG_TOL) -> SplitResult:
    """Lagrange resolvents ``f_chi = 1/|A| sum_a chi(a)^-1 (a.f)``.

    Components whose grid magnitude is below ``drop_tol * scale`` are dropped
    (and listed); every kept component is checked to be an eigenvector of each
    coset representative.
    """
    size = table.quotient_order
    conjugates = [act(rep, f) for rep in table.reps]
    scale = 0.0
    for c in conjugates:
        scale = max(scale, max(float(abs(v)) for v in grid.values(c)))
    scale = scale or 1.0
    inv_size = ExactScalar(Fraction(1, size))
    f_vals = grid.values(f)
    total = [0 * v for v in f_vals]
    kept, dropped = [], []
    eigen = 0.0
    for label, chars in zip(table.labels, table.characters):
        if size == 1:
            comp = f
        else:
            terms = [Scale(chi.inverse(), c) if chi.turn else c
                     for chi, c in zip(chars, conjugates)]
            comp = Scale(inv_size, Add(terms))
        vals = grid.values(comp)
        total = [a + b for a, b in zip(total, vals)]
        mag = max(float(abs(v)) for v in vals)
        order = math.lcm(*[chi.order for chi in chars])
        if mag < drop_tol * scale:
            dropped.append((label, mag / scale))
            continue
        for chi, rep in zip(chars, table.reps):
            moved = grid.values(act(rep, comp))
            lam = chi.value(grid.ctx)
            err = max(float(abs(m - lam * v)) for m, v in zip(moved, vals)) / scale
            eigen = max(eigen, err)
        if eigen > eig_tol:
            raise EigenCheckFailed(f"component {label} is not an eigenvector (residual {eigen:.3g})")
        kept.append(Component(tuple(label), order, comp, mag))
    reassembly = max(float(abs(a - b)) for a, b in zip(total, f_vals)) / scale
    return SplitResult(kept, dropped, scale, reassembly, eigen)


# ---------------------------------------------------------------------------
# rational functions of the slice parameter

def _to_fraction(x) -> Fraction:
    if isinstance(x, float):
        return Fraction(x)
    sign, man, exp, _ = x._mpf_
    val = Fraction(int(man)) * (Fraction(2) ** exp)
    return -val if sign else val


class RationalFunction:
    """``num(t) / den(t)`` with descending coefficients.

    ``exact`` coefficients are ExactScalars; inexact ones are working-precision
    numbers, kept when continued-fraction rounding was not trustworthy.
    """

    def __init__(self, num, den, exact: bool):
        self.num = list(num)
        self.den = list(den)
        self.exact = exact
        self._cache = {}

    @classmethod
    def zero(cls):
        return cls([ExactScalar(0)], [ExactScalar(1)], True)

    @property
    def degrees(self):
        return len(self.num) - 1, len(self.den) - 1

    def _coeffs(self, ctx):
        key = ctx.bits
        if key not in self._cache:
            conv = (lambda c: ctx.c(c)) if self.exact else (lambda c: ctx.c(c))
            self._cache[key] = ([conv(c) for c in self.num], [conv(c) for c in self.den])
        return self._cache[key]

    def __call__(self, t, ctx: NumContext):
        num, den = self._coeffs(ctx)
        return horner(num, t) / horner(den, t)

    def _poly_text(self, coeffs, var, ctx):
        deg = len(coeffs) - 1
        if self.exact:
            return str(MultiPoly((var,), {(deg - k,): c for k, c in enumerate(coeffs)}))
        parts = []
        for k, c in enumerate(coeffs):
            if c == 0:
                continue
            re, im = ctx.fmt(c) if ctx else (repr(complex(c).real), repr(complex(c).imag))
            cs = f"({re}{'' if im.startswith('-') else '+'}{im}*I)"
            p = deg - k
            parts.append(cs if p == 0 else f"{cs}*{var}" if p == 1 else f"{cs}*{var}^{p}")
        return " + ".join(parts) if parts else "0"

    def to_text(self, var: str = "t", ctx=None) -> str:
        num = self._poly_text(self.num, var, ctx)
        one = ExactScalar(1) if self.exact else 1
        if len(self.den) == 1 and self.den[0] == one:
            return f"({num})" if " " in num else num
        return f"({num})/({self._poly_text(self.den, var, ctx)})"

    def __str__(self):
        return self.to_text()

    def to_json(self, ctx):
        if self.exact:
            return {"kind": "rational", "exact": True,
                    "num": [str(c) for c in self.num], "den": [str(c) for c in self.den]}
        return {"kind": "rational", "exact": False,
                "num": [ctx.fmt(c) for c in self.num], "den": [ctx.fmt(c) for c in self.den]}

    @classmethod
    def from_json(cls, doc, ctx):
        if doc.get("exact", True):
            return cls([parse_scalar(c) for c in doc["num"]],
                       [parse_scalar(c) for c in doc["den"]], True)
        return cls([ctx.parse_pair(c) for c in doc["num"]],
                   [ctx.parse_pair(c) for c in doc["den"]], False)


def _shifted_to_standard(coeffs_asc, t0, rho, ctx):
    """Coefficients of ``sum a_k ((t - t0)/rho)^k`` in powers of ``t`` (descending)."""
    deg = len(coeffs_asc) - 1
    out = [ctx.c(0)] * (deg + 1)
    for k, a in enumerate(coeffs_asc):
        scaled = a / ctx.c(rho) ** k
        for j in range(k + 1):
            out[j] = out[j] + scaled * math.comb(k, j) * (-t0) ** (k - j)
    return list(reversed(out))


def _round_coeffs(coeffs, ctx, tol):
    scale = max((float(abs(c)) for c in coeffs), default=0.0) or 1.0
    max_den = int(min(2.0 ** 62, 1.0 / math.sqrt(tol)))
    out = []
    for c in coeffs:
        re = _to_fraction(ctx.real(c.real)).limit_denominator(max_den)
        im = _to_fraction(ctx.real(c.imag)).limit_denominator(max_den)
        approx = ctx.c(ExactScalar(re, im))
        if float(abs(approx - c)) > tol * scale:
            return None
        out.append(ExactScalar(re, im))
    return out


def _fit(ss, vs, p, q, ctx):
    """Linearized fit ``N(s) - v D(s) = 0``; returns ascending (num, den)."""
    if q == 0:
        rows = [[s ** k for k in range(p + 1)] for s in ss]
        return ctx.lstsq(rows, vs), [ctx.c(1)]
    rows = [[s ** k for k in range(p + 1)] + [-v * s ** k for k in range(q + 1)]
            for s, v in zip(ss, vs)]
    vec = ctx.nullvector(rows)
    return vec[:p + 1], vec[p + 1:]


def _max_err(ss, vs, num, den):
    worst = 0.0
    for s, v in zip(ss, vs):
        d = horner(list(reversed(den)), s)
        if d == 0:
            return math.inf
        worst = max(worst, float(abs(horner(list(reversed(num)), s) / d - v)))
    return worst


def rational_reconstruct(f: FieldElem, grid: SampleGrid, *,
                         degree_cap: int = DEFAULT_DEGREE_CAP,
                         fit_tol: float | None = None,
                         round_tol: float | None = None) -> RationalFunction:
    """Recover a monodromy-invariant element as a rational function of ``t``.

    Degrees are searched by increasing total degree; each candidate is fit on
    half of the grid and validated on the other half.
    """
    ctx = grid.ctx
    fit_tol = fit_tol if fit_tol is not None else ctx.tol(30)
    round_tol = round_tol if round_tol is not None else ctx.tol(20)
    vals = grid.values(f)
    scale = max(float(abs(v)) for v in vals)
    noise = max(ev.magnitude(f) for ev in grid.evaluators)
    if scale <= ctx.tol(10) * noise or scale < 1e-300:
        return RationalFunction.zero()
    t0, rho = grid.t0, grid.radius
    ss = [(t - t0) / ctx.c(rho) for t in grid.ts]
    fit_idx = list(range(0, len(ss), 2))
    held_idx = list(range(1, len(ss), 2))
    fs, fv = [ss[i] for i in fit_idx], [vals[i] for i in fit_idx]
    hs, hv = [ss[i] for i in held_idx], [vals[i] for i in held_idx]

    for p, q in _degree_candidates(ss, vals, fit_idx, held_idx, degree_cap, scale, ctx):
        num, den = _fit(fs, fv, p, q, ctx)
        if any(float(abs(horner(list(reversed(den)), s))) < 1e-8 * max(1e-300, max(float(abs(c)) for c in den))
               for s in ss):
            continue
        if _max_err(hs, hv, num, den) > fit_tol * scale:
            continue
        num_t = _shifted_to_standard(num, t0, rho, ctx)
        den_t = _shifted_to_standard(den, t0, rho, ctx)
        while len(den_t) > 1 and float(abs(den_t[0])) <= 1e-12 * max(float(abs(c)) for c in den_t):
            den_t = den_t[1:]
        while len(num_t) > 1 and float(abs(num_t[0])) <= fit_tol * max(float(abs(c)) for c in num_t):
            num_t = num_t[1:]
        lead = den_t[0]
        num_t = [c / lead for c in num_t]
        den_t = [c / lead for c in den_t]
        rounded_num = _round_coeffs(num_t, ctx, round_tol)
        rounded_den = _round_coeffs(den_t, ctx, round_tol)
        if rounded_num is not None and rounded_den is not None:
            exact = RationalFunction(_trim_exact(rounded_num), _trim_exact(rounded_den), True)
            if max(float(abs(exact(t, ctx) - v)) for t, v in zip(grid.ts, vals)) <= fit_tol * scale:
                return exact
        return RationalFunction(num_t, den_t, False)
    raise NoFit(f"no rational function of total degree <= {degree_cap} fits the grid")


def _trim_exact(coeffs):
    i = 0
    while i < len(coeffs) - 1 and coeffs[i].is_zero():
        i += 1
    return coeffs[i:]


def _degree_candidates(ss, vals, fit_idx, held_idx, cap, scale, ctx):
    """Candidate (p, q) in order of total degree.

    Above double precision the degrees are screened in double precision first
    so that the expensive fits run only for plausible candidates.
    """
    all_pairs = [(d - q, q) for d in range(cap + 1) for q in range(d + 1)
                 if (d - q) + q + 4 <= len(held_idx) and d + 1 <= len(fit_idx)]
    if ctx.native:
        yield from all_pairs
        return
    from ._numeric import context

    c53 = context(53)
    fs = [complex(ss[i]) for i in fit_idx]
    fv = [complex(vals[i]) for i in fit_idx]
    hs = [complex(ss[i]) for i in held_idx]
    hv = [complex(vals[i]) for i in held_idx]
    screened = []
    for p, q in all_pairs:
        try:
            num, den = _fit(fs, fv, p, q, c53)
        except Exception:
            continue
        if _max_err(hs, hv, num, den) <= 1e-6 * scale:
            screened.append((p, q))
    yield from screened
    yield from (pq for pq in all_pairs if pq not in screened)


# ---------------------------------------------------------------------------
# radical expressions

class RadicalExpr:
    """Node of a radical expression in the slice parameter."""

    def root_nodes(self):
        out = []
        seen = set()

        def walk(node):
            if id(node) in seen:
                return
            seen.add(id(node))
            if isinstance(node, RRoot):
                out.append(node)
            for c in node.children():
                walk(c)

        walk(self)
        return out

    def children(self):
        return ()

    def depth(self) -> int:
        """Maximum nesting of root nodes."""
        inner = max((c.depth() for c in self.children()), default=0)
        return inner + (1 if isinstance(self, RRoot) else 0)


class RLeaf(RadicalExpr):
    def __init__(self, func: RationalFunction):
        self.func = func


class RConst(RadicalExpr):
    def __init__(self, value):
        self.value = value


class RSum(RadicalExpr):
    def __init__(self, terms):
        self.terms = list(terms)

    def children(self):
        return tuple(self.terms)


class RProd(RadicalExpr):
    def __init__(self, factors):
        self.factors = list(factors)

    def children(self):
        return tuple(self.factors)


class RQuot(RadicalExpr):
    def __init__(self, num, den):
        self.num, self.den = num, den

    def children(self):
        return (self.num, self.den)


class RPow(RadicalExpr):
    def __init__(self, base, k: int):
        self.base, self.k = base, int(k)

    def children(self):
        return (self.base,)


class RRoot(RadicalExpr):
    """The ``k``-th root of ``child`` whose value at the base point is ``branch``."""

    def __init__(self, k: int, child, branch):
        self.k, self.child, self.branch = int(k), child, branch

    def children(self):
        return (self.child,)


def expr_to_text(e: RadicalExpr, var: str = "t", ctx=None) -> str:
    if isinstance(e, RLeaf):
        return e.func.to_text(var, ctx)
    if isinstance(e, RConst):
        return str(e.value)
    if isinstance(e, RSum):
        return "(" + " + ".join(expr_to_text(c, var, ctx) for c in e.terms) + ")"
    if isinstance(e, RProd):
        return "*".join(expr_to_text(c, var, ctx) for c in e.factors)
    if isinstance(e, RQuot):
        return f"{expr_to_text(e.num, var, ctx)}/{expr_to_text(e.den, var, ctx)}"
    if isinstance(e, RPow):
        return f"{expr_to_text(e.base, var, ctx)}^{e.k}"
    if isinstance(e, RRoot):
        z = complex(e.branch)
        return f"root[{e.k}]({expr_to_text(e.child, var, ctx)}; branch {z.real:.6g}{z.imag:+.6g}i)"
    raise TypeError(type(e).__name__)


def expr_to_json(e: RadicalExpr, ctx: NumContext):
    if isinstance(e, RLeaf):
        return e.func.to_json(ctx)
    if isinstance(e, RConst):
        return {"kind": "const", "value": str(e.value)}
    if isinstance(e, RSum):
        return {"kind": "sum", "children": [expr_to_json(c, ctx) for c in e.terms]}
    if isinstance(e, RProd):
        return {"kind": "product", "children": [expr_to_json(c, ctx) for c in e.factors]}
    if isinstance(e, RQuot):
        return {"kind": "quotient", "children": [expr_to_json(e.num, ctx), expr_to_json(e.den, ctx)]}
    if isinstance(e, RPow):
        return {"kind": "power", "exponent": e.k, "children": [expr_to_json(e.base, ctx)]}
    if isinstance(e, RRoot):
        return {"kind": "root", "degree": e.k, "branch": ctx.fmt(e.branch),
                "children": [expr_to_json(e.child, ctx)]}
    raise TypeError(type(e).__name__)


def expr_from_json(doc, ctx: NumContext) -> RadicalExpr:
    kind = doc["kind"]
    kids = [expr_from_json(c, ctx) for c in doc.get("children", [])]
    if kind == "rational":
        return RLeaf(RationalFunction.from_json(doc, ctx))
    if kind == "variable":
        return RLeaf(RationalFunction([ExactScalar(1), ExactScalar(0)], [ExactScalar(1)], True))
    if kind == "const":
        return RConst(parse_scalar(doc["value"]))
    if kind == "sum":
        return RSum(kids)
    if kind == "product":
        return RProd(kids)
    if kind == "quotient":
        return RQuot(*kids)
    if kind == "power":
        return RPow(kids[0], doc["exponent"])
    if kind == "root":
        return RRoot(doc["degree"], kids[0], ctx.parse_pair(doc["branch"]))
    raise ValueError(f"unknown expression node kind {kind!r}")


class _Ambiguous(Exception):
    pass


def _eval_expr(e, t, ctx, prev, new, memo):
    key = id(e)
    if key in memo:
        return memo[key]
    if isinstance(e, RLeaf):
        val = e.func(t, ctx)
    elif isinstance(e, RConst):
        val = ctx.c(e.value)
    elif isinstance(e, RSum):
        val = ctx.c(0)
        for c in e.terms:
            val = val + _eval_expr(c, t, ctx, prev, new, memo)
    elif isinstance(e, RProd):
        val = ctx.c(1)
        for c in e.factors:
            val = val * _eval_expr(c, t, ctx, prev, new, memo)
    elif isinstance(e, RQuot):
        val = _eval_expr(e.num, t, ctx, prev, new, memo) / _eval_expr(e.den, t, ctx, prev, new, memo)
    elif isinstance(e, RPow):
        val = _eval_expr(e.base, t, ctx, prev, new, memo) ** e.k
    elif isinstance(e, RRoot):
        c = _eval_expr(e.child, t, ctx, prev, new, memo)
        if prev is None:
            val = e.branch
        else:
            val = _nearest_root(c, e.k, prev[key], ctx)
        new[key] = val
    else:
        raise TypeError(type(e).__name__)
    memo[key] = val
    return val


def _nearest_root(c, k, target, ctx):
    if k == 1:
        return c
    r = ctx.root(c, k)
    if r == 0:
        raise _Ambiguous()
    two_pi = 2 * math.pi
    j = round(float(ctx.arg(target / r)) * k / two_pi) % k
    cand = r * ctx.unit_root(Fraction(j, k))
    spacing = float(abs(r)) * 2 * math.sin(math.pi / k)
    if float(abs(cand - target)) > 0.25 * spacing:
        raise _Ambiguous()
    return cand


def value_at_base(e: RadicalExpr, t0, ctx):
    """Value at the base point, using the pinned branches."""
    return _eval_expr(e, t0, ctx, None, {}, {})


def base_consistency(e: RadicalExpr, t0, ctx) -> float:
    """Max relative mismatch ``|branch^k - child(t0)|`` over root nodes."""
    state = {}
    memo = {}
    _eval_expr(e, t0, ctx, None, state, memo)
    worst = 0.0
    for node in e.root_nodes():
        child = memo[id(node.child)]
        scale = max(float(abs(child)), 1e-300)
        worst = max(worst, float(abs(node.branch ** node.k - child)) / scale)
    return worst


def continue_along(e: RadicalExpr, path, ctx: NumContext, *, min_step: float | None = None):
    """Value of ``e`` at the end of ``path``, continuing every root branch
    from its pinned base value; the step is halved whenever a branch choice
    is ambiguous."""
    path = list(path)
    state = {}
    value = _eval_expr(e, path[0], ctx, None, state, {})
    length = sum(float(abs(b - a)) for a, b in zip(path, path[1:]))
    if min_step is None:
        min_step = 1e-12 * max(length, 1e-300)
    for a, b in zip(path, path[1:]):
        seg = b - a
        seg_len = float(abs(seg))
        if seg_len == 0:
            continue
        s, h = 0.0, 0.125
        while s < 1.0:
            h = min(h, 1.0 - s)
            s_new = 1.0 if h >= 1.0 - s else s + h
            t = b if s_new == 1.0 else a + seg * ctx.real(s_new)
            new = {}
            try:
                value = _eval_expr(e, t, ctx, state, new, {})
            except (_Ambiguous, ZeroDivisionError):
                h /= 2
                if h * seg_len < min_step:
                    raise StepCollapse("branch continuation collapsed") from None
                continue
            state = new
            s = s_new
            h *= 2
    return value


# ---------------------------------------------------------------------------
# the tower

@dataclass
class SplitRecord:
    level: int
    quotient_order: int
    reassembly_residual: float
    eigen_residual: float
    power_residual: float
    kept: int
    dropped: list


@dataclass
class TowerResult:
    expr: RadicalExpr
    splits: list
    base_residual: float
    residuals: list
    target: int = 0

    @property
    def max_residual(self) -> float:
        return max([self.base_residual] + list(self.residuals))

    @property
    def depth(self) -> int:
        return self.expr.depth()

    @property
    def dropped(self):
        return [(rec.level, lab, mag) for rec in self.splits for lab, mag in rec.dropped]


def verify_expression(e: RadicalExpr, grid: SampleGrid, target: int = 0):
    """Relative residuals of ``e`` against root ``target``: base point first,
    then every grid sample reached along its stored path."""
    ctx = grid.ctx
    out = []
    for path, fib in zip(grid.paths, grid.fibers):
        y = fib.roots[target]
        val = continue_along(e, path, ctx)
        out.append(float(abs(val - y)) / max(1.0, float(abs(y))))
    return out


def radical_tower(rep: MonodromyRep, series: DerivedSeries, grid: SampleGrid, *,
                  target: int = 0, degree_cap: int = DEFAULT_DEGREE_CAP,
                  drop_tol: float = DROP_TOL, eig_tol: float = EIG_TOL,
                  verify_tol: float | None = None) -> TowerResult:
    """Radical expression for the root ``y_target`` along a solvable series."""
    if not series.solvable:
        raise PreconditionError("derived series is not solvable; no radical tower exists")
    chain = series.chain
    ctx = grid.ctx
    verify_tol = verify_tol if verify_tol is not None else default_verify_tol(ctx.bits)
    tables = {}
    records = []

    def express(f, i):
        if i == 0:
            return RLeaf(rational_reconstruct(f, grid, degree_cap=degree_cap))
        if i not in tables:
            tables[i] = quotient_characters(chain[i - 1], chain[i])
        split = resolvent_split(f, tables[i], grid, drop_tol=drop_tol, eig_tol=eig_tol)
        record = SplitRecord(i, tables[i].quotient_order, split.reassembly_residual,
                             split.eigen_residual, 0.0, len(split.components), split.dropped)
        records.append(record)
        terms = []
        for comp in split.components:
            if comp.order == 1:
                terms.append(express(comp.elem, i - 1))
                continue
            g = Pow(comp.elem, comp.order)
            resid = invariance_residual(g, chain[i - 1].generators, grid)
            record.power_residual = max(record.power_residual, resid)
            if resid > eig_tol:
                raise EigenCheckFailed(f"power of a component is not invariant (residual {resid:.3g})")
            branch = grid.base_value(comp.elem)
            terms.append(RRoot(comp.order, express(g, i - 1), branch))
        if not terms:
            return RLeaf(RationalFunction.zero())
        return terms[0] if len(terms) == 1 else RSum(terms)

    expr = express(Sym(target), series.length)
    residuals = verify_expression(expr, grid, target)
    result = TowerResult(expr, records, residuals[0], residuals[1:], target)
    if result.max_residual > verify_tol:
        raise VerificationFailed(
            f"radical tower misses the tracked root (residual {result.max_residual:.3g})",
            residual=result.max_residual)
    return result


@dataclass
class UnsolvabilityCertificate:
    """A derived series that stabilizes at a nontrivial perfect group."""

    generators: tuple
    chain_orders: tuple
    core_order: int
    core_generators: tuple
    degree: int

    def to_json(self):
        return {"generators": [str(g) for g in self.generators],
                "derived_chain_orders": list(self.chain_orders),
                "perfect_core_order": self.core_order,
                "perfect_core_generators": [str(g) for g in self.core_generators],
                "degree": self.degree}


def unsolvability_certificate(rep, series: DerivedSeries | None = None) -> UnsolvabilityCertificate:
    """Bundle generators and the stabilized derived series.

    ``rep`` is a MonodromyRep or a plain sequence of permutations.
    """
    perms = list(rep.perms) if isinstance(rep, MonodromyRep) else list(rep)
    if series is None:
        if not perms:
            raise PreconditionError("trivial group is solvable")
        series = derived_series(PermGroup(perms[0].degree, perms))
    if series.solvable:
        raise PreconditionError("derived series reaches the identity; the group is solvable")
    orders = tuple(series.orders)
    if len(orders) < 2 or orders[-1] != orders[-2] or orders[-1] <= 1:
        raise PreconditionError("derived series did not stabilize at a nontrivial group")
    return UnsolvabilityCertificate(tuple(perms), orders, series.core.order,
                                    tuple(series.core.generators), series.chain[0].degree)

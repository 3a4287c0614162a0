"""Monodromy of a family around its branch locus.

A multivariate family is restricted to a generic affine line ``x = o + t*d``.
Branch points are the roots of the restricted branch polynomial; each gets a
petal loop from a base point ``t0``, and tracking the fiber around a petal
gives one generator of the monodromy group.
"""
from __future__ import annotations

import math
import random
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction

from ._numeric import NumContext, context, horner, horner_with_derivative
from .errors import (AmbiguousMatching, NearBranchLocus, NonStabilized, SliceExhausted,
                     StepCollapse)
from .groups import DEFAULT_CAP, Perm, PermGroup, orbits
from .polyalg import (AlgebraicFamily, ExactScalar, MultiPoly, branch_poly, upoly_degree, upoly_is_zero,
                      upoly_squarefree)
from .roots import Fiber, all_roots, fiber_from_coeffs, min_separation, scaled_residual

DEFAULT_K_SEG = 32
RETRY_BITS = 128


@dataclass(frozen=True)
class SliceLine:
    """The line ``x = origin + t * direction`` with exact coordinates."""

    origin: tuple
    direction: tuple

    def __post_init__(self):
        object.__setattr__(self, "origin", tuple(ExactScalar.coerce(o) for o in self.origin))
        object.__setattr__(self, "direction",
                           tuple(ExactScalar.coerce(d) for d in self.direction))
        if len(self.origin) != len(self.direction):
            raise ValueError("origin and direction dimensions differ")
        if self.direction and all(d.is_zero() for d in self.direction):
            raise ValueError("slice direction must be nonzero")

    @classmethod
    def identity(cls, nvars: int) -> "SliceLine":
        if nvars == 0:
            return cls((), ())
        if nvars != 1:
            raise ValueError("the identity slice exists only for one variable")
        return cls((ExactScalar(0),), (ExactScalar(1),))

    @property
    def is_identity(self) -> bool:
        return (len(self.origin) == 1 and self.origin[0].is_zero()
                and self.direction[0] == ExactScalar(1))

    def point(self, t, ctx: NumContext):
        return tuple(ctx.c(o) + t * ctx.c(d) for o, d in zip(self.origin, self.direction))

    def describe(self, var_names) -> str:
        if not var_names:
            return "no parameters"
        if self.is_identity:
            return f"{var_names[0]} = t"
        return ", ".join(f"{v} = {MultiPoly(('t',), {(1,): d, (0,): o})}"
                         for v, o, d in zip(var_names, self.origin, self.direction))

    def to_json(self):
        return {"origin": [str(o) for o in self.origin],
                "direction": [str(d) for d in self.direction]}


class SlicedFamily:
    """A family restricted to a slice line, evaluated at working precision."""

    def __init__(self, fam: AlgebraicFamily, slice_: SliceLine, ctx: NumContext):
        if len(slice_.origin) != fam.nvars:
            raise ValueError("slice dimension does not match the family")
        self.fam = fam
        self.slice = slice_
        self.ctx = ctx
        self.exact = [c.substitute_line(slice_.origin, slice_.direction) for c in fam.coeffs]
        self._num = [[ctx.c(a) for a in poly] for poly in self.exact]
        if upoly_is_zero(self.exact[0]):
            raise SliceExhausted("leading coefficient vanishes on the slice")

    @property
    def n(self) -> int:
        return self.fam.n

    def coeffs_at(self, t):
        return [horner(poly, t) for poly in self._num]

    def fiber(self, t, *, sep_tol=None, seed: int = 0) -> Fiber:
        return fiber_from_coeffs(self.coeffs_at(t), self.slice.point(t, self.ctx),
                                 ctx=self.ctx, sep_tol=sep_tol, seed=seed, t=t)


def restricted_branch_poly(fam: AlgebraicFamily, slice_: SliceLine):
    return branch_poly(fam).substitute_line(slice_.origin, slice_.direction)


def _random_gaussian_vector(rng: random.Random, n: int, span: int = 3):
    while True:
        vec = tuple(ExactScalar(rng.randint(-span, span), rng.randint(-span, span))
                    for _ in range(n))
        if any(not v.is_zero() for v in vec):
            return vec


def choose_slice(fam: AlgebraicFamily, seed: int = 0, max_retries: int = 64) -> SliceLine:
    """A pseudo-random line on which the branch polynomial keeps its full degree.

    One-variable families always use the identity line ``x = t``.
    """
    bp = branch_poly(fam)
    if bp.is_zero():
        raise SliceExhausted("branch polynomial vanishes identically (repeated roots everywhere)")
    if fam.nvars <= 1:
        return SliceLine.identity(fam.nvars)
    target = bp.total_degree()
    rng = random.Random(seed)
    for _ in range(max_retries):
        origin = _random_gaussian_vector(rng, fam.nvars)
        direction = _random_gaussian_vector(rng, fam.nvars)
        restricted = bp.substitute_line(origin, direction)
        lead = fam.coeffs[0].substitute_line(origin, direction)
        if upoly_degree(restricted) == target and not upoly_is_zero(lead):
            return SliceLine(origin, direction)
    raise SliceExhausted(f"no generic slice found after {max_retries} attempts")


@dataclass(frozen=True)
class BranchPoints:
    values: tuple
    cluster_radius: tuple

    def __len__(self):
        return len(self.values)

    def __iter__(self):
        return iter(self.values)


def branch_points(fam: AlgebraicFamily, slice_: SliceLine, ctx: NumContext | None = None,
                  *, cluster_tol: float | None = None, seed: int = 0) -> BranchPoints:
    """Distinct roots of the restricted branch polynomial, clustered."""
    ctx = ctx or context()
    poly = restricted_branch_poly(fam, slice_)
    if upoly_is_zero(poly):
        raise SliceExhausted("restricted branch polynomial is identically zero")
    sf = upoly_squarefree(poly)
    if upoly_degree(sf) <= 0:
        return BranchPoints((), ())
    values = all_roots(sf, ctx=ctx, seed=seed)
    scale = 1 + max(float(abs(v)) for v in values)
    if cluster_tol is None:
        cluster_tol = 1e-9 * scale
    clusters = []
    for v in values:
        for cl in clusters:
            if abs(v - cl[0]) <= cluster_tol:
                cl.append(v)
                break
        else:
            clusters.append([v])
    centers = [sum(cl[1:], cl[0]) / len(cl) for cl in clusters]
    radii = [max(float(abs(v - c)) for v in cl) for cl, c in zip(clusters, centers)]
    pairs = sorted(zip(centers, radii), key=lambda p: (float(p[0].real), float(p[0].imag)))
    return BranchPoints(tuple(c for c, _ in pairs), tuple(r for _, r in pairs))


@dataclass(frozen=True)
class Loop:
    """Closed polyline in the slice parameter, starting and ending at ``base``."""

    base: object
    waypoints: tuple
    around: object = None

    def reversed(self) -> "Loop":
        return Loop(self.base, tuple(reversed(self.waypoints)), self.around)


def petal_loop(center, t0, radius, ctx: NumContext, k_seg: int = DEFAULT_K_SEG) -> Loop:
    """Straight approach to a circle around ``center``, one counterclockwise turn, return."""
    toward = (t0 - center) / abs(t0 - center)
    entry = center + radius * toward
    phi0 = ctx.arg(toward)
    circle = [center + radius * ctx.expj(phi0 + 2 * ctx.pi * k / k_seg) for k in range(1, k_seg)]
    return Loop(t0, (t0, entry, *circle, entry, t0), center)


def petal_loops(bps, t0, *, ctx: NumContext | None = None, k_seg: int = DEFAULT_K_SEG,
                obstacles=(), center=0, boundary=None, loop_margin: float | None = None):
    """One petal per branch point, in generator order.

    Petals are ordered by the argument of ``b - t0`` measured clockwise from the
    direction ``center - t0``; with that order the product ``p_0 * p_1 * ...``
    (function composition) is the monodromy of the counterclockwise circle
    around ``center`` through ``t0``.  ``obstacles`` are extra points the
    circles must avoid; ``boundary=(c, R)`` keeps circles inside a disk.
    """
    ctx = ctx or context()
    values = list(bps.values if isinstance(bps, BranchPoints) else bps)
    if not values:
        return []
    if loop_margin is None:
        loop_margin = 1e-6 * (1 + float(abs(t0)))
    everything = values + list(obstacles)
    ref = ctx.c(center) - t0
    loops = []
    for b in values:
        dist = abs(b - t0)
        if dist < loop_margin:
            raise NearBranchLocus("branch point too close to the base point; choose a new base point")
        nn = min((abs(b - o) for o in everything if o is not b and abs(b - o) > 0),
                 default=math.inf)
        radius = min(0.5 * nn, 0.5 * dist)
        if boundary is not None:
            bc, br = boundary
            radius = min(radius, 0.5 * (br - abs(b - bc)))
        if not radius > 0:
            raise NearBranchLocus("no room for a petal circle")
        key = float(ctx.arg(ref / (b - t0)))
        loops.append((key, petal_loop(b, t0, radius, ctx, k_seg)))
    loops.sort(key=lambda kl: kl[0])
    return [loop for _, loop in loops]


def big_circle(t0, ctx: NumContext, center=0, k_seg: int = 4 * DEFAULT_K_SEG) -> Loop:
    """Counterclockwise circle around ``center`` through ``t0``."""
    c = ctx.c(center)
    pts = [c + (t0 - c) * ctx.expj(2 * ctx.pi * k / k_seg) for k in range(1, k_seg)]
    return Loop(t0, (t0, *pts, t0))


def _newton_settle(coeffs, z, sep, tol, iters):
    prev = None
    for _ in range(iters):
        p, dp = horner_with_derivative(coeffs, z)
        if dp == 0:
            return z, p == 0
        step = p / dp
        z = z - step
        size = abs(step)
        if size <= tol * (1 + abs(z)):
            return z, True
        if prev is not None and size <= 1e-6 * sep and size >= 0.5 * prev:
            return z, True
        prev = size
    return z, False


def track_fiber(sliced: SlicedFamily, path, start: Fiber, *, newton_iters: int | None = None,
                min_step: float | None = None) -> Fiber:
    """Continue every root of ``start`` along the polyline ``path``.

    Predictor is the previous root, corrector is Newton.  A step is accepted
    when Newton converges for every root and no root moves more than a third of
    the current minimum separation; otherwise the step is halved.
    """
    ctx = sliced.ctx
    path = list(path)
    if newton_iters is None:
        newton_iters = 8 + ctx.bits // 16
    tol = ctx.tol(10)
    length = sum(float(abs(b - a)) for a, b in zip(path, path[1:]))
    if min_step is None:
        min_step = 1e-12 * max(length, 1e-300)
    zs = list(start.roots)
    sep = start.min_sep
    for a, b in zip(path, path[1:]):
        seg = b - a
        seg_len = float(abs(seg))
        if seg_len == 0:
            continue
        s = 0.0
        h = 1.0
        while s < 1.0:
            h = min(h, 1.0 - s)
            s_new = 1.0 if h >= 1.0 - s else s + h
            t_new = b if s_new == 1.0 else a + seg * ctx.real(s_new)
            coeffs = sliced.coeffs_at(t_new)
            moved = []
            ok = True
            for z in zs:
                nz, conv = _newton_settle(coeffs, z, sep, tol, newton_iters)
                if not conv or abs(nz - z) >= sep / 3:
                    ok = False
                    break
                moved.append(nz)
            if ok:
                new_sep = min_separation(moved)
                if new_sep <= 0:
                    ok = False
            if ok:
                zs = moved
                sep = new_sep
                s = s_new
                h *= 2
            else:
                h /= 2
                if h * seg_len < min_step:
                    raise StepCollapse(f"step collapsed near t={complex(t_new):.6g}")
    end_t = path[-1]
    coeffs = sliced.coeffs_at(end_t)
    lead = coeffs[0]
    monic = [c / lead for c in coeffs]
    residual = max((scaled_residual(monic, z) for z in zs), default=0.0)
    return Fiber(sliced.slice.point(end_t, ctx), tuple(zs), residual, min_separation(zs), end_t)


def match_fibers(end: Fiber, base: Fiber) -> Perm:
    """Permutation sending label ``i`` to the base label nearest ``end.roots[i]``."""
    images = []
    limit = base.min_sep / 3
    for z in end.roots:
        dists = [abs(z - w) for w in base.roots]
        j = min(range(len(dists)), key=dists.__getitem__)
        if dists[j] >= limit:
            raise AmbiguousMatching(f"tracked root is {float(dists[j]):.3g} from any base root")
        images.append(j)
    if len(set(images)) != len(images):
        raise AmbiguousMatching("fiber matching is not injective")
    return Perm(tuple(images))


def loop_permutation(sliced: SlicedFamily, loop: Loop, base: Fiber) -> Perm:
    if base.n == 1:
        return Perm((0,))
    return match_fibers(track_fiber(sliced, loop.waypoints, base), base)


@dataclass
class MonodromyRep:
    """Base fiber, petal loops and the permutation each loop induces."""

    slice: SliceLine
    base_fiber: Fiber
    loops: list
    perms: list
    branch_points: BranchPoints
    sliced: SlicedFamily = field(repr=False)
    group_cap: int = DEFAULT_CAP

    @property
    def t0(self):
        return self.base_fiber.t

    @property
    def n(self) -> int:
        return self.sliced.n

    @property
    def ctx(self) -> NumContext:
        return self.sliced.ctx

    def group(self, cap: int | None = None) -> PermGroup:
        return PermGroup(self.n, self.perms, cap or self.group_cap)


def _track_all(sliced, loops, base, workers):
    if workers and workers > 1 and len(loops) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(lambda lp: loop_permutation(sliced, lp, base), loops))
    return [loop_permutation(sliced, lp, base) for lp in loops]


def _with_retry(fn, precision, retry_bits):
    try:
        return fn(context(precision))
    except (StepCollapse, AmbiguousMatching):
        if precision >= retry_bits:
            raise
        return fn(context(retry_bits))


def monodromy_group(fam: AlgebraicFamily, slice_: SliceLine | None = None, *, seed: int = 0,
                    precision: int = 53, k_seg: int = DEFAULT_K_SEG, workers: int = 1,
                    retry_bits: int = RETRY_BITS, cap: int = DEFAULT_CAP,
                    known=None) -> MonodromyRep:
    """Generators of the monodromy group on a slice line.

    The base point sits on the circle of radius ``2 (1 + max |b|)`` at a
    seed-determined angle.  ``known`` may carry cached ``(t0, branch values,
    perms)`` to skip the tracking.
    """
    if slice_ is None:
        slice_ = choose_slice(fam, seed)

    def run(ctx):
        sliced = SlicedFamily(fam, slice_, ctx)
        if known is not None:
            t0, values, perms = known
            bps = BranchPoints(tuple(values), tuple(0.0 for _ in values))
            base = sliced.fiber(t0, seed=seed)
            loops = petal_loops(bps, t0, ctx=ctx, k_seg=k_seg)
            return MonodromyRep(slice_, base, loops, list(perms), bps, sliced, cap)
        bps = branch_points(fam, slice_, ctx, seed=seed)
        radius = 2 * (1 + max((float(abs(b)) for b in bps), default=0.0))
        rng = random.Random(seed)
        last_error = None
        for _ in range(24):
            theta = 2 * math.pi * rng.random()
            t0 = ctx.c(radius) * ctx.expj(ctx.real(theta))
            try:
                base = sliced.fiber(t0, seed=seed)
                loops = petal_loops(bps, t0, ctx=ctx, k_seg=k_seg)
            except NearBranchLocus as exc:
                last_error = exc
                continue
            perms = _track_all(sliced, loops, base, workers)
            return MonodromyRep(slice_, base, loops, perms, bps, sliced, cap)
        raise last_error

    return _with_retry(run, precision, retry_bits)


def cross_check_orders(fam: AlgebraicFamily, seeds=(0, 1), **kwargs):
    """Group orders from independent random slices; disagreement flags a bad slice."""
    return [monodromy_group(fam, seed=s, **kwargs).group().order for s in seeds]


@dataclass(frozen=True)
class RamifiedGerm:
    points: tuple
    local_degree: int


@dataclass
class LocalReport:
    center: tuple
    radius: float
    offset: float
    slice: SliceLine
    rep: MonodromyRep
    orbits: list

    @property
    def group(self) -> PermGroup:
        return self.rep.group()

    @property
    def order(self) -> int:
        return self.group.order


def _unit_rational(vec):
    norm = math.sqrt(sum(abs(complex(v)) ** 2 for v in vec))
    norm_q = Fraction(norm).limit_denominator(1000)
    return tuple(v / ExactScalar(norm_q) for v in vec)


def _local_once(fam, p_exact, r, seed, ctx, offset_frac, k_seg, cap):
    rng = random.Random(seed)
    if fam.nvars == 1:
        slice_ = SliceLine((p_exact[0],), (ExactScalar(1),))
        offset = 0.0
    else:
        v = _unit_rational(_random_gaussian_vector(rng, fam.nvars))
        d = _unit_rational(_random_gaussian_vector(rng, fam.nvars))
        delta = ExactScalar(Fraction(r).limit_denominator(10**9) * Fraction(offset_frac))
        origin = tuple(pj + delta * vj for pj, vj in zip(p_exact, v))
        slice_ = SliceLine(origin, d)
        offset = float(abs(complex(delta)))
    sliced = SlicedFamily(fam, slice_, ctx)
    pc = [ctx.c(x) for x in p_exact]
    oc = [ctx.c(x) for x in slice_.origin]
    dc = [ctx.c(x) for x in slice_.direction]
    dd = sum(abs(x) ** 2 for x in dc)
    tc = -sum((x.conjugate() * (o - p)) for x, o, p in zip(dc, oc, pc)) / dd

    def xdist(t):
        return math.sqrt(sum(float(abs(o + t * x - p)) ** 2 for o, x, p in zip(oc, dc, pc)))

    closest = xdist(tc)
    if closest >= r:
        raise NearBranchLocus("slice misses the ball")
    disk_r = math.sqrt(r * r - closest * closest) / math.sqrt(float(dd))
    every = list(branch_points(fam, slice_, ctx, seed=seed).values)
    inside = [b for b in every if xdist(b) <= r]
    outside = [b for b in every if xdist(b) > r]
    last_error = None
    for _ in range(24):
        theta = 2 * math.pi * rng.random()
        t0 = tc + ctx.c(0.5 * disk_r) * ctx.expj(ctx.real(theta))
        if any(float(abs(t0 - b)) < 0.05 * disk_r for b in every):
            continue
        try:
            base = sliced.fiber(t0, seed=seed)
            loops = petal_loops(inside, t0, ctx=ctx, k_seg=k_seg, obstacles=outside,
                                center=tc, boundary=(tc, disk_r))
        except NearBranchLocus as exc:
            last_error = exc
            continue
        perms = [loop_permutation(sliced, lp, base) for lp in loops]
        bps = BranchPoints(tuple(inside), tuple(0.0 for _ in inside))
        rep = MonodromyRep(slice_, base, loops, perms, bps, sliced, cap)
        return LocalReport(tuple(p_exact), r, offset, slice_, rep, orbits(rep.group()))
    raise last_error or NearBranchLocus("no admissible base point in the ball")


def local_monodromy(fam: AlgebraicFamily, p, r: float, *, seed: int = 0, precision: int = 53,
                    offset_frac: float = 0.1, max_shrinks: int = 6,
                    k_seg: int = DEFAULT_K_SEG, retry_bits: int = RETRY_BITS,
                    cap: int = DEFAULT_CAP) -> LocalReport:
    """Monodromy from loops confined to the ball of radius ``r`` around ``p``.

    The result is accepted once the radius-``r`` and radius-``r/2`` groups
    agree in order and orbit sizes; the radius is halved otherwise.
    """
    if r <= 0:
        raise ValueError("radius must be positive")
    if len(p) != fam.nvars:
        raise ValueError(f"expected a point with {fam.nvars} coordinates")
    p_exact = tuple(ExactScalar.approximate(x) if not isinstance(x, ExactScalar) else x
                    for x in p)

    def signature(rep: LocalReport):
        return rep.order, sorted(len(o) for o in rep.orbits)

    def run(ctx):
        radius = float(r)
        history = []
        for _ in range(max_shrinks + 1):
            big = _local_once(fam, p_exact, radius, seed, ctx, offset_frac, k_seg, cap)
            small = _local_once(fam, p_exact, radius / 2, seed, ctx, offset_frac, k_seg, cap)
            history.append((radius, big.order, small.order))
            if signature(big) == signature(small):
                return big
            radius /= 2
        raise NonStabilized(f"local group kept changing: {history}")

    return _with_retry(run, precision, retry_bits)


def ramified_germs(report: LocalReport):
    """Orbits of the local group, each with its size (the local degree)."""
    return [RamifiedGerm(tuple(o), len(o)) for o in report.orbits]

"""Numeric fibers: all roots of a specialized polynomial, with quality bounds."""
from __future__ import annotations

import random
from dataclasses import dataclass

from ._numeric import NumContext, context, horner, horner_with_derivative
from .errors import NearBranchLocus, RootFindingError
from .polyalg import eval_coeffs

DEGENERATE_TOL = 1e-14


@dataclass(frozen=True)
class Fiber:
    """The labeled roots over one point.

    ``point`` is the coordinate tuple the fiber sits over; ``t`` is the slice
    parameter when the fiber lives on a slice line.
    """

    point: tuple
    roots: tuple
    residual: float
    min_sep: float
    t: object = None

    @property
    def n(self) -> int:
        return len(self.roots)


def _ctx(precision, ctx):
    if ctx is not None:
        return ctx
    return context(53 if precision is None else int(precision))


def scaled_residual(coeffs, z) -> float:
    """``|P(z)| / sum |a_k| max(|z|, 1)^k``, a backward error of ``z`` as a root."""
    p = horner(coeffs, z)
    mag = horner([abs(a) for a in coeffs], max(abs(z), 1))
    if mag == 0:
        return 0.0
    return float(abs(p) / mag)


def min_separation(roots) -> float:
    if len(roots) < 2:
        return float("inf")
    return float(min(abs(roots[i] - roots[j])
                     for i in range(len(roots)) for j in range(i + 1, len(roots))))


def all_roots(coeffs, precision: int = 53, *, seed: int = 0, max_iters: int | None = None,
              root_tol: float | None = None, degenerate_tol: float = DEGENERATE_TOL,
              ctx: NumContext | None = None):
    """All ``n`` complex roots of a descending coefficient list.

    Aberth-Ehrlich iteration from a perturbed circle; the start angle comes from
    ``seed`` so results are reproducible.  Roots are returned sorted by
    (real, imag).
    """
    ctx = _ctx(precision, ctx)
    coeffs = [ctx.c(a) for a in coeffs]
    scale = max(abs(a) for a in coeffs)
    if scale == 0 or abs(coeffs[0]) <= degenerate_tol * scale:
        raise NearBranchLocus("leading coefficient vanishes")
    n = len(coeffs) - 1
    if n == 0:
        return []
    lead = coeffs[0]
    monic = [a / lead for a in coeffs]
    if root_tol is None:
        root_tol = max(ctx.tol(20), 1e-10 if ctx.native else 0.0)
    if n == 1:
        return [-monic[1]]
    if max_iters is None:
        max_iters = 100 + 4 * n + ctx.bits

    rng = random.Random(seed)
    radius = max(float(abs(monic[k])) ** (1.0 / k) for k in range(1, n + 1))
    radius = radius if radius > 0 else 1.0
    phase = rng.uniform(0, 1)
    zs = []
    for k in range(n):
        r = radius * (1 + 0.05 * rng.uniform(-1, 1))
        zs.append(ctx.c(r) * ctx.expj(ctx.real(2 * ctx.pi * (k + phase)) / n))

    conv_tol = ctx.tol(6)
    deriv = [a * (n - i) for i, a in enumerate(monic[:-1])]
    for _ in range(max_iters):
        worst = 0.0
        for i in range(n):
            z = zs[i]
            p = horner(monic, z)
            dp = horner(deriv, z)
            if p == 0:
                continue
            ratio = p / dp if dp != 0 else p
            acc = 0
            for j in range(n):
                if j != i:
                    diff = z - zs[j]
                    if diff != 0:
                        acc = acc + 1 / diff
            denom = 1 - ratio * acc
            step = ratio / denom if denom != 0 else ratio
            zs[i] = z - step
            worst = max(worst, float(abs(step) / (1 + abs(z))))
        if worst <= conv_tol:
            break
    zs = [_newton_polish(monic, z, ctx) for z in zs]
    resid = max(scaled_residual(monic, z) for z in zs)
    if resid > root_tol:
        raise RootFindingError(
            f"root finder did not converge (scaled residual {resid:.3g})", best=zs)
    return sorted(zs, key=lambda z: (float(z.real), float(z.imag)))


def _newton_polish(coeffs, z, ctx, iters: int = 3):
    for _ in range(iters):
        p, dp = horner_with_derivative(coeffs, z)
        if dp == 0 or p == 0:
            break
        step = p / dp
        if abs(step) > 1e-3 * (1 + abs(z)):
            break
        z = z - step
    return z


def fiber_from_coeffs(coeffs, point, *, ctx: NumContext, sep_tol: float | None = None,
                      seed: int = 0, t=None) -> Fiber:
    """Fiber over already-evaluated coefficients; raises NearBranchLocus when
    two roots are within ``sep_tol``."""
    roots = all_roots(coeffs, ctx=ctx, seed=seed)
    monic = [ctx.c(a) / ctx.c(coeffs[0]) for a in coeffs]
    residual = max((scaled_residual(monic, z) for z in roots), default=0.0)
    sep = min_separation(roots)
    if sep_tol is None:
        sep_tol = 1e-6 * (1 + max(float(abs(z)) for z in roots))
    if sep <= sep_tol:
        raise NearBranchLocus(f"fiber roots collide (min separation {sep:.3g})")
    return Fiber(tuple(point), tuple(roots), residual, sep, t)


def fiber_at(fam, point, precision: int = 53, *, sep_tol: float | None = None,
             seed: int = 0, ctx: NumContext | None = None) -> Fiber:
    """Labeled fiber of ``fam`` over ``point``."""
    ctx = _ctx(precision, ctx)
    coeffs = eval_coeffs(fam, tuple(point), ctx)
    return fiber_from_coeffs(coeffs, tuple(point), ctx=ctx, sep_tol=sep_tol, seed=seed)

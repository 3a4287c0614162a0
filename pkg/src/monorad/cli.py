"""Command-line front end.

    monorad analyze "y^3 + p*y + q" --json
    monorad local "y^5 + a*y + b" --point 0,0 --radius 0.1
    monorad verify expr.json "y^2 - x"

Every flag can also be set through an environment variable ``MONORAD_<FLAG>``
(for example ``MONORAD_SEED=3``); explicit flags win.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
import time
from pathlib import Path

from . import __version__
from ._numeric import context
from .errors import (MonoradError, ParseError, PreconditionError, VerificationFailed)
from .groups import Perm, derived_series, is_solvable
from .monodromy import (SlicedFamily, SliceLine, branch_points, local_monodromy,
                        monodromy_group, ramified_germs)
from .polyalg import parse_family, parse_scalar
from .radicals import (DEFAULT_DEGREE_CAP, build_grid, default_samples, default_verify_tol,
                       expr_from_json, expr_to_json, expr_to_text, radical_tower,
                       unsolvability_certificate, value_at_base, verify_expression)

SCHEMA = 1
ENV_PREFIX = "MONORAD_"


class _Timer:
    def __init__(self, enabled: bool):
        self.enabled = enabled
        self.marks = {}
        self._t = time.perf_counter()

    def mark(self, name):
        now = time.perf_counter()
        self.marks[name] = round(now - self._t, 4)
        self._t = now


def parse_slice(text: str, nvars: int) -> SliceLine:
    """``"o1,o2;d1,d2"`` with exact scalars, e.g. ``"0,1;1,1/2+I"``."""
    try:
        origin_txt, direction_txt = text.split(";")
    except ValueError:
        raise ParseError("slice must look like 'o1,...;d1,...'") from None
    origin = [parse_scalar(s) for s in origin_txt.split(",") if s.strip()]
    direction = [parse_scalar(s) for s in direction_txt.split(",") if s.strip()]
    if len(origin) != nvars or len(direction) != nvars:
        raise ParseError(f"slice needs {nvars} origin and direction coordinates")
    try:
        return SliceLine(tuple(origin), tuple(direction))
    except ValueError as exc:
        raise ParseError(str(exc)) from None


def _cache_key(fam, slice_text, seed, precision) -> str:
    blob = json.dumps([str(fam.to_poly()), slice_text or "", seed, precision])
    return hashlib.sha256(blob.encode()).hexdigest()[:32]


def _load_cached(cache_dir, key, ctx):
    path = Path(cache_dir) / f"{key}.json"
    if not path.exists():
        return None
    try:
        doc = json.loads(path.read_text())
        t0 = ctx.parse_pair(doc["base_point"])
        values = [ctx.parse_pair(v) for v in doc["branch_points"]]
        perms = [Perm.from_cycles(c, doc["degree"]) for c in doc["generators"]]
    except (OSError, ValueError, KeyError, TypeError):
        return None
    return t0, values, perms


def _store_cached(cache_dir, key, rep):
    ctx = rep.ctx
    doc = {"schema": SCHEMA, "base_point": ctx.fmt(rep.t0), "degree": rep.n,
           "branch_points": [ctx.fmt(b) for b in rep.branch_points.values],
           "generators": [str(p) for p in rep.perms]}
    Path(cache_dir).mkdir(parents=True, exist_ok=True)
    tmp = Path(cache_dir) / f"{key}.tmp"
    tmp.write_text(json.dumps(doc))
    tmp.replace(Path(cache_dir) / f"{key}.json")


def _one_based(orbit):
    return [i + 1 for i in orbit]


def _unsliced_text(expr, fam, slice_, ctx):
    names = fam.var_names
    if len(names) == 1:
        if slice_.is_identity:
            return expr_to_text(expr, names[0], ctx)
        o, d = slice_.origin[0], slice_.direction[0]
        return expr_to_text(expr, f"(({names[0]} - {o})/{d})", ctx)
    return None


def analyze(equation: str, *, seed: int = 0, precision: int = 53,
            degree_cap: int = DEFAULT_DEGREE_CAP, group_cap: int = 10**6,
            samples: int | None = None, slice_text: str | None = None,
            cache_dir: str | None = None, timings: bool = True, workers: int = 1) -> dict:
    """The full pipeline as a JSON-ready report."""
    timer = _Timer(timings)
    fam = parse_family(equation)
    slice_ = parse_slice(slice_text, fam.nvars) if slice_text else None
    timer.mark("parse")

    ctx = context(precision)
    known = None
    key = None
    if cache_dir:
        key = _cache_key(fam, slice_text, seed, precision)
        known = _load_cached(cache_dir, key, ctx)
    rep = monodromy_group(fam, slice_, seed=seed, precision=precision, cap=group_cap,
                          known=known, workers=workers)
    if cache_dir and known is None:
        _store_cached(cache_dir, key, rep)
    ctx = rep.ctx
    G = rep.group()
    timer.mark("monodromy")
    series = derived_series(G)
    verdict = is_solvable(G)
    timer.mark("groups")

    orbits = G.orbits()
    report = {
        "schema": SCHEMA,
        "input": equation,
        "polynomial": str(fam.to_poly()),
        "degree": fam.n,
        "variables": list(fam.var_names),
        "seed": seed,
        "precision_bits": rep.ctx.bits,
        "slice": dict(rep.slice.to_json(), text=rep.slice.describe(fam.var_names)),
        "base_point": ctx.fmt(rep.t0),
        "branch_points": [ctx.fmt(b) for b in rep.branch_points.values],
        "generators": [str(p) for p in rep.perms],
        "group_order": G.order,
        "orbits": [_one_based(o) for o in orbits],
        "irreducible": len(orbits) == 1,
        "solvability": {"verdict": str(verdict), "solvable": series.solvable,
                        "derived_chain_orders": list(series.orders)},
        "radical_expression": None,
        "certificate": None,
    }
    if series.solvable:
        grid = build_grid(rep.sliced, rep.base_fiber, rep.branch_points.values,
                          n_samples=samples or default_samples(degree_cap), seed=seed)
        timer.mark("grid")
        tower = radical_tower(rep, series, grid, degree_cap=degree_cap)
        timer.mark("tower")
        expr = tower.expr
        report["radical_expression"] = {
            "text": expr_to_text(expr, "t", ctx),
            "unsliced_text": _unsliced_text(expr, fam, rep.slice, ctx),
            "substitution": rep.slice.describe(fam.var_names),
            "depth": tower.depth,
            "root_degrees": [r.k for r in expr.root_nodes()],
            "document": expression_document(expr, fam, rep.slice, rep.t0, ctx,
                                            rep.base_fiber.roots[tower.target]),
        }
        report["verification"] = {
            "target_root": tower.target + 1,
            "samples": grid.n_samples,
            "base_residual": tower.base_residual,
            "max_residual": tower.max_residual,
            "verify_tol": default_verify_tol(ctx.bits),
        }
        report["splits"] = [
            {"level": r.level, "quotient_order": r.quotient_order,
             "reassembly_residual": r.reassembly_residual,
             "eigen_residual": r.eigen_residual, "power_residual": r.power_residual,
             "kept": r.kept, "dropped": [list(lab) for lab, _ in r.dropped]}
            for r in tower.splits]
    else:
        cert = unsolvability_certificate(rep, series)
        report["certificate"] = cert.to_json()
        try:
            radical_tower(rep, series, None)
        except PreconditionError as exc:
            report["certificate"]["radical_tower"] = f"refused: {exc}"
        timer.mark("certificate")
    if timings:
        report["timings"] = timer.marks
    return report


def expression_document(expr, fam, slice_, t0, ctx, target_value) -> dict:
    """Standalone JSON for ``monorad verify``."""
    return {"schema": SCHEMA, "kind": "radical_expression",
            "equation": str(fam.to_poly()), "variable": "t",
            "slice": slice_.to_json(), "precision_bits": ctx.bits,
            "base_point": ctx.fmt(t0), "target_value": ctx.fmt(target_value),
            "tree": expr_to_json(expr, ctx)}


def verify_document(doc: dict, equation: str, *, seed: int = 1, samples: int | None = None,
                    precision: int | None = None, tol: float | None = None) -> dict:
    """Re-check a serialized expression against freshly tracked roots."""
    if doc.get("kind") not in (None, "radical_expression") or "tree" not in doc:
        raise ParseError("not a radical expression document")
    fam = parse_family(equation)
    bits = precision or int(doc.get("precision_bits", 53))
    ctx = context(bits)
    if "slice" in doc:
        sl = doc["slice"]
        slice_ = SliceLine(tuple(parse_scalar(o) for o in sl["origin"]),
                           tuple(parse_scalar(d) for d in sl["direction"]))
    else:
        slice_ = SliceLine.identity(fam.nvars)
    if len(slice_.origin) != fam.nvars:
        raise ParseError("expression slice does not match the equation's variables")
    try:
        expr = expr_from_json(doc["tree"], ctx)
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"malformed expression tree: {exc}") from None
    t0 = ctx.parse_pair(doc["base_point"]) if "base_point" in doc else ctx.c(complex(2, 1))
    sliced = SlicedFamily(fam, slice_, ctx)
    base = sliced.fiber(t0, seed=seed)
    value = value_at_base(expr, t0, ctx)
    target = min(range(base.n), key=lambda i: float(abs(base.roots[i] - value)))
    bps = branch_points(fam, slice_, ctx, seed=seed)
    grid = build_grid(sliced, base, bps.values, n_samples=samples or default_samples(), seed=seed)
    residuals = verify_expression(expr, grid, target)
    tol = tol if tol is not None else default_verify_tol(bits)
    out = {"schema": SCHEMA, "equation": equation, "samples": grid.n_samples,
           "target_root": target + 1, "base_residual": residuals[0],
           "max_residual": max(residuals), "verify_tol": tol}
    if out["max_residual"] > tol:
        raise VerificationFailed(
            f"expression misses the roots (max residual {out['max_residual']:.3g})",
            residual=out["max_residual"])
    return out


def local_report(equation: str, point, radius: float, *, seed: int = 0, precision: int = 53,
                 group_cap: int = 10**6) -> dict:
    fam = parse_family(equation)
    if len(point) != fam.nvars:
        raise ParseError(f"point needs {fam.nvars} coordinates")
    rep = local_monodromy(fam, point, radius, seed=seed, precision=precision, cap=group_cap)
    G = rep.group
    verdict = is_solvable(G)
    return {"schema": SCHEMA, "input": equation, "point": [str(p) for p in point],
            "radius": rep.radius, "seed": seed, "precision_bits": rep.rep.ctx.bits,
            "slice": rep.slice.to_json(),
            "local_branch_points": len(rep.rep.branch_points.values),
            "generators": [str(p) for p in rep.rep.perms], "group_order": G.order,
            "solvability": {"verdict": str(verdict), "solvable": verdict.solvable},
            "ramified_germs": [{"roots": _one_based(g.points), "local_degree": g.local_degree}
                               for g in ramified_germs(rep)]}


# ---------------------------------------------------------------------------
# argparse plumbing

def _env(name, default, conv=str):
    raw = os.environ.get(ENV_PREFIX + name)
    if raw is None:
        return default
    try:
        return conv(raw)
    except ValueError:
        raise ParseError(f"bad value for {ENV_PREFIX}{name}: {raw!r}") from None


def _common(p: argparse.ArgumentParser):
    p.add_argument("--seed", type=int, default=_env("SEED", 0, int))
    p.add_argument("--precision-bits", type=int, default=_env("PRECISION_BITS", 53, int))
    p.add_argument("--group-cap", type=int, default=_env("GROUP_CAP", 10**6, int))
    p.add_argument("--json", action="store_true", default=_env("JSON", "") not in ("", "0"))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="monorad",
                                     description="Monodromy groups and radical towers of algebraic functions.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    a = sub.add_parser("analyze", help="full pipeline on one equation")
    a.add_argument("equation", nargs="?", default="-", help="equation in y (use - for stdin)")
    _common(a)
    a.add_argument("--degree-cap", type=int, default=_env("DEGREE_CAP", DEFAULT_DEGREE_CAP, int))
    a.add_argument("--samples", type=int, default=_env("SAMPLES", None, int))
    a.add_argument("--slice", default=_env("SLICE", None), help='"o1,...;d1,..."')
    a.add_argument("--cache-dir", default=_env("CACHE_DIR", None))
    a.add_argument("--workers", type=int, default=_env("WORKERS", 1, int))
    a.add_argument("--no-timings", action="store_true", default=_env("NO_TIMINGS", "") not in ("", "0"))
    a.add_argument("--expr-out", help="write the radical expression document here")

    lo = sub.add_parser("local", help="local monodromy near a point")
    lo.add_argument("equation")
    _common(lo)
    lo.add_argument("--point", required=True, help="comma-separated coordinates")
    lo.add_argument("--radius", type=float, default=_env("RADIUS", 0.1, float))

    v = sub.add_parser("verify", help="re-check a saved radical expression")
    v.add_argument("expr_file")
    v.add_argument("equation")
    _common(v)
    v.add_argument("--samples", type=int, default=_env("SAMPLES", None, int))
    v.add_argument("--tol", type=float, default=None)
    return parser


def _read_equation(text):
    if text == "-":
        return sys.stdin.read().strip()
    return text


def _print_analysis(r, out):
    print(f"equation:    {r['polynomial']} = 0 (degree {r['degree']} in y)", file=out)
    print(f"slice:       {r['slice']['text']}", file=out)
    print(f"branch pts:  {len(r['branch_points'])}", file=out)
    print(f"generators:  {' '.join(r['generators']) or '(none)'}", file=out)
    print(f"order:       {r['group_order']}", file=out)
    orbits = " ".join("{" + ",".join(map(str, o)) + "}" for o in r["orbits"])
    print(f"orbits:      {orbits} ({'irreducible' if r['irreducible'] else 'reducible'})", file=out)
    s = r["solvability"]
    print(f"verdict:     {s['verdict']}, derived chain {tuple(s['derived_chain_orders'])}", file=out)
    if r["radical_expression"]:
        e = r["radical_expression"]
        print(f"y1 =         {e['unsliced_text'] or e['text']}", file=out)
        if not e["unsliced_text"]:
            print(f"             where {e['substitution']}", file=out)
        v = r["verification"]
        print(f"verified:    max residual {v['max_residual']:.3g} on {v['samples']} samples", file=out)
    if r["certificate"]:
        c = r["certificate"]
        print(f"certificate: derived series stabilizes at a perfect group of order "
              f"{c['perfect_core_order']}", file=out)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code else 0
    out = sys.stdout
    try:
        if args.command == "analyze":
            report = analyze(_read_equation(args.equation), seed=args.seed,
                             precision=args.precision_bits, degree_cap=args.degree_cap,
                             group_cap=args.group_cap, samples=args.samples,
                             slice_text=args.slice, cache_dir=args.cache_dir,
                             timings=not args.no_timings, workers=args.workers)
            if args.expr_out and report["radical_expression"]:
                Path(args.expr_out).write_text(
                    json.dumps(report["radical_expression"]["document"], indent=2) + "\n")
            if args.json:
                print(json.dumps(report, indent=2), file=out)
            else:
                _print_analysis(report, out)
        elif args.command == "local":
            point = [parse_scalar(s) for s in args.point.split(",")] if args.point.strip() else []
            report = local_report(args.equation, point, args.radius, seed=args.seed,
                                  precision=args.precision_bits, group_cap=args.group_cap)
            if args.json:
                print(json.dumps(report, indent=2), file=out)
            else:
                germs = ", ".join("{" + ",".join(map(str, g["roots"])) + f"}} (degree {g['local_degree']})"
                                  for g in report["ramified_germs"])
                print(f"local order: {report['group_order']} ({report['solvability']['verdict']})", file=out)
                print(f"germs:       {germs}", file=out)
        else:
            try:
                doc = json.loads(Path(args.expr_file).read_text())
            except OSError as exc:
                raise ParseError(f"cannot read {args.expr_file}: {exc.strerror}") from None
            except json.JSONDecodeError as exc:
                raise ParseError(f"invalid JSON in {args.expr_file}: {exc.msg}") from None
            report = verify_document(doc, args.equation, seed=args.seed + 1,
                                     samples=args.samples, tol=args.tol)
            if args.json:
                print(json.dumps(report, indent=2), file=out)
            else:
                print(f"max residual {report['max_residual']:.3g} on {report['samples']} samples "
                      f"(tol {report['verify_tol']:.1e})", file=out)
    except MonoradError as exc:
        return _fail(exc, exc.exit_code, args)
    except ValueError as exc:
        return _fail(exc, 2, args)
    return 0


def _fail(exc, code, args):
    err = {"type": type(exc).__name__, "message": str(exc), "exit_code": code}
    if getattr(exc, "position", None) is not None:
        err["position"] = exc.position
    if getattr(exc, "residual", None) is not None:
        err["residual"] = exc.residual
    if getattr(args, "json", False):
        print(json.dumps({"schema": SCHEMA, "error": err}, indent=2))
    else:
        print(f"error: {exc}", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())

import json

import numpy as np
import pytest

from monorad._numeric import context
from monorad.errors import NoFit, PreconditionError, VerificationFailed
from monorad.groups import Perm, PermGroup, derived_series, quotient_characters
from monorad.monodromy import monodromy_group
from monorad.polyalg import ExactScalar, parse_family
from monorad.radicals import (RatLeaf, RationalFunction, RLeaf, RRoot, Sym, act,
                              build_grid, continue_along, expr_from_json, expr_to_json,
                              expr_to_text, is_invariant, radical_tower, rational_reconstruct,
                              resolvent_split, unsolvability_certificate, value_at_base,
                              verify_expression)

from oracles import cardano

Y1, Y2, Y3 = Sym(0), Sym(1), Sym(2)


def setup(eq, seed=0, bits=53, samples=None, grid_seed=0):
    rep = monodromy_group(parse_family(eq), seed=seed, precision=bits)
    grid = build_grid(rep.sliced, rep.base_fiber, rep.branch_points.values,
                      n_samples=samples, seed=grid_seed)
    return rep, derived_series(rep.group()), grid


@pytest.fixture(scope="module")
def quadratic():
    return setup("y^2 - x")


@pytest.fixture(scope="module")
def cubic():
    return setup("y^3 + p*y + q")


def values(grid, e):
    return np.array([complex(v) for v in grid.values(e)])


def ts(grid):
    return np.array([complex(t) for t in grid.ts])


# -- the action -------------------------------------------------------------------

def test_act_relabels_symbols(quadratic):
    _, _, grid = quadratic
    swap = Perm((1, 0))
    assert act(swap, Y1).index == 1
    assert np.allclose(values(grid, act(swap, Y1)), values(grid, Y2))


def test_act_fixes_rational_leaves():
    leaf = RatLeaf(RationalFunction([ExactScalar(1), ExactScalar(0)], [ExactScalar(1)], True))
    assert act(Perm((1, 0)), leaf) is leaf


def test_act_on_products(cubic):
    _, _, grid = cubic
    cyc = Perm.from_cycles("(1 2 3)", 3)
    assert np.allclose(values(grid, act(cyc, Y1 * Y2)), values(grid, Y2 * Y3))


def test_act_composes_like_the_group(cubic):
    _, _, grid = cubic
    a, b = Perm.from_cycles("(1 2)", 3), Perm.from_cycles("(1 2 3)", 3)
    e = Y1 * Y1 + Y2 * 3 - Y3
    assert np.allclose(values(grid, act(a, act(b, e))), values(grid, act(a * b, e)))


def test_act_degree_mismatch():
    with pytest.raises(ValueError):
        act(Perm((1, 0)), Y3)


# -- invariance -------------------------------------------------------------------

def test_invariance_examples(quadratic):
    rep, _, grid = quadratic
    G = rep.group()
    assert is_invariant(Y1 + Y2, G, grid)
    assert not is_invariant(Y1, G, grid)
    assert is_invariant((Y1 - Y2) ** 2, G, grid)


# -- resolvents -------------------------------------------------------------------

def test_split_quadratic(quadratic):
    _, ds, grid = quadratic
    table = quotient_characters(ds.chain[0], ds.chain[1])
    split = resolvent_split(Y1, table, grid)
    assert len(split.dropped) == 1 and len(split.components) == 1
    comp = split.components[0]
    assert comp.order == 2
    assert np.allclose(values(grid, comp.elem), values(grid, (Y1 - Y2) / 2))
    assert np.allclose(values(grid, comp.elem ** 2), ts(grid))
    assert split.reassembly_residual < 1e-12


def test_split_trivial_quotient(quadratic):
    _, _, grid = quadratic
    G = PermGroup(2, [])
    table = quotient_characters(G, G)
    split = resolvent_split(Y1, table, grid)
    assert len(split.components) == 1 and split.components[0].elem is Y1


def test_split_cyclic_cubic():
    rep, ds, grid = setup("y^3 - x")
    table = quotient_characters(ds.chain[0], ds.chain[1])
    split = resolvent_split(Y1, table, grid)
    # the roots are y1, w y1, w^2 y1, so of the resolvents
    # (y1 + w^-k y_g(1) + w^-2k y_g(g(1)))/3 only one is nonzero: it equals y1
    assert len(split.components) == 1 and len(split.dropped) == 2
    comp = split.components[0]
    assert comp.order == 3
    w = np.exp(2j * np.pi / 3)
    y = [values(grid, s) for s in (Y1, Y2, Y3)]
    g = rep.perms[0]
    orbit = [0, g(0), g(g(0))]
    resolvents = [sum(w ** (-k * j) * y[orbit[j]] for j in range(3)) / 3 for k in (0, 1, 2)]
    big = [r for r in resolvents if np.max(np.abs(r)) > 1e-9]
    assert len(big) == 1
    assert np.allclose(values(grid, comp.elem), big[0], atol=1e-12)
    assert np.allclose(big[0], y[0])
    assert split.eigen_residual < 1e-12


# -- rational reconstruction ------------------------------------------------------

def test_reconstruct_vieta(quadratic):
    _, _, grid = quadratic
    assert str(rational_reconstruct(Y1 * Y2, grid)) == "-t"
    assert str(rational_reconstruct(Y1 + Y2, grid)) == "0"
    assert str(rational_reconstruct(Y1 * Y1 + Y2 * Y2, grid)) == "2*t"


def test_reconstruct_denominator():
    _, _, grid = setup("x*y^2 - 1")
    f = rational_reconstruct(Y1 * Y2, grid)
    assert f.exact and f.degrees == (0, 1)
    assert str(f) == "(-1)/(t)"


def test_reconstruct_cubic_discriminant(cubic):
    rep, _, grid = cubic
    d = ((Y1 - Y2) * (Y1 - Y3) * (Y2 - Y3)) ** 2
    f = rational_reconstruct(d, grid)
    assert f.exact and f.degrees == (3, 0)
    # against -4p^3 - 27q^2 on the slice
    for t in grid.ts[:5]:
        p, q = (complex(c) for c in rep.slice.point(t, grid.ctx))
        assert abs(complex(f(t, grid.ctx)) - (-4 * p ** 3 - 27 * q ** 2)) < 1e-9 * (1 + abs(p) ** 3)


def test_reconstruct_no_fit(quadratic):
    _, _, grid = quadratic
    with pytest.raises(NoFit):
        rational_reconstruct(Y1, grid, degree_cap=4)


# -- towers -----------------------------------------------------------------------

def test_quadratic_tower_at_four():
    rep, ds, _ = setup("y^2 - x")
    base = rep.sliced.fiber(4.0)
    grid = build_grid(rep.sliced, base, rep.branch_points.values)
    target = int(np.argmin([abs(complex(z) - 2) for z in base.roots]))
    tower = radical_tower(rep, ds, grid, target=target)
    root = tower.expr
    assert isinstance(root, RRoot) and root.k == 2
    assert str(root.child.func) == "t"
    assert abs(complex(root.branch) - 2) < 1e-12
    assert abs(complex(value_at_base(root, 4.0, grid.ctx)) - 2) < 1e-12
    assert tower.max_residual < 1e-8


@pytest.mark.parametrize("n", [2, 3, 5, 7])
def test_cyclic_towers_have_one_root(n):
    rep, ds, grid = setup(f"y^{n} - x")
    tower = radical_tower(rep, ds, grid)
    roots = tower.expr.root_nodes()
    assert [r.k for r in roots] == [n]
    assert tower.depth == 1
    assert tower.max_residual < 1e-8


def test_cardano_against_closed_form(cubic):
    rep, ds, grid = cubic
    tower = radical_tower(rep, ds, grid)
    assert tower.depth == 2
    assert sorted(r.k for r in tower.expr.root_nodes()) == [2, 2, 3, 3]
    ctx = grid.ctx
    for path in grid.paths[::4]:
        t = path[-1]
        p, q = (complex(c) for c in rep.slice.point(t, ctx))
        val = complex(continue_along(tower.expr, path, ctx))
        assert min(abs(val - r) for r in cardano(p, q)) < 1e-8 * (1 + abs(val))


def test_tower_reverifies_on_a_new_grid(cubic):
    rep, ds, grid = cubic
    tower = radical_tower(rep, ds, grid)
    other = build_grid(rep.sliced, rep.base_fiber, rep.branch_points.values, seed=99,
                       radius_frac=0.3)
    assert max(verify_expression(tower.expr, other, tower.target)) < 1e-8


def test_tower_high_precision():
    rep, ds, grid = setup("y^3 + p*y + q", bits=128)
    tower = radical_tower(rep, ds, grid)
    assert tower.max_residual < 1e-20


def test_tower_for_trivial_group():
    rep, ds, grid = setup("y^2 - 1")
    tower = radical_tower(rep, ds, grid)
    assert tower.depth == 0 and tower.max_residual == 0


def test_tower_wrong_target_value_fails(quadratic):
    rep, ds, grid = quadratic
    tower = radical_tower(rep, ds, grid)
    wrong = RRoot(2, tower.expr.child, -tower.expr.branch)
    assert max(verify_expression(wrong, grid, 0)) > 1


def test_split_properties_on_quartic():
    rep, ds, grid = setup("y^4 + p*y + q")
    tower = radical_tower(rep, ds, grid)
    assert ds.orders == [24, 12, 4, 1]
    for rec in tower.splits:
        assert rec.reassembly_residual <= 1e-10
        assert rec.eigen_residual <= 1e-8
        assert rec.power_residual <= 1e-8
    assert tower.max_residual < 1e-6


# -- serialization ----------------------------------------------------------------

def test_json_roundtrip(cubic):
    rep, ds, grid = cubic
    tower = radical_tower(rep, ds, grid)
    doc = json.loads(json.dumps(expr_to_json(tower.expr, grid.ctx)))
    back = expr_from_json(doc, grid.ctx)
    assert expr_to_text(back) == expr_to_text(tower.expr)
    assert max(verify_expression(back, grid, tower.target)) < 1e-8


def test_text_shows_degrees_and_branches(quadratic):
    rep, ds, grid = quadratic
    text = expr_to_text(radical_tower(rep, ds, grid).expr)
    assert text.startswith("root[2](t; branch ")


def test_zero_leaf():
    assert value_at_base(RLeaf(RationalFunction.zero()), 1.0, context(53)) == 0


# -- unsolvability ----------------------------------------------------------------

def test_quintic_certificate():
    rep, ds, _ = setup("y^5 + a*y + b")
    cert = unsolvability_certificate(rep, ds)
    assert cert.chain_orders == (120, 60, 60)
    assert cert.core_order == 60
    assert json.loads(json.dumps(cert.to_json()))["perfect_core_order"] == 60
    with pytest.raises(PreconditionError):
        radical_tower(rep, ds, None)


def test_cyclic_quintic_has_no_certificate():
    rep, ds, _ = setup("y^5 - x")
    with pytest.raises(PreconditionError):
        unsolvability_certificate(rep, ds)


def test_hand_built_a5():
    gens = [Perm.from_cycles("(1 2 3 4 5)", 5), Perm.from_cycles("(3 4 5)", 5)]
    cert = unsolvability_certificate(gens)
    assert cert.core_order == 60 and cert.chain_orders == (60, 60)


@pytest.mark.parametrize("eq", ["y^2 - x", "y^3 + p*y + q", "y^5 + a*y + b",
                                "(y^2-x)*(y-1)", "y^3 - x"])
def test_dichotomy(eq):
    rep, ds, grid = setup(eq)
    outcomes = []
    try:
        radical_tower(rep, ds, grid)
        outcomes.append("tower")
    except PreconditionError:
        pass
    try:
        unsolvability_certificate(rep, ds)
        outcomes.append("certificate")
    except PreconditionError:
        pass
    assert outcomes == (["tower"] if ds.solvable else ["certificate"])


def test_verification_failure_raised():
    rep, ds, grid = setup("y^2 - x")
    with pytest.raises(VerificationFailed):
        radical_tower(rep, ds, grid, verify_tol=0.0)

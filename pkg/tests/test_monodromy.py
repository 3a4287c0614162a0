import numpy as np
import pytest

from monorad._numeric import context
from monorad.errors import NonStabilized
from monorad.groups import Perm
from monorad.monodromy import (SlicedFamily, SliceLine, branch_points, choose_slice,
                               cross_check_orders, local_monodromy, monodromy_group,
                               ramified_germs, track_fiber)
from monorad.polyalg import ExactScalar, parse_family

from oracles import circle_path, dense_loop_perm
from props import (conjugated_group, loop_at_infinity_holds, oracle_perm_in_labels,
                   puncture_trials, reversal_perms)

FAMILIES = ["y^2 - x", "y^3 - x", "y^5 - x", "y^3 + p*y + q", "y^4 + p*y + q",
            "y^5 + a*y + b", "(y^2-x)*(y^2-x-1)", "(y^2-x)*(y-1)", "x*y^2 - 1"]


@pytest.fixture(scope="module")
def reps():
    return {eq: monodromy_group(parse_family(eq)) for eq in FAMILIES}


def sliced_identity(eq, bits=53):
    return SlicedFamily(parse_family(eq), SliceLine.identity(1), context(bits))


# -- slices and branch points -----------------------------------------------------

def test_identity_slice_for_one_variable():
    assert choose_slice(parse_family("y^2 - x")).is_identity


def test_generic_slice_keeps_full_degree():
    fam = parse_family("y^5 + a*y + b")
    sl = choose_slice(fam, seed=3)
    assert len(branch_points(fam, sl)) == 5


def test_branch_points_quadratic():
    bps = branch_points(parse_family("y^2 - x"), SliceLine.identity(1))
    assert len(bps) == 1 and abs(bps.values[0]) < 1e-12


def test_branch_points_product():
    bps = branch_points(parse_family("(y^2-x)*(y^2-x-1)"), SliceLine.identity(1))
    assert np.allclose(sorted(complex(b).real for b in bps), [-1, 0])


def test_constant_family_has_no_branch_points():
    fam = parse_family("y^2 - 1")
    assert len(branch_points(fam, choose_slice(fam))) == 0


# -- tracking ---------------------------------------------------------------------

def test_constant_path_keeps_fiber():
    sl = sliced_identity("y^2 - x")
    start = sl.fiber(1.0)
    end = track_fiber(sl, [1.0, 1.0], start)
    assert end.roots == start.roots


def test_unit_circle_swaps_square_roots():
    sl = sliced_identity("y^2 - x")
    start = sl.fiber(1.0)
    end = track_fiber(sl, circle_path(0, 1.0), start)
    assert np.allclose(end.roots, start.roots[::-1])


@pytest.mark.parametrize("n", [2, 3, 4, 5, 6, 7])
def test_cyclic_shift_matches_dense_oracle(n):
    sl = sliced_identity(f"y^{n} - x")
    start = sl.fiber(1.0)
    path = circle_path(0, 1.0)
    end = track_fiber(sl, path, start)
    ours = tuple(int(np.argmin([abs(e - s) for s in start.roots])) for e in end.roots)
    ref, ref_start = dense_loop_perm(lambda t: [1] + [0] * (n - 1) + [-t], path, 40)
    relabel = [int(np.argmin([abs(z - s) for s in start.roots])) for z in ref_start]
    mapped = [0] * n
    for k, img in enumerate(ref):
        mapped[relabel[k]] = relabel[img]
    assert ours == tuple(mapped)
    assert Perm(ours).order() == n


def test_tracking_at_high_precision():
    sl = sliced_identity("y^3 - x", bits=128)
    start = sl.fiber(sl.ctx.c(1))
    end = track_fiber(sl, circle_path(0, 1.0), start)
    assert end.residual < 1e-30


# -- global monodromy -------------------------------------------------------------

def test_quadratic_generator(reps):
    rep = reps["y^2 - x"]
    assert [str(p) for p in rep.perms] == ["(1 2)"]


def test_trivial_family():
    rep = monodromy_group(parse_family("y^2 - 1"))
    assert rep.perms == [] and rep.group().order == 1


@pytest.mark.parametrize("eq, order", [
    ("y^3 - x", 3), ("y^5 - x", 5), ("y^3 + p*y + q", 6), ("y^4 + p*y + q", 24),
    ("y^5 + a*y + b", 120), ("(y^2-x)*(y^2-x-1)", 4), ("x*y^2 - 1", 2)])
def test_group_orders(reps, eq, order):
    assert reps[eq].group().order == order


def test_quintic_generators_are_transpositions(reps):
    rep = reps["y^5 + a*y + b"]
    assert len(rep.perms) == 5
    assert all(sorted(len(c) for c in p.cycles()) == [2] for p in rep.perms)


@pytest.mark.parametrize("eq", ["y^3 + p*y + q", "y^5 + a*y + b", "(y^2-x)*(y-1)"])
def test_generators_match_dense_oracle(reps, eq):
    rep = reps[eq]
    for loop, p in zip(rep.loops, rep.perms):
        assert oracle_perm_in_labels(rep, loop) == p


def test_deterministic_for_seed():
    a = monodromy_group(parse_family("y^4 + p*y + q"), seed=7)
    b = monodromy_group(parse_family("y^4 + p*y + q"), seed=7)
    assert a.perms == b.perms and a.t0 == b.t0


def test_concurrent_tracking_merges_in_order():
    fam = parse_family("y^5 + a*y + b")
    assert monodromy_group(fam, workers=4).perms == monodromy_group(fam).perms


def test_cross_check_orders():
    assert cross_check_orders(parse_family("y^3 + p*y + q"), seeds=(0, 1, 2)) == [6, 6, 6]


def test_high_precision_group():
    rep = monodromy_group(parse_family("y^3 + p*y + q"), precision=128)
    assert rep.group().order == 6


# -- properties -------------------------------------------------------------------

@pytest.mark.parametrize("eq", FAMILIES)
def test_loop_at_infinity(reps, eq):
    assert loop_at_infinity_holds(reps[eq])


@pytest.mark.parametrize("eq", ["y^2 - x", "y^3 + p*y + q", "(y^2-x)*(y-1)"])
def test_puncture_gives_identity(reps, eq):
    assert all(p.is_identity() for p in puncture_trials(reps[eq], trials=5))


@pytest.mark.parametrize("eq", ["y^3 - x", "y^4 + p*y + q"])
def test_reversal_gives_identity(reps, eq):
    assert all(p.is_identity() for p in reversal_perms(reps[eq]))


@pytest.mark.parametrize("eq", ["y^3 + p*y + q", "y^4 + p*y + q", "(y^2-x)*(y-1)"])
def test_base_point_independence(reps, eq):
    rep = reps[eq]
    other = monodromy_group(parse_family(eq), rep.slice, seed=11)
    assert other.t0 != rep.t0
    moved = conjugated_group(rep, other)
    assert moved.order == other.group().order
    assert {p.images for p in moved.elements} == {p.images for p in other.group().elements}


def test_reducible_products_have_two_orbits(reps):
    G = reps["(y^2-x)*(y^2-x-1)"].group()
    orbs = G.orbits()
    assert sorted(len(o) for o in orbs) == [2, 2]
    assert all(G.restrict(o).order == 2 for o in orbs)
    assert len(reps["(y^2-x)*(y-1)"].group().orbits()) == 2
    assert reps["y^3 + p*y + q"].group().is_transitive()


# -- local monodromy --------------------------------------------------------------

def test_local_unbranched_point():
    rep = local_monodromy(parse_family("y^2 - x"), (1,), 0.1)
    assert rep.order == 1
    assert [g.local_degree for g in ramified_germs(rep)] == [1, 1]


def test_local_branch_point():
    rep = local_monodromy(parse_family("y^2 - x"), (0,), 0.1)
    assert rep.order == 2
    assert [g.local_degree for g in ramified_germs(rep)] == [2]


def test_local_product_family():
    rep = local_monodromy(parse_family("(y^2-x)*(y-1)"), (0,), 0.1)
    assert sorted(g.local_degree for g in ramified_germs(rep)) == [1, 2]


def test_local_quintic_at_origin():
    rep = local_monodromy(parse_family("y^5 + a*y + b"), (0, 0), 0.1)
    assert rep.order == 120
    assert [g.local_degree for g in ramified_germs(rep)] == [5]


def test_local_point_with_exact_coordinates():
    p = (ExactScalar(0), ExactScalar(0))
    assert local_monodromy(parse_family("y^3 + p*y + q"), p, 0.2).order == 6


def test_local_rejects_bad_radius():
    with pytest.raises(ValueError):
        local_monodromy(parse_family("y^2 - x"), (0,), 0)


def test_local_nonstabilized_is_surfaced():
    # radius 1.5 sees the branch points 0 and -1, radius 0.75 only 0
    fam = parse_family("(y^2-x)*(y^2-x-1)")
    with pytest.raises(NonStabilized):
        local_monodromy(fam, (0,), 1.5, max_shrinks=0)
    assert local_monodromy(fam, (0,), 1.5, max_shrinks=2).order == 2

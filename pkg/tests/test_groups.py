import itertools

import pytest
from hypothesis import given, settings, strategies as st

from monorad.errors import CapExceeded, NotAbelian, NotNormal
from monorad.groups import (Perm, PermGroup, RootOfUnity, commutator, derived_series,
                            derived_subgroup, generate_elements, is_solvable, orbits,
                            quotient_characters)

from oracles import closure, commutator_closure, derived_orders


def cyc(text, n):
    return Perm.from_cycles(text, n)


def group(n, *cycles):
    return PermGroup(n, [cyc(c, n) for c in cycles])


S3 = lambda: group(3, "(1 2)", "(1 2 3)")
S4 = lambda: group(4, "(1 2)", "(1 2 3 4)")
S5 = lambda: group(5, "(1 2)", "(1 2 3 4 5)")
A5 = lambda: group(5, "(1 2 3 4 5)", "(3 4 5)")


# -- permutations -----------------------------------------------------------------

def test_cycle_notation_roundtrip():
    p = cyc("(1 2)(3 4 5)", 5)
    assert p.images == (1, 0, 3, 4, 2)
    assert str(p) == "(1 2)(3 4 5)"
    assert str(Perm.identity(4)) == "()"
    assert p.order() == 6


def test_composition_is_function_composition():
    p, q = cyc("(1 2)", 3), cyc("(2 3)", 3)
    assert all((p * q)(i) == p(q(i)) for i in range(3))
    assert (p * p.inverse()).is_identity()


def test_commutator_definition():
    a, b = cyc("(1 2)", 3), cyc("(1 2 3)", 3)
    assert commutator(a, b) == a.inverse() * b.inverse() * a * b


# -- enumeration ------------------------------------------------------------------

def test_generate_elements_examples():
    assert len(generate_elements([cyc("(1 2)", 2)])) == 2
    assert len(generate_elements([cyc("(1 2)", 5), cyc("(1 2 3 4 5)", 5)])) == 120
    assert generate_elements([], degree=3) == [Perm.identity(3)]


def test_generate_elements_matches_closure_oracle():
    gens = [cyc("(1 2)", 5), cyc("(1 2 3 4 5)", 5)]
    got = {p.images for p in generate_elements(gens)}
    assert got == closure([g.images for g in gens], 5)


def test_cap_exceeded():
    with pytest.raises(CapExceeded):
        PermGroup(5, S5().generators, cap=100).order


def test_mixed_degrees_rejected():
    with pytest.raises(ValueError):
        generate_elements([cyc("(1 2)", 2), cyc("(1 2)", 3)])


# -- orbits -----------------------------------------------------------------------

def test_orbits_examples():
    assert orbits(PermGroup(3, [])) == [[0], [1], [2]]
    assert orbits(group(5, "(1 2 3 4 5)")) == [[0, 1, 2, 3, 4]]
    assert orbits(group(4, "(1 2)", "(3 4)")) == [[0, 1], [2, 3]]


def test_restrict_to_orbit():
    G = group(4, "(1 4)", "(2 3)")
    for orb in G.orbits():
        assert G.restrict(orb).order == 2


# -- derived series ---------------------------------------------------------------

def test_derived_subgroup_examples():
    assert derived_subgroup(S3()).order == 3
    assert derived_subgroup(group(4, "(1 2)", "(3 4)")).order == 1
    assert derived_subgroup(A5()).order == 60


def test_derived_subgroup_matches_all_commutators():
    for G in (S3(), S4(), A5()):
        elems = {p.images for p in G.elements}
        expected = commutator_closure(elems, G.degree)
        got = {p.images for p in derived_subgroup(G).elements}
        assert got == expected


def test_derived_series_s4():
    ds = derived_series(S4())
    assert ds.orders == [24, 12, 4, 1]
    assert ds.solvable and ds.length == 3
    assert ds.terminal == "Solvable(at step 3)"


def test_derived_series_s5():
    ds = derived_series(S5())
    assert ds.orders == [120, 60, 60]
    assert not ds.solvable
    assert ds.core.order == 60


def test_derived_series_trivial():
    ds = derived_series(PermGroup(3, []))
    assert ds.orders == [1] and ds.solvable and ds.length == 0


def test_verdicts():
    assert str(is_solvable(group(5, "(1 2 3 4 5)"))) == "Solvable(1)"
    assert str(is_solvable(S4())) == "Solvable(3)"
    assert str(is_solvable(S5())) == "Unsolvable(60)"


def test_derived_subgroup_is_normal_with_abelian_quotient():
    for G in (S3(), S4(), S5(), group(6, "(1 2 3)", "(4 5)", "(1 4)(2 5)(3 6)")):
        H = derived_subgroup(G)
        for g in G.elements:
            gi = g.inverse()
            assert all(g * h * gi in H for h in H.generators)
        for a, b in itertools.combinations(G.generators, 2):
            assert commutator(a, b) in H


def perms_of_degree(n):
    return st.permutations(list(range(n))).map(lambda im: Perm(tuple(im)))


@st.composite
def small_groups(draw):
    n = draw(st.integers(2, 6))
    gens = draw(st.lists(perms_of_degree(n), min_size=0, max_size=3))
    return n, gens


@settings(max_examples=60, deadline=None)
@given(small_groups())
def test_solvability_matches_oracle(data):
    n, gens = data
    orders, solvable = derived_orders([g.images for g in gens], n)
    ds = derived_series(PermGroup(n, gens))
    assert ds.orders == orders
    assert ds.solvable == solvable


# -- characters -------------------------------------------------------------------

def test_roots_of_unity_exact():
    z = RootOfUnity.of(2, 6)
    assert z.order == 3 and z.exponent == 1
    assert (z * z * z).turn == 0
    assert (z * z.inverse()).turn == 0


def test_characters_s3_mod_a3():
    G = S3()
    table = quotient_characters(G, derived_subgroup(G))
    assert table.quotient_order == 2 and table.factors == (2,)
    values = sorted(tuple(v.turn for v in chi) for chi in table.characters)
    assert values == [(0, 0), (0, 1 / 2)]
    assert table.reps[0].is_identity()
    assert table.check_orthogonality()


def test_characters_a3():
    G = group(3, "(1 2 3)")
    table = quotient_characters(G, PermGroup(3, []))
    assert table.factors == (3,)
    assert len(table.characters) == 3
    assert all(v.order in (1, 3) for chi in table.characters for v in chi)
    assert table.check_orthogonality()


def test_characters_klein_four():
    G = group(4, "(1 2)(3 4)", "(1 3)(2 4)")
    table = quotient_characters(G, PermGroup(4, []))
    assert sorted(table.factors) == [2, 2]
    assert len(table.characters) == 4
    assert all(v.order in (1, 2) for chi in table.characters for v in chi)
    assert table.check_orthogonality()


def test_characters_along_s4_series():
    ds = derived_series(S4())
    for prev, nxt in zip(ds.chain, ds.chain[1:]):
        table = quotient_characters(prev, nxt)
        assert table.quotient_order == prev.order // nxt.order
        assert table.check_orthogonality()


def test_quotient_errors():
    G = S3()
    with pytest.raises(NotNormal):
        quotient_characters(G, group(3, "(1 2)"))
    with pytest.raises(NotAbelian):
        quotient_characters(G, PermGroup(3, []))

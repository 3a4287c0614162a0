"""Permutation groups generated by monodromy.

Groups are small (degree at most about 9), so everything is done by full
enumeration: BFS closure, derived subgroups as normal closures, and character
tables of abelian quotients with exact root-of-unity values.
"""
from __future__ import annotations

import itertools
import math
import re
from collections import Counter, deque
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property

from .errors import CapExceeded, NotAbelian, NotNormal

DEFAULT_CAP = 10**6


@dataclass(frozen=True)
class Perm:
    """Bijection of ``{0..n-1}`` stored as an image tuple.

    Products compose like functions: ``(p * q)(i) == p(q(i))``.  Text forms use
    1-based cycle notation, e.g. ``"(1 2)(3 4 5)"``.
    """

    images: tuple

    def __post_init__(self):
        images = tuple(int(i) for i in self.images)
        if sorted(images) != list(range(len(images))):
            raise ValueError(f"not a permutation: {images}")
        object.__setattr__(self, "images", images)

    @classmethod
    def identity(cls, n: int) -> "Perm":
        return cls(tuple(range(n)))

    @classmethod
    def from_cycles(cls, text: str, n: int) -> "Perm":
        images = list(range(n))
        for cyc in re.findall(r"\(([^()]*)\)", text):
            pts = [int(p) - 1 for p in cyc.replace(",", " ").split()]
            for a, b in zip(pts, pts[1:] + pts[:1]):
                images[a] = b
        return cls(tuple(images))

    @property
    def degree(self) -> int:
        return len(self.images)

    def __call__(self, i: int) -> int:
        return self.images[i]

    def __mul__(self, other: "Perm") -> "Perm":
        return Perm(tuple(self.images[j] for j in other.images))

    def inverse(self) -> "Perm":
        inv = [0] * len(self.images)
        for i, j in enumerate(self.images):
            inv[j] = i
        return Perm(tuple(inv))

    def is_identity(self) -> bool:
        return all(i == j for i, j in enumerate(self.images))

    def order(self) -> int:
        return math.lcm(*[len(c) for c in self.cycles()] or [1])

    def cycles(self):
        """Non-trivial cycles, 0-based, each starting at its smallest point."""
        seen = set()
        out = []
        for i in range(len(self.images)):
            if i in seen or self.images[i] == i:
                continue
            cyc = [i]
            seen.add(i)
            j = self.images[i]
            while j != i:
                cyc.append(j)
                seen.add(j)
                j = self.images[j]
            out.append(cyc)
        return out

    def restrict(self, points) -> "Perm":
        """Action on an invariant subset, relabeled as ``0..len(points)-1``."""
        points = list(points)
        index = {p: k for k, p in enumerate(points)}
        return Perm(tuple(index[self.images[p]] for p in points))

    def __str__(self):
        cycles = self.cycles()
        if not cycles:
            return "()"
        return "".join("(" + " ".join(str(i + 1) for i in c) + ")" for c in cycles)

    def __repr__(self):
        return f"Perm({self})"


def commutator(a: Perm, b: Perm) -> Perm:
    """``a^-1 b^-1 a b``."""
    return a.inverse() * b.inverse() * a * b


def generate_elements(gens, cap: int = DEFAULT_CAP, degree: int | None = None):
    """BFS closure of ``gens`` under multiplication; identity first."""
    gens = list(gens)
    if degree is None:
        if not gens:
            raise ValueError("degree required for an empty generator list")
        degree = gens[0].degree
    if any(g.degree != degree for g in gens):
        raise ValueError("generators must share one degree")
    gen_images = [g.images for g in gens]
    start = tuple(range(degree))
    seen = {start}
    order = [start]
    queue = deque([start])
    while queue:
        cur = queue.popleft()
        for g in gen_images:
            nxt = tuple(g[j] for j in cur)
            if nxt not in seen:
                seen.add(nxt)
                order.append(nxt)
                if len(seen) > cap:
                    raise CapExceeded(f"group has more than {cap} elements")
                queue.append(nxt)
    return [Perm(e) for e in order]


class PermGroup:
    """Subgroup of ``S_n`` given by generators; elements enumerated on demand."""

    def __init__(self, degree: int, generators=(), cap: int = DEFAULT_CAP):
        self.degree = int(degree)
        self.generators = tuple(g for g in generators if not g.is_identity())
        self.cap = cap
        for g in self.generators:
            if g.degree != self.degree:
                raise ValueError("generator degree mismatch")

    @cached_property
    def elements(self):
        return generate_elements(self.generators, self.cap, self.degree)

    @cached_property
    def _image_set(self):
        return frozenset(p.images for p in self.elements)

    @property
    def order(self) -> int:
        return len(self.elements)

    def __contains__(self, p: Perm) -> bool:
        return p.images in self._image_set

    def is_trivial(self) -> bool:
        return not self.generators

    def is_abelian(self) -> bool:
        return all((a * b) == (b * a)
                   for a, b in itertools.combinations(self.generators, 2))

    def extended(self, p: Perm) -> "PermGroup":
        return PermGroup(self.degree, self.generators + (p,), self.cap)

    def orbits(self):
        return orbits(self)

    def is_transitive(self) -> bool:
        return len(self.orbits()) == 1

    def restrict(self, orbit) -> "PermGroup":
        """The action on one orbit, as a group of degree ``len(orbit)``."""
        return PermGroup(len(orbit), [g.restrict(orbit) for g in self.generators], self.cap)

    def __repr__(self):
        gens = ", ".join(str(g) for g in self.generators)
        return f"PermGroup(degree={self.degree}, <{gens}>)"


def orbits(G: PermGroup):
    """Partition of ``{0..n-1}`` into orbits, each sorted, ordered by minimum."""
    parent = list(range(G.degree))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for g in G.generators:
        for i, j in enumerate(g.images):
            a, b = find(i), find(j)
            if a != b:
                parent[max(a, b)] = min(a, b)
    groups = {}
    for i in range(G.degree):
        groups.setdefault(find(i), []).append(i)
    return [groups[k] for k in sorted(groups)]


def derived_subgroup(G: PermGroup) -> PermGroup:
    """Commutator subgroup, as the normal closure of generator commutators.

    Generators are added greedily, only when they enlarge the group.
    """
    gens = G.generators
    H = PermGroup(G.degree, (), G.cap)
    for a, b in itertools.combinations(gens, 2):
        c = commutator(a, b)
        if c not in H:
            H = H.extended(c)
    changed = True
    while changed:
        changed = False
        for g in gens:
            g_inv = g.inverse()
            for h in H.generators:
                c = g * h * g_inv
                if c not in H:
                    H = H.extended(c)
                    changed = True
    return H


@dataclass(frozen=True)
class DerivedSeries:
    """``G = G^0 >= G^1 >= ...``; stops at the identity or when orders stabilize."""

    chain: tuple
    solvable: bool

    @property
    def orders(self):
        return [g.order for g in self.chain]

    @property
    def length(self) -> int:
        """Solvable: the step ``m`` with ``G^m = e``.  Perfect: index of the core."""
        return len(self.chain) - 1

    @property
    def core(self) -> PermGroup:
        return self.chain[-1]

    @property
    def terminal(self) -> str:
        if self.solvable:
            return f"Solvable(at step {self.length})"
        return f"Perfect(order {self.core.order})"


def derived_series(G: PermGroup) -> DerivedSeries:
    chain = [G]
    while True:
        cur = chain[-1]
        if cur.order == 1:
            return DerivedSeries(tuple(chain), True)
        nxt = derived_subgroup(cur)
        chain.append(nxt)
        if nxt.order == cur.order:
            return DerivedSeries(tuple(chain), False)


@dataclass(frozen=True)
class SolvabilityVerdict:
    solvable: bool
    steps: int | None = None
    core_order: int | None = None

    def __str__(self):
        if self.solvable:
            return f"Solvable({self.steps})"
        return f"Unsolvable({self.core_order})"


def is_solvable(G: PermGroup) -> SolvabilityVerdict:
    series = derived_series(G)
    if series.solvable:
        return SolvabilityVerdict(True, steps=series.length)
    return SolvabilityVerdict(False, core_order=series.core.order)


@dataclass(frozen=True)
class RootOfUnity:
    """``exp(2 pi i * turn)`` with ``turn`` a Fraction in ``[0, 1)``."""

    turn: Fraction

    def __post_init__(self):
        object.__setattr__(self, "turn", Fraction(self.turn) % 1)

    @classmethod
    def of(cls, exponent: int, order: int) -> "RootOfUnity":
        return cls(Fraction(exponent, order))

    @property
    def order(self) -> int:
        return self.turn.denominator

    @property
    def exponent(self) -> int:
        return self.turn.numerator

    def __mul__(self, other):
        return RootOfUnity(self.turn + other.turn)

    def inverse(self):
        return RootOfUnity(-self.turn)

    conjugate = inverse

    def value(self, ctx):
        return ctx.unit_root(self.turn)

    def __str__(self):
        if self.turn == 0:
            return "1"
        return f"zeta_{self.order}^{self.exponent}"


@dataclass(frozen=True)
class CharacterTable:
    """Characters of an abelian quotient ``G_prev / G_next``.

    ``reps[a]`` is the coset representative ``prod gens[j]**exps[a][j]``;
    ``characters[k][a]`` is the value of character ``k`` on coset ``a``.
    """

    quotient_order: int
    factors: tuple
    generators: tuple
    reps: tuple
    exps: tuple
    labels: tuple
    characters: tuple

    def char_order(self, k: int) -> int:
        return math.lcm(*[v.order for v in self.characters[k]])

    def check_orthogonality(self) -> bool:
        """Exact check of ``sum_a chi(a) conj(chi'(a)) = |A| [chi = chi']``."""
        size = self.quotient_order
        for i, ci in enumerate(self.characters):
            for j, cj in enumerate(self.characters):
                turns = [(a * b.conjugate()).turn for a, b in zip(ci, cj)]
                if all(t == 0 for t in turns):
                    total_is_size = True
                else:
                    counts = Counter(turns)
                    d = math.lcm(*[t.denominator for t in turns])
                    uniform = (len(counts) == d
                               and len(set(counts.values())) == 1)
                    if not uniform:
                        return False
                    total_is_size = False
                if total_is_size != (i == j):
                    return False
        return size == len(self.characters)


def _cyclic_decomposition(size, mul, elements):
    """Independent generators of an abelian group given by its multiplication.

    Backtracking search, largest element orders first.
    """

    def powers(a):
        out = [0]
        cur = a
        while cur != 0:
            out.append(cur)
            cur = mul(cur, a)
        return out

    pw = {a: powers(a) for a in elements}
    ranked = sorted(elements, key=lambda a: (-len(pw[a]), a))

    def search(subgroup, gens):
        if len(subgroup) == size:
            return gens
        for a in ranked:
            if a in subgroup:
                continue
            if any(p in subgroup for p in pw[a][1:]):
                continue
            grown = {mul(s, p) for s in subgroup for p in pw[a]}
            found = search(grown, gens + [a])
            if found is not None:
                return found
        return None

    return search({0}, [])


def quotient_characters(G_prev: PermGroup, G_next: PermGroup) -> CharacterTable:
    """Character table of the abelian quotient ``G_prev / G_next``."""
    for g in G_prev.generators:
        g_inv = g.inverse()
        for h in G_next.generators:
            if g * h * g_inv not in G_next:
                raise NotNormal("subgroup is not normal")
    for a, b in itertools.combinations(G_prev.generators, 2):
        if commutator(a, b) not in G_next:
            raise NotAbelian("quotient is not abelian")

    coset_of = {}
    reps = []
    sub = G_next.elements
    for g in G_prev.elements:
        if g.images in coset_of:
            continue
        idx = len(reps)
        reps.append(g)
        for h in sub:
            coset_of[(g * h).images] = idx
    size = len(reps)

    def mul(i, j):
        return coset_of[(reps[i] * reps[j]).images]

    gens = _cyclic_decomposition(size, mul, list(range(size)))
    factors = []
    for a in gens:
        k, cur = 1, a
        while cur != 0:
            cur = mul(cur, a)
            k += 1
        factors.append(k)

    identity = Perm.identity(G_prev.degree)
    new_reps = [None] * size
    exps = [None] * size
    for e in itertools.product(*[range(m) for m in factors]):
        perm = identity
        for gen, k in zip(gens, e):
            for _ in range(k):
                perm = perm * reps[gen]
        idx = coset_of[perm.images]
        new_reps[idx] = perm
        exps[idx] = e
    order = sorted(range(size), key=lambda i: exps[i])
    new_reps = [new_reps[i] for i in order]
    exps = [exps[i] for i in order]

    labels = list(itertools.product(*[range(m) for m in factors]))
    characters = []
    for k in labels:
        characters.append(tuple(
            RootOfUnity(sum(Fraction(kj * ej, m) for kj, ej, m in zip(k, e, factors)))
            for e in exps))
    return CharacterTable(size, tuple(factors), tuple(reps[g] for g in gens),
                          tuple(new_reps), tuple(exps), tuple(labels), tuple(characters))

"""Finite posets, finite B-modules (join semilattices with bottom), free modules
on posets, primitives and the projectivity / freeness classification.

Elements of a :class:`FinBModule` are the indices ``0 .. n-1``; the join is a
lookup table.  All enumerations are exhaustive, so sizes are capped.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property, reduce
from itertools import combinations, product
from typing import Callable, Iterable, Sequence

from .verdict import Verdict

__all__ = [
    "DEFAULT_LOWER_SET_CAP",
    "DECOMPOSITION_CAP",
    "Decomposition",
    "FinBModule",
    "FinitePoset",
    "HomModule",
    "LowerSet",
    "SizeError",
    "distributivity_oracle",
    "free_map",
    "free_module_on_poset",
    "hom_module",
    "irredundant_decomposition",
    "is_free",
    "is_projective",
    "lower_sets",
    "primitives",
]

DEFAULT_LOWER_SET_CAP = 4096
DECOMPOSITION_CAP = 12


class SizeError(ValueError):
    """An exhaustive enumeration would exceed its configured cap."""


@dataclass(frozen=True)
class FinitePoset:
    n: int
    leq: tuple[tuple[bool, ...], ...]

    def __post_init__(self):
        leq = tuple(tuple(bool(v) for v in row) for row in self.leq)
        object.__setattr__(self, "leq", leq)
        n = self.n
        if len(leq) != n or any(len(r) != n for r in leq):
            raise ValueError("leq must be an n x n relation")
        for i in range(n):
            if not leq[i][i]:
                raise ValueError(f"relation is not reflexive at {i}")
            for j in range(n):
                if i != j and leq[i][j] and leq[j][i]:
                    raise ValueError(f"relation is not antisymmetric at ({i}, {j})")
                if leq[i][j]:
                    for k in range(n):
                        if leq[j][k] and not leq[i][k]:
                            raise ValueError(f"relation is not transitive at ({i}, {j}, {k})")

    # finite posets are lower finite; kept for symmetry with the infinite theory
    lower_finite = True

    @classmethod
    def from_relations(cls, n: int, pairs: Iterable[tuple[int, int]]) -> "FinitePoset":
        """Reflexive-transitive closure of the given ``(smaller, larger)`` pairs."""
        m = [[i == j for j in range(n)] for i in range(n)]
        for a, b in pairs:
            m[a][b] = True
        for k in range(n):
            for i in range(n):
                if m[i][k]:
                    for j in range(n):
                        if m[k][j]:
                            m[i][j] = True
        return cls(n, tuple(map(tuple, m)))

    @classmethod
    def chain(cls, k: int) -> "FinitePoset":
        return cls(k, tuple(tuple(i <= j for j in range(k)) for i in range(k)))

    @classmethod
    def antichain(cls, k: int) -> "FinitePoset":
        return cls(k, tuple(tuple(i == j for j in range(k)) for i in range(k)))

    def opposite(self) -> "FinitePoset":
        return FinitePoset(self.n, tuple(tuple(self.leq[j][i] for j in range(self.n)) for i in range(self.n)))

    def product(self, other: "FinitePoset") -> "FinitePoset":
        """Componentwise order on pairs; the pair ``(x, y)`` has index ``x * other.n + y``."""
        n1, n2 = self.n, other.n
        idx = [(x, y) for x in range(n1) for y in range(n2)]
        return FinitePoset(
            n1 * n2,
            tuple(tuple(self.leq[a][c] and other.leq[b][d] for (c, d) in idx) for (a, b) in idx),
        )

    def down(self, x: int) -> frozenset[int]:
        return frozenset(y for y in range(self.n) if self.leq[y][x])

    def down_closure(self, xs: Iterable[int]) -> frozenset[int]:
        out: set[int] = set()
        for x in xs:
            out |= self.down(x)
        return frozenset(out)

    def is_lower(self, xs: Iterable[int]) -> bool:
        s = set(xs)
        return all(y in s for x in s for y in range(self.n) if self.leq[y][x])

    def maximal(self, xs: Iterable[int]) -> frozenset[int]:
        s = set(xs)
        return frozenset(x for x in s if not any(y != x and self.leq[x][y] for y in s))

    def is_monotone(self, f: Sequence[int], target: "FinitePoset") -> bool:
        return all(target.leq[f[i]][f[j]] for i in range(self.n) for j in range(self.n) if self.leq[i][j])


@dataclass(frozen=True)
class LowerSet:
    poset: FinitePoset = field(repr=False)
    members: frozenset[int]

    def __post_init__(self):
        object.__setattr__(self, "members", frozenset(self.members))
        if not self.poset.is_lower(self.members):
            raise ValueError(f"{sorted(self.members)} is not downward closed")

    @property
    def membership(self) -> tuple[bool, ...]:
        return tuple(i in self.members for i in range(self.poset.n))

    @property
    def generators(self) -> frozenset[int]:
        """The antichain of maximal elements, which generates the lower set."""
        return self.poset.maximal(self.members)


@dataclass(frozen=True)
class FinBModule:
    """A finite join semilattice with bottom, given by its join table."""

    n: int
    join: tuple[tuple[int, ...], ...]
    bottom: int
    labels: tuple | None = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        join = tuple(tuple(int(v) for v in row) for row in self.join)
        object.__setattr__(self, "join", join)
        n = self.n
        if n < 1:
            raise ValueError("a B-module has at least its bottom element")
        if len(join) != n or any(len(r) != n for r in join):
            raise ValueError("join must be an n x n table")
        if not 0 <= self.bottom < n:
            raise ValueError("bottom is not an element")
        for x in range(n):
            if join[x][x] != x:
                raise ValueError(f"join is not idempotent at {x}")
            if join[self.bottom][x] != x:
                raise ValueError(f"bottom is not neutral for {x}")
            for y in range(n):
                if not 0 <= join[x][y] < n:
                    raise ValueError("join table entry out of range")
                if join[x][y] != join[y][x]:
                    raise ValueError(f"join is not commutative at ({x}, {y})")
        for x, y, z in product(range(n), repeat=3):
            if join[join[x][y]][z] != join[x][join[y][z]]:
                raise ValueError(f"join is not associative at ({x}, {y}, {z})")

    def leq(self, x: int, y: int) -> bool:
        return self.join[x][y] == y

    def join_all(self, xs: Iterable[int]) -> int:
        return reduce(lambda a, b: self.join[a][b], xs, self.bottom)

    @cached_property
    def poset(self) -> FinitePoset:
        return FinitePoset(self.n, tuple(tuple(self.leq(i, j) for j in range(self.n)) for i in range(self.n)))

    def meet(self, x: int, y: int) -> int:
        """Join of all common lower bounds (meets exist in any finite semilattice with bottom)."""
        return self.join_all(z for z in range(self.n) if self.leq(z, x) and self.leq(z, y))

    def is_hom_to(self, other: "FinBModule", f: Sequence[int]) -> bool:
        return f[self.bottom] == other.bottom and all(
            f[self.join[x][y]] == other.join[f[x]][f[y]] for x in range(self.n) for y in range(self.n)
        )

    @classmethod
    def from_order(cls, leq: Sequence[Sequence[bool]]) -> "FinBModule":
        """The semilattice of a poset that has a bottom and all binary joins."""
        n = len(leq)
        bottoms = [b for b in range(n) if all(leq[b][x] for x in range(n))]
        if not bottoms:
            raise ValueError("poset has no bottom element")
        table = []
        for x in range(n):
            row = []
            for y in range(n):
                ubs = [z for z in range(n) if leq[x][z] and leq[y][z]]
                least = [z for z in ubs if all(leq[z][u] for u in ubs)]
                if len(least) != 1:
                    raise ValueError(f"no least upper bound for ({x}, {y})")
                row.append(least[0])
            table.append(tuple(row))
        return cls(n, tuple(table), bottoms[0])

    @classmethod
    def chain(cls, k: int) -> "FinBModule":
        return cls(k, tuple(tuple(max(i, j) for j in range(k)) for i in range(k)), 0)

    @classmethod
    def powerset(cls, k: int) -> "FinBModule":
        return cls(1 << k, tuple(tuple(i | j for j in range(1 << k)) for i in range(1 << k)), 0)

    @classmethod
    def m3(cls) -> "FinBModule":
        """Bottom 0, atoms 1, 2, 3, top 4."""
        return cls.from_order([[i == 0 or j == 4 or i == j for j in range(5)] for i in range(5)])

    @classmethod
    def n5(cls) -> "FinBModule":
        """The pentagon: 0 < a=1 < b=2 < 4 and 0 < c=3 < 4."""
        return cls.from_order(FinitePoset.from_relations(5, [(0, 1), (1, 2), (2, 4), (0, 3), (3, 4)]).leq)


def lower_sets(poset: FinitePoset, cap: int = DEFAULT_LOWER_SET_CAP) -> list[frozenset[int]]:
    """All lower sets, sorted by size and then by members."""
    principal = [poset.down(x) for x in range(poset.n)]
    seen = {frozenset()}
    frontier = [frozenset()]
    while frontier:
        nxt = []
        for s in frontier:
            for p in principal:
                u = s | p
                if u not in seen:
                    seen.add(u)
                    if len(seen) > cap:
                        raise SizeError(f"more than {cap} lower sets")
                    nxt.append(u)
        frontier = nxt
    return sorted(seen, key=lambda s: (len(s), sorted(s)))


def free_module_on_poset(poset: FinitePoset, cap: int = DEFAULT_LOWER_SET_CAP) -> FinBModule:
    """Lower sets of ``poset`` under union; ``labels[k]`` is the k-th lower set."""
    sets = lower_sets(poset, cap)
    index = {s: k for k, s in enumerate(sets)}
    join = tuple(tuple(index[a | b] for b in sets) for a in sets)
    return FinBModule(len(sets), join, index[frozenset()], labels=tuple(LowerSet(poset, s) for s in sets))


def free_map(source: FinitePoset, target: FinitePoset, f: Sequence[int], cap: int = DEFAULT_LOWER_SET_CAP) -> list[int]:
    """The B-linear extension of a monotone map, as an index map between free modules."""
    if not source.is_monotone(f, target):
        raise ValueError("map is not monotone")
    src = lower_sets(source, cap)
    tgt = {s: k for k, s in enumerate(lower_sets(target, cap))}
    return [tgt[target.down_closure(f[x] for x in s)] for s in src]


def primitives(mod: FinBModule) -> frozenset[int]:
    """Join-irreducible elements: X is primitive iff the join of everything below X is not X."""
    out = set()
    for x in range(mod.n):
        if x == mod.bottom:
            continue
        below = mod.join_all(y for y in range(mod.n) if y != x and mod.leq(y, x))
        if below != x:
            out.add(x)
    return frozenset(out)


def _prim_poset(mod: FinBModule) -> tuple[list[int], FinitePoset]:
    prims = sorted(primitives(mod))
    return prims, FinitePoset(len(prims), tuple(tuple(mod.leq(a, b) for b in prims) for a in prims))


def _antichains(prims: Sequence[int], mod: FinBModule):
    for r in range(len(prims) + 1):
        for sub in combinations(prims, r):
            if all(not mod.leq(a, b) and not mod.leq(b, a) for a, b in combinations(sub, 2)):
                yield frozenset(sub)


@dataclass(frozen=True)
class Decomposition:
    factors: frozenset[int]
    unique: bool
    alternatives: tuple[frozenset[int], ...] = ()


def irredundant_decomposition(mod: FinBModule, x: int) -> Decomposition:
    """Maximal primitives below ``x``, plus whether every element of ``mod`` has a
    single irredundant primitive decomposition.  ``alternatives`` lists every
    irredundant decomposition of ``x`` itself."""
    if mod.n > DECOMPOSITION_CAP:
        raise SizeError(f"uniqueness check is capped at {DECOMPOSITION_CAP} elements")
    prims = sorted(primitives(mod))
    factors = mod.poset.maximal(p for p in prims if mod.leq(p, x))
    if mod.join_all(factors) != x:
        raise AssertionError(f"element {x} is not the join of the primitives below it")
    by_value: dict[int, list[frozenset[int]]] = {}
    for a in _antichains(prims, mod):
        by_value.setdefault(mod.join_all(a), []).append(a)
    unique = all(len(v) == 1 for v in by_value.values())
    return Decomposition(factors, unique, tuple(sorted(by_value.get(x, []), key=sorted)))


def is_free(mod: FinBModule) -> Verdict:
    """Free iff subsets of primitives map bijectively onto the module by join."""
    prims = sorted(primitives(mod))
    if len(prims) > DECOMPOSITION_CAP:
        raise SizeError(f"freeness check is capped at {DECOMPOSITION_CAP} primitives")
    seen: dict[int, frozenset[int]] = {}
    for r in range(len(prims) + 1):
        for sub in combinations(prims, r):
            s = frozenset(sub)
            v = mod.join_all(s)
            if v in seen:
                return Verdict("not_free", False, {"collision": (seen[v], s), "element": v, "primitives": prims})
            seen[v] = s
    missing = [x for x in range(mod.n) if x not in seen]
    if missing:
        return Verdict("not_free", False, {"missing": missing[0], "primitives": prims})
    return Verdict("free", True, {"basis": prims, "bijection": seen})


def is_projective(mod: FinBModule, cap: int = DEFAULT_LOWER_SET_CAP) -> Verdict:
    """Projective iff the free module on the poset of primitives maps isomorphically onto ``mod``.

    The isomorphism sends a lower set of primitives to its join.  On failure the
    witness is a pair of distinct lower sets with the same join, or an element
    outside the image.
    """
    prims, pp = _prim_poset(mod)
    image: dict[int, frozenset[int]] = {}
    for ls in lower_sets(pp, cap):
        members = frozenset(prims[k] for k in ls)
        v = mod.join_all(members)
        if v in image:
            return Verdict("not_projective", False, {"collision": (image[v], members), "element": v, "primitives": prims})
        image[v] = members
    missing = [x for x in range(mod.n) if x not in image]
    if missing:
        return Verdict("not_projective", False, {"missing": missing[0], "primitives": prims})
    return Verdict("projective", True, {"primitives": prims, "iso": image})


def distributivity_oracle(mod: FinBModule) -> bool:
    """Lattice distributivity ``x ^ (y v z) = (x ^ y) v (x ^ z)``, checked on all triples."""
    n = mod.n
    meet = [[mod.meet(x, y) for y in range(n)] for x in range(n)]
    j = mod.join
    return all(meet[x][j[y][z]] == j[meet[x][y]][meet[x][z]] for x, y, z in product(range(n), repeat=3))


@dataclass(frozen=True)
class HomModule:
    """Join-preserving maps ``B(P1) -> B(P2)`` presented as lower sets of ``P1^op x P2``."""

    source: FinitePoset
    target: FinitePoset
    module: FinBModule

    def pair(self, k: int) -> tuple[int, int]:
        return divmod(k, self.target.n)

    def evaluate(self, element: int, lower: Iterable[int]) -> frozenset[int]:
        """Apply the correspondence with index ``element`` to a lower set of the source."""
        z = frozenset(lower)
        corr = self.module.labels[element].members
        return frozenset(y for k in corr for x, y in [self.pair(k)] if x in z)

    def as_index_map(self, element: int) -> list[int]:
        """The map between the free modules ``B(P1)`` and ``B(P2)`` as an index table."""
        src = lower_sets(self.source)
        tgt = {s: k for k, s in enumerate(lower_sets(self.target))}
        return [tgt[self.evaluate(element, s)] for s in src]


def hom_module(p1: FinitePoset, p2: FinitePoset, cap: int = DEFAULT_LOWER_SET_CAP) -> HomModule:
    return HomModule(p1, p2, free_module_on_poset(p1.opposite().product(p2), cap))


def section_is_right_adjoint(
    gen: Callable[[int], int], sec: Callable[[int], int], dom: FinBModule, cod: FinBModule
) -> bool:
    """``gen(a) <= b`` iff ``a <= sec(b)`` for all ``a`` in ``dom`` and ``b`` in ``cod``."""
    return all(cod.leq(gen(a), b) == dom.leq(a, sec(b)) for a in range(dom.n) for b in range(cod.n))

"""Convex families of weight polyhedra over a rational polyhedron.

A family is a quiver whose edge weights are affine functions on a base
``Delta``; its fiber over a rational point ``q`` is the weight polyhedron of
the scalar quiver obtained by evaluating every weight at ``q``.  The closure
of a family takes values in convex piecewise-affine functions: the join over
simple paths of the (affine) path weights.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import floor
from typing import Iterable, Iterator, Mapping, Sequence

from .exact import as_fraction
from .ordered_algebra import (
    Q,
    AffineFunction,
    AffinePair,
    Bounded,
    BoundedAffinePair,
    CPAFunction,
    Group,
    GroupPair,
    RationalPolytope,
    Z,
    _dot,
    affine_max_on,
    cpa_add,
    cpa_eval,
    cpa_join,
    cpa_leq_witness,
)
from .quiver import (
    DEFAULT_VERTEX_CAP,
    ClosureMatrix,
    Degenerate,
    Edge,
    QuiverPresentation,
    kleene_closure,
)
from .semilattice import SizeError
from .verdict import Verdict
from .weight_polyhedra import WeightPolyhedron, polyhedron_of, separate

__all__ = [
    "FamilyClosure",
    "FamilyPresentation",
    "change_of_basis",
    "element_leq_normalized",
    "element_leq_witness",
    "family_canonical_quiver",
    "family_closure",
    "family_separate",
    "fiber",
    "fiber_quiver",
    "formal_leq",
    "is_projective_family",
    "leq_normalized",
    "leq_normalized_witness",
    "positive_point",
    "simple_cycles",
    "simple_paths",
    "vertical_hom_check",
]

AffineGenerator = tuple[AffineFunction, int]


@dataclass(frozen=True)
class FamilyPresentation(QuiverPresentation):
    """A quiver with affine-function weights over ``pair.base``."""

    def __post_init__(self):
        if not isinstance(self.pair, AffinePair):
            raise TypeError("a family needs an affine pair")
        super().__post_init__()

    @classmethod
    def over(
        cls,
        base: RationalPolytope,
        n: int,
        edges: Iterable,
        group: Group = Z,
        boundary_rays: Sequence[Sequence[int]] | None = None,
    ) -> "FamilyPresentation":
        if boundary_rays is None:
            pair = AffinePair(base, group)
        else:
            pair = BoundedAffinePair(base, group, tuple(map(tuple, boundary_rays)))
        return cls(pair, n, tuple(edges))

    @property
    def base(self) -> RationalPolytope:
        return self.pair.base

    @property
    def dim(self) -> int:
        return self.pair.base.dim

    def zero(self) -> AffineFunction:
        return AffineFunction.constant(0, self.dim)


def _cap(fam: QuiverPresentation, cap: int):
    if fam.n > cap:
        raise SizeError(f"simple path enumeration is capped at n <= {cap}")


def simple_paths(fam: QuiverPresentation, i: int, cap: int = DEFAULT_VERTEX_CAP) -> Iterator[tuple[int, list[int]]]:
    """Every nonempty path from ``i`` without repeated vertices, as ``(end, edge indices)``."""
    _cap(fam, cap)
    out = [[] for _ in range(fam.n)]
    for k, e in enumerate(fam.edges):
        out[e.src].append(k)

    def walk(v, visited, path):
        for k in out[v]:
            d = fam.edges[k].dst
            if d in visited:
                continue
            path.append(k)
            yield d, list(path)
            visited.add(d)
            yield from walk(d, visited, path)
            visited.discard(d)
            path.pop()

    yield from walk(i, {i}, [])


def simple_cycles(fam: QuiverPresentation, cap: int = DEFAULT_VERTEX_CAP) -> Iterator[list[int]]:
    """Each simple cycle once, started at its least vertex."""
    for i in range(fam.n):
        for k, e in enumerate(fam.edges):
            if e.src == i and e.dst == i:
                yield [k]
        for end, path in simple_paths(fam, i, cap):
            if end < i or any(fam.edges[k].dst < i for k in path):
                continue
            for k, e in enumerate(fam.edges):
                if e.src == end and e.dst == i:
                    yield path + [k]


def positive_point(base: RationalPolytope, f: AffineFunction) -> tuple[Fraction, ...] | None:
    """A rational point of ``base`` where ``f > 0``, or None when ``f <= 0`` throughout."""
    m = affine_max_on(base, f)
    if isinstance(m, Bounded):
        return m.vertex if m.value > 0 else None
    v = base.vertices[0]
    s = _dot(f.slope, m.ray)
    t = max(0, floor(-f(v) / s) + 1)
    return tuple(x + t * r for x, r in zip(v, m.ray))


@dataclass(frozen=True)
class FamilyClosure:
    """CPA-valued closure; ``paths[(i, j)][piece]`` is a simple path realising ``piece``."""

    W: tuple[tuple[CPAFunction | None, ...], ...]
    paths: Mapping = field(default_factory=dict, compare=False)

    @property
    def n(self) -> int:
        return len(self.W)

    def __getitem__(self, ij):
        return self.W[ij[0]][ij[1]]

    def evaluate(self, q: Sequence) -> ClosureMatrix:
        return ClosureMatrix(tuple(tuple(None if f is None else cpa_eval(f, q) for f in row) for row in self.W))


def _check_cycles(fam: FamilyPresentation, cap: int):
    for cyc in simple_cycles(fam, cap):
        w = fam.path_weight(cyc)
        q = positive_point(fam.base, w)
        if q is not None:
            raise Degenerate(cyc, w, q)


def family_closure(fam: FamilyPresentation, cap: int = DEFAULT_VERTEX_CAP) -> FamilyClosure:
    """Join over simple paths of the path weights, in canonical CPA form.

    Raises :class:`Degenerate` with a rational point of the base when some
    simple cycle has positive weight there.
    """
    _cap(fam, cap)
    _check_cycles(fam, cap)
    base = fam.base
    n = fam.n
    found: dict[tuple[int, int], dict[AffineFunction, list[int]]] = {}
    for i in range(n):
        found[(i, i)] = {fam.zero(): []}
        for end, path in simple_paths(fam, i, cap):
            if end == i:
                continue
            w = fam.path_weight(path)
            found.setdefault((i, end), {}).setdefault(w, path)
    rows = []
    paths = {}
    for i in range(n):
        row = []
        for j in range(n):
            ws = found.get((i, j))
            if not ws:
                row.append(None)
                continue
            f = CPAFunction.of(ws, base)
            row.append(f)
            paths[(i, j)] = {p: ws[p] for p in f.pieces}
        rows.append(tuple(row))
    return FamilyClosure(tuple(rows), paths)


def _single(f: AffineFunction, base: RationalPolytope) -> CPAFunction:
    return CPAFunction(frozenset([f]), base)


def formal_leq(fam: FamilyPresentation, f: AffineGenerator, g: AffineGenerator) -> bool:
    """Is ``f <= g`` witnessed by one path whose weight dominates ``a - b`` on the base?"""
    (a, i), (b, j) = f, g
    diff = fam.pair.check(a) - fam.pair.check(b)

    def dominated(w):
        m = affine_max_on(fam.base, diff - w)
        return isinstance(m, Bounded) and m.value <= 0

    if i == j and dominated(fam.zero()):
        return True
    return any(end == j and dominated(fam.path_weight(p)) for end, p in simple_paths(fam, i))


def _bound_for(fam, clo: FamilyClosure, k: int, gens: Iterable[AffineGenerator]) -> CPAFunction:
    """The CPA function ``max_m (b_m + W(k, j_m))`` bounding coefficients at vertex ``k``."""
    acc = CPAFunction.bottom(fam.base)
    for b, j in gens:
        w = clo.W[k][j]
        if w is not None:
            acc = cpa_join(acc, cpa_add(_single(b, fam.base), w))
    return acc


def element_leq_witness(
    fam: FamilyPresentation, clo: FamilyClosure, f: AffineGenerator, gens: Iterable[AffineGenerator]
) -> tuple[Fraction, ...] | None:
    """None if ``f`` lies below the join of ``gens`` in every fiber, else a point where it does not."""
    a, k = f
    return cpa_leq_witness(_single(a, fam.base), _bound_for(fam, clo, k, list(gens)))


def element_leq_normalized(fam, clo, f, gens) -> bool:
    return element_leq_witness(fam, clo, f, gens) is None


def leq_normalized_witness(
    fam: FamilyPresentation, f: AffineGenerator, g: AffineGenerator, clo: FamilyClosure | None = None
) -> tuple[Fraction, ...] | None:
    clo = clo or family_closure(fam)
    return element_leq_witness(fam, clo, (fam.pair.check(f[0]), f[1]), [(fam.pair.check(g[0]), g[1])])


def leq_normalized(fam: FamilyPresentation, f: AffineGenerator, g: AffineGenerator, clo=None) -> bool:
    """Pointwise order: ``a - b <= W(i, j)`` as functions on the base."""
    return leq_normalized_witness(fam, f, g, clo) is None


def fiber_quiver(fam: FamilyPresentation, q: Sequence) -> QuiverPresentation:
    q = tuple(as_fraction(v) for v in q)
    if not fam.base.contains(q):
        raise ValueError(f"point {q} lies outside the base")
    return QuiverPresentation(GroupPair(Q), fam.n, tuple(Edge(e.src, e.dst, e.w(q)) for e in fam.edges))


def fiber(fam: FamilyPresentation, q: Sequence) -> WeightPolyhedron:
    return polyhedron_of(kleene_closure(fiber_quiver(fam, q)))


def family_separate(
    fam: FamilyPresentation, f: AffineGenerator, g: AffineGenerator, clo: FamilyClosure | None = None
) -> tuple[tuple[Fraction, ...], tuple[Fraction, ...]] | None:
    """A point ``q`` of the base and a functional on the fiber at ``q`` separating ``f`` from ``g``."""
    q = leq_normalized_witness(fam, f, g, clo)
    if q is None:
        return None
    c = kleene_closure(fiber_quiver(fam, q))
    p = separate(c, (f[0](q), f[1]), (g[0](q), g[1]))
    assert p is not None, "fiber order disagrees with the CPA closure"
    return q, p


def family_canonical_quiver(fam: FamilyPresentation, clo: FamilyClosure | None = None) -> FamilyPresentation:
    """A minimal set of affine edges with the same closure.

    Starts from one edge per closure piece and greedily discards edges whose
    removal leaves the closure unchanged; since the closure is monotone in the
    edge set, no remaining edge can be dropped afterwards.
    """
    clo = clo or family_closure(fam)
    edges = [
        Edge(i, j, p)
        for i in range(fam.n)
        for j in range(fam.n)
        if i != j and clo.W[i][j] is not None
        for p in clo.W[i][j].sorted_pieces()
    ]
    k = 0
    while k < len(edges):
        trial = edges[:k] + edges[k + 1:]
        if family_closure(FamilyPresentation(fam.pair, fam.n, tuple(trial))) == clo:
            edges = trial
        else:
            k += 1
    return FamilyPresentation(fam.pair, fam.n, tuple(edges))


def is_projective_family(fam: FamilyPresentation, cap: int = DEFAULT_VERTEX_CAP) -> Verdict:
    """Projective iff no cycle is positive anywhere and every closure weight is in the carrier."""
    try:
        clo = family_closure(fam, cap)
    except Degenerate as exc:
        return Verdict("degenerate", False, {"cycle": list(exc.cycle), "weight": exc.weight, "point": exc.point})
    for i in range(fam.n):
        for j in range(fam.n):
            f = clo.W[i][j]
            if f is None:
                continue
            for piece in f.sorted_pieces():
                ray = fam.pair.unbounded_ray(piece)
                if ray is not None:
                    return Verdict(
                        "not_lower_finite",
                        False,
                        {"weight": piece, "ray": ray, "path": clo.paths[(i, j)][piece], "entry": (i, j)},
                    )
    return Verdict("projective", True, {"closure": clo, "canonical_quiver": family_canonical_quiver(fam, clo)})


def change_of_basis(fam: FamilyPresentation, shifts: Sequence[AffineFunction]) -> FamilyPresentation:
    """Replace each generator ``x_i`` by ``shifts[i] + x_i``.

    Edge weights become ``w + shift_src - shift_dst`` and a coefficient ``a`` at
    vertex ``i`` becomes ``a + shift_i``, which is an order isomorphism.
    """
    if len(shifts) != fam.n:
        raise ValueError("one shift per vertex is required")
    s = [fam.pair.check(x) for x in shifts]
    return FamilyPresentation(
        fam.pair, fam.n, tuple(Edge(e.src, e.dst, e.w + s[e.src] - s[e.dst]) for e in fam.edges)
    )


def vertical_hom_check(
    fam1: FamilyPresentation, fam2: FamilyPresentation, assignment: Mapping[int, Iterable[AffineGenerator]] | Sequence
) -> Verdict:
    """Check every edge of ``fam1`` against the images of its endpoints in ``fam2``."""
    if fam1.base != fam2.base:
        raise ValueError("families over different bases")
    clo2 = family_closure(fam2)
    imgs = {i: [(fam2.pair.check(a), j) for a, j in assignment[i]] for i in range(fam1.n)}
    for k, e in enumerate(fam1.edges):
        for idx, (a, v) in enumerate(imgs[e.src]):
            q = element_leq_witness(fam2, clo2, (a + e.w, v), imgs[e.dst])
            if q is not None:
                return Verdict("not_hom", False, {"edge": k, "index": idx, "generator": (a + e.w, v), "point": q})
    return Verdict("hom", True, {"closure": clo2})

"""GL weight polyhedra as tight difference-bound matrices.

A polyhedron on ``n`` coordinates is stored by ``c(i, j)``, the least upper
bound on ``p_i - p_j`` (None when unbounded).  The monotone functionals of a
quiver-presented po-module with closure ``W`` are exactly the points of the
polyhedron with ``c(i, j) = -W(i, j)``, and the two descriptions determine
each other.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Iterable, Sequence

from .exact import as_fraction
from .quiver import ClosureMatrix, Generator, leq_elements
from .semilattice import SizeError

__all__ = [
    "AffineWeightMap",
    "SLWeightPolyhedron",
    "STRATA_CAP",
    "WeightPolyhedron",
    "check_affine_map",
    "extended_membership",
    "feasible_point",
    "pomod_of",
    "polyhedron_of",
    "project_diagonal",
    "separate",
    "strata",
]

STRATA_CAP = 12

Bound = Fraction | None


def _lt(a: Bound, b: Bound) -> bool:
    """``a < b`` where None is +infinity."""
    if a is None:
        return False
    return b is None or a < b


def _add(a: Bound, b: Bound) -> Bound:
    return None if a is None or b is None else a + b


@dataclass(frozen=True)
class WeightPolyhedron:
    """``{p : p_i - p_j <= dbm[i][j]}``; the matrix is kept in tight form."""

    n: int
    dbm: tuple[tuple[Bound, ...], ...]
    nonempty: bool = True

    @classmethod
    def from_bounds(cls, n: int, bounds: Iterable[tuple[int, int, object]]) -> "WeightPolyhedron":
        """Tighten an arbitrary list of constraints ``p_i - p_j <= c``."""
        m: list[list[Bound]] = [[Fraction(0) if i == j else None for j in range(n)] for i in range(n)]
        for i, j, c in bounds:
            c = as_fraction(c)
            if _lt(c, m[i][j]):
                m[i][j] = c
        for k in range(n):
            for i in range(n):
                if m[i][k] is None:
                    continue
                for j in range(n):
                    s = _add(m[i][k], m[k][j])
                    if _lt(s, m[i][j]):
                        m[i][j] = s
        nonempty = all(m[i][i] >= 0 for i in range(n))
        if nonempty:
            for i in range(n):
                m[i][i] = Fraction(0)
        return cls(n, tuple(map(tuple, m)), nonempty)

    @classmethod
    def full(cls, n: int) -> "WeightPolyhedron":
        return cls.from_bounds(n, [])

    def bounds(self) -> list[tuple[int, int, Fraction]]:
        return [
            (i, j, self.dbm[i][j])
            for i in range(self.n)
            for j in range(self.n)
            if i != j and self.dbm[i][j] is not None
        ]

    def violated(self, p: Sequence) -> tuple[int, int] | None:
        """The first constraint ``(i, j)`` that ``p`` breaks, if any."""
        p = [as_fraction(v) for v in p]
        if len(p) != self.n:
            raise ValueError(f"point has {len(p)} coordinates, polyhedron has {self.n}")
        for i, j, c in self.bounds():
            if p[i] - p[j] > c:
                return (i, j)
        return None

    def contains(self, p: Sequence) -> bool:
        return self.nonempty and self.violated(p) is None

    def is_laterally_compact(self) -> bool:
        return all(v is not None for row in self.dbm for v in row)


def polyhedron_of(c: ClosureMatrix) -> WeightPolyhedron:
    """Monotone functionals ``p`` with ``p_j >= W(i,j) + p_i`` for every path."""
    n = c.n
    for i in range(n):
        for j in range(n):
            if c.W[i][j] is not None and c.W[j][i] is not None and c.W[i][j] + c.W[j][i] > 0:
                raise ValueError(f"degenerate closure: W({i},{j}) + W({j},{i}) > 0")
    dbm = tuple(tuple(None if w is None else -w for w in row) for row in c.W)
    return WeightPolyhedron(n, dbm, True)


def pomod_of(p: WeightPolyhedron) -> ClosureMatrix:
    if not p.nonempty:
        raise ValueError("the empty polyhedron presents no po-module")
    return ClosureMatrix(tuple(tuple(None if v is None else -v for v in row) for row in p.dbm))


def feasible_point(c: ClosureMatrix, fixed: dict[int, Fraction] | None = None) -> list[Fraction]:
    """Extend a consistent partial assignment to a monotone functional.

    Each free coordinate takes its least value allowed by the coordinates set
    so far, else its greatest, else 0.  Tightness of the closure makes every
    such interval nonempty.
    """
    p = dict(fixed or {})
    for k in range(c.n):
        if k in p:
            continue
        lows = [p[m] + c.W[m][k] for m in p if c.W[m][k] is not None]
        highs = [p[m] - c.W[k][m] for m in p if c.W[k][m] is not None]
        if lows:
            p[k] = max(lows)
        elif highs:
            p[k] = min(highs)
        else:
            p[k] = Fraction(0)
    return [p[k] for k in range(c.n)]


def separate(c: ClosureMatrix, f: Generator, g: Generator) -> tuple[Fraction, ...] | None:
    """A monotone functional vanishing on ``g`` and positive on ``f``, or None if ``f <= g``."""
    if leq_elements(c, f, g):
        return None
    a, i = as_fraction(f[0]), f[1]
    b, j = as_fraction(g[0]), g[1]
    fixed = {j: -b}
    if i != j:
        if c.W[i][j] is not None:
            fixed[i] = -b - c.W[i][j]
        else:
            lo = -a + 1
            if c.W[j][i] is not None:
                lo = max(lo, -b + c.W[j][i])
            fixed[i] = lo
    p = feasible_point(c, fixed)
    bad = polyhedron_of(c).violated(p)
    if bad is not None or b + p[j] != 0 or not a + p[i] > 0:
        raise AssertionError(f"separating functional failed verification at {bad}: {p}")
    return tuple(p)


def extended_membership(p: WeightPolyhedron, x: Sequence) -> bool:
    """Membership of a point with possibly infinite (None = -inf) coordinates.

    The finite coordinates must form a forward-closed set for the reachability
    recorded by ``p`` and satisfy the constraints among themselves.
    """
    if len(x) != p.n:
        raise ValueError(f"point has {len(x)} coordinates, polyhedron has {p.n}")
    if not p.nonempty:
        return False
    xs = [None if v is None else as_fraction(v) for v in x]
    support = [i for i in range(p.n) if xs[i] is not None]
    for i in support:
        for j in range(p.n):
            if p.dbm[i][j] is not None and xs[j] is None:
                return False
    return all(
        xs[i] - xs[j] <= p.dbm[i][j] for i in support for j in support if i != j and p.dbm[i][j] is not None
    )


def strata(c: ClosureMatrix, cap: int = STRATA_CAP) -> list[frozenset[int]]:
    """Forward-closed vertex sets, the supports of extended points."""
    n = c.n
    if n > cap:
        raise SizeError(f"strata enumeration is capped at n <= {cap}")
    out = []
    for r in range(n + 1):
        for s in combinations(range(n), r):
            s = frozenset(s)
            if all(j in s for i in s for j in range(n) if c.W[i][j] is not None):
                out.append(s)
    return out


@dataclass(frozen=True)
class AffineWeightMap:
    """Point map ``q_k = p_{index_map[k]} + translation[k]``.

    Its differential sends fundamental weights to fundamental weights, so it
    is a coordinate projection (possibly repeating coordinates) plus a shift.
    """

    index_map: tuple[int, ...]
    translation: tuple[Fraction, ...]

    def __post_init__(self):
        object.__setattr__(self, "index_map", tuple(self.index_map))
        object.__setattr__(self, "translation", tuple(as_fraction(t) for t in self.translation))
        if len(self.index_map) != len(self.translation):
            raise ValueError("index map and translation differ in length")

    def __call__(self, p: Sequence) -> tuple[Fraction, ...]:
        return tuple(as_fraction(p[s]) + t for s, t in zip(self.index_map, self.translation))


def check_affine_map(p1: WeightPolyhedron, p2: WeightPolyhedron, m: AffineWeightMap) -> bool:
    """Does ``m`` send all of ``p1`` into ``p2``?  Decided by entailment on tight bounds."""
    if len(m.index_map) != p2.n or any(not 0 <= s < p1.n for s in m.index_map):
        raise ValueError("map does not fit the two polyhedra")
    if not p1.nonempty:
        return True
    t = m.translation
    for k, l, c2 in p2.bounds():
        need = c2 - t[k] + t[l]
        have = p1.dbm[m.index_map[k]][m.index_map[l]]
        if have is None or have > need:
            return False
    return True


@dataclass(frozen=True)
class SLWeightPolyhedron:
    """The quotient by diagonal translation, normalised by ``p_{n-1} = 0``.

    ``intervals[i]`` bounds coordinate ``i < n-1``; None marks an infinite end.
    """

    source: WeightPolyhedron
    intervals: tuple[tuple[Bound, Bound], ...]
    laterally_compact: bool

    def contains(self, x: Sequence) -> bool:
        return self.source.contains(list(x) + [0])


def project_diagonal(p: WeightPolyhedron) -> SLWeightPolyhedron:
    if not p.nonempty:
        raise ValueError("cannot normalise the empty polyhedron")
    last = p.n - 1
    intervals = []
    for i in range(last):
        hi = p.dbm[i][last]
        lo = None if p.dbm[last][i] is None else -p.dbm[last][i]
        intervals.append((lo, hi))
    return SLWeightPolyhedron(p, tuple(intervals), p.is_laterally_compact())

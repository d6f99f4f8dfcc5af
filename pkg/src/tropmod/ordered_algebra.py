"""Ordered groups inside Q, rational polyhedra, affine functions, monoid pairs
and the semiring of convex piecewise-affine (CPA) functions.

Conventions
-----------
* Group elements are plain :class:`~fractions.Fraction` values; a :class:`Group`
  tag says which subgroup of Q they are required to live in.
* A :class:`RationalPolytope` is given by half-spaces ``<normal, x> <= rhs`` with
  integer normals.  Vertices and extreme recession rays are computed once, at
  construction, by exact basis enumeration.
* CPA functions are finite joins (pointwise maxima) of affine functions with
  integer slopes; the empty join is the bottom element, identically -inf.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from itertools import combinations, product
from typing import Iterable, Sequence

from .exact import as_fraction, maximize, nullspace, primitive_integer_vector, rank, solve

__all__ = [
    "MAX_DIM",
    "Q",
    "Z",
    "AffineFunction",
    "AffinePair",
    "Bounded",
    "BoundedAffinePair",
    "CPAFunction",
    "Group",
    "GroupPair",
    "GroupValue",
    "Halfspace",
    "RationalPolytope",
    "Unbounded",
    "affine_max_on",
    "cpa_add",
    "cpa_eval",
    "cpa_join",
    "cpa_leq",
    "cpa_leq_witness",
    "cpa_reduce",
    "pair_is_integer",
]

MAX_DIM = 4


# --------------------------------------------------------------------------
# ordered groups


@dataclass(frozen=True)
class Group:
    """The subgroup ``(1/denominator) Z`` of Q, or Q itself when ``denominator`` is None."""

    denominator: int | None = 1

    def __post_init__(self):
        if self.denominator is not None and (not isinstance(self.denominator, int) or self.denominator < 1):
            raise ValueError(f"group denominator must be a positive integer, got {self.denominator!r}")

    def __contains__(self, x) -> bool:
        x = as_fraction(x)
        return self.denominator is None or self.denominator % x.denominator == 0

    def value(self, x) -> "GroupValue":
        return GroupValue(as_fraction(x), self)

    def check(self, x) -> Fraction:
        x = as_fraction(x)
        if x not in self:
            raise ValueError(f"{x} is not an element of {self.tag}")
        return x

    @property
    def tag(self) -> str:
        if self.denominator is None:
            return "Q"
        if self.denominator == 1:
            return "Z"
        return f"1/{self.denominator}Z"

    @classmethod
    def parse(cls, tag: str) -> "Group":
        tag = tag.strip()
        if tag == "Z":
            return cls(1)
        if tag == "Q":
            return cls(None)
        m = re.fullmatch(r"\(?1/(\d+)\)?Z", tag)
        if not m:
            raise ValueError(f"unknown group tag {tag!r}")
        return cls(int(m.group(1)))

    def __str__(self):
        return self.tag


Z = Group(1)
Q = Group(None)


@dataclass(frozen=True, order=True)
class GroupValue:
    """An exact rational together with the subgroup of Q it is declared to lie in."""

    value: Fraction
    group: Group = field(default=Z, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "value", self.group.check(self.value))

    def __add__(self, other: "GroupValue") -> "GroupValue":
        return GroupValue(self.value + other.value, self.group)

    def __neg__(self) -> "GroupValue":
        return GroupValue(-self.value, self.group)

    def __sub__(self, other: "GroupValue") -> "GroupValue":
        return GroupValue(self.value - other.value, self.group)


# --------------------------------------------------------------------------
# polyhedra


@dataclass(frozen=True)
class Halfspace:
    normal: tuple[int, ...]
    rhs: Fraction

    def __post_init__(self):
        if not all(isinstance(v, int) and not isinstance(v, bool) for v in self.normal):
            raise TypeError(f"half-space normals must be integer vectors, got {self.normal!r}")
        object.__setattr__(self, "normal", tuple(self.normal))
        object.__setattr__(self, "rhs", as_fraction(self.rhs))

    def value(self, x: Sequence) -> Fraction:
        return sum((n * xi for n, xi in zip(self.normal, x)), Fraction(0))

    def holds(self, x: Sequence) -> bool:
        return self.value(x) <= self.rhs


def _dot(u: Sequence, v: Sequence):
    return sum((a * b for a, b in zip(u, v)), 0)


class RationalPolytope:
    """A nonempty, pointed polyhedron ``{x in Q^d : <n_k, x> <= r_k}``.

    Instances are immutable.  Equality compares vertex and ray sets, which
    determine a pointed polyhedron uniquely.
    """

    __slots__ = ("dim", "halfspaces", "vertices", "rays", "__dict__")

    def __init__(self, halfspaces: Iterable[Halfspace | tuple], dim: int | None = None):
        hs = []
        for h in halfspaces:
            if not isinstance(h, Halfspace):
                normal, rhs = h
                h = Halfspace(tuple(normal), as_fraction(rhs))
            hs.append(h)
        if dim is None:
            if not hs:
                raise ValueError("dimension must be given for a polytope without half-spaces")
            dim = len(hs[0].normal)
        if any(len(h.normal) != dim for h in hs):
            raise ValueError("half-space normals have inconsistent lengths")
        if dim > MAX_DIM:
            raise ValueError(f"dimension {dim} exceeds the supported maximum {MAX_DIM}")
        object.__setattr__(self, "dim", dim)
        object.__setattr__(self, "halfspaces", tuple(hs))
        verts, rays = _double_description(self.halfspaces, dim)
        if not verts:
            raise ValueError("polyhedron is empty or has no vertex (not strongly convex)")
        object.__setattr__(self, "vertices", verts)
        object.__setattr__(self, "rays", rays)

    def __setattr__(self, name, value):
        raise AttributeError("RationalPolytope is immutable")

    def __reduce__(self):
        return (RationalPolytope, (self.halfspaces, self.dim))

    # -- constructors
    @classmethod
    def interval(cls, lo=None, hi=None) -> "RationalPolytope":
        """``[lo, hi]`` in one dimension; None stands for an infinite end."""
        hs = []
        if hi is not None:
            hs.append(((1,), hi))
        if lo is not None:
            hs.append(((-1,), -as_fraction(lo)))
        return cls(hs, dim=1)

    @classmethod
    def box(cls, bounds: Sequence[tuple]) -> "RationalPolytope":
        d = len(bounds)
        hs = []
        for i, (lo, hi) in enumerate(bounds):
            e = tuple(int(j == i) for j in range(d))
            if hi is not None:
                hs.append((e, hi))
            if lo is not None:
                hs.append((tuple(-v for v in e), -as_fraction(lo)))
        return cls(hs, dim=d)

    # -- queries
    def contains(self, x: Sequence) -> bool:
        x = [as_fraction(v) for v in x]
        if len(x) != self.dim:
            raise ValueError(f"point of dimension {len(x)} tested against a polytope of dimension {self.dim}")
        return all(h.holds(x) for h in self.halfspaces)

    @property
    def is_bounded(self) -> bool:
        return not self.rays

    @cached_property
    def is_full_dimensional(self) -> bool:
        if self.dim == 0:
            return True
        # maximise a uniform slack s with <n,x> + s <= rhs for every nonzero normal
        rows, rhs = [], []
        for h in self.halfspaces:
            if any(h.normal):
                rows.append(list(h.normal) + [1])
                rhs.append(h.rhs)
        rows.append([0] * self.dim + [1])
        rhs.append(1)
        res = maximize([0] * self.dim + [1], rows, rhs)
        return res.status == "optimal" and res.value > 0

    def _key(self):
        return (self.dim, frozenset(self.vertices), frozenset(self.rays))

    def __eq__(self, other):
        return isinstance(other, RationalPolytope) and self._key() == other._key()

    def __hash__(self):
        return hash(self._key())

    def __repr__(self):
        parts = [f"{_fmt_vec(h.normal)}.x <= {h.rhs}" for h in self.halfspaces]
        return f"RationalPolytope(dim={self.dim}, [{', '.join(parts)}])"


def _fmt_vec(v) -> str:
    return "(" + ",".join(str(x) for x in v) + ")"


def _double_description(hs: tuple[Halfspace, ...], d: int):
    for h in hs:
        if not any(h.normal) and h.rhs < 0:
            return (), ()
    active = [h for h in hs if any(h.normal)]
    if d == 0:
        return ((),), ()
    if rank([h.normal for h in active]) < d:
        return (), ()
    verts = set()
    for sub in combinations(active, d):
        x = solve([h.normal for h in sub], [h.rhs for h in sub])
        if x is not None and all(h.holds(x) for h in active):
            verts.add(x)
    rays = set()
    for sub in combinations(active, d - 1):
        ns = nullspace([h.normal for h in sub], d)
        if len(ns) != 1:
            continue
        for sign in (1, -1):
            r = tuple(sign * v for v in ns[0])
            if all(_dot(h.normal, r) <= 0 for h in active):
                rays.add(primitive_integer_vector(r))
    return tuple(sorted(verts)), tuple(sorted(rays))


# --------------------------------------------------------------------------
# affine functions


@dataclass(frozen=True, order=True)
class AffineFunction:
    """``x -> <slope, x> + const`` with an integer slope vector."""

    slope: tuple[int, ...]
    const: Fraction = Fraction(0)

    def __post_init__(self):
        slope = tuple(self.slope)
        if not all(isinstance(v, int) and not isinstance(v, bool) for v in slope):
            raise TypeError(f"affine slopes must be integers, got {self.slope!r}")
        object.__setattr__(self, "slope", slope)
        object.__setattr__(self, "const", as_fraction(self.const))

    @property
    def dim(self) -> int:
        return len(self.slope)

    @classmethod
    def constant(cls, c, dim: int) -> "AffineFunction":
        return cls((0,) * dim, as_fraction(c))

    @classmethod
    def coordinate(cls, i: int, dim: int, const=0) -> "AffineFunction":
        return cls(tuple(int(j == i) for j in range(dim)), as_fraction(const))

    def __call__(self, x: Sequence) -> Fraction:
        if len(x) != self.dim:
            raise ValueError("dimension mismatch in affine evaluation")
        return _dot(self.slope, [as_fraction(v) for v in x]) + self.const

    def _same_dim(self, other: "AffineFunction"):
        if other.dim != self.dim:
            raise ValueError(f"dimension mismatch: {self.dim} vs {other.dim}")

    def __add__(self, other):
        if not isinstance(other, AffineFunction):
            return AffineFunction(self.slope, self.const + as_fraction(other))
        self._same_dim(other)
        return AffineFunction(tuple(a + b for a, b in zip(self.slope, other.slope)), self.const + other.const)

    __radd__ = __add__

    def __neg__(self):
        return AffineFunction(tuple(-a for a in self.slope), -self.const)

    def __sub__(self, other):
        return self + (-other if isinstance(other, AffineFunction) else -as_fraction(other))

    @property
    def is_constant(self) -> bool:
        return not any(self.slope)

    def __str__(self):
        names = ["X"] if self.dim == 1 else [f"X{i + 1}" for i in range(self.dim)]
        terms = []
        for coef, name in zip(self.slope, names):
            if coef == 0:
                continue
            mag = "" if abs(coef) == 1 else f"{abs(coef)}*"
            terms.append(("-" if coef < 0 else "+", f"{mag}{name}"))
        if self.const != 0 or not terms:
            terms.append(("-" if self.const < 0 else "+", str(abs(self.const))))
        out = ("-" if terms[0][0] == "-" else "") + terms[0][1]
        for sign, body in terms[1:]:
            out += f" {sign} {body}"
        return out


@dataclass(frozen=True)
class Bounded:
    value: Fraction
    vertex: tuple[Fraction, ...]


@dataclass(frozen=True)
class Unbounded:
    ray: tuple[int, ...]


def affine_max_on(domain: RationalPolytope, f: AffineFunction) -> Bounded | Unbounded:
    """Exact supremum of ``f`` over ``domain`` with a vertex or ray witness."""
    if f.dim != domain.dim:
        raise ValueError(f"function of dimension {f.dim} on a polytope of dimension {domain.dim}")
    for r in domain.rays:
        if _dot(f.slope, r) > 0:
            return Unbounded(r)
    best = None
    for v in domain.vertices:
        val = f(v)
        if best is None or val > best.value:
            best = Bounded(val, v)
    return best


# --------------------------------------------------------------------------
# monoid pairs


@dataclass(frozen=True)
class GroupPair:
    """The pair (H; H_{<=0}) for an ordered group H inside Q."""

    group: Group = Z
    kind = "group"

    def check(self, a) -> Fraction:
        return self.group.check(a)

    def in_carrier(self, a) -> bool:
        self.check(a)
        return True

    def is_integer(self, a) -> bool:
        return self.check(a) <= 0


@dataclass(frozen=True)
class AffinePair:
    """Affine functions on ``base`` with integer slopes and constants in ``group``;
    the integers are the functions bounded above by zero on ``base``."""

    base: RationalPolytope
    group: Group = Z
    kind = "affine"

    def check(self, a) -> AffineFunction:
        if not isinstance(a, AffineFunction):
            raise TypeError(f"expected an AffineFunction, got {type(a).__name__}")
        if a.dim != self.base.dim:
            raise ValueError(f"affine function of dimension {a.dim} over a base of dimension {self.base.dim}")
        self.group.check(a.const)
        return a

    def unbounded_ray(self, a: AffineFunction) -> tuple[int, ...] | None:
        """A declared boundary ray along which ``a`` grows, if any."""
        return None

    def in_carrier(self, a) -> bool:
        self.check(a)
        return self.unbounded_ray(a) is None

    def is_integer(self, a) -> bool:
        self.check(a)
        m = affine_max_on(self.base, a)
        return isinstance(m, Bounded) and m.value <= 0


@dataclass(frozen=True)
class BoundedAffinePair(AffinePair):
    """Affine functions bounded above along the declared boundary rays of ``base``.

    This models a partial compactification of ``base`` at infinity: each
    declared ray is a direction in which a point at infinity has been added.
    """

    boundary_rays: tuple[tuple[int, ...], ...] = ()
    kind = "bounded_affine"

    def __post_init__(self):
        rays = tuple(tuple(r) for r in self.boundary_rays)
        for r in rays:
            if len(r) != self.base.dim or not any(r):
                raise ValueError(f"boundary ray {r!r} is not a nonzero vector of dimension {self.base.dim}")
            if not all(_dot(h.normal, r) <= 0 for h in self.base.halfspaces):
                raise ValueError(f"boundary ray {r!r} is not a recession direction of the base")
        object.__setattr__(self, "boundary_rays", rays)

    def unbounded_ray(self, a: AffineFunction) -> tuple[int, ...] | None:
        for r in self.boundary_rays:
            if _dot(a.slope, r) > 0:
                return r
        return None

    def is_integer(self, a) -> bool:
        if not self.in_carrier(a):
            raise ValueError(f"{a} is not bounded above along the boundary rays")
        return super().is_integer(a)


def pair_is_integer(pair: GroupPair | AffinePair, a) -> bool:
    """Membership of ``a`` in the integers A+ of ``pair``."""
    return pair.is_integer(a)


# --------------------------------------------------------------------------
# CPA functions


def _strict_point(domain: RationalPolytope, g: AffineFunction, others: Iterable[AffineFunction]):
    """A point of ``domain`` where ``g`` is strictly above every function in ``others``.

    Solved as ``max t`` subject to ``t <= g - h`` for all ``h``, ``x`` in the domain,
    ``t <= 1``; such a point exists iff the optimum is positive.
    """
    d = domain.dim
    rows, rhs = [], []
    for h in others:
        diff = g - h
        rows.append([-s for s in diff.slope] + [1])
        rhs.append(diff.const)
    for hs in domain.halfspaces:
        rows.append(list(hs.normal) + [0])
        rhs.append(hs.rhs)
    rows.append([0] * d + [1])
    rhs.append(1)
    res = maximize([0] * d + [1], rows, rhs)
    if res.status != "optimal" or res.value <= 0:
        return None
    return res.x[:d]


def _dominated_by_one(domain, g, h) -> bool:
    m = affine_max_on(domain, g - h)
    return isinstance(m, Bounded) and m.value <= 0


@dataclass(frozen=True)
class CPAFunction:
    """A finite join of affine functions on a full-dimensional rational polyhedron.

    Build values with :meth:`of`, which returns the canonical (irredundant)
    form; structural equality of canonical forms is equality of functions.
    """

    pieces: frozenset
    domain: RationalPolytope

    def __post_init__(self):
        object.__setattr__(self, "pieces", frozenset(self.pieces))
        for p in self.pieces:
            if not isinstance(p, AffineFunction) or p.dim != self.domain.dim:
                raise ValueError(f"piece {p!r} is not an affine function on the domain")

    @classmethod
    def of(cls, pieces: Iterable[AffineFunction], domain: RationalPolytope) -> "CPAFunction":
        return cpa_reduce(cls(frozenset(pieces), domain))

    @classmethod
    def bottom(cls, domain: RationalPolytope) -> "CPAFunction":
        return cls(frozenset(), domain)

    @classmethod
    def constant(cls, c, domain: RationalPolytope) -> "CPAFunction":
        return cls(frozenset([AffineFunction.constant(c, domain.dim)]), domain)

    @property
    def is_bottom(self) -> bool:
        return not self.pieces

    def sorted_pieces(self) -> list[AffineFunction]:
        return sorted(self.pieces)

    def __call__(self, q):
        return cpa_eval(self, q)

    def __or__(self, other):
        return cpa_join(self, other)

    def __add__(self, other):
        return cpa_add(self, other)

    def __str__(self):
        if self.is_bottom:
            return "-inf"
        return " v ".join(str(p) for p in self.sorted_pieces())


def _require_full_dim(domain: RationalPolytope):
    if not domain.is_full_dimensional:
        raise ValueError("CPA functions require a full-dimensional domain")


def _common(f: CPAFunction, g: CPAFunction) -> RationalPolytope:
    if f.domain != g.domain:
        raise ValueError("CPA functions live on different domains")
    return f.domain


def cpa_reduce(f: CPAFunction) -> CPAFunction:
    """Drop every piece that is nowhere strictly above the join of the others."""
    domain = f.domain
    _require_full_dim(domain)
    kept = sorted(f.pieces)
    i = 0
    while i < len(kept):
        g = kept[i]
        others = kept[:i] + kept[i + 1:]
        if not others:
            break
        # a vertex where g is strictly largest settles essentiality cheaply
        if any(all(g(v) > h(v) for h in others) for v in domain.vertices):
            i += 1
            continue
        if any(_dominated_by_one(domain, g, h) for h in others) or _strict_point(domain, g, others) is None:
            del kept[i]
        else:
            i += 1
    return CPAFunction(frozenset(kept), domain)


def cpa_join(f: CPAFunction, g: CPAFunction) -> CPAFunction:
    domain = _common(f, g)
    return cpa_reduce(CPAFunction(f.pieces | g.pieces, domain))


def cpa_add(f: CPAFunction, g: CPAFunction) -> CPAFunction:
    domain = _common(f, g)
    return cpa_reduce(CPAFunction(frozenset(a + b for a, b in product(f.pieces, g.pieces)), domain))


def cpa_eval(f: CPAFunction, q: Sequence) -> Fraction | None:
    """Value at ``q``; None stands for -inf (the bottom function)."""
    q = tuple(as_fraction(v) for v in q)
    if not f.domain.contains(q):
        raise ValueError(f"point {q} lies outside the domain")
    if f.is_bottom:
        return None
    return max(p(q) for p in f.pieces)


def cpa_leq_witness(f: CPAFunction, g: CPAFunction) -> tuple[Fraction, ...] | None:
    """None when ``f <= g`` everywhere, otherwise a rational point where ``f > g``.

    The point is the first vertex of the domain where ``f > g`` if there is one.
    """
    domain = _common(f, g)
    if f.is_bottom:
        return None
    for v in domain.vertices:
        if g.is_bottom or max(p(v) for p in f.pieces) > max(h(v) for h in g.pieces):
            return v
    for p in sorted(f.pieces):
        if any(_dominated_by_one(domain, p, h) for h in g.pieces):
            continue
        q = _strict_point(domain, p, g.pieces)
        if q is not None:
            return q
    return None


def cpa_leq(f: CPAFunction, g: CPAFunction) -> bool:
    return cpa_leq_witness(f, g) is None


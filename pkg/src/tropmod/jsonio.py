"""JSON encodings of the package's values.

Rationals are written as plain integers when integral and as
``{"num": p, "den": q}`` otherwise; ``"p/q"`` strings are accepted on input.
Affine functions are written in the same notation ``str`` produces, such as
``"2*X1 - X2 + 1/2"`` (``"X"`` in dimension one), and an object form
``{"slope": [...], "const": r}`` is accepted on input.  Floats are refused.
"""

from __future__ import annotations

import re
from fractions import Fraction
from typing import Any, Sequence

from .exact import as_fraction
from .ordered_algebra import (
    AffineFunction,
    AffinePair,
    BoundedAffinePair,
    CPAFunction,
    Group,
    GroupPair,
    Halfspace,
    RationalPolytope,
    Z,
)
from .quiver import ClosureMatrix, Edge, QuiverPresentation
from .semilattice import FinBModule
from .weight_polyhedra import WeightPolyhedron

__all__ = [
    "MalformedInput",
    "dump_affine",
    "dump_cpa",
    "dump_closure",
    "dump_dbm",
    "dump_pair",
    "dump_polytope",
    "dump_quiver",
    "dump_rational",
    "load_affine",
    "load_closure",
    "load_cpa",
    "load_dbm",
    "load_pair",
    "load_polytope",
    "load_quiver",
    "load_rational",
    "load_semilattice",
]


class MalformedInput(ValueError):
    """The request does not match the expected schema."""


def _need(obj: Any, kind: type | tuple, what: str):
    if not isinstance(obj, kind) or isinstance(obj, bool) and kind is not bool:
        raise MalformedInput(f"{what}: expected {getattr(kind, '__name__', kind)}, got {obj!r}")
    return obj


def _int(obj: Any, what: str) -> int:
    if isinstance(obj, bool) or not isinstance(obj, int):
        raise MalformedInput(f"{what}: expected an integer, got {obj!r}")
    return obj


def dump_rational(x) -> int | dict:
    x = as_fraction(x)
    if x.denominator == 1:
        return int(x)
    return {"num": x.numerator, "den": x.denominator}


def load_rational(obj: Any, what: str = "rational") -> Fraction:
    if isinstance(obj, dict):
        if set(obj) != {"num", "den"}:
            raise MalformedInput(f"{what}: rational objects have exactly the keys num and den")
        num, den = _int(obj["num"], what), _int(obj["den"], what)
        if den == 0:
            raise MalformedInput(f"{what}: zero denominator")
        return Fraction(num, den)
    if isinstance(obj, str):
        try:
            return Fraction(obj.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise MalformedInput(f"{what}: cannot parse {obj!r} as a rational") from exc
    return Fraction(_int(obj, what))


def load_optional_rational(obj: Any, what: str) -> Fraction | None:
    return None if obj is None else load_rational(obj, what)


def dump_optional(x) -> int | dict | None:
    return None if x is None else dump_rational(x)


# -- affine functions

_TERM = re.compile(r"\s*([+-])?\s*(?:(\d+(?:/\d+)?)\s*\*?\s*)?(X\d*)?\s*")


def dump_affine(f: AffineFunction) -> str:
    return str(f)


def load_affine(obj: Any, dim: int, what: str = "affine function") -> AffineFunction:
    if isinstance(obj, dict):
        if set(obj) != {"slope", "const"}:
            raise MalformedInput(f"{what}: affine objects have exactly the keys slope and const")
        slope = [_int(v, what) for v in _need(obj["slope"], list, what)]
        if len(slope) != dim:
            raise MalformedInput(f"{what}: slope of length {len(slope)} in dimension {dim}")
        return AffineFunction(tuple(slope), load_rational(obj["const"], what))
    if isinstance(obj, (int, dict)) and not isinstance(obj, bool):
        return AffineFunction.constant(load_rational(obj, what), dim)
    if not isinstance(obj, str) or not obj.strip():
        raise MalformedInput(f"{what}: expected a string or object, got {obj!r}")
    slope = [0] * dim
    const = Fraction(0)
    s = obj.strip()
    pos = 0
    first = True
    while pos < len(s):
        m = _TERM.match(s, pos)
        if m is None or m.end() == pos:
            raise MalformedInput(f"{what}: cannot parse {obj!r}")
        sign, coef, var = m.groups()
        if sign is None and not first or coef is None and var is None:
            raise MalformedInput(f"{what}: cannot parse {obj!r}")
        first = False
        sgn = -1 if sign == "-" else 1
        if var is None:
            const += sgn * Fraction(coef)
        else:
            if coef is not None and "/" in coef:
                raise MalformedInput(f"{what}: slopes must be integers in {obj!r}")
            if var == "X":
                if dim != 1:
                    raise MalformedInput(f"{what}: write X1..X{dim} in dimension {dim}")
                idx = 0
            else:
                idx = int(var[1:]) - 1
                if dim == 1 or not 0 <= idx < dim:
                    raise MalformedInput(f"{what}: unknown variable {var} in dimension {dim}")
            slope[idx] += sgn * (1 if coef is None else int(coef))
        pos = m.end()
    return AffineFunction(tuple(slope), const)


def dump_cpa(f: CPAFunction) -> list[str]:
    return [dump_affine(p) for p in f.sorted_pieces()]


def load_cpa(obj: Any, base: RationalPolytope, what: str = "cpa function", reduce: bool = True) -> CPAFunction:
    pieces = [load_affine(p, base.dim, what) for p in _need(obj, list, what)]
    if reduce:
        return CPAFunction.of(pieces, base)
    return CPAFunction(frozenset(pieces), base)


# -- polytopes and pairs


def dump_polytope(p: RationalPolytope) -> dict:
    return {
        "dim": p.dim,
        "halfspaces": [{"normal": list(h.normal), "rhs": dump_rational(h.rhs)} for h in p.halfspaces],
    }


def load_polytope(obj: Any) -> RationalPolytope:
    _need(obj, dict, "polytope")
    try:
        if "interval" in obj:
            lo, hi = _need(obj["interval"], list, "interval")
            return RationalPolytope.interval(load_optional_rational(lo, "interval"), load_optional_rational(hi, "interval"))
        if "box" in obj:
            bounds = [
                (load_optional_rational(lo, "box"), load_optional_rational(hi, "box"))
                for lo, hi in _need(obj["box"], list, "box")
            ]
            return RationalPolytope.box(bounds)
        hs = [
            Halfspace(tuple(_int(v, "normal") for v in h["normal"]), load_rational(h["rhs"], "rhs"))
            for h in _need(obj.get("halfspaces"), list, "halfspaces")
        ]
        dim = obj.get("dim")
        return RationalPolytope(hs, None if dim is None else _int(dim, "dim"))
    except MalformedInput:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise MalformedInput(f"polytope: {exc}") from exc


def dump_pair(pair) -> dict:
    if isinstance(pair, GroupPair):
        return {"kind": "group", "group": pair.group.tag}
    out = {"kind": pair.kind, "group": pair.group.tag, "base": dump_polytope(pair.base)}
    if isinstance(pair, BoundedAffinePair):
        out["boundary_rays"] = [list(r) for r in pair.boundary_rays]
    return out


def _group(obj: Any) -> Group:
    if obj is None:
        return Z
    try:
        return Group.parse(_need(obj, str, "group"))
    except ValueError as exc:
        raise MalformedInput(str(exc)) from exc


def load_pair(obj: Any):
    _need(obj, dict, "pair")
    kind = obj.get("kind", "group")
    group = _group(obj.get("group"))
    if kind == "group":
        return GroupPair(group)
    if kind not in ("affine", "bounded_affine"):
        raise MalformedInput(f"unknown pair kind {kind!r}")
    base = load_polytope(obj.get("base"))
    if not base.is_full_dimensional:
        raise MalformedInput("the base of an affine pair must be full-dimensional")
    if kind == "affine":
        return AffinePair(base, group)
    rays = tuple(tuple(_int(v, "ray") for v in _need(r, list, "ray")) for r in _need(obj.get("boundary_rays", []), list, "boundary_rays"))
    try:
        return BoundedAffinePair(base, group, rays)
    except ValueError as exc:
        raise MalformedInput(str(exc)) from exc


# -- quivers, closures, polyhedra


def _weight_dump(pair, w):
    return dump_rational(w) if isinstance(pair, GroupPair) else dump_affine(w)


def _weight_load(pair, obj, what):
    if isinstance(pair, GroupPair):
        return load_rational(obj, what)
    return load_affine(obj, pair.base.dim, what)


def dump_edges(pair, edges: Sequence[Edge]) -> list[dict]:
    return [{"src": e.src, "dst": e.dst, "w": _weight_dump(pair, e.w)} for e in edges]


def dump_quiver(q: QuiverPresentation) -> dict:
    return {"pair": dump_pair(q.pair), "n": q.n, "edges": dump_edges(q.pair, q.edges)}


def load_quiver(obj: Any) -> QuiverPresentation:
    """A quiver; a top-level ``base`` (with optional ``boundary_rays``) makes it a family."""
    _need(obj, dict, "quiver")
    if "pair" in obj:
        pair = load_pair(obj["pair"])
    elif "base" in obj:
        pair_obj = {"kind": "bounded_affine" if "boundary_rays" in obj else "affine", "base": obj["base"], "group": obj.get("group")}
        if "boundary_rays" in obj:
            pair_obj["boundary_rays"] = obj["boundary_rays"]
        pair = load_pair(pair_obj)
    else:
        pair = GroupPair(_group(obj.get("group")))
    n = _int(obj.get("n"), "n")
    edges = []
    for k, e in enumerate(_need(obj.get("edges", []), list, "edges")):
        _need(e, dict, f"edge {k}")
        try:
            edges.append(Edge(_int(e["src"], "src"), _int(e["dst"], "dst"), _weight_load(pair, e["w"], f"edge {k}")))
        except KeyError as exc:
            raise MalformedInput(f"edge {k} lacks {exc}") from exc
    try:
        if isinstance(pair, AffinePair):
            from .cpa_families import FamilyPresentation

            return FamilyPresentation(pair, n, tuple(edges))
        return QuiverPresentation(pair, n, tuple(edges))
    except (TypeError, ValueError) as exc:
        raise MalformedInput(str(exc)) from exc


def dump_closure(c: ClosureMatrix) -> list[list]:
    return [[dump_optional(v) for v in row] for row in c.W]


def load_closure(obj: Any) -> ClosureMatrix:
    rows = _need(obj, list, "W")
    try:
        return ClosureMatrix(tuple(tuple(load_optional_rational(v, "W") for v in _need(r, list, "W")) for r in rows))
    except ValueError as exc:
        raise MalformedInput(str(exc)) from exc


def dump_dbm(p: WeightPolyhedron) -> dict:
    return {"n": p.n, "dbm": [[dump_optional(v) for v in row] for row in p.dbm], "nonempty": p.nonempty}


def load_dbm(obj: Any) -> WeightPolyhedron:
    """Any list of bounds; the result is tightened."""
    _need(obj, dict, "polyhedron")
    n = _int(obj.get("n"), "n")
    rows = _need(obj.get("dbm"), list, "dbm")
    if len(rows) != n or any(len(_need(r, list, "dbm")) != n for r in rows):
        raise MalformedInput("dbm must be n x n")
    bounds = [(i, j, load_rational(v, "dbm")) for i, r in enumerate(rows) for j, v in enumerate(r) if v is not None]
    return WeightPolyhedron.from_bounds(n, bounds)


# -- semilattices


def load_semilattice(obj: Any) -> FinBModule:
    """``{"join": table, "bottom": k}``, ``{"leq": matrix}`` or ``{"named": "m3"|"n5"|"chain"|"powerset", "k": int}``."""
    _need(obj, dict, "semilattice")
    try:
        if "named" in obj:
            name = obj["named"]
            if name in ("m3", "n5"):
                return getattr(FinBModule, name)()
            if name in ("chain", "powerset"):
                return getattr(FinBModule, name)(_int(obj.get("k"), "k"))
            raise MalformedInput(f"unknown named semilattice {name!r}")
        if "join" in obj:
            table = [[_int(v, "join") for v in _need(r, list, "join")] for r in _need(obj["join"], list, "join")]
            return FinBModule(len(table), tuple(map(tuple, table)), _int(obj.get("bottom", 0), "bottom"))
        if "leq" in obj:
            leq = [[_need(v, bool, "leq") for v in _need(r, list, "leq")] for r in _need(obj["leq"], list, "leq")]
            return FinBModule.from_order(leq)
    except MalformedInput:
        raise
    except ValueError as exc:
        raise MalformedInput(str(exc)) from exc
    raise MalformedInput("semilattice needs one of join, leq or named")

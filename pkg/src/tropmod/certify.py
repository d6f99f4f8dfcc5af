"""Requests, certificates and the independent certificate checker.

``run`` answers a request and attaches evidence; ``verify`` re-checks that
evidence against the original request using only cheap pointwise facts:
path sums, substitution of points into constraints, join-table lookups and
single dominance tests between CPA functions.  It never calls the closure,
projectivity or separation routines that produced the certificate.

Where evidence involves a free choice it is made canonical by a rule the
checker can test locally, so an edited certificate is rejected even when the
edit would still prove the verdict: paths use the first of equal parallel
edges, points complete their fixed coordinates greedily, and base points are
the first vertex that works.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable, Mapping

from . import cpa_families as fam_ops
from .jsonio import (
    MalformedInput,
    _int,
    _need,
    _weight_dump,
    _weight_load,
    dump_affine,
    dump_closure,
    dump_cpa,
    dump_edges,
    dump_optional,
    dump_polytope,
    dump_quiver,
    dump_rational,
    load_affine,
    load_cpa,
    load_optional_rational,
    load_polytope,
    load_quiver,
    load_rational,
    load_semilattice,
)
from .ordered_algebra import (
    AffineFunction,
    AffinePair,
    BoundedAffinePair,
    CPAFunction,
    GroupPair,
    Q,
    _dot,
    _strict_point,
    cpa_add,
    cpa_eval,
    cpa_join,
    cpa_leq,
    cpa_leq_witness,
)
from .quiver import (
    DEFAULT_VERTEX_CAP,
    ClosureMatrix,
    Degenerate,
    Edge,
    QuiverPresentation,
    canonical_quiver,
    check_module_hom,
    closure_paths,
    kleene_closure,
    order_dual,
)
from .semilattice import FinBModule, SizeError, is_free, is_projective, primitives
from .weight_polyhedra import feasible_point, polyhedron_of, project_diagonal, separate

__all__ = ["COMMANDS", "POSITIVE", "Certificate", "Rejected", "Request", "run", "verify"]

POSITIVE = frozenset(
    {
        "closure",
        "cpa",
        "dual",
        "fiber",
        "free",
        "hom",
        "leq",
        "polyhedron",
        "primitives",
        "projective",
        "related",
        "separated",
        "value",
        "verified",
    }
)


class Rejected(Exception):
    """A certificate failed a check."""


def _expect(cond: bool, msg: str):
    if not cond:
        raise Rejected(msg)


@dataclass(frozen=True)
class Request:
    command: str
    payload: Any
    options: Mapping[str, Any] = field(default_factory=dict)

    @classmethod
    def from_json(cls, obj: Any) -> "Request":
        _need(obj, dict, "request")
        if "command" not in obj:
            raise MalformedInput("request lacks a command")
        return cls(obj["command"], obj.get("payload"), dict(obj.get("options") or {}))

    def to_json(self) -> dict:
        return {"command": self.command, "payload": self.payload, "options": dict(self.options)}

    @property
    def cap_n(self) -> int:
        return _int(self.options.get("cap_n", DEFAULT_VERTEX_CAP), "cap_n")


@dataclass(frozen=True)
class Certificate:
    verdict: str
    witness: dict
    replay: dict

    @property
    def ok(self) -> bool:
        return self.verdict in POSITIVE

    @property
    def exit_code(self) -> int:
        return 0 if self.ok else 1

    def to_json(self) -> dict:
        return {"verdict": self.verdict, "witness": self.witness, "replay": self.replay}

    @classmethod
    def from_json(cls, obj: Any) -> "Certificate":
        _need(obj, dict, "certificate")
        if set(obj) != {"verdict", "witness", "replay"}:
            raise MalformedInput("certificate needs exactly verdict, witness and replay")
        return cls(obj["verdict"], obj["witness"], obj["replay"])

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True)


# --------------------------------------------------------------------------
# shared evidence: paths, closures, cycles


def _least_parallel(q: QuiverPresentation, path) -> list[int]:
    """Swap each edge for the first edge with the same ends and weight."""
    first: dict = {}
    for k, e in enumerate(q.edges):
        first.setdefault((e.src, e.dst, e.w), k)
    return [first[(q.edges[k].src, q.edges[k].dst, q.edges[k].w)] for k in path]


def _path_sum(q: QuiverPresentation, path: Any, src: int, dst: int):
    """Weight of a contiguous edge path from ``src`` to ``dst``; the empty path needs ``src == dst``.

    Paths name the first of any equal parallel edges, so a path is determined
    by its vertices.
    """
    _expect(isinstance(path, list), "path must be a list")
    at = src
    total = None
    for k in path:
        _expect(isinstance(k, int) and not isinstance(k, bool) and 0 <= k < len(q.edges), f"bad edge index {k!r}")
        e = q.edges[k]
        _expect(all((d.src, d.dst, d.w) != (e.src, e.dst, e.w) for d in q.edges[:k]), "path skips an equal parallel edge")
        _expect(e.src == at, "path is not contiguous")
        at = e.dst
        total = e.w if total is None else total + e.w
    _expect(at == dst, "path ends at the wrong vertex")
    return total


def _scalar_closure_cert(q: QuiverPresentation, c: ClosureMatrix) -> dict:
    paths = closure_paths(q, c)
    return {
        "W": dump_closure(c),
        "paths": [{"src": i, "dst": j, "edges": _least_parallel(q, p)} for (i, j), p in sorted(paths.items())],
    }


def _check_scalar_closure(q: QuiverPresentation, wit: Any) -> ClosureMatrix:
    """Accept ``W`` only if it is exactly the closure of ``q``.

    Realising paths bound ``W`` from below; edges below ``W``, the triangle law
    and a zero diagonal bound every path from above.  The cycle law then rules
    out positive cycles.
    """
    _expect(isinstance(wit, dict) and set(wit) == {"W", "paths"}, "closure certificate keys")
    n = q.n
    rows = wit["W"]
    _expect(isinstance(rows, list) and len(rows) == n and all(isinstance(r, list) and len(r) == n for r in rows), "W shape")
    w = [[load_optional_rational(v, "W") for v in r] for r in rows]
    for i in range(n):
        _expect(w[i][i] == 0, "diagonal must be 0")
    seen = set()
    for entry in wit["paths"]:
        _expect(isinstance(entry, dict) and set(entry) == {"src", "dst", "edges"}, "path entry keys")
        i, j = entry["src"], entry["dst"]
        _expect(isinstance(i, int) and isinstance(j, int) and 0 <= i < n and 0 <= j < n and i != j, "path endpoints")
        _expect((i, j) not in seen, "duplicate path entry")
        seen.add((i, j))
        _expect(w[i][j] is not None and _path_sum(q, entry["edges"], i, j) == w[i][j], f"path for ({i},{j}) does not realise W")
    _expect(seen == {(i, j) for i in range(n) for j in range(n) if i != j and w[i][j] is not None}, "paths do not cover W")
    for e in q.edges:
        _expect(w[e.src][e.dst] is not None and e.w <= w[e.src][e.dst], "an edge exceeds W")
    for i in range(n):
        for j in range(n):
            if w[i][j] is None:
                continue
            if w[j][i] is not None:
                _expect(w[i][j] + w[j][i] <= 0, "positive cycle inside W")
            for k in range(n):
                if w[j][k] is not None:
                    _expect(w[i][k] is not None and w[i][k] >= w[i][j] + w[j][k], "triangle law fails")
    return ClosureMatrix(tuple(map(tuple, w)))


def _check_greedy(w, fixed: dict, p: list):
    """``p`` extends ``fixed`` coordinate by coordinate: the least value the
    coordinates set so far allow, else the greatest, else 0."""
    n = len(w)
    _expect(len(p) == n, "point length")
    known = dict(fixed)
    for k, v in fixed.items():
        _expect(p[k] == v, f"coordinate {k} must be {v}")
    for k in range(n):
        if k in fixed:
            continue
        lows = [known[m] + w[m][k] for m in known if w[m][k] is not None]
        highs = [known[m] - w[k][m] for m in known if w[k][m] is not None]
        want = max(lows) if lows else min(highs) if highs else Fraction(0)
        _expect(p[k] == want, f"coordinate {k} is not the canonical completion")
        known[k] = want


def _separation_fixed(w, f, g) -> dict:
    (a, i), (b, j) = f, g
    fixed = {j: -b}
    if i != j:
        if w[i][j] is not None:
            fixed[i] = -b - w[i][j]
        else:
            lo = -a + 1
            if w[j][i] is not None:
                lo = max(lo, -b + w[j][i])
            fixed[i] = lo
    return fixed


def _check_first_vertex(base, pt, fails):
    """``pt`` is the first vertex where ``fails`` holds, or no vertex fails."""
    for v in base.vertices:
        if tuple(pt) == v:
            return
        _expect(not fails(v), "an earlier vertex of the base already works")


def _cpa_at(w, q):
    return None if w is None else max(p(q) for p in w.pieces)


def _single(f: AffineFunction, base) -> CPAFunction:
    return CPAFunction(frozenset([f]), base)


def _family_closure_cert(fam, clo) -> dict:
    rows = [[None if f is None else dump_cpa(f) for f in row] for row in clo.W]
    paths = [
        {"src": i, "dst": j, "piece": dump_affine(p), "edges": _least_parallel(fam, clo.paths[(i, j)][p])}
        for (i, j) in sorted(clo.paths)
        if i != j
        for p in sorted(clo.paths[(i, j)])
    ]
    return {"W": rows, "paths": paths}


def _check_family_closure(fam, wit: Any) -> list[list[CPAFunction | None]]:
    """The family analogue of :func:`_check_scalar_closure`, with dominance tested by ``cpa_leq``."""
    _expect(isinstance(wit, dict) and set(wit) == {"W", "paths"}, "closure certificate keys")
    n, base, d = fam.n, fam.base, fam.dim
    rows = wit["W"]
    _expect(isinstance(rows, list) and len(rows) == n and all(isinstance(r, list) and len(r) == n for r in rows), "W shape")
    raw = [[None if v is None else [load_affine(p, d) for p in _need(v, list, "W")] for v in r] for r in rows]
    zero = AffineFunction.constant(0, d)
    for i in range(n):
        _expect(raw[i][i] == [zero], "diagonal must be the zero function")
    for i in range(n):
        for j in range(n):
            if raw[i][j] is not None:
                _expect(raw[i][j] == sorted(set(raw[i][j])) and raw[i][j], "pieces must be sorted, distinct and nonempty")
    w = [[None if v is None else CPAFunction(frozenset(v), base) for v in r] for r in raw]
    seen = set()
    for entry in wit["paths"]:
        _expect(isinstance(entry, dict) and set(entry) == {"src", "dst", "piece", "edges"}, "path entry keys")
        i, j = entry["src"], entry["dst"]
        _expect(isinstance(i, int) and isinstance(j, int) and 0 <= i < n and 0 <= j < n and i != j, "path endpoints")
        piece = load_affine(entry["piece"], d)
        _expect(w[i][j] is not None and piece in w[i][j].pieces, "path for an unknown piece")
        _expect((i, j, piece) not in seen, "duplicate path entry")
        seen.add((i, j, piece))
        _expect(_path_sum(fam, entry["edges"], i, j) == piece, "path does not realise its piece")
    _expect(
        seen == {(i, j, p) for i in range(n) for j in range(n) if i != j and w[i][j] is not None for p in w[i][j].pieces},
        "paths do not cover W",
    )
    for e in fam.edges:
        _expect(w[e.src][e.dst] is not None and cpa_leq(_single(e.w, base), w[e.src][e.dst]), "an edge exceeds W")
    zero_f = _single(zero, base)
    for i in range(n):
        for j in range(n):
            if w[i][j] is None or i == j:
                continue
            if w[j][i] is not None:
                _expect(cpa_leq(cpa_add(w[i][j], w[j][i]), zero_f), "positive cycle inside W")
            for k in range(n):
                if w[j][k] is not None and j != k:
                    _expect(w[i][k] is not None and cpa_leq(cpa_add(w[i][j], w[j][k]), w[i][k]), "triangle law fails")
    return w


def _cycle_cert(q, exc: Degenerate) -> dict:
    out = {"cycle": _least_parallel(q, exc.cycle), "weight": _weight_dump(q.pair, exc.weight)}
    if exc.point is not None:
        out["point"] = [dump_rational(v) for v in exc.point]
    return out


def _check_cycle(q, wit: Any):
    scalar = isinstance(q.pair, GroupPair)
    keys = {"cycle", "weight"} if scalar else {"cycle", "weight", "point"}
    _expect(isinstance(wit, dict) and set(wit) == keys, "degeneracy certificate keys")
    cyc = wit["cycle"]
    _expect(isinstance(cyc, list) and cyc, "empty cycle")
    _expect(isinstance(cyc[0], int) and 0 <= cyc[0] < len(q.edges), "bad edge index")
    start = q.edges[cyc[0]].src
    weight = _path_sum(q, cyc, start, start)
    _expect(weight == _weight_load(q.pair, wit["weight"], "weight"), "cycle weight mismatch")
    if scalar:
        _expect(weight > 0, "cycle weight is not positive")
    else:
        pt = [load_rational(v) for v in _need(wit["point"], list, "point")]
        _expect(q.base.contains(pt), "witness point outside the base")
        _expect(weight(pt) > 0, "cycle weight is not positive at the point")


def _scalar_canonical_cert(q, c) -> dict:
    cq = canonical_quiver(c, q.pair)
    return {"edges": dump_edges(q.pair, cq.edges), "paths": _scalar_closure_cert(cq, c)["paths"]}


def _load_edges(pair, n, obj) -> tuple[Edge, ...]:
    out = []
    for e in _need(obj, list, "edges"):
        _expect(isinstance(e, dict) and set(e) == {"src", "dst", "w"}, "edge keys")
        src, dst = e["src"], e["dst"]
        _expect(isinstance(src, int) and isinstance(dst, int) and 0 <= src < n and 0 <= dst < n, "edge endpoints")
        out.append(Edge(src, dst, _weight_load(pair, e["w"], "w")))
    return tuple(out)


def _check_scalar_canonical(q, c: ClosureMatrix, wit):
    _expect(isinstance(wit, dict) and set(wit) == {"edges", "paths"}, "canonical quiver keys")
    edges = _load_edges(q.pair, q.n, wit["edges"])
    for e in edges:
        _expect(e.src != e.dst and c.W[e.src][e.dst] == e.w, "canonical edge differs from W")
    cq = QuiverPresentation(q.pair, q.n, edges)
    _expect(len(cq.edges) == len(edges), "canonical quiver has trivial loops")
    # canonical edges are entries of the closed matrix W, so paths in cq never exceed W;
    # realising paths show every entry is reached
    for entry in _need(wit["paths"], list, "paths"):
        _expect(isinstance(entry, dict) and set(entry) == {"src", "dst", "edges"}, "path entry keys")
        i, j = entry["src"], entry["dst"]
        _expect(isinstance(i, int) and isinstance(j, int) and 0 <= i < q.n and 0 <= j < q.n, "path endpoints")
        _expect(c.W[i][j] is not None and _path_sum(cq, entry["edges"], i, j) == c.W[i][j], "canonical path mismatch")
    covered = {(e["src"], e["dst"]) for e in wit["paths"]}
    _expect(len(covered) == len(wit["paths"]), "duplicate canonical path")
    _expect(covered == {(i, j) for i in range(q.n) for j in range(q.n) if i != j and c.W[i][j] is not None}, "canonical paths do not cover W")


def _family_canonical_cert(fam, clo) -> dict:
    cf = fam_ops.family_canonical_quiver(fam, clo)
    cclo = fam_ops.family_closure(cf)
    return {"edges": dump_edges(fam.pair, cf.edges), "paths": _family_closure_cert(cf, cclo)["paths"]}


def _check_family_canonical(fam, w, wit):
    _expect(isinstance(wit, dict) and set(wit) == {"edges", "paths"}, "canonical quiver keys")
    edges = _load_edges(fam.pair, fam.n, wit["edges"])
    for e in edges:
        _expect(e.src != e.dst and w[e.src][e.dst] is not None and e.w in w[e.src][e.dst].pieces, "canonical edge is not a closure piece")
    cf = fam_ops.FamilyPresentation(fam.pair, fam.n, edges)
    seen = set()
    for entry in _need(wit["paths"], list, "paths"):
        _expect(isinstance(entry, dict) and set(entry) == {"src", "dst", "piece", "edges"}, "path entry keys")
        i, j = entry["src"], entry["dst"]
        _expect(isinstance(i, int) and isinstance(j, int) and 0 <= i < fam.n and 0 <= j < fam.n and i != j, "path endpoints")
        piece = load_affine(entry["piece"], fam.dim)
        _expect(w[i][j] is not None and piece in w[i][j].pieces, "unknown piece")
        _expect(_path_sum(cf, entry["edges"], i, j) == piece, "canonical path mismatch")
        seen.add((i, j, piece))
    _expect(len(seen) == len(wit["paths"]), "duplicate canonical path")
    _expect(
        seen == {(i, j, p) for i in range(fam.n) for j in range(fam.n) if i != j and w[i][j] is not None for p in w[i][j].pieces},
        "canonical paths do not cover W",
    )


# --------------------------------------------------------------------------
# loaders: payload -> (parsed inputs, normalised JSON)


def _cap_quiver(q, req: Request):
    if q.n > req.cap_n:
        raise SizeError(f"quiver has {q.n} vertices, above the cap {req.cap_n}")


def _load_q(obj, req, family: bool | None = None):
    q = load_quiver(obj)
    if family is True and not isinstance(q.pair, AffinePair):
        raise MalformedInput("this command needs a family (affine weights over a base)")
    if family is False and not isinstance(q.pair, GroupPair):
        raise MalformedInput("this command needs scalar weights")
    _cap_quiver(q, req)
    return q


def _quiver_payload(req: Request):
    p = _need(req.payload, dict, "payload")
    return p.get("quiver", p)


def _load_generator(q, obj, what):
    _expect_input(isinstance(obj, list) and len(obj) == 2, f"{what}: expected [coefficient, vertex]")
    v = _int(obj[1], what)
    _expect_input(0 <= v < q.n, f"{what}: vertex out of range")
    return (_weight_load(q.pair, obj[0], what), v)


def _dump_generator(q, g):
    return [_weight_dump(q.pair, g[0]), g[1]]


def _expect_input(cond, msg):
    if not cond:
        raise MalformedInput(msg)


def _load_point(obj, dim, what="point"):
    pt = [load_rational(v, what) for v in _need(obj, list, what)]
    _expect_input(len(pt) == dim, f"{what}: expected {dim} coordinates")
    return tuple(pt)


# --------------------------------------------------------------------------
# commands


def _sl_load(req):
    p = _need(req.payload, dict, "payload")
    mod = load_semilattice(p)
    query = p.get("query", "projective")
    _expect_input(query in ("projective", "free", "primitives"), f"unknown query {query!r}")
    return (mod, query), {"join": [list(r) for r in mod.join], "bottom": mod.bottom, "query": query}


def _least_collision(mod: FinBModule, prims: list[int], any_prim: bool):
    """Least element ``v`` and least primitive ``m`` below it such that dropping ``m``
    from the primitives below ``v`` keeps the join ``v``; ``m`` must be maximal
    among them unless ``any_prim``."""
    for v in range(mod.n):
        below = [p for p in prims if mod.leq(p, v)]
        for m in below:
            if not any_prim and any(p != m and mod.leq(m, p) for p in below):
                continue
            if mod.join_all(p for p in below if p != m) == v:
                return v, m
    return None


def _sl_run(inputs, req):
    mod, query = inputs
    prims = sorted(primitives(mod))
    if query == "primitives":
        return "primitives", {"primitives": prims}
    if query == "projective":
        v = is_projective(mod)
        if v.ok:
            iso = {x: s for x, s in v.witness["iso"].items()}
            return "projective", {"primitives": prims, "iso": [sorted(iso[x]) for x in range(mod.n)]}
        v_, m = _least_collision(mod, prims, any_prim=False)
        return "not_projective", {"primitives": prims, "collision": {"element": v_, "dropped": m}}
    v = is_free(mod)
    if v.ok:
        bij = v.witness["bijection"]
        return "free", {"basis": prims, "bijection": [sorted(bij[x]) for x in range(mod.n)]}
    v_, m = _least_collision(mod, prims, any_prim=True)
    return "not_free", {"basis": prims, "collision": {"element": v_, "dropped": m}}


def _sl_verify(inputs, verdict, wit, req):
    mod, query = inputs
    n = mod.n
    key = "basis" if query == "free" else "primitives"
    expected_keys = {
        "primitives": {"primitives"},
        "projective": {"primitives", "iso"},
        "not_projective": {"primitives", "collision"},
        "free": {"basis", "bijection"},
        "not_free": {"basis", "collision"},
    }
    allowed = {"primitives": {"primitives"}, "projective": {"projective", "not_projective"}, "free": {"free", "not_free"}}[query]
    _expect(verdict in allowed and set(wit) == expected_keys[verdict], "verdict or witness keys")
    prims = wit[key]
    _expect(isinstance(prims, list) and prims == sorted(set(prims)) and all(isinstance(p, int) and 0 <= p < n for p in prims), "primitive list")
    # each listed element is join-irreducible and no other element is
    for x in range(n):
        strictly_below = [y for y in range(n) if y != x and mod.leq(y, x)]
        irreducible = x != mod.bottom and mod.join_all(strictly_below) != x
        _expect(irreducible == (x in prims), f"element {x} misclassified")
    if verdict == "primitives":
        return
    if verdict in ("projective", "free"):
        table = wit["iso" if verdict == "projective" else "bijection"]
        _expect(isinstance(table, list) and len(table) == n, "table length")
        sets = []
        for x, s in enumerate(table):
            _expect(isinstance(s, list) and s == sorted(set(s)) and set(s) <= set(prims), "table entry")
            _expect(mod.join_all(s) == x, f"table entry for {x} does not join to it")
            sets.append(frozenset(s))
        if verdict == "projective":
            for x in range(n):
                _expect(sets[x] == {p for p in prims if mod.leq(p, x)}, "entry is not the primitives below")
            for x in range(n):
                for y in range(n):
                    _expect(sets[mod.join[x][y]] == sets[x] | sets[y], "joins are not unions")
        else:
            _expect(len(set(sets)) == n and n == 2 ** len(prims), "subsets of the basis are not in bijection")
        return
    col = wit["collision"]
    _expect(isinstance(col, dict) and set(col) == {"element", "dropped"}, "collision keys")
    v, m = col["element"], col["dropped"]
    _expect(isinstance(v, int) and isinstance(m, int) and 0 <= v < n and m in prims, "collision fields")
    expect = _least_collision(mod, prims, any_prim=(verdict == "not_free"))
    _expect(expect == (v, m), "collision is not the least one")


def _quiver_load(req, family=None):
    q = _load_q(_quiver_payload(req), req, family)
    return q, {"quiver": dump_quiver(q)}


def _classify_run(q, req):
    if isinstance(q.pair, AffinePair):
        v = fam_ops.is_projective_family(q, req.cap_n)
        if v.verdict == "degenerate":
            return "degenerate", _cycle_cert(q, Degenerate(v.witness["cycle"], v.witness["weight"], v.witness["point"]))
        if v.verdict == "not_lower_finite":
            w = v.witness
            return "not_lower_finite", {
                "weight": dump_affine(w["weight"]),
                "ray": list(w["ray"]),
                "path": _least_parallel(q, w["path"]),
                "entry": list(w["entry"]),
            }
        clo = v.witness["closure"]
        return "projective", {"closure": _family_closure_cert(q, clo), "canonical_quiver": _family_canonical_cert(q, clo)}
    try:
        c = kleene_closure(q)
    except Degenerate as exc:
        return "degenerate", _cycle_cert(q, exc)
    return "projective", {"closure": _scalar_closure_cert(q, c), "canonical_quiver": _scalar_canonical_cert(q, c)}


def _classify_verify(q, verdict, wit, req):
    _expect(isinstance(wit, dict), "witness must be an object")
    if verdict == "degenerate":
        _check_cycle(q, wit)
    elif verdict == "not_lower_finite":
        _expect(isinstance(q.pair, BoundedAffinePair), "only bounded pairs can fail lower finiteness")
        _expect(set(wit) == {"weight", "ray", "path", "entry"}, "witness keys")
        i, j = wit["entry"]
        _expect(isinstance(i, int) and isinstance(j, int) and 0 <= i < q.n and 0 <= j < q.n and i != j, "entry")
        weight = load_affine(wit["weight"], q.dim)
        _expect(_path_sum(q, wit["path"], i, j) == weight, "path does not carry the weight")
        ray = tuple(wit["ray"])
        _expect(ray in q.pair.boundary_rays, "ray is not a declared boundary ray")
        _expect(_dot(weight.slope, ray) > 0, "weight is bounded along the ray")
    elif verdict == "projective":
        _expect(set(wit) == {"closure", "canonical_quiver"}, "witness keys")
        if isinstance(q.pair, AffinePair):
            w = _check_family_closure(q, wit["closure"])
            for row in w:
                for f in row:
                    if f is not None:
                        _expect(all(q.pair.unbounded_ray(p) is None for p in f.pieces), "closure weight outside the carrier")
            _check_family_canonical(q, w, wit["canonical_quiver"])
        else:
            c = _check_scalar_closure(q, wit["closure"])
            _check_scalar_canonical(q, c, wit["canonical_quiver"])
    else:
        raise Rejected(f"unexpected verdict {verdict!r}")


def _closure_run(q, req):
    if isinstance(q.pair, AffinePair):
        try:
            clo = fam_ops.family_closure(q, req.cap_n)
        except Degenerate as exc:
            return "degenerate", _cycle_cert(q, exc)
        return "closure", _family_closure_cert(q, clo)
    try:
        c = kleene_closure(q)
    except Degenerate as exc:
        return "degenerate", _cycle_cert(q, exc)
    return "closure", _scalar_closure_cert(q, c)


def _closure_verify(q, verdict, wit, req):
    if verdict == "degenerate":
        _check_cycle(q, wit)
    elif verdict == "closure":
        if isinstance(q.pair, AffinePair):
            _check_family_closure(q, wit)
        else:
            _check_scalar_closure(q, wit)
    else:
        raise Rejected("unexpected verdict")


def _polyhedron_run(q, req):
    try:
        c = kleene_closure(q)
    except Degenerate as exc:
        return "degenerate", _cycle_cert(q, exc)
    p = polyhedron_of(c)
    sl = project_diagonal(p)
    return "polyhedron", {
        "closure": _scalar_closure_cert(q, c),
        "dbm": [[dump_optional(v) for v in row] for row in p.dbm],
        "point": [dump_rational(v) for v in feasible_point(c)],
        "laterally_compact": sl.laterally_compact,
        "sl_intervals": [[dump_optional(lo), dump_optional(hi)] for lo, hi in sl.intervals],
    }


def _polyhedron_verify(q, verdict, wit, req):
    if verdict == "degenerate":
        return _check_cycle(q, wit)
    _expect(verdict == "polyhedron" and set(wit) == {"closure", "dbm", "point", "laterally_compact", "sl_intervals"}, "witness keys")
    c = _check_scalar_closure(q, wit["closure"])
    n = q.n
    dbm = [[load_optional_rational(v, "dbm") for v in r] for r in _need(wit["dbm"], list, "dbm")]
    _expect(dbm == [[None if w is None else -w for w in row] for row in c.W], "dbm is not -W")
    pt = [load_rational(v) for v in _need(wit["point"], list, "point")]
    _expect(len(pt) == n, "point length")
    for i in range(n):
        for j in range(n):
            if dbm[i][j] is not None:
                _expect(pt[i] - pt[j] <= dbm[i][j], "point violates a constraint")
    _check_greedy(c.W, {}, pt)
    _expect(wit["laterally_compact"] is all(v is not None for r in dbm for v in r), "lateral compactness flag")
    iv = _need(wit["sl_intervals"], list, "sl_intervals")
    _expect(len(iv) == max(n - 1, 0), "interval count")
    for i, (lo, hi) in enumerate(iv):
        want_lo = None if dbm[n - 1][i] is None else -dbm[n - 1][i]
        _expect(load_optional_rational(lo, "lo") == want_lo and load_optional_rational(hi, "hi") == dbm[i][n - 1], "interval")


def _separate_load(req):
    p = _need(req.payload, dict, "payload")
    q = _load_q(p.get("quiver", p), req)
    f = _load_generator(q, p.get("F"), "F")
    g = _load_generator(q, p.get("G"), "G")
    return (q, f, g), {"quiver": dump_quiver(q), "F": _dump_generator(q, f), "G": _dump_generator(q, g)}


def _separate_run(inputs, req):
    q, f, g = inputs
    if isinstance(q.pair, AffinePair):
        try:
            clo = fam_ops.family_closure(q, req.cap_n)
        except Degenerate as exc:
            return "degenerate", _cycle_cert(q, exc)
        res = fam_ops.family_separate(q, f, g, clo)
        if res is None:
            return "related", {"closure": _family_closure_cert(q, clo)}
        pt, p = res
        return "separated", {
            "q": [dump_rational(v) for v in pt],
            "point": [dump_rational(v) for v in p],
            "closure": _family_closure_cert(q, clo),
        }
    try:
        c = kleene_closure(q)
    except Degenerate as exc:
        return "degenerate", _cycle_cert(q, exc)
    p = separate(c, f, g)
    if p is None:
        i, j = f[1], g[1]
        path = [] if i == j else _least_parallel(q, closure_paths(q, c)[(i, j)])
        return "related", {"path": path}
    return "separated", {"point": [dump_rational(v) for v in p], "closure": _scalar_closure_cert(q, c)}


def _functional_ok(edges, p, f, g):
    for e in edges:
        _expect(p[e.dst] >= e.w + p[e.src], "functional is not monotone")
    (a, i), (b, j) = f, g
    _expect(b + p[j] == 0, "functional does not vanish on G")
    _expect(a + p[i] > 0, "functional is not positive on F")


def _separate_verify(inputs, verdict, wit, req):
    q, f, g = inputs
    if verdict == "degenerate":
        return _check_cycle(q, wit)
    family = isinstance(q.pair, AffinePair)
    if verdict == "separated":
        _expect(set(wit) == ({"q", "point", "closure"} if family else {"point", "closure"}), "witness keys")
        p = [load_rational(v) for v in _need(wit["point"], list, "point")]
        _expect(len(p) == q.n, "point length")
        if family:
            pt = [load_rational(v) for v in _need(wit["q"], list, "q")]
            _expect(len(pt) == q.dim and q.base.contains(pt), "base point")
            fw = _check_family_closure(q, wit["closure"])
            (a, i), (b, j) = f, g

            def related(v):
                return fw[i][j] is not None and a(v) - b(v) <= _cpa_at(fw[i][j], v)

            _expect(not related(pt), "F lies below G at the base point")
            _check_first_vertex(q.base, pt, lambda v: not related(v))
            sq = QuiverPresentation(GroupPair(Q), q.n, tuple(Edge(e.src, e.dst, e.w(pt)) for e in q.edges))
            w = [[_cpa_at(x, pt) for x in row] for row in fw]
            f, g = (a(pt), i), (b(pt), j)
        else:
            sq = q
            w = _check_scalar_closure(sq, wit["closure"]).W
        _functional_ok(sq.edges, p, f, g)
        _check_greedy(w, _separation_fixed(w, f, g), p)
    elif verdict == "related":
        (a, i), (b, j) = f, g
        if family:
            _expect(set(wit) == {"closure"}, "witness keys")
            w = _check_family_closure(q, wit["closure"])
            _expect(w[i][j] is not None and cpa_leq(_single(a - b, q.base), w[i][j]), "relation does not hold")
        else:
            _expect(set(wit) == {"path"}, "witness keys")
            total = _path_sum(q, wit["path"], i, j)
            _expect(a - b <= (Fraction(0) if total is None else total), "path is too light")
    else:
        raise Rejected("unexpected verdict")


def _fiber_load(req):
    p = _need(req.payload, dict, "payload")
    fam = _load_q(p.get("family", p), req, family=True)
    pt = _load_point(p.get("q"), fam.dim, "q")
    _expect_input(fam.base.contains(pt), "q lies outside the base")
    return (fam, pt), {"family": dump_quiver(fam), "q": [dump_rational(v) for v in pt]}


def _fiber_run(inputs, req):
    fam, pt = inputs
    fq = fam_ops.fiber_quiver(fam, pt)
    edges = dump_edges(fq.pair, fq.edges)
    try:
        c = kleene_closure(fq)
    except Degenerate as exc:
        return "degenerate", {"edges": edges, **_cycle_cert(fq, exc)}
    return "fiber", {
        "edges": edges,
        "closure": _scalar_closure_cert(fq, c),
        "dbm": [[dump_optional(v) for v in row] for row in polyhedron_of(c).dbm],
    }


def _fiber_verify(inputs, verdict, wit, req):
    fam, pt = inputs
    _expect(isinstance(wit, dict) and "edges" in wit, "witness keys")
    pair = GroupPair(Q)
    edges = _load_edges(pair, fam.n, wit["edges"])
    fq = QuiverPresentation(pair, fam.n, tuple(Edge(e.src, e.dst, e.w(pt)) for e in fam.edges))
    _expect(edges == fq.edges, "edges are not the family edges evaluated at q")
    rest = {k: v for k, v in wit.items() if k != "edges"}
    if verdict == "degenerate":
        return _check_cycle(fq, rest)
    _expect(verdict == "fiber" and set(rest) == {"closure", "dbm"}, "witness keys")
    c = _check_scalar_closure(fq, rest["closure"])
    dbm = [[load_optional_rational(v, "dbm") for v in r] for r in _need(rest["dbm"], list, "dbm")]
    _expect(dbm == [[None if w is None else -w for w in row] for row in c.W], "dbm is not -W")


def _hom_load(req):
    p = _need(req.payload, dict, "payload")
    src = _load_q(p.get("source"), req)
    tgt = _load_q(p.get("target"), req)
    _expect_input(src.pair == tgt.pair, "source and target must share a pair")
    assign = _need(p.get("assignment"), list, "assignment")
    _expect_input(len(assign) == src.n, "one image per source vertex is required")
    imgs = [[_load_generator(tgt, g, "assignment") for g in _need(row, list, "assignment")] for row in assign]
    norm = {
        "source": dump_quiver(src),
        "target": dump_quiver(tgt),
        "assignment": [[_dump_generator(tgt, g) for g in row] for row in imgs],
    }
    return (src, tgt, imgs), norm


def _hom_run(inputs, req):
    src, tgt, imgs = inputs
    family = isinstance(src.pair, AffinePair)
    for side, q in (("source", src), ("target", tgt)):
        try:
            fam_ops.family_closure(q, req.cap_n) if family else kleene_closure(q)
        except Degenerate as exc:
            return "degenerate", {"side": side, **_cycle_cert(q, exc)}
    if family:
        v = fam_ops.vertical_hom_check(src, tgt, imgs)
        if v.ok:
            return "hom", {"target": _family_closure_cert(tgt, v.witness["closure"])}
        return "not_hom", {
            "edge": v.witness["edge"],
            "index": v.witness["index"],
            "point": [dump_rational(x) for x in v.witness["point"]],
            "target": _family_closure_cert(tgt, fam_ops.family_closure(tgt, req.cap_n)),
        }
    v = check_module_hom(src, tgt, imgs)
    cert = _scalar_closure_cert(tgt, v.witness["closure"])
    if v.ok:
        return "hom", {"target": cert}
    return "not_hom", {"target": cert, "edge": v.witness["edge"], "index": v.witness["index"]}


def _hom_verify(inputs, verdict, wit, req):
    src, tgt, imgs = inputs
    family = isinstance(src.pair, AffinePair)
    _expect(isinstance(wit, dict), "witness must be an object")
    if verdict == "degenerate":
        side = wit.get("side")
        _expect(side in ("source", "target"), "side")
        return _check_cycle(src if side == "source" else tgt, {k: v for k, v in wit.items() if k != "side"})
    if verdict == "hom":
        _expect(set(wit) == {"target"}, "witness keys")
        if family:
            w = _check_family_closure(tgt, wit["target"])
            for e in src.edges:
                for a, v in imgs[e.src]:
                    bound = CPAFunction.bottom(tgt.base)
                    for b, j in imgs[e.dst]:
                        if w[v][j] is not None:
                            bound = cpa_join(bound, cpa_add(_single(b, tgt.base), w[v][j]))
                    _expect(cpa_leq(_single(a + e.w, tgt.base), bound), "an edge relation fails")
        else:
            c = _check_scalar_closure(tgt, wit["target"])
            for e in src.edges:
                for a, v in imgs[e.src]:
                    _expect(
                        any(c.W[v][j] is not None and a + e.w - b <= c.W[v][j] for b, j in imgs[e.dst]),
                        "an edge relation fails",
                    )
        return
    _expect(verdict == "not_hom", "unexpected verdict")
    k, idx = wit.get("edge"), wit.get("index")
    _expect(isinstance(k, int) and 0 <= k < len(src.edges), "edge index")
    e = src.edges[k]
    _expect(isinstance(idx, int) and 0 <= idx < len(imgs[e.src]), "generator index")
    earlier = [(x, m) for x in range(k) for m in range(len(imgs[src.edges[x].src]))] + [(k, m) for m in range(idx)]
    if family:
        _expect(set(wit) == {"edge", "index", "point", "target"}, "witness keys")
        w = _check_family_closure(tgt, wit["target"])

        def bound(x, m):
            a, v = imgs[src.edges[x].src][m]
            acc = CPAFunction.bottom(tgt.base)
            for b, j in imgs[src.edges[x].dst]:
                if w[v][j] is not None:
                    acc = cpa_join(acc, cpa_add(_single(b, tgt.base), w[v][j]))
            return _single(a + src.edges[x].w, tgt.base), acc

        for x, m in earlier:
            _expect(cpa_leq(*bound(x, m)), "an earlier edge relation already fails")
        pt = [load_rational(x) for x in _need(wit["point"], list, "point")]
        _expect(len(pt) == tgt.dim and tgt.base.contains(pt), "base point")
        gen, acc = bound(k, idx)

        def fails(q):
            return acc.is_bottom or cpa_eval(gen, q) > cpa_eval(acc, q)

        _expect(fails(pt), "the generator is below an image at the point")
        _check_first_vertex(tgt.base, pt, fails)
    else:
        _expect(set(wit) == {"target", "edge", "index"}, "witness keys")
        c = _check_scalar_closure(tgt, wit["target"])

        def holds(x, m):
            a, v = imgs[src.edges[x].src][m]
            return any(
                c.W[v][j] is not None and a + src.edges[x].w - b <= c.W[v][j] for b, j in imgs[src.edges[x].dst]
            )

        _expect(all(holds(x, m) for x, m in earlier), "an earlier edge relation already fails")
        _expect(not holds(k, idx), "the generator is below an image")


def _dual_run(q, req):
    try:
        d = order_dual(q)
        c = kleene_closure(q)
    except Degenerate as exc:
        return "degenerate", _cycle_cert(q, exc)
    return "dual", {"edges": dump_edges(q.pair, d.edges), "closure": _scalar_closure_cert(q, c)}


def _dual_verify(q, verdict, wit, req):
    if verdict == "degenerate":
        return _check_cycle(q, wit)
    _expect(verdict == "dual" and set(wit) == {"edges", "closure"}, "witness keys")
    edges = _load_edges(q.pair, q.n, wit["edges"])
    _expect([(e.src, e.dst, e.w) for e in edges] == [(e.dst, e.src, e.w) for e in q.edges], "edges are not reversed")
    _check_scalar_closure(q, wit["closure"])


_CPA_OPS = ("reduce", "join", "add", "leq", "eval")


def _cpa_load(req):
    p = _need(req.payload, dict, "payload")
    base = load_polytope(p.get("base"))
    _expect_input(base.is_full_dimensional, "the base must be full-dimensional")
    op = p.get("op")
    _expect_input(op in _CPA_OPS, f"op must be one of {', '.join(_CPA_OPS)}")
    f = load_cpa(p.get("f"), base, "f", reduce=False)
    norm = {"base": dump_polytope(base), "op": op, "f": dump_cpa(f)}
    g = pt = None
    if op in ("join", "add", "leq"):
        g = load_cpa(p.get("g"), base, "g", reduce=False)
        norm["g"] = dump_cpa(g)
    if op == "eval":
        pt = _load_point(p.get("q"), base.dim, "q")
        _expect_input(base.contains(pt), "q lies outside the base")
        norm["q"] = [dump_rational(v) for v in pt]
    return (base, op, f, g, pt), norm


def _strict_witness(base, p, others):
    """A point where ``p`` beats every function in ``others``; prefers vertices."""
    for v in base.vertices:
        if all(p(v) > h(v) for h in others):
            return v
    q = _strict_point(base, p, others)
    assert q is not None, "an essential piece has no strict point"
    return q


def _cpa_sources(base, op, f, g) -> set:
    if op == "reduce":
        return set(f.pieces)
    if op == "join":
        return set(f.pieces) | set(g.pieces)
    return {a + b for a in f.pieces for b in g.pieces}


def _cpa_run(inputs, req):
    base, op, f, g, pt = inputs
    if op == "eval":
        return "value", {"value": dump_optional(cpa_eval(f, pt))}
    if op == "leq":
        q = cpa_leq_witness(f, g)
        if q is None:
            return "leq", {}
        return "not_leq", {"point": [dump_rational(v) for v in q]}
    res = CPAFunction.of(_cpa_sources(base, op, f, g), base)
    pieces = res.sorted_pieces()
    strict = []
    for p in pieces:
        others = [h for h in pieces if h != p]
        strict.append([dump_rational(v) for v in _strict_witness(base, p, others)])
    return "cpa", {"result": dump_cpa(res), "strict_points": strict}


def _cpa_verify(inputs, verdict, wit, req):
    base, op, f, g, pt = inputs
    _expect(isinstance(wit, dict), "witness must be an object")
    if op == "eval":
        _expect(verdict == "value" and set(wit) == {"value"}, "witness keys")
        want = None if f.is_bottom else max(p(pt) for p in f.pieces)
        _expect(load_optional_rational(wit["value"], "value") == want, "value mismatch")
        return
    if op == "leq":
        if verdict == "leq":
            _expect(wit == {}, "witness keys")
            _expect(cpa_leq(f, g), "f is not below g")
        else:
            _expect(verdict == "not_leq" and set(wit) == {"point"}, "witness keys")
            q = [load_rational(v) for v in _need(wit["point"], list, "point")]
            _expect(len(q) == base.dim and base.contains(q), "point outside the base")
            _expect(not f.is_bottom, "bottom is below everything")
            fv = max(p(q) for p in f.pieces)
            _expect(g.is_bottom or fv > max(p(q) for p in g.pieces), "f does not exceed g at the point")
            _check_first_vertex(base, q, lambda v: g.is_bottom or max(p(v) for p in f.pieces) > max(p(v) for p in g.pieces))
        return
    _expect(verdict == "cpa" and set(wit) == {"result", "strict_points"}, "witness keys")
    pieces = [load_affine(p, base.dim) for p in _need(wit["result"], list, "result")]
    _expect(pieces == sorted(set(pieces)), "result pieces must be sorted and distinct")
    sources = _cpa_sources(base, op, f, g)
    _expect(set(pieces) <= sources, "result has a piece not among the inputs")
    pts = _need(wit["strict_points"], list, "strict_points")
    _expect(len(pts) == len(pieces), "one strict point per piece")
    for p, raw in zip(pieces, pts):
        q = [load_rational(v) for v in _need(raw, list, "strict point")]
        _expect(len(q) == base.dim and base.contains(q), "strict point outside the base")
        others = [h for h in pieces if h != p]
        _expect(all(p(q) > h(q) for h in others), "piece is not strictly largest at its point")
        first = next((v for v in base.vertices if all(p(v) > h(v) for h in others)), None)
        _expect(first is None or tuple(q) == first, "strict point must be the first vertex that works")
    res = CPAFunction(frozenset(pieces), base)
    for s in sources:
        _expect(cpa_leq(_single(s, base), res), "an input piece exceeds the result")


def _verify_load(req):
    p = _need(req.payload, dict, "payload")
    cert = Certificate.from_json(p.get("certificate"))
    inner = Request.from_json(p.get("request"))
    return (cert, inner), {"certificate": cert.to_json(), "request": inner.to_json()}


def _verify_run(inputs, req):
    cert, inner = inputs
    return ("verified" if verify(cert, inner) else "rejected"), {}


def _verify_verify(inputs, verdict, wit, req):
    cert, inner = inputs
    _expect(wit == {}, "witness keys")
    _expect(verdict == ("verified" if verify(cert, inner) else "rejected"), "verdict mismatch")


Loader = Callable[[Request], tuple[Any, dict]]

COMMANDS: dict[str, tuple[Loader, Callable, Callable]] = {
    "classify-semilattice": (_sl_load, _sl_run, _sl_verify),
    "classify-quiver": (_quiver_load, _classify_run, _classify_verify),
    "closure": (_quiver_load, _closure_run, _closure_verify),
    "polyhedron": (lambda r: _quiver_load(r, family=False), _polyhedron_run, _polyhedron_verify),
    "separate": (_separate_load, _separate_run, _separate_verify),
    "fiber": (_fiber_load, _fiber_run, _fiber_verify),
    "family-check": (lambda r: _quiver_load(r, family=True), _classify_run, _classify_verify),
    "hom-check": (_hom_load, _hom_run, _hom_verify),
    "dualize": (lambda r: _quiver_load(r, family=False), _dual_run, _dual_verify),
    "cpa": (_cpa_load, _cpa_run, _cpa_verify),
    "verify": (_verify_load, _verify_run, _verify_verify),
}


def _replay(req: Request, normalized: dict) -> dict:
    return {"command": req.command, "input": normalized}


def run(req: Request) -> Certificate:
    """Answer a request.  Raises :class:`MalformedInput` or ``SizeError`` on bad input."""
    if req.command not in COMMANDS:
        raise MalformedInput(f"unknown command {req.command!r}")
    loader, runner, _ = COMMANDS[req.command]
    try:
        inputs, normalized = loader(req)
    except (MalformedInput, SizeError):
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise MalformedInput(str(exc)) from exc
    verdict, witness = runner(inputs, req)
    # round-trip through JSON so the certificate holds plain data only
    witness = json.loads(json.dumps(witness, sort_keys=True))
    return Certificate(verdict, witness, _replay(req, normalized))


def verify(cert: Certificate, req: Request) -> bool:
    """Re-check a certificate against the request it answers; never raises."""
    try:
        if req.command not in COMMANDS:
            return False
        loader, _, checker = COMMANDS[req.command]
        inputs, normalized = loader(req)
        if cert.replay != json.loads(json.dumps(_replay(req, normalized), sort_keys=True)):
            return False
        if not isinstance(cert.verdict, str) or not isinstance(cert.witness, dict):
            return False
        checker(inputs, cert.verdict, cert.witness, req)
        return True
    except Exception:
        return False

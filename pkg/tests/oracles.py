"""Independent reference computations used by the tests.

Nothing here imports the algorithms under test; each oracle is a slow,
obviously-correct enumeration or an external solver.
"""

from __future__ import annotations

import random
from fractions import Fraction
from itertools import permutations, product


# -- quivers -------------------------------------------------------------------


def brute_closure(n, edges):
    """Max weight over simple paths (None if none), and the max simple-cycle weight.

    ``edges`` are ``(src, dst, w)`` triples.  Paths are enumerated as vertex
    sequences, taking the heaviest parallel edge between consecutive vertices.
    """
    best_edge = {}
    for s, d, w in edges:
        if (s, d) not in best_edge or w > best_edge[(s, d)]:
            best_edge[(s, d)] = w
    W = [[Fraction(0) if i == j else None for j in range(n)] for i in range(n)]
    max_cycle = None
    verts = range(n)
    for length in range(1, n + 1):
        for seq in permutations(verts, length):
            total = Fraction(0)
            ok = True
            for a, b in zip(seq, seq[1:]):
                if (a, b) not in best_edge:
                    ok = False
                    break
                total += best_edge[(a, b)]
            if not ok:
                continue
            i, j = seq[0], seq[-1]
            if length > 1 and (W[i][j] is None or total > W[i][j]):
                W[i][j] = total
            if (j, i) in best_edge and (length > 1 or (i, i) in best_edge):
                cyc = total + best_edge[(j, i)]
                if max_cycle is None or cyc > max_cycle:
                    max_cycle = cyc
    return W, max_cycle


def random_quiver(rng: random.Random, max_n=5, lo=-10, hi=10, density=None):
    n = rng.randint(1, max_n)
    p = density if density is not None else rng.choice([0.2, 0.35, 0.5])
    edges = []
    for i in range(n):
        for j in range(n):
            if i != j and rng.random() < p:
                edges.append((i, j, Fraction(rng.randint(lo, hi))))
    if n > 1 and rng.random() < 0.2:
        i, j = rng.sample(range(n), 2)
        edges.append((i, j, Fraction(rng.randint(lo, hi))))
    return n, edges


def monotone_ok(n, edges, p):
    """``p`` is a monotone functional: ``p_dst >= w + p_src`` along every edge."""
    return all(p[d] >= w + p[s] for s, d, w in edges)


# -- lattices ------------------------------------------------------------------


def _transitive(rel, n):
    return all(not (rel[a][b] and rel[b][c]) or rel[a][c] for a in range(n) for b in range(n) for c in range(n))


def lattices(n):
    """All lattices with ``n`` elements up to isomorphism, as ``<=`` matrices.

    Elements are labelled naturally (``i <= j`` implies ``i <= j`` as integers)
    with 0 the bottom and ``n-1`` the top; isomorphism classes are separated by
    a canonical form over all relabellings.
    """
    if n == 1:
        return [[[True]]]
    mids = list(range(1, n - 1))
    pairs = [(a, b) for a in mids for b in mids if a < b]
    seen = {}
    for bits in product([False, True], repeat=len(pairs)):
        rel = [[i == j or i == 0 or j == n - 1 for j in range(n)] for i in range(n)]
        for (a, b), on in zip(pairs, bits):
            rel[a][b] = on
        if not _transitive(rel, n):
            continue
        if not _has_joins(rel, n):
            continue
        key = _canonical(rel, n)
        seen.setdefault(key, rel)
    return list(seen.values())


def _has_joins(rel, n):
    for x in range(n):
        for y in range(n):
            ubs = [z for z in range(n) if rel[x][z] and rel[y][z]]
            least = [z for z in ubs if all(rel[z][u] for u in ubs)]
            if len(least) != 1:
                return False
    return True


def _canonical(rel, n):
    best = None
    for perm in permutations(range(n)):
        key = tuple(rel[perm[i]][perm[j]] for i in range(n) for j in range(n))
        if best is None or key < best:
            best = key
    return best


def brute_hom_count(join1, bot1, join2, bot2):
    """Number of bottom- and join-preserving maps between two finite semilattices.

    Backtracking over elements in an order compatible with ``<=`` so that each
    join constraint is tested as soon as its three values are assigned.
    """
    n1, n2 = len(join1), len(join2)
    leq1 = lambda a, b: join1[a][b] == b
    order = sorted(range(n1), key=lambda x: sum(leq1(y, x) for y in range(n1)))
    f = [None] * n1
    count = 0

    def rec(k):
        nonlocal count
        if k == n1:
            count += 1
            return
        x = order[k]
        choices = [bot2] if x == bot1 else range(n2)
        for v in choices:
            f[x] = v
            ok = True
            for y in range(n1):
                if f[y] is None:
                    continue
                z = join1[x][y]
                if f[z] is not None and f[z] != join2[v][f[y]]:
                    ok = False
                    break
            if ok:
                for y in range(n1):
                    for w in range(n1):
                        if f[y] is not None and f[w] is not None and join1[y][w] == x and join2[f[y]][f[w]] != v:
                            ok = False
                            break
                    if not ok:
                        break
            if ok:
                rec(k + 1)
            f[x] = None

    rec(0)
    return count


def small_posets(max_n=3):
    """All posets on at most ``max_n`` points up to isomorphism, as ``<=`` matrices."""
    out = []
    for n in range(max_n + 1):
        seen = set()
        pairs = [(a, b) for a in range(n) for b in range(n) if a < b]
        for bits in product([False, True], repeat=len(pairs)):
            rel = [[i == j for j in range(n)] for i in range(n)]
            for (a, b), on in zip(pairs, bits):
                rel[a][b] = on
            if not _transitive(rel, n):
                continue
            key = _canonical(rel, n) if n else ()
            if key not in seen:
                seen.add(key)
                out.append(rel)
    return out


def brute_lower_sets(rel):
    n = len(rel)
    out = 0
    for bits in product([False, True], repeat=n):
        if all(not bits[y] or all(bits[x] for x in range(n) if rel[x][y]) for y in range(n)):
            out += 1
    return out


# -- affine and CPA ------------------------------------------------------------


def grid_points(vertices, steps=6):
    """Rational points in the convex hull of ``vertices`` (barycentric grid)."""
    pts = set()
    k = len(vertices)
    for bits in product(range(steps + 1), repeat=k):
        if sum(bits) != steps:
            continue
        pts.add(tuple(sum(Fraction(b, steps) * v[i] for b, v in zip(bits, vertices)) for i in range(len(vertices[0]))))
    return sorted(pts)


def cpa_value(pieces, x):
    return max(p(x) for p in pieces) if pieces else None

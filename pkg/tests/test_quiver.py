import random
from fractions import Fraction
from itertools import product

import pytest
from hypothesis import given, settings, strategies as st

from oracles import brute_closure, random_quiver
from tropmod.ordered_algebra import Z, GroupPair
from tropmod.quiver import (
    ClosureMatrix,
    Degenerate,
    Edge,
    QuiverPresentation,
    canonical_quiver,
    check_module_hom,
    closure_paths,
    ideal_act,
    ideal_join,
    ideal_leq,
    is_nondegenerate,
    is_projective_pomod,
    kleene_closure,
    leq_elements,
    make_element,
    order_dual,
)

ZP = GroupPair(Z)
F = Fraction


def quiver(n, edges, pair=ZP):
    return QuiverPresentation(pair, n, tuple(Edge(s, d, F(w)) for s, d, w in edges))


def test_closure_examples():
    c = kleene_closure(quiver(2, [(0, 1, 3), (1, 0, -5)]))
    assert c.W == ((0, 3), (-5, 0))
    with pytest.raises(Degenerate) as exc:
        kleene_closure(quiver(2, [(0, 1, 3), (1, 0, -2)]))
    assert exc.value.weight == 1 and sorted(exc.value.cycle) == [0, 1]
    assert kleene_closure(quiver(3, [])) == ClosureMatrix.identity(3)


def test_nondegeneracy_examples():
    assert is_nondegenerate(quiver(2, [(0, 1, 3), (1, 0, -5)])).ok
    v = is_nondegenerate(quiver(2, [(0, 1, 3), (1, 0, -2)]))
    assert not v.ok and v.witness["weight"] == 1
    assert is_nondegenerate(quiver(1, [])).ok


def test_trivial_loops_dropped():
    q = quiver(2, [(0, 0, -1), (0, 0, 0), (1, 1, 2)])
    assert q.edges == (Edge(1, 1, F(2)),)
    assert not is_nondegenerate(q).ok


def test_leq_examples():
    c = kleene_closure(quiver(2, [(0, 1, 3)]))
    assert leq_elements(c, (0, 0), (0, 1))
    assert not leq_elements(c, (0, 1), (0, 0))
    assert leq_elements(c, (5, 1), (5, 1))
    assert ideal_leq(c, make_element(c, [(0, 0)]), make_element(c, [(1, 0)]))
    assert ideal_leq(c, make_element(c, [(0, 0), (0, 1)]), make_element(c, [(0, 1)]))
    assert not ideal_leq(c, make_element(c, [(0, 1)]), make_element(c, [(0, 0)]))


def test_canonical_examples():
    c = kleene_closure(quiver(3, [(0, 1, 3), (1, 2, 1), (0, 2, 4)]))
    assert {(e.src, e.dst, e.w) for e in canonical_quiver(c).edges} == {(0, 1, 3), (1, 2, 1)}
    c = kleene_closure(quiver(3, [(0, 1, 3), (1, 2, 1), (0, 2, 5)]))
    assert {(e.src, e.dst, e.w) for e in canonical_quiver(c).edges} == {(0, 1, 3), (1, 2, 1), (0, 2, 5)}
    assert canonical_quiver(ClosureMatrix.identity(4)).edges == ()


def test_dual_examples():
    d = order_dual(quiver(2, [(0, 1, 3)]))
    assert d.edges == (Edge(1, 0, F(3)),)
    assert order_dual(quiver(2, [])).edges == ()
    with pytest.raises(Degenerate):
        order_dual(quiver(2, [(0, 1, 3), (1, 0, -2)]))


def test_projective_pomod_examples():
    v = is_projective_pomod(quiver(2, [(0, 1, 3), (1, 0, -5)]))
    assert v.ok and v.verdict == "projective"
    assert kleene_closure(v.witness["canonical_quiver"]) == v.witness["closure"]
    v = is_projective_pomod(quiver(2, [(0, 1, 3), (1, 0, -2)]))
    assert not v.ok and v.verdict == "degenerate"


def test_module_hom_examples():
    q = quiver(2, [(0, 1, 3), (1, 0, -5)])
    assert check_module_hom(q, q, {0: [(0, 0)], 1: [(0, 1)]}).ok
    assert check_module_hom(quiver(2, []), quiver(1, []), {0: [(0, 0)], 1: [(0, 0)]}).ok
    v = check_module_hom(quiver(2, [(0, 1, 3)]), quiver(1, []), {0: [(0, 0)], 1: [(0, 0)]})
    assert not v.ok and v.witness["edge"] == 0 and v.witness["generator"] == (3, 0)


def _triples(edges):
    return [(e.src, e.dst, e.w) for e in edges]


@pytest.mark.parametrize("seed", range(60))
def test_closure_against_brute_force(seed):
    rng = random.Random(seed)
    n, edges = random_quiver(rng)
    q = quiver(n, edges)
    W, cyc = brute_closure(n, _triples(q.edges))
    if cyc is not None and cyc > 0:
        with pytest.raises(Degenerate) as exc:
            kleene_closure(q)
        assert exc.value.weight > 0 and q.path_weight(exc.value.cycle) == exc.value.weight
        assert q.edges[exc.value.cycle[0]].src == q.edges[exc.value.cycle[-1]].dst
        return
    c = kleene_closure(q)
    assert [list(r) for r in c.W] == W
    for (i, j), path in closure_paths(q, c).items():
        if i != j:
            assert q.path_weight(path) == c.W[i][j]


def _nondegenerate_closures(count, max_n=5, start=0):
    rng = random.Random(start)
    out = []
    while len(out) < count:
        n, edges = random_quiver(rng, max_n=max_n)
        q = quiver(n, edges)
        try:
            out.append((q, kleene_closure(q)))
        except Degenerate:
            pass
    return out


def test_closure_laws():
    for q, c in _nondegenerate_closures(150):
        n = c.n
        for i, j, k in product(range(n), repeat=3):
            a, b = c.W[i][j], c.W[j][k]
            if a is not None and b is not None:
                assert c.W[i][k] is not None and c.W[i][k] >= a + b
        for i, j in product(range(n), repeat=2):
            if c.W[i][j] is not None and c.W[j][i] is not None:
                assert c.W[i][j] + c.W[j][i] <= 0
        for e in q.edges:
            assert c.W[e.src][e.dst] >= e.w


def test_canonical_round_trip_and_minimality():
    for q, c in _nondegenerate_closures(250, max_n=4, start=99):
        can = canonical_quiver(c)
        assert kleene_closure(can) == c
        for k in range(len(can.edges)):
            fewer = QuiverPresentation(can.pair, can.n, can.edges[:k] + can.edges[k + 1:])
            assert kleene_closure(fewer) != c


def test_tight_cycles_are_tied_up():
    # 0 and 1 are mutually shifted copies: W(0,1) + W(1,0) = 0
    c = kleene_closure(quiver(3, [(0, 1, 2), (1, 0, -2), (1, 2, 1)]))
    can = canonical_quiver(c)
    assert kleene_closure(can) == c
    assert make_element(c, [(0, 1)]) == make_element(c, [(2, 0)])


def test_dual_is_transpose_and_involution():
    for q, c in _nondegenerate_closures(100, start=5):
        d = order_dual(q)
        cd = kleene_closure(d)
        W, _ = brute_closure(q.n, _triples(d.edges))
        assert [list(r) for r in cd.W] == W
        assert cd == c.transpose()
        assert kleene_closure(order_dual(d)) == c


def _random_element(rng, n):
    return [(F(rng.randint(-4, 4)), rng.randrange(n)) for _ in range(rng.randint(1, 4))]


def test_element_equality_is_structural():
    rng = random.Random(17)
    for q, c in _nondegenerate_closures(60, max_n=4, start=40):
        for _ in range(15):
            f, g = make_element(c, _random_element(rng, c.n)), make_element(c, _random_element(rng, c.n))
            same = ideal_leq(c, f, g) and ideal_leq(c, g, f)
            assert same == (f == g)
            j = ideal_join(c, f, g)
            assert ideal_leq(c, f, j) and ideal_leq(c, g, j)
            assert ideal_act(c, 0, f) == f
            assert ideal_leq(c, ideal_act(c, -1, f), f)


@settings(max_examples=80, deadline=None)
@given(st.integers(1, 4).flatmap(lambda n: st.tuples(
    st.just(n),
    st.lists(st.tuples(st.integers(0, n - 1), st.integers(0, n - 1), st.integers(-6, 6)), max_size=6),
)))
def test_identity_assignment_is_hom(data):
    n, edges = data
    q = quiver(n, edges)
    if not is_nondegenerate(q).ok:
        return
    assert check_module_hom(q, q, {i: [(0, i)] for i in range(n)}).ok

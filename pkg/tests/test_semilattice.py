import random
from itertools import product

import pytest

from oracles import brute_hom_count, brute_lower_sets, lattices, small_posets
from tropmod.semilattice import (
    FinBModule,
    FinitePoset,
    SizeError,
    distributivity_oracle,
    free_map,
    free_module_on_poset,
    hom_module,
    irredundant_decomposition,
    is_free,
    is_projective,
    lower_sets,
    primitives,
)


def labelled(mod):
    return {frozenset(l.members): k for k, l in enumerate(mod.labels)}


def test_free_module_examples():
    assert free_module_on_poset(FinitePoset.antichain(2)).n == 4
    chain = free_module_on_poset(FinitePoset.chain(2))
    assert chain.n == 3
    assert sorted(map(sorted, labelled(chain))) == [[], [0], [0, 1]]
    assert free_module_on_poset(FinitePoset.antichain(0)).n == 1


def test_primitives_examples():
    ps = FinBModule.powerset(2)
    assert primitives(ps) == {1, 2}
    assert primitives(FinBModule.chain(3)) == {1, 2}
    assert primitives(FinBModule.chain(1)) == frozenset()


def test_decomposition_examples():
    ps = FinBModule.powerset(2)
    d = irredundant_decomposition(ps, 3)
    assert d.factors == {1, 2} and d.unique
    m3 = FinBModule.m3()
    d = irredundant_decomposition(m3, 4)
    assert d.factors == {1, 2, 3} and not d.unique
    assert {frozenset({1, 2}), frozenset({1, 3}), frozenset({2, 3})} <= set(d.alternatives)
    assert irredundant_decomposition(m3, 2).factors == {2}


def test_is_free_examples():
    assert is_free(FinBModule.powerset(2)).ok
    v = is_free(FinBModule.chain(3))
    assert not v.ok
    a, b = v.witness["collision"]
    assert FinBModule.chain(3).join_all(a) == FinBModule.chain(3).join_all(b) == 2
    assert is_free(FinBModule.chain(1)).ok


def test_is_projective_examples():
    assert is_projective(free_module_on_poset(FinitePoset.chain(2))).ok
    assert not is_projective(FinBModule.m3()).ok
    assert is_projective(FinBModule.powerset(3)).ok


def test_distributivity_examples():
    assert distributivity_oracle(FinBModule.powerset(3))
    assert not distributivity_oracle(FinBModule.m3())
    assert not distributivity_oracle(FinBModule.n5())


def test_hom_module_examples():
    c2 = FinitePoset.chain(2)
    h = hom_module(c2, c2)
    assert h.module.n == 6
    three = FinBModule.chain(3)
    assert brute_hom_count(three.join, 0, three.join, 0) == 6
    assert hom_module(FinitePoset.antichain(0), c2).module.n == 1
    assert hom_module(FinitePoset.chain(1), FinitePoset.chain(1)).module.n == 2


def test_hom_elements_act_as_homomorphisms():
    c2, a2 = FinitePoset.chain(2), FinitePoset.antichain(2)
    h = hom_module(c2, a2)
    src = free_module_on_poset(c2)
    tgt = free_module_on_poset(a2)
    maps = {tuple(h.as_index_map(e)) for e in range(h.module.n)}
    assert len(maps) == h.module.n
    assert all(src.is_hom_to(tgt, m) for m in maps)
    # join of correspondences is the pointwise join of maps
    for e, f in product(range(h.module.n), repeat=2):
        ef = h.module.join[e][f]
        assert h.as_index_map(ef) == [tgt.join[x][y] for x, y in zip(h.as_index_map(e), h.as_index_map(f))]


def test_invalid_tables_rejected():
    with pytest.raises(ValueError):
        FinBModule(2, ((0, 1), (0, 1)), 0)
    with pytest.raises(ValueError):
        FinitePoset.from_relations(2, [(0, 1), (1, 0)])


def test_size_guard():
    with pytest.raises(SizeError):
        lower_sets(FinitePoset.antichain(8), cap=100)
    with pytest.raises(SizeError):
        irredundant_decomposition(FinBModule.powerset(4), 0)


def _all_semilattices(max_n):
    for n in range(1, max_n + 1):
        for rel in lattices(n):
            yield FinBModule.from_order(rel)


def test_every_element_is_join_of_primitives_below():
    for mod in _all_semilattices(6):
        prims = primitives(mod)
        for x in range(mod.n):
            assert mod.join_all(p for p in prims if mod.leq(p, x)) == x


def test_free_iff_boolean_and_projective_iff_distributive():
    for mod in _all_semilattices(6):
        proj = is_projective(mod).ok
        assert proj == distributivity_oracle(mod)
        free = is_free(mod).ok
        # free modules are exactly the boolean ones: 2^|Prim| elements
        assert free == (mod.n == 2 ** len(primitives(mod)))
        if free:
            assert proj
        if mod.n <= 12:
            assert irredundant_decomposition(mod, mod.bottom).unique == proj


def test_section_over_primitives():
    for mod in _all_semilattices(6):
        v = is_projective(mod)
        if not v.ok:
            continue
        iso = v.witness["iso"]
        prims = primitives(mod)
        for x in range(mod.n):
            sigma = frozenset(p for p in prims if mod.leq(p, x))
            assert iso[x] == sigma
            if x in prims:
                assert sigma == frozenset(p for p in prims if mod.poset.leq[p][x])


def test_monotone_section_is_right_adjoint():
    from tropmod.semilattice import section_is_right_adjoint

    for rel in small_posets(3):
        poset = FinitePoset(len(rel), tuple(map(tuple, rel)))
        free = free_module_on_poset(poset)
        prims = sorted(primitives(free))
        pp = FinitePoset(len(prims), tuple(tuple(free.leq(a, b) for b in prims) for a in prims))
        dom = free_module_on_poset(pp)
        gen = lambda a: free.join_all(prims[k] for k in dom.labels[a].members)
        sec_idx = labelled(dom)
        sec = lambda b: sec_idx[frozenset(k for k, p in enumerate(prims) if free.leq(p, b))]
        assert section_is_right_adjoint(gen, sec, dom, free)
        for a, b in product(range(free.n), repeat=2):
            assert sec(free.join[a][b]) == dom.join[sec(a)][sec(b)]


def _random_poset(rng, n):
    rel = [[i == j or (i < j and rng.random() < 0.4) for j in range(n)] for i in range(n)]
    for k in range(n):
        for i in range(n):
            for j in range(n):
                if rel[i][k] and rel[k][j]:
                    rel[i][j] = True
    return FinitePoset(n, tuple(tuple(r) for r in rel))


def _random_monotone(rng, p, q):
    # greedy: assign in an order-compatible sequence, picking among values above all predecessors
    f = [None] * p.n
    for x in range(p.n):
        lows = [f[y] for y in range(x) if p.leq[y][x]]
        options = [v for v in range(q.n) if all(q.leq[u][v] for u in lows)]
        f[x] = rng.choice(options) if options else None
        if f[x] is None:
            return None
    return f


def test_free_module_functorial():
    rng = random.Random(11)
    done = 0
    while done < 40:
        p, q, r = (_random_poset(rng, rng.randint(1, 5)) for _ in range(3))
        f, g = _random_monotone(rng, p, q), _random_monotone(rng, q, r)
        if f is None or g is None:
            continue
        ident = free_map(p, p, list(range(p.n)))
        assert ident == list(range(len(ident)))
        ff, gg = free_map(p, q, f), free_map(q, r, g)
        assert free_map(p, r, [g[f[x]] for x in range(p.n)]) == [gg[k] for k in ff]
        assert free_module_on_poset(p).is_hom_to(free_module_on_poset(q), ff)
        done += 1


def test_hom_size_matches_lower_set_count():
    posets = small_posets(3)
    for r1, r2 in product(posets, repeat=2):
        p1 = FinitePoset(len(r1), tuple(map(tuple, r1)))
        p2 = FinitePoset(len(r2), tuple(map(tuple, r2)))
        prod_rel = p1.opposite().product(p2).leq
        assert hom_module(p1, p2).module.n == brute_lower_sets(prod_rel)

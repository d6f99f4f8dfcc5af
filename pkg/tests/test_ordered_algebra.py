import random
from fractions import Fraction

import pytest
import sympy
from hypothesis import given, settings, strategies as st
from sympy.solvers.simplex import UnboundedLPError, lpmax

from gen import random_affine, random_cpa, random_point, random_polytope
from oracles import cpa_value, grid_points
from tropmod.ordered_algebra import (
    Q,
    Z,
    AffineFunction,
    AffinePair,
    Bounded,
    BoundedAffinePair,
    CPAFunction,
    Group,
    GroupPair,
    GroupValue,
    RationalPolytope,
    Unbounded,
    affine_max_on,
    cpa_add,
    cpa_eval,
    cpa_join,
    cpa_leq,
    cpa_leq_witness,
    cpa_reduce,
    pair_is_integer,
)

X = AffineFunction((1,), 0)
ZERO = AffineFunction((0,), 0)
UNIT = RationalPolytope.interval(-1, 1)


def aff(slope, const=0):
    return AffineFunction(tuple(slope), Fraction(const))


def test_groups():
    assert Fraction(1, 2) in Group(2)
    assert Fraction(1, 3) not in Group(2)
    assert Fraction(7, 9) in Q
    assert Group.parse("1/4Z") == Group(4)
    assert Group.parse("Z") == Z and Group.parse("Q") == Q
    with pytest.raises(ValueError):
        GroupValue(Fraction(1, 2), Z)
    assert (GroupValue(Fraction(1, 2), Group(2)) + GroupValue(Fraction(1, 2), Group(2))).value == 1


def test_pair_is_integer_examples():
    assert pair_is_integer(GroupPair(Z), -3)
    assert not pair_is_integer(AffinePair(UNIT), X)
    assert pair_is_integer(AffinePair(UNIT), aff([1], -1))
    with pytest.raises(ValueError):
        pair_is_integer(GroupPair(Z), Fraction(1, 2))
    with pytest.raises(ValueError):
        pair_is_integer(AffinePair(UNIT), aff([1], Fraction(1, 2)))


def test_affine_max_examples():
    assert affine_max_on(UNIT, X) == Bounded(1, (1,))
    assert affine_max_on(RationalPolytope.interval(None, 0), -X) == Unbounded((-1,))
    point = RationalPolytope.interval(0, 0)
    assert affine_max_on(point, aff([0], 5)) == Bounded(5, (0,))


def test_bounded_affine_pair_carrier():
    half_line = RationalPolytope.interval(None, 0)
    compact = BoundedAffinePair(half_line, Z, ((-1,),))
    assert not compact.in_carrier(-X)
    assert compact.in_carrier(X)
    assert compact.is_integer(X)
    with pytest.raises(ValueError):
        compact.is_integer(-X)
    with pytest.raises(ValueError):
        BoundedAffinePair(half_line, Z, ((1,),))


def _lp_sup(p: RationalPolytope, c):
    xs = sympy.symbols(f"x0:{p.dim}")
    cons = [sum(n * x for n, x in zip(h.normal, xs)) <= sympy.Rational(h.rhs.numerator, h.rhs.denominator) for h in p.halfspaces]
    try:
        val, _ = lpmax(sum(ci * x for ci, x in zip(c, xs)), cons)
    except UnboundedLPError:
        return None
    return Fraction(int(sympy.fraction(val)[0]), int(sympy.fraction(val)[1]))


@pytest.mark.parametrize("seed", range(40))
def test_vertex_enumeration_matches_lp(seed):
    rng = random.Random(seed)
    p = random_polytope(rng, rng.randint(1, 3), bounded=rng.random() < 0.5)
    for v in p.vertices:
        assert p.contains(v)
        tight = [h.normal for h in p.halfspaces if h.value(v) == h.rhs]
        assert sympy.Matrix(tight).rank() == p.dim
    for r in p.rays:
        assert all(sum(n * x for n, x in zip(h.normal, r)) <= 0 for h in p.halfspaces)
    for _ in range(6):
        c = [rng.randint(-3, 3) for _ in range(p.dim)]
        m = affine_max_on(p, AffineFunction(tuple(c), Fraction(0)))
        sup = _lp_sup(p, c)
        if sup is None:
            assert isinstance(m, Unbounded)
            assert sum(a * b for a, b in zip(c, m.ray)) > 0
        else:
            assert m == Bounded(sup, m.vertex) and p.contains(m.vertex)


def test_polytope_rejections():
    with pytest.raises(ValueError):
        RationalPolytope([((1,), 0), ((-1,), -1)], dim=1)  # empty
    with pytest.raises(ValueError):
        RationalPolytope([((1, 0), 1)], dim=2)  # contains a line
    assert not RationalPolytope.interval(0, 0).is_full_dimensional
    with pytest.raises(ValueError):
        CPAFunction.of([X], RationalPolytope.interval(0, 0))


def test_affine_arithmetic_and_strings():
    f = AffineFunction((2, -1), Fraction(1, 2))
    assert str(f) == "2*X1 - X2 + 1/2"
    assert str(X) == "X"
    assert str(-X) == "-X"
    assert str(ZERO) == "0"
    assert (f - f) == AffineFunction((0, 0), 0)
    assert f((1, 1)) == Fraction(3, 2)


def test_cpa_examples():
    reduced = cpa_reduce(CPAFunction(frozenset({X, -X, ZERO}), UNIT))
    assert reduced.pieces == {X, -X}
    assert cpa_reduce(CPAFunction(frozenset({X}), UNIT)).pieces == {X}
    assert CPAFunction.of([X, aff([2])], RationalPolytope.interval(0, 1)).pieces == {aff([2])}

    pos = CPAFunction.of([X, ZERO], UNIT)
    neg = CPAFunction.of([-X, ZERO], UNIT)
    absval = CPAFunction.of([X, -X], UNIT)
    assert cpa_add(pos, neg) == absval
    assert cpa_join(pos, CPAFunction.bottom(UNIT)) == pos
    assert cpa_eval(absval, [Fraction(1, 2)]) == Fraction(1, 2)
    with pytest.raises(ValueError):
        cpa_eval(absval, [2])

    zero = CPAFunction.of([ZERO], UNIT)
    assert cpa_leq(zero, absval)
    assert not cpa_leq(zero, CPAFunction.of([X], UNIT))
    assert cpa_leq_witness(zero, CPAFunction.of([X], UNIT))[0] < 0
    assert cpa_leq(absval, absval)


def test_bottom_is_absorbing_for_add():
    bot = CPAFunction.bottom(UNIT)
    f = CPAFunction.of([X], UNIT)
    assert cpa_add(f, bot) == bot
    assert cpa_eval(bot, [0]) is None
    assert cpa_leq(bot, f) and not cpa_leq(f, bot)


@pytest.mark.parametrize("seed", range(30))
def test_reduce_is_sound_on_random_points(seed):
    rng = random.Random(1000 + seed)
    dom = random_polytope(rng, rng.randint(1, 2), bounded=rng.random() < 0.7)
    raw = random_cpa(rng, dom, reduce=False)
    red = cpa_reduce(raw)
    assert cpa_reduce(red) == red
    for _ in range(100):
        q = random_point(rng, dom)
        assert cpa_eval(raw, q) == cpa_eval(red, q)


@pytest.mark.parametrize("seed", range(20))
def test_leq_agrees_with_dense_sampling(seed):
    rng = random.Random(2000 + seed)
    dom = random_polytope(rng, rng.randint(1, 2))
    f, g = random_cpa(rng, dom), random_cpa(rng, dom)
    pts = grid_points(list(dom.vertices), steps=4)
    sampled = all(cpa_value(list(f.pieces), q) <= cpa_value(list(g.pieces), q) for q in pts)
    wit = cpa_leq_witness(f, g)
    if wit is None:
        assert sampled
    else:
        assert dom.contains(wit) and cpa_eval(f, wit) > cpa_eval(g, wit)


@settings(max_examples=60, deadline=None)
@given(st.lists(st.tuples(st.integers(-2, 2), st.integers(-3, 3)), min_size=1, max_size=6), st.randoms())
def test_canonical_form_is_order_insensitive(pieces, rnd):
    fs = [aff([s], c) for s, c in pieces]
    a = CPAFunction.of(fs, UNIT)
    rnd.shuffle(fs)
    b = cpa_reduce(CPAFunction(frozenset(fs), UNIT))
    assert a == b
    # no piece is dominated by the others
    for p in a.pieces:
        rest = CPAFunction(a.pieces - {p}, UNIT)
        if rest.pieces:
            assert not cpa_leq(CPAFunction(frozenset({p}), UNIT), rest)


def test_pair_integer_matches_affine_max():
    rng = random.Random(7)
    for _ in range(50):
        dom = random_polytope(rng, 2, bounded=False)
        f = random_affine(rng, 2)
        m = affine_max_on(dom, f)
        assert AffinePair(dom).is_integer(f) == (isinstance(m, Bounded) and m.value <= 0)
    for a in range(-3, 4):
        assert GroupPair(Z).is_integer(a) == (a <= 0)

from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from tropmod.jsonio import (
    MalformedInput,
    dump_affine,
    dump_cpa,
    dump_polytope,
    dump_quiver,
    dump_rational,
    load_affine,
    load_cpa,
    load_pair,
    load_polytope,
    load_quiver,
    load_rational,
    load_semilattice,
)
from tropmod.cpa_families import FamilyPresentation
from tropmod.ordered_algebra import AffineFunction, BoundedAffinePair, CPAFunction, RationalPolytope
from tropmod.semilattice import FinBModule


def test_rationals():
    assert load_rational(3) == 3
    assert load_rational({"num": 6, "den": 4}) == Fraction(3, 2)
    assert load_rational("-1/3") == Fraction(-1, 3)
    assert dump_rational(Fraction(3, 2)) == {"num": 3, "den": 2}
    assert dump_rational(Fraction(4)) == 4
    for bad in [0.5, True, {"num": 1}, {"num": 1, "den": 0}, "x", None]:
        with pytest.raises(MalformedInput):
            load_rational(bad)


@given(st.lists(st.integers(-3, 3), min_size=1, max_size=3), st.fractions(max_denominator=7))
def test_affine_round_trip(slope, const):
    f = AffineFunction(tuple(slope), const)
    assert load_affine(dump_affine(f), len(slope)) == f


def test_affine_parsing():
    assert load_affine("2*X1 - X2 + 1/2", 2) == AffineFunction((2, -1), Fraction(1, 2))
    assert load_affine("-X", 1) == AffineFunction((-1,), 0)
    assert load_affine({"slope": [1, 0], "const": {"num": 1, "den": 3}}, 2) == AffineFunction((1, 0), Fraction(1, 3))
    assert load_affine(0, 1) == AffineFunction((0,), 0)
    for bad in ["X3", "1/2*X", "X +", "Y", {"slope": [1]}]:
        with pytest.raises(MalformedInput):
            load_affine(bad, 2)


def test_polytopes():
    unit = RationalPolytope.interval(-1, 1)
    assert load_polytope({"interval": [-1, 1]}) == unit
    assert load_polytope(dump_polytope(unit)) == unit
    assert load_polytope({"box": [[0, 1], [0, None]]}).rays == ((0, 1),)
    with pytest.raises(MalformedInput):
        load_polytope({"interval": [1, -1]})
    with pytest.raises(MalformedInput):
        load_polytope({"box": [[None, None]]})


def test_cpa_and_pairs():
    unit = RationalPolytope.interval(-1, 1)
    f = load_cpa(["X", "-X", 0], unit)
    assert f == CPAFunction.of([AffineFunction((1,), 0), AffineFunction((-1,), 0)], unit)
    assert load_cpa(dump_cpa(f), unit) == f
    assert load_cpa([], unit).is_bottom
    pair = load_pair({"kind": "bounded_affine", "base": {"interval": [None, 0]}, "boundary_rays": [[-1]]})
    assert isinstance(pair, BoundedAffinePair)
    with pytest.raises(MalformedInput):
        load_pair({"kind": "affine", "base": {"interval": [0, 0]}})


def test_quivers():
    q = load_quiver({"n": 2, "edges": [{"src": 0, "dst": 1, "w": 3}]})
    assert load_quiver(dump_quiver(q)) == q
    fam = load_quiver({"base": {"interval": [-1, 1]}, "n": 2, "edges": [{"src": 0, "dst": 1, "w": "X"}]})
    assert isinstance(fam, FamilyPresentation)
    assert load_quiver(dump_quiver(fam)) == fam
    for bad in [
        {"n": 2, "edges": [{"src": 0, "dst": 2, "w": 1}]},
        {"n": -1, "edges": []},
        {"n": 2, "edges": [{"src": 0, "dst": 1, "w": "1/2"}]},
        {"n": 2, "edges": [{"src": 0, "dst": 1}]},
        {"edges": []},
    ]:
        with pytest.raises(MalformedInput):
            load_quiver(bad)


def test_semilattices():
    assert load_semilattice({"named": "m3"}) == FinBModule.m3()
    assert load_semilattice({"named": "chain", "k": 3}) == FinBModule.chain(3)
    assert load_semilattice({"join": [[0, 1], [1, 1]], "bottom": 0}).n == 2
    for bad in [{"join": [[0, 0], [1, 1]], "bottom": 0}, {"named": "hexagon"}, {"leq": [[True, True], [True, True]]}]:
        with pytest.raises(MalformedInput):
            load_semilattice(bad)

import json
from fractions import Fraction
from itertools import combinations
from pathlib import Path

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hermorbits.errors import DecomposableSystem, NotInSpan, RankTooSmall
from hermorbits.roots import (
    LEX,
    CartanType,
    Ordering,
    RootSystem,
    add,
    build_root_system,
    classical_roots,
    decompose,
    dot,
    from_json,
    highest_root,
    indecomposable_hull,
    is_indecomposable,
    is_root_system,
    neg,
    positive_roots,
    simple_roots,
    to_json,
)

GOLDEN = json.loads((Path(__file__).parent / "golden" / "root_data.json").read_text())
CASES = [(g["family"], g["rank"]) for g in GOLDEN]


def e(dim, *terms):
    v = [0] * dim
    for sign, i in terms:
        v[i - 1] += sign
    return tuple(v)


@pytest.mark.parametrize("family,rank", CASES)
def test_root_count_matches_oracle(family, rank):
    g = next(x for x in GOLDEN if x["family"] == family and x["rank"] == rank)
    rs = build_root_system(CartanType(family, rank))
    assert len(rs.roots) == g["root_count"]
    formula = {"A": rank * (rank + 1), "B": 2 * rank ** 2, "C": 2 * rank ** 2,
               "D": 2 * rank * (rank - 1)}[family]
    assert len(rs.roots) == formula


@pytest.mark.parametrize("family,rank", CASES)
def test_highest_root_matches_oracle(family, rank):
    g = next(x for x in GOLDEN if x["family"] == family and x["rank"] == rank)
    rs = build_root_system(CartanType(family, rank))
    assert list(decompose(highest_root(rs), rs.simple)) == g["highest_root_coefficients"]


def test_oracle_file_is_current():
    from oracles.cartan_oracle import generate
    assert generate() == GOLDEN


def test_a2_roots():
    rs = build_root_system(CartanType("A", 2))
    expected = set()
    for a, b in [(1, 2), (2, 3), (1, 3)]:
        r = e(3, (1, a), (-1, b))
        expected |= {r, neg(r)}
    assert rs.roots == expected


def test_small_counts():
    assert len(build_root_system(CartanType("B", 2)).roots) == 8
    assert len(build_root_system(CartanType("D", 4)).roots) == 24


@pytest.mark.parametrize("family,rank", [("A", 0), ("B", 1), ("C", 2), ("D", 3), ("E", 6)])
def test_rank_too_small(family, rank):
    with pytest.raises((RankTooSmall, ValueError)):
        CartanType(family, rank)


def test_positive_roots_examples():
    assert positive_roots(build_root_system(CartanType("A", 1))) == [(1, -1)]
    a2 = build_root_system(CartanType("A", 2))
    assert set(positive_roots(a2)) == {(1, -1, 0), (0, 1, -1), (1, 0, -1)}
    assert len(positive_roots(build_root_system(CartanType("C", 3)))) == 9


def test_simple_roots_examples():
    assert simple_roots(build_root_system(CartanType("A", 2))) == [(1, -1, 0), (0, 1, -1)]
    assert simple_roots(build_root_system(CartanType("B", 3))) == [
        (1, -1, 0), (0, 1, -1), (0, 0, 1)]
    assert simple_roots(build_root_system(CartanType("D", 4))) == [
        (1, -1, 0, 0), (0, 1, -1, 0), (0, 0, 1, -1), (0, 0, 1, 1)]


def test_highest_root_examples():
    a2 = build_root_system(CartanType("A", 2))
    assert highest_root(a2) == (1, 0, -1)
    assert decompose(highest_root(a2), a2.simple) == (1, 1)
    c3 = build_root_system(CartanType("C", 3))
    assert highest_root(c3) == (2, 0, 0)
    assert decompose((2, 0, 0), c3.simple) == (2, 2, 1)
    b3 = build_root_system(CartanType("B", 3))
    assert highest_root(b3) == (1, 1, 0)
    assert decompose((1, 1, 0), b3.simple) == (1, 2, 2)


def test_highest_root_rejects_decomposable():
    roots = {(1, -1, 0, 0), (-1, 1, 0, 0), (0, 0, 1, -1), (0, 0, -1, 1)}
    with pytest.raises(DecomposableSystem):
        highest_root(RootSystem(frozenset(roots)))


def test_decompose_examples():
    b3 = build_root_system(CartanType("B", 3))
    assert decompose((-1, -1, 0), b3.simple) == (-1, -2, -2)
    for i, s in enumerate(b3.simple):
        assert decompose(s, b3.simple) == tuple(int(i == j) for j in range(3))
    with pytest.raises(NotInSpan):
        decompose((1, 1, 1), build_root_system(CartanType("A", 2)).simple)


def test_is_root_system_examples():
    a2 = build_root_system(CartanType("A", 2))
    a1, a2s = a2.simple
    assert is_root_system(a2.roots, a2)
    assert is_root_system({a1, neg(a1)}, a2)
    assert not is_root_system({a1, a2s, neg(a1), neg(a2s)}, a2)


def test_is_indecomposable_examples():
    assert is_indecomposable(build_root_system(CartanType("A", 2)).roots)
    assert not is_indecomposable({(1, -1, 0, 0), (-1, 1, 0, 0), (0, 0, 1, -1), (0, 0, -1, 1)})
    assert is_indecomposable({(1, -1), (-1, 1)})


def test_indecomposable_hull_examples():
    a3 = build_root_system(CartanType("A", 3))
    assert indecomposable_hull(a3.roots, a3) == a3.roots
    s1, _, s3 = a3.simple
    hull = indecomposable_hull({s1, s3}, a3)
    assert {s1, s3} <= hull
    assert is_indecomposable(hull) and is_root_system(hull, a3)
    assert indecomposable_hull({s1}, a3) == {s1, neg(s1)}


def test_json_round_trip():
    rs = build_root_system(CartanType("D", 5))
    back = from_json(json.loads(json.dumps(to_json(rs))))
    assert back.roots == rs.roots and back.simple == rs.simple


def test_weight_ordering_needs_exact_weights():
    with pytest.raises((TypeError, ValueError)):
        Ordering("weight", (0.5, 1.0))
    Ordering("weight", (Fraction(1, 2), 1))


# -- invariants over every supported type up to rank 8 ------------------------

@pytest.mark.parametrize("family,rank", CASES)
def test_structural_invariants(family, rank):
    rs = build_root_system(CartanType(family, rank))
    R = rs.roots
    assert all(neg(r) in R for r in R)
    pos = set(rs.positive)
    assert len(pos) * 2 == len(R)
    assert all((r in pos) != (neg(r) in pos) for r in R)
    for a, b in combinations(pos, 2):
        s = add(a, b)
        if s in R:
            assert s in pos
    # simple roots: positive roots not a sum of two positive roots
    sums = {add(a, b) for a in pos for b in pos}
    assert set(rs.simple) == pos - sums
    assert len(rs.simple) == rank
    for r in R:
        coeffs = decompose(r, rs.simple)
        assert all(c >= 0 for c in coeffs) or all(c <= 0 for c in coeffs)
        assert (r in pos) == (sum(coeffs) > 0)
    hr = highest_root(rs)
    assert all(dot(hr, s) >= 0 for s in rs.simple)
    top = decompose(hr, rs.simple)
    assert all(all(c <= t for c, t in zip(decompose(r, rs.simple), top)) for r in R)


@pytest.mark.parametrize("family,rank", CASES)
def test_root_lengths(family, rank):
    lengths = {dot(r, r) for r in build_root_system(CartanType(family, rank)).roots}
    assert lengths == {"A": {2}, "B": {1, 2}, "C": {2, 4}, "D": {2}}[family]


families = st.sampled_from(["A", "B", "C", "D"])


@st.composite
def systems(draw):
    fam = draw(families)
    lo = {"A": 1, "B": 2, "C": 3, "D": 4}[fam]
    return build_root_system(CartanType(fam, draw(st.integers(lo, 6))))


@settings(max_examples=60, deadline=None)
@given(systems(), st.data())
def test_decompose_reconstructs(rs, data):
    r = data.draw(st.sampled_from(sorted(rs.roots)))
    coeffs = decompose(r, rs.simple)
    rebuilt = tuple(sum(c * s[i] for c, s in zip(coeffs, rs.simple)) for i in range(rs.dim))
    assert rebuilt == r


@settings(max_examples=60, deadline=None)
@given(systems(), st.data())
def test_hull_is_closed_and_connected(rs, data):
    seed = data.draw(st.lists(st.sampled_from(sorted(rs.roots)), min_size=1, max_size=3))
    hull = indecomposable_hull(seed, rs)
    assert set(seed) <= hull
    assert is_root_system(hull, rs) and is_indecomposable(hull)


@settings(max_examples=40, deadline=None)
@given(systems())
def test_reversed_ordering_flips_positive_cone(rs):
    rev = rs.with_ordering(Ordering("reversed"))
    assert set(rev.positive) == {neg(r) for r in rs.positive}
    assert set(rev.simple) == {neg(s) for s in rs.simple}


@settings(max_examples=40, deadline=None)
@given(systems(), st.lists(st.integers(-9, 9), min_size=8, max_size=8))
def test_weight_ordering_gives_a_base(rs, weights):
    rs2 = rs.with_ordering(Ordering("weight", tuple(weights[: rs.dim])))
    pos = set(rs2.positive)
    assert len(pos) * 2 == len(rs2.roots)
    assert len(rs2.simple) == rs2.rank
    for r in rs2.roots:
        c = decompose(r, rs2.simple)
        assert all(x >= 0 for x in c) or all(x <= 0 for x in c)


def test_lex_is_default():
    rs = build_root_system(CartanType("A", 3))
    assert rs.ordering == LEX
    assert all(next(x for x in r if x) > 0 for r in rs.positive)
    assert rs.roots == classical_roots("A", 3)

import dataclasses
import json
from pathlib import Path

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hermorbits.classify import (
    OrbitFamily,
    Pattern,
    TowerSpec,
    build_tower,
    classify_orbit,
    dynkin_components,
    grading_weight,
    infer_family,
    level_checks,
    noncompact_indices,
    noncompact_simple_roots_by_definition,
    noncompact_simple_roots_by_highest,
    phi_coefficients,
    symmetric_pair,
    tower_report,
    unique_phi_check,
)
from hermorbits.errors import BadPattern, NotNonCompact, UnrecognizedPattern
from hermorbits.roots import CartanType, Ordering, RootSystem, add, build_root_system, dot

HERE = Path(__file__).parent
ROOT_DATA = json.loads((HERE / "golden" / "root_data.json").read_text())
FAMILIES = json.loads((HERE / "golden" / "orbit_families.json").read_text())
CASES = [(g["family"], g["rank"]) for g in ROOT_DATA]
PATTERNS = [g["pattern"] for g in FAMILIES]


def rs_of(family, rank):
    return build_root_system(CartanType(family, rank))


def compatible_orderings(desc):
    """Orderings that keep B+ on one side; the third reverses lex inside k only."""
    gw = grading_weight(desc)
    dim = desc.system.dim
    anti_lex = [-(4 ** (dim - 1 - i)) for i in range(dim)]
    weights = tuple(10 ** 6 * g + p for g, p in zip(gw, anti_lex))
    return [Ordering(), Ordering("reversed"), Ordering("weight", weights)]


@pytest.mark.parametrize("family,rank", CASES)
def test_noncompact_nodes_match_oracle(family, rank):
    g = next(x for x in ROOT_DATA if x["family"] == family and x["rank"] == rank)
    rs = rs_of(family, rank)
    assert noncompact_indices(rs, "definition") == g["noncompact_nodes"]
    assert noncompact_indices(rs, "highest") == g["noncompact_nodes"]
    expected = {"A": list(range(1, rank + 1)), "B": [1], "C": [rank],
                "D": [1, rank - 1, rank]}[family]
    assert g["noncompact_nodes"] == expected


def test_noncompact_examples():
    a2 = rs_of("A", 2)
    assert noncompact_simple_roots_by_definition(a2) == list(a2.simple)
    assert noncompact_simple_roots_by_definition(rs_of("B", 3)) == [(1, -1, 0)]
    assert noncompact_simple_roots_by_definition(rs_of("C", 3)) == [(0, 0, 2)]
    d4 = rs_of("D", 4)
    assert noncompact_simple_roots_by_highest(d4) == [d4.simple[0], d4.simple[2], d4.simple[3]]
    c4 = rs_of("C", 4)
    assert noncompact_simple_roots_by_highest(c4) == [c4.simple[3]]


def test_symmetric_pair_examples():
    a3 = rs_of("A", 3)
    d = symmetric_pair(a3, a3.simple[0])
    assert d.k_type == "A2 x u(1)"
    assert len(d.set_b) == 6
    assert symmetric_pair(rs_of("B", 3), rs_of("B", 3).simple[0]).k_type == "B2 x u(1)"
    assert symmetric_pair(rs_of("C", 3), rs_of("C", 3).simple[2]).k_type == "A2 x u(1)"
    assert symmetric_pair(rs_of("D", 5), rs_of("D", 5).simple[4]).k_type == "A4 x u(1)"
    assert symmetric_pair(rs_of("D", 5), rs_of("D", 5).simple[0]).k_type == "D4 x u(1)"


def test_compact_node_rejected():
    b3 = rs_of("B", 3)
    coeffs = phi_coefficients(b3, b3.simple[1])
    assert max(abs(c) for c in coeffs.values()) == 2
    with pytest.raises(NotNonCompact):
        symmetric_pair(b3, b3.simple[1])


def test_non_simple_phi_rejected():
    a2 = rs_of("A", 2)
    with pytest.raises(NotNonCompact):
        symmetric_pair(a2, (1, 0, -1))


@pytest.mark.parametrize("family,rank", CASES)
def test_every_valid_pair_is_closed(family, rank):
    rs = rs_of(family, rank)
    R = rs.roots
    for i in noncompact_indices(rs):
        d = symmetric_pair(rs, rs.simple[i - 1])
        assert d.valid and all(d.closure_checks.values())
        assert d.set_a | d.set_b == R and not d.set_a & d.set_b
        A, B = d.set_a, d.set_b
        for x in A:
            for y in A:
                assert add(x, y) not in R or add(x, y) in A
            for y in B:
                assert add(x, y) not in R or add(x, y) in B
        for x in B:
            for y in B:
                assert add(x, y) not in R or add(x, y) in A
        assert len(d.set_b_plus) == len(d.set_b_minus)


@pytest.mark.parametrize("family,rank", CASES)
def test_coefficient_bound_iff_noncompact(family, rank):
    rs = rs_of(family, rank)
    nc = set(noncompact_indices(rs))
    for i, phi in enumerate(rs.simple, 1):
        bounded = max(abs(c) for c in phi_coefficients(rs, phi).values()) <= 1
        assert bounded == (i in nc)


@pytest.mark.parametrize("family,rank", CASES)
def test_unique_phi_over_compatible_orderings(family, rank):
    rs = rs_of(family, rank)
    for i in noncompact_indices(rs):
        d = symmetric_pair(rs, rs.simple[i - 1])
        orderings = compatible_orderings(d)
        distinct = {tuple(sorted(rs.with_ordering(o).positive)) for o in orderings}
        # A1 has only two positive systems
        assert len(distinct) == (3 if rank > 1 else 2)
        assert unique_phi_check(d, orderings)


def test_unique_phi_examples():
    a3 = rs_of("A", 3)
    d = symmetric_pair(a3, a3.simple[1])
    assert unique_phi_check(d, [Ordering()])
    assert unique_phi_check(d, [Ordering("reversed")])
    emptied = dataclasses.replace(d, set_b=frozenset(), set_b_plus=frozenset(),
                                  set_b_minus=frozenset())
    assert not unique_phi_check(emptied, [Ordering()])


def test_unique_phi_fails_for_sign_mixing_ordering():
    # positive system {e2-e1, e1-e3, e2-e3} puts B+ and B- roots both above zero
    a2 = rs_of("A", 2)
    d = symmetric_pair(a2, a2.simple[0])
    mixing = Ordering("weight", (0, 2, -1))
    assert set(a2.with_ordering(mixing).positive) == {(-1, 1, 0), (1, 0, -1), (0, 1, -1)}
    assert not unique_phi_check(d, [mixing])


def test_grading_weight_pairs_with_simple_roots():
    for fam, rank in [("A", 4), ("B", 3), ("C", 4), ("D", 5)]:
        rs = rs_of(fam, rank)
        for i in noncompact_indices(rs):
            w = grading_weight(symmetric_pair(rs, rs.simple[i - 1]))
            pairings = [dot(w, s) for s in rs.simple]
            assert pairings[i - 1] > 0
            assert all(p == 0 for j, p in enumerate(pairings) if j != i - 1)


def test_dynkin_components():
    d5 = rs_of("D", 5)
    assert dynkin_components(list(d5.simple)) == ["D5"]
    b4 = rs_of("B", 4)
    assert dynkin_components(list(b4.simple[1:])) == ["B3"]
    c4 = rs_of("C", 4)
    # rank-2 mixed-length components are reported as B2 (= C2)
    assert sorted(dynkin_components([c4.simple[0], c4.simple[2], c4.simple[3]])) == ["A1", "B2"]


# -- towers -------------------------------------------------------------------

def test_tower_examples():
    t = build_tower("A-left:1", 3)
    assert [(lv.family, lv.rank, lv.pair.phi_index) for lv in t.levels] == [
        ("A", 2, 1), ("A", 3, 1), ("A", 4, 1)]
    t = build_tower("C-right", 3)
    assert [(lv.family, lv.rank, lv.pair.phi_index) for lv in t.levels] == [
        ("C", 3, 3), ("C", 4, 4), ("C", 5, 5)]
    t = build_tower("A-middle", 2)
    assert [(lv.family, lv.rank, lv.pair.phi_index) for lv in t.levels] == [
        ("A", 3, 2), ("A", 5, 3)]
    # both halves grow: |B+| = p (n + 1 - p)
    assert [len(lv.pair.set_b_plus) for lv in t.levels] == [4, 9]


@pytest.mark.parametrize("pattern", PATTERNS)
def test_tower_levels_nest(pattern):
    checks = level_checks(build_tower(pattern, 4))
    assert all(all(c.values()) for c in checks)
    assert all(c["nested"] and c["phi_preserved"] for c in checks[:-1])


@pytest.mark.parametrize("bad", ["A-left", "A-left:0", "E-right", "C-right:3", "BD-left:X", ""])
def test_bad_patterns(bad):
    with pytest.raises(BadPattern):
        Pattern.parse(bad)


def test_bad_depth():
    with pytest.raises(BadPattern):
        build_tower("C-right", 0)


@pytest.mark.parametrize("pattern", PATTERNS)
def test_pattern_round_trip(pattern):
    assert str(Pattern.parse(pattern)) == pattern


@pytest.mark.parametrize("golden", FAMILIES, ids=PATTERNS)
def test_orbit_family_golden(golden):
    tower = build_tower(golden["pattern"], 3)
    fam = classify_orbit(tower)
    assert fam.tag == golden["tag"]
    assert fam.label == golden["label"]
    assert fam.description == golden["description"]
    assert fam.isotropy == golden["isotropy"]
    assert infer_family(tower) == fam


def test_classify_rejects_mislabelled_tower():
    tower = build_tower("C-right", 2)
    with pytest.raises(UnrecognizedPattern):
        classify_orbit(TowerSpec(tower.levels, Pattern("D_right")))


def test_unknown_family_tag():
    with pytest.raises(UnrecognizedPattern):
        OrbitFamily("E7")


def test_tower_report_shape():
    rep = tower_report(build_tower("A-left:2", 4))
    assert rep["orbit"] == "GrP(2)" and rep["passed"]
    assert rep["schema"] == "hermorbits.classification" and rep["version"] == 1
    assert len(rep["levels"]) == 4


@settings(max_examples=30, deadline=None)
@given(st.sampled_from(PATTERNS), st.integers(1, 5))
def test_towers_always_pass(pattern, depth):
    rep = tower_report(build_tower(pattern, depth))
    assert rep["passed"]
    assert len(rep["levels"]) == depth


@settings(max_examples=40, deadline=None)
@given(st.sampled_from(["A", "B", "C", "D"]), st.integers(0, 4), st.data())
def test_descriptor_counts(family, extra, data):
    rank = {"A": 1, "B": 2, "C": 3, "D": 4}[family] + extra
    rs = rs_of(family, rank)
    i = data.draw(st.sampled_from(noncompact_indices(rs)))
    d = symmetric_pair(rs, rs.simple[i - 1])
    k_dim = sum(int(t[1:]) for t in d.k_type.split(" x ")[:-1]) if " x " in d.k_type else 0
    assert k_dim == rank - 1
    assert RootSystem(d.set_a).roots <= rs.roots

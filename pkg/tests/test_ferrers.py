import itertools

import pytest
from hypothesis import given, strategies as st

from emc4.clauses import UNIT_TOP, residual_seed_clauses, seeds_for, upper_clauses
from emc4.ferrers import (
    BadTripleMatching,
    audit_pairs,
    audit_triples,
    enumerate_bad_triples,
    enumerate_pair_obstructions,
    is_bad_triple,
    is_legal_pair_mask,
    legal_downsets_with_closure,
    minimal_forbidden_masks,
    universal_bound_ok,
)
from emc4.lattice import CellSet, all_traces, decode, encode, full_mask, pair_supports, points, triple_supports
from emc4.notopstar import rectangle_mask


def pairwise_disjoint(cells, d=4):
    xs = [decode(c, d) for c in cells]
    return all(a[i] != b[i] for a, b in itertools.combinations(xs, 2) for i in range(d))


def test_upper_clauses_oracle():
    upper = [encode(x) for x in itertools.product((1, 2, 3), repeat=4)]
    oracle = {tuple(sorted(c)) for c in itertools.combinations(upper, 3) if pairwise_disjoint(c)}
    assert set(upper_clauses()) == oracle
    assert len(oracle) == 216


@given(st.sampled_from(all_traces()))
def test_residual_clauses_are_disjoint_and_avoid_trace(h):
    for cl in residual_seed_clauses(h)[:200]:
        assert len(set(cl)) == 3
        assert pairwise_disjoint(cl)
        for c in cl:
            x = decode(c, 4)
            assert all(x[col] != v for col, v in zip(h.support, h.values))


@given(st.sampled_from(all_traces()))
def test_residual_clauses_avoid_some_seed(h):
    seeds = seeds_for(h)
    for cl in residual_seed_clauses(h)[:100]:
        xs = [decode(c, 4) for c in cl]
        assert any(all(x[s.column] != s.value for x in xs) for s in seeds)


def test_bad_triples_match_combination_scan():
    oracle = {
        tuple(sorted((a, b, c)))
        for a, b, c in itertools.combinations(points(3), 3)
        if is_bad_triple(a, b, c)
    }
    got = {tuple(sorted((m.a, m.b, m.c))) for m in enumerate_bad_triples()}
    assert got == oracle
    assert len(got) == 2016


def test_bad_triple_validation():
    with pytest.raises(ValueError):
        BadTripleMatching((0, 0, 0), (0, 1, 1), (2, 2, 2))


def test_pair_obstructions_and_legality():
    obs = enumerate_pair_obstructions()
    assert obs
    for o in obs:
        assert not is_legal_pair_mask((1 << encode(o.a)) | (1 << encode(o.b)))
    assert is_legal_pair_mask(0)
    # the 2x2 low square has no obstruction
    assert is_legal_pair_mask(sum(1 << encode(x) for x in [(0, 0), (0, 1), (1, 0), (1, 1)]))


def test_pair_audit():
    r = audit_pairs()
    assert (r.downsets_checked, r.legal_count, r.max_legal_size) == (70, 10, 4)


def test_triple_audit():
    r = audit_triples()
    assert (r.downsets_checked, r.bad_matchings, r.legal_count, r.max_legal_size) == (232848, 2016, 26893, 32)
    assert len(r.equality_diagrams) == 4
    assert r.macmahon_count == r.downsets_checked


def test_minimal_forbidden_masks_are_antichain():
    ms = minimal_forbidden_masks()
    assert len(ms) == 51
    for a, b in itertools.permutations(ms, 2):
        assert a & b != a


def test_closure_full_and_empty():
    for s in triple_supports():
        assert legal_downsets_with_closure(s, CellSet.full(4)).max_size == 0
        assert legal_downsets_with_closure(s, CellSet(4, 0)).max_size == 0


def test_closure_on_rectangle():
    m = CellSet(4, rectangle_mask(0, 1))
    t = [legal_downsets_with_closure(s, m).max_size for s in triple_supports()]
    p = [legal_downsets_with_closure(s, m).max_size for s in pair_supports()]
    assert t == [16, 16, 32, 32]
    assert p == [4, 0, 0, 0, 0, 0]


def test_closure_rejects_non_up_set():
    with pytest.raises(ValueError):
        legal_downsets_with_closure((0, 1, 2), CellSet(4, 1))


def test_universal_bound():
    lhs, rhs, ok = universal_bound_ok()
    assert ok and lhs <= rhs


def test_unit_top_cells():
    assert sorted(decode(c, 4) for c in UNIT_TOP) == sorted(
        tuple(3 if i == j else 1 for i in range(4)) for j in range(4)
    )
    assert full_mask(4).bit_count() == 256

import itertools

import pytest

from emc4.clauses import residual_seed_clauses
from emc4.hitting import minimize
from emc4.lattice import SupportedTrace, all_traces
from emc4.notopstar import (
    EXPECTED_TABLE,
    all_trace_minima,
    combine_thresholds,
    critical_pattern_checks,
    expected_row,
    permute_cell,
    permute_trace,
    rectangle_extension_audit,
    trace_instance,
    trace_orbits,
    upper_blocker_minimum,
)

# single-trace minima, computed by the branch and bound and confirmed by a
# MILP formulation of the same instances before being frozen here
PAIR_MU = {(0, 0): 60, (0, 1): 64, (0, 2): 68, (0, 3): 80, (1, 1): 64, (1, 2): 80, (1, 3): 96, (2, 2): 88, (2, 3): None, (3, 3): None}
TRIPLE_MU = {
    (0, 0, 0): 34, (0, 0, 1): 36, (0, 0, 2): 42, (0, 0, 3): 48, (0, 1, 1): 48, (0, 1, 2): 48, (0, 1, 3): 48,
    (0, 2, 2): 48, (0, 2, 3): 56, (0, 3, 3): 64, (1, 1, 1): 56, (1, 1, 2): 56, (1, 1, 3): 64, (1, 2, 2): 64,
    (1, 2, 3): 64, (1, 3, 3): 64, (2, 2, 2): 64, (2, 2, 3): 64, (2, 3, 3): None, (3, 3, 3): None,
}


@pytest.fixture(scope="module")
def minima():
    return all_trace_minima()


def test_orbit_counts_and_sizes():
    orbits = trace_orbits()
    assert sum(o.kind == "pair" for o in orbits) == 10
    assert sum(o.kind == "triple" for o in orbits) == 20
    assert sum(o.size for o in orbits if o.kind == "pair") == 6 * 16
    assert sum(o.size for o in orbits if o.kind == "triple") == 4 * 64


def test_minima_values(minima):
    got = {(tm.orbit.kind, tm.orbit.multiset): tm.mu for tm in minima}
    for v, mu in PAIR_MU.items():
        assert got[("pair", v)] == mu
    for v, mu in TRIPLE_MU.items():
        assert got[("triple", v)] == mu


def test_witnesses_are_feasible(minima):
    for tm in minima:
        if tm.mu is not None:
            inst = trace_instance(tm.orbit.representative)
            assert inst.is_feasible_point(tm.result.witness)
            assert tm.result.witness.bit_count() == tm.mu


def test_minima_are_monotone_in_values(minima):
    mu = {(tm.orbit.kind, tm.orbit.multiset): tm.mu for tm in minima}
    inf = float("inf")
    for kind, k in (("pair", 2), ("triple", 3)):
        keys = [m for kd, m in mu if kd == kind]
        for a, b in itertools.product(keys, repeat=2):
            if all(x <= y for x, y in zip(a, b)):
                va = inf if mu[(kind, a)] is None else mu[(kind, a)]
                vb = inf if mu[(kind, b)] is None else mu[(kind, b)]
                assert va <= vb


@pytest.mark.parametrize("h", [SupportedTrace((0, 1), (0, 2)), SupportedTrace((0, 2, 3), (1, 0, 2))])
def test_column_permutation_maps_clause_sets(h):
    for perm in itertools.permutations(range(4)):
        g = permute_trace(h, perm)
        mapped = {tuple(sorted(permute_cell(c, perm) for c in cl)) for cl in residual_seed_clauses(h)}
        assert mapped == set(residual_seed_clauses(g))


def test_minimum_is_orbit_invariant():
    h = SupportedTrace((0, 1), (0, 1))
    g = permute_trace(h, (2, 3, 0, 1))
    assert minimize(trace_instance(h)).optimum == minimize(trace_instance(g)).optimum == 64


def test_combined_table_safe_against_reference(minima):
    t = combine_thresholds(minima)
    assert t.inequality_ok
    assert t.tight == [48]
    assert t.rows[48] == (0, 25)
    assert t.dominated_by_reference
    # rows that differ from the reference table, all in the safe direction
    assert [m for m, _, _ in t.mismatches] == list(range(50, 56))
    assert all(c == (0, 25) and r == (0, 26) for _, c, r in t.mismatches)


def test_expected_rows_cover_range():
    assert expected_row(33)[0] >= 0 and expected_row(63)
    assert EXPECTED_TABLE


def test_critical_patterns():
    checks = critical_pattern_checks()
    assert len(checks) == 9
    assert all(c.ok for c in checks)
    mins = [c.result.optimum for c in checks if c.kind == "minimum"]
    assert mins == [64, 64, 64, 64, 80]


def test_rectangle_audit():
    audit = rectangle_extension_audit()
    assert len(audit.cases) == 72
    assert audit.worst.margin == -10624
    assert audit.ok


def test_upper_blocker():
    res = upper_blocker_minimum(cross_check=True)
    assert (res.max_present, res.min_blocker, res.branch_bound_minimum) == (48, 33, 33)
    assert res.ok


def test_all_traces_count():
    assert len(all_traces()) == 6 * 16 + 4 * 64

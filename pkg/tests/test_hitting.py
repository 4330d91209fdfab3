import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.optimize import Bounds, LinearConstraint, milp

from emc4.clauses import upper_clauses
from emc4.hitting import BranchAndBound, HittingInstance, minimize, reduce_clauses
from emc4.lattice import decode, down_mask, encode, mask_of, up_mask

UPPER = [encode(x) for x in np.ndindex(3, 3, 3, 3) for x in [tuple(v + 1 for v in x)]]


def milp_minimum(inst: HittingInstance):
    """Independent oracle: 0/1 program over all 256 cells."""
    n = 256
    rows, lo = [], []
    for c in range(n):
        x = decode(c, 4)
        for i in range(4):
            if x[i] < 3:
                y = list(x)
                y[i] += 1
                r = np.zeros(n)
                r[c], r[encode(y)] = -1, 1  # x_c <= x_succ
                rows.append(r)
                lo.append(0)
    for cl in inst.clauses:
        r = np.zeros(n)
        r[list(cl)] = 1
        rows.append(r)
        lo.append(1)
    ub = np.ones(n)
    for c in range(n):
        if inst.blocked >> c & 1:
            ub[c] = 0
    lb = np.zeros(n)
    for c in range(n):
        if inst.initial >> c & 1:
            lb[c] = 1
    res = milp(np.ones(n), constraints=LinearConstraint(np.array(rows), lo, np.inf), integrality=np.ones(n), bounds=Bounds(lb, ub))
    return None if res.status != 0 else round(res.fun)


clause_strategy = st.lists(
    st.lists(st.sampled_from(UPPER), min_size=3, max_size=3, unique=True).map(tuple), min_size=1, max_size=12
)


@settings(max_examples=40)
@given(clause_strategy, st.sampled_from(UPPER))
def test_branch_and_bound_matches_milp(clauses, absent):
    inst = HittingInstance(clauses, forced_absent=1 << absent)
    res = minimize(inst)
    assert res.optimum == milp_minimum(inst)
    if res.feasible:
        assert inst.is_feasible_point(res.witness)
        assert res.witness.bit_count() == res.optimum


@given(clause_strategy)
def test_reduction_preserves_minimum(clauses):
    inst = HittingInstance(clauses, forbidden=0)
    a = BranchAndBound(inst, reduce=True).solve()
    b = BranchAndBound(inst, reduce=False).solve()
    assert a.optimum == b.optimum


@given(clause_strategy)
def test_reduced_clauses_imply_dropped_ones(clauses):
    kept = reduce_clauses(clauses)
    for c in clauses:
        below = down_mask(c[0], 4) | down_mask(c[1], 4) | down_mask(c[2], 4)
        # some kept clause lies entirely below c, so hitting it hits c
        assert any(mask_of(k) & ~below == 0 for k in kept)


def test_bound_semantics():
    inst = HittingInstance([tuple(upper_clauses()[0])], forbidden=0)
    opt = minimize(inst).optimum
    assert minimize(inst, bound=opt).optimum is None
    assert minimize(inst, bound=opt + 1).optimum == opt


def test_single_clause_minimum_is_smallest_up_closure():
    cl = tuple(upper_clauses()[0])
    inst = HittingInstance([cl], forbidden=0)
    assert minimize(inst).optimum == min(up_mask(c, 4).bit_count() for c in cl)


def test_dead_clause_is_infeasible():
    cl = tuple(upper_clauses()[0])
    inst = HittingInstance([cl], forced_absent=mask_of(cl), forbidden=0)
    assert inst.dead_clauses() == [cl]
    assert not minimize(inst).feasible


def test_instance_rejects_repeated_cells():
    with pytest.raises(ValueError):
        HittingInstance([(1, 1, 2)])


def test_upper_blocker_branch_and_bound():
    res = minimize(HittingInstance(list(upper_clauses())))
    assert res.optimum == 33

from fractions import Fraction
from math import comb

import pytest
import sympy
from hypothesis import given
from hypothesis import strategies as st

from emc4.threshold import (
    ADMISSIBILITY,
    GAP_NUMERATOR,
    GLOBAL_S4,
    REFERENCE_LAST_FAILURE,
    REFERENCE_S_A,
    S4,
    IntPolynomial,
    a4,
    b4,
    class_polynomial,
    compute_n4_direct,
    q_inequality,
    rho4,
    verify_gap_and_admissibility,
    verify_residue_classes,
    verify_weight_estimates,
    weight,
)

X = sympy.Symbol("x")
coeffs = st.lists(st.integers(-50, 50), min_size=1, max_size=5)


def to_sympy(p: IntPolynomial):
    return sympy.expand(sum(sympy.Rational(c.numerator, c.denominator) * X**k for k, c in enumerate(p.c)))


@given(coeffs, coeffs)
def test_polynomial_ring_ops_match_sympy(a, b):
    p, q = IntPolynomial(a), IntPolynomial(b)
    P, Q = to_sympy(p), to_sympy(q)
    assert to_sympy(p + q) == sympy.expand(P + Q)
    assert to_sympy(p - q) == sympy.expand(P - Q)
    assert to_sympy(p * q) == sympy.expand(P * Q)
    assert to_sympy(p.compose(q)) == sympy.expand(P.subs(X, Q))


@given(coeffs, st.integers(-20, 20))
def test_shift_and_evaluation(a, k):
    p = IntPolynomial(a)
    assert to_sympy(p.shift(k)) == sympy.expand(to_sympy(p).subs(X, X + k))
    for t in range(-3, 4):
        assert p(t) == to_sympy(p).subs(X, t)


@given(coeffs)
def test_binomial_basis_reconstructs(a):
    p = IntPolynomial(a)
    e = p.binomial_basis()
    for t in range(0, 8):
        assert sum(ek * comb(t, k) for k, ek in enumerate(e)) == p(t)


def test_integer_valued_detection():
    x = IntPolynomial.x()
    half = x * (x - 1) * Fraction(1, 2)
    assert half.is_integer_valued()
    assert not (x * Fraction(1, 2)).is_integer_valued()


def _n4_scan(s):
    n = 4 * (s + 1)
    while b4(n, s) < a4(s):
        n += 1
    return n


@pytest.mark.parametrize("s", list(range(2, 60)) + [500, 3480, 3481, 3482])
def test_n4_matches_linear_scan(s):
    assert compute_n4_direct(s) == _n4_scan(s)


def test_n4_small_value():
    assert compute_n4_direct(2) == 13
    with pytest.raises(ValueError):
        compute_n4_direct(1)


def test_class_polynomial_values():
    for s in (2, 27, 100, 3481, 4999):
        a, u = s % 25, s // 25
        m = (112 * s + 39) // 25
        assert class_polynomial(a)(u) == comb(m, 4) - comb(m - s, 4) - comb(4 * s + 3, 4)
        assert class_polynomial(a).is_integer_valued()


def test_residue_table_and_last_failure():
    rep = verify_residue_classes(5000)
    assert rep.s_a == REFERENCE_S_A
    assert rep.last_failure == REFERENCE_LAST_FAILURE == 3480
    assert rep.oracle_agrees and rep.oracle_failures_max == 3480
    assert rep.ok


def test_last_failure_by_incremental_scan():
    fails = []
    n = 13
    for s in range(2, 5001):
        n = max(n, 4 * (s + 1))
        while b4(n, s) < a4(s):
            n += 1
        if not q_inequality(s, n):
            fails.append(s)
    assert max(fails) == 3480
    assert S4 == 3481 and GLOBAL_S4 == 6961


def test_gap_and_admissibility_identities():
    rep = verify_gap_and_admissibility(S4, 4000)
    assert rep.ok
    assert ADMISSIBILITY.subs(sympy.Symbol("s"), 2) == 1080
    assert GAP_NUMERATOR.subs(list(GAP_NUMERATOR.free_symbols)[0], 1) == 2314074


def test_weight_estimates():
    rep = verify_weight_estimates()
    assert rep.chain and rep.formula_ok
    assert all(rep.symbolic.values()) and len(rep.symbolic) == 6
    assert all(rep.spot_checks.values())
    assert weight(3, 3, 10, 20) == Fraction(10, 17)


def test_asymptotic_ratio():
    r = rho4()
    assert abs(float(r) - 4.479166856) < 1e-8
    assert r**4 - (r - 1) ** 4 >= 256
    assert abs(compute_n4_direct(10**5) / 10**5 - 4.47921) < 1e-5

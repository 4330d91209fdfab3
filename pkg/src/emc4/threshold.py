"""Exact arithmetic for the critical values of the 4-uniform problem.

a4(s) = C(4s+3, 4), b4(n, s) = C(n, 4) - C(n-s, 4) and n4(s) is the least
n >= 4(s+1) with b4(n, s) >= a4(s). Everything here is integer or rational;
floats appear only in the loose asymptotic sanity check.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import comb
from typing import Sequence

import sympy

S4 = 3481
GLOBAL_S4 = 2 * S4 - 1
RHO_APPROX = 4.479166856

REFERENCE_S_A = (
    3025, 2401, 2977, 2353, 2929,
    3505, 2881, 3457, 2833, 3409,
    2785, 3361, 2737, 3313, 2689,
    3265, 2641, 3217, 2593, 3169,
    2545, 3121, 2497, 3073, 2449,
)
REFERENCE_LAST_FAILURE = 3480


class IntPolynomial:
    """One-variable polynomial with exact rational coefficients, lowest degree first."""

    __slots__ = ("c",)

    def __init__(self, coeffs: Sequence = (0,)):
        c = [Fraction(x) for x in coeffs] or [Fraction(0)]
        while len(c) > 1 and c[-1] == 0:
            c.pop()
        self.c = tuple(c)

    @classmethod
    def x(cls) -> "IntPolynomial":
        return cls((0, 1))

    @classmethod
    def const(cls, a) -> "IntPolynomial":
        return cls((a,))

    @property
    def degree(self) -> int:
        return len(self.c) - 1 if any(self.c) else -1

    def __repr__(self):
        return f"IntPolynomial({[str(a) for a in self.c]})"

    def __eq__(self, other):
        other = _poly(other)
        return self.c == other.c

    def __hash__(self):
        return hash(self.c)

    def __add__(self, other):
        other = _poly(other)
        n = max(len(self.c), len(other.c))
        a = self.c + (Fraction(0),) * (n - len(self.c))
        b = other.c + (Fraction(0),) * (n - len(other.c))
        return IntPolynomial([x + y for x, y in zip(a, b)])

    __radd__ = __add__

    def __neg__(self):
        return IntPolynomial([-a for a in self.c])

    def __sub__(self, other):
        return self + (-_poly(other))

    def __rsub__(self, other):
        return _poly(other) - self

    def __mul__(self, other):
        other = _poly(other)
        out = [Fraction(0)] * (len(self.c) + len(other.c) - 1)
        for i, a in enumerate(self.c):
            if a:
                for j, b in enumerate(other.c):
                    out[i + j] += a * b
        return IntPolynomial(out)

    __rmul__ = __mul__

    def __call__(self, t):
        acc = Fraction(0)
        for a in reversed(self.c):
            acc = acc * t + a
        return acc

    def compose(self, inner: "IntPolynomial") -> "IntPolynomial":
        acc = IntPolynomial()
        for a in reversed(self.c):
            acc = acc * inner + a
        return acc

    def shift(self, k) -> "IntPolynomial":
        """p(x + k)."""
        return self.compose(IntPolynomial((k, 1)))

    def binomial_basis(self) -> list[Fraction]:
        """Coefficients e_k with p(x) = sum e_k C(x, k), from forward differences at 0."""
        vals = [self(i) for i in range(self.degree + 1)] if self.degree >= 0 else [Fraction(0)]
        out = []
        while vals:
            out.append(vals[0])
            vals = [b - a for a, b in zip(vals, vals[1:])]
        return out

    def is_integer_valued(self) -> bool:
        return all(e.denominator == 1 for e in self.binomial_basis())


def _poly(p) -> IntPolynomial:
    return p if isinstance(p, IntPolynomial) else IntPolynomial.const(p)


def binom4(p: IntPolynomial) -> IntPolynomial:
    return p * (p - 1) * (p - 2) * (p - 3) * Fraction(1, 24)


# ---------------------------------------------------------------- direct oracle


def a4(s: int) -> int:
    return comb(4 * s + 3, 4)


def b4(n: int, s: int) -> int:
    return comb(n, 4) - comb(n - s, 4)


def compute_n4_direct(s: int) -> int:
    """Least n >= 4(s+1) with b4(n, s) >= a4(s); b4 increases in n, so bisect."""
    if s < 2:
        raise ValueError("s must be at least 2")
    target = a4(s)
    lo = 4 * (s + 1)
    if b4(lo, s) >= target:
        return lo
    hi = lo + 1
    while b4(hi, s) < target:
        hi = lo + 2 * (hi - lo)
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if b4(mid, s) >= target:
            hi = mid
        else:
            lo = mid
    return hi


def m_of(s: int) -> int:
    return (112 * s + 39) // 25


def q_inequality(s: int, n4: int) -> bool:
    return 25 * (n4 - 4 * s - 3) <= 12 * (s - 3)


# ---------------------------------------------------------------- residue classes


def class_polynomial(a: int) -> IntPolynomial:
    """C(m(s),4) - C(m(s)-s,4) - C(4s+3,4) with s = a + 25u, as a polynomial in u."""
    u = IntPolynomial.x()
    s = 25 * u + a
    m = 112 * u + (112 * a + 39) // 25
    return binom4(m) - binom4(m - s) - binom4(4 * s + 3)


@dataclass
class ResidueClass:
    a: int
    first_valid: int  # s_a
    certified_from: int  # s >= this is covered by nonnegative shifted coefficients
    shifted_coeffs: tuple  # coefficients in powers of (u - u_cert)
    integer_valued: bool


def _tail_start(p: IntPolynomial, u0: int) -> int:
    # first shift (>= u0) at which every coefficient is nonnegative; leading coefficient is positive
    u = u0
    while any(c < 0 for c in p.shift(u).c):
        u += 1
    return u


def certify_class(a: int, start_s: int = 2) -> ResidueClass:
    p = class_polynomial(a)
    u_min = max(0, -(-(start_s - a) // 25))
    u_cert = _tail_start(p, u_min)
    # below the certified tail, evaluate directly to find the last failure in the class
    last_fail = None
    for u in range(u_min, u_cert):
        s = a + 25 * u
        if p(u) < 0 or m_of(s) < 4 * (s + 1):
            last_fail = u
    first = a + 25 * (last_fail + 1 if last_fail is not None else u_min)
    return ResidueClass(a, first, a + 25 * u_cert, p.shift(u_cert).c, p.is_integer_valued())


@dataclass
class ResidueReport:
    classes: list
    s_a: tuple
    last_failure: int
    table_matches: bool
    oracle_range: tuple
    oracle_agrees: bool
    oracle_failures_max: int

    @property
    def ok(self) -> bool:
        return self.table_matches and self.last_failure == REFERENCE_LAST_FAILURE and self.oracle_agrees


def verify_residue_classes(oracle_hi: int = 5000) -> ResidueReport:
    classes = [certify_class(a) for a in range(25)]
    s_a = tuple(c.first_valid for c in classes)
    last = max(s_a) - 25
    # the polynomial claim and the direct oracle must agree pointwise
    agree = True
    fails = []
    for s in range(2, oracle_hi + 1):
        n4 = compute_n4_direct(s)
        direct = q_inequality(s, n4)
        p = class_polynomial(s % 25)
        poly = p((s - s % 25) // 25) >= 0 and m_of(s) >= 4 * (s + 1)
        if direct != poly:
            agree = False
        if not direct:
            fails.append(s)
        if s >= s_a[s % 25] and not direct:
            agree = False
    return ResidueReport(
        classes,
        s_a,
        last,
        s_a == REFERENCE_S_A,
        (2, oracle_hi),
        agree and (max(fails) if fails else None) == last,
        max(fails) if fails else -1,
    )


# ---------------------------------------------------------------- gap and admissibility

_N, _S = sympy.symbols("N s")


def _b4(x):
    return x * (x - 1) * (x - 2) * (x - 3) / 24


def _delta(s, n):
    return _b4(n) - _b4(n - s) - _b4(4 * s + 3)


GAP_RHS = -_N**3 - 3 * _N**2 * _S + 9 * _N**2 + 3 * _N * _S**2 + 12 * _N * _S - 26 * _N + 255 * _S**3 - 102 * _S**2 + 45 * _S + 18
GAP_NUMERATOR = 1848647 * _S**3 + 18927 * _S**2 + 516094 * _S - 69594
ADMISSIBILITY = _S * (_S - 1) * (81 * _S**2 + 95 * _S + 26)


def _nonneg_coeffs(expr, gens) -> bool:
    poly = sympy.Poly(sympy.expand(expr), *gens)
    return all(c >= 0 for c in poly.coeffs())


@dataclass
class GapReport:
    identity: bool
    decreasing: bool
    substitution: bool
    numerator_positive: bool
    admissibility_identity: bool
    admissibility_positive: bool
    numeric_range: tuple
    numeric_gap_ok: bool
    numeric_admissible_ok: bool

    @property
    def ok(self) -> bool:
        return all(
            (
                self.identity,
                self.decreasing,
                self.substitution,
                self.numerator_positive,
                self.admissibility_identity,
                self.admissibility_positive,
                self.numeric_gap_ok,
                self.numeric_admissible_ok,
            )
        )


def verify_gap_and_admissibility(lo: int = S4, hi: int = 5000) -> GapReport:
    w, v = sympy.symbols("w v", nonnegative=True)
    lhs = 6 * (_delta(_S - 1, _N - 2) - _delta(_S, _N))
    identity = sympy.expand(lhs - GAP_RHS) == 0
    # d/dN of the right side is <= 0 once N = 4s + 4 + w with s = 1 + v, w, v >= 0
    deriv = sympy.diff(GAP_RHS, _N).subs({_N: 4 * _S + 4 + w}).subs({_S: 1 + v})
    decreasing = _nonneg_coeffs(-deriv, (w, v))
    sub = sympy.together(GAP_RHS.subs(_N, sympy.Rational(112, 25) * _S + sympy.Rational(39, 25)))
    substitution = sympy.expand(sub - GAP_NUMERATOR / 15625) == 0
    numerator_positive = _nonneg_coeffs(GAP_NUMERATOR.subs(_S, 1 + v), (v,))
    adm = _b4(4 * _S + 3) - (_b4(4 * _S + 4) - _b4(3 * _S + 4))
    admissibility_identity = sympy.expand(adm - ADMISSIBILITY / 24) == 0
    admissibility_positive = _nonneg_coeffs(ADMISSIBILITY.subs(_S, 2 + v), (v,)) and ADMISSIBILITY.subs(_S, 2) > 0
    prev = compute_n4_direct(lo - 1)
    gap_ok = adm_ok = True
    for s in range(lo, hi + 1):
        cur = compute_n4_direct(s)
        gap_ok &= cur - prev >= 2
        adm_ok &= cur - 1 >= 4 * (s + 1)
        prev = cur
    return GapReport(
        identity,
        decreasing,
        substitution,
        numerator_positive,
        admissibility_identity,
        admissibility_positive,
        (lo, hi),
        gap_ok,
        adm_ok,
    )


# ---------------------------------------------------------------- weight estimates

WEIGHT_BOUNDS = (
    # name, expression in (q, s), bound
    ("w(T3)", lambda q, s: q / (s - 3), Fraction(12, 25)),
    ("w(P2)", lambda q, s: q * (q - 1) / ((s - 2) * (s - 3)), Fraction(144, 625)),
    ("(s-3)w(T2)", lambda q, s: 2 * q / (s - 2), Fraction(24, 25)),
    ("(s-3)w(P1)", lambda q, s: 3 * q * (q - 1) / ((s - 1) * (s - 2)), Fraction(432, 625)),
    ("C(s-2,2)w(T1)", lambda q, s: 3 * q / (s - 1), Fraction(36, 25)),
    ("C(s-2,2)w(P0)", lambda q, s: 6 * q * (q - 1) / (s * (s - 1)), Fraction(864, 625)),
)


def weight(h_size: int, spread: int, q: int, s: int) -> Fraction:
    """w(H) = C(q, 4-|H|) / C(s-z, 4-z)."""
    return Fraction(comb(q, 4 - h_size), comb(s - spread, 4 - spread))


@dataclass
class WeightReport:
    chain: bool
    symbolic: dict
    spot_checks: dict
    formula_ok: bool
    t0: int = 0
    notes: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return self.chain and all(self.symbolic.values()) and all(self.spot_checks.values()) and self.formula_ok


def verify_weight_estimates(spot_s=(S4, 4000, GLOBAL_S4)) -> WeightReport:
    q, s, v, d = sympy.symbols("q s v d", nonnegative=True)
    qmax = sympy.Rational(12, 25) * (s - 3)
    # q <= qmax gives q - 1 <= (12/25)(s - 2) and (12/25)(s - 1)
    chain = _nonneg_coeffs((sympy.Rational(12, 25) * (s - 2) - (qmax - 1)).subs(s, S4 + v), (v,)) and _nonneg_coeffs(
        (sympy.Rational(12, 25) * (s - 1) - (qmax - 1)).subs(s, S4 + v), (v,)
    )
    symbolic = {}
    for name, f, bound in WEIGHT_BOUNDS:
        # each expression increases in q for q >= 1, so the worst case is q = qmax - d with d = 0;
        # check bound - f(qmax - d, s) >= 0 as a rational function in (d, v) with s = S4 + v
        expr = sympy.together(sympy.Rational(bound.numerator, bound.denominator) - f(qmax - d, s))
        num, den = sympy.fraction(expr)
        num = num.subs(s, S4 + v)
        den = den.subs(s, S4 + v)
        sign = 1 if sympy.Poly(sympy.expand(den), v).coeffs()[0] > 0 else -1
        ok_den = _nonneg_coeffs(sign * den, (v,))
        # derivative in q is positive where q >= 1, so larger d only helps; test d = 0 exactly
        ok_num = _nonneg_coeffs(sign * num.subs(d, 0), (v,))
        incr = sympy.diff(f(q, s), q)
        ok_incr = _nonneg_coeffs(sympy.numer(sympy.together(incr)).subs({q: 1 + d, s: S4 + v}), (d, v))
        symbolic[name] = bool(ok_den and ok_num and ok_incr)
    spots = {}
    for sv in spot_s:
        n4 = compute_n4_direct(sv)
        for n in (n4 - 1, n4):
            qv = n - (4 * sv + 3)
            for name, f, bound in WEIGHT_BOUNDS:
                spots[f"{name}@s={sv},n={n}"] = f(Fraction(qv), Fraction(sv)) <= bound
    # w(T3) and w(P2) agree with the general weight formula
    formula_ok = True
    for sv in spot_s:
        qv = compute_n4_direct(sv) - (4 * sv + 3)
        formula_ok &= weight(3, 3, qv, sv) == Fraction(qv, sv - 3)
        formula_ok &= weight(2, 2, qv, sv) == Fraction(comb(qv, 2), comb(sv - 2, 2))
    return WeightReport(chain, symbolic, spots, formula_ok, t0=0)


# ---------------------------------------------------------------- assembly


def rho4(tol: Fraction = Fraction(1, 10**12)) -> Fraction:
    """Root above 4 of x^4 - (x-1)^4 = 256, by exact bisection."""
    f = lambda x: x**4 - (x - 1) ** 4 - 256  # noqa: E731
    lo, hi = Fraction(4), Fraction(5)
    while hi - lo > tol:
        mid = (lo + hi) / 2
        if f(mid) >= 0:
            hi = mid
        else:
            lo = mid
    return hi


@dataclass
class ThresholdReport:
    residues: ResidueReport
    gap: GapReport
    weights: WeightReport
    n4_two: int
    asymptotic_ratio: float

    @property
    def ok(self) -> bool:
        return self.residues.ok and self.gap.ok and self.weights.ok

    def markers(self) -> dict:
        out = {
            "r4_explicit_threshold_ok": self.ok,
            "r4_symbolic_checks_ok": self.gap.ok and self.weights.ok,
            "residue_last_failure": self.residues.last_failure,
        }
        if self.ok:
            out["r4_threshold_S4"] = S4
            out["r4_global_s4"] = GLOBAL_S4
        return out


def run_threshold(oracle_hi: int = 5000, asymptotic_s: int = 10**5) -> ThresholdReport:
    res = verify_residue_classes(oracle_hi)
    gap = verify_gap_and_admissibility(S4, oracle_hi)
    w = verify_weight_estimates()
    ratio = compute_n4_direct(asymptotic_s) / asymptotic_s
    return ThresholdReport(res, gap, w, compute_n4_direct(2), ratio)

"""The 15-board residual/closure universe, its symmetry quotient and dual.

Points are D0..D2 and columns A, B, C. Present small traces are triples of
spread 2 and pairs of spread 1; missing quads of spread 3 are the variables on
the right of every residual row.
"""

from __future__ import annotations

import random
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from math import factorial

from .board import (
    PAIR_WEIGHT,
    QUAD_LOAD,
    TRIPLE_WEIGHT,
    DualCutReport,
    LocalBoard,
    cut_system,
    dual_report,
    exact_dual,
)
from .exact_lp import Row

BOARD = LocalBoard(3)
EXPECTED = {
    "quad_vars": 480,
    "triple_vars": 288,
    "pair_vars": 54,
    "residual_witnesses": 264402,
    "closure_rows": 2016,
    "quad_orbits": 13,
    "triple_orbits": 9,
    "pair_orbits": 5,
    "quotient_residual_rows": 206,
    "quotient_closure_rows": 33,
    "group_order": 2304,
}
REFERENCE_SUPPORT = 20


class CountMismatch(RuntimeError):
    pass


def _check(name: str, got: int):
    if got != EXPECTED[name]:
        raise CountMismatch(f"{name}: expected {EXPECTED[name]}, got {got}")


# ---------------------------------------------------------------- symmetry group


def _flip(j: int, f: int) -> int:
    if f & 1 and j < 2:
        j ^= 1
    if f & 2 and j >= 2:
        j = 5 - j
    return j


def group_element(dperm, cperm, flips) -> tuple:
    g = list(dperm) + [0] * 12
    for c in range(3):
        for i in range(4):
            g[3 + 4 * c + i] = 3 + 4 * cperm[c] + _flip(i, flips[c])
    return tuple(g)


def compose(g: tuple, h: tuple) -> tuple:
    """Apply h first, then g."""
    return tuple(g[h[p]] for p in range(len(h)))


def inverse(g: tuple) -> tuple:
    out = [0] * len(g)
    for p, q in enumerate(g):
        out[q] = p
    return tuple(out)


@dataclass
class SymmetryGroup15:
    generators: list
    elements: list

    @property
    def order(self) -> int:
        return len(self.elements)

    def verify(self) -> dict:
        elems = set(self.elements)
        ident = tuple(range(BOARD.n))
        closed = all(compose(g, s) in elems for g in self.elements for s in self.generators)
        inverses = all(inverse(g) in elems for g in self.elements)
        fixed = BOARD.fixed_present
        preserves = all({BOARD.permute(g, q) for q in fixed} == fixed for g in self.elements)
        return {
            "order": self.order,
            "identity": ident in elems,
            "closed": closed,
            "inverses": inverses,
            "preserves_fixed": preserves,
            "ok": self.order == EXPECTED["group_order"] and ident in elems and closed and inverses and preserves,
        }


@lru_cache(maxsize=1)
def symmetry_group() -> SymmetryGroup15:
    ident3 = (0, 1, 2)
    gens = [
        group_element((1, 0, 2), ident3, (0, 0, 0)),
        group_element((1, 2, 0), ident3, (0, 0, 0)),
        group_element(ident3, (1, 0, 2), (0, 0, 0)),
        group_element(ident3, (1, 2, 0), (0, 0, 0)),
        group_element(ident3, ident3, (1, 0, 0)),
        group_element(ident3, ident3, (2, 0, 0)),
    ]
    # close the generators under composition
    elems = {tuple(range(BOARD.n))}
    frontier = list(elems)
    while frontier:
        nxt = []
        for g in frontier:
            for s in gens:
                h = compose(s, g)
                if h not in elems:
                    elems.add(h)
                    nxt.append(h)
        frontier = nxt
    return SymmetryGroup15(gens, sorted(elems))


# ---------------------------------------------------------------- labelled rows


@dataclass(frozen=True)
class Witness:
    h: int
    quads: tuple  # three disjoint quads, each fixed present or a variable
    aside: int = -1  # set-aside point for pair traces

    def rhs(self, variables: frozenset) -> tuple:
        return tuple(sorted(q for q in self.quads if q in variables))


@dataclass
class LabelledRows15:
    residual: list  # Witness list, one per labelled residual witness
    closure: list  # (H, Q) with H inside the spread-3 quad Q

    def counts(self) -> dict:
        return {"residual_witnesses": len(self.residual), "closure_rows": len(self.closure)}


def _partitions(rest: int, bylow: dict):
    if rest == 0:
        yield ()
        return
    low = (rest & -rest).bit_length() - 1
    for q in bylow.get(low, ()):
        if q & ~rest == 0:
            for tail in _partitions(rest & ~q, bylow):
                yield (q,) + tail


def raw_partition_count(points: int) -> int:
    """Partitions of ``points`` points into quads, ignoring labels."""
    k = points // 4
    return factorial(points) // (factorial(4) ** k * factorial(k))


@lru_cache(maxsize=1)
def regenerate_labelled_rows() -> LabelledRows15:
    b = BOARD
    allowed = set(b.quad_vars) | b.fixed_present
    bylow: dict = {}
    for q in sorted(allowed):
        bylow.setdefault((q & -q).bit_length() - 1, []).append(q)
    full = (1 << b.n) - 1
    residual = []
    for h in b.triple_vars:
        residual.extend(Witness(h, p) for p in _partitions(full & ~h, bylow))
    for h in b.pair_vars:
        rest = full & ~h
        for x in range(b.n):
            if rest >> x & 1:
                residual.extend(Witness(h, p, x) for p in _partitions(rest & ~(1 << x), bylow))
    closure = [(h, q) for h in b.triple_vars + b.pair_vars for q in b.quad_vars if h & ~q == 0]
    return LabelledRows15(residual, closure)


def check_counts(rows: LabelledRows15) -> dict:
    b = BOARD
    got = {
        "quad_vars": len(b.quad_vars),
        "triple_vars": len(b.triple_vars),
        "pair_vars": len(b.pair_vars),
        **rows.counts(),
    }
    for k, v in got.items():
        _check(k, v)
    return got


# ---------------------------------------------------------------- quotient


@dataclass
class Orbit:
    kind: str
    rep: int
    size: int

    @property
    def name(self) -> str:
        return f"{self.kind}{BOARD.name(self.rep)}"


@dataclass
class Quotient15:
    orbits: list  # Orbit, indexed by orbit id
    orbit_of: dict  # labelled set -> orbit id
    residual: dict  # (h orbit, sorted quad orbit tuple) -> representative Witness
    closure: dict  # (h orbit, quad orbit) -> representative (H, Q)

    def counts(self) -> dict:
        kinds = Counter(o.kind for o in self.orbits)
        return {
            "quad_orbits": kinds["m"],
            "triple_orbits": kinds["t"],
            "pair_orbits": kinds["p"],
            "quotient_residual_rows": len(self.residual),
            "quotient_closure_rows": len(self.closure),
        }

    def row_key(self, w: Witness) -> tuple:
        variables = frozenset(BOARD.quad_vars)
        return self.orbit_of[w.h], tuple(sorted(self.orbit_of[q] for q in w.rhs(variables)))


def quotient_rows(group: SymmetryGroup15, rows: LabelledRows15) -> Quotient15:
    if not group.verify()["ok"]:
        raise CountMismatch("symmetry group failed verification")
    b = BOARD
    orbits, orbit_of = [], {}
    for kind, family in (("m", b.quad_vars), ("t", b.triple_vars), ("p", b.pair_vars)):
        for v in family:
            if v in orbit_of:
                continue
            orb = {b.permute(g, v) for g in group.elements}
            for w in orb:
                orbit_of[w] = len(orbits)
            orbits.append(Orbit(kind, min(orb), len(orb)))
    q = Quotient15(orbits, orbit_of, {}, {})
    for w in rows.residual:
        q.residual.setdefault(q.row_key(w), w)
    for h, quad in rows.closure:
        q.closure.setdefault((orbit_of[h], orbit_of[quad]), (h, quad))
    for k, v in q.counts().items():
        _check(k, v)
    return q


# ---------------------------------------------------------------- dual


def _qrow_id(q: Quotient15, key) -> str:
    h, qs = key
    return f"Q|{q.orbits[h].name}|{'.'.join(q.orbits[i].name for i in qs)}"


def quotient_system(q: Quotient15):
    """Rows X_h - sum X_q <= 0 over orbit averages; objective scaled by orbit sizes."""
    variables = [o.name for o in q.orbits]
    weight = {"m": -QUAD_LOAD, "t": TRIPLE_WEIGHT, "p": PAIR_WEIGHT}
    objective = {o.name: weight[o.kind] * o.size for o in q.orbits}
    rows = []
    for key in sorted(q.residual):
        h, qs = key
        coeffs: dict = {q.orbits[h].name: Fraction(1)}
        for i in qs:
            coeffs[q.orbits[i].name] = coeffs.get(q.orbits[i].name, 0) - 1
        rows.append(Row(_qrow_id(q, key), coeffs, 0, "Q15", {"key": key}))
    return cut_system(variables, objective, rows, "board15-quotient")


def lift_check(q: Quotient15, cert, group: SymmetryGroup15, rows: LabelledRows15) -> dict:
    """Average each weighted quotient row over the group on labelled variables and check domination."""
    b = BOARD
    variables = frozenset(b.quad_vars)
    reps = {_qrow_id(q, key): w for key, w in q.residual.items()}
    acc: Counter = Counter()
    for rid, lam in cert.rows.items():
        w = reps[rid]
        for g in group.elements:
            acc[b.permute(g, w.h)] += lam
            for quad in w.rhs(variables):
                acc[b.permute(g, quad)] -= lam
    scale = cert.denominator * group.order
    worst = None
    for v in b.quad_vars + b.triple_vars + b.pair_vars:
        c = Fraction(acc[v], scale)
        slack = {4: c + QUAD_LOAD, 3: c - TRIPLE_WEIGHT, 2: c - PAIR_WEIGHT}[v.bit_count()]
        worst = slack if worst is None or slack < worst else worst
    return {"ok": worst >= 0, "min_slack": worst}


def averaging_spot_check(group: SymmetryGroup15, rows: LabelledRows15, samples: int = 1000, seed: int = 0) -> bool:
    """Images of labelled residual rows under group elements are regenerated rows."""
    variables = frozenset(BOARD.quad_vars)
    known = {(w.h, w.rhs(variables)) for w in rows.residual}
    rng = random.Random(seed)
    for _ in range(samples):
        g = rng.choice(group.elements)
        w = rng.choice(rows.residual)
        img = (BOARD.permute(g, w.h), tuple(sorted(BOARD.permute(g, x) for x in w.rhs(variables))))
        if img not in known:
            return False
    return True


def discover_and_verify_dual(q: Quotient15) -> DualCutReport:
    sys = quotient_system(q)
    cert = exact_dual(sys)
    if cert is None:
        raise RuntimeError("no dominating dual over the quotient residual rows")
    sizes = {o.name: o.size for o in q.orbits}
    return dual_report(sys, cert, sizes)


@dataclass
class Layer2:
    triple_multiplicity: int = 2
    pair_multiplicity: int = 3
    quad_multiplicity: int = 1

    @property
    def triple_coefficient(self) -> Fraction:
        return self.triple_multiplicity * Fraction(TRIPLE_WEIGHT, QUAD_LOAD)

    @property
    def pair_coefficient(self) -> Fraction:
        return self.pair_multiplicity * Fraction(PAIR_WEIGHT, QUAD_LOAD)


def layer2_assembly() -> Layer2:
    # a spread-2 triple sits in two 15-boards, a spread-1 pair in three, a spread-3 quad in one
    return Layer2()


@dataclass
class Board15Report:
    counts: dict
    group: dict
    quotient_counts: dict
    dual: DualCutReport
    lift: dict
    averaging_ok: bool
    layer2: Layer2
    timings: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return (
            self.group["ok"]
            and self.dual.ok
            and self.dual.min_slack == 0
            and self.lift["ok"]
            and self.averaging_ok
        )

    def markers(self) -> dict:
        return {
            "board15_ok": self.ok,
            **self.counts,
            **self.quotient_counts,
            "group_order": self.group["order"],
            "dual_support_rows": self.dual.support,
            "dual_min_slack": str(self.dual.min_slack),
            "reference_support_rows": REFERENCE_SUPPORT,
            "layer2_triple_coefficient": str(self.layer2.triple_coefficient),
            "layer2_pair_coefficient": str(self.layer2.pair_coefficient),
        }


def run_board15() -> Board15Report:
    import time

    t0 = time.perf_counter()
    group = symmetry_group()
    gstat = group.verify()
    rows = regenerate_labelled_rows()
    counts = check_counts(rows)
    t1 = time.perf_counter()
    q = quotient_rows(group, rows)
    t2 = time.perf_counter()
    dual = discover_and_verify_dual(q)
    lift = lift_check(q, dual.certificate, group, rows)
    avg = averaging_spot_check(group, rows)
    t3 = time.perf_counter()
    return Board15Report(
        counts, gstat, q.counts(), dual, lift, avg, layer2_assembly(),
        {"regenerate": t1 - t0, "quotient": t2 - t1, "dual": t3 - t2},
    )

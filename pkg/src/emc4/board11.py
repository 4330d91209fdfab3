"""The 11-board residual-cut universe and its dual certificate.

Points are D0..D2 and columns A, B. Small traces are spread-1 triples and
spread-0 pairs; the right side of each cut lists spread-2 missing quads.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from fractions import Fraction

from .board import (
    PAIR_WEIGHT,
    QUAD_LOAD,
    TRIPLE_WEIGHT,
    DualCutReport,
    LocalBoard,
    cut_system,
    discover_dual,
    dual_report,
)
from .exact_lp import Row, register_generator

BOARD = LocalBoard(2)
EXPECTED_VARS = {"quad_vars": 260, "triple_vars": 68, "pair_vars": 3}
REFERENCE_SUPPORT = 84


@dataclass(frozen=True)
class ResidualCut:
    h: int
    pair: tuple  # two disjoint quads, each fixed present or a variable

    @property
    def marks(self) -> tuple:
        return tuple("F" if q in BOARD.fixed_present else "Q" for q in self.pair)

    @property
    def rhs(self) -> tuple:
        return tuple(sorted(q for q in self.pair if q not in BOARD.fixed_present))

    @property
    def id(self) -> str:
        return f"R11|{BOARD.name(self.h)}|{'.'.join(BOARD.name(q) for q in self.pair)}"

    def witness_ok(self) -> bool:
        a, b = self.pair
        variables = set(BOARD.quad_vars)
        return (
            a & b == 0
            and (a | b) & self.h == 0
            and all(q in BOARD.fixed_present or q in variables for q in self.pair)
            and (self.h in BOARD.triple_vars or self.h in BOARD.pair_vars)
        )


@register_generator("board11.cut")
def cut_row(h: str, pair: tuple) -> Row:
    cut = ResidualCut(BOARD.parse(h), tuple(BOARD.parse(q) for q in pair))
    if not cut.witness_ok():
        raise ValueError(f"not a residual witness: {cut.id}")
    coeffs: dict = {BOARD.var_name(cut.h): 1}
    for q in cut.rhs:
        coeffs[BOARD.var_name(q)] = -1
    return Row(cut.id, coeffs, 0, "R11", {"gen": "board11.cut", "args": {"h": h, "pair": tuple(pair)}})


def regenerate_residual_cuts() -> list[ResidualCut]:
    b = BOARD
    allowed = sorted(set(b.quad_vars) | b.fixed_present)
    out = []
    for h in b.triple_vars + b.pair_vars:
        usable = [q for q in allowed if q & h == 0]
        for i, q1 in enumerate(usable):
            for q2 in usable[i + 1 :]:
                if q1 & q2 == 0:
                    out.append(ResidualCut(h, (q1, q2)))
    return out


def variable_counts() -> dict:
    return {
        "quad_vars": len(BOARD.quad_vars),
        "triple_vars": len(BOARD.triple_vars),
        "pair_vars": len(BOARD.pair_vars),
    }


def build_system(cuts=None):
    cuts = cuts if cuts is not None else regenerate_residual_cuts()
    b = BOARD
    variables = [b.var_name(v) for v in b.quad_vars + b.triple_vars + b.pair_vars]
    weight = {"m": -QUAD_LOAD, "t": TRIPLE_WEIGHT, "p": PAIR_WEIGHT}
    objective = {v: weight[v[0]] for v in variables}
    rows = [cut_row(b.name(c.h), tuple(b.name(q) for q in c.pair)) for c in cuts]
    return cut_system(variables, objective, rows, "board11")


def discover_and_verify_dual11(cuts=None) -> DualCutReport:
    sys = build_system(cuts)
    cert = discover_dual(sys)
    if cert is None:
        raise RuntimeError("no dominating dual over the 11-board residual cuts")
    return dual_report(sys, cert)


@dataclass
class Layer3:
    triple_multiplicity: int = 3
    pair_multiplicity: int = 6
    quad_multiplicity: int = 1

    @property
    def triple_coefficient(self) -> Fraction:
        return self.triple_multiplicity * Fraction(TRIPLE_WEIGHT, QUAD_LOAD)

    @property
    def pair_coefficient(self) -> Fraction:
        return self.pair_multiplicity * Fraction(PAIR_WEIGHT, QUAD_LOAD)


def layer3_assembly() -> Layer3:
    # a spread-1 triple sits in three 11-boards, a spread-0 pair in six, a spread-2 quad in one
    return Layer3()


@dataclass
class Board11Report:
    counts: dict
    cuts: int
    empty_cuts: int
    witnesses_ok: bool
    dual: DualCutReport
    layer3: Layer3
    timings: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        d = self.dual
        return (
            self.counts == EXPECTED_VARS
            and self.witnesses_ok
            and d.ok
            and d.max_load <= QUAD_LOAD
            and d.min_triple_coeff >= TRIPLE_WEIGHT
            and d.min_pair_coeff >= PAIR_WEIGHT
        )

    def markers(self) -> dict:
        return {
            "board11_ok": self.ok,
            **self.counts,
            "residual_cuts": self.cuts,
            "empty_cuts": self.empty_cuts,
            "dual_support_rows": self.dual.support,
            "max_missing_load": str(self.dual.max_load),
            "min_triple_coefficient": str(self.dual.min_triple_coeff),
            "min_pair_coefficient": str(self.dual.min_pair_coeff),
            "reference_support_rows": REFERENCE_SUPPORT,
            "layer3_triple_coefficient": str(self.layer3.triple_coefficient),
            "layer3_pair_coefficient": str(self.layer3.pair_coefficient),
        }


def run_board11() -> Board11Report:
    t0 = time.perf_counter()
    cuts = regenerate_residual_cuts()
    t1 = time.perf_counter()
    dual = discover_and_verify_dual11(cuts)
    t2 = time.perf_counter()
    return Board11Report(
        variable_counts(),
        len(cuts),
        sum(1 for c in cuts if not c.rhs),
        all(c.witness_ok() for c in cuts),
        dual,
        layer3_assembly(),
        {"regenerate": t1 - t0, "dual": t2 - t1},
    )

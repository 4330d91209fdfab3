"""Labelled local boards and residual-cut dual certificates.

A board has three D points followed by ``ncols`` columns of four points each.
Subsets of the board are int bitmasks over the point positions. The spread of
a set is the number of columns it meets.

A residual cut reads ``x_H - sum(m_Q) <= 0``. A nonnegative combination that
gives every small trace coefficient at least its target and every missing
quad load at most 625 is a Farkas certificate for ``target.x - 625 m <= 0``
with zero bound, so both boards are verified by the exact LP verifier.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Optional

from .exact_lp import FarkasCertificate, RationalSystem, Row, simplex_max, verify_certificate

TRIPLE_WEIGHT = 300
PAIR_WEIGHT = 144
QUAD_LOAD = 625


@dataclass(frozen=True)
class LocalBoard:
    ncols: int

    @property
    def n(self) -> int:
        return 3 + 4 * self.ncols

    @cached_property
    def labels(self) -> tuple:
        out = [f"D{i}" for i in range(3)]
        for c in range(self.ncols):
            out += [f"{'ABC'[c]}{i}" for i in range(4)]
        return tuple(out)

    def column(self, c: int) -> int:
        return 0b1111 << (3 + 4 * c)

    @property
    def d_mask(self) -> int:
        return 0b111

    def col_of(self, p: int) -> Optional[int]:
        return None if p < 3 else (p - 3) // 4

    def spread(self, s: int) -> int:
        return sum(1 for c in range(self.ncols) if s & self.column(c))

    def name(self, s: int) -> str:
        return "".join(self.labels[p] for p in range(self.n) if s >> p & 1)

    def parse(self, name: str) -> int:
        idx = {lab: p for p, lab in enumerate(self.labels)}
        return sum(1 << idx[name[i : i + 2]] for i in range(0, len(name), 2))

    @cached_property
    def fixed_present(self) -> frozenset:
        """Full columns plus the low seeds D + {col_0}, D + {col_1}."""
        out = set()
        for c in range(self.ncols):
            out.add(self.column(c))
            for i in (0, 1):
                out.add(self.d_mask | 1 << (3 + 4 * c + i))
        return frozenset(out)

    def subsets(self, k: int) -> list[int]:
        return [sum(1 << p for p in s) for s in itertools.combinations(range(self.n), k)]

    @cached_property
    def quad_vars(self) -> tuple:
        return tuple(q for q in self.subsets(4) if self.spread(q) == self.ncols)

    @cached_property
    def triple_vars(self) -> tuple:
        return tuple(t for t in self.subsets(3) if self.spread(t) == self.ncols - 1)

    @cached_property
    def pair_vars(self) -> tuple:
        return tuple(p for p in self.subsets(2) if self.spread(p) == self.ncols - 2)

    def var_name(self, s: int) -> str:
        kind = {4: "m", 3: "t", 2: "p"}[s.bit_count()]
        return kind + self.name(s)

    def permute(self, g: tuple, s: int) -> int:
        r = 0
        for p in range(self.n):
            if s >> p & 1:
                r |= 1 << g[p]
        return r


@dataclass
class DualCutReport:
    certificate: FarkasCertificate
    ok: bool
    min_slack: Fraction
    max_load: Fraction
    min_triple_coeff: Optional[Fraction]
    min_pair_coeff: Optional[Fraction]
    support: int
    extra: dict = field(default_factory=dict)


def cut_system(variables: list, objective: dict, rows: list[Row], name: str) -> RationalSystem:
    return RationalSystem(list(variables), {r.id: r for r in rows}, objective, 0, name=name)


def dual_report(sys: RationalSystem, cert: FarkasCertificate, kind_scale: Optional[dict] = None) -> DualCutReport:
    """Exact re-verification plus coefficient summaries.

    ``kind_scale`` maps a variable to the factor its coefficient is divided by
    before reporting (orbit sizes in a quotient); defaults to 1.
    """
    ver = verify_certificate(sys, cert)
    coeff = {v: Fraction(0) for v in sys.variables}
    for rid, lam in cert.rows.items():
        for v, a in sys.row(rid).coeffs.items():
            coeff[v] += Fraction(lam * a, cert.denominator)
    scale = kind_scale or {}
    load, tri, pair = [], [], []
    for v, c in coeff.items():
        c = c / scale.get(v, 1)
        {"m": load, "t": tri, "p": pair}[v[0]].append(-c if v[0] == "m" else c)
    ok = ver.ok and not cert.upper and ver.gap >= 0
    return DualCutReport(
        cert,
        ok,
        ver.min_slack,
        max(load) if load else Fraction(0),
        min(tri) if tri else None,
        min(pair) if pair else None,
        len(cert.rows),
    )


def _dual_lp(sys: RationalSystem, row_ids: list[str]):
    """Dual of max d.x over the cut rows: min sum(lam) with A^T lam >= d."""
    cols = [sys.row(r) for r in row_ids]
    A, b = [], []
    for v in sys.variables:
        A.append([-Fraction(r.coeffs.get(v, 0)) for r in cols])
        b.append(-Fraction(sys.objective.get(v, 0)))
    return A, b


def exact_dual(sys: RationalSystem, row_ids: Optional[list[str]] = None) -> Optional[FarkasCertificate]:
    """Minimum total weight dual by exact simplex; None if no dominating dual uses these rows."""
    row_ids = sorted(row_ids if row_ids is not None else sys.rows)
    A, b = _dual_lp(sys, row_ids)
    res = simplex_max([-1] * len(row_ids), A, b)
    if res.status != "optimal":
        return None
    lam = {rid: Fraction(val) for rid, val in zip(row_ids, res.x) if val}
    return FarkasCertificate.from_fractions(lam, {}, sys.name)


def float_support(sys: RationalSystem, tol: float = 1e-9) -> list[str]:
    """Rows carrying weight in a floating-point minimum-weight dual (HiGHS)."""
    import numpy as np
    import scipy.sparse as sp
    from scipy.optimize import linprog

    row_ids = sorted(sys.rows)
    ri, ci, data = [], [], []
    for j, rid in enumerate(row_ids):
        for v, a in sys.row(rid).coeffs.items():
            ri.append(sys.var_index[v])
            ci.append(j)
            data.append(-float(a))
    A = sp.csr_matrix((data, (ri, ci)), shape=(len(sys.variables), len(row_ids)))
    b = -np.array([float(sys.objective.get(v, 0)) for v in sys.variables])
    res = linprog(np.ones(len(row_ids)), A_ub=A, b_ub=b, bounds=(0, None), method="highs")
    if res.status != 0:
        return []
    return [rid for rid, val in zip(row_ids, res.x) if val > tol]


def discover_dual(sys: RationalSystem, exact_limit: int = 400) -> Optional[FarkasCertificate]:
    """Exact minimum-weight dual; large universes are first pruned to a float support."""
    if len(sys.rows) <= exact_limit:
        return exact_dual(sys)
    support = float_support(sys)
    cert = exact_dual(sys, support) if support else None
    return cert

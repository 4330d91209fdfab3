"""Finite checks for the case where M contains no full top-star.

Pieces: the upper-blocker enumeration, single-trace hitting minima and the
threshold table built from them, critical-pattern forcing, and the audit of
small up-set extensions of the rectangles R_ij.
"""

from __future__ import annotations

import itertools
import time
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Optional

from .clauses import UNIT_TOP_MASK, residual_seed_clauses, upper_clauses
from .ferrers import legal_downsets_with_closure, legal_pair_heights, legal_triple_heights, universal_bound_ok
from .hitting import HittingInstance, SearchResult, minimize
from .lattice import (
    CellSet,
    FerrersShape,
    SupportedTrace,
    decode,
    encode,
    mask_cells,
    mask_is_up_set,
    mask_of,
    pair_supports,
    points,
    triple_supports,
    up_mask,
)

# threshold table: (first m of the range, p(m), t(m)) for 33 <= m <= 63
EXPECTED_TABLE = (
    (33, 0, 0),
    (34, 0, 1),
    (36, 0, 4),
    (42, 0, 7),
    (48, 0, 25),
    (50, 0, 26),
    (56, 0, 29),
    (60, 1, 29),
)


def expected_row(m: int) -> tuple[int, int]:
    row = None
    for start, p, t in EXPECTED_TABLE:
        if m >= start:
            row = (p, t)
    return row


# ---------------------------------------------------------------- upper blocker


def _vecs3(bound):
    for a in range(bound[0] + 1):
        for b in range(min(a, bound[1]) + 1):
            for c in range(min(b, bound[2]) + 1):
                yield (a, b, c)


@lru_cache(maxsize=None)
def upper_height_matrices() -> tuple:
    """Monotone 3x3 matrices with entries 0..3: down-sets of one 3x3x3 layer."""
    out = []
    for r0 in _vecs3((3, 3, 3)):
        for r1 in _vecs3(r0):
            for r2 in _vecs3(r1):
                out.append((r0, r1, r2))
    return tuple(out)


def _layer_mask(mat, a: int) -> int:
    # cells (a+1, b+1, c+1, h+1) of the upper cube below the heights
    m = 0
    for b in range(3):
        for c in range(3):
            for h in range(mat[b][c]):
                m |= 1 << encode((a + 1, b + 1, c + 1, h + 1))
    return m


@lru_cache(maxsize=None)
def upper_cube_mask() -> int:
    return mask_of(encode(x) for x in itertools.product((1, 2, 3), repeat=4))


@dataclass
class UpperBlockerResult:
    max_present: int
    min_blocker: int
    witness: tuple
    candidates_checked: int
    branch_bound_minimum: Optional[int] = None

    @property
    def ok(self) -> bool:
        return self.min_blocker == 81 - self.max_present and self.branch_bound_minimum in (None, self.min_blocker)


def upper_blocker_enumeration(required_present: int = UNIT_TOP_MASK, start: int = 0) -> tuple[int, tuple, int]:
    """Largest present down-set C of the upper cube holding ``required_present`` with no upper 3-matching.

    C is read as three stacked 3x3 height matrices m0 >= m1 >= m2. Returns
    (max size, witness matrices, number of fully examined candidates); ``start``
    seeds the incumbent so that only strictly larger candidates are examined.
    """
    mats = upper_height_matrices()
    size = {m: sum(map(sum, m)) for m in mats}
    layer = [{m: _layer_mask(m, a) for m in mats} for a in range(3)]
    below = {m: [k for k in mats if all(k[i][j] <= m[i][j] for i in range(3) for j in range(3))] for m in mats}
    clauses = [mask_of(c) for c in upper_clauses()]
    best, wit, checked = start - 1, None, 0
    for m0 in sorted(mats, key=lambda m: -size[m]):
        s0 = size[m0]
        if 3 * s0 <= best:
            break
        c0 = layer[0][m0]
        for m1 in below[m0]:
            s1 = size[m1]
            if s0 + 2 * s1 <= best:
                continue
            c1 = c0 | layer[1][m1]
            for m2 in below[m1]:
                s = s0 + s1 + size[m2]
                if s <= best:
                    continue
                c = c1 | layer[2][m2]
                if c & required_present != required_present:
                    continue
                checked += 1
                if any(c & k == k for k in clauses):
                    continue
                best, wit = s, (m0, m1, m2)
    return best, wit, checked


def upper_blocker_minimum(cross_check: bool = True) -> UpperBlockerResult:
    best, wit, checked = upper_blocker_enumeration()
    res = UpperBlockerResult(max_present=best, min_blocker=81 - best, witness=wit, candidates_checked=checked)
    if cross_check:
        bb = minimize(HittingInstance(list(upper_clauses()), name="upper-blocker"))
        res.branch_bound_minimum = bb.optimum
    return res


def present_mask_from_layers(wit) -> int:
    return _layer_mask(wit[0], 0) | _layer_mask(wit[1], 1) | _layer_mask(wit[2], 2)


# ---------------------------------------------------------------- orbits and single-trace minima


@dataclass(frozen=True)
class TraceOrbit:
    kind: str
    representative: SupportedTrace
    size: int

    @property
    def multiset(self) -> tuple[int, ...]:
        return tuple(sorted(self.representative.values))


def permute_trace(h: SupportedTrace, perm) -> SupportedTrace:
    """Image of a trace under the column permutation sending column c to perm[c]."""
    placed = sorted((perm[c], v) for c, v in zip(h.support, h.values))
    return SupportedTrace(tuple(c for c, _ in placed), tuple(v for _, v in placed))


def permute_cell(idx: int, perm) -> int:
    x = [(idx >> (2 * i)) & 3 for i in range(4)]
    y = [0] * 4
    for c in range(4):
        y[perm[c]] = x[c]
    return encode(y)


def trace_orbits() -> list[TraceOrbit]:
    """Orbits of supported traces under permutations of the four columns."""
    seen: dict = {}
    traces = [SupportedTrace(s, v) for s in pair_supports() for v in points(2)]
    traces += [SupportedTrace(s, v) for s in triple_supports() for v in points(3)]
    perms = list(itertools.permutations(range(4)))
    orbits = []
    for h in traces:
        if h in seen:
            continue
        orbit = {permute_trace(h, p) for p in perms}
        rep = min(orbit, key=lambda t: (t.support, tuple(sorted(t.values)) != t.values, t.values))
        for t in orbit:
            seen[t] = rep
        orbits.append(TraceOrbit(h.kind, rep, len(orbit)))
    orbits.sort(key=lambda o: (o.kind != "pair", o.multiset))
    npair = sum(o.kind == "pair" for o in orbits)
    if (npair, len(orbits) - npair) != (10, 20):
        raise RuntimeError(f"unexpected orbit counts {npair}, {len(orbits) - npair}")
    return orbits


def trace_instance(h: SupportedTrace, extra=(), forbid: int = 0) -> HittingInstance:
    clauses = set(upper_clauses())
    absent = forbid
    for t in (h, *extra):
        clauses.update(residual_seed_clauses(t))
        absent |= t.extension_mask()
    return HittingInstance(sorted(clauses), forced_absent=absent, name=str(h))


def min_missing_for_trace(h: SupportedTrace) -> SearchResult:
    """Exact minimum |M| for a single present trace; ``optimum is None`` means infeasible."""
    return minimize(trace_instance(h))


@dataclass
class TraceMinimum:
    orbit: TraceOrbit
    result: SearchResult

    @property
    def mu(self) -> Optional[int]:
        return self.result.optimum


def all_trace_minima() -> list[TraceMinimum]:
    return [TraceMinimum(o, min_missing_for_trace(o.representative)) for o in trace_orbits()]


@dataclass
class ThresholdTable:
    rows: dict  # m -> (p(m), t(m))
    inequality_ok: bool
    tight: list = field(default_factory=list)
    mismatches: list = field(default_factory=list)  # (m, computed, reference)

    @property
    def matches_expected(self) -> bool:
        return not self.mismatches

    @property
    def dominated_by_reference(self) -> bool:
        """Computed maxima never exceed the reference table."""
        return all(c[0] <= r[0] and c[1] <= r[1] for _, c, r in self.mismatches)

    @property
    def ok(self) -> bool:
        # the bound only needs the inequality on the computed maxima; a computed
        # row larger than the reference would point at a modelling error
        return self.inequality_ok and self.dominated_by_reference


def _mu_lookup(minima) -> dict:
    out = {}
    for tm in minima:
        out[(tm.orbit.kind, tm.orbit.multiset)] = tm.mu
    return out


def _shape_values(h) -> list[tuple[int, ...]]:
    s = FerrersShape(h)
    return [decode(i, s.d) for i in mask_cells(s.mask)]


def combine_thresholds(minima, m_range=range(33, 64)) -> ThresholdTable:
    """Per-support maxima p(m), t(m) of legal shapes whose values all satisfy mu <= m."""
    mu = _mu_lookup(minima)

    def value_mu(kind, v):
        r = mu[(kind, tuple(sorted(v)))]
        return float("inf") if r is None else r

    pair_shapes = [(sum(h), max((value_mu("pair", v) for v in _shape_values(h)), default=0)) for h in legal_pair_heights()]
    triple_shapes = []
    for h in legal_triple_heights():
        vals = _shape_values(h)
        triple_shapes.append((len(vals), max((value_mu("triple", v) for v in vals), default=0)))
    rows = {}
    ineq = True
    tight = []
    for m in m_range:
        p = max(sz for sz, need in pair_shapes if need <= m)
        t = max(sz for sz, need in triple_shapes if need <= m)
        rows[m] = (p, t)
        lhs, rhs = 300 * 4 * t + 144 * 6 * p, 625 * m
        if lhs > rhs:
            ineq = False
        if lhs == rhs:
            tight.append(m)
    mismatches = [(m, rows[m], expected_row(m)) for m in rows if rows[m] != expected_row(m)]
    return ThresholdTable(rows=rows, inequality_ok=ineq, tight=tight, mismatches=mismatches)


# ---------------------------------------------------------------- critical patterns


def rectangle_mask(i: int, j: int) -> int:
    x = [0, 0, 0, 0]
    x[i] = 2
    x[j] = 2
    return up_mask(encode(x), 4)


def rectangle_min_point(i: int, j: int) -> int:
    x = [0, 0, 0, 0]
    x[i] = 2
    x[j] = 2
    return encode(x)


@dataclass
class PatternCheck:
    name: str
    kind: str  # "minimum" or "forcing"
    expected: Optional[int]
    result: SearchResult

    @property
    def ok(self) -> bool:
        if self.kind == "minimum":
            return self.result.optimum == self.expected
        return not self.result.feasible


def pair_square() -> list[SupportedTrace]:
    return [SupportedTrace((0, 1), (a, b)) for a in (0, 1) for b in (0, 1)]


def triple_slab(axis: int) -> list[SupportedTrace]:
    return [SupportedTrace((0, 1, 2), v) for v in points(3) if v[axis] <= 1]


MIXED_HEIGHTS = ((4, 4, 2, 2), (4, 4, 2, 2), (2, 2, 0, 0), (2, 2, 0, 0))


def mixed_pattern() -> list[SupportedTrace]:
    h = MIXED_HEIGHTS
    return [SupportedTrace((0, 1, 2), (a, b, c)) for a in range(4) for b in range(4) for c in range(h[a][b])]


def pattern_instance(traces, forbid: int = 0, name: str = "") -> HittingInstance:
    inst = trace_instance(traces[0], extra=traces[1:], forbid=forbid)
    inst.name = name
    return inst


def critical_pattern_checks() -> list[PatternCheck]:
    out = []
    sq = pair_square()
    out.append(PatternCheck("pair-square minimum", "minimum", 64, minimize(pattern_instance(sq, name="square"))))
    out.append(
        PatternCheck(
            "pair-square forces R_01",
            "forcing",
            None,
            minimize(pattern_instance(sq, 1 << rectangle_min_point(0, 1), "square-not-R01"), bound=67),
        )
    )
    for axis in range(3):
        slab = triple_slab(axis)
        out.append(PatternCheck(f"slab{axis} minimum", "minimum", 64, minimize(pattern_instance(slab, name=f"slab{axis}"))))
        forb = 1 << rectangle_min_point(axis, 3)
        out.append(
            PatternCheck(
                f"slab{axis} forces R_{axis}3",
                "forcing",
                None,
                minimize(pattern_instance(slab, forb, f"slab{axis}-not-R{axis}3"), bound=67),
            )
        )
    out.append(PatternCheck("mixed minimum", "minimum", 80, minimize(pattern_instance(mixed_pattern(), name="mixed"))))
    return out


# ---------------------------------------------------------------- rectangle extensions


def rectangle_extensions(i: int, j: int, limit: int = 66) -> list[int]:
    """All up-sets M with R_ij <= M and |M| <= limit, as masks (R_ij itself first)."""
    r = rectangle_mask(i, j)
    extra = limit - r.bit_count()
    outside = [c for c in range(256) if not r >> c & 1]
    found = []
    for k in range(extra + 1):
        for cells in itertools.combinations(outside, k):
            m = r | mask_of(cells)
            if mask_is_up_set(m, 4):
                found.append(m)
    return found


@dataclass
class RectangleCase:
    rectangle: tuple[int, int]
    m_mask: int
    t3: int
    p2: int

    @property
    def size(self) -> int:
        return self.m_mask.bit_count()

    @property
    def margin(self) -> int:
        return 300 * self.t3 + 144 * self.p2 - 625 * self.size


@dataclass
class RectangleAudit:
    cases: list[RectangleCase]

    @property
    def worst(self) -> RectangleCase:
        return max(self.cases, key=lambda c: c.margin)

    @property
    def ok(self) -> bool:
        return all(c.margin < 0 for c in self.cases)


def evaluate_case(i: int, j: int, m: int) -> RectangleCase:
    cs = CellSet(4, m)
    t3 = sum(legal_downsets_with_closure(s, cs).max_size for s in triple_supports())
    p2 = sum(legal_downsets_with_closure(s, cs).max_size for s in pair_supports())
    return RectangleCase((i, j), m, t3, p2)


def rectangle_extension_audit() -> RectangleAudit:
    cases = []
    for i, j in itertools.combinations(range(4), 2):
        for m in rectangle_extensions(i, j):
            cases.append(evaluate_case(i, j, m))
    return RectangleAudit(cases)


# ---------------------------------------------------------------- assembly


@dataclass
class NoTopstarReport:
    blocker: UpperBlockerResult
    minima: list[TraceMinimum]
    table: ThresholdTable
    patterns: list[PatternCheck]
    rectangles: RectangleAudit
    universal: tuple
    timings: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return (
            self.blocker.max_present == 48
            and self.blocker.min_blocker == 33
            and self.blocker.ok
            and len(self.minima) == 30
            and all(tm.mu is None or tm.mu >= 33 for tm in self.minima)
            and self.table.ok
            and len(self.patterns) == 9
            and all(p.ok for p in self.patterns)
            and len(self.rectangles.cases) == 72
            and self.rectangles.ok
            and self.universal[2]
        )

    def markers(self) -> dict:
        w = self.rectangles.worst
        return {
            "exact_upper_blocker_branch_bound_ok": self.blocker.ok and self.blocker.min_blocker == 33,
            "upper_blocker_max_present": self.blocker.max_present,
            "upper_blocker_min_blocker": self.blocker.min_blocker,
            "trace_threshold_checks": len(self.minima),
            "critical_pattern_checks": len(self.patterns),
            "rectangle_cases": len(self.rectangles.cases),
            "rectangle_worst_margin": w.margin,
            "threshold_table_matches_reference": self.table.matches_expected,
            "exact_no_topstar_threshold_certificate_ok": self.ok,
        }


def assemble_no_topstar(
    blocker=None, minima=None, patterns=None, rectangles=None
) -> NoTopstarReport:
    timings = {}

    def timed(name, fn):
        t0 = time.perf_counter()
        out = fn()
        timings[name] = round(time.perf_counter() - t0, 3)
        return out

    blocker = blocker or timed("blocker", upper_blocker_minimum)
    minima = minima or timed("minima", all_trace_minima)
    table = timed("table", lambda: combine_thresholds(minima))
    patterns = patterns or timed("patterns", critical_pattern_checks)
    rectangles = rectangles or timed("rectangles", rectangle_extension_audit)
    return NoTopstarReport(blocker, minima, table, patterns, rectangles, universal_bound_ok(), timings)

"""Exhaustive legality audit of pair and triple Ferrers shapes.

A pair shape is legal when no two of its values form an obstruction; a triple
shape is legal when it contains no bad 3-matching.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .clauses import residual_seed_clauses
from .lattice import (
    CellSet,
    FerrersShape,
    SupportedTrace,
    enumerate_height_tuples,
    encode,
    height_masks,
    is_up_set,
    macmahon_box_count,
    mask_cells,
    mask_down_closure,
    points,
    decode,
)


def is_pair_obstruction(a, b) -> bool:
    if a[0] == b[0] or a[1] == b[1]:
        return False
    return any({a[j], b[j]} != {0, 1} for j in range(2))


def is_bad_triple(a, b, c) -> bool:
    for j in range(3):
        if len({a[j], b[j], c[j]}) != 3:
            return False
    return any(({0, 1, 2, 3} - {a[j], b[j], c[j]}).pop() in (0, 1) for j in range(3))


@dataclass(frozen=True)
class PairObstruction:
    a: tuple[int, int]
    b: tuple[int, int]

    def __post_init__(self):
        if not is_pair_obstruction(self.a, self.b):
            raise ValueError(f"not an obstruction: {self.a}, {self.b}")


@dataclass(frozen=True)
class BadTripleMatching:
    a: tuple[int, int, int]
    b: tuple[int, int, int]
    c: tuple[int, int, int]

    def __post_init__(self):
        if not is_bad_triple(self.a, self.b, self.c):
            raise ValueError(f"not a bad matching: {self.a}, {self.b}, {self.c}")

    @property
    def mask(self) -> int:
        return (1 << encode(self.a)) | (1 << encode(self.b)) | (1 << encode(self.c))


def enumerate_pair_obstructions() -> list[PairObstruction]:
    return [PairObstruction(a, b) for a, b in itertools.combinations(points(2), 2) if is_pair_obstruction(a, b)]


@lru_cache(maxsize=None)
def _bad_triples() -> tuple[BadTripleMatching, ...]:
    # each matching is a Latin choice of three distinct values per coordinate;
    # listing them from the first coordinate's sorted values avoids ordered repeats
    out = []
    for first in itertools.combinations(range(4), 3):
        for p1 in itertools.permutations(range(4), 3):
            for p2 in itertools.permutations(range(4), 3):
                trip = [(first[t], p1[t], p2[t]) for t in range(3)]
                if is_bad_triple(*trip):
                    out.append(BadTripleMatching(*trip))
    out.sort(key=lambda m: sorted(encode(p) for p in (m.a, m.b, m.c)))
    return tuple(out)


def enumerate_bad_triples() -> list[BadTripleMatching]:
    return list(_bad_triples())


def is_legal_pair_mask(mask: int) -> bool:
    cells = [decode(i, 2) for i in mask_cells(mask)]
    return not any(is_pair_obstruction(a, b) for a, b in itertools.combinations(cells, 2))


@lru_cache(maxsize=None)
def minimal_forbidden_masks() -> tuple[int, ...]:
    """Inclusion-minimal down-closures of the bad matchings in [4]^3.

    A down-set contains a bad matching iff it contains one of these masks.
    """
    closures = sorted({mask_down_closure(m.mask, 3) for m in _bad_triples()}, key=lambda f: (f.bit_count(), f))
    minimal: list[int] = []
    for f in closures:
        if not any(g & ~f == 0 for g in minimal):
            minimal.append(f)
    return tuple(minimal)


def is_legal_triple_mask(mask: int) -> bool:
    """Legality of a triple down-set mask."""
    return not any(f & ~mask == 0 for f in minimal_forbidden_masks())


@dataclass
class PairAuditReport:
    downsets_checked: int
    legal_count: int
    max_legal_size: int
    legal_shapes: list[FerrersShape] = field(default_factory=list)

    def markers(self) -> dict:
        return {
            "pair_ferrers_downsets_checked": self.downsets_checked,
            "pair_ferrers_legal_downsets": self.legal_count,
            "pair_ferrers_max_legal_size": self.max_legal_size,
        }


@dataclass
class TripleAuditReport:
    downsets_checked: int
    bad_matchings: int
    legal_count: int
    max_legal_size: int
    equality_diagrams: list[FerrersShape] = field(default_factory=list)
    macmahon_count: int = 0

    def markers(self) -> dict:
        return {
            "triple_ferrers_downsets_checked": self.downsets_checked,
            "triple_ferrers_bad_matchings": self.bad_matchings,
            "triple_ferrers_legal_downsets": self.legal_count,
            "triple_ferrers_max_legal_size": self.max_legal_size,
            "triple_ferrers_equality_diagrams": len(self.equality_diagrams),
            "triple_ferrers_macmahon_count": self.macmahon_count,
        }


@lru_cache(maxsize=None)
def legal_pair_heights() -> tuple[tuple[int, ...], ...]:
    return tuple(h for h in enumerate_height_tuples(2) if is_legal_pair_mask(FerrersShape(h).mask))


def audit_pairs() -> PairAuditReport:
    shapes = enumerate_height_tuples(2)
    legal = [FerrersShape(h) for h in legal_pair_heights()]
    return PairAuditReport(
        downsets_checked=len(shapes),
        legal_count=len(legal),
        max_legal_size=max(s.size for s in legal),
        legal_shapes=legal,
    )


@lru_cache(maxsize=None)
def _triple_table():
    heights = enumerate_height_tuples(3)
    masks = np.array(height_masks(3), dtype=np.uint64)
    ok = np.ones(len(masks), dtype=bool)
    for f in minimal_forbidden_masks():
        fm = np.uint64(f)
        ok &= (masks & fm) != fm
    sizes = np.fromiter((sum(map(sum, h)) for h in heights), dtype=np.int64, count=len(heights))
    return heights, masks, ok, sizes


def legal_triple_heights() -> list[tuple]:
    heights, _, ok, _ = _triple_table()
    return [heights[i] for i in np.flatnonzero(ok)]


def audit_triples() -> TripleAuditReport:
    heights, _, ok, sizes = _triple_table()
    best = int(sizes[ok].max())
    eq = [FerrersShape(heights[i]) for i in np.flatnonzero(ok & (sizes == best))]
    return TripleAuditReport(
        downsets_checked=len(heights),
        bad_matchings=len(_bad_triples()),
        legal_count=int(ok.sum()),
        max_legal_size=best,
        equality_diagrams=eq,
        macmahon_count=macmahon_box_count(4, 4, 4),
    )


@dataclass
class ClosureBound:
    kind: str
    support: tuple[int, ...]
    max_size: int
    allowed_values: list[tuple[int, ...]]
    best_shapes: list[FerrersShape]


def allowed_values_mask(support: tuple[int, ...], m_mask: int) -> int:
    """Values whose trace passes closure and has every residual seed clause hit by ``M``."""
    d = len(support)
    out = 0
    for idx, v in enumerate(points(d)):
        h = SupportedTrace(tuple(support), v)
        if h.extension_mask() & m_mask:
            continue
        if all(any(m_mask >> q & 1 for q in cl) for cl in residual_seed_clauses(h)):
            out |= 1 << idx
    return out


def legal_downsets_with_closure(support, m: CellSet) -> ClosureBound:
    """Largest legal Ferrers shape on ``support`` whose values are all admissible against ``m``."""
    if m.d != 4 or not is_up_set(m):
        raise ValueError("M must be an up-set of [4]^4")
    support = tuple(support)
    if len(support) not in (2, 3):
        raise ValueError("support must have 2 or 3 columns")
    allowed = allowed_values_mask(support, m.mask)
    d = len(support)
    if d == 2:
        cands = [(h, FerrersShape(h).mask) for h in legal_pair_heights()]
        fits = [h for h, mk in cands if mk & ~allowed == 0]
    else:
        heights, masks, ok, _ = _triple_table()
        fit = ok & ((masks & np.uint64(~allowed & ((1 << 64) - 1))) == 0)
        fits = [heights[i] for i in np.flatnonzero(fit)]
    shapes = [FerrersShape(h) for h in fits]
    best = max(s.size for s in shapes)
    return ClosureBound(
        kind="pair" if d == 2 else "triple",
        support=support,
        max_size=best,
        allowed_values=[decode(i, d) for i in mask_cells(allowed)],
        best_shapes=[s for s in shapes if s.size == best],
    )


def universal_bound_ok() -> tuple[int, int, bool]:
    """Ferrers-only bound for |M| >= 67: 300*4*32 + 144*6*4 against 625*67."""
    lhs = 300 * 4 * 32 + 144 * 6 * 4
    rhs = 625 * 67
    return lhs, rhs, lhs < rhs

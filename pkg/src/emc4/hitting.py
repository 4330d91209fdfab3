"""Exact minimum up-set hitting search over [4]^4.

The search state is a pair ``(M, F)``: ``M`` is the up-set built so far (a union
of principal up-closures) and ``F`` is a down-closed set of cells that may not
enter ``M``. Branching on an unhit clause with admissible cells a_1..a_k
creates k disjoint children: child i adds up(a_i) and forbids down(a_1..a_{i-1}).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Optional

from .clauses import UNIT_TOP_MASK
from .lattice import down_mask, mask_cells, mask_down_closure, mask_is_up_set, mask_of, mask_up_closure, up_mask

INFEASIBLE = None


@dataclass
class HittingInstance:
    clauses: list[tuple[int, ...]]
    forced_absent: int = 0
    forbidden: int = UNIT_TOP_MASK
    initial: int = 0
    name: str = ""

    def __post_init__(self):
        for cl in self.clauses:
            if len(set(cl)) != 3:
                raise ValueError(f"clause must have 3 distinct cells: {cl}")

    @property
    def blocked(self) -> int:
        return mask_down_closure(self.forced_absent | self.forbidden, 4)

    def dead_clauses(self) -> list[tuple[int, ...]]:
        """Clauses every cell of which is blocked; their presence makes the instance infeasible."""
        b = self.blocked
        return [cl for cl in self.clauses if mask_of(cl) & ~b == 0]

    def is_feasible_point(self, m: int) -> bool:
        if not mask_is_up_set(m, 4) or m & self.blocked or m & self.initial != self.initial:
            return False
        return all(m & mask_of(cl) for cl in self.clauses)


@dataclass
class SearchResult:
    optimum: Optional[int]
    witness: Optional[int]
    nodes: int
    clauses_in: int
    clauses_used: int
    bound: Optional[int] = None
    transcript: dict = field(default_factory=dict)

    @property
    def feasible(self) -> bool:
        return self.optimum is not None


def reduce_clauses(clauses: Iterable[tuple[int, ...]]) -> list[tuple[int, ...]]:
    """Drop every clause implied by another one.

    Clause K2 implies K1 when each cell of K2 lies below some cell of K1: an
    up-set hitting K2 then also hits K1. Implication is a preorder, so one pass
    keeping the current minimal elements is enough.
    """
    cls = sorted(set(tuple(sorted(c)) for c in clauses))
    entries = []
    for c in cls:
        dk = down_mask(c[0], 4) | down_mask(c[1], 4) | down_mask(c[2], 4)
        entries.append((dk.bit_count(), c, mask_of(c), dk))
    # clauses with small down-closures imply the most, so visit them first
    entries.sort()
    kept: list = []
    for _, c, cm, dk in entries:
        if any(km & ~dk == 0 for _, km, _ in kept):
            continue
        kept = [k for k in kept if cm & ~k[2]]
        kept.append((c, cm, dk))
    return sorted(c for c, _, _ in kept)


class BranchAndBound:
    def __init__(self, inst: HittingInstance, bound: Optional[int] = None, reduce: bool = True):
        self.inst = inst
        used = reduce_clauses(inst.clauses) if reduce else sorted(set(inst.clauses))
        self.clause_masks = [mask_of(c) for c in used]
        self.n_in = len(set(inst.clauses))
        self.n_used = len(used)
        self.bound = bound
        self.best = bound if bound is not None else 257
        self.witness = None
        self.nodes = 0

    def _lower_bound(self, unhit: list[int]) -> int:
        # clauses with pairwise disjoint admissible sets each need a new cell
        used = 0
        k = 0
        for a in unhit:
            if a & used == 0:
                used |= a
                k += 1
        return k

    def _search(self, m: int, f: int):
        self.nodes += 1
        while True:
            unhit = []
            changed = False
            for c in self.clause_masks:
                if c & m:
                    continue
                a = c & ~f
                if a == 0:
                    return
                if a & (a - 1) == 0:
                    m |= up_mask(a.bit_length() - 1, 4)
                    if m & f:
                        return
                    changed = True
                    continue
                unhit.append(a)
            if not changed:
                break
        size = m.bit_count()
        if not unhit:
            if size < self.best:
                self.best = size
                self.witness = m
            return
        if size + self._lower_bound(unhit) >= self.best:
            return
        pick = min(unhit, key=lambda a: a.bit_count())
        cells = sorted(mask_cells(pick), key=lambda i: ((up_mask(i, 4) & ~m).bit_count(), i))
        fk = f
        for i in cells:
            u = up_mask(i, 4)
            if u & fk == 0 and (m | u).bit_count() < self.best:
                self._search(m | u, fk)
            fk |= down_mask(i, 4)

    def solve(self) -> SearchResult:
        f = self.inst.blocked
        m0 = mask_up_closure(self.inst.initial, 4)
        if m0 & f == 0:
            self._search(m0, f)
        opt = self.best if self.witness is not None else None
        return SearchResult(
            optimum=opt,
            witness=self.witness,
            nodes=self.nodes,
            clauses_in=self.n_in,
            clauses_used=self.n_used,
            bound=self.bound,
            transcript={
                "instance": self.inst.name,
                "nodes": self.nodes,
                "clauses": self.n_in,
                "clauses_after_reduction": self.n_used,
                "bound": self.bound,
                "optimum": opt,
                "witness": list(mask_cells(self.witness)) if self.witness is not None else None,
            },
        )


def minimize(inst: HittingInstance, bound: Optional[int] = None) -> SearchResult:
    """Minimum |M| for the instance, searching only sizes strictly below ``bound`` if given."""
    return BranchAndBound(inst, bound=bound).solve()

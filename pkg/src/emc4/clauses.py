"""Hitting clauses over [4]^4: upper 3-matchings and residual seed matchings.

A clause is a sorted triple of cell indices of [4]^4. An up-set ``M`` hits a
clause when it contains at least one of its three cells.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache

from .lattice import SupportedTrace, encode, mask_of

Clause = tuple[int, int, int]

UNIT_TOP_POINTS = ((3, 1, 1, 1), (1, 3, 1, 1), (1, 1, 3, 1), (1, 1, 1, 3))
UNIT_TOP = tuple(encode(p) for p in UNIT_TOP_POINTS)
UNIT_TOP_MASK = mask_of(UNIT_TOP)

_PERMS3 = tuple(itertools.permutations((1, 2, 3)))


@lru_cache(maxsize=None)
def upper_clauses() -> tuple[Clause, ...]:
    """The 216 upper 3-matchings (t, p1(t), p2(t), p3(t)), t = 1, 2, 3."""
    out = set()
    for p1, p2, p3 in itertools.product(_PERMS3, repeat=3):
        out.add(tuple(sorted(encode((t, p1[t - 1], p2[t - 1], p3[t - 1])) for t in (1, 2, 3))))
    return tuple(sorted(out))


@dataclass(frozen=True)
class Seed:
    column: int
    value: int


def seeds_for(h: SupportedTrace) -> list[Seed]:
    """Seeds (column j, low value u) with u not used by the trace in column j."""
    return [Seed(j, u) for j in range(4) for u in (0, 1) if h.value_at(j) != u]


def available_values(h: SupportedTrace, seed: Seed) -> list[tuple[int, ...]]:
    avail = []
    for c in range(4):
        vals = set(range(4))
        v = h.value_at(c)
        if v is not None:
            vals.discard(v)
        if c == seed.column:
            vals.discard(seed.value)
        avail.append(tuple(sorted(vals)))
    return avail


def seed_matchings(h: SupportedTrace, seed: Seed) -> list[Clause]:
    """Labelled residual matchings for one seed, in generation order (duplicates kept).

    Each coordinate picks three available values; coordinates 1..3 are paired
    against the sorted choice in coordinate 0 by permutations.
    """
    avail = available_values(h, seed)
    if any(len(a) < 3 for a in avail):
        return []
    out = []
    choices = [list(itertools.combinations(a, 3)) for a in avail]
    for subs in itertools.product(*choices):
        for perms in itertools.product(*[list(itertools.permutations(s)) for s in subs[1:]]):
            quads = (encode((subs[0][t],) + tuple(p[t] for p in perms)) for t in range(3))
            out.append(tuple(sorted(quads)))
    return out


@lru_cache(maxsize=None)
def residual_seed_clauses(h: SupportedTrace) -> tuple[Clause, ...]:
    """All residual seed matchings of ``h`` over every admissible seed, deduplicated."""
    out = set()
    for seed in seeds_for(h):
        out.update(seed_matchings(h, seed))
    return tuple(sorted(out))


def clause_mask(clause) -> int:
    return mask_of(clause)

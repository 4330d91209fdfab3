"""Points, cell sets and Ferrers shapes on the grids [4]^2, [4]^3, [4]^4.

Cells are addressed by the little-endian base-4 index ``sum(x[i] * 4**i)``.
A :class:`CellSet` stores membership as a Python int bitmask, so unions,
intersections and subset tests are single integer operations.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Iterator, Sequence

VALUES = (0, 1, 2, 3)
DIMS = (2, 3, 4)


def encode(x: Sequence[int]) -> int:
    idx = 0
    for i, v in enumerate(x):
        if not 0 <= v <= 3:
            raise ValueError(f"coordinate out of range: {x!r}")
        idx += v << (2 * i)
    return idx


def decode(idx: int, d: int) -> tuple[int, ...]:
    if not 0 <= idx < 4 ** d:
        raise ValueError(f"index {idx} out of range for d={d}")
    return tuple((idx >> (2 * i)) & 3 for i in range(d))


@lru_cache(maxsize=None)
def points(d: int) -> tuple[tuple[int, ...], ...]:
    """All points of [4]^d in canonical index order."""
    return tuple(decode(i, d) for i in range(4 ** d))


@lru_cache(maxsize=None)
def full_mask(d: int) -> int:
    return (1 << 4 ** d) - 1


@lru_cache(maxsize=None)
def _below_top(d: int) -> tuple[int, ...]:
    # per coordinate: mask of cells whose i-th coordinate is < 3
    out = []
    for i in range(d):
        m = 0
        for idx, x in enumerate(points(d)):
            if x[i] < 3:
                m |= 1 << idx
        out.append(m)
    return tuple(out)


@lru_cache(maxsize=None)
def _above_bottom(d: int) -> tuple[int, ...]:
    out = []
    for i in range(d):
        m = 0
        for idx, x in enumerate(points(d)):
            if x[i] > 0:
                m |= 1 << idx
        out.append(m)
    return tuple(out)


def mask_is_up_set(mask: int, d: int) -> bool:
    for i, low in enumerate(_below_top(d)):
        if ((mask & low) << (1 << 2 * i)) & ~mask:
            return False
    return True


def mask_is_down_set(mask: int, d: int) -> bool:
    for i, high in enumerate(_above_bottom(d)):
        if ((mask & high) >> (1 << 2 * i)) & ~mask:
            return False
    return True


def mask_up_closure(mask: int, d: int) -> int:
    for i, low in enumerate(_below_top(d)):
        step = 1 << 2 * i
        for _ in range(3):
            mask |= (mask & low) << step
    return mask


def mask_down_closure(mask: int, d: int) -> int:
    for i, high in enumerate(_above_bottom(d)):
        step = 1 << 2 * i
        for _ in range(3):
            mask |= (mask & high) >> step
    return mask


def mask_cells(mask: int) -> Iterator[int]:
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def mask_of(indices: Iterable[int]) -> int:
    m = 0
    for i in indices:
        m |= 1 << i
    return m


@lru_cache(maxsize=None)
def up_mask(idx: int, d: int) -> int:
    """Bitmask of the principal up-closure of cell ``idx``."""
    return mask_up_closure(1 << idx, d)


@lru_cache(maxsize=None)
def down_mask(idx: int, d: int) -> int:
    return mask_down_closure(1 << idx, d)


@dataclass(frozen=True)
class LatticePoint:
    coords: tuple[int, ...]

    def __post_init__(self):
        if len(self.coords) not in DIMS:
            raise ValueError(f"dimension must be 2, 3 or 4, got {len(self.coords)}")
        if any(v not in VALUES for v in self.coords):
            raise ValueError(f"coordinates must lie in 0..3: {self.coords!r}")

    @property
    def d(self) -> int:
        return len(self.coords)

    @property
    def index(self) -> int:
        return encode(self.coords)

    @classmethod
    def from_index(cls, idx: int, d: int) -> "LatticePoint":
        return cls(decode(idx, d))

    def __le__(self, other: "LatticePoint") -> bool:
        return self.d == other.d and all(a <= b for a, b in zip(self.coords, other.coords))


@dataclass(frozen=True)
class CellSet:
    """A subset of [4]^d held as a bitmask over canonical cell indices."""

    d: int
    mask: int = 0

    def __post_init__(self):
        if self.d not in DIMS:
            raise ValueError(f"unsupported dimension {self.d}")
        if self.mask < 0 or self.mask >> 4 ** self.d:
            raise ValueError("mask has bits outside the universe")

    @classmethod
    def from_points(cls, d: int, pts: Iterable[Sequence[int]]) -> "CellSet":
        return cls(d, mask_of(encode(p) for p in pts))

    @classmethod
    def full(cls, d: int) -> "CellSet":
        return cls(d, full_mask(d))

    def __contains__(self, x) -> bool:
        idx = x if isinstance(x, int) else encode(x.coords if isinstance(x, LatticePoint) else x)
        return bool(self.mask >> idx & 1)

    def __len__(self) -> int:
        return self.mask.bit_count()

    def __iter__(self) -> Iterator[int]:
        return mask_cells(self.mask)

    def points(self) -> list[tuple[int, ...]]:
        return [decode(i, self.d) for i in self]

    def _check(self, other: "CellSet"):
        if other.d != self.d:
            raise ValueError("cell sets live in different universes")

    def __or__(self, other: "CellSet") -> "CellSet":
        self._check(other)
        return CellSet(self.d, self.mask | other.mask)

    def __and__(self, other: "CellSet") -> "CellSet":
        self._check(other)
        return CellSet(self.d, self.mask & other.mask)

    def __sub__(self, other: "CellSet") -> "CellSet":
        self._check(other)
        return CellSet(self.d, self.mask & ~other.mask)

    def complement(self) -> "CellSet":
        return CellSet(self.d, full_mask(self.d) & ~self.mask)

    def issubset(self, other: "CellSet") -> bool:
        self._check(other)
        return self.mask & ~other.mask == 0

    def serialize(self) -> list[int]:
        return list(self)


def is_up_set(s: CellSet) -> bool:
    return mask_is_up_set(s.mask, s.d)


def is_down_set(s: CellSet) -> bool:
    return mask_is_down_set(s.mask, s.d)


def principal_up_closure(x: LatticePoint) -> CellSet:
    return CellSet(x.d, up_mask(x.index, x.d))


def principal_down_closure(x: LatticePoint) -> CellSet:
    return CellSet(x.d, down_mask(x.index, x.d))


def up_closure(s: CellSet) -> CellSet:
    return CellSet(s.d, mask_up_closure(s.mask, s.d))


def down_closure(s: CellSet) -> CellSet:
    return CellSet(s.d, mask_down_closure(s.mask, s.d))


@dataclass(frozen=True)
class FerrersShape:
    """Monotone heights describing a down-set of [4]^2 (vector) or [4]^3 (4x4 matrix).

    For ``d == 2`` the cells are ``(a, c)`` with ``c < heights[a]``; for ``d == 3``
    they are ``(a, b, c)`` with ``c < heights[a][b]``.
    """

    heights: tuple

    @property
    def d(self) -> int:
        return 3 if isinstance(self.heights[0], tuple) else 2

    def __post_init__(self):
        h = self.heights
        if len(h) != 4:
            raise ValueError("heights must have 4 rows")
        if isinstance(h[0], tuple):
            if any(len(r) != 4 for r in h):
                raise ValueError("height matrix must be 4x4")
            flat = [v for r in h for v in r]
            rows_ok = all(h[a][b] >= h[a][b + 1] for a in range(4) for b in range(3))
            cols_ok = all(h[a][b] >= h[a + 1][b] for a in range(3) for b in range(4))
            if not (rows_ok and cols_ok):
                raise ValueError(f"height matrix is not monotone: {h!r}")
        else:
            flat = list(h)
            if any(h[a] < h[a + 1] for a in range(3)):
                raise ValueError(f"height vector is not nonincreasing: {h!r}")
        if any(not 0 <= v <= 4 for v in flat):
            raise ValueError("heights must lie in 0..4")

    @property
    def size(self) -> int:
        if self.d == 2:
            return sum(self.heights)
        return sum(sum(r) for r in self.heights)

    @property
    def mask(self) -> int:
        return _shape_mask(self.heights)

    def serialize(self) -> list:
        if self.d == 2:
            return list(self.heights)
        return [list(r) for r in self.heights]


@lru_cache(maxsize=None)
def _shape_mask(heights) -> int:
    m = 0
    if isinstance(heights[0], tuple):
        for a in range(4):
            for b in range(4):
                for c in range(heights[a][b]):
                    m |= 1 << encode((a, b, c))
    else:
        for a in range(4):
            for c in range(heights[a]):
                m |= 1 << encode((a, c))
    return m


def expand_ferrers(shape: FerrersShape) -> CellSet:
    return CellSet(shape.d, shape.mask)


def _nonincreasing_vectors(bound: Sequence[int]) -> Iterator[tuple[int, ...]]:
    # length-4 nonincreasing vectors with v[k] <= bound[k], lexicographic ascending
    def rec(k, prev, acc):
        if k == 4:
            yield tuple(acc)
            return
        for v in range(0, min(prev, bound[k]) + 1):
            acc.append(v)
            yield from rec(k + 1, v, acc)
            acc.pop()

    yield from rec(0, 4, [])


def enumerate_height_tuples(d: int) -> list[tuple]:
    """Height vectors (d=2) or matrices (d=3), lexicographic on the row-major reading."""
    if d == 2:
        return list(_nonincreasing_vectors((4, 4, 4, 4)))
    if d != 3:
        raise ValueError("Ferrers enumeration is defined for d in {2, 3}")
    out = []

    def rec(rows):
        if len(rows) == 4:
            out.append(tuple(rows))
            return
        bound = rows[-1] if rows else (4, 4, 4, 4)
        for r in _nonincreasing_vectors(bound):
            rows.append(r)
            rec(rows)
            rows.pop()

    rec([])
    return out


def enumerate_ferrers(d: int) -> list[FerrersShape]:
    return [FerrersShape(h) for h in enumerate_height_tuples(d)]


def height_masks(d: int) -> list[int]:
    return [_shape_mask(h) for h in enumerate_height_tuples(d)]


def macmahon_box_count(a: int, b: int, c: int) -> int:
    """Number of plane partitions inside an a x b x c box (MacMahon's product)."""
    from fractions import Fraction

    num = Fraction(1)
    for i in range(1, a + 1):
        for j in range(1, b + 1):
            for k in range(1, c + 1):
                num *= Fraction(i + j + k - 1, i + j + k - 2)
    assert num.denominator == 1
    return int(num)


@dataclass(frozen=True)
class SupportedTrace:
    """A wide pair or wide triple: values placed on a sorted subset of the 4 columns."""

    support: tuple[int, ...]
    values: tuple[int, ...]

    def __post_init__(self):
        if len(self.support) not in (2, 3) or len(self.support) != len(self.values):
            raise ValueError("support and values must both have length 2 or 3")
        if tuple(sorted(set(self.support))) != self.support or not set(self.support) <= {0, 1, 2, 3}:
            raise ValueError(f"support must be a sorted subset of columns 0..3: {self.support!r}")
        if any(v not in VALUES for v in self.values):
            raise ValueError("trace values must lie in 0..3")

    @property
    def kind(self) -> str:
        return "pair" if len(self.support) == 2 else "triple"

    def value_at(self, col: int):
        for c, v in zip(self.support, self.values):
            if c == col:
                return v
        return None

    def extension_mask(self) -> int:
        """Bitmask in [4]^4 of the wide quads containing this trace."""
        free = [c for c in range(4) if c not in self.support]
        m = 0
        for fill in itertools.product(VALUES, repeat=len(free)):
            q = [0] * 4
            for c, v in zip(self.support, self.values):
                q[c] = v
            for c, v in zip(free, fill):
                q[c] = v
            m |= 1 << encode(q)
        return m


def pair_supports() -> list[tuple[int, int]]:
    return list(itertools.combinations(range(4), 2))


def triple_supports() -> list[tuple[int, int, int]]:
    return list(itertools.combinations(range(4), 3))


def all_traces() -> list[SupportedTrace]:
    out = []
    for sup in triple_supports():
        out.extend(SupportedTrace(sup, v) for v in points(3))
    for sup in pair_supports():
        out.extend(SupportedTrace(sup, v) for v in points(2))
    return out

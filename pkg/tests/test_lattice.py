import itertools
from math import comb

from hypothesis import given, strategies as st

from emc4.lattice import (
    CellSet,
    FerrersShape,
    LatticePoint,
    decode,
    down_closure,
    encode,
    enumerate_ferrers,
    enumerate_height_tuples,
    expand_ferrers,
    full_mask,
    is_down_set,
    is_up_set,
    macmahon_box_count,
    mask_down_closure,
    mask_is_down_set,
    mask_is_up_set,
    mask_up_closure,
    points,
    principal_down_closure,
    principal_up_closure,
    up_closure,
)

dims = st.sampled_from((2, 3, 4))


@st.composite
def cellsets(draw, d=None):
    d = d or draw(dims)
    mask = draw(st.integers(min_value=0, max_value=full_mask(d)))
    return CellSet(d, mask)


def brute_up(mask, d):
    cells = [decode(i, d) for i in range(4**d) if mask >> i & 1]
    return sum(1 << encode(y) for y in points(d) if any(all(a <= b for a, b in zip(x, y)) for x in cells))


@given(dims.flatmap(lambda d: st.tuples(st.just(d), st.lists(st.integers(0, 3), min_size=d, max_size=d))))
def test_encode_decode_roundtrip(dx):
    d, x = dx
    assert decode(encode(x), d) == tuple(x)


def test_encoding_is_little_endian():
    assert encode((1, 0, 0, 0)) == 1
    assert encode((0, 1, 0, 0)) == 4
    assert encode((3, 3, 3, 3)) == 255


@given(cellsets())
def test_complement_of_up_set_is_down_set(s):
    u = up_closure(s)
    assert is_up_set(u)
    assert is_down_set(u.complement())
    dn = down_closure(s)
    assert is_down_set(dn) and is_up_set(dn.complement())


@given(cellsets(d=3))
def test_up_closure_matches_brute_force(s):
    assert mask_up_closure(s.mask, 3) == brute_up(s.mask, 3)


@given(cellsets())
def test_closures_are_idempotent_and_extensive(s):
    u = mask_up_closure(s.mask, s.d)
    assert u & s.mask == s.mask
    assert mask_up_closure(u, s.d) == u
    dn = mask_down_closure(s.mask, s.d)
    assert mask_down_closure(dn, s.d) == dn


@given(dims.flatmap(lambda d: st.lists(st.integers(0, 3), min_size=d, max_size=d)))
def test_principal_closures_are_boxes(x):
    p = LatticePoint(tuple(x))
    up = principal_up_closure(p)
    down = principal_down_closure(p)
    n_up = n_down = 1
    for v in x:
        n_up *= 4 - v
        n_down *= v + 1
    assert len(up) == n_up and len(down) == n_down
    assert (up & down).points() == [tuple(x)]


def test_up_set_predicate_rejects_non_up_set():
    s = CellSet.from_points(2, [(0, 0)])
    assert not is_up_set(s)
    assert mask_is_up_set(full_mask(2), 2) and mask_is_down_set(0, 2)


def test_pair_ferrers_count_is_lattice_path_count():
    # down-sets of a 4x4 grid are lattice paths: C(8, 4)
    assert len(enumerate_height_tuples(2)) == comb(8, 4) == 70


def test_triple_ferrers_count_matches_macmahon():
    assert len(enumerate_height_tuples(3)) == macmahon_box_count(4, 4, 4) == 232848


def test_small_box_macmahon_matches_brute_force():
    # plane partitions in a 2x2x2 box, counted directly
    count = 0
    for a, b, c, d in itertools.product(range(3), repeat=4):
        if a >= b and a >= c and b >= d and c >= d:
            count += 1
    assert macmahon_box_count(2, 2, 2) == count == 20


def test_every_ferrers_shape_expands_to_a_down_set():
    for shape in enumerate_ferrers(2):
        cs = expand_ferrers(shape)
        assert is_down_set(cs)
        assert len(cs) == shape.size


def test_ferrers_shape_rejects_increasing_heights():
    import pytest

    with pytest.raises(ValueError):
        FerrersShape((1, 2, 0, 0))

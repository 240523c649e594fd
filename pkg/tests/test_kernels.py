import random
from array import array
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from geol import _pykernels as py
from geol import kernels

try:
    from geol import _ckernels as cy
except ImportError:  # extension not built
    cy = None

needs_cy = pytest.mark.skipif(cy is None, reason="compiled kernels not built")

small = st.integers(-8, 8).map(float)
anyf = st.floats(-1e3, 1e3, allow_nan=False, allow_infinity=False)


def test_backend_reported():
    assert kernels.BACKEND in ("cython", "python")


def test_orient_near_degenerate_is_exact():
    # classic failure case for naive float orientation
    for i in range(256):
        x = 0.5 + i * 2.0 ** -53
        o = kernels.orient2d(x, x, 12.0, 12.0, 24.0, 24.0)
        exact = py.orient_exact(x, x, 12.0, 12.0, 24.0, 24.0)
        assert o == exact


@given(anyf, anyf, anyf, anyf, anyf, anyf)
def test_orient_matches_exact(ax, ay, bx, by, cx, cy):
    assert kernels.orient2d(ax, ay, bx, by, cx, cy) == py.orient_exact(ax, ay, bx, by, cx, cy)


def test_segment_kinds():
    assert kernels.seg_intersection(0, 0, 2, 2, 0, 2, 2, 0) == (kernels.CROSS, 1.0, 1.0)
    assert kernels.seg_intersection(0, 0, 2, 0, 1, 0, 1, 5)[0] == kernels.TOUCH
    assert kernels.seg_intersection(0, 0, 2, 0, 1, 0, 3, 0) == (kernels.OVERLAP, 1, 0, 2, 0)
    assert kernels.seg_intersection(0, 0, 1, 0, 0, 1, 1, 1) == (kernels.NONE,)


def test_point_in_ring():
    ring = array("d", [0, 0, 4, 0, 4, 4, 0, 4, 0, 0])
    assert kernels.point_in_ring(2, 2, ring) == 1
    assert kernels.point_in_ring(4, 2, ring) == 0
    assert kernels.point_in_ring(0, 0, ring) == 0
    assert kernels.point_in_ring(5, 2, ring) == -1
    assert kernels.point_in_ring(2, 0, [0, 0, 4, 0, 4, 4, 0, 4, 0, 0]) == 0


def _segs(rng, n):
    return [float(rng.randint(0, 6)) for _ in range(4 * n)]


@needs_cy
@settings(max_examples=200, deadline=None)
@given(st.lists(small, min_size=8, max_size=8))
def test_seg_intersection_parity(v):
    assert cy.seg_intersection(*v) == py.seg_intersection(*v)


@needs_cy
@settings(max_examples=100, deadline=None)
@given(st.integers(0, 10 ** 9))
def test_bulk_kernel_parity(seed):
    rng = random.Random(seed)
    a, b = _segs(rng, rng.randint(1, 8)), _segs(rng, rng.randint(1, 8))
    assert cy.split_segments(array("d", a), b) == py.split_segments(a, b)
    assert cy.intersecting_pairs(a + b) == py.intersecting_pairs(a + b)
    ring = a[:2] + b + a[:2]
    for _ in range(10):
        x, y = rng.randint(0, 6) / 2, rng.randint(0, 6) / 2
        assert cy.point_in_ring(x, y, ring) == py.point_in_ring(x, y, ring)
        assert cy.point_on_segments(x, y, a) == py.point_on_segments(x, y, a)


def test_split_marks_overlap_direction():
    pieces, nodes = kernels.split_segments([0, 0, 4, 0], [1, 0, 3, 0, 4, 1, 4, -1])
    assert [p[2] for p in pieces] == [0, 1, 0]
    assert (4.0, 0.0) in [tuple(map(float, n)) for n in nodes]
    pieces, _ = kernels.split_segments([0, 0, 4, 0], [3, 0, 1, 0])
    assert [p[2] for p in pieces] == [0, -1, 0]


def test_snap_merges_close_breakpoints():
    eps = py.SNAP_EPS / 10
    pieces, _ = kernels.split_segments([0, 0, 1, 0], [0.5, -1, 0.5, 1, 0.5 + eps, -1, 0.5 + eps, 1])
    assert len(pieces) == 2
    assert Fraction(pieces[0][0]) < Fraction(1, 2)

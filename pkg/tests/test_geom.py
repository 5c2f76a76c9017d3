import math
import random

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from ambispot.geom import (
    AxisAlignedBox,
    ConvexPolygon,
    GeometryError,
    Point,
    area,
    center,
    external_rect,
    intersection_area,
    iou,
    nms,
    scale,
)
from oracles import box_iou_matrix, mc_intersection_area, nms_reference, random_convex_quad

UNIT = ConvexPolygon(((0, 0), (1, 0), (1, 1), (0, 1)))


def square(x0, y0, side=1.0):
    return ConvexPolygon.rect(x0, y0, x0 + side, y0 + side)


# construction


def test_clockwise_input_is_reoriented():
    cw = ConvexPolygon(((0, 0), (0, 1), (1, 1), (1, 0)))
    assert area(cw) == 1.0
    assert cw.vertices == (Point(1, 0), Point(1, 1), Point(0, 1), Point(0, 0))


@pytest.mark.parametrize(
    "pts",
    [
        ((0, 0), (1, 0)),
        ((0, 0), (1, 0), (2, 0)),
        ((0, 0), (1, 0), (1, 0), (0, 1)),
        ((0, 0), (2, 0), (1, 0.5), (2, 2), (0, 2)),
        ((0, 0), (1, 0), (float("nan"), 1)),
    ],
)
def test_invalid_polygons_rejected(pts):
    with pytest.raises(GeometryError):
        ConvexPolygon(pts)


def test_inverted_box_rejected():
    with pytest.raises(GeometryError):
        AxisAlignedBox(1, 0, 0, 1)


# area / center / scale / external_rect


def test_area_examples():
    assert area(UNIT) == 1.0
    assert area(ConvexPolygon(((0, 0), (2, 0), (0, 2)))) == 2.0
    for k in (0.5, 3.0, 7.25):
        assert area(UNIT.scaled(k)) == pytest.approx(k * k)


def test_center_examples():
    assert center(UNIT) == (0.5, 0.5)
    assert center(AxisAlignedBox(0, 0, 4, 2)) == (2, 1)
    s = math.sqrt(0.5)
    rotated = ConvexPolygon(((s, 0), (0, s), (-s, 0), (0, -s)))
    assert center(rotated) == pytest.approx((0, 0))


def test_scale_examples():
    assert scale(UNIT) == 1.0
    assert scale(square(0, 0, 4)) == 4.0
    assert scale(ConvexPolygon.rect(0, 0, 2, 8)) == 4.0
    assert scale(AxisAlignedBox(0, 0, 2, 8)) == 4.0


def test_external_rect_examples():
    assert external_rect(square(3, 4, 2)) == AxisAlignedBox(3, 4, 5, 6)
    diamond = ConvexPolygon(((1, 0), (2, 1), (1, 2), (0, 1)))
    assert external_rect(diamond) == AxisAlignedBox(0, 0, 2, 2)


# intersection / IoU


def test_intersection_examples():
    assert intersection_area(UNIT, UNIT) == 1.0
    assert intersection_area(UNIT, square(5, 5)) == 0.0
    # 0.5 was cross-checked against the Monte-Carlo oracle (0.5004 at 1e6 samples)
    assert intersection_area(UNIT, square(0.5, 0)) == pytest.approx(0.5, abs=1e-12)


def test_intersection_shifted_square_matches_sampling():
    est = mc_intersection_area(UNIT.vertices, square(0.5, 0).vertices, region=(0, 0, 2, 1))
    assert abs(intersection_area(UNIT, square(0.5, 0)) - est) < 0.005


def test_iou_examples():
    assert iou(UNIT, UNIT) == 1.0
    assert iou(UNIT, square(3, 0)) == 0.0
    assert iou(UNIT, square(0.5, 0)) == pytest.approx(1 / 3, abs=1e-12)


def test_iou_of_exact_copy_with_rotated_vertex_order():
    q = ConvexPolygon(((0, 0), (3, 1), (2, 4), (-1, 2)))
    rolled = ConvexPolygon(q.vertices[2:] + q.vertices[:2])
    assert iou(q, rolled) == pytest.approx(1.0, abs=1e-12)


def test_box_and_polygon_agree():
    b = AxisAlignedBox(0.2, 0.1, 0.9, 0.7)
    tri = ConvexPolygon(((0, 0), (1, 0), (0, 1)))
    assert intersection_area(b, tri) == pytest.approx(intersection_area(b.to_polygon(), tri))


coord = st.floats(min_value=0, max_value=100, allow_nan=False)


@st.composite
def quads(draw):
    seed = draw(st.integers(0, 2**32 - 1))
    return ConvexPolygon(tuple(random_convex_quad(np.random.default_rng(seed))))


@st.composite
def boxes(draw):
    x0, x1 = sorted((draw(coord), draw(coord)))
    y0, y1 = sorted((draw(coord), draw(coord)))
    assume(x1 - x0 > 1e-3 and y1 - y0 > 1e-3)
    return ConvexPolygon.rect(x0, y0, x1, y1)


shapes = st.one_of(quads(), boxes())


@given(shapes, shapes)
def test_intersection_symmetric_and_bounded(a, b):
    ab = intersection_area(a, b)
    assert ab == pytest.approx(intersection_area(b, a), rel=1e-9, abs=1e-9)
    assert -1e-9 <= ab <= min(area(a), area(b)) + 1e-9


@given(shapes, shapes)
def test_iou_symmetric_in_unit_interval(a, b):
    v = iou(a, b)
    assert 0.0 <= v <= 1.0
    assert v == pytest.approx(iou(b, a), abs=1e-12)


@given(shapes)
def test_iou_self_is_one(a):
    assert iou(a, ConvexPolygon(a.vertices)) == 1.0


@given(shapes, st.floats(-50, 50), st.floats(-50, 50))
def test_intersection_translation_invariant(a, dx, dy):
    b = a.translated(7.0, 3.0)
    assert intersection_area(a.translated(dx, dy), b.translated(dx, dy)) == pytest.approx(
        intersection_area(a, b), rel=1e-6, abs=1e-6
    )


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10_000))
def test_random_quads_against_sampling(seed):
    rng = np.random.default_rng(seed)
    a, b = random_convex_quad(rng), random_convex_quad(rng)
    got = intersection_area(ConvexPolygon(tuple(a)), ConvexPolygon(tuple(b)))
    est = mc_intersection_area(a, b, n=200_000, seed=seed)
    assert abs(got - est) <= 0.015 * 100 * 100


def test_box_iou_matches_closed_form():
    rng = np.random.default_rng(3)
    for _ in range(200):
        pts = rng.uniform(0, 50, (2, 4))
        bx = np.sort(pts[:, :2], axis=0)
        by = np.sort(pts[:, 2:], axis=0)
        a = AxisAlignedBox(bx[0, 0], by[0, 0], bx[1, 0], by[1, 0])
        b = AxisAlignedBox(bx[0, 1], by[0, 1], bx[1, 1], by[1, 1])
        ref = box_iou_matrix(np.array([a.as_list(), b.as_list()]))[0, 1]
        assert iou(a, b) == pytest.approx(ref, abs=1e-12)


# nms


def test_nms_single_item():
    assert nms([(UNIT, 0.5)], 0.5) == [0]


def test_nms_duplicate_suppressed():
    assert nms([(UNIT, 0.8), (UNIT, 0.9)], 0.5) == [1]


def test_nms_tie_prefers_lower_index():
    assert nms([(UNIT, 0.7), (UNIT, 0.7)], 0.5) == [0]


def test_nms_threshold_validated():
    with pytest.raises(ValueError):
        nms([(UNIT, 1.0)], 1.5)


def _random_boxes(rng, n):
    xy = rng.uniform(0, 100, (n, 2))
    wh = rng.uniform(2, 25, (n, 2))
    return np.c_[xy, xy + wh]


def test_nms_matches_reference_50_boxes():
    rng = np.random.default_rng(11)
    bx = _random_boxes(rng, 50)
    scores = rng.uniform(0, 1, 50).tolist()
    items = [(ConvexPolygon.rect(*b), s) for b, s in zip(bx, scores)]
    assert nms(items, 0.3) == nms_reference(bx, scores, 0.3)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**31), st.floats(0.0, 1.0))
def test_nms_permutation_invariant(seed, thr):
    rng = np.random.default_rng(seed)
    bx = _random_boxes(rng, 25)
    scores = rng.permutation(25) / 25.0
    items = [(ConvexPolygon.rect(*b), float(s)) for b, s in zip(bx, scores)]
    kept = {items[i][1] for i in nms(items, thr)}
    perm = list(range(25))
    random.Random(seed).shuffle(perm)
    shuffled = [items[i] for i in perm]
    assert {shuffled[i][1] for i in nms(shuffled, thr)} == kept


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**31))
def test_nms_extreme_thresholds(seed):
    rng = np.random.default_rng(seed)
    bx = _random_boxes(rng, 20)
    items = [(ConvexPolygon.rect(*b), float(s)) for b, s in zip(bx, rng.uniform(0, 1, 20))]
    assert nms(items, 1.0) == list(range(20))
    kept = nms(items, 0.0)
    for i in kept:
        for j in kept:
            if i < j:
                assert intersection_area(items[i][0], items[j][0]) == 0.0

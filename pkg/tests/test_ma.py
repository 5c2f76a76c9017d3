import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ambispot.geom import AxisAlignedBox, ConvexPolygon
from ambispot.ma import MatchConfig, assemble, match_chars, recognize_line
from ambispot.model import CharDetection
from oracles import brute_recognize, random_ma_scene, scanline_box_polygon_area


def char(x0, y0, x1, y1, label="a"):
    return CharDetection(AxisAlignedBox(x0, y0, x1, y1), label, 0.9)


def centered(cx, cy, label, half=2.0):
    return char(cx - half, cy - half, cx + half, cy + half, label)


def test_fully_inside_matched():
    line = ConvexPolygon.rect(0, 0, 10, 4)
    assert match_chars(line, [char(1, 1, 3, 3)]) == [0]


def test_disjoint_not_matched():
    line = ConvexPolygon.rect(0, 0, 10, 4)
    assert match_chars(line, [char(20, 1, 22, 3)]) == []


def test_match_threshold_is_strict():
    # 10x10 box, so the line covers 31 and 30 of its 100 area units
    box = [char(0, 0, 10, 10)]
    over = ConvexPolygon.rect(6.9, -5, 20, 15)
    exact = ConvexPolygon.rect(7, -5, 20, 15)
    assert scanline_box_polygon_area((0, 0, 10, 10), exact.vertices) == 30.0
    assert match_chars(over, box) == [0]
    assert match_chars(exact, box) == []


def test_degenerate_box_skipped(caplog):
    line = ConvexPolygon.rect(0, 0, 10, 4)
    assert match_chars(line, [char(1, 1, 1, 3), char(2, 1, 3, 3)]) == [1]
    assert "degenerate" in caplog.text


def test_match_keeps_input_order():
    line = ConvexPolygon.rect(0, 0, 30, 4)
    chars = [centered(20, 2, "b"), centered(5, 2, "a"), centered(50, 2, "z")]
    assert match_chars(line, chars) == [0, 1]


def test_assemble_horizontal():
    line = ConvexPolygon.rect(0, 0, 40, 8)
    chars = [centered(30, 4, "了"), centered(10, 4, "吃"), centered(20, 4, "饭")]
    assert assemble(line, chars) == "吃饭了"


def test_assemble_vertical():
    line = ConvexPolygon.rect(0, 0, 8, 30)
    chars = [centered(4, 25, "C"), centered(4, 5, "A"), centered(4, 15, "B")]
    assert assemble(line, chars) == "ABC"


def test_square_line_reads_top_down():
    line = ConvexPolygon.rect(0, 0, 20, 20)
    chars = [centered(15, 5, "b"), centered(5, 15, "a")]
    # left-to-right would give "ab"; the square falls to the vertical branch
    assert assemble(line, chars) == "ba"


def test_equal_centers_keep_input_order():
    line = ConvexPolygon.rect(0, 0, 40, 8)
    assert assemble(line, [centered(10, 4, "x"), centered(10, 4, "y")]) == "xy"


def test_empty():
    line = ConvexPolygon.rect(0, 0, 40, 8)
    assert assemble(line, []) == ""
    assert recognize_line(line, []) == ""


def test_horizontal_row_matches_brute_force():
    line = ConvexPolygon.rect(0, 0, 40, 10)
    chars = [centered(25, 5, "b"), centered(35, 5, "c"), centered(5, 5, "a")]
    ref = brute_recognize(line.vertices, [(c.box.as_list(), c.label) for c in chars], 0.3)
    assert recognize_line(line, chars) == ref == "abc"


def test_grid_column_candidate():
    # 2x3 grid of 10px characters with 4px gaps; column 1 spans x in [14, 24]
    labels = ["abc", "def"]
    chars = [
        char(c * 14, r * 14, c * 14 + 10, r * 14 + 10, labels[r][c]) for r in range(2) for c in range(3)
    ]
    column = ConvexPolygon.rect(14, 0, 24, 24)
    assert match_chars(column, chars) == [1, 4]
    assert recognize_line(column, chars) == "be"


def test_thr_match_validated():
    with pytest.raises(ValueError):
        MatchConfig(1.2)


def _scene(seed):
    line, raw = random_ma_scene(np.random.default_rng(seed))
    poly = ConvexPolygon(tuple(line))
    chars = [char(*box, label) for box, label in raw]
    return poly, chars, line, raw


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1), st.floats(-500, 500), st.floats(-500, 500))
def test_translation_invariance(seed, dx, dy):
    poly, chars, _, _ = _scene(seed)
    moved = [char(c.box.x_min + dx, c.box.y_min + dy, c.box.x_max + dx, c.box.y_max + dy, c.label) for c in chars]
    assert recognize_line(poly.translated(dx, dy), moved) == recognize_line(poly, chars)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1), st.sampled_from([0.25, 0.5, 2.0, 4.0, 10.0]), st.floats(-50, 50))
def test_uniform_scale_invariance(seed, k, o):
    poly, chars, _, _ = _scene(seed)

    def s(v):
        return o + k * (v - o)

    scaled = [char(s(c.box.x_min), s(c.box.y_min), s(c.box.x_max), s(c.box.y_max), c.label) for c in chars]
    assert recognize_line(poly.scaled(k, (o, o)), scaled) == recognize_line(poly, chars)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1), st.floats(0, 1), st.floats(0, 1))
def test_raising_threshold_never_adds(seed, t1, t2):
    poly, chars, _, _ = _scene(seed)
    lo, hi = sorted((t1, t2))
    assert set(match_chars(poly, chars, MatchConfig(hi))) <= set(match_chars(poly, chars, MatchConfig(lo)))


def test_random_scenes_match_brute_force():
    for seed in range(150):
        poly, chars, line, raw = _scene(seed)
        assert recognize_line(poly, chars) == brute_recognize(line, raw, 0.3), seed

import numpy as np
import pytest

from facadekit import (
    BBox,
    FacadeObject,
    connected_components,
    convex_hull,
    extract_corners,
    extract_instances,
    find_overlaps,
    min_bbox,
)
from conftest import random_blob_map
from oracles import flood_fill_components, slow_corners, slow_hull


def as_pixel_lists(components):
    return [[(int(x), int(y)) for x, y in comp] for comp in components]


def test_components_match_flood_fill(rng):
    for _ in range(25):
        m = random_blob_map(rng, width=32, height=24, blobs=6)
        for cls in (0, 2, 3):
            got = as_pixel_lists(connected_components(m, cls))
            want = flood_fill_components(m, cls)
            assert got == want


def test_components_eight_connectivity(rng):
    m = np.full((10, 10), 1, dtype=np.int64)
    m[1, 1] = 0
    m[2, 2] = 0  # diagonal touch
    assert len(connected_components(m, 0, connectivity=4)) == 2
    assert len(connected_components(m, 0, connectivity=8)) == 1
    for _ in range(10):
        blob = random_blob_map(rng, width=24, height=24, blobs=10)
        got = as_pixel_lists(connected_components(blob, 0, connectivity=8))
        assert got == flood_fill_components(blob, 0, connectivity=8)


def test_components_raster_order(rng):
    m = random_blob_map(rng, blobs=7)
    comps = connected_components(m, 0)
    firsts = [tuple(c[0]) for c in comps]
    assert firsts == sorted(firsts, key=lambda p: (p[1], p[0]))
    for comp in comps:
        rows = [(y, x) for x, y in comp]
        assert rows == sorted(rows)


def test_hull_matches_slow_hull(rng):
    for _ in range(40):
        n = int(rng.integers(1, 40))
        pts = rng.integers(0, 15, size=(n, 2)).astype(float)
        hull = convex_hull(pts)
        assert set(map(tuple, hull)) == slow_hull(pts)


def test_hull_is_ccw_without_collinear():
    pts = np.array(
        [[0, 0], [4, 0], [4, 4], [0, 4], [2, 0], [2, 2], [4, 2]], dtype=float
    )
    hull = convex_hull(pts)
    assert set(map(tuple, hull)) == {(0, 0), (4, 0), (4, 4), (0, 4)}
    # positive signed area in the y-up sense means counter-clockwise
    x, y = hull[:, 0], hull[:, 1]
    area2 = np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y)
    assert area2 > 0


def test_hull_degenerate_inputs():
    assert convex_hull(np.array([[3.0, 5.0]])).tolist() == [[3.0, 5.0]]
    collinear = np.array([[0, 0], [1, 1], [2, 2], [3, 3]], dtype=float)
    hull = convex_hull(collinear)
    assert set(map(tuple, hull)) == {(0.0, 0.0), (3.0, 3.0)}


def test_min_bbox_is_inclusive_coordinate_box():
    hull = np.array([[2, 3], [7, 3], [7, 9], [2, 9]], dtype=float)
    box = min_bbox(hull)
    assert (box.x1, box.y1, box.x2, box.y2) == (2, 3, 7, 9)
    assert box.width == 5 and box.height == 6


def test_corners_match_exhaustive(rng):
    for _ in range(30):
        n = int(rng.integers(1, 60))
        pts = rng.integers(0, 20, size=(n, 2)).astype(float)
        got = extract_corners(pts, (20, 20))
        want = slow_corners(pts, (20, 20))
        assert [tuple(p) for p in got] == want


def test_corner_tie_break_prefers_smaller_y_then_x():
    # both (3, 1) and (1, 3) sit at distance sqrt(10) from (0, 0)
    pts = np.array([[3, 1], [1, 3], [5, 5]], dtype=float)
    got = extract_corners(pts, (10, 10))
    assert tuple(got[0]) == (3.0, 1.0)


def test_extract_instances_pixel_semantics(palette):
    m = np.full((12, 16), palette.wall_id, dtype=np.int64)
    m[3:8, 2:11] = palette.id_of("window")  # columns 2..10, rows 3..7
    objs = extract_instances(m, palette, min_area=4)
    assert len(objs) == 1
    obj = objs[0]
    assert obj.class_id == palette.id_of("window")
    assert obj.size == (9.0, 5.0)
    assert obj.center == (6.5, 5.5)
    assert obj.pixel_count == 45
    assert obj.corners == ((2.0, 3.0), (10.0, 3.0), (10.0, 7.0), (2.0, 7.0))
    box = obj.bbox
    assert (box.x1, box.y1, box.x2, box.y2) == (2.0, 3.0, 11.0, 8.0)


def test_extract_instances_min_area(palette):
    m = np.full((20, 20), palette.wall_id, dtype=np.int64)
    m[1:3, 1:3] = 0  # 4 px
    m[5:10, 5:10] = 0  # 25 px
    objs = extract_instances(m, palette, min_area=16)
    assert len(objs) == 1 and objs[0].pixel_count == 25
    objs = extract_instances(m, palette, min_area=1)
    assert len(objs) == 2


def test_extract_instances_class_then_raster_order(palette):
    m = np.full((10, 20), palette.wall_id, dtype=np.int64)
    m[6:9, 1:5] = palette.id_of("door")
    m[1:4, 1:5] = palette.id_of("window")
    m[1:4, 8:12] = palette.id_of("window")
    objs = extract_instances(m, palette, min_area=4)
    kinds = [(o.class_id, o.center[0]) for o in objs]
    # windows (id 0) first in raster order, then the door (id 3);
    # columns 1..4 inclusive give center (1 + 5) / 2 = 3.0
    assert kinds == [(0, 3.0), (0, 10.0), (3, 3.0)]


def test_extract_matches_oracles_on_blobs(rng, palette):
    for _ in range(10):
        m = random_blob_map(rng, width=36, height=28, blobs=7)
        objs = extract_instances(m, palette, min_area=1)
        count = 0
        for cls in (0, 2, 3):
            for comp in flood_fill_components(m, cls):
                count += 1
                pts = np.array(comp, dtype=float)
                obj = next(
                    o
                    for o in objs
                    if o.class_id == cls
                    and o.pixel_count == len(comp)
                    and min(p[0] for p in comp) == o.bbox.x1
                    and min(p[1] for p in comp) == o.bbox.y1
                )
                assert set(map(tuple, obj.corners)) <= slow_hull(pts) | set(comp)
                assert list(obj.corners) == slow_corners(pts, (36, 28))
        assert count == len(objs)


def test_moved_rebuilds_corners():
    obj = FacadeObject(
        class_id=0,
        center=(5.0, 5.0),
        size=(4.0, 2.0),
        corners=((3.0, 4.0), (6.0, 4.0), (6.0, 5.0), (3.0, 5.0)),
        pixel_count=8,
    )
    moved = obj.moved((10.0, 8.0), (6.0, 4.0))
    assert moved.center == (10.0, 8.0)
    assert moved.size == (6.0, 4.0)
    assert moved.corners == ((7.0, 6.0), (13.0, 6.0), (13.0, 10.0), (7.0, 10.0))
    assert moved.pixel_count == obj.pixel_count


def test_find_overlaps_cross_class_only():
    def box(cls, cx, cy, w, h):
        return FacadeObject(
            class_id=cls,
            center=(cx, cy),
            size=(w, h),
            corners=((0, 0), (0, 0), (0, 0), (0, 0)),
            pixel_count=int(w * h),
        )

    a = box(0, 5, 5, 4, 4)
    b = box(2, 6, 6, 4, 4)  # overlaps a, different class
    c = box(0, 2.5, 2.5, 2, 2)  # overlaps a only, same class: ignored
    d = box(3, 20, 20, 2, 2)
    assert find_overlaps([a, b, c, d]) == {0, 1}
    assert find_overlaps([a, c, d]) == set()


def test_bbox_width_height():
    box = BBox(1.0, 2.0, 4.0, 8.0)
    assert box.width == 3.0 and box.height == 6.0

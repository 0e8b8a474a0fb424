import numpy as np
import pytest

from facadekit import (
    ConfigError,
    NoBackground,
    clear_objects,
    default_draw_order,
    extract_instances,
    paint_rect,
    rasterize,
    refine_layout,
)
from facadekit.raster import round_half_up


def test_round_half_up():
    assert round_half_up(0.5) == 1
    assert round_half_up(1.5) == 2
    assert round_half_up(2.5) == 3
    assert round_half_up(2.49) == 2
    assert round_half_up(-0.5) == 0
    assert round_half_up(-1.5) == -1
    assert round_half_up(3.0) == 3


def test_default_draw_order_small_classes_on_top(palette):
    order = default_draw_order(palette)
    names = [palette.name_of(c) for c in order]
    assert names == ["balcony", "door", "window"]


def test_paint_rect_spec_example(palette):
    out = np.full((20, 20), palette.wall_id, dtype=np.int64)
    assert paint_rect(out, 0, (10.0, 10.0), (4.0, 4.0))
    ys, xs = np.nonzero(out == 0)
    assert xs.min() == 8 and xs.max() == 11
    assert ys.min() == 8 and ys.max() == 11
    assert len(xs) == 16


def test_paint_rect_clips_and_skips(palette):
    out = np.full((10, 10), palette.wall_id, dtype=np.int64)
    assert paint_rect(out, 0, (0.0, 5.0), (6.0, 2.0))  # clipped at left edge
    assert (out[:, :3] == 0).sum() == 2 * 3
    out2 = np.full((10, 10), palette.wall_id, dtype=np.int64)
    assert not paint_rect(out2, 0, (50.0, 50.0), (4.0, 4.0))
    assert (out2 == palette.wall_id).all()


def test_clear_objects_window_in_wall(palette):
    m = np.full((10, 10), palette.wall_id, dtype=np.int64)
    m[3:7, 3:7] = palette.id_of("window")
    cleared = clear_objects(m, palette)
    assert (cleared == palette.wall_id).all()


def test_clear_objects_straddling_boundary(palette):
    # window block across a wall/roof boundary: each half joins its side
    wall, roof, window = palette.wall_id, palette.id_of("roof"), palette.id_of("window")
    m = np.full((8, 8), wall, dtype=np.int64)
    m[:, 4:] = roof
    m[2:6, 2:6] = window
    cleared = clear_objects(m, palette)
    want = np.full((8, 8), wall, dtype=np.int64)
    want[:, 4:] = roof
    assert (cleared == want).all()


def test_clear_objects_tie_prefers_smaller_class(palette):
    shop, roof, window = palette.id_of("shop"), palette.id_of("roof"), palette.wall_id
    window = palette.id_of("window")
    m = np.array([[shop, window, window, window, roof]], dtype=np.int64)
    cleared = clear_objects(m, palette)
    assert cleared.tolist() == [[shop, shop, shop, roof, roof]]


def test_clear_objects_no_background(palette):
    m = np.zeros((4, 4), dtype=np.int64)  # all window
    with pytest.raises(NoBackground):
        clear_objects(m, palette)


def test_clear_objects_copies_object_free_map(palette):
    m = np.full((5, 5), palette.wall_id, dtype=np.int64)
    cleared = clear_objects(m, palette)
    assert (cleared == m).all()
    cleared[0, 0] = 0
    assert m[0, 0] == palette.wall_id


def test_rasterize_order_semantics(palette):
    wall = palette.wall_id
    window, balcony = palette.id_of("window"), palette.id_of("balcony")
    bg = np.full((20, 20), wall, dtype=np.int64)
    m = bg.copy()
    m[5:15, 5:15] = balcony
    m[8:12, 8:12] = window
    objs = extract_instances(m, palette, min_area=4)
    out = rasterize(bg, objs, palette=palette)
    assert (out == m).all()  # window repainted on top of balcony
    # reversed order: balcony wins the overlap
    door = palette.id_of("door")
    out2 = rasterize(bg, objs, order=(window, door, balcony), palette=palette)
    assert (out2[8:12, 8:12] == balcony).all()


def test_rasterize_rejects_bad_order(palette):
    bg = np.full((8, 8), palette.wall_id, dtype=np.int64)
    with pytest.raises(ConfigError):
        rasterize(bg, [], order=(0, 0, 2), palette=palette)
    with pytest.raises(ConfigError):
        rasterize(bg, [], order=(0,), palette=palette)  # misses balcony/door
    with pytest.raises(ConfigError):
        rasterize(bg, [])  # no order and no palette


def test_rasterize_skips_outside_objects_with_warning(palette):
    bg = np.full((10, 10), palette.wall_id, dtype=np.int64)
    m = bg.copy()
    m[2:6, 2:6] = 0
    objs = extract_instances(m, palette, min_area=4)
    moved = [objs[0].moved((50.0, 50.0), objs[0].size)]
    warnings: list = []
    out = rasterize(bg, moved, palette=palette, warnings=warnings)
    assert (out == bg).all()
    assert len(warnings) == 1
    assert warnings[0]["event"] == "object_skipped"
    assert warnings[0]["class"] == "window" or warnings[0]["class"] == 0


def test_rasterize_accepts_refined_layout(spalette):
    from facadekit import generate
    from facadekit.synth import SynthSpec

    truth, _, _ = generate(SynthSpec(seed=11))
    objs = extract_instances(truth, spalette)
    layout = refine_layout(objs, bounds=(160, 200))
    bg = clear_objects(truth, spalette)
    out = rasterize(bg, layout, palette=spalette)
    assert (out == truth).all()

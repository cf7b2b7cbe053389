import numpy as np
import pytest

from naptron import (
    BoxGeometry,
    FeatureMap,
    channel_mean_flatten,
    extract_conv_pattern,
    extract_fc_pattern,
    map_box_to_cell,
)
from naptron.errors import InputError


def make_map(rng, width, height, channels, image_size=800):
    values = rng.normal(size=(height, width, channels))
    return FeatureMap(values=values, image_width=image_size, image_height=image_size)


# ---------------------------------------------------------------------------
# boxes


def test_box_validation():
    with pytest.raises(InputError):
        BoxGeometry(2.0, 0.0, 1.0, 1.0)  # x1 >= x2
    with pytest.raises(InputError):
        BoxGeometry(0.0, 0.0, 1.0, float("inf"))
    with pytest.raises(InputError):
        BoxGeometry(-1.0, 0.0, 1.0, 1.0)
    box = BoxGeometry(0.0, 2.0, 4.0, 6.0)
    assert box.center == (2.0, 4.0)
    assert box.area == 16.0


# ---------------------------------------------------------------------------
# fully-connected rows


def test_fc_pattern_single_row():
    got = extract_fc_pattern([[1.0, 2.0, 3.0, 4.0]], 0)
    assert got.tolist() == [1.0, 2.0, 3.0, 4.0]


def test_fc_pattern_picks_requested_row():
    matrix = [[0.0, 1.0], [2.0, 3.0], [4.0, 5.0]]
    assert extract_fc_pattern(matrix, 2).tolist() == [4.0, 5.0]


def test_fc_pattern_index_out_of_range():
    with pytest.raises(InputError):
        extract_fc_pattern([[0.0], [1.0], [2.0]], 5)


# ---------------------------------------------------------------------------
# box -> cell mapping


def test_map_box_to_cell_proportional(rng):
    fmap = make_map(rng, 25, 25, 4, image_size=800)
    box = BoxGeometry(90.0, 240.0, 110.0, 260.0)  # center (100, 250)
    assert map_box_to_cell(box, fmap) == (3, 7)


def test_map_box_to_cell_clamps_at_far_edge(rng):
    fmap = make_map(rng, 25, 25, 1, image_size=800)
    box = BoxGeometry(799.8, 799.8, 800.0, 800.0)  # center (799.9, 799.9)
    assert map_box_to_cell(box, fmap) == (24, 24)


def test_map_box_to_cell_origin(rng):
    fmap = make_map(rng, 25, 25, 1, image_size=800)
    box = BoxGeometry(0.0, 0.0, 0.1, 0.1)
    assert map_box_to_cell(box, fmap) == (0, 0)


def test_map_box_to_cell_always_in_bounds(rng):
    fmap = make_map(rng, 13, 9, 2, image_size=640)
    for _ in range(200):
        x1, y1 = rng.uniform(0, 2000, size=2)
        w, h = rng.uniform(0.1, 500, size=2)
        cell_w, cell_h = map_box_to_cell(BoxGeometry(x1, y1, x1 + w, y1 + h), fmap)
        assert 0 <= cell_w < 13
        assert 0 <= cell_h < 9


def test_cell_stable_under_small_center_shifts(rng):
    fmap = make_map(rng, 16, 16, 3, image_size=640)
    stride = 640 / 16
    # center in the middle of a cell; shifts below half a stride stay put
    cx = 5 * stride + stride / 2
    cy = 9 * stride + stride / 2
    base = map_box_to_cell(BoxGeometry(cx - 4, cy - 4, cx + 4, cy + 4), fmap)
    for dx, dy in [(0.4 * stride, 0.0), (0.0, -0.4 * stride),
                   (0.3 * stride, 0.3 * stride)]:
        shifted = BoxGeometry(cx - 4 + dx, cy - 4 + dy, cx + 4 + dx, cy + 4 + dy)
        assert map_box_to_cell(shifted, fmap) == base


# ---------------------------------------------------------------------------
# conv cell vectors


def test_conv_pattern_single_cell():
    fmap = FeatureMap(values=np.array([[[5.0, -1.0, 0.0]]]),
                      image_width=10, image_height=10)
    assert extract_conv_pattern(fmap, (0, 0)).tolist() == [5.0, -1.0, 0.0]


def test_conv_pattern_indexes_w_as_column():
    values = np.array([[[1.0], [2.0]],
                       [[3.0], [4.0]]])  # (h, w, c)
    fmap = FeatureMap(values=values, image_width=10, image_height=10)
    assert extract_conv_pattern(fmap, (1, 0)).tolist() == [2.0]
    assert extract_conv_pattern(fmap, (0, 1)).tolist() == [3.0]


def test_conv_pattern_out_of_bounds():
    fmap = FeatureMap(values=np.zeros((2, 2, 1)), image_width=10, image_height=10)
    with pytest.raises(InputError):
        extract_conv_pattern(fmap, (2, 0))


# ---------------------------------------------------------------------------
# channel means


def test_channel_mean_single_channel():
    values = np.array([1.0, 2.0, 3.0, 4.0]).reshape(2, 2, 1)
    fmap = FeatureMap(values=values, image_width=10, image_height=10)
    assert channel_mean_flatten(fmap).tolist() == [2.5]


def test_channel_mean_constant_channel(rng):
    values = rng.normal(size=(3, 5, 4))
    values[:, :, 2] = 7.25
    fmap = FeatureMap(values=values, image_width=10, image_height=10)
    assert channel_mean_flatten(fmap)[2] == pytest.approx(7.25, abs=1e-12)


def test_channel_mean_matches_double_loop(rng):
    fmap = make_map(rng, 4, 4, 8)
    got = channel_mean_flatten(fmap)
    for c in range(8):
        total = 0.0
        for h in range(4):
            for w in range(4):
                total += fmap.values[h, w, c]
        assert got[c] == pytest.approx(total / 16.0, abs=1e-12)


def test_channel_mean_commutes_with_permutation(rng):
    fmap = make_map(rng, 6, 3, 5)
    perm = rng.permutation(5)
    permuted = FeatureMap(values=fmap.values[:, :, perm],
                          image_width=fmap.image_width,
                          image_height=fmap.image_height)
    assert np.allclose(channel_mean_flatten(permuted),
                       channel_mean_flatten(fmap)[perm], atol=1e-12)


def test_feature_map_validation():
    with pytest.raises(InputError):
        FeatureMap(values=np.zeros((2, 2)), image_width=10, image_height=10)
    with pytest.raises(InputError):
        FeatureMap(values=np.full((1, 1, 1), np.nan), image_width=10, image_height=10)
    with pytest.raises(InputError):
        FeatureMap(values=np.zeros((1, 1, 1)), image_width=0, image_height=10)

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from meterread import preproc, synth, topo
from meterread.raster import Rect, crop

from oracles import erase_border_touching, erase_small, otsu_exhaustive, random_histogram

masks = st.tuples(st.integers(1, 16), st.integers(1, 16)).flatmap(lambda hw: arrays(bool, hw))


def test_split_cells_even():
    win = np.zeros((40, 100), np.uint8)
    g = preproc.MeterGeometry(cell_count=5)
    cells = preproc.split_cells(win, g)
    assert [c.shape for c in cells] == [(40, 20)] * 5
    assert [r.x for r in g.cell_rects(100, 40)] == [0, 20, 40, 60, 80]


def test_split_cells_remainder_discarded():
    win = np.tile(np.arange(103, dtype=np.uint8), (40, 1))
    cells = preproc.split_cells(win, preproc.MeterGeometry(cell_count=5))
    assert [c.shape for c in cells] == [(40, 20)] * 5
    assert cells[-1][0, -1] == 99


def test_split_cells_gap():
    g = preproc.MeterGeometry(cell_count=3, cell_gap=2)
    assert [(r.x, r.w) for r in g.cell_rects(20, 5)] == [(0, 5), (7, 5), (14, 5)]


def test_geometry_invariants():
    with pytest.raises(ValueError):
        preproc.MeterGeometry(cell_count=0)
    with pytest.raises(ValueError):
        preproc.split_cells(np.zeros((4, 4), np.uint8), preproc.MeterGeometry(cell_count=5))
    with pytest.raises(ValueError):
        preproc.split_cells(np.zeros((4, 6), np.uint8), preproc.MeterGeometry(cell_count=3, cell_gap=2))


def test_split_cells_recovers_synth_boxes():
    spec = synth.SynthSpec(reading=tuple(synth.Full(d) for d in (3, 0, 9, 4, 2)))
    img, gt = synth.render_meter(spec)
    win = synth.window_rect(spec)
    g = preproc.MeterGeometry(win, 5)
    rects = [Rect(win.x + r.x, win.y + r.y, r.w, r.h) for r in g.cell_rects(win.w, win.h)]
    assert rects == gt.boxes
    for cell, box in zip(preproc.split_cells(crop(img, win), g), gt.boxes):
        assert np.array_equal(cell, crop(img, box))


def test_histogram_examples():
    h = preproc.histogram(np.array([[0, 0], [255, 7]], np.uint8))
    assert h[0] == 2 and h[7] == 1 and h[255] == 1 and h.sum() == 4
    u = preproc.histogram(np.full((3, 5), 9, np.uint8))
    assert u[9] == 15 and u.sum() == 15


@settings(max_examples=50, deadline=None)
@given(st.tuples(st.integers(1, 20), st.integers(1, 20)).flatmap(lambda hw: arrays(np.uint8, hw)))
def test_histogram_sum(img):
    assert preproc.histogram(img).sum() == img.size


def test_otsu_two_spikes():
    h = np.zeros(256, np.int64)
    h[10] = h[200] = 50
    assert preproc.otsu_threshold(h) == 10


def test_otsu_single_value():
    h = np.zeros(256, np.int64)
    h[77] = 123
    assert preproc.otsu_threshold(h) == 0


def test_otsu_errors():
    with pytest.raises(ValueError):
        preproc.otsu_threshold(np.zeros(256, np.int64))
    with pytest.raises(ValueError):
        preproc.otsu_threshold(np.ones(255, np.int64))


def test_otsu_matches_oracle():
    rng = np.random.default_rng(11)
    for _ in range(500):
        h = random_histogram(rng)
        assert preproc.otsu_threshold(h) == otsu_exhaustive(h)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(1, 50))
def test_otsu_scale_invariant(seed, k):
    h = random_histogram(np.random.default_rng(seed))
    assert preproc.otsu_threshold(h * k) == preproc.otsu_threshold(h)


def test_binarize_examples():
    assert preproc.binarize(np.array([[0, 255]], np.uint8), 128).tolist() == [[True, False]]
    img = np.arange(256, dtype=np.uint8).reshape(16, 16)
    assert preproc.binarize(img, 255).all()
    assert not preproc.binarize(np.full((2, 2), 200, np.uint8), 199).any()
    assert preproc.binarize(np.array([[0, 255]], np.uint8), 128, invert=True).tolist() == [[False, True]]


@settings(max_examples=50, deadline=None)
@given(arrays(np.uint8, (6, 7)), st.integers(0, 254), st.integers(1, 255))
def test_binarize_monotone(img, t, dt):
    lo = preproc.binarize(img, t)
    hi = preproc.binarize(img, min(255, t + dt))
    assert not (lo & ~hi).any()


def test_binarize_recovers_render_mask():
    for d in range(10):
        spec = synth.SynthSpec(reading=(synth.Full(d),), sigma=4.0, seed=d)
        img, gt = synth.render_cell(synth.Full(d), spec)
        b = preproc.binarize(img, preproc.otsu_threshold(preproc.histogram(img)))
        assert (b == gt.masks[0]).mean() >= 0.99


def test_clear_border_examples():
    assert not preproc.clear_border(np.ones((5, 6), bool)).any()
    m = np.zeros((7, 7), bool)
    m[2:5, 2:5] = True
    assert np.array_equal(preproc.clear_border(m), m)


def test_clear_border_sides_only():
    m = np.zeros((6, 6), bool)
    m[0, 2:4] = True  # touches top only
    m[2:4, 0] = True  # touches left
    out = preproc.clear_border(m, edges="sides")
    assert out[0, 2:4].all() and not out[:, 0].any()


def test_remove_small_examples():
    m = np.zeros((20, 20), bool)
    m[1, 1:4] = True
    m[10:15, 5:15] = True
    out = preproc.remove_small(m, 10)
    assert not out[1].any() and out[10:15, 5:15].all() and out.sum() == 50
    assert np.array_equal(preproc.remove_small(m, 1), m)


def test_filters_match_oracle():
    rng = np.random.default_rng(5)
    for _ in range(150):
        h, w = rng.integers(1, 30, 2)
        m = rng.random((h, w)) < rng.uniform(0.1, 0.6)
        assert np.array_equal(preproc.clear_border(m), erase_border_touching(m))
        k = int(rng.integers(1, 8))
        out = preproc.remove_small(m, k)
        assert np.array_equal(out, erase_small(m, k))
        lm = topo.label_components(out)
        assert all(a >= k for a in lm.areas)


@settings(max_examples=80, deadline=None)
@given(masks, st.integers(1, 6))
def test_filters_idempotent_and_shrinking(m, k):
    for f in (preproc.clear_border, lambda x: preproc.remove_small(x, k)):
        once = f(m)
        assert not (once & ~m).any()
        assert np.array_equal(f(once), once)


def test_clean_chain_topology():
    from meterread.reading import clean_cell

    for d in range(10):
        spec = synth.SynthSpec(reading=(synth.Full(d),))
        img, gt = synth.render_cell(synth.Full(d), spec)
        mask = clean_cell(img)
        assert np.array_equal(mask, gt.masks[0])
        if d in (1, 2, 3, 5, 7):
            assert topo.label_components(mask).component_count == 1
        assert topo.hole_features(mask).hole_count == {0: 1, 4: 1, 6: 1, 8: 2, 9: 1}.get(d, 0)

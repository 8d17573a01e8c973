import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from lipembed.lattice import WindowSpec
from lipembed.percolation import (CellGeometry, Configuration, apply_isometry, hole_starts,
                                  holey_cell_field, holey_threshold, is_hole, mix_seed,
                                  round_half_up_div, sample_config, site_uniforms)


def test_extreme_p():
    w = WindowSpec.box(7, 5)
    assert sample_config(w, 1.0, 3).open.all()
    assert not sample_config(w, 0.0, 3).open.any()
    with pytest.raises(ValueError):
        sample_config(w, 1.5, 0)
    with pytest.raises(ValueError):
        sample_config(w, -0.1, 0)


def test_half_density_regression():
    cfg = sample_config(WindowSpec.box(100, 100), 0.5, 12345)
    frac = cfg.n_open / 10_000
    assert abs(frac - 0.5) < 0.02
    again = sample_config(WindowSpec.box(100, 100), 0.5, 12345)
    assert np.array_equal(cfg.open, again.open)


def test_subwindow_and_coupling():
    big = sample_config(WindowSpec.box(100, 100), 0.4, 7)
    sub = sample_config(WindowSpec((10, 20), (29, 59)), 0.4, 7)
    assert np.array_equal(big.open[10:30, 20:60], sub.open)
    lo = sample_config(WindowSpec.box(100, 100), 0.3, 7).open
    hi = sample_config(WindowSpec.box(100, 100), 0.6, 7).open
    assert not (lo & ~hi).any()


def test_uniform_statistics():
    u = site_uniforms(99, WindowSpec.box(200, 200).coords()).ravel()
    assert 0 <= u.min() and u.max() < 1
    assert abs(u.mean() - 0.5) < 0.005
    assert abs(np.corrcoef(u[:-1], u[1:])[0, 1]) < 0.02
    assert mix_seed(1, 2) != mix_seed(2, 1)
    assert mix_seed(5, 0) == mix_seed(5, 0)


def test_rle_roundtrip(tmp_path):
    cfg = sample_config(WindowSpec((0, -3), (9, 4), (True, False)), 0.37, 11)
    back = Configuration.loads(cfg.dumps())
    assert back.window == cfg.window and back.seed == 11 and back.p == 0.37
    assert np.array_equal(back.open, cfg.open)
    cfg.save(tmp_path / "c.cfg")
    assert np.array_equal(Configuration.load(tmp_path / "c.cfg").open, cfg.open)
    with pytest.raises(ValueError):
        Configuration.loads("LIPCFG 2\n")


def test_is_hole_examples():
    w = WindowSpec.box(4, 4, start=1)
    closed = Configuration(w, np.zeros((4, 4), bool), 0.0, 0)
    opened = Configuration(w, np.ones((4, 4), bool), 1.0, 0)
    assert is_hole(closed, (0, 0), 2) and is_hole(closed, (2, 2), 2)
    assert not is_hole(opened, (0, 0), 2)
    one = np.zeros((4, 4), bool)
    one[w.index((2, 2))] = True
    cfg = Configuration(w, one, 0.5, 0)
    assert not is_hole(cfg, (0, 0), 2)
    assert is_hole(cfg, (2, 2), 2)
    with pytest.raises(ValueError):
        is_hole(cfg, (3, 3), 2)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**31), st.floats(0.05, 0.9))
def test_is_hole_monotone(seed, p):
    w = WindowSpec.box(6, 6)
    a = sample_config(w, p, seed)
    b = sample_config(w, min(1.0, p + 0.1), seed)
    for z in [(0, 0), (1, 2), (3, 3)]:
        if is_hole(b, z, 2):
            assert is_hole(a, z, 2)


def test_helpers():
    assert holey_threshold(2) == pytest.approx(0.9375)
    assert round_half_up_div(np.array([0, 1, 2, 3, -1, -2, -3]), 2).tolist() == [0, 1, 1, 2, 0, -1, -1]


def test_geometry_invariants():
    g = CellGeometry.default(2, 2)
    assert (g.L, g.R, g.r, g.s) == (8, 4, 2, 4)
    assert g.s > g.J and (g.L - g.r) // 2 > g.J
    with pytest.raises(ValueError):
        CellGeometry(2, 2, 6)
    g3 = CellGeometry.default(3, 1)
    assert g3.r == 3 and g3.s == g3.L // 3


def _cells_by_brute_force(cfg, geom):
    w = cfg.window
    nb = w.shape[0] // geom.L
    nh = w.shape[1] // geom.s
    out = np.zeros((nb, nh), bool)
    for b in range(nb):
        xs = geom.footprint(b)
        x0 = xs[0]
        for h in range(nh):
            for z in range(geom.s * h, geom.s * (h + 1) - geom.r + 1):
                if z + geom.r - 1 >= w.shape[1]:
                    continue
                if is_hole(cfg, (x0 - 1, z - 1), geom.r):
                    out[b, h] = True
    return out


def test_holey_cells_fixture():
    geom = CellGeometry.default(2, 2)
    w = WindowSpec.box(16, 24, periodic=(True, False))
    arr = np.ones(w.shape, bool)
    x0 = geom.footprint(1)[0]
    arr[x0:x0 + 2, 9:11] = False  # one 2x2 closed square, heights 9..10 lie in cell 2
    cfg = Configuration(w, arr, 0.5, 0)
    field = holey_cell_field(cfg, geom)
    assert field.sum() == 1 and field[1, 2]
    assert not holey_cell_field(sample_config(w, 1.0, 0), geom).any()
    assert holey_cell_field(sample_config(w, 0.0, 0), geom).all()


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**31), st.floats(0.0, 0.6))
def test_holey_cells_match_brute_force(seed, p):
    geom = CellGeometry.default(2, 2)
    cfg = sample_config(WindowSpec.box(16, 20, periodic=(True, False)), p, seed)
    assert np.array_equal(holey_cell_field(cfg, geom), _cells_by_brute_force(cfg, geom))


def test_holey_frequency_monotone_in_p():
    geom = CellGeometry.default(2, 2)
    w = WindowSpec.box(64, 80, periodic=(True, False))
    freq = [holey_cell_field(sample_config(w, p, 5), geom).mean() for p in (0.1, 0.2, 0.3, 0.4, 0.5)]
    assert all(a >= b for a, b in zip(freq, freq[1:]))


def test_isometry():
    cfg = sample_config(WindowSpec.box(3, 5), 0.5, 2)
    t = apply_isometry(cfg, (1, 0), (1, -1))
    assert t.window.shape == (5, 3)
    for x in cfg.window.sites():
        assert t.open[x[1], 2 - x[0]] == cfg.open[x]
    assert hole_starts(sample_config(WindowSpec.box(8, 12, periodic=(True, False)), 0.0, 0),
                       CellGeometry.default(2, 2)).all()

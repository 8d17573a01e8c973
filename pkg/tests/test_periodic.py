import itertools

import numpy as np
import pytest
from hypothesis import given, strategies as st

from lipembed.lattice import AdjacencySpec, Colouring, STAR, WindowSpec, cluster_decompose
from lipembed.periodic import (TileParams, alpha_colour, alpha_dilated, slab_volume, tile_svg,
                               verify_periodic_properties)


def _alpha_by_slabs(x, d, R):
    """Reference: enumerate every k-slice and its thickened slab explicitly."""
    res = [v % R for v in x]
    for k in range(d + 1):
        a = d - 1 - k
        for far_axes in itertools.combinations(range(d), k):
            ok = True
            for i in range(d):
                if i in far_axes:
                    ok &= 1 <= res[i] <= R - 1
                else:
                    ok &= min(res[i], R - res[i]) <= a
            if ok:
                return k
    raise AssertionError("alpha undefined")


def test_examples():
    t = TileParams(1, 2)
    assert [alpha_colour((v,), t) for v in (0, 1, 2)] == [0, 1, 0]
    t = TileParams(2, 4)
    assert alpha_colour((0, 0), t) == 0
    assert alpha_colour((1, 1), t) == 0
    assert alpha_colour((2, 0), t) == 1
    assert alpha_colour((2, 2), t) == 2
    with pytest.raises(ValueError):
        TileParams(2, 3)


@given(st.integers(1, 3), st.integers(0, 4), st.lists(st.integers(-50, 50), min_size=3, max_size=3))
def test_alpha_matches_slab_enumeration(d, extra, x):
    R = 2 * d + extra
    t = TileParams(d, R)
    x = x[:d]
    assert alpha_colour(x, t) == _alpha_by_slabs(x, d, R)
    for i in range(d):
        y = list(x)
        y[i] += R
        assert alpha_colour(y, t) == alpha_colour(x, t)


def test_dilation():
    t1, t2 = TileParams(2, 4, 1), TileParams(2, 4, 2)
    pts = WindowSpec.box(8, 8, start=-4).coords()
    assert np.array_equal(alpha_dilated(pts, t1), alpha_colour(pts, t1))
    # ties round up: u = 1, J = 2 -> 1
    assert alpha_dilated((1, 0), t2) == alpha_colour((1, 0), t2)
    assert alpha_dilated((-1, 0), t2) == alpha_colour((0, 0), t2)


def test_dilated_zero_clusters_are_cubes():
    # horizontal tile of the d = 2 surface geometry (J = 2, R = 4) and a 2-d one
    for dd, side in ((1, 1 * 2), (2, 2)):
        t = TileParams(dd, 4, 2)
        w = WindowSpec.box(*([3 * t.L] * dd), periodic=True)
        chi = Colouring(w, alpha_dilated(w.coords(), t))
        zero = [c for c in cluster_decompose(chi, AdjacencySpec("linf", 2)) if c.colour == 0]
        assert len(zero) == 3 ** dd
        r = t.J * (2 * (dd + 1) - 3)
        for c in zero:
            assert c.volume == r ** dd


@pytest.mark.parametrize("d,R", [(1, 2), (2, 4), (2, 6), (3, 6), (2, 5)])
def test_verify(d, R):
    rep = verify_periodic_properties(TileParams(d, R))
    assert rep.ok, rep.violations
    assert rep.max_volume[0] == (2 * d - 1) ** d


def test_verify_dilated():
    rep = verify_periodic_properties(TileParams(2, 4, 2))
    assert rep.ok and max(rep.max_dilated_volume.values()) <= 64


def test_slab_volume():
    for d, R in [(1, 2), (2, 4), (3, 6), (4, 8)]:
        t = TileParams(d, R)
        for k in range(d + 1):
            assert slab_volume(t, k) < R ** d


def test_svg():
    assert tile_svg(TileParams(2, 4)).startswith("<svg")
    assert tile_svg(TileParams(3, 6), slice_z=1).count("<rect") == 144

import numpy as np
import pytest

from lipembed.colouring import (SeparatingFunction, build_lambda, build_separating_g, halfspace_bound,
                                in_intersection, lambda_svg, pull_back, verify_lambda_properties)
from lipembed.experiments import surface_window
from lipembed.lattice import NEG_INF, POS_INF, STAR, UNCOLOURED, WindowSpec, cluster_decompose
from lipembed.percolation import CellGeometry, Configuration, sample_config
from lipembed.renormalization import Embedding
from lipembed.surface import HeightField, SurfaceFailure

from faults import corrupted, fault_a, fault_b, fault_c

GEOM = CellGeometry.default(2, 2)


def first_success(p=0.3, width=64, geom=GEOM, seeds=range(200)):
    for seed in seeds:
        cfg = sample_config(surface_window(geom, width, p), p, seed)
        try:
            return build_lambda(cfg, geom)
        except SurfaceFailure:
            continue
    raise AssertionError("no successful build")


@pytest.fixture(scope="module")
def built():
    return first_success()


def test_trivial_configs():
    w = surface_window(GEOM, 32, 0.0, height=80)
    sc = build_lambda(sample_config(w, 0.0, 1), GEOM)
    assert (sc.F.heights == 1).all()
    assert (sc.lam.values == UNCOLOURED).all()
    assert verify_lambda_properties(sc).ok
    with pytest.raises(SurfaceFailure):
        build_lambda(sample_config(w, 1.0, 1), GEOM)
    assert sc.K == 64 and sc.C == 16


def test_built_colouring_is_valid(built):
    rep = verify_lambda_properties(built)
    assert rep.ok, rep.witnesses
    open_ = built.cfg.open
    lam = built.lam.values
    assert ((lam != UNCOLOURED) == open_).all()
    assert set(np.unique(lam[open_])) <= {NEG_INF, POS_INF, 1}
    for b, anchor in built.holes.items():
        assert not open_[anchor[0] + 1:anchor[0] + 1 + GEOM.r, anchor[1] + 1:anchor[1] + 1 + GEOM.r].any()


def test_g_sandwich_exhaustive(built):
    g = build_separating_g(built)
    lam = built.lam.values
    for x in range(lam.shape[0]):
        for z in range(lam.shape[1]):
            if not built.cfg.open[x, z]:
                continue
            if z < g.values[x]:
                assert lam[x, z] == NEG_INF
            if z > g.values[x] + g.C:
                assert lam[x, z] == POS_INF
    assert np.abs(np.diff(g.values)).max() <= GEOM.s / GEOM.L <= 1 / GEOM.d


def test_g_constant_and_slope():
    w = surface_window(GEOM, 32, 0.0, height=80)
    sc = build_lambda(sample_config(w, 0.0, 1), GEOM)
    for h in (1, 3):
        sc.F = HeightField(sc.F.base, np.full(sc.F.heights.shape, h))
        g = build_separating_g(sc)
        assert np.allclose(g.values, max(0, GEOM.s * h - GEOM.L / 2))
    sc.F = HeightField(sc.F.base, np.array([3, 4, 3, 3]))
    g = build_separating_g(sc)
    assert np.isclose(np.abs(np.diff(g.values)).max(), GEOM.s / GEOM.L)


def test_constant_field_cluster_bound():
    # open everywhere except a hole in every footprint at cell height 1
    w = surface_window(GEOM, 64, 0.5, height=120)
    arr = np.ones(w.shape, bool)
    for b in range(64 // GEOM.L):
        a, c = GEOM.footprint(b)
        arr[np.arange(a, c + 1) % 64, GEOM.s:GEOM.s + GEOM.r] = False
    sc = build_lambda(Configuration(w, arr, 0.5, 0), GEOM)
    assert (sc.F.heights == 1).all()
    rep = verify_lambda_properties(sc)
    assert rep.ok and 0 < rep.max_cluster <= GEOM.L ** GEOM.d


@pytest.mark.parametrize("variant", range(3))
def test_fault_a(built, variant):
    lam = fault_a(built, variant)
    rep = verify_lambda_properties(corrupted(built, lam))
    assert not rep.a_ok
    p, q = rep.witnesses["a"]
    assert lam[p] == POS_INF and lam[q] == NEG_INF


@pytest.mark.parametrize("variant", range(3))
def test_fault_b(built, variant):
    rep = verify_lambda_properties(corrupted(built, fault_b(built, variant)))
    assert not rep.b_ok and rep.witnesses["b"]["volume"] > built.K


@pytest.mark.parametrize("variant", range(3))
def test_fault_c(built, variant):
    lam, g = fault_c(built, variant)
    rep = verify_lambda_properties(corrupted(built, lam), g=g)
    assert not rep.c_ok
    if g is not None:
        assert rep.witnesses["c"][0] == 5 and not rep.g_lipschitz_ok


def test_transform_and_pullback(built):
    sc = build_lambda(built.cfg, GEOM, transform=((0, 1), (-1, 1)))
    assert verify_lambda_properties(sc).ok
    opens = [tuple(v) for v in np.argwhere(built.cfg.open)[:4]]
    f = Embedding(WindowSpec.box(2, 2), dict(zip(WindowSpec.box(2, 2).sites(), opens)), 100)
    chi = pull_back(built, f)
    assert all(chi[x] == built.lam[f.image[x]] for x in f.domain.sites())
    assert lambda_svg(built).startswith("<svg")


def test_halfspace_examples():
    d = 2
    a = {i: 1.0 for i in (-2, -1, 1, 2)}
    radius = halfspace_bound(a, d)
    assert radius == 4
    members = [x for x in WindowSpec.box(21, 21, start=-10).sites() if in_intersection(x, a, d)]
    assert (0, 0) in members
    assert max(abs(x) + abs(y) for x, y in members) <= radius
    for x in WindowSpec.box(21, 21, start=-10).sites():
        if sum(map(abs, x)) > radius:
            assert not in_intersection(x, a, d)
    with pytest.raises(ValueError):
        halfspace_bound({i: 0.0 for i in (-2, -1, 1, 2)}, d)


def test_halfspace_3d_random():
    rng = np.random.default_rng(0)
    for _ in range(5):
        a = {i: float(rng.uniform(0.2, 2)) for i in (-3, -2, -1, 1, 2, 3)}
        radius = halfspace_bound(a, 3)
        for x in WindowSpec.box(15, 15, 15, start=-7).sites():
            if in_intersection(x, a, 3):
                assert sum(map(abs, x)) <= radius

"""Random separating colourings built on a Lipschitz surface of holey cells.

Geometry (``d`` = dimension, last axis vertical):

* horizontal block ``b`` covers sites ``v`` with ``[v/L] = b``; the active
  block of column ``b`` covers heights ``[s F(b), s F(b) + L - 1]``;
* inside an active block, sites take the dilated slab colour ``alpha'`` when
  it is in ``1..d-1``; on the ``alpha' = 0`` footprint they become ``-inf``
  below the chosen hole and ``+inf`` above it;
* sites below (above) the active block of their column are ``-inf`` (``+inf``).

The horizontal window is a torus whose side is a multiple of ``L``.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np
from scipy.ndimage import maximum_filter

from .lattice import (NEG_INF, POS_INF, UNCOLOURED, AdjacencySpec, Colouring, WindowSpec,
                      cluster_decompose, linf_dist)
from .percolation import (CellGeometry, Configuration, apply_isometry, hole_starts,
                          holey_cell_field, round_half_up_div)
from .periodic import TileParams, alpha_dilated
from .surface import HeightField, SurfaceFailure, default_hmax, minimal_lipschitz_field


@dataclass
class SurfaceColouring:
    cfg: Configuration
    geom: CellGeometry
    lam: Colouring
    F: HeightField
    holes: dict
    hole_bottoms: np.ndarray = field(repr=False)

    @property
    def K(self) -> int:
        return self.geom.L ** self.geom.d

    @property
    def C(self) -> int:
        return 2 * self.geom.L


@dataclass
class SeparatingFunction:
    """Piecewise multilinear ``g`` sampled on every horizontal site column."""

    values: np.ndarray
    slope_bound: float
    C: int
    periodic: tuple

    def __call__(self, u) -> float:
        idx = tuple(int(v) % n for v, n in zip(u, self.values.shape))
        return float(self.values[idx])


def _block_index(u: np.ndarray, L: int, nb: int) -> np.ndarray:
    return round_half_up_div(u, L) % nb


def _check_window(cfg: Configuration, geom: CellGeometry):
    w = cfg.window
    if w.dim != geom.d:
        raise ValueError("configuration and geometry dimensions differ")
    for i in range(geom.d - 1):
        if not w.periodic[i] or w.lo[i] != 0 or w.shape[i] % geom.L:
            raise ValueError("horizontal axes must be periodic with extent a multiple of L")
    if w.lo[-1] != 0 or w.periodic[-1]:
        raise ValueError("vertical axis must be free and start at 0")
    if w.shape[-1] < geom.s + geom.L:
        raise ValueError("window too short for a single block row")


def check_geometry_arithmetic(geom: CellGeometry):
    """Hole side and block-overlap inequalities that property (a) relies on."""
    d, J, L, r, s = geom.d, geom.J, geom.L, geom.r, geom.s
    if not r >= J:
        raise AssertionError("hole side r must be at least J")
    if not (L - (d - 1) * s >= s > J):
        raise AssertionError("neighbouring active blocks must overlap by more than J")
    if not (L - r) // 2 > J:
        raise AssertionError("footprints must sit more than J inside their blocks")


def build_lambda(cfg: Configuration, geom: CellGeometry, hmax: int | None = None,
                 transform=None) -> SurfaceColouring:
    """Colour the open sites of ``cfg``; raises ``SurfaceFailure`` if no surface fits.

    ``transform`` is an optional ``(perm, signs)`` signed permutation applied to
    the configuration first.
    """
    if transform is not None:
        cfg = apply_isometry(cfg, *transform)
    _check_window(cfg, geom)
    check_geometry_arithmetic(geom)
    d, J, L, r, s = geom.d, geom.J, geom.L, geom.r, geom.s
    w = cfg.window
    H = w.shape[-1]
    nb = tuple(n // L for n in w.shape[:-1])

    starts = hole_starts(cfg, geom)
    holey = holey_cell_field(cfg, geom, starts)
    fits = (H - L) // s  # largest h whose block fits in the window
    if hmax is None:
        hmax = default_hmax(d, cfg.p)
    hmax = min(hmax, fits, holey.shape[-1] - 1)
    if hmax < 1:
        raise ValueError("window too short for any admissible height")
    admissible = holey[..., 1:hmax + 1]
    F = minimal_lipschitz_field(admissible, periodic=True)

    # lowest hole in each active cell
    hole_bottoms = np.zeros(nb, dtype=np.int64)
    holes = {}
    for b in np.ndindex(*nb):
        h = int(F.heights[b])
        lo, hi = s * h, s * (h + 1) - r
        z0 = lo + int(np.argmax(starts[b][lo:hi + 1]))
        hole_bottoms[b] = z0
        anchor = tuple(geom.footprint(bi)[0] - 1 for bi in b) + (z0 - 1,)
        holes[b] = anchor

    tile = TileParams(d - 1, geom.R, J)
    ucoords = WindowSpec.box(*w.shape[:-1]).coords()
    alpha_cols = alpha_dilated(ucoords, tile)
    bcols = tuple(_block_index(ucoords[..., i], L, nb[i]) for i in range(d - 1))
    Fcol = F.heights[bcols]
    zbot = hole_bottoms[bcols]
    # alpha' = 0 columns of block b must be exactly its footprint
    in_foot = np.ones(alpha_cols.shape, dtype=bool)
    for i in range(d - 1):
        lo_i = np.array([geom.footprint(b)[0] for b in range(nb[i])])
        in_foot &= (ucoords[..., i] - lo_i[bcols[i]]) % w.shape[i] < r
    if not np.array_equal(alpha_cols == 0, in_foot):
        raise AssertionError("dilated 0-clusters do not match the cell footprints")

    z = np.arange(H)
    shape = w.shape
    bottom = np.broadcast_to((s * Fcol)[..., None], shape)
    top = bottom + L - 1
    zz = np.broadcast_to(z, shape)
    al = np.broadcast_to(alpha_cols[..., None], shape)
    hb = np.broadcast_to(zbot[..., None], shape)
    lam = np.where(zz < bottom, NEG_INF, POS_INF)
    inside = (zz >= bottom) & (zz <= top)
    lam = np.where(inside & (al != 0), al, lam)
    foot = inside & (al == 0)
    lam = np.where(foot & (zz < hb), NEG_INF, lam)
    lam = np.where(foot & (zz >= hb) & (zz <= hb + r - 1), UNCOLOURED, lam)
    lam = np.where(cfg.open, lam, UNCOLOURED)
    if (foot & (zz >= hb) & (zz <= hb + r - 1) & cfg.open).any():
        raise AssertionError("chosen hole contains an open site")
    return SurfaceColouring(cfg, geom, Colouring(w, lam), F, holes, hole_bottoms)


def build_separating_g(sc: SurfaceColouring) -> SeparatingFunction:
    """``g = max(0, G - L/2)`` where ``G`` interpolates ``s F`` between block centres."""
    geom = sc.geom
    L, s, d = geom.L, geom.s, geom.d
    w = sc.cfg.window
    hshape = w.shape[:-1]
    nb = sc.F.heights.shape
    vals = s * sc.F.heights.astype(np.float64)
    ucoords = WindowSpec.box(*hshape).coords()
    base = np.floor_divide(ucoords, L)
    frac = (ucoords - base * L) / L
    G = np.zeros(hshape)
    for corner in itertools.product((0, 1), repeat=d - 1):
        weight = np.ones(hshape)
        idx = []
        for i, c in enumerate(corner):
            weight = weight * (frac[..., i] if c else 1.0 - frac[..., i])
            idx.append((base[..., i] + c) % nb[i])
        G = G + weight * vals[tuple(idx)]
    g = np.maximum(0.0, G - L / 2)
    return SeparatingFunction(g, s / L, 2 * L, tuple(True for _ in hshape))


@dataclass
class LambdaReport:
    a_ok: bool = True
    b_ok: bool = True
    c_ok: bool = True
    totality_ok: bool = True
    g_lipschitz_ok: bool = True
    max_cluster: int = 0
    witnesses: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return self.a_ok and self.b_ok and self.c_ok and self.totality_ok and self.g_lipschitz_ok

    def to_dict(self):
        return {"a": self.a_ok, "b": self.b_ok, "c": self.c_ok, "totality": self.totality_ok,
                "g_lipschitz": self.g_lipschitz_ok, "max_cluster": self.max_cluster,
                "ok": self.ok, "witnesses": self.witnesses}


def _dilate(mask: np.ndarray, window: WindowSpec, J: int) -> np.ndarray:
    modes = ["wrap" if p else "constant" for p in window.periodic]
    return maximum_filter(mask.astype(np.uint8), size=2 * J + 1, mode=modes, cval=0).astype(bool)


def verify_lambda_properties(sc: SurfaceColouring, K: int | None = None, C: int | None = None,
                             g: SeparatingFunction | None = None) -> LambdaReport:
    """Check separation (a), bounded finite clusters (b) and the ``g`` sandwich (c)."""
    rep = LambdaReport()
    geom = sc.geom
    J, d = geom.J, geom.d
    K = sc.K if K is None else K
    lam = sc.lam.values
    w = sc.lam.window
    open_ = sc.cfg.open

    coloured = lam != UNCOLOURED
    if (coloured != open_).any():
        rep.totality_ok = False
        idx = np.argwhere(coloured != open_)[0]
        rep.witnesses["totality"] = w.site(idx)

    pos = lam == POS_INF
    neg = lam == NEG_INF
    near_neg = _dilate(neg, w, J)
    clash = pos & near_neg
    if clash.any():
        rep.a_ok = False
        x = w.site(np.argwhere(clash)[0])
        y = None
        for idx in np.argwhere(neg):
            cand = w.site(idx)
            if linf_dist(x, cand, w) <= J:
                y = cand
                break
        rep.witnesses["a"] = (x, y)

    finite = [c for c in range(1, d)]
    clusters = cluster_decompose(sc.lam, AdjacencySpec("linf", J), colours=finite)
    if clusters:
        big = max(clusters, key=lambda c: c.volume)
        rep.max_cluster = big.volume
        if big.volume > K:
            rep.b_ok = False
            rep.witnesses["b"] = {"colour": big.colour, "volume": big.volume, "site": min(big.sites)}

    g = build_separating_g(sc) if g is None else g
    C = g.C if C is None else C
    gv = g.values[..., None]
    z = np.arange(w.shape[-1])
    below = (z < gv) & open_
    above = (z > gv + C) & open_
    bad_below = below & (lam != NEG_INF)
    bad_above = above & (lam != POS_INF)
    if bad_below.any() or bad_above.any():
        rep.c_ok = False
        which = bad_below if bad_below.any() else bad_above
        rep.witnesses["c"] = w.site(np.argwhere(which)[0])
    bound = 1.0 / d + 1e-12
    for ax in range(g.values.ndim):
        if g.values.shape[ax] > 1 and np.abs(np.diff(g.values, axis=ax, append=g.values.take([0], axis=ax))).max() > bound:
            rep.g_lipschitz_ok = False
    return rep


def pull_back(sc: SurfaceColouring, f) -> Colouring:
    """``chi = lambda o f`` on the domain of an embedding ``f`` into open sites."""
    chi = Colouring.blank(f.domain)
    for x in f.domain.sites():
        c = sc.lam[f.image[x]]
        if c == UNCOLOURED:
            raise ValueError(f"f({x}) = {f.image[x]} is not an open site")
        chi[x] = c
    return chi


def halfspace_bound(a: dict, d: int) -> float:
    """Radius ``d^2 max a`` of an l1 ball containing the intersection of all ``A_{+-i}``."""
    keys = {i for i in range(-d, d + 1) if i}
    if set(a) != keys:
        raise ValueError(f"need constants for indices +-1..+-{d}")
    if any(v <= 0 for v in a.values()):
        raise ValueError("halfspace constants must be positive")
    return d * d * max(a.values())


def in_halfspace(x, i: int, a_i: float, d: int) -> bool:
    """Membership of ``x`` in ``A_i`` (``i > 0``) or ``A_{-|i|}`` (``i < 0``)."""
    k = abs(i) - 1
    rest = sum(abs(v) for j, v in enumerate(x) if j != k)
    if i > 0:
        return d * x[k] <= rest + d * a_i
    return d * x[k] >= -rest - d * a_i


def in_intersection(x, a: dict, d: int) -> bool:
    return all(in_halfspace(x, i, a[i], d) for i in a)


def lambda_svg(sc: SurfaceColouring, cell: int = 4, margin: int | None = None) -> str:
    from .svgplot import grid_svg

    if sc.geom.d != 2:
        raise ValueError("images exist for d = 2 only")
    s, L = sc.geom.s, sc.geom.L
    margin = L if margin is None else margin
    lo = max(0, s * int(sc.F.heights.min()) - margin)
    hi = min(sc.lam.window.shape[-1], s * int(sc.F.heights.max()) + L + margin)
    return grid_svg(sc.lam.values[:, lo:hi], cell=cell, title="surface colouring")

"""The slab colouring ``alpha`` of Z^d and its J-dilation.

Per axis, a coordinate's residue mod R is either 0 (the ``{0}`` slice factor)
or in ``[1, R-1]``.  A k-slice has k factors of the second kind; its k-slab
thickens each ``{0}`` factor to ``[-a_k, a_k]`` with ``a_k = d - 1 - k``.
``alpha(x)`` is the least k such that x lies in some k-slab.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .lattice import STAR, AdjacencySpec, Colouring, WindowSpec, cluster_decompose
from .percolation import round_half_up_div


@dataclass(frozen=True)
class TileParams:
    d: int
    R: int
    J: int = 1

    def __post_init__(self):
        if self.d < 1:
            raise ValueError("d must be >= 1")
        if self.R < 2 * self.d:
            raise ValueError(f"need R >= 2d, got R={self.R}, d={self.d}")
        if self.J < 1:
            raise ValueError("J must be >= 1")

    @property
    def L(self) -> int:
        return self.R * self.J

    def thickness(self, k: int) -> int:
        return self.d - 1 - k


def _alpha_array(coords: np.ndarray, d: int, R: int) -> np.ndarray:
    coords = np.asarray(coords, dtype=np.int64)
    if coords.shape[-1] != d:
        raise ValueError(f"expected {d}-dimensional sites")
    res = np.mod(coords, R)
    dist0 = np.minimum(res, R - res)  # distance to the nearest multiple of R
    n_nonzero = (res != 0).sum(axis=-1)
    out = np.full(coords.shape[:-1], d, dtype=np.int64)
    for k in range(d, -1, -1):
        a = d - 1 - k
        n_far = (dist0 > a).sum(axis=-1)
        # some k-slab contains x iff far axes <= k <= nonzero axes
        ok = (n_far <= k) & (k <= n_nonzero)
        out = np.where(ok, k, out)
    return out


def alpha_colour(x, params: TileParams):
    """Colour in ``{0..d}``; ``x`` may be one site or an array ``(..., d)``."""
    arr = np.asarray(x)
    out = _alpha_array(arr, params.d, params.R)
    return int(out) if arr.ndim == 1 else out


def alpha_dilated(u, params: TileParams):
    """``alpha([u / J])`` with half-up rounding per coordinate."""
    arr = np.asarray(u, dtype=np.int64)
    out = _alpha_array(round_half_up_div(arr, params.J), params.d, params.R)
    return int(out) if arr.ndim == 1 else out


def slab_volume(params: TileParams, k: int) -> int:
    a = params.thickness(k)
    return (params.R - 1) ** k * (2 * a + 1) ** (params.d - k)


@dataclass
class PeriodicReport:
    params: TileParams
    periodic_ok: bool = True
    volume_ok: bool = True
    cubes_ok: bool = True
    slab_formula_ok: bool = True
    dilated_volume_ok: bool = True
    max_volume: dict = field(default_factory=dict)
    max_dilated_volume: dict = field(default_factory=dict)
    violations: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return (self.periodic_ok and self.volume_ok and self.cubes_ok
                and self.slab_formula_ok and self.dilated_volume_ok)

    def to_dict(self) -> dict:
        return {
            "d": self.params.d, "R": self.params.R, "J": self.params.J,
            "periodic": self.periodic_ok, "cluster_volume": self.volume_ok,
            "zero_cubes": self.cubes_ok, "slab_formula": self.slab_formula_ok,
            "dilated_volume": self.dilated_volume_ok,
            "max_volume": {str(k): v for k, v in sorted(self.max_volume.items())},
            "max_dilated_volume": {str(k): v for k, v in sorted(self.max_dilated_volume.items())},
            "violations": self.violations, "ok": self.ok,
        }


def verify_periodic_properties(params: TileParams, periods: int = 3) -> PeriodicReport:
    """Exhaustively check periodicity, cluster volumes and the 0-cubes.

    Clusters are computed on a torus of ``periods`` periods per axis, so no
    cluster is cut by a window edge.
    """
    if periods < 3:
        raise ValueError("need at least 3 periods per axis")
    d, R, J = params.d, params.R, params.J
    rep = PeriodicReport(params)
    n = periods * R
    torus = WindowSpec.box(*([n] * d), periodic=True)
    coords = torus.coords()
    colours = alpha_colour(coords, params)

    for i in range(d):
        shifted = coords.copy()
        shifted[..., i] += R
        bad = np.argwhere(alpha_colour(shifted, params) != colours)
        if bad.size:
            rep.periodic_ok = False
            rep.violations.append({"property": "periodic", "axis": i, "site": bad[0].tolist()})

    chi = Colouring(torus, colours)
    clusters = cluster_decompose(chi, STAR)
    for c in clusters:
        rep.max_volume[c.colour] = max(rep.max_volume.get(c.colour, 0), c.volume)
        if c.volume > R ** d:
            rep.volume_ok = False
            rep.violations.append({"property": "volume", "colour": c.colour, "volume": c.volume})

    half = d - 1
    expected = set()
    for centre in itertools.product(range(0, n, R), repeat=d):
        cube = frozenset(torus.wrap(tuple(c + o for c, o in zip(centre, off)))
                         for off in itertools.product(range(-half, half + 1), repeat=d))
        expected.add(cube)
    found = {c.sites for c in clusters if c.colour == 0}
    if found != expected:
        rep.cubes_ok = False
        extra = sorted(min(s) for s in found - expected)
        rep.violations.append({"property": "zero_cubes", "unexpected": [list(x) for x in extra[:3]]})

    for k in range(d + 1):
        if not slab_volume(params, k) < R ** d:
            rep.slab_formula_ok = False
            rep.violations.append({"property": "slab_formula", "k": k})

    # dilated colouring, under (l_inf, J)
    m = periods * params.L
    dtorus = WindowSpec.box(*([m] * d), periodic=True)
    dchi = Colouring(dtorus, alpha_dilated(dtorus.coords(), params))
    for c in cluster_decompose(dchi, AdjacencySpec("linf", J)):
        rep.max_dilated_volume[c.colour] = max(rep.max_dilated_volume.get(c.colour, 0), c.volume)
        if c.volume > params.L ** d:
            rep.dilated_volume_ok = False
            rep.violations.append({"property": "dilated_volume", "colour": c.colour, "volume": c.volume})
    return rep


def tile_svg(params: TileParams, periods: int = 2, cell: int = 12, dilated: bool = False,
             slice_z: int = 0) -> str:
    """SVG of ``periods`` periods of alpha (a z-slice when d = 3)."""
    from .svgplot import grid_svg

    d = params.d
    side = periods * (params.L if dilated else params.R)
    if d == 1:
        coords = np.arange(side).reshape(1, side, 1)
    elif d == 2:
        coords = WindowSpec.box(side, side).coords()
    elif d == 3:
        c2 = WindowSpec.box(side, side).coords()
        coords = np.concatenate([c2, np.full(c2.shape[:-1] + (1,), slice_z)], axis=-1)
    else:
        raise ValueError("images exist for d <= 3 only")
    f = alpha_dilated if dilated else alpha_colour
    vals = f(coords, params)
    return grid_svg(np.asarray(vals), cell=cell, title=f"alpha d={d} R={params.R} J={params.J}")

"""Integer-lattice geometry: windows, norms, adjacency graphs and clusters.

Sites are plain tuples of ints.  A :class:`WindowSpec` is a finite box with
inclusive bounds; any axis may be made periodic, in which case every distance
on that axis is the wrapped one.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Iterator, Sequence

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

Site = tuple

# Palette encoding shared by every colouring in the package.
NEG_INF = -(2**30)
POS_INF = 2**30
UNCOLOURED = -(2**31)


def colour_name(c: int) -> str:
    if c == NEG_INF:
        return "-inf"
    if c == POS_INF:
        return "+inf"
    if c == UNCOLOURED:
        return "none"
    return str(int(c))


@dataclass(frozen=True)
class WindowSpec:
    lo: tuple
    hi: tuple
    periodic: tuple = None

    def __post_init__(self):
        lo = tuple(int(v) for v in self.lo)
        hi = tuple(int(v) for v in self.hi)
        if len(lo) != len(hi) or not lo:
            raise ValueError("lo and hi must be non-empty and of equal length")
        per = self.periodic
        if per is None or isinstance(per, bool):
            per = (bool(per),) * len(lo)
        per = tuple(bool(v) for v in per)
        if len(per) != len(lo):
            raise ValueError("periodic flags must match the dimension")
        for i, (a, b) in enumerate(zip(lo, hi)):
            if a > b:
                raise ValueError(f"axis {i}: lo {a} > hi {b}")
            if per[i] and b - a + 1 < 2:
                raise ValueError(f"axis {i}: periodic axes need extent >= 2")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)
        object.__setattr__(self, "periodic", per)

    @classmethod
    def box(cls, *sides, start=0, periodic=False):
        """Box ``[start, start+side-1]`` on each axis."""
        return cls(tuple(start for _ in sides), tuple(start + s - 1 for s in sides), periodic)

    @property
    def dim(self) -> int:
        return len(self.lo)

    @property
    def shape(self) -> tuple:
        return tuple(b - a + 1 for a, b in zip(self.lo, self.hi))

    @property
    def size(self) -> int:
        return int(np.prod(self.shape))

    def wrap(self, x: Sequence[int]) -> Site:
        """Reduce the periodic coordinates of ``x`` into the window."""
        out = []
        for i, v in enumerate(x):
            if self.periodic[i]:
                n = self.hi[i] - self.lo[i] + 1
                v = self.lo[i] + (v - self.lo[i]) % n
            out.append(int(v))
        return tuple(out)

    def contains(self, x: Sequence[int]) -> bool:
        if len(x) != self.dim:
            return False
        x = self.wrap(x)
        return all(a <= v <= b for v, a, b in zip(x, self.lo, self.hi))

    def index(self, x: Sequence[int]) -> tuple:
        """Array index of site ``x`` (after wrapping)."""
        if not self.contains(x):
            raise ValueError(f"site {tuple(x)} outside window {self.lo}..{self.hi}")
        return tuple(v - a for v, a in zip(self.wrap(x), self.lo))

    def site(self, idx: Sequence[int]) -> Site:
        return tuple(int(i) + a for i, a in zip(idx, self.lo))

    def sites(self) -> Iterator[Site]:
        """All sites in lexicographic order."""
        return itertools.product(*(range(a, b + 1) for a, b in zip(self.lo, self.hi)))

    def coords(self) -> np.ndarray:
        """Array of shape ``shape + (dim,)`` holding the site coordinates."""
        axes = [np.arange(a, b + 1) for a, b in zip(self.lo, self.hi)]
        return np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1)


def _check_dims(x, y):
    if len(x) != len(y):
        raise ValueError(f"dimension mismatch: {len(x)} vs {len(y)}")


def _axis_dists(x, y, window: WindowSpec | None):
    _check_dims(x, y)
    if window is not None and window.dim != len(x):
        raise ValueError("window dimension does not match the sites")
    out = []
    for i, (a, b) in enumerate(zip(x, y)):
        t = abs(int(a) - int(b))
        if window is not None and window.periodic[i]:
            n = window.shape[i]
            t %= n
            t = min(t, n - t)
        out.append(t)
    return out


def l1_dist(x: Sequence[int], y: Sequence[int], window: WindowSpec | None = None) -> int:
    return sum(_axis_dists(x, y, window))


def linf_dist(x: Sequence[int], y: Sequence[int], window: WindowSpec | None = None) -> int:
    return max(_axis_dists(x, y, window), default=0)


@dataclass(frozen=True)
class AdjacencySpec:
    """Edge rule ``0 < ||u - v||_norm <= k``; norm is ``"l1"`` or ``"linf"``."""

    norm: str = "linf"
    k: int = 1

    def __post_init__(self):
        if self.norm not in ("l1", "linf"):
            raise ValueError(f"unsupported norm {self.norm!r}")
        if int(self.k) < 1:
            raise ValueError("adjacency range must be >= 1")

    def dist(self, x, y, window=None) -> int:
        return l1_dist(x, y, window) if self.norm == "l1" else linf_dist(x, y, window)

    def offsets(self, dim: int) -> tuple:
        return _ball_offsets(self.norm, int(self.k), dim)


STAR = AdjacencySpec("linf", 1)
NEAREST = AdjacencySpec("l1", 1)


@lru_cache(maxsize=None)
def _ball_offsets(norm: str, k: int, dim: int) -> tuple:
    out = []
    for off in itertools.product(range(-k, k + 1), repeat=dim):
        if not any(off):
            continue
        size = sum(map(abs, off)) if norm == "l1" else max(map(abs, off))
        if size <= k:
            out.append(off)
    return tuple(out)


def graph_neighbors(U: WindowSpec, x: Sequence[int], adj: AdjacencySpec) -> set:
    """Neighbours of ``x`` in ``G(U, adj.norm, adj.k)``."""
    if not U.contains(x):
        raise ValueError(f"site {tuple(x)} outside window")
    x = U.wrap(x)
    out = set()
    for off in adj.offsets(U.dim):
        y = tuple(a + b for a, b in zip(x, off))
        if not U.contains(y):
            continue
        y = U.wrap(y)
        # on short periodic axes an offset can wrap back onto x or shrink
        if 0 < adj.dist(x, y, U) <= adj.k:
            out.add(y)
    return out


@dataclass
class Colouring:
    """Window-indexed colour array; ``UNCOLOURED`` marks sites with no colour."""

    window: WindowSpec
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.int64)
        if self.values.shape != self.window.shape:
            raise ValueError(f"colour array shape {self.values.shape} != window {self.window.shape}")

    @classmethod
    def blank(cls, window: WindowSpec):
        return cls(window, np.full(window.shape, UNCOLOURED, dtype=np.int64))

    @classmethod
    def from_mapping(cls, window: WindowSpec, mapping: dict):
        chi = cls.blank(window)
        for x, c in mapping.items():
            chi[x] = c
        return chi

    def __getitem__(self, x) -> int:
        return int(self.values[self.window.index(x)])

    def __setitem__(self, x, c):
        self.values[self.window.index(x)] = c

    def copy(self):
        return Colouring(self.window, self.values.copy())

    def coloured_mask(self) -> np.ndarray:
        return self.values != UNCOLOURED


@dataclass
class ClusterReport:
    colour: int
    sites: frozenset = field(repr=False)
    volume: int
    diameter: int

    def __repr__(self):
        return f"ClusterReport(colour={colour_name(self.colour)}, volume={self.volume}, diameter={self.diameter})"


def _shift_pairs(window: WindowSpec, off):
    """Index arrays (src, dst) of all in-window pairs ``dst = src + off``."""
    src_axes, dst_axes = [], []
    for n, o, per in zip(window.shape, off, window.periodic):
        if per:
            a = np.arange(n)
            b = (a + o) % n
        else:
            a = np.arange(max(0, -o), min(n, n - o))
            b = a + o
        if a.size == 0:
            return None
        src_axes.append(a)
        dst_axes.append(b)
    return np.ix_(*src_axes), np.ix_(*dst_axes)


def label_components(window: WindowSpec, values: np.ndarray, valid: np.ndarray,
                     adj: AdjacencySpec) -> np.ndarray:
    """Label monochromatic components of ``values`` restricted to ``valid``.

    Returns an int array over the window: -1 off ``valid``, otherwise a
    component id (ids are arbitrary but consistent).
    """
    values = np.asarray(values)
    valid = np.asarray(valid, dtype=bool)
    n = window.size
    flat_ids = np.arange(n).reshape(window.shape)
    srcs, dsts = [], []
    for off in adj.offsets(window.dim):
        # each undirected edge is found from its lexicographically positive offset
        if off <= tuple(0 for _ in off):
            continue
        pairs = _shift_pairs(window, off)
        if pairs is None:
            continue
        s, t = pairs
        ok = valid[s] & valid[t] & (values[s] == values[t])
        if ok.any():
            srcs.append(flat_ids[s][ok])
            dsts.append(flat_ids[t][ok])
    if srcs:
        src = np.concatenate(srcs)
        dst = np.concatenate(dsts)
    else:
        src = dst = np.zeros(0, dtype=np.int64)
    graph = coo_matrix((np.ones(src.size, dtype=np.int8), (src, dst)), shape=(n, n))
    _, labels = connected_components(graph, directed=False)
    labels = labels.reshape(window.shape)
    return np.where(valid, labels, -1)


def _axis_diameter(vals: np.ndarray, n: int, periodic: bool) -> int:
    u = np.unique(vals)
    if not periodic:
        return int(u[-1] - u[0])
    t = np.abs(u[:, None] - u[None, :]) % n
    return int(np.minimum(t, n - t).max())


def cluster_decompose(chi: Colouring, adj: AdjacencySpec, restrict_to=None,
                      colours: Iterable[int] | None = None) -> list:
    """Monochromatic connected components of a colouring.

    ``restrict_to`` is a boolean mask over the window or a set of sites;
    ``colours`` restricts which colours are reported.  Reports are sorted by
    colour, then by volume (largest first).
    """
    window = chi.window
    valid = chi.coloured_mask()
    if restrict_to is not None:
        if isinstance(restrict_to, np.ndarray):
            valid &= restrict_to.astype(bool)
        else:
            mask = np.zeros(window.shape, dtype=bool)
            for x in restrict_to:
                if window.contains(x):
                    mask[window.index(x)] = True
            valid &= mask
    if colours is not None:
        valid &= np.isin(chi.values, np.fromiter(colours, dtype=np.int64))
    labels = label_components(window, chi.values, valid, adj)
    idx = np.nonzero(valid)
    if idx[0].size == 0:
        return []
    labs = labels[idx]
    order = np.argsort(labs, kind="stable")
    labs = labs[order]
    coords = np.stack(idx, axis=-1)[order] + np.asarray(window.lo)
    cuts = np.flatnonzero(np.diff(labs)) + 1
    reports = []
    for block in np.split(coords, cuts):
        c = int(chi.values[window.index(tuple(block[0]))])
        diam = max(_axis_diameter(block[:, i], window.shape[i], window.periodic[i])
                   for i in range(window.dim))
        sites = frozenset(tuple(int(v) for v in row) for row in block)
        reports.append(ClusterReport(c, sites, len(sites), diam))
    reports.sort(key=lambda r: (r.colour, -r.volume, min(r.sites)))
    return reports


def _corner_box(T: WindowSpec):
    if any(a != 0 for a in T.lo):
        raise ValueError("cuboid must have lower corner at the origin")
    return T.hi


def on_boundary(T: WindowSpec, x: Sequence[int]) -> bool:
    t = _corner_box(T)
    if not T.contains(x):
        return False
    return any(v == 0 or v == ti for v, ti in zip(x, t))


def boundary_mask(T: WindowSpec) -> np.ndarray:
    t = _corner_box(T)
    coords = T.coords()
    return ((coords == 0) | (coords == np.asarray(t))).any(axis=-1)


def antipodal_site(T: WindowSpec, x: Sequence[int]) -> Site:
    """The antipode ``t - x`` of a boundary site of the cuboid ``[0, t]``."""
    t = _corner_box(T)
    if not on_boundary(T, x):
        raise ValueError(f"site {tuple(x)} is not on the boundary")
    return tuple(int(ti - v) for ti, v in zip(t, x))

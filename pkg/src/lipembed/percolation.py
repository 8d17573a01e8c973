"""Seeded Bernoulli site percolation, holes and holey cells.

Site states come from a stateless hash of ``(seed, coordinates)`` mapped to a
uniform on [0, 1): a site is open iff its uniform is below ``p``.  The same
seed therefore couples all values of ``p`` monotonically, and any sub-window
of a larger window sees identical states.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .lattice import WindowSpec

_MASK = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15
_AXIS_KEYS = np.array([0xD1B54A32D192ED03 * (i + 1) & _MASK for i in range(16)], dtype=np.uint64)


def _mix64(z: np.ndarray) -> np.ndarray:
    # splitmix64 finalizer
    z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
    return z ^ (z >> np.uint64(31))


def mix_seed(*keys: int) -> int:
    """Deterministic 64-bit hash of a tuple of integers (splittable seeding)."""
    h = np.array([_GOLDEN], dtype=np.uint64)
    with np.errstate(over="ignore"):
        for k in keys:
            k = np.array([int(k) & _MASK], dtype=np.uint64)
            h = _mix64(h ^ (k + np.uint64(_GOLDEN)))
    return int(h[0])


def site_uniforms(seed, coords: np.ndarray) -> np.ndarray:
    """Uniform [0,1) draw per site; ``coords`` has shape ``(..., d)``.

    ``seed`` may be an integer or an array broadcastable against
    ``coords.shape[:-1]`` (one seed per trial, say).
    """
    coords = np.asarray(coords, dtype=np.int64)
    if np.ndim(seed) == 0:
        seed = np.uint64(int(seed) & _MASK)
    else:
        seed = np.asarray(seed, dtype=np.uint64)
    with np.errstate(over="ignore"):
        h = _mix64(seed + np.uint64(_GOLDEN))
        for i in range(coords.shape[-1]):
            c = coords[..., i].view(np.uint64)
            h = _mix64(h ^ (c * np.uint64(0x9FB21C651E98DF25) + _AXIS_KEYS[i]))
    return (h >> np.uint64(11)).astype(np.float64) * (1.0 / (1 << 53))


@dataclass
class Configuration:
    window: WindowSpec
    open: np.ndarray
    p: float
    seed: int
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.open = np.asarray(self.open, dtype=bool)
        if self.open.shape != self.window.shape:
            raise ValueError(f"bit field shape {self.open.shape} != window {self.window.shape}")

    def is_open(self, x) -> bool:
        return bool(self.open[self.window.index(x)])

    @property
    def n_open(self) -> int:
        return int(self.open.sum())

    def open_sites(self) -> list:
        """Open sites in lexicographic order."""
        idx = np.argwhere(self.open)
        lo = np.asarray(self.window.lo)
        return [tuple(int(v) for v in row + lo) for row in idx]

    # run-length text format, see docs/formats.md
    def dumps(self) -> str:
        w = self.window
        bits = self.open.ravel().astype(np.int8)
        change = np.flatnonzero(np.diff(bits)) + 1
        bounds = np.concatenate([[0], change, [bits.size]])
        runs = np.diff(bounds)
        lines = [
            "LIPCFG 1",
            f"dim {w.dim}",
            "lo " + " ".join(map(str, w.lo)),
            "hi " + " ".join(map(str, w.hi)),
            "periodic " + " ".join(str(int(v)) for v in w.periodic),
            f"p {self.p!r}",
            f"seed {int(self.seed)}",
            f"first {int(bits[0]) if bits.size else 0}",
            "runs " + " ".join(map(str, runs.tolist())),
        ]
        return "\n".join(lines) + "\n"

    @classmethod
    def loads(cls, text: str) -> "Configuration":
        fields = {}
        for line in text.strip().splitlines():
            key, _, rest = line.partition(" ")
            fields[key] = rest.split()
        if fields.get("LIPCFG") != ["1"]:
            raise ValueError("not a LIPCFG version 1 file")
        lo = tuple(map(int, fields["lo"]))
        hi = tuple(map(int, fields["hi"]))
        per = tuple(bool(int(v)) for v in fields["periodic"])
        window = WindowSpec(lo, hi, per)
        if int(fields["dim"][0]) != window.dim:
            raise ValueError("dim header disagrees with bounds")
        runs = np.array(list(map(int, fields.get("runs", []))), dtype=np.int64)
        state = int(fields["first"][0])
        vals = np.zeros(len(runs), dtype=bool)
        vals[::2] = bool(state)
        vals[1::2] = not bool(state)
        bits = np.repeat(vals, runs)
        if bits.size != window.size:
            raise ValueError("run lengths do not cover the window")
        return cls(window, bits.reshape(window.shape), float(fields["p"][0]), int(fields["seed"][0]))

    def save(self, path):
        Path(path).write_text(self.dumps())

    @classmethod
    def load(cls, path):
        return cls.loads(Path(path).read_text())


def _check_p(p):
    if not 0.0 <= p <= 1.0 or math.isnan(p):
        raise ValueError(f"p must lie in [0, 1], got {p}")


def uniform_field(window: WindowSpec, seed: int) -> np.ndarray:
    return site_uniforms(seed, window.coords())


def sample_config(window: WindowSpec, p: float, seed: int) -> Configuration:
    _check_p(p)
    return Configuration(window, uniform_field(window, seed) < p, float(p), int(seed))


def apply_isometry(cfg: Configuration, perm, signs) -> Configuration:
    """Configuration seen through the signed permutation ``x -> (s_i x_{perm_i})``.

    New axis ``i`` is old axis ``perm[i]``, reversed when ``signs[i] < 0``.
    The result lives on a window anchored at the origin.
    """
    perm = tuple(perm)
    if sorted(perm) != list(range(cfg.window.dim)):
        raise ValueError("perm must be a permutation of the axes")
    arr = np.transpose(cfg.open, perm)
    for i, s in enumerate(signs):
        if s < 0:
            arr = np.flip(arr, axis=i)
    per = tuple(cfg.window.periodic[j] for j in perm)
    window = WindowSpec.box(*arr.shape, periodic=per)
    meta = dict(cfg.meta, isometry={"perm": list(perm), "signs": [int(s) for s in signs]})
    return Configuration(window, arr, cfg.p, cfg.seed, meta)


def is_hole(cfg: Configuration, z, r: int) -> bool:
    """True iff every site of the cube ``z + [1, r]^d`` is closed."""
    w = cfg.window
    if r < 1:
        raise ValueError("hole side must be positive")
    idx = []
    for i, zi in enumerate(z):
        lo, hi = zi + 1, zi + r
        if w.periodic[i]:
            if r > w.shape[i]:
                raise ValueError("cube exceeds the periodic extent")
            idx.append([(v - w.lo[i]) % w.shape[i] for v in range(lo, hi + 1)])
        else:
            if lo < w.lo[i] or hi > w.hi[i]:
                raise ValueError(f"cube z+[1,{r}]^d exceeds the window on axis {i}")
            idx.append(list(range(lo - w.lo[i], hi - w.lo[i] + 1)))
    return not cfg.open[np.ix_(*idx)].any()


def holey_threshold(d: int) -> float:
    """Cell-holey probability above which a Lipschitz surface of holey cells exists."""
    return 1.0 - (2 * d) ** -2.0


def round_half_up_div(num, den):
    """Nearest integer to ``num/den`` with ties rounded up (integer arithmetic)."""
    return (2 * np.asarray(num) + den) // (2 * den)


@dataclass(frozen=True)
class CellGeometry:
    d: int
    J: int
    L: int
    r: int = None
    s: int = None

    def __post_init__(self):
        d, J, L = int(self.d), int(self.J), int(self.L)
        if d < 2:
            raise ValueError("cell geometry needs d >= 2")
        if J < 1 or L < 1 or L % J:
            raise ValueError("L must be a positive multiple of J")
        r = J * (2 * d - 3)
        s = L // d
        if self.r is not None and self.r != r:
            raise ValueError(f"r must equal J(2d-3) = {r}")
        if self.s is not None and self.s != s:
            raise ValueError(f"s must equal floor(L/d) = {s}")
        if not s > J:
            raise ValueError(f"need s = floor(L/d) = {s} > J = {J}")
        if not (L - r) // 2 > J:
            raise ValueError(f"need floor((L-r)/2) = {(L - r) // 2} > J = {J}")
        if L // J < 2 * (d - 1):
            raise ValueError(f"need R = L/J >= 2(d-1), got {L // J}")
        object.__setattr__(self, "r", r)
        object.__setattr__(self, "s", s)

    @classmethod
    def default(cls, d: int, J: int):
        """Smallest valid L for which a hole fits inside a cell (s >= r)."""
        L = J
        while True:
            try:
                g = cls(d, J, L)
            except ValueError:
                L += J
                continue
            if g.s >= g.r:
                return g
            L += J

    @property
    def R(self) -> int:
        return self.L // self.J

    def footprint(self, b: int) -> tuple:
        """Inclusive interval, on one horizontal axis, of the 0-cluster at ``L*b``."""
        J, R, half = self.J, self.R, self.d - 2
        lo_m, hi_m = R * b - half, R * b + half
        # u rounds to m iff J*m - J/2 <= u < J*m + J/2
        return (-((-(2 * J * lo_m - J)) // 2), -((-(2 * J * hi_m + J)) // 2) - 1)

    def block(self, b: int) -> tuple:
        """Inclusive interval of sites ``v`` with ``[v/L] = b`` on one horizontal axis."""
        L = self.L
        return (-((-(2 * L * b - L)) // 2), -((-(2 * L * b + L)) // 2) - 1)

    def cell_heights(self, h: int) -> tuple:
        return (self.s * h, self.s * (h + 1) - 1)

    def block_heights(self, h: int) -> tuple:
        return (self.s * h, self.s * h + self.L - 1)


def _check_cell_window(cfg: Configuration, geom: CellGeometry):
    w = cfg.window
    if w.dim != geom.d:
        raise ValueError("configuration dimension differs from the geometry")
    for i in range(geom.d - 1):
        if not w.periodic[i] or w.lo[i] != 0 or w.shape[i] % geom.L:
            raise ValueError("horizontal axes must be periodic, start at 0 and have extent a multiple of L")
    if w.periodic[-1] or w.lo[-1] != 0:
        raise ValueError("vertical axis must be free and start at 0")


def hole_starts(cfg: Configuration, geom: CellGeometry) -> np.ndarray:
    """Boolean array ``(nb,)*(d-1) + (H - r + 1,)``: a hole fills the block-column
    footprint at heights ``[z, z + r - 1]``."""
    _check_cell_window(cfg, geom)
    w = cfg.window
    nb = tuple(n // geom.L for n in w.shape[:-1])
    H = w.shape[-1]
    r = geom.r
    closed = ~cfg.open
    out = np.zeros(nb + (max(H - r + 1, 0),), dtype=bool)
    if H < r:
        return out
    for b in np.ndindex(*nb):
        cols = []
        for i, bi in enumerate(b):
            a, c = geom.footprint(bi)
            cols.append(np.arange(a, c + 1) % w.shape[i])
        sub = closed[np.ix_(*cols, np.arange(H))]
        col_closed = sub.reshape(-1, H).all(axis=0)
        out[b] = sliding_window_view(col_closed, r).all(axis=-1)
    return out


def holey_cell_field(cfg: Configuration, geom: CellGeometry, starts: np.ndarray | None = None) -> np.ndarray:
    """Holey indicator per cell ``(block index..., height index h)``.

    Cell ``h`` covers heights ``[s h, s(h+1) - 1]``; only cells fully inside
    the window are reported.
    """
    if starts is None:
        starts = hole_starts(cfg, geom)
    s, r = geom.s, geom.r
    H = cfg.window.shape[-1]
    nh = H // s
    out = np.zeros(starts.shape[:-1] + (nh,), dtype=bool)
    if s < r:
        return out
    for h in range(nh):
        lo, hi = s * h, s * (h + 1) - r
        out[..., h] = starts[..., lo:hi + 1].any(axis=-1)
    return out

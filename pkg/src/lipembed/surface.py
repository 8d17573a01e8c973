"""Pointwise-minimal 1-Lipschitz height fields over an admissibility field.

The relaxation starts from ``F = 1`` and repeatedly raises each column to the
least admissible height compatible with its neighbours.  The update map is
monotone, so from any start below every valid field it climbs to the least
valid field (or overflows ``Hmax``, proving none exists).  See
``docs/notes.md`` for the argument.
"""
from __future__ import annotations

import io
import math
from dataclasses import dataclass

import numpy as np

from .lattice import WindowSpec


class SurfaceFailure(RuntimeError):
    """No admissible 1-Lipschitz field fits under ``Hmax``."""

    def __init__(self, column, hmax):
        self.column = tuple(int(c) for c in column)
        self.hmax = hmax
        super().__init__(f"no admissible height <= {hmax} for column {self.column}")


@dataclass
class HeightField:
    base: WindowSpec
    heights: np.ndarray

    def __post_init__(self):
        self.heights = np.asarray(self.heights, dtype=np.int64)
        if self.heights.shape != self.base.shape:
            raise ValueError("heights must cover the base window")
        if (self.heights < 1).any():
            raise ValueError("heights must be positive")

    def __getitem__(self, u) -> int:
        return int(self.heights[self.base.index(u)])

    def is_lipschitz(self) -> bool:
        return _lipschitz_witness(self.heights, self.base.periodic) is None

    def to_csv(self) -> str:
        buf = io.StringIO()
        k = self.base.dim
        buf.write(",".join([f"u{i}" for i in range(k)] + ["height"]) + "\n")
        for u in self.base.sites():
            buf.write(",".join(map(str, u)) + f",{self[u]}\n")
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str, periodic=True):
        rows = [line.split(",") for line in text.strip().splitlines()[1:]]
        pts = np.array([[int(v) for v in row] for row in rows], dtype=np.int64)
        coords, h = pts[:, :-1], pts[:, -1]
        lo, hi = coords.min(axis=0), coords.max(axis=0)
        base = WindowSpec(tuple(lo), tuple(hi), periodic)
        heights = np.zeros(base.shape, dtype=np.int64)
        heights[tuple((coords - lo).T)] = h
        return cls(base, heights)


def default_hmax(d: int, p: float) -> int:
    if p >= 1.0:
        return 8 * d
    return 8 * d * math.ceil(1.0 / (1.0 - p))


def _periodic_flags(periodic, ndim):
    if isinstance(periodic, (bool, np.bool_)):
        return (bool(periodic),) * ndim
    return tuple(bool(v) for v in periodic)


def _neighbour_max(F: np.ndarray, periodic) -> np.ndarray:
    out = np.zeros_like(F)
    for ax in range(F.ndim):
        n = F.shape[ax]
        if n == 1:
            continue
        if periodic[ax]:
            out = np.maximum(out, np.roll(F, 1, ax))
            out = np.maximum(out, np.roll(F, -1, ax))
        else:
            fwd = np.zeros_like(F)
            back = np.zeros_like(F)
            sl = [slice(None)] * F.ndim
            sl2 = [slice(None)] * F.ndim
            sl[ax], sl2[ax] = slice(1, None), slice(None, -1)
            fwd[tuple(sl)] = F[tuple(sl2)]
            back[tuple(sl2)] = F[tuple(sl)]
            out = np.maximum(out, np.maximum(fwd, back))
    return out


def _next_admissible(admissible: np.ndarray) -> np.ndarray:
    """``nxt[..., h]`` = least admissible height >= h (1-based), else Hmax + 1."""
    hmax = admissible.shape[-1]
    heights = np.arange(1, hmax + 1)
    idx = np.where(admissible, heights, hmax + 1)
    nxt = np.minimum.accumulate(idx[..., ::-1], axis=-1)[..., ::-1]
    pad = np.full(admissible.shape[:-1] + (1,), hmax + 1)
    # index 0 is unused so that nxt[..., h] reads naturally
    return np.concatenate([nxt[..., :1], nxt, pad], axis=-1)


def _relax(admissible: np.ndarray, start: np.ndarray, periodic):
    hmax = admissible.shape[-1]
    nxt = _next_admissible(admissible)
    F = np.asarray(start, dtype=np.int64).copy()
    while True:
        lower = np.maximum(F, _neighbour_max(F, periodic) - 1)
        lower = np.clip(lower, 1, hmax + 1)
        new = np.take_along_axis(nxt, lower[..., None], axis=-1)[..., 0]
        if (new > hmax).any():
            return None, np.argwhere(new > hmax)[0]
        if np.array_equal(new, F):
            return F, None
        F = new


def minimal_lipschitz_field(admissible: np.ndarray, periodic=True, base: WindowSpec | None = None) -> HeightField:
    """Least ``F >= 1`` with ``admissible[u, F(u) - 1]`` and ``|F(u) - F(v)| <= 1``
    on nearest neighbours.  The last axis of ``admissible`` indexes heights
    ``1..Hmax``."""
    admissible = np.asarray(admissible, dtype=bool)
    if admissible.ndim < 2 or admissible.shape[-1] < 1:
        raise ValueError("admissible needs a base axis and Hmax >= 1")
    shape = admissible.shape[:-1]
    per = _periodic_flags(periodic, len(shape)) if base is None else base.periodic
    if base is None:
        if any(p and n < 2 for p, n in zip(per, shape)):
            per = tuple(p and n >= 2 for p, n in zip(per, shape))
        base = WindowSpec.box(*shape, periodic=per)
    F, bad = _relax(admissible, np.ones(shape, dtype=np.int64), per)
    if F is None:
        raise SurfaceFailure(base.site(bad), admissible.shape[-1])
    return HeightField(base, F)


def _lipschitz_witness(F: np.ndarray, periodic):
    for ax in range(F.ndim):
        n = F.shape[ax]
        if n == 1:
            continue
        if periodic[ax]:
            diff = np.abs(F - np.roll(F, -1, ax))
        else:
            diff = np.abs(np.diff(F, axis=ax))
        bad = np.argwhere(diff > 1)
        if bad.size:
            return ax, tuple(int(v) for v in bad[0])
    return None


def verify_lipschitz_field(F: HeightField, admissible: np.ndarray, check_minimal: bool = False):
    """Return ``(ok, witness)``.

    Checks the 1-Lipschitz property on neighbour pairs and admissibility at
    every column.  With ``check_minimal`` it also confirms that no single
    column can be lowered by one and re-relaxed to a valid field.
    """
    admissible = np.asarray(admissible, dtype=bool)
    h = F.heights
    hmax = admissible.shape[-1]
    if admissible.shape[:-1] != h.shape:
        raise ValueError("admissible field and height field disagree on the base")
    per = F.base.periodic
    w = _lipschitz_witness(h, per)
    if w is not None:
        ax, idx = w
        return False, {"reason": "lipschitz", "axis": ax, "column": F.base.site(idx)}
    if (h > hmax).any():
        idx = np.argwhere(h > hmax)[0]
        return False, {"reason": "above_hmax", "column": F.base.site(idx)}
    ok = np.take_along_axis(admissible, (h - 1)[..., None], axis=-1)[..., 0]
    if not ok.all():
        idx = np.argwhere(~ok)[0]
        return False, {"reason": "inadmissible", "column": F.base.site(idx)}
    if check_minimal:
        for idx in np.ndindex(*h.shape):
            if h[idx] == 1:
                continue
            start = h.copy()
            start[idx] -= 1
            G, _ = _relax(admissible, start, per)
            if G is not None and G[idx] < h[idx]:
                return False, {"reason": "not_minimal", "column": F.base.site(idx),
                               "lower": int(G[idx])}
    return True, None

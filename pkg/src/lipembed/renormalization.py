"""Vertical r-clumps of Z^D, clump refinement of embeddings, quasi-isometries.

The clump of ``x`` is ``K_x = {(x_1, ..., x_{D-1}, r x_D + i) : 0 <= i < r}``;
clumps partition Z^D.  Any two sites of clumps ``K_x, K_y`` with
``|x - y|_1 = k >= 1`` are within l1-distance ``(2r - 1) k``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .lattice import WindowSpec
from .percolation import Configuration
from .surface import HeightField


@dataclass
class Embedding:
    domain: WindowSpec
    image: dict
    lipschitz_M: int

    def __post_init__(self):
        if self.lipschitz_M < 1:
            raise ValueError("Lipschitz modulus must be positive")

    def __call__(self, x):
        return self.image[tuple(x)]

    def as_array(self) -> np.ndarray:
        """Images in lexicographic domain order, shape ``(|domain|, D)``."""
        return np.array([self.image[x] for x in self.domain.sites()], dtype=np.int64)

    def to_dict(self):
        return {"domain": {"lo": list(self.domain.lo), "hi": list(self.domain.hi)},
                "M": self.lipschitz_M,
                "image": [[list(x), list(self.image[x])] for x in self.domain.sites()]}

    @classmethod
    def from_dict(cls, data):
        dom = WindowSpec(tuple(data["domain"]["lo"]), tuple(data["domain"]["hi"]))
        image = {tuple(x): tuple(y) for x, y in data["image"]}
        return cls(dom, image, int(data["M"]))


def _unit_pairs(domain: WindowSpec):
    for x in domain.sites():
        for i in range(domain.dim):
            if x[i] < domain.hi[i]:
                y = x[:i] + (x[i] + 1,) + x[i + 1:]
                yield x, y


def verify_lip_injection(f: Embedding, cfg: Configuration | None = None, pattern=None):
    """``(ok, witness)``: injectivity, the M-Lip bound, and openness (or
    ``cfg`` matching ``pattern``) at every image."""
    seen = {}
    for x in f.domain.sites():
        if x not in f.image:
            return False, {"reason": "undefined", "site": x}
        y = tuple(f.image[x])
        if y in seen:
            return False, {"reason": "not_injective", "pair": (seen[y], x), "image": y}
        seen[y] = x
    for x, y in _unit_pairs(f.domain):
        dist = sum(abs(a - b) for a, b in zip(f.image[x], f.image[y]))
        if dist > f.lipschitz_M:
            return False, {"reason": "lipschitz", "pair": (x, y), "distance": dist}
    if cfg is not None:
        pat = None if pattern is None else np.asarray(pattern)
        for x in f.domain.sites():
            y = f.image[x]
            if not cfg.window.contains(y):
                return False, {"reason": "outside_window", "site": x, "image": y}
            state = cfg.is_open(y)
            want = True if pat is None else bool(pat[f.domain.index(x)])
            if state != want:
                return False, {"reason": "closed_image" if pat is None else "pattern_mismatch",
                               "site": x, "image": y}
    return True, None


class ClumpFailure(RuntimeError):
    def __init__(self, clump, need: str):
        self.clump = tuple(clump)
        self.need = need
        super().__init__(f"clump K_{self.clump} has no {need} site")


@dataclass(frozen=True)
class QuasiIsometryParams:
    c1: float
    c2: float
    c3: float
    c4: float
    c5: float

    def __post_init__(self):
        # c2, c4, c5 may be zero in degenerate cases such as the identity
        if self.c1 <= 0 or self.c3 <= 0 or min(self.c2, self.c4, self.c5) < 0:
            raise ValueError("quasi-isometry constants must be positive")

    def as_tuple(self):
        return (self.c1, self.c2, self.c3, self.c4, self.c5)


def clump_of(x, r: int) -> list:
    """Sites of the r-clump ``K_x`` in increasing order."""
    if r < 1:
        raise ValueError("clump size must be positive")
    x = tuple(int(v) for v in x)
    return [x[:-1] + (r * x[-1] + i,) for i in range(r)]


def clump_index(y, r: int) -> tuple:
    """The ``x`` with ``y`` in ``K_x``."""
    y = tuple(int(v) for v in y)
    return y[:-1] + (y[-1] // r,)


def refine_injection_via_clumps(f: Embedding, cfg: Configuration, r: int, pattern=None) -> Embedding:
    """Move each image ``f(x)`` to a site of ``K_{f(x)}``: the least open one,
    or with ``pattern`` the least one whose state equals ``pattern[x]``.
    The result has modulus ``(2r - 1) M``."""
    pat = None if pattern is None else np.asarray(pattern).astype(bool)
    image = {}
    used = set()
    for x in f.domain.sites():
        want = True if pat is None else bool(pat[f.domain.index(x)])
        clump = clump_of(f.image[x], r)
        for y in clump:
            if not cfg.window.contains(y):
                raise ValueError(f"clump K_{tuple(f.image[x])} leaves the configuration window")
        pick = next((y for y in clump if cfg.is_open(y) == want), None)
        if pick is None:
            raise ClumpFailure(f.image[x], "open" if want else "closed")
        if pick in used:
            raise AssertionError("clumps of distinct images overlap")
        used.add(pick)
        image[x] = pick
    return Embedding(f.domain, image, (2 * r - 1) * f.lipschitz_M)


@dataclass
class QuasiIsometryResult:
    mapping: Embedding
    params: QuasiIsometryParams
    subspace: list = field(repr=False)


def quasi_params(r: int) -> QuasiIsometryParams:
    """Constants certified for the clump map: the lower bound is the
    horizontal distance, the upper one ``(r + 1) delta + r - 1``."""
    return QuasiIsometryParams(1, 2 * r, 2 * r, 2 * r, 2 * r)


def build_quasi_isometry(cfg: Configuration, r: int, F: HeightField) -> QuasiIsometryResult:
    """Send ``u`` to the least open site of ``K_{(u, F(u))}``.

    The subspace is the set of open sites in the clumps ``K_{(u, F(u))}``.
    """
    if not F.is_lipschitz():
        raise ValueError("height field is not 1-Lipschitz")
    if cfg.window.dim != F.base.dim + 1:
        raise ValueError("configuration must have one more dimension than the base")
    image, subspace = {}, []
    for u in F.base.sites():
        clump = clump_of(u + (F[u],), r)
        if not all(cfg.window.contains(y) for y in clump):
            raise ValueError(f"clump over {u} leaves the configuration window")
        opens = [y for y in clump if cfg.is_open(y)]
        if not opens:
            raise ClumpFailure(u + (F[u],), "open")
        image[u] = opens[0]
        subspace.extend(opens)
    dom = WindowSpec(F.base.lo, F.base.hi)
    return QuasiIsometryResult(Embedding(dom, image, 2 * r), quasi_params(r), subspace)


def verify_quasi_isometry(f, domain: WindowSpec, image_space, c: QuasiIsometryParams):
    """Exhaustive check of both quasi-isometry conditions (l1 on both sides).

    ``f`` is an :class:`Embedding` or a mapping from sites to sites.
    Returns ``(ok, counterexample)``.
    """
    image = f.image if isinstance(f, Embedding) else f
    sites = list(domain.sites())
    P = np.array(sites, dtype=np.int64)
    Q = np.array([image[x] for x in sites], dtype=np.int64)
    delta = np.abs(P[:, None, :] - P[None, :, :]).sum(-1)
    rho = np.abs(Q[:, None, :] - Q[None, :, :]).sum(-1)
    bad = (c.c1 * delta - c.c2 > rho) | (rho > c.c3 * delta + c.c4)
    if bad.any():
        i, j = np.argwhere(bad)[0]
        return False, {"condition": "distortion", "pair": (sites[i], sites[j]),
                       "delta": int(delta[i, j]), "rho": int(rho[i, j])}
    S = np.array(list(image_space), dtype=np.int64).reshape(-1, Q.shape[1])
    if S.size:
        gap = np.abs(S[:, None, :] - Q[None, :, :]).sum(-1).min(axis=1)
        far = np.flatnonzero(gap > c.c5)
        if far.size:
            y = tuple(int(v) for v in S[far[0]])
            return False, {"condition": "coverage", "site": y, "distance": int(gap[far[0]])}
    return True, None

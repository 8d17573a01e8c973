"""Tucker's lemma on integer cuboids and the colour-blocking certificate.

A *falsification event* is raised when an exhaustive search fails to find an
object whose existence is guaranteed; it carries a JSON-serialisable bundle
with the offending colouring so it can be archived and replayed.
"""
from __future__ import annotations

import itertools
import json
from dataclasses import dataclass

import numpy as np

from .lattice import (NEG_INF, POS_INF, STAR, AdjacencySpec, ClusterReport, Colouring,
                      WindowSpec, boundary_mask, cluster_decompose, colour_name)


class FalsificationEvent(RuntimeError):
    def __init__(self, kind: str, bundle: dict):
        self.kind = kind
        self.bundle = dict(bundle, kind=kind)
        super().__init__(f"falsification event: {kind}")

    def to_json(self) -> str:
        return json.dumps(self.bundle, sort_keys=True)


class HypothesisError(ValueError):
    """A colouring violates a stated hypothesis; ``.violations`` names them."""

    def __init__(self, violations: list):
        self.violations = violations
        super().__init__("hypotheses violated: " + ", ".join(v["hypothesis"] for v in violations))


@dataclass
class TuckerColouring:
    T: WindowSpec
    beta: np.ndarray

    def __post_init__(self):
        self.beta = np.asarray(self.beta, dtype=np.int64)
        if any(a != 0 for a in self.T.lo):
            raise ValueError("cuboid must start at the origin")
        if self.beta.shape != self.T.shape:
            raise ValueError("colour array does not match the cuboid")
        d = self.T.dim
        a = np.abs(self.beta)
        if ((a < 1) | (a > d)).any():
            raise ValueError(f"colours must lie in +-1..+-{d}")

    @classmethod
    def from_list(cls, beta):
        beta = np.asarray(beta, dtype=np.int64)
        return cls(WindowSpec.box(*beta.shape), beta)

    @property
    def t(self) -> tuple:
        return self.T.hi

    def to_dict(self):
        return {"t": list(self.t), "beta": self.beta.tolist()}


def check_antipodal_boundary(tc: TuckerColouring):
    """``(True, None)`` or ``(False, (x, t - x))`` for the first bad boundary site."""
    beta = tc.beta
    flipped = beta[(slice(None, None, -1),) * beta.ndim]
    bad = boundary_mask(tc.T) & (beta != -flipped)
    if not bad.any():
        return True, None
    x = tuple(int(v) for v in np.argwhere(bad)[0])
    return False, (x, tuple(int(ti - v) for ti, v in zip(tc.t, x)))


def _steps(d: int):
    return [e for e in itertools.product((0, 1), repeat=d) if any(e)]


def find_complementary_pair(tc: TuckerColouring):
    """Lexicographically least ``(u, v)`` with ``u <= v <= u + 1`` and ``beta(u) = -beta(v)``."""
    ok, w = check_antipodal_boundary(tc)
    if not ok:
        raise ValueError(f"antipodal boundary condition fails at {w}")
    beta = tc.beta
    best = None
    for e in _steps(beta.ndim):
        src = tuple(slice(0, n - ei) for n, ei in zip(beta.shape, e))
        dst = tuple(slice(ei, n) for n, ei in zip(beta.shape, e))
        hit = np.argwhere(beta[src] == -beta[dst])
        if hit.size:
            u = tuple(int(v) for v in hit[0])
            cand = (u, tuple(a + b for a, b in zip(u, e)))
            if best is None or cand < best:
                best = cand
    if best is None:
        raise FalsificationEvent("tucker", {"colouring": tc.to_dict()})
    return best


def face_colouring(t) -> np.ndarray:
    """Boundary colours ``-i`` on ``x_i = 0`` and ``+i`` on ``x_i = t_i``, smallest
    absolute value at face intersections; interior entries are 0."""
    t = tuple(t)
    T = WindowSpec.box(*(ti + 1 for ti in t))
    beta = np.zeros(T.shape, dtype=np.int64)
    for x in T.sites():
        for i, (v, ti) in enumerate(zip(x, t)):
            if v == 0:
                beta[x] = -(i + 1)
                break
            if v == ti:
                beta[x] = i + 1
                break
    return beta


def random_antipodal_colouring(t, rng: np.random.Generator) -> TuckerColouring:
    t = tuple(t)
    d = len(t)
    T = WindowSpec.box(*(ti + 1 for ti in t))
    palette = np.array([c for c in range(-d, d + 1) if c])
    beta = rng.choice(palette, size=T.shape)
    flat = beta.ravel()
    n = flat.size
    bnd = boundary_mask(T).ravel()
    f = np.flatnonzero(bnd)
    rep = f[f < n - 1 - f]
    flat[n - 1 - rep] = -flat[rep]
    return TuckerColouring(T, flat.reshape(T.shape))


def all_antipodal_colourings(t):
    """Every colouring of ``[0, t]`` satisfying the antipodal boundary rule."""
    t = tuple(t)
    d = len(t)
    T = WindowSpec.box(*(ti + 1 for ti in t))
    palette = [c for c in range(-d, d + 1) if c]
    n = T.size
    bnd = boundary_mask(T).ravel()
    free = [f for f in range(n) if not bnd[f] or f < n - 1 - f]
    for values in itertools.product(palette, repeat=len(free)):
        flat = np.zeros(n, dtype=np.int64)
        for f, c in zip(free, values):
            flat[f] = c
            if bnd[f]:
                flat[n - 1 - f] = -c
        yield TuckerColouring(T, flat.reshape(T.shape))


@dataclass
class BlockingColouring:
    """Colouring of ``[1,n]^(d-1) x [1,m]`` by ``+-inf`` and ``1..colours``."""

    d: int
    n: int
    m: int
    chi: np.ndarray
    colours: int = None

    def __post_init__(self):
        self.chi = np.asarray(self.chi, dtype=np.int64)
        if self.colours is None:
            self.colours = self.d - 1
        shape = (self.n,) * (self.d - 1) + (self.m,)
        if self.chi.shape != shape:
            raise ValueError(f"expected shape {shape}, got {self.chi.shape}")

    @property
    def window(self) -> WindowSpec:
        return WindowSpec.box(*self.chi.shape, start=1)

    def colouring(self) -> Colouring:
        return Colouring(self.window, self.chi)

    def to_dict(self):
        enc = np.vectorize(colour_name)(self.chi).tolist() if self.chi.size else []
        return {"d": self.d, "n": self.n, "m": self.m, "colours": self.colours, "chi": enc}


def blocking_violations(bc: BlockingColouring, adj: AdjacencySpec = STAR) -> list:
    out = []
    chi = bc.chi
    finite = (chi >= 1) & (chi <= bc.colours)
    bad = ~(finite | (chi == NEG_INF) | (chi == POS_INF))
    if bad.any():
        out.append({"hypothesis": "palette", "site": bc.window.site(np.argwhere(bad)[0])})
    bottom = chi[..., 0]
    if (bottom != NEG_INF).any():
        out.append({"hypothesis": "a", "site": bc.window.site(tuple(np.argwhere(bottom != NEG_INF)[0]) + (0,))})
    top = chi[..., -1]
    if (top != POS_INF).any():
        out.append({"hypothesis": "b", "site": bc.window.site(tuple(np.argwhere(top != POS_INF)[0]) + (bc.m - 1,))})
    pair = _inf_contact(bc, adj)
    if pair is not None:
        out.append({"hypothesis": "c", "sites": pair})
    return out


def _inf_contact(bc: BlockingColouring, adj: AdjacencySpec):
    chi = bc.chi
    w = bc.window
    pos = chi == POS_INF
    neg = chi == NEG_INF
    for off in adj.offsets(w.dim):
        src = tuple(slice(max(0, -o), n - max(0, o)) for n, o in zip(chi.shape, off))
        dst = tuple(slice(max(0, o), n - max(0, -o)) for n, o in zip(chi.shape, off))
        hit = pos[src] & neg[dst]
        if hit.any():
            i = np.argwhere(hit)[0]
            x = w.site(tuple(a + s.start for a, s in zip(i, src)))
            y = tuple(a + o for a, o in zip(x, off))
            return (x, y)
    return None


def check_blocking_hypotheses(bc: BlockingColouring, adj: AdjacencySpec = STAR):
    v = blocking_violations(bc, adj)
    if v:
        raise HypothesisError(v)


def colour_blocking_witness(bc: BlockingColouring, adj: AdjacencySpec = STAR):
    """A finite-colour cluster of volume >= n, as ``(j, ClusterReport)``.

    Returns ``None`` when no such cluster exists under non-standard settings
    (extra colours or a different adjacency); under the standard hypotheses a
    miss raises :class:`FalsificationEvent`.
    """
    check_blocking_hypotheses(bc, adj)
    clusters = cluster_decompose(bc.colouring(), adj, colours=range(1, bc.colours + 1))
    for c in clusters:
        if c.volume >= bc.n:
            return c.colour, c
    if bc.colours == bc.d - 1 and adj == STAR:
        raise FalsificationEvent("colour_blocking", {"colouring": bc.to_dict()})
    return None


def random_blocking_colouring(d: int, n: int, m: int, rng: np.random.Generator,
                              weights=None) -> BlockingColouring:
    """Random colouring meeting the blocking hypotheses (needs ``m >= 3``).

    Sites draw ``-inf``, ``+inf`` or a finite colour with probabilities
    ``weights``.  Then ``-inf`` is cleared from the row below the top, and
    every remaining ``+inf`` touching a ``-inf`` is recoloured finite.  Both
    repairs only remove infinite sites, so no new contact can appear.
    """
    if m < 3:
        raise ValueError("need m >= 3 to separate the bottom and top rows")
    if weights is None:
        weights = rng.dirichlet([1.0, 1.0, 1.0])
    shape = (n,) * (d - 1) + (m,)
    kind = rng.choice(3, size=shape, p=weights)
    finite = rng.integers(1, max(d, 2), size=shape)
    chi = np.where(kind == 0, NEG_INF, np.where(kind == 1, POS_INF, finite))
    chi[..., 0] = NEG_INF
    chi[..., -1] = POS_INF
    row = chi[..., -2]
    row[row == NEG_INF] = finite[..., -2][row == NEG_INF]
    fix = (chi == POS_INF) & _touches(chi == NEG_INF, shape)
    fix[..., -1] = False
    chi[fix] = finite[fix]
    return BlockingColouring(d, n, m, chi)


def _touches(mask: np.ndarray, shape) -> np.ndarray:
    """Sites with a star-lattice neighbour in ``mask``."""
    out = np.zeros(shape, dtype=bool)
    for off in STAR.offsets(len(shape)):
        src = tuple(slice(max(0, -o), k - max(0, o)) for k, o in zip(shape, off))
        dst = tuple(slice(max(0, o), k - max(0, -o)) for k, o in zip(shape, off))
        out[src] |= mask[dst]
    return out


def reduce_blocking_to_tucker(bc: BlockingColouring) -> TuckerColouring:
    """Build the cuboid colouring used to derive colour blocking from Tucker's lemma.

    Requires the bottom/top hypotheses and that every finite-colour cluster
    has volume < n; the contact hypothesis is deliberately not checked, so a
    colouring violating it yields a ``beta`` whose only complementary pairs
    are ``+-d`` contacts.
    """
    v = [x for x in blocking_violations(bc) if x["hypothesis"] != "c"]
    if v:
        raise HypothesisError(v)
    d, n, m = bc.d, bc.n, bc.m
    clusters = cluster_decompose(bc.colouring(), STAR, colours=range(1, d))
    big = [c for c in clusters if c.volume >= n]
    if big:
        c = big[0]
        raise HypothesisError([{"hypothesis": "small_clusters", "colour": c.colour,
                                "volume": c.volume, "site": min(c.sites)}])
    t = (n + 1,) * (d - 1) + (m + 1,)
    beta = face_colouring(t)
    interior = tuple(slice(1, -1) for _ in t)
    inner = np.where(bc.chi == POS_INF, d, np.where(bc.chi == NEG_INF, -d, bc.chi))
    beta[interior] = inner
    for c in clusters:
        i = c.colour
        if any(x[i - 1] == 1 for x in c.sites):
            for x in c.sites:
                beta[x] = -i
    return TuckerColouring(WindowSpec.box(*beta.shape), beta)


def star_necessity_fixture(n: int) -> BlockingColouring:
    """d = 2, m = 4 colouring that meets every hypothesis for the
    nearest-neighbour lattice but whose 1-clusters there are singletons.

    Rows from the bottom: all ``-inf``; ``1, -inf, 1, ...``; ``+inf, 1, +inf, ...``;
    all ``+inf``.  In the star lattice the 1-sites form one zigzag of volume n.
    """
    if n < 2:
        raise ValueError("need n >= 2")
    x = np.arange(n)
    chi = np.empty((n, 4), dtype=np.int64)
    chi[:, 0] = NEG_INF
    chi[:, 1] = np.where(x % 2 == 0, 1, NEG_INF)
    chi[:, 2] = np.where(x % 2 == 0, POS_INF, 1)
    chi[:, 3] = POS_INF
    return BlockingColouring(2, n, 4, chi)


def extra_colour_fixture(d: int, n: int | None = None) -> BlockingColouring:
    """Valid-looking colouring with ``d`` finite colours and no cluster of volume n.

    A single band between the ``-inf`` floor and the ``+inf`` ceiling carries
    the periodic slab colouring of ``Z^(d-1)`` shifted to colours ``1..d``;
    its clusters have volume at most ``R^(d-1)`` with ``R = 2(d-1)``.
    """
    from .periodic import TileParams, alpha_colour

    if d < 2:
        raise ValueError("need d >= 2")
    if d == 2:
        n = n or 2
        band = (np.arange(n) % 2 + 1)[:, None]
    else:
        tile = TileParams(d - 1, 2 * (d - 1))
        n = n or tile.R ** (d - 1) + 1
        band = alpha_colour(WindowSpec.box(*([n] * (d - 1))).coords(), tile)[..., None] + 1
    shape = (n,) * (d - 1)
    chi = np.concatenate([np.full(shape + (1,), NEG_INF), band, np.full(shape + (1,), POS_INF)], axis=-1)
    return BlockingColouring(d, n, 3, chi, colours=d)


def contact_fixture(n: int = 3) -> BlockingColouring:
    """d = 2, m = 2: the floor touches the ceiling and there is no finite colour."""
    chi = np.stack([np.full(n, NEG_INF), np.full(n, POS_INF)], axis=-1)
    return BlockingColouring(2, n, 2, chi)

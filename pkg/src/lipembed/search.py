"""Exact backtracking search for M-Lip injections and pattern embeddings.

Domain sites are assigned in lexicographic order and candidate images are
tried in lexicographic order, so the first solution found is the
lexicographically least one.  Images stay inside the target window (no
wrap).  Forward checking prunes an assignment as soon as some not-yet-placed
domain neighbour has no remaining candidate.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .lattice import WindowSpec
from .percolation import Configuration, mix_seed, site_uniforms
from .renormalization import Embedding, verify_lip_injection

__all__ = ["SearchProblem", "SearchResult", "search_injection", "search_word_embedding",
           "iter_injections", "verify_lip_injection", "rigidity_1lip_check",
           "first_moment_bound", "first_moment_decays", "self_avoiding_paths",
           "partially_periodic_pattern", "moment_event"]


@dataclass
class SearchProblem:
    domain: WindowSpec
    target: Configuration
    M: int
    pattern: np.ndarray | None = None

    def __post_init__(self):
        if self.M < 1:
            raise ValueError("M must be positive")
        if self.pattern is not None:
            self.pattern = np.asarray(self.pattern).astype(bool)
            if self.pattern.shape != self.domain.shape:
                raise ValueError("pattern must have the domain's shape")

    def allowed(self) -> np.ndarray:
        """Per domain site (lex order), the boolean mask of usable target sites."""
        om = self.target.open.ravel()
        if self.pattern is None:
            return np.broadcast_to(om, (self.domain.size, om.size))
        eta = self.pattern.ravel()
        return np.where(eta[:, None], om[None, :], ~om[None, :])


@dataclass
class SearchResult:
    status: str  # "found", "none" or "unknown"
    embedding: Embedding | None
    nodes: int

    @property
    def found(self) -> bool:
        return self.status == "found"


class _Budget(Exception):
    pass


def _ball(M: int, D: int) -> np.ndarray:
    off = [o for o in itertools.product(range(-M, M + 1), repeat=D)
           if 0 < sum(map(abs, o)) <= M]
    return np.array(off, dtype=np.int64)


def _solutions(prob: SearchProblem, node_limit: int | None, counter: list):
    dom, tw = prob.domain, prob.target.window
    dsites = list(dom.sites())
    n = len(dsites)
    pos = {x: i for i, x in enumerate(dsites)}
    allowed = prob.allowed()
    tshape = np.array(tw.shape)
    tlo = np.array(tw.lo)
    strides = np.array([int(np.prod(tw.shape[i + 1:])) for i in range(tw.dim)])
    ball = _ball(prob.M, tw.dim)

    # earlier[i]: lex-earlier unit neighbours; later[i]: lex-later ones
    earlier, later = [], []
    for x in dsites:
        e, l_ = [], []
        for a in range(dom.dim):
            for s in (-1, 1):
                y = x[:a] + (x[a] + s,) + x[a + 1:]
                if y in pos:
                    (e if pos[y] < pos[x] else l_).append(pos[y])
        earlier.append(e)
        later.append(l_)

    def near(flat: int) -> set:
        c = np.array(np.unravel_index(flat, tw.shape))
        pts = c + ball
        ok = ((pts >= 0) & (pts < tshape)).all(axis=1)
        return set((pts[ok] * strides).sum(axis=1).tolist())

    cache = {}

    def near_c(flat):
        if flat not in cache:
            cache[flat] = near(flat)
        return cache[flat]

    all_flat = np.arange(tw.size)
    assign = [-1] * n
    used = set()

    def candidates(i):
        placed = [assign[j] for j in earlier[i] if assign[j] >= 0] + \
                 [assign[j] for j in later[i] if assign[j] >= 0]
        if not placed:
            cand = set(all_flat[allowed[i]].tolist())
        else:
            cand = set(near_c(placed[0]))
            for q in placed[1:]:
                cand &= near_c(q)
            cand = {c for c in cand if allowed[i][c]}
        return cand - used

    def rec(i):
        if i == n:
            yield list(assign)
            return
        for c in sorted(candidates(i)):
            counter[0] += 1
            if node_limit is not None and counter[0] > node_limit:
                raise _Budget()
            assign[i] = c
            used.add(c)
            if all(candidates(j) for j in later[i]):
                yield from rec(i + 1)
            used.discard(c)
            assign[i] = -1

    for sol in rec(0):
        image = {}
        for x, flat in zip(dsites, sol):
            idx = np.unravel_index(flat, tw.shape)
            image[x] = tuple(int(a + b) for a, b in zip(idx, tlo))
        yield Embedding(dom, image, prob.M)


def search_injection(prob: SearchProblem, node_limit: int | None = None) -> SearchResult:
    """Lexicographically least M-Lip injection into the open (or pattern-matching)
    sites, ``"none"`` on exhaustion, ``"unknown"`` when ``node_limit`` is hit."""
    counter = [0]
    try:
        for emb in _solutions(prob, node_limit, counter):
            return SearchResult("found", emb, counter[0])
    except _Budget:
        return SearchResult("unknown", None, counter[0])
    return SearchResult("none", None, counter[0])


def search_word_embedding(prob: SearchProblem, node_limit: int | None = None) -> SearchResult:
    if prob.pattern is None:
        raise ValueError("word embedding needs a pattern")
    return search_injection(prob, node_limit)


def iter_injections(prob: SearchProblem):
    """Every solution, in lexicographic order."""
    yield from _solutions(prob, None, [0])


@dataclass
class RigidityReport:
    ok: bool
    steps: tuple | None
    column_steps: list
    row_steps: list
    translated_columns: bool
    witness: dict | None = None


def rigidity_1lip_check(f: Embedding) -> RigidityReport:
    """Unit-square rigidity of a 1-Lip injection of a planar box.

    For each square ``x, x+e1, x+e2, x+e1+e2`` checks ``r1 = r1'`` and
    ``r2 = r2'``, then that the images of any two columns are disjoint
    translates.  ``steps`` is ``(r1, r2)`` at the lower-left corner.
    """
    if f.domain.dim != 2:
        raise ValueError("rigidity check is for planar domains")
    ok, w = verify_lip_injection(Embedding(f.domain, f.image, 1))
    if not ok:
        raise ValueError(f"not a 1-Lip injection: {w}")
    (a0, b0), (a1, b1) = f.domain.lo, f.domain.hi
    F = {x: np.array(y) for x, y in f.image.items()}
    witness = None
    for i in range(a0, a1):
        for j in range(b0, b1):
            r1 = F[(i + 1, j)] - F[(i, j)]
            r1p = F[(i + 1, j + 1)] - F[(i, j + 1)]
            r2 = F[(i, j + 1)] - F[(i, j)]
            r2p = F[(i + 1, j + 1)] - F[(i + 1, j)]
            if not (np.array_equal(r1, r1p) and np.array_equal(r2, r2p)):
                witness = {"square": (i, j), "r1": r1.tolist(), "r1p": r1p.tolist(),
                           "r2": r2.tolist(), "r2p": r2p.tolist()}
                break
        if witness:
            break
    col_steps = [tuple((F[(i + 1, b0)] - F[(i, b0)]).tolist()) for i in range(a0, a1)]
    row_steps = [tuple((F[(a0, j + 1)] - F[(a0, j)]).tolist()) for j in range(b0, b1)]
    translated = True
    cols = {i: np.array([F[(i, j)] for j in range(b0, b1 + 1)]) for i in range(a0, a1 + 1)}
    for i, k in itertools.combinations(range(a0, a1 + 1), 2):
        shift = cols[k] - cols[i]
        disjoint = not (set(map(tuple, cols[i].tolist())) & set(map(tuple, cols[k].tolist())))
        if not (disjoint and (shift == shift[0]).all()):
            translated = False
            witness = witness or {"columns": (i, k)}
            break
    steps = None
    if col_steps and row_steps:
        steps = (col_steps[0], row_steps[0])
    return RigidityReport(witness is None, steps, col_steps, row_steps, translated, witness)


def first_moment_bound(n: int, k: int, p: float, D: int, word_mode: bool = False) -> float:
    """``min(1, (2D)^n q^(nk))`` with ``q = p``, or ``max(p, 1-p)`` for words."""
    if n < 1 or k < 1:
        raise ValueError("n and k must be positive")
    q = max(p, 1.0 - p) if word_mode else p
    if q == 0.0:
        return 0.0
    log = n * math.log(2 * D) + n * k * math.log(q)
    return 1.0 if log >= 0 else math.exp(log)


def first_moment_decays(k: int, p: float, D: int, word_mode: bool = False) -> bool:
    q = max(p, 1.0 - p) if word_mode else p
    return q < (2 * D) ** (-1.0 / k)


def self_avoiding_paths(n: int, D: int) -> np.ndarray:
    """All n-step self-avoiding paths from the origin, shape ``(count, n+1, D)``."""
    steps = [tuple(s * (a == i) for a in range(D)) for i in range(D) for s in (1, -1)]
    paths = [[(0,) * D]]
    for _ in range(n):
        nxt = []
        for path in paths:
            last = path[-1]
            for st in steps:
                y = tuple(a + b for a, b in zip(last, st))
                if y not in path:
                    nxt.append(path + [y])
        paths = nxt
    return np.array(paths, dtype=np.int64).reshape(len(paths), n + 1, D)


def moment_offsets(k: int, n: int, D: int) -> np.ndarray:
    """``k`` offsets spaced ``2n + 1`` apart on the first axis, so that the
    translates of any n-step path are automatically disjoint."""
    out = np.zeros((k, D), dtype=np.int64)
    out[:, 0] = np.arange(k) * (2 * n + 1)
    return out


def moment_event(n: int, offsets: np.ndarray, p: float, seeds) -> np.ndarray:
    """Indicator of ``A_n`` per seed: some n-step self-avoiding path ``y`` from
    the origin has every ``x_i + y_j`` open."""
    offsets = np.asarray(offsets, dtype=np.int64)
    D = offsets.shape[1]
    paths = self_avoiding_paths(n, D)
    pts = offsets[None, :, None, :] + paths[:, None, :, :]  # (paths, k, n+1, D)
    flat = pts.reshape(-1, D)
    uniq, inv = np.unique(flat, axis=0, return_inverse=True)
    inv = inv.reshape(pts.shape[:-1]).reshape(len(paths), -1)
    seeds = np.asarray(seeds, dtype=np.uint64)
    u = site_uniforms(seeds[:, None], uniq[None, :, :])
    opened = u < p  # (trials, sites)
    hit = np.zeros(len(seeds), dtype=bool)
    for row in inv:
        hit |= opened[:, row].all(axis=1)
    return hit


def partially_periodic_pattern(shape, r: int, seed: int, q: float = 0.5, anchor=None) -> np.ndarray:
    """Random 0/1 pattern on the box ``[0, shape)`` with value 1 on every site
    ``anchor + r y``; other sites are 1 with probability ``q``.

    Values come from a per-site hash, so boxes of different sizes built from
    the same seed agree on their overlap.
    """
    if r < 1:
        raise ValueError("period must be positive")
    box = WindowSpec.box(*shape)
    coords = box.coords()
    anchor = np.zeros(len(shape), dtype=np.int64) if anchor is None else np.asarray(anchor)
    eta = site_uniforms(mix_seed(seed, 0x5EED), coords) < q
    lattice_pts = (np.mod(coords - anchor, r) == 0).all(axis=-1)
    return eta | lattice_pts

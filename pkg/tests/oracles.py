"""Independent brute-force reference implementations used by the tests."""
import itertools

import numpy as np

from lipembed.lattice import WindowSpec
from lipembed.percolation import Configuration


def brute_injection(domain: WindowSpec, cfg: Configuration, M: int, pattern=None):
    """Lexicographically least M-Lip injection by trying every ordered
    selection of distinct targets; returns (images or None, assignments tried)."""
    sites = list(domain.sites())
    targets = list(cfg.window.sites())
    pat = None if pattern is None else np.asarray(pattern).astype(bool)

    def ok_target(x, y):
        want = True if pat is None else pat[domain.index(x)]
        return cfg.open[cfg.window.index(y)] == want

    pairs = [(i, j) for i, x in enumerate(sites) for j, y in enumerate(sites)
             if i < j and sum(abs(a - b) for a, b in zip(x, y)) == 1]
    tried = 0
    for choice in itertools.permutations(targets, len(sites)):
        tried += 1
        if not all(ok_target(x, y) for x, y in zip(sites, choice)):
            continue
        if all(sum(abs(a - b) for a, b in zip(choice[i], choice[j])) <= M for i, j in pairs):
            return list(choice), tried
    return None, tried


def n_assignments(domain: WindowSpec, cfg: Configuration) -> int:
    m, n = cfg.n_open, domain.size
    return int(np.prod(np.arange(m - n + 1, m + 1))) if m >= n else 0


def exact_existence_prob(n: int, N: int, M: int, p: float, d: int = 2) -> float:
    """Sum over all 2^(N^d) configurations of the window [0,N)^d."""
    window = WindowSpec.box(*([N] * d))
    domain = WindowSpec.box(*([n] * d))
    total = 0.0
    for bits in itertools.product((False, True), repeat=window.size):
        arr = np.array(bits).reshape(window.shape)
        k = int(arr.sum())
        cfg = Configuration(window, arr, p, 0)
        if brute_exists(domain, cfg, M):
            total += p ** k * (1 - p) ** (window.size - k)
    return total


def brute_exists(domain, cfg, M):
    # restrict to open sites first; same verdict as brute_injection
    opens = [tuple(int(v) for v in row) for row in np.argwhere(cfg.open)]
    sites = list(domain.sites())
    if len(opens) < len(sites):
        return False
    pairs = [(i, j) for i, x in enumerate(sites) for j, y in enumerate(sites)
             if i < j and sum(abs(a - b) for a, b in zip(x, y)) == 1]
    for choice in itertools.permutations(opens, len(sites)):
        if all(sum(abs(a - b) for a, b in zip(choice[i], choice[j])) <= M for i, j in pairs):
            return True
    return False


def random_instances(count: int, seed: int = 0):
    """Mixed small search instances (d, D in {1, 2, 3})."""
    from lipembed.percolation import sample_config

    rng = np.random.default_rng(seed)
    shapes = [((2,), (4, 4)), ((3,), (3, 3)), ((2, 2), (3, 3)), ((2, 2), (4, 4)), ((1, 3), (4, 3)),
              ((2, 1), (2, 2, 3)), ((2, 2), (2, 2, 3)), ((4,), (5,)), ((2, 3), (3, 4))]
    out = []
    i = 0
    while len(out) < count:
        dom, win = shapes[i % len(shapes)]
        p = float(rng.choice([0.3, 0.5, 0.7, 0.9]))
        M = int(rng.choice([1, 2]))
        cfg = sample_config(WindowSpec.box(*win), p, int(rng.integers(2**31)))
        domain = WindowSpec.box(*dom)
        if n_assignments(domain, cfg) <= 10**6:
            out.append((domain, cfg, M))
        i += 1
    return out

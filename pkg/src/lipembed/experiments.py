"""Seeded Monte Carlo drivers.

Trial ``t`` of a run with master seed ``S`` uses the seed ``mix_seed(S, t)``
and nothing else, so trials can run in any order or in parallel and the
merged records are identical.  Configurations are coupled across ``p``,
``M``, window size and domain size because each site's uniform depends only
on ``(seed, coordinates)``.

All estimates are finite-window surrogates; none of them estimates an
infinite-volume probability.
"""
from __future__ import annotations

import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import partial

import numpy as np

from .colouring import build_lambda, verify_lambda_properties
from .lattice import AdjacencySpec, WindowSpec, label_components
from .percolation import CellGeometry, mix_seed, sample_config
from .search import (SearchProblem, first_moment_bound, moment_event, moment_offsets,
                     partially_periodic_pattern, search_injection)
from .surface import SurfaceFailure, default_hmax

SURROGATE = "finite-window surrogate"


@dataclass
class EstimateRecord:
    params: dict
    successes: int
    trials: int
    wall_time: float = 0.0
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if not 0 <= self.successes <= self.trials:
            raise ValueError("successes must lie in [0, trials]")

    @property
    def estimate(self) -> float:
        return self.successes / self.trials

    @property
    def stderr(self) -> float:
        e = self.estimate
        return math.sqrt(e * (1.0 - e) / self.trials)

    def to_dict(self, timing: bool = False) -> dict:
        out = dict(self.params)
        out.update(self.extra)
        out.update(successes=self.successes, trials=self.trials,
                   estimate=self.estimate, stderr=self.stderr)
        if timing:
            out["wall_time"] = self.wall_time
        return out


def trial_seeds(master_seed: int, trials: int) -> list:
    return [mix_seed(master_seed, t) for t in range(trials)]


def run_trials(fn, master_seed: int, trials: int, workers: int = 1) -> list:
    """``[fn(seed_t) for t in range(trials)]``, optionally on a process pool.

    ``fn`` must be picklable when ``workers > 1``.  Results are returned in
    trial order regardless of completion order.
    """
    seeds = trial_seeds(master_seed, trials)
    if workers <= 1 or trials < 2:
        return [fn(s) for s in seeds]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, seeds, chunksize=max(1, trials // (4 * workers))))


# -- existence of M-Lip injections ------------------------------------------

def _existence_trial(seed, d, D, n, N, M, p, node_limit=None):
    cfg = sample_config(WindowSpec.box(*([N] * D)), p, seed)
    prob = SearchProblem(WindowSpec.box(*([n] * d)), cfg, M)
    return search_injection(prob, node_limit).status


def estimate_existence_prob(d: int, D: int, n: int, N: int, M: int, p: float,
                            trials: int, master_seed: int, workers: int = 1,
                            node_limit: int | None = None) -> EstimateRecord:
    """Fraction of seeds with an M-Lip injection of ``[0,n)^d`` into the open
    sites of ``[0,N)^D``; searches hitting ``node_limit`` count as failures
    and are tallied as ``unknown``."""
    if not 0.0 <= p <= 1.0:
        raise ValueError("p must lie in [0, 1]")
    if min(d, D, n, N, M, trials) < 1:
        raise ValueError("d, D, n, N, M and trials must be positive")
    t0 = time.perf_counter()
    fn = partial(_existence_trial, d=d, D=D, n=n, N=N, M=M, p=p, node_limit=node_limit)
    status = run_trials(fn, master_seed, trials, workers)
    params = dict(kind="existence_prob", d=d, D=D, n=n, N=N, M=M, p=p, master_seed=master_seed)
    return EstimateRecord(params, status.count("found"), trials, time.perf_counter() - t0,
                          {"unknown": status.count("unknown")})


def estimate_N_of_n(ns, d: int, M: int, p: float, master_seed: int, trials: int,
                    N_max: int = 16, workers: int = 1) -> list:
    """Smallest window side ``N`` (with ``D = d``) whose existence estimate is
    at least 1/2, by bisection on ``[n, N_max]``.

    Existence is monotone in ``N`` for every seed, so bisection is exact for
    the fixed trial budget.  ``N`` is ``None`` when even ``N_max`` fails.
    """
    rows = []
    for n in ns:
        def est(N):
            return estimate_existence_prob(d, d, n, N, M, p, trials, master_seed, workers)

        top = est(N_max)
        if top.estimate < 0.5:
            rows.append(dict(n=n, N=None, estimate=top.estimate, stderr=top.stderr,
                             status="unbounded_at_budget"))
            continue
        lo, hi, best = n - 1, N_max, top
        while hi - lo > 1:
            mid = (lo + hi) // 2
            rec = est(mid)
            if rec.estimate >= 0.5:
                hi, best = mid, rec
            else:
                lo = mid
        rows.append(dict(n=n, N=hi, estimate=best.estimate, stderr=best.stderr, status="ok"))
    for row in rows:
        row.update(kind="n_scaling", d=d, D=d, M=M, p=p, trials=trials,
                   master_seed=master_seed, N_max=N_max)
    return rows


# -- crossing probabilities ---------------------------------------------------

def crosses(open_mask: np.ndarray, M: int) -> bool:
    """Open cluster (under l1 range M) meeting both first-axis faces."""
    w = WindowSpec.box(*open_mask.shape)
    labels = label_components(w, np.zeros(open_mask.shape, dtype=np.int8), open_mask,
                              AdjacencySpec("l1", M))
    left = np.unique(labels[0][labels[0] >= 0])
    right = np.unique(labels[-1][labels[-1] >= 0])
    return bool(np.intersect1d(left, right).size)


def _crossing_trial(seed, D, M, n, p):
    cfg = sample_config(WindowSpec.box(*([n] * D)), p, seed)
    return crosses(cfg.open, M)


def estimate_crossing_curve(D: int, M: int, p_grid, sizes, trials: int, master_seed: int,
                            workers: int = 1) -> list:
    if D < 2:
        raise ValueError("crossing curves need D >= 2")
    out = []
    for n in sizes:
        for p in p_grid:
            t0 = time.perf_counter()
            fn = partial(_crossing_trial, D=D, M=M, n=n, p=p)
            hits = run_trials(fn, mix_seed(master_seed, n), trials, workers)
            params = dict(kind="crossing_curve", D=D, M=M, n=n, p=p, master_seed=master_seed)
            out.append(EstimateRecord(params, int(sum(hits)), trials, time.perf_counter() - t0))
    return out


def crossing_point(records, n: int) -> float | None:
    """Linear interpolation of the p where the crossing estimate passes 1/2."""
    pts = sorted((r.params["p"], r.estimate) for r in records if r.params["n"] == n)
    for (p0, e0), (p1, e1) in zip(pts, pts[1:]):
        if e0 <= 0.5 <= e1 and e1 > e0:
            return p0 + (0.5 - e0) * (p1 - p0) / (e1 - e0)
    return None


# -- surface builds -----------------------------------------------------------

def surface_window(geom: CellGeometry, width: int, p: float, height: int | None = None) -> WindowSpec:
    """Horizontal torus ``width^(d-1)`` times a column tall enough for the
    default height cap."""
    if width % geom.L:
        raise ValueError("width must be a multiple of L")
    if height is None:
        height = geom.s * (default_hmax(geom.d, p) + 1) + geom.L
    per = (True,) * (geom.d - 1) + (False,)
    return WindowSpec.box(*([width] * (geom.d - 1)), height, periodic=per)


def _surface_trial(seed, d, J, L, width, p, height):
    geom = CellGeometry(d, J, L)
    cfg = sample_config(surface_window(geom, width, p, height), p, seed)
    try:
        sc = build_lambda(cfg, geom)
    except SurfaceFailure:
        return "surface_failure"
    return "ok" if verify_lambda_properties(sc).ok else "verify_failure"


def surface_success_rate(d: int, J: int, p_grid, L: int | None, width: int, trials: int,
                         master_seed: int, height: int | None = None, workers: int = 1) -> list:
    if L is None:
        L = CellGeometry.default(d, J).L
    out = []
    for p in p_grid:
        t0 = time.perf_counter()
        fn = partial(_surface_trial, d=d, J=J, L=L, width=width, p=p, height=height)
        status = run_trials(fn, master_seed, trials, workers)
        params = dict(kind="surface_success", d=d, J=J, L=L, width=width, p=p,
                      master_seed=master_seed)
        out.append(EstimateRecord(params, status.count("ok"), trials, time.perf_counter() - t0,
                                  {"surface_failures": status.count("surface_failure"),
                                   "verify_failures": status.count("verify_failure")}))
    return out


# -- word embeddings ----------------------------------------------------------

def _word_trial(seed, ns, d, N, M, r, p, q):
    cfg = sample_config(WindowSpec.box(*([N] * d)), p, seed)
    out = []
    for n in ns:
        eta = partially_periodic_pattern((n,) * d, r, mix_seed(seed, 1), q)
        prob = SearchProblem(WindowSpec.box(*([n] * d)), cfg, M, eta)
        out.append(search_injection(prob).found)
    return out


def word_trend(ns, d: int, N: int, M: int, r: int, p: float, trials: int, master_seed: int,
               q: float = 0.5, workers: int = 1) -> list:
    """Existence frequency of M-Lip embeddings of a partially periodic pattern
    into a fixed window, as the domain grows.  Patterns of different sizes
    share a seed, so they are nested and the trend is monotone per seed."""
    t0 = time.perf_counter()
    ns = list(ns)
    fn = partial(_word_trial, ns=ns, d=d, N=N, M=M, r=r, p=p, q=q)
    rows = np.array(run_trials(fn, master_seed, trials, workers), dtype=bool).reshape(trials, len(ns))
    dt = time.perf_counter() - t0
    out = []
    for j, n in enumerate(ns):
        params = dict(kind="word_trend", d=d, D=d, n=n, N=N, M=M, r=r, p=p, q=q,
                      master_seed=master_seed)
        out.append(EstimateRecord(params, int(rows[:, j].sum()), trials, dt))
    return out


# -- first moment -------------------------------------------------------------

def moment_check(D: int, k: int, ns, ps, trials: int, master_seed: int) -> list:
    """Frequency of the finite path event ``A_n`` against ``(2D)^n p^(nk)``."""
    seeds = np.array(trial_seeds(master_seed, trials), dtype=np.uint64)
    out = []
    for n in ns:
        offsets = moment_offsets(k, n, D)
        for p in ps:
            t0 = time.perf_counter()
            hits = moment_event(n, offsets, p, seeds)
            bound = first_moment_bound(n, k, p, D)
            rec = EstimateRecord(dict(kind="moment_check", D=D, k=k, n=n, p=p,
                                      master_seed=master_seed),
                                 int(hits.sum()), trials, time.perf_counter() - t0)
            rec.extra = {"bound": bound, "within_bound": rec.estimate <= bound + 3 * rec.stderr}
            out.append(rec)
    return out

import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from lipembed.lattice import WindowSpec
from lipembed.percolation import Configuration, sample_config
from lipembed.renormalization import Embedding, verify_lip_injection
from lipembed.search import (SearchProblem, first_moment_bound, first_moment_decays, iter_injections,
                             moment_event, moment_offsets, partially_periodic_pattern,
                             rigidity_1lip_check, search_injection, search_word_embedding,
                             self_avoiding_paths)

from oracles import brute_injection, random_instances


def full(*shape, start=0):
    w = WindowSpec.box(*shape, start=start)
    return Configuration(w, np.ones(w.shape, bool), 1.0, 0)


def test_identity_and_pigeonhole():
    dom = WindowSpec.box(3, 3)
    res = search_injection(SearchProblem(dom, full(3, 3), 1))
    assert res.found and all(res.embedding(x) == x for x in dom.sites())
    closed = full(3, 3)
    closed.open[1, 1] = False
    assert search_injection(SearchProblem(dom, closed, 1)).status == "none"
    assert search_injection(SearchProblem(dom, closed, 5)).status == "none"


@pytest.mark.parametrize("inst", range(30))
def test_matches_brute_force(inst):
    dom, cfg, M = random_instances(30, seed=11)[inst]
    res = search_injection(SearchProblem(dom, cfg, M))
    want, _ = brute_injection(dom, cfg, M)
    if want is None:
        assert res.status == "none"
    else:
        assert res.found and list(map(tuple, res.embedding.as_array())) == want
        assert verify_lip_injection(res.embedding, cfg)[0]


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**31), st.floats(0.2, 0.9), st.integers(2, 3))
def test_all_ones_pattern_is_plain_search(seed, p, N):
    cfg = sample_config(WindowSpec.box(N, N + 1), p, seed)
    dom = WindowSpec.box(2, 2)
    a = search_injection(SearchProblem(dom, cfg, 1))
    b = search_word_embedding(SearchProblem(dom, cfg, 1, np.ones((2, 2), bool)))
    assert a.status == b.status
    if a.found:
        assert a.embedding.image == b.embedding.image


def test_word_embedding_brute_force():
    rng = np.random.default_rng(3)
    for _ in range(20):
        cfg = sample_config(WindowSpec.box(3, 3), 0.5, int(rng.integers(2**31)))
        eta = rng.random((2, 2)) < 0.5
        dom = WindowSpec.box(2, 2)
        res = search_word_embedding(SearchProblem(dom, cfg, 2, eta))
        want, _ = brute_injection(dom, cfg, 2, eta)
        assert (want is None) == (not res.found)
        if want is not None:
            assert list(map(tuple, res.embedding.as_array())) == want
            assert verify_lip_injection(res.embedding, cfg, eta)[0]


def test_iter_injections_sorted_and_complete():
    dom = WindowSpec.box(2)
    sols = [tuple(map(tuple, e.as_array())) for e in iter_injections(SearchProblem(dom, full(2, 2), 1))]
    assert sols == sorted(sols) and len(sols) == 8


def test_node_limit_unknown():
    dom = WindowSpec.box(3, 3)
    cfg = full(5, 5)
    cfg.open[2, 2] = False
    res = search_injection(SearchProblem(dom, cfg, 1), node_limit=3)
    assert res.status == "unknown" and res.embedding is None


def test_rigidity_examples():
    dom = WindowSpec.box(3, 3, start=1)
    ident = Embedding(dom, {x: x for x in dom.sites()}, 1)
    rep = rigidity_1lip_check(ident)
    assert rep.ok and rep.steps == ((1, 0), (0, 1)) and rep.translated_columns
    swap = Embedding(dom, {(a, b): (b, a, 7) for a, b in dom.sites()}, 1)
    rep = rigidity_1lip_check(swap)
    assert rep.ok and rep.steps == ((0, 1, 0), (1, 0, 0))
    bent = dict(ident.image)
    with pytest.raises(ValueError):
        bent[(3, 3)] = (9, 9)
        rigidity_1lip_check(Embedding(dom, bent, 1))


def test_first_moment_values():
    assert first_moment_bound(1, 1, 0.5, 2) == 1.0
    assert first_moment_bound(2, 4, 0.7, 2) == pytest.approx(16 * 0.7 ** 8)
    assert first_moment_decays(4, 0.7, 2) and not first_moment_decays(1, 0.5, 2)
    assert first_moment_bound(3, 2, 0.3, 1, word_mode=True) == pytest.approx(8 * 0.7 ** 6)
    vals = [first_moment_bound(n, 4, 0.7, 2) for n in range(1, 30)]
    assert all(a > b for a, b in zip(vals, vals[1:]))


@pytest.mark.parametrize("n,D,count", [(1, 2, 4), (2, 2, 12), (3, 2, 36), (4, 2, 100), (2, 3, 30)])
def test_self_avoiding_counts(n, D, count):
    paths = self_avoiding_paths(n, D)
    assert paths.shape == (count, n + 1, D)
    assert (np.abs(np.diff(paths, axis=1)).sum(-1) == 1).all()
    assert all(len(set(map(tuple, p))) == n + 1 for p in paths)


def test_moment_event_disjoint_translates_and_extremes():
    offs = moment_offsets(3, 4, 2)
    paths = self_avoiding_paths(4, 2)
    pts = offs[None, :, None, :] + paths[:, None, :, :]
    for row in pts:
        flat = [tuple(v) for v in row.reshape(-1, 2)]
        assert len(set(flat)) == len(flat)
    seeds = np.arange(10, dtype=np.uint64)
    assert moment_event(4, offs, 1.0, seeds).all()
    assert not moment_event(4, offs, 0.0, seeds).any()


def test_moment_event_matches_direct_check():
    offs = moment_offsets(2, 2, 2)
    seeds = np.arange(200, dtype=np.uint64)
    hits = moment_event(2, offs, 0.6, seeds)
    paths = self_avoiding_paths(2, 2)
    for s, h in zip(seeds, hits):
        lo, hi = (-2, -2), (2 * 5 + 2, 2)
        cfg = sample_config(WindowSpec(lo, hi), 0.6, int(s))
        want = any(all(cfg.is_open(tuple(o + y)) for o in offs for y in path) for path in paths)
        assert h == want


def test_periodic_pattern_nested():
    a = partially_periodic_pattern((6, 6), 3, 42)
    b = partially_periodic_pattern((9, 9), 3, 42)
    assert (b[:6, :6] == a).all()
    assert a[::3, ::3].all()

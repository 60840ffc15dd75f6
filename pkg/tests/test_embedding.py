
from collections import Counter
from itertools import product
import json
import math

import numpy as np
import pytest

from sparsedisj.channel import InvariantViolation
from sparsedisj.embedding import (SENTINEL, BoxT, EmbeddingParams, build_XY, estimate_empty_rate,
                                  estimate_lemma_error, marginal_uniformity, nx_scan_count, sample_Nx_box,
                                  sample_Nx_scan, small_pair)
from sparsedisj.embedding import _check_forced
from sparsedisj.grid import GridParams, GridPoint, match_count

LEMMA = EmbeddingParams(n=1000, M=10, side=800)
TOY = EmbeddingParams(n=50, M=10, side=10, t=20)

def test_params():
    assert(LEMMA.t == 4000)
    assert(LEMMA.m == 200)
    assert(LEMMA.n_prime == 1)
    assert(LEMMA.t_prime == 4)
    assert(LEMMA.I_size == 200)
    assert(LEMMA.embedded == 200)
    assert(LEMMA.M_formula == 10.0)
    assert(LEMMA.to_base()['I_size'] == 200)
    assert(TOY.m == 10)
    for bad in [dict(n=2, M=10), dict(n=1000, M=1), dict(n=1000, M=15), dict(n=1001, M=10),
                dict(n=1000, M=10, R=0), dict(n=1000, M=10, R=3), dict(n=1000, M=10, side=4000),
                dict(n=1000, M=10, side=0)]:
        with pytest.raises(ValueError):
            EmbeddingParams(**bad)

def test_desk_preset():
    desk = EmbeddingParams.desk()
    assert(desk.config == {'n': 2000, 't': 8000, 'M': 20, 'R': 1, 'side': 1600})
    assert(desk.m == 200)
    assert(desk.n_prime == 2)
    assert(desk.t_prime == 8)
    assert(desk.I_size == 400)

def test_from_dict(tmp_path):
    assert(EmbeddingParams.from_dict(LEMMA.to_base()) == LEMMA)
    with pytest.raises(ValueError):
        EmbeddingParams.from_dict({'n': 1000, 'M': 10, 'depth': 3})
    path = tmp_path / "params.json"
    path.write_text(json.dumps(TOY.config))
    assert(EmbeddingParams.load(path) == TOY)

def test_small_pair():
    rng = np.random.default_rng(2)
    desk = EmbeddingParams.desk()
    for matches in (0, 1, 2):
        u, v = small_pair(desk, matches, rng)
        assert(int((u == v).sum()) == matches)
        assert(u.min() >= 1 and u.max() <= 8 and v.min() >= 1 and v.max() <= 8)
    with pytest.raises(ValueError):
        small_pair(desk, 3, rng)

def test_build_XY():
    rng = np.random.default_rng(4)
    X, Y = build_XY((2,), (2,), LEMMA, rng)
    assert(X.valid(LEMMA.grid) and Y.valid(LEMMA.grid))
    assert(X.project(LEMMA.I) == Y.project(LEMMA.I))
    X, Y = build_XY((1,), (3,), LEMMA, rng)
    assert(match_count(X.project(LEMMA.I), Y.project(LEMMA.I)) < 10)
    with pytest.raises(ValueError):
        build_XY((5,), (1,), LEMMA, rng)
    with pytest.raises(ValueError):
        build_XY((1, 1), (1, 1), LEMMA, rng)

def test_check_forced():
    X = np.arange(1, 1001)
    Y = X.copy()
    Y[0] = 4000
    with pytest.raises(InvariantViolation):
        _check_forced(X, Y, np.array([1]), np.array([1]), LEMMA)
    _check_forced(X, Y, np.array([1]), np.array([2]), LEMMA)

def test_box():
    box = BoxT((1, 2, 3), 2, 3, 4)
    assert(len(box) == 8)
    assert((1, 2, 1) in box)
    assert((1, 3, 1) not in box)
    assert((1, 1) not in box)
    assert(box.h((1, 3, 1)) == 2)
    assert(box.count_nx((1, 3, 1), 1) == 6)
    assert(len(box.to_gridset()) == 8)
    wide = BoxT((1, 2), 2, 3, 4)
    assert((2, 2, 1) in wide)
    assert((2, 2, 2) not in wide)

def test_count_nx_matches_scan():
    box = BoxT((1, 2, 3), 2, 3, 4)
    T = box.to_gridset()
    for point in _all_points(GridParams(4, 3)):
        for M in (1, 2, 3):
            assert(box.count_nx(point, M) == nx_scan_count(point, T, box.I, M))

def _all_points(params):
    return [GridPoint(c) for c in product(range(1, params.t + 1), repeat=params.n)]

def test_sample_Nx_box_uniform():
    box = BoxT((1, 2, 3), 2, 3, 4)
    T = box.to_gridset()
    x = GridPoint((1, 3, 1))
    members = {z for z in T if match_count(z, x) >= 1}
    assert(len(members) == 6)
    rng = np.random.default_rng(6)
    draws = Counter(sample_Nx_box(x, box, 1, rng) for _ in range(6000))
    assert(set(draws) == members)
    assert(all(abs(c - 1000) < 150 for c in draws.values()))

def test_sample_Nx_sentinel():
    box = BoxT((1, 2, 3), 2, 3, 4)
    rng = np.random.default_rng(0)
    assert(sample_Nx_box((3, 3, 4), box, 1, rng) is SENTINEL)
    assert(sample_Nx_box((1, 3, 4), box, 2, rng) is SENTINEL)
    assert(sample_Nx_scan((3, 3, 4), box.to_gridset(), box.I, 1, rng) is SENTINEL)
    assert(SENTINEL.point(GridParams(4, 3)) == GridPoint((4, 4, 4)))
    assert(SENTINEL.point(GridParams(4, 3)) not in box)

def test_sample_Nx_scan():
    box = BoxT((1, 2, 3), 2, 3, 4)
    T = box.to_gridset()
    rng = np.random.default_rng(1)
    for _ in range(50):
        z = sample_Nx_scan((2, 1, 4), T, box.I, 2, rng)
        assert(z in box)
        assert(match_count(z, (2, 1, 4)) >= 2)

def test_sample_Nx_box_large():
    rng = np.random.default_rng(8)
    box = LEMMA.box
    x = GridPoint(tuple(rng.integers(1, LEMMA.t + 1, size=LEMMA.n).tolist()))
    for _ in range(20):
        z = sample_Nx_box(x, box, LEMMA.M, rng)
        assert(z in box)
        assert(match_count(z.project(LEMMA.I), x.project(LEMMA.I)) >= LEMMA.M)

def test_lemma_match0():
    report = estimate_lemma_error(LEMMA, "match0", 400, 21)
    exact = (1 - 1 / 4000) ** 1000
    assert(abs(report.exact - exact) < 1e-12)
    assert(abs(report.estimate - exact) <= 4 * math.sqrt(exact * (1 - exact) / 400))
    assert(report.sentinels == 0)
    assert(report.lemma_bound == 0.77)
    assert(report.to_base()['params']['m'] == 200)

def test_lemma_matchR():
    report = estimate_lemma_error(LEMMA, "matchR", 200, 22)
    assert(report.estimate >= 0.9)
    assert(report.verdict)
    assert(bool(report))
    assert(report.exact is None)

def test_lemma_jobs():
    a = estimate_lemma_error(TOY, "match0", 60, 5, jobs=1)
    b = estimate_lemma_error(TOY, "match0", 60, 5, jobs=3)
    assert(a.to_base() == b.to_base())
    with pytest.raises(ValueError):
        estimate_lemma_error(TOY, "match1", 10, 5)

def test_lemma_bypass():
    report = estimate_lemma_error(TOY, "matchR", 50, 3, bypass=True)
    assert(report.bypass)
    assert(report.sentinels == 0)
    assert(report.estimate == 1.0)

def test_empty_rate():
    desk = EmbeddingParams.desk()
    report = estimate_empty_rate(desk, 20000, 1, chunk=5000)
    assert(report.empty == 0)
    assert(report.exact < 1e-12)
    assert(report.bound == 5.0 ** -20)
    assert(report.verdict)

def test_empty_rate_toy():
    # |I| = 10 with side/t = 1/2 and M = 10: empty unless all ten land in the box
    report = estimate_empty_rate(TOY, 4096, 2)
    assert(abs(report.exact - (1 - 2.0 ** -10)) < 1e-12)
    assert(report.empty > 4000)
    assert(not report.verdict)

def test_marginal_uniformity():
    report = marginal_uniformity(TOY, "match0", 2000, 13)
    assert(report.dof == 19)
    assert(report.trials == 2000)
    assert(report.verdict)
    assert(marginal_uniformity(TOY, "matchR", 2000, 14, coordinate=30).verdict)
    with pytest.raises(ValueError):
        marginal_uniformity(TOY, "match0", 10, 1, coordinate=51)

def test_lemma_desk():
    desk = EmbeddingParams.desk()
    trials = 300
    match0 = estimate_lemma_error(desk, "match0", trials, 41)
    exact = (1 - 1 / 8000) ** 2000
    assert(abs(match0.exact - exact) < 1e-12)
    assert(match0.exact >= match0.lemma_bound)
    assert(abs(match0.estimate - exact) <= 4 * math.sqrt(exact * (1 - exact) / trials))
    assert(match0.sentinels == 0)
    matchR = estimate_lemma_error(desk, "matchR", 200, 42)
    assert(matchR.lemma_bound == 0.8)
    assert(matchR.sentinels == 0)
    assert(matchR.verdict)
    assert(matchR.to_base()['params']['n'] == 2000)

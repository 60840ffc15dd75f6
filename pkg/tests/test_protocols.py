
import math

import numpy as np
import pytest

from sparsedisj.channel import Output, Party, ProtocolError, run, run_trials
from sparsedisj.disjointness import (DisjointPairs, FolkloreHashing, HastadWigderson, IntersectingPairs, KSet,
                                     Schedule, SparseDisjointness, elias_gamma_bits, folklore_false_positive_bound,
                                     folklore_one_round, hw_baseline, make_protocol, random_intersecting_pair,
                                     run_sparse_disjointness, within_band)
from sparsedisj.disjointness.iterated import log_star
from sparsedisj.disjointness.protocols import round_sender

def test_round_sender():
    assert(round_sender(1) == Party.B)
    assert(round_sender(2) == Party.A)
    assert(round_sender(3) == Party.B)

def test_sparse_intersecting():
    schedule = Schedule.compute(16, 2)
    rng = np.random.default_rng(17)
    for seed in range(30):
        S, T = random_intersecting_pair(16 * 16 * 16, 16, rng, overlap=1 + seed % 3)
        out, transcript = run_sparse_disjointness(S, T, schedule, seed)
        assert(out == Output.INTERSECTING)
        assert([m.sender for m in transcript.messages] == [Party.B, Party.A][:transcript.rounds_used])
        assert(transcript.per_round_bits == schedule.per_round_bits[:transcript.rounds_used])

def test_sparse_deterministic():
    schedule = Schedule.compute(16, 1)
    S, T = KSet(64, range(1, 17)), KSet(64, range(16, 32))
    _, a = run_sparse_disjointness(S, T, schedule, 9)
    _, b = run_sparse_disjointness(S, T, schedule, 9)
    assert(a.to_base() == b.to_base())
    assert(a.total_bits == 197)
    assert(a.params['adjusted_round'] is None)

def test_sparse_disjoint():
    protocol = make_protocol("sparse", 64, r=2)
    trials = 2000
    summary = run_trials(protocol, DisjointPairs(16 * 64 * 64, 64), trials, 4)
    bound = protocol.schedule.error_bound()
    assert(summary.trials == trials)
    assert(summary.false_disjoint == 0)
    assert(summary.ci95[0] <= bound)
    assert(summary.error_rate <= bound + 3 * math.sqrt(bound * (1 - bound) / trials))
    assert(summary.rounds_histogram.get("1", 0) > 0)
    assert(set(summary.rounds_histogram) <= {"1", "2"})

def test_sparse_no_early_stop():
    protocol = SparseDisjointness(Schedule.compute(64, 2), early_stop=False)
    summary = run_trials(protocol, DisjointPairs(16 * 64 * 64, 64), 50, 4)
    assert(summary.rounds_histogram == {"2": 50})
    assert(protocol.params['early_stop'] is False)

def test_sparse_oversized_input():
    protocol = make_protocol("sparse", 16)
    with pytest.raises(ProtocolError):
        run(protocol, KSet(64, range(1, 18)), KSet(64, (1,)), 0)
    with pytest.raises(ProtocolError):
        run(protocol, KSet(64, (1,)), KSet(65, (1,)), 0)

def test_elias_gamma():
    assert(elias_gamma_bits(1) == 1)
    assert(elias_gamma_bits(2) == 3)
    assert(elias_gamma_bits(3) == 3)
    assert(elias_gamma_bits(4) == 5)
    assert(elias_gamma_bits(1023) == 19)

def test_hw():
    hw = HastadWigderson(16)
    assert(hw.threshold(1) == 16)
    assert(hw.threshold(2) == 16)
    assert(hw.threshold(3) == 13)
    assert(hw.max_rounds == 24)
    summary = run_trials(hw, IntersectingPairs(1024, 16), 100, 1)
    assert(summary.errors == 0)
    assert(summary.outputs == {"intersecting": 100})
    summary = run_trials(hw, DisjointPairs(1024, 16), 200, 2)
    assert(summary.false_disjoint == 0)
    assert(summary.error_rate < 0.05)
    with pytest.raises(ValueError):
        HastadWigderson(0)

def test_hw_index_bits():
    rng = np.random.default_rng(0)
    assert(HastadWigderson.index_bits(0, rng) == 1)
    big = [HastadWigderson.index_bits(200, rng) for _ in range(50)]
    assert(all(b % 2 == 1 for b in big))
    assert(abs(np.median(big) - 399) <= 6)

def test_hw_baseline():
    out, transcript = hw_baseline(KSet(100, (1, 2, 3)), KSet(100, (3, 4)), 5)
    assert(out == Output.INTERSECTING)
    assert(transcript.protocol == "hw")
    assert(transcript.params['k'] == 3)

def test_folklore():
    S, T = KSet(64, range(1, 17)), KSet(64, range(16, 32))
    out, transcript = folklore_one_round(S, T, 10, 5)
    assert(out == Output.INTERSECTING)
    assert(transcript.total_bits == 160)
    assert(transcript.messages[0].sender == Party.A)
    # the message is charged for k hashes whatever |S| is
    _, empty = folklore_one_round(KSet(64), T, 10, 5, k=16)
    assert(empty.total_bits == 160)
    _, small = folklore_one_round(KSet(64, (1, 2, 3)), T, 10, 5, k=16)
    assert(small.total_bits == transcript.total_bits)
    assert(folklore_false_positive_bound(16, 10) == 0.25)
    assert(folklore_false_positive_bound(16, 4) == 1.0)
    summary = run_trials(FolkloreHashing(16, 40), DisjointPairs(4096, 16), 100, 3)
    assert(summary.errors == 0)
    with pytest.raises(ValueError):
        FolkloreHashing(16, 0)
    with pytest.raises(ValueError):
        FolkloreHashing(0, 10)

def test_folklore_collisions():
    # 4 hash bits over 16 elements: spurious collisions are common
    summary = run_trials(FolkloreHashing(16, 4), DisjointPairs(4096, 16), 200, 3)
    assert(summary.false_disjoint == 0)
    assert(summary.false_intersecting > 100)

def test_make_protocol():
    assert(make_protocol("folklore", 16).params == {'k': 16, 'hash_bits': 10})
    assert(make_protocol("hw", 16).name == "hw")
    assert(make_protocol("sparse", 256, r=2).max_rounds == 2)
    with pytest.raises(ValueError):
        make_protocol("bogus", 16)
    with pytest.raises(ValueError):
        make_protocol("sparse", 16, r=4)

@pytest.mark.slow
def test_sparse_log_star_rounds():
    k = 1024
    protocol = make_protocol("sparse", k, r=log_star(k))
    assert(protocol.schedule.error_bound() < 1e-4)
    summary = run_trials(protocol, DisjointPairs(16 * k * k, k), 30, 6)
    assert(summary.errors == 0)
    assert(summary.outputs == {'disjoint': 30})

def test_hw_calibration():
    # error at most 0.1 on disjoint inputs at k = 256 with the frozen slack and decay
    summary = run_trials(make_protocol("hw", 256), DisjointPairs(16 * 256 * 256, 256), 500, 21)
    assert(summary.false_disjoint == 0)
    assert(summary.error_rate <= 0.1)

def test_hw_bits_linear():
    per_k = []
    for k in (64, 256, 1024):
        summary = run_trials(make_protocol("hw", k), DisjointPairs(16 * k * k, k), 40, 8)
        per_k.append(summary.mean_bits / k)
    assert(max(per_k) <= 16)
    assert(within_band(per_k))

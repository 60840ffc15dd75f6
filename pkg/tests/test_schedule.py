
import math

import pytest

from sparsedisj.disjointness import (BITS_BAND, Schedule, compute_schedule, iterated_exp, iterated_log, log_star,
                                     normalized_bits, within_band)
from sparsedisj.disjointness.schedule import scaled_power

def test_iterated():
    assert(iterated_log(0, 5) == 5)
    assert(iterated_log(2, 256) == 3)
    assert(iterated_exp(2, 2) == 16)
    assert(iterated_exp(3, 2000) == math.inf)
    assert(log_star(16) == 3)
    assert(log_star(1024) == 3)
    assert(log_star(2 ** 16) == 4)
    assert(log_star(1) == 0)
    with pytest.raises(ValueError):
        iterated_log(3, 2)
    with pytest.raises(ValueError):
        iterated_log(-1, 2)
    with pytest.raises(ValueError):
        log_star(0)

def test_scaled_power():
    assert(scaled_power(3, 4) == 48)
    assert(scaled_power(8, -2) == 2)
    assert(scaled_power(1, 0.5) == math.floor(2 ** 0.5 * 2 ** 52) >> 52)
    assert(abs(scaled_power(2 ** 20, 0.5) - 2 ** 20 * math.sqrt(2)) < 2)

def test_one_round():
    s = Schedule.compute(256, 1)
    assert(s.u == 24)
    assert(s.rounds == 1)
    assert(not s.adjusted)
    assert(s.l == [256 << 6144])
    assert(s.per_round_bits == [6153])
    assert(compute_schedule(16, 1).total_bits == 197)

def test_adjusted():
    s = Schedule.compute(256, 2)
    assert(s.u == 9)
    assert(s.kbound[2] == 2)
    assert(s.adjusted_round == 2)
    assert(s.adjusted_k == 64)
    assert(s.round_log2_p(2) == -32)
    assert(s.per_round_bits == [2313, 2057])
    assert(s.total_bits == 4370)
    with pytest.raises(ValueError):
        s.round_l(3)

def test_three_rounds_stop_early():
    s = Schedule.compute(1024, 3)
    assert(s.adjusted_round == 2)
    assert(s.rounds == 2)

def test_error_bound():
    s = Schedule.compute(64, 2)
    assert(s.adjusted_round == 2)
    expected = 2 * math.exp(-64) + 64 * 2.0 ** -16 + 2.0 ** -8
    assert(abs(s.error_bound() - expected) < 1e-12)
    assert(s.error_bound() < 0.005)
    one = Schedule.compute(64, 1)
    assert(abs(one.error_bound() - (math.exp(-64) + 64 * 2.0 ** -one.u)) < 1e-15)

def test_invalid():
    with pytest.raises(ValueError):
        Schedule.compute(3, 1)
    with pytest.raises(ValueError):
        Schedule.compute(64, 1, c=1)
    with pytest.raises(ValueError):
        Schedule.compute(16, 4)
    with pytest.raises(ValueError):
        Schedule.compute(16, 0)

def test_to_base():
    b = Schedule.compute(256, 2).to_base()
    assert(b['bits'] == [2313, 2057])
    assert(b['adjusted_round'] == 2)
    assert(b['adjusted']['bits'] == 2057)
    assert(b['rounds'] == 2)

def test_bits_band():
    ks = (64, 256, 1024, 4096)
    for r in (1, 2, 3):
        ratios = [normalized_bits(k, r) for k in ks]
        assert(ratios == [sum(Schedule.compute(k, r).per_round_bits) / (k * iterated_log(r, k)) for k in ks])
        assert(within_band(ratios, BITS_BAND))
    # one round costs about (c+1) k log k bits
    assert(abs(normalized_bits(4096, 1) - 3) < 0.01)
    assert(within_band([1.0, 2.0]))
    assert(not within_band([1.0, 2.5]))
    assert(within_band([]))


from fractions import Fraction
import math

import numpy as np
import pytest

from sparsedisj.channel import MessageKind
from sparsedisj.disjointness import (KSet, error_probability, literal_outcome_distribution, round_step_literal,
                                     round_step_virtual, virtual_outcome_distribution)

def test_error_probability():
    assert(error_probability(0, -1, 5) == 0)
    assert(abs(error_probability(1, -1, 1) - 0.5) < 1e-12)
    assert(abs(error_probability(2, -1, 3) - (3 / 4) ** 3) < 1e-12)
    # l = k 2^(ku), p = 2^-u gives about e^-k
    assert(abs(error_probability(16, -12, 16 << 192) / math.exp(-16) - 1) < 1e-9)
    assert(error_probability(64, -32, 256 << 2048) < 1e-100)
    assert(error_probability(1, -1, 1 << 2000) == 0)
    assert(error_probability(64, -8, 1 << 10) == 1)
    with pytest.raises(ValueError):
        error_probability(1, -1, 0)

def test_virtual_step():
    S = KSet(16, (1, 2))
    T = KSet(16, (2, 3, 4, 5))
    rng = np.random.default_rng(3)
    for _ in range(50):
        out = round_step_virtual(S, T, 0.5, 1 << 20, rng)
        assert(out.bits == 21)
        if out.error:
            assert(out.updated is None)
        else:
            assert(out.kind == MessageKind.INDEX)
            assert((T & S).issubset(out.updated))
            assert(out.updated.issubset(T))

def test_virtual_step_deterministic():
    S = KSet(16, (1, 2))
    T = KSet(16, (2, 3, 4, 5))
    a = round_step_virtual(S, T, None, 1000, np.random.default_rng(8), log2_p=-1)
    b = round_step_virtual(S, T, 0.5, 1000, np.random.default_rng(8))
    assert(a == b)
    with pytest.raises(ValueError):
        round_step_virtual(S, T, 1.5, 10, np.random.default_rng(0))
    with pytest.raises(ValueError):
        round_step_virtual(S, T, None, 10, np.random.default_rng(0), log2_p=0)

def test_literal_step():
    S = KSet(8, (1, 2))
    T = KSet(8, (2, 5, 6))
    rng = np.random.default_rng(1)
    for _ in range(50):
        out = round_step_literal(S, T, 0.5, 4, 8, rng)
        assert(out.bits == 3)
        if not out.error:
            assert(1 <= out.index <= 4)
            assert(2 in out.updated)
            assert(out.updated.issubset(T))
    with pytest.raises(ValueError):
        round_step_literal(S, T, 0.5, 2 ** 20, 8, rng)

def test_virtual_equals_literal():
    cases = [
        (KSet(8, (1, 2)), KSet(8, (2, 3, 4))),
        (KSet(8, (1,)), KSet(8, (5, 6))),
        (KSet(8, ()), KSet(8, (1, 8))),
        (KSet(8, (1, 3, 5)), KSet(8, (1, 3, 5))),
    ]
    for S, T in cases:
        for p in (Fraction(1, 4), Fraction(1, 2)):
            for l in (1, 2, 4):
                virtual = virtual_outcome_distribution(S, T, p, l)
                literal = literal_outcome_distribution(S, T, p, l, 8)
                assert(virtual == literal)
                assert(sum(virtual.values()) == 1)

def test_error_mass():
    law = virtual_outcome_distribution(KSet(8, (1, 2)), KSet(8, (3,)), Fraction(1, 2), 2)
    assert(law[(True, None)] == Fraction(9, 16))

def test_virtual_error_rate():
    # (1 - 1/2)^4 = 1/16 for a singleton sender set
    S = KSet(16, (3,))
    T = KSet(16, (3, 4, 5))
    rng = np.random.default_rng(31)
    trials = 10 ** 5
    errors = sum(round_step_virtual(S, T, 0.5, 4, rng).error for _ in range(trials))
    sigma = math.sqrt((1 / 16) * (15 / 16) / trials)
    assert(abs(errors / trials - 1 / 16) <= 4 * sigma)

def test_virtual_empty_sender():
    T = KSet(16, (1, 2, 3, 4))
    rng = np.random.default_rng(5)
    kept = {e: 0 for e in T}
    trials = 4000
    for _ in range(trials):
        out = round_step_virtual(KSet(16), T, 0.25, 1, rng)
        assert(not out.error)
        assert(out.updated.issubset(T))
        for e in out.updated:
            kept[e] += 1
    sigma = math.sqrt(0.25 * 0.75 / trials)
    for count in kept.values():
        assert(abs(count / trials - 0.25) <= 4 * sigma)

def test_virtual_receiver_inside_sender():
    S = KSet(16, (1, 2, 3, 9))
    T = KSet(16, (2, 9))
    rng = np.random.default_rng(12)
    for _ in range(200):
        out = round_step_virtual(S, T, 0.5, 64, rng)
        if not out.error:
            assert(out.updated == T)

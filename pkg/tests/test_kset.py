
import numpy as np
import pytest

from sparsedisj.disjointness import KSet, random_disjoint_pair, random_intersecting_pair, input_factory

def test_kset():
    S = KSet(10, (3, 1, 3, 2))
    assert(S.elements == (1, 2, 3))
    assert(len(S) == 3)
    assert(2 in S)
    assert(7 not in S)
    T = KSet(10, (3, 4))
    assert((S & T).elements == (3,))
    assert((S | T).elements == (1, 2, 3, 4))
    assert((S - T).elements == (1, 2))
    assert(KSet(10).isdisjoint(S))
    assert(not KSet(10))
    assert(S.to_base() == {'m': 10, 'elements': [1, 2, 3]})
    with pytest.raises(ValueError):
        KSet(10, (0,))
    with pytest.raises(ValueError):
        KSet(10, (11,))
    with pytest.raises(ValueError):
        KSet(0)
    with pytest.raises(ValueError):
        S & KSet(12, (3,))

def test_random_pairs():
    rng = np.random.default_rng(5)
    for _ in range(20):
        S, T = random_disjoint_pair(40, 8, rng)
        assert(len(S) == 8 and len(T) == 8)
        assert(S.isdisjoint(T))
        S, T = random_intersecting_pair(40, 8, rng, overlap=3)
        assert(len(S) == 8 and len(T) == 8)
        assert(len(S & T) == 3)
    with pytest.raises(ValueError):
        random_disjoint_pair(15, 8, rng)
    with pytest.raises(ValueError):
        random_intersecting_pair(40, 8, rng, overlap=0)
    with pytest.raises(ValueError):
        random_intersecting_pair(40, 8, rng, overlap=9)

def test_input_factory():
    S, T = input_factory("intersecting", 64, 4)(np.random.default_rng(0))
    assert(len(S & T) == 1)
    S, T = input_factory("disjoint", 64, 4)(np.random.default_rng(0))
    assert(S.isdisjoint(T))
    with pytest.raises(ValueError):
        input_factory("overlapping", 64, 4)

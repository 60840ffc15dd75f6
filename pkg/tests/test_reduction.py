
import pytest

from sparsedisj.channel import Output, run, run_trials
from sparsedisj.disjointness import ExistsEqualReduction, UniformPointPairs, ee_to_disjointness, ee_to_set, make_protocol
from sparsedisj.grid import GridParams

def test_ee_to_set():
    S = ee_to_set((2, 3), 4)
    assert(S.m == 8)
    assert(S.elements == (2, 7))
    with pytest.raises(ValueError):
        ee_to_set((5, 1), 4)

def test_ee_to_disjointness():
    a, b = ee_to_disjointness((1, 2, 3), (1, 3, 2), 3)
    assert((a & b).elements == (1,))
    a, b = ee_to_disjointness((1, 2, 3), (2, 3, 1), 3)
    assert(a.isdisjoint(b))
    with pytest.raises(ValueError):
        ee_to_disjointness((1, 2), (1, 2, 3), 3)

def test_reduction_protocol():
    params = GridParams(t=4, n=2)
    protocol = ExistsEqualReduction(make_protocol("folklore", 2, hash_bits=40), params)
    assert(protocol.name == "ee-folklore")
    assert(protocol.params == {'t': 4, 'n': 2, 'k': 2, 'hash_bits': 40})
    assert(protocol.truth((1, 2), (1, 3)) == Output.INTERSECTING)
    assert(protocol.truth((1, 2), (2, 1)) == Output.DISJOINT)
    out, transcript = run(protocol, (1, 2), (3, 2), 0)
    assert(out == Output.INTERSECTING)
    assert(transcript.protocol == "ee-folklore")
    summary = run_trials(protocol, UniformPointPairs(params), 200, 8)
    assert(summary.errors == 0)
    # Pr[EE = 1] = 1 - (3/4)^2 for t = 4, n = 2
    assert(60 <= summary.outputs.get("intersecting", 0) <= 115)

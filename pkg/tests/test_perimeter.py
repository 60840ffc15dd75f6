
from fractions import Fraction

import numpy as np
import pytest

from sparsedisj.downshift import ConcaveTable, intersection_sizes, perimeter
from sparsedisj.grid import GridParams, GridSet, ball_count

def test_singleton():
    p = GridParams(2, 2)
    S = GridSet.from_points(p, [(1, 1)])
    v = perimeter(S, ConcaveTable.counting())
    assert(v.exact)
    assert(v.value == Fraction(3, 4))
    assert(perimeter(S, ConcaveTable.log2(1)).value == Fraction(-1, 4))
    assert(perimeter(S, ConcaveTable.counting(), M=2).value == Fraction(1, 4))
    assert(perimeter(S, ConcaveTable.counting(), I=[2]).value == Fraction(1, 2))

def test_empty():
    p = GridParams(3, 2)
    assert(perimeter(GridSet.empty(p), ConcaveTable.counting()).value == 0)
    assert(perimeter(GridSet.empty(p), ConcaveTable.log2(4)).value == -1)

def test_full_set():
    # every ball lies inside the grid, so the average size is the ball size
    p = GridParams(3, 2)
    f = ConcaveTable((0, 1, 2, 3, 4, 5))
    assert(perimeter(GridSet.full(p), f).value == ball_count(p, None, 1))

def test_intersection_sizes():
    p = GridParams(3, 2)
    S = GridSet.box(p, [2, 2])
    xs = np.array([[1, 1], [3, 3], [1, 3]])
    assert(intersection_sizes(S, xs, None, 1).tolist() == [3, 0, 2])
    assert(intersection_sizes(S, xs, [1], 1).tolist() == [2, 0, 2])
    with pytest.raises(ValueError):
        intersection_sizes(S, xs, None, 3)

def test_montecarlo():
    p = GridParams(3, 3)
    S = GridSet.box(p, [2, 2, 2])
    f = ConcaveTable.counting()
    exact = perimeter(S, f, mode="exhaustive")
    mc = perimeter(S, f, mode="montecarlo", samples=20000, rng=np.random.default_rng(2))
    assert(not mc.exact)
    assert(mc.samples == 20000)
    assert(abs(mc.value - float(exact.value)) < 5 * mc.stderr + 1e-9)
    again = perimeter(S, f, mode="montecarlo", samples=20000)
    assert(again.value == perimeter(S, f, mode="montecarlo", samples=20000).value)
    assert(mc.to_base()['float'] == mc.value)

def test_modes():
    S = GridSet.full(GridParams(2, 21))
    with pytest.raises(OverflowError):
        perimeter(S, ConcaveTable.counting(), mode="exhaustive")
    with pytest.raises(ValueError):
        perimeter(GridSet.full(GridParams(2, 2)), ConcaveTable.counting(), mode="guess")

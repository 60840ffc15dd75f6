
from dataclasses import replace
from fractions import Fraction

import numpy as np
import pytest

from sparsedisj.downshift import PipelineRefused, down, isoperimetry_pipeline, isoperimetry_suite
from sparsedisj.downshift.pipeline import box_ball_count, box_h_law
from sparsedisj.grid import GridParams, GridSet

def test_box_laws():
    law = box_h_law(3, 2, 4)
    assert(sum(law) == 1)
    assert(law[0] == Fraction(1, 8))
    assert(box_ball_count(2, 3, 2, 1) == 6)
    assert(box_ball_count(0, 3, 2, 1) == 0)
    assert(box_ball_count(3, 3, 2, 0) == 8)

def test_full_grid():
    S = GridSet.full(GridParams(3, 2))
    T, report = isoperimetry_pipeline(S, side=2, M=1)
    assert(len(T) == 2)
    assert(T == GridSet.from_points(S.params, [(1, 1), (2, 1)]))
    assert(report.I == (1,))
    assert(report.exact)
    assert(report.pr_empty == Fraction(1, 3))
    assert(report.box_pr_empty == Fraction(1, 3))
    assert(report.e_log == Fraction(-1, 3))
    assert(report.box_e_log == Fraction(-1, 3))
    assert(report.verdict)
    assert(report.to_base()['pr_empty_float'] == 1 / 3)

def test_box_in_big_grid():
    p = GridParams(4, 10)
    S = GridSet.box(p, [2] * 10)
    T, report = isoperimetry_pipeline(S, side=2, M=1)
    assert(report.I == (1, 2))
    assert(len(T) == 4)
    assert(T.issubset(S))
    assert(down(T) == GridSet.box(p, [2, 2] + [1] * 8))
    assert(report.pr_empty == Fraction(1, 4))
    assert(report.box_pr_empty == Fraction(1, 4))
    assert(report.bound_empty == Fraction(1, 5))
    assert(report.consequence_empty)
    assert(report.consequence_log)

def test_montecarlo():
    p = GridParams(4, 11)
    S = GridSet.box(p, [2] * 11)
    T, report = isoperimetry_pipeline(S, side=2, M=1, samples=4000, rng=np.random.default_rng(9))
    assert(not report.exact)
    assert(report.samples == 4000)
    assert(report.I == (1, 2, 3))
    assert(len(T) == 8)
    assert(abs(report.pr_empty - 0.125) < 4 * report.pr_empty_stderr + 1e-9)
    assert(report.verdict)

def test_refused():
    with pytest.raises(PipelineRefused) as e:
        isoperimetry_pipeline(GridSet.full(GridParams(2, 3)))
    assert(e.value.M_raw < 1)
    with pytest.raises(ValueError):
        isoperimetry_pipeline(GridSet.full(GridParams(3, 2)), side=2, M=2)

def test_forced_theorem_is_advisory():
    S = GridSet.box(GridParams(4, 10), [2] * 10)
    T, report = isoperimetry_pipeline(S, side=2, M=1)
    assert(report.forced)
    # Bin(2, 1/2) misses both coordinates a quarter of the time, above 1/5
    assert(not report.theorem_empty)
    assert(not report.theorem)
    assert(report.verdict)
    assert(report.to_base()['theorem_advisory'])
    unforced = replace(report, forced=False)
    assert(not unforced.verdict)
    assert(not unforced.to_base()['theorem_advisory'])

def test_refused_below_one():
    S = GridSet.from_points(GridParams(2, 3), [(1, 1, 1)])
    with pytest.raises(PipelineRefused) as e:
        isoperimetry_pipeline(S)
    assert(e.value.k < 1)
    assert("k below 1" in e.value.reason)

@pytest.mark.slow
def test_random_sets_theorem_bounds():
    # t^n = 59049 stays exhaustive; density 1/2 puts far more than the 21 points
    # with at most one coordinate >= 2 into every S, so a side 2 witness exists
    p = GridParams(3, 10)
    report = isoperimetry_suite(p, 100, np.random.default_rng(2024), 0.5, side=2, M=1)
    assert(report.sets_checked == 100)
    assert(report.refused == 0)
    assert(report.consequence_failures == 0)
    assert(report.theorem_empty_failures == 0)
    assert(report.theorem_log_failures == 0)
    # Pr[Bin(2, 2/3) = 0] = 1/9
    assert(report.worst_pr_empty <= 1 / 9)
    assert(report.worst_e_log_margin > 0)
    assert(report.theorem)
    assert(report.verdict)
    assert(report.to_base()['theorem_advisory'])

def test_random_sets_single():
    p = GridParams(3, 10)
    S = GridSet.random(p, np.random.default_rng(7), 0.5)
    T, report = isoperimetry_pipeline(S, side=2, M=1)
    assert(report.exact)
    assert(report.I == report.witness.I)
    assert(len(report.I) == 2)
    assert(len(T) == 4)
    assert(T.issubset(S))
    assert(report.box_pr_empty == Fraction(1, 9))
    assert(report.pr_empty <= report.box_pr_empty)
    assert(report.e_log >= report.box_e_log)
    assert(report.theorem_empty)
    assert(report.theorem_log)

def test_random_sets_bad_count():
    with pytest.raises(ValueError):
        isoperimetry_suite(GridParams(2, 2), 0, np.random.default_rng(0))

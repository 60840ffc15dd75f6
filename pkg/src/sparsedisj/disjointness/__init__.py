"""
Sparse set disjointness: the r-round random-set protocol with its parameter
schedule, the Hastad-Wigderson and hashing baselines, and the exists-equal
reduction.
"""

from .iterated import iterated_log, iterated_exp, log_star
from .kset import (KSet, random_disjoint_pair, random_intersecting_pair, DisjointPairs,
                   IntersectingPairs, input_factory)
from .schedule import Schedule, compute_schedule, DEFAULT_C, BITS_BAND, normalized_bits, within_band
from .sampling import (RoundOutcome, round_step_virtual, round_step_literal, error_probability,
                       virtual_outcome_distribution, literal_outcome_distribution)
from .protocols import (SparseDisjointness, HastadWigderson, FolkloreHashing, run_sparse_disjointness,
                        hw_baseline, folklore_one_round, folklore_false_positive_bound, make_protocol,
                        elias_gamma_bits)
from .reduction import ee_to_set, ee_to_disjointness, ExistsEqualReduction, UniformPointPairs

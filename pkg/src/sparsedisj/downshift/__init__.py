"""
Down-compression of grid sets and the verifiers built on it.
"""

# above this many grid points perimeter() falls back to Monte Carlo
EXHAUSTIVE_LIMIT = 2 ** 20
# default Monte Carlo sample count for perimeter()
MC_SAMPLES = 10 ** 5
# default number of subsets verify_conjecture() may enumerate
ENUMERATION_BUDGET = 10 ** 7
# absolute slack for float comparisons of non-integer tables
FLOAT_SLACK = 2.0 ** -40


class WitnessNotFound(RuntimeError):
    """
    No point of down(K) has enough coordinates above the threshold k.
    Only reachable through rounding at tiny scale.
    """
    def __init__(self, mu, k: float, message: str = "") -> None:
        self.mu = mu
        self.k = k
        super().__init__(message or f"no box witness: mu(K)={mu} k={k:.6g}")


class BudgetExceeded(RuntimeError):
    """An exhaustive enumeration would visit more sets than allowed."""
    def __init__(self, count: int, budget: int) -> None:
        self.count = count
        self.budget = budget
        super().__init__(f"enumeration of {count} sets exceeds budget {budget}")


class PipelineRefused(ValueError):
    """The match threshold rounds below 1 so the isoperimetry statements are vacuous."""
    def __init__(self, M_raw: float, k: float, reason: str) -> None:
        self.M_raw = M_raw
        self.k = k
        self.reason = reason
        super().__init__(f"isoperimetry pipeline refused: {reason} (M={M_raw:.6g}, k={k:.6g})")


from .ops import down_ia, down_i, ia_sweeps, down_i_via_ia, down, is_i_ideal, is_ideal
from .concave import ConcaveTable
from .witness import BoxWitness, find_box_witness, extract_T
from .perimeter import PerimeterValue, perimeter, intersection_sizes
from .verify import (ListLemmaCheck, verify_list_lemma, ConjectureReport, verify_conjecture,
                     DownshiftSuiteReport, downshift_suite, ListLemmaSuiteReport, list_lemma_suite)
from .pipeline import IsoperimetrySuiteReport, PipelineReport, isoperimetry_pipeline, isoperimetry_suite

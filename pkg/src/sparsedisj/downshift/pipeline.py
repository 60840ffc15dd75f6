"""
The isoperimetry pipeline: down-shift a set, find a box under it, pull the box
back to a subset T of the original set and measure how often the restricted
ball around a uniform point misses T.
"""
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import comb, floor, log2
import logging

import numpy as np

from ..grid import GridParams, GridSet
from ..resources import ResourceBase, SCHEMA_VERSION
from . import EXHAUSTIVE_LIMIT, MC_SAMPLES, PipelineRefused, WitnessNotFound
from .concave import ConcaveTable
from .perimeter import all_intersection_sizes, exact_average, intersection_sizes
from .witness import BoxWitness, extract_T, find_box_witness

logger = logging.getLogger(__name__)

# Monte Carlo comparisons allow this many standard errors
SIGMAS = 4


@lru_cache(maxsize=4096)
def box_ball_count(h: int, size: int, side: int, M: int) -> int:
    """
    |B_{I,M}(x) & P| for the box P with side `side` on the |I| = size coordinates,
    when x has h coordinates of I inside [side]:
    sum_{j=M}^{h} C(h,j) (side-1)^(h-j) side^(size-h)
    """
    if h < M:
        return 0
    return sum(comb(h, j) * (side - 1) ** (h - j) for j in range(M, h + 1)) * side ** (size - h)


def box_h_law(size: int, side: int, t: int) -> list[Fraction]:
    """Pr[h = j] for h ~ Bin(size, side/t), exactly"""
    return [Fraction(comb(size, j) * side ** j * (t - side) ** (size - j), t ** size) for j in range(size + 1)]


@dataclass
class PipelineReport(ResourceBase):
    params: GridParams
    mu: Fraction
    k: float
    side: int
    I: tuple[int, ...]
    M_raw: float
    M: int
    T_size: int
    witness: BoxWitness
    exact: bool
    samples: int
    pr_empty: Fraction|float
    pr_empty_stderr: float
    e_log: Fraction|float
    e_log_stderr: float
    box_pr_empty: Fraction
    box_e_log: Fraction
    bound_empty: Fraction
    bound_log: float
    theorem_empty: bool
    theorem_log: bool
    consequence_empty: bool
    consequence_log: bool
    forced: bool = False
    schema_version: int = SCHEMA_VERSION

    @property
    def theorem(self) -> bool:
        return self.theorem_empty and self.theorem_log

    @property
    def verdict(self) -> bool:
        """
        The finite-scale consequences always count.  The theorem bounds count
        unless side or M was forced, in which case they are advisory.
        """
        if not (self.consequence_empty and self.consequence_log):
            return False
        return self.forced or self.theorem

    def __bool__(self) -> bool:
        return self.verdict

    def to_base(self) -> dict:
        b = super().to_base()
        b['verdict'] = self.verdict
        b['theorem_advisory'] = self.forced
        b['pr_empty_float'] = float(self.pr_empty)
        b['e_log_float'] = float(self.e_log)
        return b


def isoperimetry_pipeline(S: GridSet, side: int|None = None, M: int|None = None,
                          samples: int = MC_SAMPLES,
                          rng: np.random.Generator|None = None) -> tuple[GridSet, PipelineReport]:
    """
    Run down, find_box_witness and extract_T on S, then compute Pr[N_x empty]
    and E[log|N_x|] (log 0 = -1) for uniform x, where
    N_x = {z in T : Match(x_I, z_I) >= M} and M = nk/(20t).

    Refuses with PipelineRefused when floor(nk/(20t)) < 1 unless M is given,
    and when k < 1 unless side is given.  `side` overrides the rounded box
    side.  Without overrides the report's verdict includes both theorem
    bounds.  Returns (T, report).
    """
    params = S.params
    witness = find_box_witness(S, side)
    k = witness.k
    M_raw = params.n * k / (20 * params.t)
    size = len(witness.I)
    if side is None and k < 1:
        raise PipelineRefused(M_raw, k, "k below 1 leaves T with k^(n/5) < 1 points")
    if M is None:
        if floor(M_raw) < 1:
            raise PipelineRefused(M_raw, k, "match threshold nk/(20t) rounds below 1")
        M_eff = min(size, floor(M_raw))
    else:
        M_eff = int(M)
        if not 1 <= M_eff <= size:
            raise ValueError(f"match threshold M={M} outside 1..|I|={size}")

    T = extract_T(S, witness.corner)
    log_table = ConcaveTable.log2(len(T))

    if params.size <= EXHAUSTIVE_LIMIT:
        sizes = all_intersection_sizes(T, witness.I, M_eff)
        exact = True
        n_samples = params.size
        pr_empty = Fraction(int((sizes == 0).sum()), params.size)
        e_log = exact_average(log_table, sizes, params.size)
        pr_err = log_err = 0.0
    else:
        rng = rng if rng is not None else np.random.default_rng(0)
        xs = rng.integers(1, params.t + 1, size=(samples, params.n))
        sizes = intersection_sizes(T, xs, witness.I, M_eff)
        exact = False
        n_samples = samples
        empty = (sizes == 0).astype(np.float64)
        logs = log_table.float_array(int(sizes.max()))[sizes]
        pr_empty = float(empty.mean())
        e_log = float(logs.mean())
        pr_err = float(empty.std(ddof=1) / np.sqrt(samples))
        log_err = float(logs.std(ddof=1) / np.sqrt(samples))

    law = box_h_law(size, witness.side, params.t)
    box_pr_empty = sum(law[:M_eff], Fraction(0))
    box_e_log = sum((p * log_table(box_ball_count(h, size, witness.side, M_eff)) for h, p in enumerate(law)),
                    Fraction(0))

    bound_empty = Fraction(1, 5 ** M_eff)
    log_k = log2(k)
    bound_log = (params.n / 5 - M_eff) * log_k - params.n * log_k / 5 ** M_eff
    slack_empty = SIGMAS * pr_err
    slack_log = SIGMAS * log_err

    report = PipelineReport(
        params=params, mu=S.mu, k=k, side=witness.side, I=witness.I,
        M_raw=M_raw, M=M_eff, T_size=len(T), witness=witness,
        exact=exact, samples=n_samples,
        pr_empty=pr_empty, pr_empty_stderr=pr_err,
        e_log=e_log, e_log_stderr=log_err,
        box_pr_empty=box_pr_empty, box_e_log=box_e_log,
        bound_empty=bound_empty, bound_log=bound_log,
        theorem_empty=float(pr_empty) <= float(bound_empty) + slack_empty,
        theorem_log=float(e_log) >= bound_log - slack_log,
        consequence_empty=(pr_empty <= box_pr_empty) if exact else pr_empty <= float(box_pr_empty) + slack_empty,
        consequence_log=(e_log >= box_e_log) if exact else e_log >= float(box_e_log) - slack_log,
        forced=side is not None or M is not None,
    )
    logger.info(f"isoperimetry {params}: |T|={len(T)} M={M_eff} Pr[empty]={float(pr_empty):.4g} "
                f"E[log]={float(e_log):.4g}")
    if not (report.consequence_empty and report.consequence_log):
        logger.warning(f"isoperimetry consequences failed for {params}")
    elif not report.theorem:
        level = logging.INFO if report.forced else logging.WARNING
        logger.log(level, f"isoperimetry theorem bounds failed for {params}, forced={report.forced}")
    return T, report


@dataclass
class IsoperimetrySuiteReport(ResourceBase):
    params: GridParams
    density: float
    side: int|None
    M: int|None
    sets_checked: int = 0
    refused: int = 0
    theorem_empty_failures: int = 0
    theorem_log_failures: int = 0
    consequence_failures: int = 0
    worst_pr_empty: float = 0.0
    worst_e_log_margin: float|None = None
    schema_version: int = SCHEMA_VERSION

    @property
    def forced(self) -> bool:
        return self.side is not None or self.M is not None

    @property
    def theorem(self) -> bool:
        return self.theorem_empty_failures == 0 and self.theorem_log_failures == 0

    @property
    def verdict(self) -> bool:
        return self.sets_checked > 0 and self.consequence_failures == 0 and (self.forced or self.theorem)

    def __bool__(self) -> bool:
        return self.verdict

    def to_base(self) -> dict:
        b = super().to_base()
        b['verdict'] = self.verdict
        b['theorem'] = self.theorem
        b['theorem_advisory'] = self.forced
        return b


def isoperimetry_suite(params: GridParams, random_sets: int, rng: np.random.Generator,
                       density: float = 0.5, side: int|None = None, M: int|None = None,
                       samples: int = MC_SAMPLES) -> IsoperimetrySuiteReport:
    """
    isoperimetry_pipeline() on `random_sets` random subsets of the grid, each
    point kept with probability `density`.  Empty and refused sets are counted,
    not checked.
    """
    if random_sets < 1:
        raise ValueError(f"isoperimetry suite needs at least one set: {random_sets}")
    report = IsoperimetrySuiteReport(params=params, density=density, side=side, M=M)
    for _ in range(random_sets):
        S = GridSet.random(params, rng, density)
        if not len(S):
            report.refused += 1
            continue
        try:
            _, one = isoperimetry_pipeline(S, side, M, samples, rng)
        except (PipelineRefused, WitnessNotFound) as e:
            logger.debug(f"isoperimetry suite {params}: {e}")
            report.refused += 1
            continue
        report.sets_checked += 1
        report.theorem_empty_failures += not one.theorem_empty
        report.theorem_log_failures += not one.theorem_log
        report.consequence_failures += not (one.consequence_empty and one.consequence_log)
        report.worst_pr_empty = max(report.worst_pr_empty, float(one.pr_empty))
        margin = float(one.e_log) - one.bound_log
        if report.worst_e_log_margin is None or margin < report.worst_e_log_margin:
            report.worst_e_log_margin = margin
    logger.info(f"isoperimetry suite {params}: {report.sets_checked} sets, {report.refused} refused, "
                f"theorem failures {report.theorem_empty_failures}/{report.theorem_log_failures}")
    return report

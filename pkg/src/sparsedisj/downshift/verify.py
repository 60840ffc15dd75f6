"""
Exhaustive and randomized verifiers for the down-shift lemmas and the
box conjecture.
"""
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations, islice
from math import comb
from multiprocessing import Pool
from typing import Iterable, Sequence
import logging

import numpy as np

from ..channel import InvariantViolation
from ..grid import GridParams, GridSet, decode_array
from ..resources import ResourceBase, SCHEMA_VERSION
from . import ENUMERATION_BUDGET, FLOAT_SLACK, BudgetExceeded, WitnessNotFound
from .concave import ConcaveTable
from .ops import down_ia, down_i, down_i_via_ia, down, is_i_ideal, is_ideal
from .perimeter import perimeter
from .witness import extract_T, find_box_witness

logger = logging.getLogger(__name__)

# all 2^(t^n) subsets are enumerated only up to this many grid points
ALL_SUBSETS_POINTS = 16
# verify_conjecture() precomputes a t^n x t^n ball matrix
BALL_MATRIX_LIMIT = 4096
# failures / counterexamples kept verbatim in a report
KEEP = 16
# subsets scored per numpy batch
_BATCH = 4096


@dataclass
class ListLemmaCheck(ResourceBase):
    """Both sides of E f(|B & down(K)|) <= E f(|B & K|) for one set."""
    K: GridSet
    I: tuple[int, ...]
    M: int
    f: str
    before: Fraction
    after: Fraction
    ideal: bool
    verdict: bool

    def __bool__(self) -> bool:
        return self.verdict


def verify_list_lemma(K: GridSet, I: Iterable[int]|None = None, M: int = 1,
                      f: ConcaveTable|None = None) -> ListLemmaCheck:
    """
    Check that the generalized perimeter does not increase under down(),
    and that it is unchanged when K is already an ideal.  Exact arithmetic.
    """
    f = f or ConcaveTable.counting()
    idx = K.params.check_subset(I)
    before = perimeter(K, f, idx, M, mode="exhaustive").value
    after = perimeter(down(K), f, idx, M, mode="exhaustive").value
    ideal = is_ideal(K)
    verdict = after <= before and (after == before or not ideal)
    return ListLemmaCheck(K=K, I=idx, M=int(M), f=f.name, before=before, after=after,
                          ideal=ideal, verdict=verdict)


def _subsets(params: GridParams, random_sets: int, rng: np.random.Generator|None,
             density: float) -> tuple[list[GridSet], bool]:
    exhaustive = params.size <= ALL_SUBSETS_POINTS
    sets = list(GridSet.all_subsets(params)) if exhaustive else []
    if random_sets:
        rng = rng if rng is not None else np.random.default_rng(0)
        sets.extend(GridSet.random(params, rng, density) for _ in range(random_sets))
    return sets, exhaustive


def check_downshift(K: GridSet) -> list[str]:
    """
    Every down-shift property for one set.  Returns the failed ones, an
    empty list meaning K passed.
    """
    failures = []
    params = K.params
    for i in range(1, params.n + 1):
        Di = down_i(K, i)
        if len(Di) != len(K):
            failures.append(f"|down_{i}(K)|={len(Di)} != |K|={len(K)}")
        if not is_i_ideal(Di, i):
            failures.append(f"down_{i}(K) is not a {i}-ideal")
        for j in range(1, params.n + 1):
            if j != i and is_i_ideal(K, j) and not is_i_ideal(Di, j):
                failures.append(f"down_{i}(K) lost {j}-ideality")
        if down_i_via_ia(K, i) != Di:
            failures.append(f"iterated down_({i},a) differs from down_{i}")
        for a in range(2, params.t + 1):
            if len(down_ia(K, i, a)) != len(K):
                failures.append(f"|down_({i},{a})(K)| != |K|")
    D = down(K)
    if len(D) != len(K):
        failures.append(f"|down(K)|={len(D)} != |K|={len(K)}")
    if not is_ideal(D):
        failures.append("down(K) is not an ideal")
    if down(D) != D:
        failures.append("down is not idempotent")
    for x in D:
        try:
            T = extract_T(K, x)
        except (InvariantViolation, ValueError) as e:
            failures.append(f"extract_T at {x}: {e}")
            continue
        if len(T) != int(np.prod(x.coords)):
            failures.append(f"|T|={len(T)} at {x}")
    if len(K):
        try:
            find_box_witness(K)
        except WitnessNotFound as e:
            failures.append(str(e))
    return [f"{K}: {msg}" for msg in failures]


@dataclass
class DownshiftSuiteReport(ResourceBase):
    params: GridParams
    sets_checked: int
    exhaustive: bool
    failure_count: int = 0
    failures: list[str] = field(default_factory=list)
    schema_version: int = SCHEMA_VERSION

    @property
    def verdict(self) -> bool:
        return self.failure_count == 0

    def __bool__(self) -> bool:
        return self.verdict

    def to_base(self) -> dict:
        b = super().to_base()
        b['verdict'] = self.verdict
        return b


def downshift_suite(params: GridParams, random_sets: int = 0,
                    rng: np.random.Generator|None = None,
                    density: float = 0.5) -> DownshiftSuiteReport:
    """
    check_downshift() over every subset of a tiny grid (t^n <= 16) and/or
    `random_sets` random subsets, each point kept with probability `density`.
    """
    sets, exhaustive = _subsets(params, random_sets, rng, density)
    report = DownshiftSuiteReport(params=params, sets_checked=0, exhaustive=exhaustive)
    for K in sets:
        failed = check_downshift(K)
        report.sets_checked += 1
        report.failure_count += len(failed)
        report.failures.extend(failed[:max(0, KEEP - len(report.failures))])
    logger.info(f"downshift suite {params}: {report.sets_checked} sets, {report.failure_count} failures")
    if report.failure_count:
        logger.warning(f"downshift suite {params} failed: {report.failures[0]}")
    return report


@dataclass
class ListLemmaSuiteReport(ResourceBase):
    params: GridParams
    I: tuple[int, ...]
    Ms: list[int]
    tables: list[str]
    sets_checked: int = 0
    checks: int = 0
    ideals: int = 0
    violations: list[ListLemmaCheck] = field(default_factory=list)
    violation_count: int = 0
    schema_version: int = SCHEMA_VERSION

    @property
    def verdict(self) -> bool:
        return self.violation_count == 0

    def __bool__(self) -> bool:
        return self.verdict

    def to_base(self) -> dict:
        b = super().to_base()
        b['verdict'] = self.verdict
        return b


def list_lemma_suite(params: GridParams, Ms: Sequence[int] = (1,),
                     tables: Sequence[str] = ("counting", "log", "indicator"),
                     I: Iterable[int]|None = None) -> ListLemmaSuiteReport:
    """verify_list_lemma() for every subset of a tiny grid, every M and table."""
    if params.size > ALL_SUBSETS_POINTS:
        raise BudgetExceeded(2 ** params.size, 2 ** ALL_SUBSETS_POINTS)
    idx = params.check_subset(I)
    fs = [ConcaveTable.from_name(name, params.size) for name in tables]
    report = ListLemmaSuiteReport(params=params, I=idx, Ms=list(Ms), tables=list(tables))
    for K in GridSet.all_subsets(params):
        report.sets_checked += 1
        report.ideals += is_ideal(K)
        for M in Ms:
            for f in fs:
                check = verify_list_lemma(K, idx, M, f)
                report.checks += 1
                if not check:
                    report.violation_count += 1
                    if len(report.violations) < KEEP:
                        report.violations.append(check)
    logger.info(f"list lemma suite {params}: {report.checks} checks, {report.violation_count} violations")
    return report


def unrank_combination(N: int, s: int, rank: int) -> list[int]:
    """The rank-th s-subset of range(N) in itertools.combinations order."""
    out = []
    x = 0
    for remaining in range(s, 0, -1):
        while True:
            c = comb(N - x - 1, remaining - 1)
            if rank < c:
                out.append(x)
                x += 1
                break
            rank -= c
            x += 1
    return out


@dataclass
class _ConjectureChunk():
    start: int
    stop: int
    N: int
    s: int
    balls: np.ndarray
    table: np.ndarray
    box_total: int|float
    slack: float


@dataclass
class _ChunkResult():
    checked: int = 0
    best: int|float|None = None
    best_rank: int = -1
    ties: int = 0
    violations: int = 0
    counterexamples: list[tuple[int, int|float]] = field(default_factory=list)

    def merge(self, other: '_ChunkResult') -> None:
        self.checked += other.checked
        self.ties += other.ties
        self.violations += other.violations
        if other.best is not None and (self.best is None or (other.best, other.best_rank) < (self.best, self.best_rank)):
            self.best = other.best
            self.best_rank = other.best_rank
        self.counterexamples = sorted(self.counterexamples + other.counterexamples)[:KEEP]


def _scan(chunk: _ConjectureChunk) -> _ChunkResult:
    result = _ChunkResult()
    combos = islice(combinations(range(chunk.N), chunk.s), chunk.start, chunk.stop)
    rank = chunk.start
    while True:
        batch = np.array(list(islice(combos, _BATCH)), dtype=np.int64)
        if not batch.size:
            break
        batch = batch.reshape(-1, chunk.s)
        hits = chunk.balls[:, batch].sum(axis=2)
        totals = chunk.table[hits].sum(axis=0)
        i = int(np.argmin(totals))
        if result.best is None or totals[i] < result.best:
            result.best = totals[i].item()
            result.best_rank = rank + i
        result.ties += int((np.abs(totals - chunk.box_total) <= chunk.slack).sum())
        below = np.flatnonzero(totals < chunk.box_total - chunk.slack)
        result.violations += int(below.size)
        for j in below[:KEEP]:
            result.counterexamples.append((rank + int(j), totals[j].item()))
        result.counterexamples = result.counterexamples[:KEEP]
        result.checked += batch.shape[0]
        rank += batch.shape[0]
    return result


@dataclass
class ConjectureReport(ResourceBase):
    """
    Outcome of scoring every |S| = k^n subset of [t]^n against the box [k]^n.
    Values are averages over the grid; `exact` means integer arithmetic was used,
    otherwise comparisons allow `slack`.
    """
    params: dict
    sets_checked: int
    verdict: bool
    min_value: Fraction|float
    box_value: Fraction|float
    argmin_set: list[list[int]]
    ties: int
    violations: int
    counterexamples: list[dict]
    exact: bool
    slack: float
    schema_version: int = SCHEMA_VERSION

    def __bool__(self) -> bool:
        return self.verdict


def ball_matrix(params: GridParams, M: int) -> np.ndarray:
    """balls[x, y] = Match(x, y) >= M over all coordinates, for all codes x, y"""
    if params.size > BALL_MATRIX_LIMIT:
        raise OverflowError(f"{params} has more than {BALL_MATRIX_LIMIT} points for a ball matrix")
    pts = decode_array(params, np.arange(params.size, dtype=np.int64))
    return (pts[:, None, :] == pts[None, :, :]).sum(axis=2) >= M


def verify_conjecture(t: int, n: int, k: int, M: int, f: ConcaveTable|str,
                      budget: int = ENUMERATION_BUDGET, jobs: int = 1) -> ConjectureReport:
    """
    Brute force the box conjecture: is E f(|B_M(x) & S|) over |S| = k^n
    minimised by S = [k]^n?  Subsets are split by rank range over `jobs`
    worker processes; the result does not depend on `jobs`.
    """
    params = GridParams(t, n)
    if not 1 <= int(k) <= params.t:
        raise ValueError(f"box side k={k} outside 1..{params.t}")
    if not 0 <= int(M) <= params.n:
        raise ValueError(f"match threshold M={M} outside 0..{params.n}")
    N = params.size
    s = int(k) ** params.n
    count = comb(N, s)
    if count > budget:
        raise BudgetExceeded(count, budget)
    if isinstance(f, str):
        f = ConcaveTable.from_name(f, s)
    f = f.resized(s)
    exact = f.integral
    table = f.int_array(s) if exact else f.float_array(s)
    slack = 0.0 if exact else FLOAT_SLACK * N

    balls = ball_matrix(params, M)
    box_idx = GridSet.box(params, [int(k)] * params.n).codes
    box_total = table[balls[:, box_idx].sum(axis=1)].sum().item()

    jobs = max(1, min(int(jobs), count))
    bounds = [count * j // jobs for j in range(jobs + 1)]
    chunks = [_ConjectureChunk(lo, hi, N, s, balls, table, box_total, slack)
              for lo, hi in zip(bounds, bounds[1:]) if hi > lo]
    logger.info(f"conjecture t={t} n={n} k={k} M={M} f={f.name}: {count} sets over {len(chunks)} chunks")
    if len(chunks) > 1:
        with Pool(len(chunks)) as pool:
            parts = pool.map(_scan, chunks)
    else:
        parts = [_scan(c) for c in chunks]
    result = _ChunkResult()
    for part in parts:
        result.merge(part)
    if result.checked != count:
        raise InvariantViolation(f"conjecture scan visited {result.checked} of {count} sets")

    def average(total):
        return Fraction(int(total), N) if exact else total / N

    def points(rank):
        return decode_array(params, np.array(unrank_combination(N, s, rank), dtype=np.int64)).tolist()

    report = ConjectureReport(
        params={'t': t, 'n': n, 'k': k, 'M': M, 'f': f.name},
        sets_checked=result.checked,
        verdict=result.violations == 0,
        min_value=average(result.best),
        box_value=average(box_total),
        argmin_set=points(result.best_rank),
        ties=result.ties,
        violations=result.violations,
        counterexamples=[{'set': points(rank), 'value': average(total)} for rank, total in result.counterexamples],
        exact=exact,
        slack=slack / N,
    )
    if not report.verdict:
        logger.warning(f"box is not minimal at t={t} n={n} k={k} M={M} f={f.name}: "
                       f"{report.min_value} < {report.box_value}")
    return report


def conjecture_configs(budget: int = ENUMERATION_BUDGET, t_max: int = 4,
                       n_max: int = 3) -> list[tuple[int, int, int, int]]:
    """Every (t, n, k, M) with 1 <= k < t, 1 <= M < n whose enumeration fits the budget."""
    out = []
    for n in range(2, n_max + 1):
        for t in range(2, t_max + 1):
            if t ** n > BALL_MATRIX_LIMIT:
                continue
            for k in range(1, t):
                if comb(t ** n, k ** n) > budget:
                    continue
                out.extend((t, n, k, M) for M in range(1, n))
    return out


def conjecture_suite(budget: int = ENUMERATION_BUDGET, tables: Sequence[str] = ("counting", "log"),
                     t_max: int = 4, n_max: int = 3, jobs: int = 1) -> list[ConjectureReport]:
    return [verify_conjecture(t, n, k, M, name, budget, jobs)
            for t, n, k, M in conjecture_configs(budget, t_max, n_max)
            for name in tables]

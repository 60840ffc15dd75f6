"""
The exists-equal embedding process.

A small instance u, v in [t']^n' is blown up to X, Y in [t]^n: each side
repeats its input m times, the n/(5R) resulting coordinates go through
independent uniform maps [t'] -> [t] from the shared randomness and are placed
on the coordinates I by a uniform injection, and the rest of X and Y is filled
uniformly and independently.  Alice then replaces X by X', a uniform member of
N_X = {z in T : Match(X_I, z_I) >= M}, or by the sentinel when N_X is empty.

T is the box with side k on I and {1} elsewhere, which is its own down-shift,
so the construction needs no materialised T at scale.
"""
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from importlib import resources
from math import comb, sqrt
from multiprocessing import Pool
from pathlib import Path
from typing import Self
import json
import logging

import numpy as np
from scipy import stats

from .channel import InvariantViolation, SharedRandomness, trial_seed, wilson_interval
from .downshift.pipeline import box_ball_count
from .grid import GridParams, GridPoint, GridSet, as_point
from .resources import ResourceBase, SCHEMA_VERSION

logger = logging.getLogger(__name__)

DESK_PRESET = "embedding_desk.json"
# constants of the error lemma
MATCH0_BOUND = 0.77
MATCHR_BOUND = 0.80
# extra random bits when drawing below an exact integer total
_EXTRA_BITS = 64


class Sentinel():
    """X' when N_X is empty.  Compared as the fixed point (t,...,t), which lies off the box."""
    def __str__(self) -> str:
        return "x'_e"

    def __repr__(self) -> str:
        return f"{str(self.__class__)}:{str(self)}"

    def point(self, params: GridParams) -> GridPoint:
        return GridPoint((params.t,) * params.n)


SENTINEL = Sentinel()


@dataclass(frozen=True)
class EmbeddingParams():
    """
    n, t = 4n by default, match threshold M, planned match count R and box side.
    m = 2n/(MR), n' = M/10, t' = 4n' and |I| = n/5 must all come out integral.
    """
    n: int
    M: int
    R: int = 1
    side: int = 1
    t: int = 0

    def __post_init__(self) -> None:
        if not self.t:
            object.__setattr__(self, 't', 4 * self.n)
        if self.n < 3:
            raise ValueError(f"embedding needs n >= 3, got {self.n}")
        if self.M < 2:
            raise ValueError(f"embedding needs M >= 2, got {self.M}")
        if self.R < 1:
            raise ValueError(f"planned match count R must be at least 1, got {self.R}")
        if (2 * self.n) % (self.M * self.R):
            raise ValueError(f"m = 2n/(MR) = {2 * self.n}/{self.M * self.R} is not an integer")
        if self.M % 10:
            raise ValueError(f"n' = M/10 = {self.M}/10 is not an integer")
        if self.n % 5:
            raise ValueError(f"|I| = n/5 = {self.n}/5 is not an integer")
        if self.n % (5 * self.R):
            raise ValueError(f"n/(5R) = {self.n}/{5 * self.R} is not an integer")
        if self.m * self.R > self.I_size:
            raise ValueError(f"mR = {self.m * self.R} exceeds |I| = {self.I_size}")
        if not 1 <= self.side < self.t:
            raise ValueError(f"box side {self.side} outside 1..{self.t - 1}")

    def __str__(self) -> str:
        return (f"n={self.n} t={self.t} M={self.M} R={self.R} k={self.side} "
                f"m={self.m} n'={self.n_prime} t'={self.t_prime}")

    @property
    def m(self) -> int:
        return 2 * self.n // (self.M * self.R)

    @property
    def n_prime(self) -> int:
        return self.M // 10

    @property
    def t_prime(self) -> int:
        return 4 * self.n_prime

    @property
    def I_size(self) -> int:
        return self.n // 5

    @property
    def I(self) -> tuple[int, ...]:
        return tuple(range(1, self.I_size + 1))

    @property
    def embedded(self) -> int:
        """Length of the repeated small input, n/(5R)"""
        return self.m * self.n_prime

    @property
    def grid(self) -> GridParams:
        return GridParams(self.t, self.n)

    @property
    def small_grid(self) -> GridParams:
        return GridParams(self.t_prime, self.n_prime)

    @property
    def box(self) -> 'BoxT':
        return BoxT(self.I, self.side, self.n, self.t)

    @property
    def M_formula(self) -> float:
        """nk/(20t), the threshold the isoperimetry theorem pairs with this box side"""
        return self.n * self.side / (20 * self.t)

    @property
    def config(self) -> dict:
        return {'n': self.n, 't': self.t, 'M': self.M, 'R': self.R, 'side': self.side}

    def to_base(self) -> dict:
        return self.config | {'m': self.m, 'n_prime': self.n_prime, 't_prime': self.t_prime,
                              'I_size': self.I_size}

    @classmethod
    def from_dict(cls, data: dict) -> Self:
        known = {'n', 'M', 'R', 'side', 't'}
        extra = set(data) - known - {'m', 'n_prime', 't_prime', 'I_size'}
        if extra:
            raise ValueError(f"unknown embedding parameters: {sorted(extra)}")
        return cls(**{k: int(v) for k, v in data.items() if k in known})

    @classmethod
    def load(cls, path: str|Path) -> Self:
        with open(path) as f:
            return cls.from_dict(json.load(f))

    @classmethod
    def desk(cls) -> Self:
        """The packaged desk-scale preset"""
        text = resources.files("sparsedisj.presets").joinpath(DESK_PRESET).read_text()
        return cls.from_dict(json.loads(text))


@dataclass(frozen=True)
class BoxT():
    """The box with side `side` on the coordinates I and the value 1 elsewhere."""
    I: tuple[int, ...]
    side: int
    n: int
    t: int

    def __len__(self) -> int:
        return self.side ** len(self.I)

    def __contains__(self, z: GridPoint|tuple[int, ...]) -> bool:
        p = as_point(z)
        if p.n != self.n:
            return False
        inside = set(self.I)
        return all((c <= self.side) if i in inside else (c == 1) for i, c in enumerate(p, start=1))

    def h(self, x: GridPoint|np.ndarray) -> int:
        """Coordinates of I where x lies inside [side]"""
        arr = np.asarray(as_point(x).coords if not isinstance(x, np.ndarray) else x)
        return int((arr[np.array(self.I) - 1] <= self.side).sum())

    def count_nx(self, x: GridPoint|np.ndarray, M: int) -> int:
        """|N_x| = sum_{j=M}^{h} C(h,j) (side-1)^(h-j) side^(|I|-h)"""
        return box_ball_count(self.h(x), len(self.I), self.side, int(M))

    def to_gridset(self) -> GridSet:
        inside = set(self.I)
        return GridSet.box(GridParams(self.t, self.n),
                           [self.side if i in inside else 1 for i in range(1, self.n + 1)])


@lru_cache(maxsize=1024)
def _match_weights(h: int, side: int, M: int) -> tuple[int, ...]:
    """Cumulative C(h,j) (side-1)^(h-j) for j = M..h"""
    total = 0
    out = []
    for j in range(M, h + 1):
        total += comb(h, j) * (side - 1) ** (h - j)
        out.append(total)
    return tuple(out)


def _draw_below(total: int, rng: np.random.Generator) -> int:
    """Integer in [0, total), bias below 2^-64"""
    nbytes = (total.bit_length() + _EXTRA_BITS + 7) // 8
    return int.from_bytes(rng.bytes(nbytes), 'little') % total


def _sample_nx_array(x: np.ndarray, box: BoxT, M: int, rng: np.random.Generator) -> np.ndarray|None:
    idx = np.array(box.I, dtype=np.int64) - 1
    xi = x[idx]
    inside = idx[xi <= box.side]
    outside = idx[xi > box.side]
    h = inside.size
    if h < M:
        return None
    cumulative = _match_weights(h, box.side, int(M))
    r = _draw_below(cumulative[-1], rng)
    j = M + next(i for i, c in enumerate(cumulative) if c > r)
    z = np.ones(box.n, dtype=np.int64)
    agree = rng.choice(inside, size=j, replace=False) if j else np.empty(0, dtype=np.int64)
    z[agree] = x[agree]
    differ = np.setdiff1d(inside, agree)
    if differ.size:
        v = rng.integers(1, box.side, size=differ.size)
        z[differ] = v + (v >= x[differ])
    if outside.size:
        z[outside] = rng.integers(1, box.side + 1, size=outside.size)
    return z


def sample_Nx_box(x: GridPoint, box: BoxT, M: int, rng: np.random.Generator) -> GridPoint|Sentinel:
    """
    A uniform member of N_x for the box T, or SENTINEL when h(x) < M.
    Draws the match count j with weight C(h,j)(side-1)^(h-j) from exact
    integer weights, then the j agreeing coordinates among the h inside ones,
    then values different from x on the rest of them, then anything in
    [side] on the coordinates of I where x lies outside the box.
    """
    z = _sample_nx_array(np.asarray(as_point(x).coords, dtype=np.int64), box, M, rng)
    return SENTINEL if z is None else GridPoint(tuple(z.tolist()))


def sample_Nx_scan(x: GridPoint, T: GridSet, I: tuple[int, ...], M: int,
                   rng: np.random.Generator) -> GridPoint|Sentinel:
    """Uniform member of N_x found by scanning an explicit T."""
    p = as_point(x)
    idx = np.array(T.params.check_subset(I), dtype=np.int64) - 1
    if not len(T):
        return SENTINEL
    matches = (T.array[:, idx] == np.asarray(p.coords)[idx]).sum(axis=1)
    members = np.flatnonzero(matches >= M)
    if not members.size:
        return SENTINEL
    row = T.array[members[rng.integers(members.size)]]
    return GridPoint(tuple(row.tolist()))


def nx_scan_count(x: GridPoint, T: GridSet, I: tuple[int, ...], M: int) -> int:
    idx = np.array(T.params.check_subset(I), dtype=np.int64) - 1
    if not len(T):
        return 0
    return int(((T.array[:, idx] == np.asarray(as_point(x).coords)[idx]).sum(axis=1) >= M).sum())


def _check_small(params: EmbeddingParams, w: GridPoint) -> np.ndarray:
    p = as_point(w)
    if not p.valid(params.small_grid):
        raise ValueError(f"{p} is not a point of {params.small_grid}")
    return np.asarray(p.coords, dtype=np.int64)


def _build_xy_array(u: np.ndarray, v: np.ndarray, params: EmbeddingParams,
                    rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    L = params.embedded
    rep_u = np.tile(u, params.m) - 1
    rep_v = np.tile(v, params.m) - 1
    maps = rng.integers(1, params.t + 1, size=(L, params.t_prime))
    pi = rng.choice(np.array(params.I, dtype=np.int64) - 1, size=L, replace=False)
    X = rng.integers(1, params.t + 1, size=params.n)
    Y = rng.integers(1, params.t + 1, size=params.n)
    rows = np.arange(L)
    X[pi] = maps[rows, rep_u]
    Y[pi] = maps[rows, rep_v]
    return X, Y


def build_XY(u: GridPoint, v: GridPoint, params: EmbeddingParams,
             rng: np.random.Generator) -> tuple[GridPoint, GridPoint]:
    """
    Embed u, v in [t']^n' into X, Y in [t]^n.  Every agreement of u and v
    becomes m agreements of X and Y inside I, which is checked on every call.
    """
    ua, va = _check_small(params, u), _check_small(params, v)
    X, Y = _build_xy_array(ua, va, params, rng)
    _check_forced(X, Y, ua, va, params)
    return GridPoint(tuple(X.tolist())), GridPoint(tuple(Y.tolist()))


def _check_forced(X: np.ndarray, Y: np.ndarray, u: np.ndarray, v: np.ndarray,
                  params: EmbeddingParams) -> None:
    idx = np.array(params.I, dtype=np.int64) - 1
    got = int((X[idx] == Y[idx]).sum())
    need = params.m * int((u == v).sum())
    if got < need:
        raise InvariantViolation(f"Match(X_I, Y_I) = {got} < m Match(u, v) = {need}")


def small_pair(params: EmbeddingParams, matches: int, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    """u uniform in [t']^n', v agreeing with it on exactly `matches` random coordinates."""
    nprime, tprime = params.n_prime, params.t_prime
    if not 0 <= matches <= nprime:
        raise ValueError(f"match count {matches} outside 0..{nprime}")
    u = rng.integers(1, tprime + 1, size=nprime)
    shift = rng.integers(1, tprime, size=nprime)
    v = (u - 1 + shift) % tprime + 1
    same = rng.choice(nprime, size=matches, replace=False)
    v[same] = u[same]
    return u, v


def _ee(a: np.ndarray, b: np.ndarray) -> int:
    return 1 if (a == b).any() else 0


@dataclass
class LemmaErrorReport(ResourceBase):
    case: str
    params: EmbeddingParams
    trials: int
    seed: int
    successes: int
    sentinels: int
    bypass: bool
    estimate: float
    ci95: tuple[float, float]
    lemma_bound: float
    verdict: bool
    exact: float|None = None
    exact_within_3sigma: bool|None = None
    schema_version: int = SCHEMA_VERSION

    def __bool__(self) -> bool:
        return self.verdict


@dataclass
class _LemmaRange():
    params: EmbeddingParams
    case: str
    seed: int
    start: int
    stop: int
    bypass: bool


def _lemma_range(work: _LemmaRange) -> tuple[int, int]:
    params = work.params
    box = params.box
    sentinel = np.full(params.n, params.t, dtype=np.int64)
    matches = 0 if work.case == "match0" else params.R
    want = 0 if work.case == "match0" else 1
    hits = sentinels = 0
    for i in range(work.start, work.stop):
        rng = SharedRandomness(trial_seed(work.seed, i)).stream("embedding")
        u, v = small_pair(params, matches, rng)
        X, Y = _build_xy_array(u, v, params, rng)
        _check_forced(X, Y, u, v, params)
        if work.bypass:
            Xp = X
        else:
            Xp = _sample_nx_array(X, box, params.M, rng)
            if Xp is None:
                sentinels += 1
                Xp = sentinel
        hits += _ee(Xp, Y) == want
    return hits, sentinels


def _split(trials: int, jobs: int) -> list[tuple[int, int]]:
    jobs = max(1, min(int(jobs), trials)) if trials else 1
    bounds = [trials * j // jobs for j in range(jobs + 1)]
    return [(lo, hi) for lo, hi in zip(bounds, bounds[1:]) if hi > lo]


def estimate_lemma_error(params: EmbeddingParams, case: str, trials: int, seed: int,
                         jobs: int = 1, bypass: bool = False) -> LemmaErrorReport:
    """
    Monte Carlo of Pr[EE(X',Y)=0] for Match(u,v)=0 ("match0") or
    Pr[EE(X',Y)=1] for Match(u,v)=R ("matchR").  The verdict compares the
    estimate with the lemma's constant less the half width of the 95% interval.
    bypass uses X in place of X'.
    """
    if case not in ("match0", "matchR"):
        raise ValueError(f"unknown lemma case: {case}")
    trials = int(trials)
    work = [_LemmaRange(params, case, seed, lo, hi, bypass) for lo, hi in _split(trials, jobs)]
    if len(work) > 1:
        with Pool(len(work)) as pool:
            parts = pool.map(_lemma_range, work)
    else:
        parts = [_lemma_range(w) for w in work]
    hits = sum(p[0] for p in parts)
    sentinels = sum(p[1] for p in parts)
    estimate = hits / trials if trials else 0.0
    ci = wilson_interval(hits, trials)
    bound = MATCH0_BOUND if case == "match0" else MATCHR_BOUND
    half = (ci[1] - ci[0]) / 2
    report = LemmaErrorReport(case=case, params=params, trials=trials, seed=seed, successes=hits,
                              sentinels=sentinels, bypass=bypass, estimate=estimate, ci95=ci,
                              lemma_bound=bound, verdict=estimate >= bound - half)
    if case == "match0":
        exact = float(Fraction(params.t - 1, params.t) ** params.n)
        sigma = sqrt(exact * (1 - exact) / trials) if trials else 0.0
        report.update_fields(exact=exact, exact_within_3sigma=abs(estimate - exact) <= 3 * sigma)
    logger.info(f"lemma {case} {params}: {hits}/{trials} = {estimate:.4f} ({sentinels} sentinels)")
    if not report.verdict:
        logger.warning(f"lemma {case} estimate {estimate:.4f} below {bound}")
    return report


@dataclass
class EmptyRateReport(ResourceBase):
    params: EmbeddingParams
    trials: int
    seed: int
    empty: int
    estimate: float
    ci95: tuple[float, float]
    exact: float
    bound: float
    verdict: bool
    schema_version: int = SCHEMA_VERSION

    def __bool__(self) -> bool:
        return self.verdict


def estimate_empty_rate(params: EmbeddingParams, trials: int, seed: int,
                        chunk: int = 10 ** 4) -> EmptyRateReport:
    """
    Pr[N_X empty] for uniform X, beside the exact Pr[Bin(|I|, k/t) < M] and the
    5^-M bound.  Only the I coordinates are drawn, `chunk` trials per stream.
    """
    trials = int(trials)
    shared = SharedRandomness(seed)
    empty = 0
    for c, lo in enumerate(range(0, trials, chunk)):
        size = min(chunk, trials - lo)
        rng = shared.stream("empty-rate", c)
        xi = rng.integers(1, params.t + 1, size=(size, params.I_size))
        empty += int(((xi <= params.side).sum(axis=1) < params.M).sum())
    exact = float(stats.binom.cdf(params.M - 1, params.I_size, params.side / params.t))
    bound = 5.0 ** -params.M
    ci = wilson_interval(empty, trials)
    estimate = empty / trials if trials else 0.0
    half = (ci[1] - ci[0]) / 2
    return EmptyRateReport(params=params, trials=trials, seed=seed, empty=empty, estimate=estimate,
                           ci95=ci, exact=exact, bound=bound, verdict=estimate <= bound + half)


@dataclass
class UniformityReport(ResourceBase):
    coordinate: int
    trials: int
    statistic: float
    dof: int
    pvalue: float
    critical: float
    verdict: bool


def marginal_uniformity(params: EmbeddingParams, case: str, trials: int, seed: int,
                        coordinate: int = 1, alpha: float = 0.001) -> UniformityReport:
    """
    Chi-square test that coordinate `coordinate` of X is uniform on [t]
    when (u, v) is drawn as in the given lemma case.
    """
    params.grid.check_coordinate(coordinate)
    matches = 0 if case == "match0" else params.R
    counts = np.zeros(params.t, dtype=np.int64)
    for i in range(int(trials)):
        rng = SharedRandomness(trial_seed(seed, i)).stream("embedding")
        u, v = small_pair(params, matches, rng)
        X, _ = _build_xy_array(u, v, params, rng)
        counts[X[coordinate - 1] - 1] += 1
    res = stats.chisquare(counts)
    critical = float(stats.chi2.ppf(1 - alpha, params.t - 1))
    return UniformityReport(coordinate=coordinate, trials=int(trials), statistic=float(res.statistic),
                            dof=params.t - 1, pvalue=float(res.pvalue), critical=critical,
                            verdict=float(res.statistic) <= critical)

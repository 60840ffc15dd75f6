from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable
import logging

import numpy as np

from ..grid import GridSet, decode_array
from ..resources import ResourceBase
from . import EXHAUSTIVE_LIMIT, MC_SAMPLES
from .concave import ConcaveTable

logger = logging.getLogger(__name__)

# rows * |S| * |I| elements compared per chunk
_CHUNK_ELEMENTS = 2 ** 23


@dataclass
class PerimeterValue(ResourceBase):
    """
    E_x[f(|B_{I,M}(x) & S|)].  Exact values are Fractions with stderr 0,
    Monte Carlo values are floats with the standard error of the mean.
    """
    value: Fraction|float
    exact: bool
    stderr: float = 0.0
    samples: int = 0

    def __float__(self) -> float:
        return float(self.value)

    def __str__(self) -> str:
        if self.exact:
            return f"{self.value}"
        return f"{float(self.value):.6g}+-{self.stderr:.2g}"

    def to_base(self) -> dict:
        b = super().to_base()
        b['float'] = float(self.value)
        return b


def intersection_sizes(S: GridSet, xs: np.ndarray, I: Iterable[int]|None, M: int) -> np.ndarray:
    """
    |B_{I,M}(x) & S| for every row x of xs (an (N, n) array of coordinates).
    """
    params = S.params
    idx = np.array(params.check_subset(I), dtype=np.int64) - 1
    if not 0 <= int(M) <= idx.size:
        raise ValueError(f"match threshold M={M} outside 0..{idx.size}")
    xs = np.asarray(xs, dtype=np.int64).reshape(-1, params.n)
    if not len(S):
        return np.zeros(xs.shape[0], dtype=np.int64)
    s = S.array[:, idx]
    rows = max(1, _CHUNK_ELEMENTS // max(1, s.shape[0] * idx.size))
    out = np.empty(xs.shape[0], dtype=np.int64)
    for start in range(0, xs.shape[0], rows):
        chunk = xs[start:start + rows][:, idx]
        matches = (chunk[:, None, :] == s[None, :, :]).sum(axis=2)
        out[start:start + rows] = (matches >= M).sum(axis=1)
    return out


def all_intersection_sizes(S: GridSet, I: Iterable[int]|None, M: int) -> np.ndarray:
    """intersection_sizes() over the whole grid, in code order"""
    size = S.params.size
    step = 2 ** 16
    return np.concatenate([
        intersection_sizes(S, decode_array(S.params, np.arange(lo, min(lo + step, size), dtype=np.int64)), I, M)
        for lo in range(0, size, step)
    ])


def exact_average(f: ConcaveTable, sizes: np.ndarray, total: int) -> Fraction:
    """sum f(size) / total, exactly"""
    hist = np.bincount(sizes)
    return sum((int(c) * f(l) for l, c in enumerate(hist.tolist()) if c), Fraction(0)) / total


def perimeter(S: GridSet, f: ConcaveTable, I: Iterable[int]|None = None, M: int = 1,
              mode: str = "auto", samples: int = MC_SAMPLES,
              rng: np.random.Generator|None = None) -> PerimeterValue:
    """
    Generalized perimeter E_{x~mu}[f(|B_{I,M}(x) & S|)].

    mode "auto" is exhaustive while t^n <= EXHAUSTIVE_LIMIT and Monte Carlo
    above it; "exhaustive" raises OverflowError above the limit.  Monte Carlo
    uses `rng`, or a generator seeded with 0 so results are reproducible.
    """
    params = S.params
    idx = params.check_subset(I)
    if not 0 <= int(M) <= len(idx):
        raise ValueError(f"match threshold M={M} outside 0..|I|={len(idx)}")
    f = f.resized(len(S))
    if not len(S):
        return PerimeterValue(f(0), True)
    size = params.size
    match mode:
        case "auto":
            exhaustive = size <= EXHAUSTIVE_LIMIT
        case "exhaustive":
            if size > EXHAUSTIVE_LIMIT:
                raise OverflowError(f"{params} has {size} points, above the exhaustive limit {EXHAUSTIVE_LIMIT}")
            exhaustive = True
        case "montecarlo":
            exhaustive = False
        case _:
            raise ValueError(f"unknown perimeter mode: {mode}")

    if exhaustive:
        sizes = all_intersection_sizes(S, idx, M)
        return PerimeterValue(exact_average(f, sizes, size), True, 0.0, size)

    if rng is None:
        rng = np.random.default_rng(0)
    logger.debug(f"perimeter of {len(S)} points in {params}: Monte Carlo with {samples} samples")
    xs = rng.integers(1, params.t + 1, size=(samples, params.n))
    sizes = intersection_sizes(S, xs, idx, M)
    vals = f.float_array(int(sizes.max()))[sizes]
    stderr = float(vals.std(ddof=1) / np.sqrt(samples)) if samples > 1 else float('inf')
    return PerimeterValue(float(vals.mean()), False, stderr, samples)

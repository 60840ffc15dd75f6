from dataclasses import dataclass
from typing import Iterator, Self

import numpy as np


@dataclass(frozen=True)
class KSet():
    """
    A subset of the universe [m], kept as a sorted tuple of distinct elements.
    The size bound k belongs to the protocol, see check().
    """
    m: int
    elements: tuple[int, ...] = ()

    def __post_init__(self) -> None:
        m = int(self.m)
        if m < 1:
            raise ValueError(f"universe size must be positive: m={self.m}")
        elems = tuple(sorted(set(int(e) for e in self.elements)))
        if elems and (elems[0] < 1 or elems[-1] > m):
            raise ValueError(f"elements must lie in 1..{m}: {elems[0]}..{elems[-1]}")
        object.__setattr__(self, 'm', m)
        object.__setattr__(self, 'elements', elems)

    @classmethod
    def from_array(cls, m: int, arr: np.ndarray) -> Self:
        return cls(m, tuple(np.asarray(arr, dtype=np.int64).tolist()))

    def __len__(self) -> int:
        return len(self.elements)

    def __iter__(self) -> Iterator[int]:
        return iter(self.elements)

    def __contains__(self, e: int) -> bool:
        return int(e) in set(self.elements)

    def __bool__(self) -> bool:
        return bool(self.elements)

    def __and__(self, other: Self) -> Self:
        self._check_same(other)
        return KSet(self.m, tuple(np.intersect1d(self.array, other.array).tolist()))

    def __or__(self, other: Self) -> Self:
        self._check_same(other)
        return KSet(self.m, self.elements + other.elements)

    def __sub__(self, other: Self) -> Self:
        self._check_same(other)
        return KSet(self.m, tuple(np.setdiff1d(self.array, other.array).tolist()))

    def __str__(self) -> str:
        body = ",".join(map(str, self.elements)) if len(self) <= 16 else f"{len(self)} elements"
        return f"{{{body}}}/[{self.m}]"

    def __repr__(self) -> str:
        return f"{str(self.__class__)}:{str(self)}"

    def _check_same(self, other: Self) -> None:
        if self.m != other.m:
            raise ValueError(f"universe mismatch: {self.m} vs {other.m}")

    @property
    def array(self) -> np.ndarray:
        return np.array(self.elements, dtype=np.int64)

    def issubset(self, other: Self) -> bool:
        return set(self.elements) <= set(other.elements)

    def isdisjoint(self, other: Self) -> bool:
        return not (set(self.elements) & set(other.elements))

    def check(self, k: int) -> None:
        if len(self) > k:
            raise ValueError(f"set of size {len(self)} exceeds the bound k={k}")

    def to_base(self) -> dict:
        return {'m': self.m, 'elements': list(self.elements)}


def _check_pair(m: int, k: int, distinct: int) -> None:
    if k < 0:
        raise ValueError(f"set size must be nonnegative: k={k}")
    if distinct > m:
        raise ValueError(f"universe [{m}] too small for {distinct} distinct elements")


def random_disjoint_pair(m: int, k: int, rng: np.random.Generator) -> tuple[KSet, KSet]:
    """Two disjoint k-subsets of [m], uniformly at random."""
    _check_pair(m, k, 2 * k)
    draw = rng.choice(m, size=2 * k, replace=False) + 1
    return KSet.from_array(m, draw[:k]), KSet.from_array(m, draw[k:])


def random_intersecting_pair(m: int, k: int, rng: np.random.Generator,
                             overlap: int = 1) -> tuple[KSet, KSet]:
    """Two k-subsets of [m] sharing exactly `overlap` elements."""
    if not 1 <= overlap <= k:
        raise ValueError(f"overlap must lie in 1..{k}: {overlap}")
    _check_pair(m, k, 2 * k - overlap)
    draw = rng.choice(m, size=2 * k - overlap, replace=False) + 1
    return KSet.from_array(m, draw[:k]), KSet.from_array(m, draw[k - overlap:])


@dataclass(frozen=True)
class DisjointPairs():
    """Picklable input factory for run_trials()."""
    m: int
    k: int

    def __call__(self, rng: np.random.Generator) -> tuple[KSet, KSet]:
        return random_disjoint_pair(self.m, self.k, rng)


@dataclass(frozen=True)
class IntersectingPairs():
    m: int
    k: int
    overlap: int = 1

    def __call__(self, rng: np.random.Generator) -> tuple[KSet, KSet]:
        return random_intersecting_pair(self.m, self.k, rng, self.overlap)


def input_factory(kind: str, m: int, k: int) -> DisjointPairs|IntersectingPairs:
    match kind:
        case "disjoint":
            return DisjointPairs(m, k)
        case "intersecting":
            return IntersectingPairs(m, k)
    raise ValueError(f"unknown input kind: {kind}")

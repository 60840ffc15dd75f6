"""
Points and subsets of the grid [t]^n.

Coordinates are 1-based, as are coordinate indices handed to the public
functions (so coordinate subsets I are subsets of 1..n).  Codecs map a point
to the mixed-radix integer with coordinate 1 most significant, subtracting 1
from every digit, so (1,...,1) is code 0 and codes sort lexicographically.

GridSet keeps a sorted numpy array of codes.  That is the representation the
exhaustive verifiers work on; bitmap() gives O(1) membership when t^n is
small enough.
"""
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from itertools import combinations, product
from math import ceil, comb, log2
from typing import Iterable, Iterator, Self, Sequence

import numpy as np

# codes are held in int64, keep a bit of headroom
MAX_CODE_BITS = 62
# largest t^n for which a membership bitmap is materialised
BITMAP_LIMIT = 2 ** 24


@dataclass(frozen=True)
class GridParams():
    """Side length t and dimension n of the grid [t]^n."""
    t: int
    n: int

    def __post_init__(self) -> None:
        object.__setattr__(self, 't', int(self.t))
        object.__setattr__(self, 'n', int(self.n))
        if self.t < 1:
            raise ValueError(f"grid side length must be positive: t={self.t}")
        if self.n < 1:
            raise ValueError(f"grid dimension must be positive: n={self.n}")

    def __str__(self) -> str:
        return f"[{self.t}]^{self.n}"

    @classmethod
    def exists_equal(cls, n: int) -> Self:
        """The default exists-equal grid, t = 4n."""
        return cls(4 * int(n), n)

    @property
    def size(self) -> int:
        """t^n as an exact integer"""
        return self.t ** self.n

    @property
    def code_bits(self) -> int:
        return self.n * ceil(log2(self.t)) if self.t > 1 else 0

    @property
    def codable(self) -> bool:
        """Can every point be held as an int64 code?"""
        return self.code_bits <= MAX_CODE_BITS

    def check_codable(self) -> None:
        if not self.codable:
            raise OverflowError(f"{self}: n*ceil(log2 t)={self.code_bits} exceeds {MAX_CODE_BITS} bits")

    @cached_property
    def weights(self) -> np.ndarray:
        """Mixed-radix digit weights, coordinate 1 first."""
        self.check_codable()
        return np.array([self.t ** (self.n - 1 - j) for j in range(self.n)], dtype=np.int64)

    def coordinate_weight(self, i: int) -> int:
        """Code increment of coordinate i (1-based)."""
        self.check_coordinate(i)
        return self.t ** (self.n - i)

    def check_coordinate(self, i: int) -> None:
        if not 1 <= int(i) <= self.n:
            raise ValueError(f"coordinate {i} outside 1..{self.n}")

    def check_subset(self, I: Iterable[int]|None) -> tuple[int, ...]:
        """
        Normalise a coordinate subset to a sorted tuple, None meaning all of [n].
        """
        if I is None:
            return tuple(range(1, self.n + 1))
        idx = tuple(sorted(set(int(i) for i in I)))
        for i in idx:
            self.check_coordinate(i)
        return idx

    def contains(self, coords: Sequence[int]) -> bool:
        return len(coords) == self.n and all(1 <= int(c) <= self.t for c in coords)

    def to_base(self) -> dict:
        return {'t': self.t, 'n': self.n}


@dataclass(frozen=True, order=True)
class GridPoint():
    """
    A vector in [t]^n.  The point does not carry t, validity against a grid
    is checked by whoever brings the GridParams.
    """
    coords: tuple[int, ...]

    def __post_init__(self) -> None:
        c = tuple(int(v) for v in self.coords)
        if not c:
            raise ValueError("grid point needs at least one coordinate")
        if min(c) < 1:
            raise ValueError(f"grid coordinates are 1-based: {c}")
        object.__setattr__(self, 'coords', c)

    def __len__(self) -> int:
        return len(self.coords)

    def __iter__(self) -> Iterator[int]:
        return iter(self.coords)

    def __getitem__(self, index: int) -> int:
        return self.coords[index]

    def __str__(self) -> str:
        return "(" + ",".join(str(c) for c in self.coords) + ")"

    def __repr__(self) -> str:
        return f"{str(self.__class__)}:{str(self)}"

    @property
    def n(self) -> int:
        return len(self.coords)

    def coord(self, i: int) -> int:
        """1-based coordinate access, x_i"""
        return self.coords[i - 1]

    def project(self, I: Iterable[int]) -> tuple[int, ...]:
        """x_I for a 1-based coordinate subset"""
        return tuple(self.coords[i - 1] for i in I)

    def valid(self, params: GridParams) -> bool:
        return params.contains(self.coords)

    def check(self, params: GridParams) -> None:
        if not self.valid(params):
            raise ValueError(f"{self} is not a point of {params}")

    def to_base(self) -> list[int]:
        return list(self.coords)


def as_point(x: GridPoint|Sequence[int]) -> GridPoint:
    return x if isinstance(x, GridPoint) else GridPoint(tuple(x))


def match_count(x: GridPoint|Sequence[int], y: GridPoint|Sequence[int]) -> int:
    """Number of coordinates where x and y agree."""
    a = as_point(x)
    b = as_point(y)
    if len(a) != len(b):
        raise ValueError(f"dimension mismatch: {len(a)} vs {len(b)}")
    return sum(1 for u, v in zip(a, b) if u == v)


def hamming_distance(x: GridPoint|Sequence[int], y: GridPoint|Sequence[int]) -> int:
    return len(as_point(x)) - match_count(x, y)


def exists_equal(x: GridPoint|Sequence[int], y: GridPoint|Sequence[int]) -> int:
    """The exists-equal game value: 1 iff some coordinate agrees."""
    return 1 if match_count(x, y) > 0 else 0


def _check_threshold(I: tuple[int, ...], M: int) -> None:
    if not 0 <= int(M) <= len(I):
        raise ValueError(f"match threshold M={M} outside 0..|I|={len(I)}")


def ball_count(params: GridParams, I: Iterable[int]|None, M: int) -> int:
    """
    |B_{I,M}(x)|, which does not depend on x:
    sum_{j=M}^{|I|} C(|I|,j) (t-1)^(|I|-j) t^(n-|I|)
    """
    idx = params.check_subset(I)
    _check_threshold(idx, M)
    s = len(idx)
    free = params.t ** (params.n - s)
    return sum(comb(s, j) * (params.t - 1) ** (s - j) for j in range(int(M), s + 1)) * free


def ball_members(params: GridParams, x: GridPoint|Sequence[int],
                 I: Iterable[int]|None, M: int) -> Iterator[GridPoint]:
    """
    Stream B_{I,M}(x) = {y : Match(x_I, y_I) >= M}.
    Walks match patterns (which coordinates of I agree, then the values of the
    disagreeing ones) instead of scanning all t^n points.  Every member is
    produced exactly once since the agreeing set J is determined by y.
    """
    p = as_point(x)
    p.check(params)
    idx = params.check_subset(I)
    _check_threshold(idx, M)
    rest = [j for j in range(1, params.n + 1) if j not in idx]
    values = range(1, params.t + 1)
    for j in range(int(M), len(idx) + 1):
        for agree in combinations(idx, j):
            miss = [i for i in idx if i not in agree]
            alternatives = [[v for v in values if v != p.coord(i)] for i in miss]
            for other in product(*alternatives):
                for free in product(values, repeat=len(rest)):
                    coords = list(p.coords)
                    for i, v in zip(miss, other):
                        coords[i - 1] = v
                    for i, v in zip(rest, free):
                        coords[i - 1] = v
                    yield GridPoint(tuple(coords))


def encode(params: GridParams, x: GridPoint|Sequence[int]) -> int:
    """Mixed-radix code of x, coordinate 1 most significant."""
    params.check_codable()
    p = as_point(x)
    p.check(params)
    code = 0
    for c in p:
        code = code * params.t + (c - 1)
    return code


def decode(params: GridParams, code: int) -> GridPoint:
    params.check_codable()
    c = int(code)
    if not 0 <= c < params.size:
        raise ValueError(f"code {code} outside [0, {params.size})")
    digits = []
    for _ in range(params.n):
        c, d = divmod(c, params.t)
        digits.append(d + 1)
    return GridPoint(tuple(reversed(digits)))


def encode_array(params: GridParams, points: np.ndarray) -> np.ndarray:
    """Vectorised encode of an (N, n) array of 1-based coordinates."""
    arr = np.asarray(points, dtype=np.int64).reshape(-1, params.n)
    return (arr - 1) @ params.weights


def decode_array(params: GridParams, codes: np.ndarray) -> np.ndarray:
    """Vectorised decode to an (N, n) int64 array of 1-based coordinates."""
    params.check_codable()
    c = np.asarray(codes, dtype=np.int64).copy()
    out = np.empty((c.shape[0], params.n), dtype=np.int64)
    for j in range(params.n - 1, -1, -1):
        c, out[:, j] = np.divmod(c, params.t)
    return out + 1


def uniform_point(params: GridParams, rng: np.random.Generator) -> GridPoint:
    """A uniform draw from [t]^n, deterministic given the generator state."""
    return GridPoint(tuple(rng.integers(1, params.t + 1, size=params.n).tolist()))


class GridSet():
    """
    A finite subset of [t]^n held as a sorted, duplicate free array of point codes.
    Instances are treated as immutable values: every operation returns a new set.
    """
    def __init__(self, params: GridParams, codes: Iterable[int]|np.ndarray = ()) -> None:
        params.check_codable()
        self._params = params
        c = np.unique(np.asarray(list(codes) if not isinstance(codes, np.ndarray) else codes,
                                 dtype=np.int64))
        if c.size and (c[0] < 0 or c[-1] >= params.size):
            raise ValueError(f"point codes outside [0, {params.size}) for {params}")
        c.setflags(write=False)
        self._codes = c
        self._array = None

    @classmethod
    def from_points(cls, params: GridParams, points: Iterable[GridPoint|Sequence[int]]) -> Self:
        return cls(params, [encode(params, p) for p in points])

    @classmethod
    def from_array(cls, params: GridParams, points: np.ndarray) -> Self:
        arr = np.asarray(points, dtype=np.int64).reshape(-1, params.n)
        if arr.size and (arr.min() < 1 or arr.max() > params.t):
            raise ValueError(f"coordinates outside 1..{params.t}")
        return cls(params, encode_array(params, arr))

    @classmethod
    def empty(cls, params: GridParams) -> Self:
        return cls(params)

    @classmethod
    def full(cls, params: GridParams) -> Self:
        return cls(params, np.arange(params.size, dtype=np.int64))

    @classmethod
    def box(cls, params: GridParams, sides: Sequence[int]) -> Self:
        """The product set [s_1] x ... x [s_n]."""
        if len(sides) != params.n:
            raise ValueError(f"box needs {params.n} sides, got {len(sides)}")
        if any(not 1 <= int(s) <= params.t for s in sides):
            raise ValueError(f"box sides must lie in 1..{params.t}: {tuple(sides)}")
        axes = [np.arange(1, int(s) + 1, dtype=np.int64) for s in sides]
        mesh = np.stack(np.meshgrid(*axes, indexing='ij'), axis=-1).reshape(-1, params.n)
        return cls.from_array(params, mesh)

    @classmethod
    def random(cls, params: GridParams, rng: np.random.Generator, density: float = 0.5) -> Self:
        """Each point of the grid kept independently with the given probability."""
        keep = rng.random(params.size) < density
        return cls(params, np.flatnonzero(keep))

    @classmethod
    def all_subsets(cls, params: GridParams) -> Iterator[Self]:
        """All 2^(t^n) subsets, by bitmask order."""
        size = params.size
        for mask in range(1 << size):
            yield cls(params, [c for c in range(size) if mask >> c & 1])

    @classmethod
    def from_base(cls, params: GridParams, data: Iterable[Sequence[int]]) -> Self:
        return cls.from_points(params, data)

    def __len__(self) -> int:
        return int(self._codes.size)

    def __iter__(self) -> Iterator[GridPoint]:
        for row in self.array:
            yield GridPoint(tuple(row.tolist()))

    def __contains__(self, value: GridPoint|Sequence[int]) -> bool:
        p = as_point(value)
        if not p.valid(self._params):
            return False
        c = encode(self._params, p)
        i = np.searchsorted(self._codes, c)
        return bool(i < self._codes.size and self._codes[i] == c)

    def __eq__(self, value: object) -> bool:
        if not isinstance(value, GridSet):
            return NotImplemented
        return self._params == value._params and np.array_equal(self._codes, value._codes)

    def __hash__(self) -> int:
        return hash((self._params, self._codes.tobytes()))

    def __or__(self, other: Self) -> Self:
        self._check_same(other)
        return GridSet(self._params, np.union1d(self._codes, other._codes))

    def __and__(self, other: Self) -> Self:
        self._check_same(other)
        return GridSet(self._params, np.intersect1d(self._codes, other._codes))

    def __str__(self) -> str:
        pts = ",".join(str(p) for p in self) if len(self) <= 16 else f"{len(self)} points"
        return f"{self._params}{{{pts}}}"

    def __repr__(self) -> str:
        return f"{str(self.__class__)}:{str(self)}"

    def _check_same(self, other: Self) -> None:
        if self._params != other._params:
            raise ValueError(f"grid mismatch: {self._params} vs {other._params}")

    @property
    def params(self) -> GridParams:
        return self._params

    @property
    def codes(self) -> np.ndarray:
        """Sorted codes, read only"""
        return self._codes

    @property
    def array(self) -> np.ndarray:
        """Members as an (N, n) array of 1-based coordinates, in code order"""
        if self._array is None:
            self._array = decode_array(self._params, self._codes)
            self._array.setflags(write=False)
        return self._array

    @property
    def mu(self) -> Fraction:
        """Uniform measure |S| / t^n"""
        return Fraction(len(self), self._params.size)

    def issubset(self, other: Self) -> bool:
        self._check_same(other)
        return bool(np.isin(self._codes, other._codes).all())

    def bitmap(self) -> np.ndarray:
        """Boolean membership table over all t^n codes."""
        if self._params.size > BITMAP_LIMIT:
            raise OverflowError(f"{self._params} has more than {BITMAP_LIMIT} points for a bitmap")
        bm = np.zeros(self._params.size, dtype=bool)
        bm[self._codes] = True
        return bm

    def to_base(self) -> list[list[int]]:
        return self.array.tolist()

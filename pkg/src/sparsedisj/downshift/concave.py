from dataclasses import dataclass
from fractions import Fraction
import math
from typing import Self

import numpy as np

# log tables are stored as dyadic rationals with this denominator
LOG_DENOMINATOR = 2 ** 64
# longest log table we are willing to materialise
MAX_LOG_TABLE = 2 ** 22


@dataclass(frozen=True)
class ConcaveTable():
    """
    A concave function on the nonnegative integers given by f(0..L).
    Past L it continues affinely with the last slope, which keeps it concave.
    Construction rejects any table whose increments increase somewhere.
    """
    values: tuple[Fraction, ...]
    name: str = "custom"

    def __post_init__(self) -> None:
        vals = tuple(Fraction(v) for v in self.values)
        if not vals:
            raise ValueError("concave table needs at least f(0)")
        diffs = [b - a for a, b in zip(vals, vals[1:])]
        for l, (d0, d1) in enumerate(zip(diffs, diffs[1:]), start=1):
            if d1 > d0:
                raise ValueError(f"table {self.name} is not concave at l={l}: slope {d0} then {d1}")
        object.__setattr__(self, 'values', vals)

    def __len__(self) -> int:
        return len(self.values)

    def __call__(self, l: int) -> Fraction:
        l = int(l)
        if l < 0:
            raise ValueError(f"concave table evaluated at negative l={l}")
        L = len(self.values) - 1
        if l <= L:
            return self.values[l]
        slope = self.values[L] - self.values[L - 1] if L else Fraction(0)
        return self.values[L] + (l - L) * slope

    def __str__(self) -> str:
        return self.name

    def __repr__(self) -> str:
        return f"{str(self.__class__)}:{self.name}{list(map(str, self.values[:6]))}"

    @property
    def integral(self) -> bool:
        """All table entries are integers, so sums can be compared exactly in int64."""
        return all(v.denominator == 1 for v in self.values)

    def lookup(self, upto: int) -> list[Fraction]:
        """f(0..upto) including the affine tail"""
        return [self(l) for l in range(int(upto) + 1)]

    def int_array(self, upto: int) -> np.ndarray:
        if not self.integral:
            raise ValueError(f"table {self.name} is not integral")
        return np.array([int(v) for v in self.lookup(upto)], dtype=np.int64)

    def float_array(self, upto: int) -> np.ndarray:
        return np.array([float(v) for v in self.lookup(upto)], dtype=np.float64)

    def to_base(self) -> dict:
        return {'name': self.name, 'values': [str(v) for v in self.values]}

    @classmethod
    def counting(cls) -> Self:
        """f(0)=0, f(l)=1: the probability that the ball meets the set"""
        return cls((0, 1, 1), "counting")

    @classmethod
    def empty_indicator(cls) -> Self:
        """f(0)=-1, f(l)=0: minus the probability that the ball misses the set"""
        return cls((-1, 0, 0), "indicator")

    @classmethod
    def log2(cls, L: int) -> Self:
        """
        f(0)=-1, f(l)=log2(l) for 1 <= l <= L, each value rounded to the
        nearest multiple of 2^-64.  Exact powers of two stay exact.
        """
        L = max(int(L), 2)
        if L > MAX_LOG_TABLE:
            raise ValueError(f"log table length {L} exceeds {MAX_LOG_TABLE}")
        vals = [Fraction(-1)]
        for l in range(1, L + 1):
            if l & (l - 1) == 0:
                vals.append(Fraction(l.bit_length() - 1))
            else:
                vals.append(Fraction(round(math.log2(l) * LOG_DENOMINATOR), LOG_DENOMINATOR))
        return cls(tuple(vals), "log")

    @classmethod
    def from_name(cls, name: str, L: int = 2) -> Self:
        match name:
            case "counting":
                return cls.counting()
            case "indicator":
                return cls.empty_indicator()
            case "log":
                return cls.log2(L)
        raise ValueError(f"unknown concave table: {name}")

    @staticmethod
    def names() -> list[str]:
        return ["counting", "log", "indicator"]

    def resized(self, L: int) -> Self:
        """The same family with a table long enough for arguments up to L."""
        return self.log2(L) if self.name == "log" else self

"""
Round parameters of the r-round sparse disjointness protocol.

    u     = (c+1) log^(r) k
    p_i   = 1 / exp^(i) u                    1 <= i <= r
    l_1   = k 2^(ku)
    l_i   = k 2^(k / 2^(i-4))                2 <= i <= r
    k_0   = k_1 = k
    k_i   = k / (2^(i-4) exp^(i-1) u)        2 <= i <= r
    k_r+1 = 0

If some k_i < 4 sqrt(k), the first such round j is replaced by
k'_j = 4 sqrt(k), p'_j = 2^(-2 sqrt(k)), l'_j = k 2^(8k) and the protocol ends
after round j.

p_i is held as log2 p_i since it underflows a float from round 2 on; l_i is
held as an exact integer so a round-i message is l_i.bit_length() bits,
which is ceil(log2(l_i + 1)) with index 0 reserved for the error signal.
"""
from dataclasses import dataclass, field
from typing import Sequence
import math

from ..resources import ResourceBase
from .iterated import iterated_exp, iterated_log, log_star

DEFAULT_C = 2.0
# fractional powers of two are carried with this many mantissa bits
_MANTISSA_BITS = 52
# normalized_bits over k at fixed r stays within this factor
BITS_BAND = 2.0


def scaled_power(k: int, e: float) -> int:
    """floor(k * 2^e) as an integer, exact when e is an integer"""
    if e == int(e):
        e = int(e)
        return k << e if e >= 0 else k >> -e
    ei = math.floor(e)
    mant = math.floor(k * 2.0 ** (e - ei) * 2.0 ** _MANTISSA_BITS)
    shift = ei - _MANTISSA_BITS
    return mant << shift if shift >= 0 else mant >> -shift


@dataclass
class Schedule(ResourceBase):
    k: int
    r: int
    c: float
    u: float
    log2_p: list[float]
    l: list[int] = field(repr=False)
    kbound: list[float]
    adjusted_round: int|None = None
    adjusted_k: float|None = None
    adjusted_log2_p: float|None = None
    adjusted_l: int|None = field(default=None, repr=False)

    @classmethod
    def compute(cls, k: int, r: int, c: float = DEFAULT_C) -> 'Schedule':
        k = int(k)
        r = int(r)
        if k < 4:
            raise ValueError(f"schedule needs k >= 4, got {k}")
        if c <= 1:
            raise ValueError(f"schedule needs c > 1, got {c}")
        if not 1 <= r <= log_star(k):
            raise ValueError(f"round count r={r} outside 1..log*({k})={log_star(k)}")
        u = (c + 1) * iterated_log(r, k)
        log2_p = [-iterated_exp(i - 1, u) for i in range(1, r + 1)]
        l = [scaled_power(k, k * u)] + [scaled_power(k, k * 2.0 ** (4 - i)) for i in range(2, r + 1)]
        kbound = [float(k), float(k)]
        kbound += [k * 2.0 ** (4 - i) / iterated_exp(i - 1, u) for i in range(2, r + 1)]
        kbound.append(0.0)

        schedule = cls(k=k, r=r, c=float(c), u=u, log2_p=log2_p, l=l, kbound=kbound)
        floor_k = 4 * math.sqrt(k)
        for j in range(1, r + 1):
            if kbound[j] < floor_k:
                schedule.adjusted_round = j
                schedule.adjusted_k = floor_k
                schedule.adjusted_log2_p = -2 * math.sqrt(k)
                schedule.adjusted_l = k << (8 * k)
                break
        return schedule

    def __str__(self) -> str:
        adj = f",adjusted@{self.adjusted_round}" if self.adjusted else ""
        return f"schedule(k={self.k},r={self.r},c={self.c:g}{adj})"

    def __repr__(self) -> str:
        return f"{str(self.__class__)}:{str(self)}"

    @property
    def adjusted(self) -> bool:
        return self.adjusted_round is not None

    @property
    def rounds(self) -> int:
        """Rounds actually run: r, or j when round j was adjusted"""
        return self.adjusted_round if self.adjusted else self.r

    def _check_round(self, i: int) -> None:
        if not 1 <= i <= self.rounds:
            raise ValueError(f"round {i} outside 1..{self.rounds}")

    def round_log2_p(self, i: int) -> float:
        self._check_round(i)
        return self.adjusted_log2_p if i == self.adjusted_round else self.log2_p[i - 1]

    def round_l(self, i: int) -> int:
        self._check_round(i)
        return self.adjusted_l if i == self.adjusted_round else self.l[i - 1]

    def round_kbound(self, i: int) -> float:
        return self.adjusted_k if i == self.adjusted_round else self.kbound[i]

    def bits(self, i: int) -> int:
        """ceil(log2(l_i + 1))"""
        return self.round_l(i).bit_length()

    @property
    def per_round_bits(self) -> list[int]:
        return [self.bits(i) for i in range(1, self.rounds + 1)]

    @property
    def total_bits(self) -> int:
        """Bits of a run that uses every round"""
        return sum(self.per_round_bits)

    def error_bound(self) -> float:
        """
        R e^-k + k p_R + sum_{i=2}^{R} 2^(-k_i/4) over the R rounds actually
        run, with the adjusted round's parameters in place.
        """
        R = self.rounds
        bound = R * math.exp(-self.k)
        bound += self.k * 2.0 ** self.round_log2_p(R)
        bound += sum(2.0 ** (-self.round_kbound(i) / 4) for i in range(2, R + 1))
        return bound

    def to_base(self) -> dict:
        b = {
            'k': self.k,
            'r': self.r,
            'c': self.c,
            'u': self.u,
            'rounds': self.rounds,
            'log2_p': [self.round_log2_p(i) for i in range(1, self.rounds + 1)],
            'bits': self.per_round_bits,
            'kbound': self.kbound,
            'adjusted_round': self.adjusted_round,
            'error_bound': self.error_bound(),
        }
        if self.adjusted:
            b['adjusted'] = {'k': self.adjusted_k, 'log2_p': self.adjusted_log2_p,
                             'bits': self.adjusted_l.bit_length()}
        return b


def compute_schedule(k: int, r: int, c: float = DEFAULT_C) -> Schedule:
    return Schedule.compute(k, r, c)


def normalized_bits(k: int, r: int, c: float = DEFAULT_C) -> float:
    """Bits of a full-length run over k log^(r) k"""
    return Schedule.compute(k, r, c).total_bits / (k * iterated_log(r, k))


def within_band(values: Sequence[float], factor: float = BITS_BAND) -> bool:
    """Do the values all lie within a factor of each other?"""
    if not values:
        return True
    return max(values) <= factor * min(values)

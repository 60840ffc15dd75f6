"""
Sparse disjointness protocols over the simulated channel.

Alice holds S_0 and Bob holds S_1.  Round i is sent by the holder of S_i,
so Bob sends in odd rounds and Alice in even rounds; the receiver replaces
S_{i-1} by S_{i+1} = S_{i-1} & Z_i.  Declarations at the end of a run cost
no bits.
"""
from hashlib import blake2b
from math import ceil, floor, log2
import logging

import numpy as np

from ..channel import (Channel, InvariantViolation, MessageKind, Output, Party, Protocol,
                       ProtocolError, Transcript, run)
from .kset import KSet
from .sampling import round_step_virtual
from .schedule import DEFAULT_C, Schedule

logger = logging.getLogger(__name__)

# receiver set bound after round i is floor(k (3/4)^h) + HW_SLACK, h = floor((i+1)/2)
HW_SLACK = 4
HW_DECAY = 0.75
# extra rounds on top of 2 ceil(log2 k)
HW_EXTRA_ROUNDS = 8
# above this set size the geometric index is drawn through its exponential limit
_GEOMETRIC_EXACT = 40


def round_sender(i: int) -> Party:
    return Party.B if i % 2 else Party.A


def _check_inputs(a: KSet, b: KSet, k: int) -> None:
    if a.m != b.m:
        raise ProtocolError(f"inputs live in different universes: {a.m} vs {b.m}")
    if len(a) > k or len(b) > k:
        raise ProtocolError(f"input sizes {len(a)}, {len(b)} exceed k={k}")


class SparseDisjointness(Protocol):
    """
    The r-round protocol with the schedule's p_i and l_i.  With early_stop the
    party whose current set becomes empty declares "disjoint" right away.
    """
    name = "sparse"

    def __init__(self, schedule: Schedule, early_stop: bool = True) -> None:
        self._schedule = schedule
        self._early_stop = bool(early_stop)

    @property
    def schedule(self) -> Schedule:
        return self._schedule

    @property
    def params(self) -> dict:
        return {'k': self._schedule.k, 'r': self._schedule.r, 'c': self._schedule.c,
                'early_stop': self._early_stop, 'adjusted_round': self._schedule.adjusted_round}

    @property
    def max_rounds(self) -> int:
        return self._schedule.rounds

    def execute(self, a: KSet, b: KSet, channel: Channel) -> Output:
        _check_inputs(a, b, self._schedule.k)
        common = a & b
        prev, cur = a, b
        for i in range(1, self._schedule.rounds + 1):
            outcome = round_step_virtual(cur, prev, None, self._schedule.round_l(i),
                                         channel.randomness.stream("round", i),
                                         log2_p=self._schedule.round_log2_p(i))
            channel.send(round_sender(i), outcome.bits, outcome.kind)
            if outcome.error:
                return Output.INTERSECTING
            nxt = outcome.updated
            if (cur & nxt) != common:
                raise InvariantViolation(f"round {i}: S_i & S_(i+1) != S_0 & S_1")
            prev, cur = cur, nxt
            if self._early_stop and not cur:
                return Output.DISJOINT
        return Output.DISJOINT if not cur else Output.INTERSECTING


def elias_gamma_bits(j: int) -> int:
    """Length of the Elias gamma code of j >= 1"""
    return 2 * (int(j).bit_length() - 1) + 1


class HastadWigderson(Protocol):
    """
    p = 1/2 in every round with an unbounded list of candidate sets, the index
    of the first set containing the sender's set sent in Elias gamma code.
    The receiver declares "intersecting" when its new set exceeds
    floor(k (3/4)^h) + 4 after h halvings, "disjoint" when it is empty.
    """
    name = "hw"

    def __init__(self, k: int) -> None:
        if k < 1:
            raise ValueError(f"k must be positive: {k}")
        self._k = int(k)

    @property
    def params(self) -> dict:
        return {'k': self._k, 'slack': HW_SLACK, 'decay': HW_DECAY}

    @property
    def max_rounds(self) -> int:
        return 2 * (ceil(log2(self._k)) + HW_EXTRA_ROUNDS) if self._k > 1 else 2 * HW_EXTRA_ROUNDS

    def threshold(self, i: int) -> int:
        h = (i + 1) // 2
        return floor(self._k * HW_DECAY ** h) + HW_SLACK

    @staticmethod
    def index_bits(size: int, rng: np.random.Generator) -> int:
        """Gamma code length of the first index with all `size` elements selected"""
        if size <= _GEOMETRIC_EXACT:
            return elias_gamma_bits(int(rng.geometric(2.0 ** -size)))
        # j ~ 2^size * Exp(1) for tiny success probability
        e = rng.exponential()
        return 2 * max(0, floor(size + log2(e))) + 1

    def execute(self, a: KSet, b: KSet, channel: Channel) -> Output:
        _check_inputs(a, b, self._k)
        prev, cur = a, b
        for i in range(1, self.max_rounds + 1):
            rng = channel.randomness.stream("round", i)
            bits = self.index_bits(len(cur), rng)
            channel.send(round_sender(i), bits, MessageKind.INDEX)
            keep = rng.random(len(prev - cur)) < 0.5
            nxt = (prev & cur) | KSet.from_array(prev.m, (prev - cur).array[keep])
            prev, cur = cur, nxt
            if not cur:
                return Output.DISJOINT
            if len(cur) > self.threshold(i):
                return Output.INTERSECTING
        return Output.INTERSECTING


def folklore_false_positive_bound(k: int, hash_bits: int) -> float:
    """Union bound k^2 2^-hash_bits on a spurious hash collision"""
    return min(1.0, k * k * 2.0 ** -hash_bits)


class FolkloreHashing(Protocol):
    """
    One round: Alice sends a hash_bits-bit hash of each of her elements under a
    shared random key, Bob answers "intersecting" if any of his elements hashes
    to one of them.  The message is always charged k * hash_bits bits.
    """
    name = "folklore"

    def __init__(self, k: int, hash_bits: int) -> None:
        if k < 1:
            raise ValueError(f"k must be positive: {k}")
        if hash_bits < 1 or hash_bits > 512:
            raise ValueError(f"hash_bits must lie in 1..512: {hash_bits}")
        self._k = int(k)
        self._bits = int(hash_bits)

    @property
    def params(self) -> dict:
        return {'k': self._k, 'hash_bits': self._bits}

    @property
    def max_rounds(self) -> int:
        return 1

    def _hash(self, key: bytes, e: int) -> int:
        h = blake2b(int(e).to_bytes(8, 'little'), digest_size=ceil(self._bits / 8), key=key)
        return int.from_bytes(h.digest(), 'little') & ((1 << self._bits) - 1)

    def execute(self, a: KSet, b: KSet, channel: Channel) -> Output:
        _check_inputs(a, b, self._k)
        key = channel.randomness.derive("hash").to_bytes(8, 'little')
        sent = {self._hash(key, e) for e in a}
        channel.send(Party.A, self._k * self._bits, MessageKind.RAW)
        return Output.INTERSECTING if any(self._hash(key, e) in sent for e in b) else Output.DISJOINT


def run_sparse_disjointness(S: KSet, T: KSet, schedule: Schedule, seed: int,
                            early_stop: bool = True) -> tuple[Output, Transcript]:
    """S is Alice's input S_0, T is Bob's input S_1."""
    return run(SparseDisjointness(schedule, early_stop), S, T, seed)


def hw_baseline(S: KSet, T: KSet, seed: int, k: int|None = None) -> tuple[Output, Transcript]:
    return run(HastadWigderson(k or max(len(S), len(T), 2)), S, T, seed)


def folklore_one_round(S: KSet, T: KSet, hash_bits: int, seed: int,
                       k: int|None = None) -> tuple[Output, Transcript]:
    return run(FolkloreHashing(k or max(len(S), len(T), 1), hash_bits), S, T, seed)


def make_protocol(name: str, k: int, r: int = 1, c: float = DEFAULT_C, early_stop: bool = True,
                  hash_bits: int|None = None) -> Protocol:
    """Protocol by command line name"""
    match name:
        case "sparse":
            return SparseDisjointness(Schedule.compute(k, r, c), early_stop)
        case "hw":
            return HastadWigderson(k)
        case "folklore":
            return FolkloreHashing(k, hash_bits or 2 * ceil(log2(max(k, 2))) + 2)
    raise ValueError(f"unknown protocol: {name}")

"""
One round of the random-set protocol: the sender looks for the first of l
shared random sets (each element of [m] in it with probability p) that
contains its current set S, and the receiver intersects its own set T with it.

round_step_virtual never materialises the l sets.  The first containing set
is found with probability 1 - (1 - p^|S|)^l, and given that it contains S it
holds every other element independently with probability p, so the receiver's
new set is (T & S) plus a p-thinning of T - S.  The error probability is
evaluated as

    (1 - q)^l = exp(-exp(ln l + ln(-log1p(-q)))),   q = 2^(|S| log2 p)

with ln(-log1p(-q)) replaced by ln q once q is below 1e-12, so neither q nor
l has to be representable as a float.

round_step_literal draws the l sets for real and only exists to check the
virtual sampler at toy sizes.
"""
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
import math

import numpy as np

from ..channel import MessageKind
from ..resources import ResourceBase
from .kset import KSet

# largest l * m the literal sampler will draw
LITERAL_BUDGET = 2 ** 20
# below this q, -log1p(-q) is replaced by q
_TINY_Q = 1e-12


@dataclass
class RoundOutcome(ResourceBase):
    kind: MessageKind
    bits: int
    updated: KSet|None = None
    index: int|None = None

    @property
    def error(self) -> bool:
        return self.kind == MessageKind.ERROR_SIGNAL


def _log2_probability(p: float|None, log2_p: float|None) -> float:
    if log2_p is None:
        if p is None or not 0 < p < 1:
            raise ValueError(f"selection probability must lie in (0, 1): p={p}")
        return math.log2(p)
    if not (log2_p < 0 and math.isfinite(log2_p)):
        raise ValueError(f"log2 of the selection probability must be finite and negative: {log2_p}")
    return float(log2_p)


def error_probability(size: int, log2_p: float, l: int) -> float:
    """(1 - p^size)^l for l random sets, in floating point"""
    if l < 1:
        raise ValueError(f"need at least one candidate set, l={l}")
    if size == 0:
        return 0.0
    log2_q = size * log2_p
    if log2_q < math.log2(_TINY_Q):
        ln_neg_ln = log2_q * math.log(2)
    else:
        ln_neg_ln = math.log(-math.log1p(-2.0 ** log2_q))
    x = math.log(l) + ln_neg_ln
    if x > 700:
        return 0.0
    return math.exp(-math.exp(x))


def _thin(T: KSet, S: KSet, p: float, rng: np.random.Generator) -> KSet:
    outside = T - S
    keep = rng.random(len(outside)) < p
    return (T & S) | KSet.from_array(T.m, outside.array[keep])


def round_step_virtual(S: KSet, T: KSet, p: float|None, l: int, rng: np.random.Generator,
                       log2_p: float|None = None) -> RoundOutcome:
    """
    Sender holds S, receiver holds T.  Pass p directly or, when it underflows,
    log2_p.  Draws one uniform for the error event, then one per element of
    T - S, always in that order.
    """
    lp = _log2_probability(p, log2_p)
    bits = int(l).bit_length()
    if rng.random() < error_probability(len(S), lp, int(l)):
        return RoundOutcome(MessageKind.ERROR_SIGNAL, bits)
    return RoundOutcome(MessageKind.INDEX, bits, _thin(T, S, 2.0 ** lp, rng))


def round_step_literal(S: KSet, T: KSet, p: float, l: int, m: int, rng: np.random.Generator) -> RoundOutcome:
    """Draw the l candidate subsets of [m] and scan for the first one containing S."""
    _log2_probability(p, None)
    if l * m > LITERAL_BUDGET:
        raise ValueError(f"literal sampling of {l} sets over [{m}] exceeds {LITERAL_BUDGET}")
    if S.m != m or T.m != m:
        raise ValueError(f"sets must live in [{m}]")
    bits = int(l).bit_length()
    sets = rng.random((int(l), m)) < p
    if len(S):
        contains = sets[:, S.array - 1].all(axis=1)
    else:
        contains = np.ones(int(l), dtype=bool)
    if not contains.any():
        return RoundOutcome(MessageKind.ERROR_SIGNAL, bits)
    index = int(np.argmax(contains))
    Z = np.flatnonzero(sets[index]) + 1
    return RoundOutcome(MessageKind.INDEX, bits, KSet.from_array(m, np.intersect1d(T.array, Z)), index + 1)


Outcome = tuple[bool, tuple[int, ...]|None]


def virtual_outcome_distribution(S: KSet, T: KSet, p: Fraction, l: int) -> dict[Outcome, Fraction]:
    """
    Exact law of (error, new T) under the virtual sampler:
    error with probability (1 - p^|S|)^l, otherwise T & S plus each element
    of T - S independently with probability p.
    """
    p = Fraction(p)
    err = (1 - p ** len(S)) ** l
    law: dict[Outcome, Fraction] = {}
    if err:
        law[(True, None)] = err
    keep = (T & S).elements
    outside = (T - S).elements
    for size in range(len(outside) + 1):
        w = (1 - err) * p ** size * (1 - p) ** (len(outside) - size)
        for A in combinations(outside, size):
            law[(False, tuple(sorted(keep + A)))] = w
    return law


def literal_outcome_distribution(S: KSet, T: KSet, p: Fraction, l: int, m: int) -> dict[Outcome, Fraction]:
    """
    Exact law of (error, new T) for l independent p-random subsets of [m],
    by accumulating over every subset Z of [m] for each candidate in turn.
    """
    p = Fraction(p)
    universe = range(1, m + 1)
    zs = []
    for size in range(m + 1):
        w = p ** size * (1 - p) ** (m - size)
        for Z in combinations(universe, size):
            zs.append((set(Z), w))
    need = set(S.elements)
    law: dict[Outcome, Fraction] = {}
    missing = Fraction(1)
    for _ in range(l):
        miss_mass = Fraction(0)
        for Z, w in zs:
            if need <= Z:
                key = (False, tuple(e for e in T.elements if e in Z))
                law[key] = law.get(key, Fraction(0)) + missing * w
            else:
                miss_mass += w
        missing *= miss_mass
    if missing:
        law[(True, None)] = missing
    return law

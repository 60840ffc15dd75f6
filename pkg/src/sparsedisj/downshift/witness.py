"""
Box witnesses inside down(K) and the sets T whose down-shift is such a box.
"""
from dataclasses import dataclass, field
from fractions import Fraction
from math import ceil, floor, log2
import logging

import numpy as np

from ..channel import InvariantViolation
from ..grid import GridParams, GridPoint, GridSet, as_point
from ..resources import ResourceBase
from . import WitnessNotFound
from .ops import down

logger = logging.getLogger(__name__)


def witness_threshold(params: GridParams, mu: Fraction) -> float:
    """k = (t/2) * mu^(5/(4n)), evaluated in the log domain so tiny mu cannot underflow."""
    if mu <= 0:
        raise ValueError(f"threshold needs a nonempty set, mu={mu}")
    log_mu = log2(mu.numerator) - log2(mu.denominator)
    return (params.t / 2) * 2.0 ** (5 * log_mu / (4 * params.n))


@dataclass
class BoxWitness(ResourceBase):
    """
    A point x of down(K), the coordinates I where it clears the threshold, and
    the box P with side `side` on I and {1} elsewhere.  P sits inside down(K)
    because down(K) is an ideal containing x.
    """
    x: GridPoint
    I: tuple[int, ...]
    k: float
    side: int
    mu: Fraction
    strict: bool = True
    box: GridSet|None = field(default=None, repr=False)

    @property
    def corner(self) -> GridPoint:
        """The largest point of the box"""
        return GridPoint(tuple(self.side if i in self.I else 1 for i in range(1, self.x.n + 1)))

    @property
    def box_size(self) -> int:
        return self.side ** len(self.I)

    def to_base(self) -> dict:
        b = {
            'x': self.x.to_base(),
            'I': list(self.I),
            'k': self.k,
            'side': self.side,
            'mu': str(self.mu),
            'strict': self.strict,
            'corner': self.corner.to_base(),
            'box_size': self.box_size,
        }
        return b


def find_box_witness(K: GridSet, side: int|None = None) -> BoxWitness:
    """
    Search down(K) for a point with at least ceil(n/5) coordinates greater
    than k = (t/2) mu(K)^(5/(4n)).  Among qualifying points the one with the
    most qualifying coordinates wins, ties going to the lexicographically
    smallest; I is its first ceil(n/5) qualifying coordinates.

    The box side is max(1, floor(k)).  Passing `side` overrides it, in which case
    a coordinate qualifies when x_i >= side, so the box still fits under x.
    """
    if not len(K):
        raise ValueError("find_box_witness needs a nonempty set")
    params = K.params
    mu = K.mu
    k = witness_threshold(params, mu)
    need = ceil(params.n / 5)
    if side is None:
        box_side = max(1, floor(k))
        strict = True
    else:
        box_side = int(side)
        if not 1 <= box_side <= params.t:
            raise ValueError(f"box side {side} outside 1..{params.t}")
        strict = False

    D = down(K).array
    qualify = D > k if strict else D >= box_side
    counts = qualify.sum(axis=1)
    best = int(counts.max())
    if best < need:
        raise WitnessNotFound(mu, k, f"no point of down(K) has {need} coordinates above k={k:.6g}, "
                                     f"best has {best}, mu(K)={mu}")
    # rows are in code order which is lexicographic order, argmax takes the first
    row = int(np.argmax(counts))
    x = GridPoint(tuple(D[row].tolist()))
    I = tuple(int(i) + 1 for i in np.flatnonzero(qualify[row])[:need])
    sides = [box_side if i in I else 1 for i in range(1, params.n + 1)]
    box = GridSet.box(params, sides)
    logger.debug(f"box witness x={x} I={I} k={k:.6g} side={box_side}")
    return BoxWitness(x=x, I=I, k=k, side=box_side, mu=mu, strict=strict, box=box)


def _contains_after_down(t: int, rows: np.ndarray, target: tuple[int, ...]) -> bool:
    """Is target in the down-shift of the rows, as a set in [t]^d?"""
    if rows.shape[1] == 0:
        return rows.shape[0] > 0
    S = GridSet.from_array(GridParams(t, rows.shape[1]), rows)
    return target in down(S)


def _extract(t: int, rows: np.ndarray, target: tuple[int, ...]) -> np.ndarray:
    """
    Points of rows whose down-shift is [target_1] x ... x [target_d].
    down applies down_1 last, so x is in down(K) exactly when at least x_1
    hyperplanes x_1 = l have the rest of x in the down-shift of their slice.
    Take the x_1 smallest such levels and recurse inside each.
    """
    if not target:
        return rows[:1]
    levels = []
    for l in np.unique(rows[:, 0]):
        if len(levels) == target[0]:
            break
        sub = rows[rows[:, 0] == l][:, 1:]
        if _contains_after_down(t, sub, target[1:]):
            levels.append((int(l), sub))
    if len(levels) < target[0]:
        raise ValueError(f"point {target} is not in down(K)")
    parts = []
    for l, sub in levels:
        inner = _extract(t, sub, target[1:])
        parts.append(np.column_stack([np.full(inner.shape[0], l, dtype=np.int64), inner]))
    return np.vstack(parts)


def extract_T(K: GridSet, x: GridPoint|tuple[int, ...]) -> GridSet:
    """
    A subset T of K with down(T) = [x_1] x ... x [x_n], for x in down(K).
    The result is checked against that postcondition before it is returned.
    """
    p = as_point(x)
    p.check(K.params)
    if p not in down(K):
        raise ValueError(f"{p} is not in down(K)")
    T = GridSet.from_array(K.params, _extract(K.params.t, K.array, p.coords))
    box = GridSet.box(K.params, p.coords)
    if not T.issubset(K):
        raise InvariantViolation(f"extract_T produced points outside K for x={p}")
    if down(T) != box:
        raise InvariantViolation(f"down(T) is not the box under x={p}")
    return T

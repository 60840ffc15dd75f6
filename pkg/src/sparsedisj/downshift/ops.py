"""
The compression operators.

Two points are i-equivalent (x ~_i y) when they agree everywhere except
possibly coordinate i.  Removing coordinate i from a code is done by
subtracting (x_i - 1) * t^(n-i), which leaves the code of the class member
with x_i = 1, so that value serves as the class key.
"""
import numpy as np

from ..grid import GridSet


def _check_coordinate(K: GridSet, i: int) -> int:
    K.params.check_coordinate(i)
    return K.params.coordinate_weight(i)


def down_ia(K: GridSet, i: int, a: int) -> GridSet:
    """
    Move every x in K with x_i = a down to x_i = a-1, unless that point is
    already in K.
    """
    w = _check_coordinate(K, i)
    if not 2 <= int(a) <= K.params.t:
        raise ValueError(f"down_ia level a={a} outside 2..{K.params.t}")
    if not len(K):
        return K
    codes = K.codes
    at_a = K.array[:, i - 1] == a
    target = codes - w
    move = at_a & ~np.isin(target, codes)
    if not move.any():
        return K
    return GridSet(K.params, np.where(move, target, codes))


def down_i(K: GridSet, i: int) -> GridSet:
    """
    Replace every i-class of size c by its members with x_i in [c].
    """
    w = _check_coordinate(K, i)
    if not len(K):
        return K
    keys = K.codes - (K.array[:, i - 1] - 1) * w
    uniq, counts = np.unique(keys, return_counts=True)
    base = np.repeat(uniq, counts)
    # position of each row within its class, 0..c-1
    offset = np.arange(base.size) - np.repeat(np.cumsum(counts) - counts, counts)
    return GridSet(K.params, base + offset * w)


def ia_sweeps(K: GridSet, i: int) -> tuple[GridSet, int]:
    """
    Apply down_ia for a = 2..t repeatedly until nothing moves.
    Returns the fixpoint and the number of sweeps that changed the set.
    """
    _check_coordinate(K, i)
    sweeps = 0
    while True:
        changed = False
        for a in range(2, K.params.t + 1):
            moved = down_ia(K, i, a)
            if moved is not K:
                changed = True
                K = moved
        if not changed:
            return K, sweeps
        sweeps += 1


def down_i_via_ia(K: GridSet, i: int) -> GridSet:
    return ia_sweeps(K, i)[0]


def down(K: GridSet) -> GridSet:
    """down_1(down_2(...down_n(K)...))"""
    for i in range(K.params.n, 0, -1):
        K = down_i(K, i)
    return K


def is_i_ideal(K: GridSet, i: int) -> bool:
    w = _check_coordinate(K, i)
    if not len(K):
        return True
    above = K.array[:, i - 1] > 1
    return bool(np.isin(K.codes[above] - w, K.codes).all())


def is_ideal(K: GridSet) -> bool:
    return all(is_i_ideal(K, i) for i in range(1, K.params.n + 1))

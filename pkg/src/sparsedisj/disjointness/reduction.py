"""
Exists-equal as sparse disjointness: x in [t]^n becomes the n-subset
{(i-1)t + x_i} of [tn], and two such sets meet exactly where x and y agree.
"""
from dataclasses import dataclass
from typing import Any

import numpy as np

from ..channel import Channel, Output, Protocol
from ..grid import GridParams, GridPoint, as_point, exists_equal, uniform_point
from .kset import KSet


def ee_to_set(x: GridPoint, t: int) -> KSet:
    p = as_point(x)
    if max(p) > t:
        raise ValueError(f"{p} is not a point of [{t}]^{p.n}")
    return KSet(t * p.n, tuple((i - 1) * t + c for i, c in enumerate(p, start=1)))


def ee_to_disjointness(x: GridPoint, y: GridPoint, t: int) -> tuple[KSet, KSet]:
    """The two sets intersect iff EE(x, y) = 1; k = n and m = tn."""
    px, py = as_point(x), as_point(y)
    if px.n != py.n:
        raise ValueError(f"dimension mismatch: {px.n} vs {py.n}")
    return ee_to_set(px, t), ee_to_set(py, t)


class ExistsEqualReduction(Protocol):
    """Runs a set disjointness protocol on the images of two grid points."""

    def __init__(self, inner: Protocol, params: GridParams) -> None:
        self._inner = inner
        self._grid = params
        self.name = f"ee-{inner.name}"

    @property
    def params(self) -> dict:
        return {'t': self._grid.t, 'n': self._grid.n} | self._inner.params

    @property
    def max_rounds(self) -> int:
        return self._inner.max_rounds

    def execute(self, a: GridPoint, b: GridPoint, channel: Channel) -> Output:
        return self._inner.execute(*ee_to_disjointness(a, b, self._grid.t), channel)

    def truth(self, a: Any, b: Any) -> Output:
        return Output.INTERSECTING if exists_equal(a, b) else Output.DISJOINT


@dataclass(frozen=True)
class UniformPointPairs():
    """Independent uniform x, y in [t]^n, for run_trials()."""
    params: GridParams

    def __call__(self, rng: np.random.Generator) -> tuple[GridPoint, GridPoint]:
        return uniform_point(self.params, rng), uniform_point(self.params, rng)

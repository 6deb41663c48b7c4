"""Latin hypercube designs for the initial batch."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .space import DesignPoint, DesignSpace, decode


@dataclass(frozen=True)
class LhsPlan:
    """An n x d matrix of unit-cube coordinates, one point per stratum.

    For every dimension j the n values occupy the n equal strata
    [k/n, (k+1)/n) exactly once.
    """

    n: int
    d: int
    matrix: np.ndarray


def lhs_matrix(n: int, d: int, rng: np.random.Generator) -> LhsPlan:
    """Plain Latin hypercube: random stratum permutation, uniform jitter within."""
    if n < 1:
        raise DomainError("sample count must be at least 1")
    if d < 1:
        raise DomainError("dimension count must be at least 1")
    matrix = np.empty((n, d))
    for j in range(d):
        strata = rng.permutation(n)
        matrix[:, j] = (strata + rng.uniform(size=n)) / n
    return LhsPlan(n=n, d=d, matrix=matrix)


def latin_hypercube(n: int, space: DesignSpace, rng: np.random.Generator) -> list[DesignPoint]:
    """n designs whose cube coordinates are stratified before discrete rounding."""
    plan = lhs_matrix(n, space.ndim, rng)
    return [decode(row, space) for row in plan.matrix]

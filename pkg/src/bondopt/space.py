"""Mixed binary/integer/continuous design spaces and their unit-cube encoding.

Every optimizer in this package (the surrogate, the feasibility classifier,
the swarm search and the genetic baseline) works on a common representation:
each design dimension is affinely mapped to [0, 1]. Discrete dimensions are
decoded with level-centered rounding, i.e. [0, 1] is partitioned into one
equal-width cell per level, which avoids biasing the endpoint levels.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError

KINDS = ("binary", "integer", "continuous")


@dataclass(frozen=True)
class Dimension:
    """One design variable: a name, a kind and inclusive bounds."""

    name: str
    kind: str
    lower: float
    upper: float

    def __post_init__(self):
        if self.kind not in KINDS:
            raise DomainError(f"unknown dimension kind {self.kind!r}")
        if self.kind == "binary":
            if (self.lower, self.upper) != (0, 1):
                raise DomainError(f"binary dimension {self.name!r} must have bounds {{0, 1}}")
        else:
            if not self.lower < self.upper:
                raise DomainError(f"dimension {self.name!r} needs lower < upper")
        if self.kind == "integer":
            if self.lower != int(self.lower) or self.upper != int(self.upper):
                raise DomainError(f"integer dimension {self.name!r} needs integer bounds")

    @property
    def is_discrete(self) -> bool:
        return self.kind in ("binary", "integer")

    @property
    def levels(self) -> int:
        """Number of admissible values of a discrete dimension."""
        if not self.is_discrete:
            raise DomainError(f"dimension {self.name!r} is continuous, has no levels")
        return int(self.upper - self.lower) + 1

    def validate(self, value: float) -> None:
        if not (self.lower <= value <= self.upper):
            raise DomainError(
                f"{self.name}={value!r} outside bounds [{self.lower}, {self.upper}]"
            )
        if self.is_discrete and value != int(value):
            raise DomainError(f"{self.name}={value!r} must be an integer")


@dataclass(frozen=True)
class DesignSpace:
    """An ordered collection of dimensions."""

    dimensions: tuple[Dimension, ...]

    def __post_init__(self):
        names = [d.name for d in self.dimensions]
        if len(set(names)) != len(names):
            raise DomainError("dimension names must be unique")

    @property
    def ndim(self) -> int:
        return len(self.dimensions)

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(d.name for d in self.dimensions)

    def validate(self, values) -> None:
        if len(values) != self.ndim:
            raise DomainError(f"expected {self.ndim} values, got {len(values)}")
        for dim, value in zip(self.dimensions, values):
            dim.validate(value)


@dataclass(frozen=True)
class DesignPoint:
    """A single design: natural-unit values plus their unit-cube encoding.

    ``unit`` is always the canonical encoding of ``values``, so decoding a
    jittered cube vector first snaps it to the grid of admissible designs.
    """

    values: tuple[float, ...]
    unit: tuple[float, ...]

    def as_array(self) -> np.ndarray:
        return np.asarray(self.values, dtype=float)

    def unit_array(self) -> np.ndarray:
        return np.asarray(self.unit, dtype=float)


def design_point(space: DesignSpace, values) -> DesignPoint:
    """Validate natural-unit values and attach their encoding."""
    space.validate(values)
    vals = tuple(float(v) for v in values)
    return DesignPoint(values=vals, unit=tuple(encode(vals, space)))


def encode(values, space: DesignSpace) -> np.ndarray:
    """Affinely map natural-unit values onto the unit cube."""
    space.validate(values)
    u = np.empty(space.ndim)
    for j, (dim, value) in enumerate(zip(space.dimensions, values)):
        u[j] = (value - dim.lower) / (dim.upper - dim.lower)
    return u


def decode(unit_vector, space: DesignSpace) -> DesignPoint:
    """Map a unit-cube vector to a valid design, rounding discrete dimensions.

    Level-centered rounding: a discrete dimension with L levels owns L equal
    cells of [0, 1]; the value is the level whose cell contains the coordinate.
    """
    unit_vector = np.asarray(unit_vector, dtype=float)
    if unit_vector.shape != (space.ndim,):
        raise DomainError(f"expected vector of length {space.ndim}")
    values = []
    for dim, u in zip(space.dimensions, unit_vector):
        if not (0.0 <= u <= 1.0):
            raise DomainError(f"{dim.name}: cube coordinate {u!r} outside [0, 1]")
        if dim.is_discrete:
            cell = min(math.floor(u * dim.levels), dim.levels - 1)
            values.append(dim.lower + cell)
        else:
            values.append(dim.lower + u * (dim.upper - dim.lower))
    return design_point(space, values)


def snap(unit_vector, space: DesignSpace) -> np.ndarray:
    """Round a cube vector onto the encoding of the design it decodes to."""
    return decode(unit_vector, space).unit_array()


def snap_rows(unit_rows: np.ndarray, space: DesignSpace) -> np.ndarray:
    """Vectorized ``snap`` over an (m, d) array of cube vectors."""
    out = np.array(unit_rows, dtype=float)
    if out.ndim != 2 or out.shape[1] != space.ndim:
        raise DomainError(f"expected an (m, {space.ndim}) array")
    if np.any(out < 0.0) or np.any(out > 1.0):
        raise DomainError("cube coordinates outside [0, 1]")
    for j, dim in enumerate(space.dimensions):
        if dim.is_discrete:
            cells = np.minimum(np.floor(out[:, j] * dim.levels), dim.levels - 1)
            out[:, j] = cells / (dim.levels - 1)
    return out

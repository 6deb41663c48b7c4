"""Objective handling: scalarization, dominance, front extraction, hypervolume.

The two objectives are break strength (maximized) and production cost
(minimized). Internally every routine works on the canonical minimization
form (-strength, cost); reports convert back to natural units.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError
from .space import DesignPoint


def canonical(strength, cost) -> np.ndarray:
    """Canonical minimization form of (strength, cost)."""
    return np.array([-float(strength), float(cost)])


def from_canonical(f) -> tuple[float, float]:
    """Back to natural (strength, cost)."""
    return -float(f[0]), float(f[1])


@dataclass(frozen=True)
class Weights:
    """A point on the 2-simplex weighting the two canonical objectives."""

    strength: float
    cost: float

    def __post_init__(self):
        if self.strength < 0.0 or self.cost < 0.0:
            raise DomainError("weights must be non-negative")
        if abs(self.strength + self.cost - 1.0) > 1e-12:
            raise DomainError("weights must sum to 1")

    def as_array(self) -> np.ndarray:
        return np.array([self.strength, self.cost])


def sample_weights(rng: np.random.Generator) -> Weights:
    """Uniform draw on the 2-simplex."""
    u = rng.uniform()
    return Weights(strength=u, cost=1.0 - u)


def tchebycheff(f, w: Weights, ideal, ranges, rho: float):
    """Weighted max-deviation from the ideal point plus a small summed term.

    With g_k = (f_k - ideal_k) / ranges_k the value is

        max_k w_k g_k + rho * sum_k w_k g_k

    which is non-negative whenever f >= ideal componentwise, and whose
    minimizers are (weakly) Pareto-optimal for rho > 0. ``f`` may be a single
    canonical vector or an (n, 2) array of them.
    """
    ranges = np.asarray(ranges, dtype=float)
    if np.any(ranges <= 0.0):
        raise DomainError("objective ranges must be strictly positive")
    f = np.asarray(f, dtype=float)
    g = (f - np.asarray(ideal, dtype=float)) / ranges
    wg = g * w.as_array()
    return wg.max(axis=-1) + rho * wg.sum(axis=-1)


def dominates(a, b) -> bool:
    """True iff a <= b componentwise and a != b (canonical minimization)."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    return bool(np.all(a <= b) and np.any(a < b))


def nondominated_mask(points: np.ndarray) -> np.ndarray:
    """Boolean mask of the non-dominated rows of an (n, 2) canonical array.

    Sort-and-sweep: a row is dominated iff some row with strictly smaller
    first objective has second objective <= its own, or a row sharing its
    first objective has strictly smaller second objective. Exact duplicates
    are all retained.
    """
    points = np.asarray(points, dtype=float)
    n = len(points)
    mask = np.ones(n, dtype=bool)
    if n == 0:
        return mask
    order = np.lexsort((points[:, 1], points[:, 0]))
    best_before = np.inf  # min f2 among rows with strictly smaller f1
    i = 0
    while i < n:
        j = i
        f1 = points[order[i], 0]
        while j < n and points[order[j], 0] == f1:
            j += 1
        group_min = points[order[i], 1]
        for k in range(i, j):
            f2 = points[order[k], 1]
            mask[order[k]] = f2 < best_before and f2 == group_min
        best_before = min(best_before, group_min)
        i = j
    return mask


def pareto_filter(points) -> list:
    """Ids of the non-dominated members of [(id, canonical vector), ...].

    Stable order by first objective ascending; exact ties on both objectives
    are all retained.
    """
    points = list(points)
    if not points:
        return []
    ids = [p[0] for p in points]
    F = np.asarray([p[1] for p in points], dtype=float)
    mask = nondominated_mask(F)
    kept = [i for i in range(len(ids)) if mask[i]]
    kept.sort(key=lambda i: F[i, 0])
    return [ids[i] for i in kept]


def hypervolume_2d(front, ref) -> float:
    """Area dominated by a canonical front and bounded by a reference point.

    Exact sort-and-sweep union of the boxes [f1, ref1] x [f2, ref2]; members
    not dominating the reference componentwise are excluded, dominated or
    duplicate members contribute nothing extra.
    """
    ref = np.asarray(ref, dtype=float)
    front = np.asarray(front, dtype=float).reshape(-1, 2)
    if front.size == 0:
        return 0.0
    keep = np.all(front <= ref, axis=1)
    front = front[keep]
    if front.size == 0:
        return 0.0
    front = front[nondominated_mask(front)]
    order = np.lexsort((front[:, 1], front[:, 0]))
    front = front[order]
    area = 0.0
    prev_f2 = ref[1]
    for f1, f2 in front:
        if f2 >= prev_f2:
            continue
        area += (ref[0] - f1) * (prev_f2 - f2)
        prev_f2 = f2
    return float(area)


@dataclass(frozen=True)
class ArchiveEntry:
    """A feasible evaluated design with its observed mean objectives."""

    design: DesignPoint
    strength: float
    cost: float
    feasible_fraction: float
    replications: int

    def objectives(self) -> np.ndarray:
        return canonical(self.strength, self.cost)


@dataclass
class ParetoArchive:
    """Feasible non-dominated set with a per-iteration hypervolume trace.

    Entries are keyed by design, so pooling more replications into an already
    archived design replaces its summary. ``snapshot`` freezes the current
    front after each iteration; the hypervolume trace is filled online when a
    reference point is known and can be (re)computed later via ``finalize``.
    """

    reference: np.ndarray | None = None
    entries: dict = field(default_factory=dict)
    history: list = field(default_factory=list)
    hypervolume_trace: list = field(default_factory=list)

    def front(self) -> list[ArchiveEntry]:
        members = list(self.entries.values())
        members.sort(key=lambda e: e.objectives()[0])
        return members

    def front_array(self) -> np.ndarray:
        return np.array([e.objectives() for e in self.entries.values()]).reshape(-1, 2)

    def insert(self, entry: ArchiveEntry) -> None:
        self.entries[entry.design.values] = entry
        keys = list(self.entries.keys())
        F = np.array([self.entries[k].objectives() for k in keys])
        mask = nondominated_mask(F)
        self.entries = {k: self.entries[k] for k, keep in zip(keys, mask) if keep}

    def snapshot(self) -> None:
        self.history.append(self.front_array())
        if self.reference is not None:
            self.hypervolume_trace.append(hypervolume_2d(self.history[-1], self.reference))

    def finalize(self, reference) -> None:
        self.reference = None if reference is None else np.asarray(reference, dtype=float)
        if self.reference is None:
            self.hypervolume_trace = [0.0 for _ in self.history]
        else:
            self.hypervolume_trace = [
                hypervolume_2d(front, self.reference) for front in self.history
            ]


def update_archive(archive: ParetoArchive, observations) -> ParetoArchive:
    """Insert the feasible new evaluations, re-filter, record one trace entry.

    ``observations`` are replicated-observation records; a record whose design
    is already archived replaces that entry (pooled summaries supersede).
    """
    for obs in observations:
        if obs.feasible_fraction == 1.0:
            archive.insert(
                ArchiveEntry(
                    design=obs.design,
                    strength=obs.mean_strength,
                    cost=obs.cost,
                    feasible_fraction=obs.feasible_fraction,
                    replications=obs.count,
                )
            )
    archive.snapshot()
    return archive

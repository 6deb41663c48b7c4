"""NSGA-II baseline: non-dominated sorting genetic algorithm with elitism.

Classic generational loop with binary tournament selection, simulated binary
crossover and polynomial mutation, all acting on unit-cube encodings with
discrete dimensions rounded before evaluation. Constraint handling follows
the feasibility-dominance rules: a feasible individual beats any infeasible
one, infeasible individuals compare by violation magnitude, feasible ones by
Pareto dominance.

The initial population counts as generation 1, so the evaluation total is
exactly population x generations.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import DomainError
from .pareto import ParetoArchive, dominates, update_archive
from .space import DesignPoint, DesignSpace, decode


@dataclass(eq=False)
class Individual:
    design: DesignPoint
    objectives: np.ndarray
    feasible: bool
    violation: float
    rank: int = 0
    crowding: float = 0.0


@dataclass(frozen=True)
class Nsga2Config:
    population: int = 30
    generations: int = 170
    crossover_prob: float = 0.9
    crossover_eta: float = 15.0
    mutation_prob: float | None = None  # defaults to 1 / ndim
    mutation_eta: float = 20.0

    def __post_init__(self):
        if self.population < 4 or self.population % 2 != 0:
            raise DomainError("population must be even and at least 4")
        if self.generations < 1:
            raise DomainError("generation count must be at least 1")


@dataclass(frozen=True)
class EvolutionProblem:
    """What the genetic loop needs to know: a space and an evaluator.

    ``evaluate(design, rng)`` returns (canonical objectives, feasible flag,
    violation magnitude).
    """

    space: DesignSpace
    evaluate: Callable[[DesignPoint, np.random.Generator], tuple]


@dataclass
class EvaluationLedger:
    """Design-evaluation accounting, split by origin."""

    initial_designs: int = 0
    added_designs: int = 0
    replications: int = 0

    @property
    def total_designs(self) -> int:
        return self.initial_designs + self.added_designs


@dataclass
class Nsga2Result:
    population: list
    archive: ParetoArchive
    ledger: EvaluationLedger
    evaluation_log: list = field(default_factory=list)  # (generation, Individual)


def constrained_dominates(a: Individual, b: Individual) -> bool:
    """Feasibility-dominance: feasible beats infeasible, then violation/Pareto."""
    if a.feasible and not b.feasible:
        return True
    if not a.feasible and b.feasible:
        return False
    if not a.feasible and not b.feasible:
        return a.violation < b.violation
    return dominates(a.objectives, b.objectives)


def nondominated_sort(population: list) -> list[list[Individual]]:
    """Fronts under constrained dominance; assigns ranks starting at 1."""
    n = len(population)
    dominated_by: list[list[int]] = [[] for _ in range(n)]
    counts = [0] * n
    fronts: list[list[int]] = [[]]
    for i in range(n):
        for j in range(n):
            if i == j:
                continue
            if constrained_dominates(population[i], population[j]):
                dominated_by[i].append(j)
            elif constrained_dominates(population[j], population[i]):
                counts[i] += 1
        if counts[i] == 0:
            population[i].rank = 1
            fronts[0].append(i)
    k = 0
    while fronts[k]:
        nxt = []
        for i in fronts[k]:
            for j in dominated_by[i]:
                counts[j] -= 1
                if counts[j] == 0:
                    population[j].rank = k + 2
                    nxt.append(j)
        k += 1
        fronts.append(nxt)
    return [[population[i] for i in front] for front in fronts if front]


def crowding_distance(front: list) -> np.ndarray:
    """Canonical per-objective neighbor-gap sums; extremes get +inf."""
    n = len(front)
    distance = np.zeros(n)
    if n == 0:
        return distance
    F = np.array([ind.objectives for ind in front])
    for k in range(F.shape[1]):
        order = np.argsort(F[:, k], kind="stable")
        span = F[order[-1], k] - F[order[0], k]
        distance[order[0]] = np.inf
        distance[order[-1]] = np.inf
        if span <= 0.0:
            continue
        for idx in range(1, n - 1):
            i = order[idx]
            distance[i] += (F[order[idx + 1], k] - F[order[idx - 1], k]) / span
    for ind, dist in zip(front, distance):
        ind.crowding = float(dist)
    return distance


def sbx_spread(u: float, eta: float) -> float:
    """Spread factor of simulated binary crossover for a uniform draw u."""
    if u <= 0.5:
        return (2.0 * u) ** (1.0 / (eta + 1.0))
    return (1.0 / (2.0 * (1.0 - u))) ** (1.0 / (eta + 1.0))


def sbx_crossover(p1, p2, eta: float, prob: float, rng: np.random.Generator):
    """Per-gene SBX on unit-cube vectors; children clipped to [0, 1]."""
    p1 = np.asarray(p1, dtype=float)
    p2 = np.asarray(p2, dtype=float)
    c1 = p1.copy()
    c2 = p2.copy()
    for j in range(len(p1)):
        if rng.uniform() >= prob:
            continue
        beta = sbx_spread(rng.uniform(), eta)
        c1[j] = 0.5 * ((1.0 + beta) * p1[j] + (1.0 - beta) * p2[j])
        c2[j] = 0.5 * ((1.0 - beta) * p1[j] + (1.0 + beta) * p2[j])
    return np.clip(c1, 0.0, 1.0), np.clip(c2, 0.0, 1.0)


def polynomial_mutation(p, eta: float, prob: float, rng: np.random.Generator):
    """Bounded polynomial mutation on a unit-cube vector."""
    p = np.asarray(p, dtype=float)
    out = p.copy()
    for j in range(len(p)):
        if rng.uniform() >= prob:
            continue
        u = rng.uniform()
        x = out[j]
        if u < 0.5:
            delta = (2.0 * u + (1.0 - 2.0 * u) * (1.0 - x) ** (eta + 1.0)) ** (
                1.0 / (eta + 1.0)
            ) - 1.0
        else:
            delta = 1.0 - (2.0 * (1.0 - u) + 2.0 * (u - 0.5) * x ** (eta + 1.0)) ** (
                1.0 / (eta + 1.0)
            )
        out[j] = x + delta
    return np.clip(out, 0.0, 1.0)


def tournament_select(population: list, rng: np.random.Generator) -> Individual:
    """Binary tournament between two distinct members: lower rank wins, then
    higher crowding, then a coin flip."""
    if len(population) == 1:
        return population[0]
    i, j = rng.choice(len(population), size=2, replace=False)
    a, b = population[i], population[j]
    if a.rank != b.rank:
        return a if a.rank < b.rank else b
    if a.crowding != b.crowding:
        return a if a.crowding > b.crowding else b
    return a if rng.uniform() < 0.5 else b


def _environmental_selection(merged: list, size: int) -> list:
    survivors: list[Individual] = []
    for front in nondominated_sort(merged):
        crowding_distance(front)
        if len(survivors) + len(front) <= size:
            survivors.extend(front)
        else:
            front.sort(key=lambda ind: -ind.crowding)
            survivors.extend(front[: size - len(survivors)])
            break
    return survivors


def nsga2_run(
    problem: EvolutionProblem,
    cfg: Nsga2Config,
    rng: np.random.Generator,
    archive: ParetoArchive | None = None,
) -> Nsga2Result:
    """Run the generational loop; the archive accumulates the feasible front."""
    d = problem.space.ndim
    p_mut = cfg.mutation_prob if cfg.mutation_prob is not None else 1.0 / d
    archive = archive if archive is not None else ParetoArchive()
    ledger = EvaluationLedger()
    log: list = []

    def make_individual(unit_vector, generation):
        design = decode(unit_vector, problem.space)
        objectives, feasible, violation = problem.evaluate(design, rng)
        ind = Individual(
            design=design,
            objectives=np.asarray(objectives, dtype=float),
            feasible=bool(feasible),
            violation=float(violation),
        )
        ledger.replications += 1
        log.append((generation, ind))
        return ind

    population = [make_individual(rng.uniform(size=d), 1) for _ in range(cfg.population)]
    ledger.initial_designs = cfg.population
    for front in nondominated_sort(population):
        crowding_distance(front)
    _archive_generation(archive, population)

    for generation in range(2, cfg.generations + 1):
        offspring = []
        while len(offspring) < cfg.population:
            a = tournament_select(population, rng)
            b = tournament_select(population, rng)
            c1, c2 = sbx_crossover(
                a.design.unit_array(), b.design.unit_array(), cfg.crossover_eta,
                cfg.crossover_prob, rng,
            )
            for child in (c1, c2):
                if len(offspring) >= cfg.population:
                    break
                mutated = polynomial_mutation(child, cfg.mutation_eta, p_mut, rng)
                offspring.append(make_individual(mutated, generation))
        ledger.added_designs += cfg.population
        population = _environmental_selection(population + offspring, cfg.population)
        _archive_generation(archive, offspring)

    return Nsga2Result(population=population, archive=archive, ledger=ledger, evaluation_log=log)


def _archive_generation(archive: ParetoArchive, individuals: list) -> None:
    records = []
    for ind in individuals:
        if not ind.feasible:
            continue
        records.append(_as_observation_record(ind))
    update_archive(archive, records)


class _IndividualRecord:
    """Adapter giving an Individual the archive's observation interface."""

    def __init__(self, ind: Individual):
        self.design = ind.design
        self.mean_strength = -float(ind.objectives[0])
        self.cost = float(ind.objectives[1])
        self.feasible_fraction = 1.0
        self.count = 1


def _as_observation_record(ind: Individual) -> _IndividualRecord:
    return _IndividualRecord(ind)

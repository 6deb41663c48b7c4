import numpy as np
import pytest

from bondopt.errors import DomainError
from bondopt.nsga2 import (
    EvolutionProblem,
    Individual,
    Nsga2Config,
    constrained_dominates,
    crowding_distance,
    nondominated_sort,
    nsga2_run,
    polynomial_mutation,
    sbx_crossover,
    sbx_spread,
    tournament_select,
)
from bondopt.pareto import ParetoArchive, hypervolume_2d
from bondopt.space import DesignSpace, Dimension, design_point


def unit_space(d):
    return DesignSpace(tuple(Dimension(f"x{i}", "continuous", 0.0, 1.0) for i in range(d)))


def individual(objectives, feasible=True, violation=0.0):
    space = unit_space(1)
    return Individual(
        design=design_point(space, [0.5]),
        objectives=np.asarray(objectives, dtype=float),
        feasible=feasible,
        violation=violation,
    )


def oracle_peel(population):
    """Independent front peeling with its own dominance comparator."""

    def dom(a, b):
        if a.feasible != b.feasible:
            return a.feasible
        if not a.feasible:
            return a.violation < b.violation
        return bool(
            np.all(a.objectives <= b.objectives) and np.any(a.objectives < b.objectives)
        )

    remaining = list(population)
    fronts = []
    while remaining:
        front = [p for p in remaining if not any(dom(q, p) for q in remaining if q is not p)]
        fronts.append(front)
        remaining = [p for p in remaining if p not in front]
    return fronts


def as_sets(fronts):
    return [sorted(id(ind) for ind in front) for front in fronts]


def test_single_front_when_mutually_nondominated():
    population = [individual([1.0, 3.0]), individual([2.0, 2.0]), individual([3.0, 1.0])]
    fronts = nondominated_sort(population)
    assert len(fronts) == 1
    assert all(ind.rank == 1 for ind in population)


def test_chain_gives_singleton_fronts():
    population = [individual([3.0, 3.0]), individual([1.0, 1.0]), individual([2.0, 2.0])]
    fronts = nondominated_sort(population)
    assert [len(f) for f in fronts] == [1, 1, 1]
    assert [f[0].objectives[0] for f in fronts] == [1.0, 2.0, 3.0]


def test_mixed_population_matches_brute_force():
    population = [
        individual([1.0, 4.0]),
        individual([2.0, 3.0]),
        individual([2.0, 5.0]),
        individual([4.0, 1.0], feasible=False, violation=2.0),
        individual([0.5, 0.5], feasible=False, violation=1.0),
        individual([3.0, 3.0]),
    ]
    assert as_sets(nondominated_sort(population)) == as_sets(oracle_peel(population))


def test_random_populations_match_brute_force():
    rng = np.random.default_rng(0)
    for _ in range(100):
        n = int(rng.integers(1, 21))
        population = [
            individual(
                rng.integers(0, 6, size=2).astype(float),
                feasible=bool(rng.uniform() < 0.7),
                violation=float(rng.integers(1, 4)),
            )
            for _ in range(n)
        ]
        assert as_sets(nondominated_sort(population)) == as_sets(oracle_peel(population))


def test_constrained_dominance_rules():
    good = individual([9.0, 9.0])
    bad = individual([1.0, 1.0], feasible=False, violation=1.0)
    worse = individual([0.0, 0.0], feasible=False, violation=3.0)
    assert constrained_dominates(good, bad)
    assert not constrained_dominates(bad, good)
    assert constrained_dominates(bad, worse)
    assert not constrained_dominates(worse, bad)


def test_crowding_two_members_infinite():
    front = [individual([1.0, 2.0]), individual([2.0, 1.0])]
    assert np.all(np.isinf(crowding_distance(front)))


def test_crowding_equally_spaced_middle_is_two():
    front = [individual([0.0, 2.0]), individual([1.0, 1.0]), individual([2.0, 0.0])]
    distance = crowding_distance(front)
    assert distance[1] == pytest.approx(2.0, abs=1e-15)
    assert np.isinf(distance[0]) and np.isinf(distance[2])


def test_crowding_degenerate_objectives_zero():
    front = [individual([1.0, 1.0]) for _ in range(4)]
    distance = crowding_distance(front)
    assert np.all(distance[~np.isinf(distance)] == 0.0)


def test_sbx_identity_when_spread_is_one():
    assert sbx_spread(0.5, 15.0) == pytest.approx(1.0, abs=1e-15)

    class HalfRng:
        def uniform(self):
            return 0.5

    p1 = np.array([0.2, 0.7])
    p2 = np.array([0.4, 0.9])
    c1, c2 = sbx_crossover(p1, p2, 15.0, 1.0, HalfRng())
    assert np.allclose(c1, p1) and np.allclose(c2, p2)


def test_sbx_children_within_bounds():
    rng = np.random.default_rng(1)
    for _ in range(200):
        p1 = rng.uniform(size=3)
        p2 = rng.uniform(size=3)
        c1, c2 = sbx_crossover(p1, p2, 15.0, 0.9, rng)
        for child in (c1, c2):
            assert np.all(child >= 0.0) and np.all(child <= 1.0)


def test_mutation_identity_at_zero_probability():
    rng = np.random.default_rng(2)
    p = rng.uniform(size=5)
    assert np.array_equal(polynomial_mutation(p, 20.0, 0.0, rng), p)


def test_mutation_stays_in_bounds():
    rng = np.random.default_rng(3)
    for _ in range(200):
        out = polynomial_mutation(rng.uniform(size=4), 20.0, 1.0, rng)
        assert np.all(out >= 0.0) and np.all(out <= 1.0)


def test_tournament_prefers_lower_rank():
    a = individual([1.0, 1.0])
    b = individual([2.0, 2.0])
    a.rank, b.rank = 1, 2
    rng = np.random.default_rng(4)
    winners = {id(tournament_select([a, b], rng)) for _ in range(50)}
    assert winners == {id(a)}


def test_config_validation():
    with pytest.raises(DomainError):
        Nsga2Config(population=5)
    with pytest.raises(DomainError):
        Nsga2Config(population=2)
    with pytest.raises(DomainError):
        Nsga2Config(generations=0)


def quadratic_problem():
    space = unit_space(2)

    def evaluate(design, rng):
        x = design.as_array()
        f1 = float(np.sum(x**2))
        f2 = float(np.sum((x - 1.0) ** 2))
        return np.array([f1, f2]), True, 0.0

    return EvolutionProblem(space=space, evaluate=evaluate)


def test_ledger_accounting():
    problem = quadratic_problem()
    one = nsga2_run(problem, Nsga2Config(population=4, generations=1), np.random.default_rng(0))
    assert one.ledger.initial_designs == 4
    assert one.ledger.added_designs == 0
    assert one.ledger.total_designs == 4
    two = nsga2_run(problem, Nsga2Config(population=4, generations=2), np.random.default_rng(0))
    assert (two.ledger.initial_designs, two.ledger.added_designs) == (4, 4)
    ten = nsga2_run(problem, Nsga2Config(population=6, generations=10), np.random.default_rng(0))
    assert ten.ledger.total_designs == 60
    assert len(ten.evaluation_log) == 60


def test_cumulative_archive_hypervolume_nondecreasing():
    problem = quadratic_problem()
    archive = ParetoArchive(reference=np.array([2.0, 2.0]))
    result = nsga2_run(
        problem, Nsga2Config(population=8, generations=15), np.random.default_rng(5),
        archive=archive,
    )
    trace = result.archive.hypervolume_trace
    assert len(trace) == 15
    assert all(a <= b + 1e-12 for a, b in zip(trace, trace[1:]))


def test_quadratic_front_reaches_analytic_hypervolume():
    # front at x1 = x2 = t: (2t^2, 2(1-t)^2); with reference (2, 2) the
    # dominated area is 4 * int_0^1 (1 - (1 - sqrt(s))^2) ds = 10/3
    analytic = 10.0 / 3.0
    t = np.linspace(0.0, 1.0, 20001)
    dense = np.column_stack([2 * t**2, 2 * (1 - t) ** 2])
    assert hypervolume_2d(dense, [2.0, 2.0]) == pytest.approx(analytic, abs=2e-4)

    problem = quadratic_problem()
    archive = ParetoArchive(reference=np.array([2.0, 2.0]))
    result = nsga2_run(
        problem, Nsga2Config(population=30, generations=50), np.random.default_rng(11),
        archive=archive,
    )
    assert result.archive.hypervolume_trace[-1] >= 0.9 * analytic


def test_run_deterministic_for_seed():
    problem = quadratic_problem()
    cfg = Nsga2Config(population=6, generations=5)
    a = nsga2_run(problem, cfg, np.random.default_rng(9))
    b = nsga2_run(problem, cfg, np.random.default_rng(9))
    assert [i.design.values for i in a.population] == [i.design.values for i in b.population]

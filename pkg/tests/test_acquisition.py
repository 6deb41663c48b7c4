import numpy as np
import pytest

from bondopt.acquisition import (
    PsoConfig,
    expected_improvement,
    infill_criterion,
    mei,
    pso_maximize,
)
from bondopt.errors import DomainError
from bondopt.kriging import build
from bondopt.logistic import LogisticModel
from bondopt.space import DesignSpace, Dimension, decode, encode


def mc_improvement(m, s, target, n, rng):
    """Antithetic Monte Carlo oracle for E[max(target - N(m, s^2), 0)]."""
    z = rng.standard_normal(n // 2)
    lo = np.maximum(target - (m + s * z), 0.0)
    hi = np.maximum(target - (m - s * z), 0.0)
    return float(np.mean(0.5 * (lo + hi)))


def continuous_space(d):
    return DesignSpace(tuple(Dimension(f"x{i}", "continuous", 0.0, 1.0) for i in range(d)))


def test_ei_at_zero_gap_matches_monte_carlo():
    value = expected_improvement(0.0, 1.0, 0.0)
    oracle = mc_improvement(0.0, 1.0, 0.0, 1_000_000, np.random.default_rng(0))
    assert value == pytest.approx(0.3989, abs=1e-4)
    assert value == pytest.approx(oracle, abs=1e-3)


def test_ei_degenerate_branches():
    assert expected_improvement(1.0, 0.0, 0.0) == 0.0
    assert expected_improvement(-2.0, 1e-13, 0.0) == pytest.approx(2.0, abs=1e-12)
    assert expected_improvement(5.0, 2.0, -1.0) >= 0.0


def test_ei_against_monte_carlo_batch():
    rng = np.random.default_rng(42)
    for _ in range(20):
        m = rng.uniform(-2, 2)
        s = rng.uniform(0.2, 2.0)
        target = m + rng.uniform(0.5, 3.0) * s
        exact = expected_improvement(m, s, target)
        oracle = mc_improvement(m, s, target, 1_000_000, rng)
        assert abs(exact - oracle) <= 1e-3 * abs(oracle)


def test_ei_monotone_in_target_and_spread():
    rng = np.random.default_rng(7)
    for _ in range(50):
        m = rng.uniform(-3, 3)
        s = rng.uniform(0.1, 2.0)
        t1 = rng.uniform(-3, 3)
        t2 = t1 + rng.uniform(0.01, 2.0)
        assert expected_improvement(m, s, t2) > expected_improvement(m, s, t1)
        target = m - rng.uniform(0.1, 2.0)  # m above target
        s2 = s + rng.uniform(0.01, 2.0)
        assert expected_improvement(m, s2, target) > expected_improvement(m, s, target)


def _toy_model():
    return build(
        [[0.1, 0.1], [0.9, 0.9]], [1.0, -1.0], [0.0, 0.0],
        lengthscales=[0.4, 0.4], sigma2=1.0,
    )


def test_mei_uses_predictive_moments():
    model = _toy_model()
    x = np.array([0.5, 0.5])
    from bondopt.kriging import predict

    mean, var = predict(model, x)
    assert mei(model, x, 0.0) == pytest.approx(
        expected_improvement(mean, np.sqrt(var), 0.0), rel=1e-12
    )


def test_probability_of_feasibility_scales_criterion():
    model = _toy_model()
    coin = LogisticModel(weights=np.zeros(2), bias=0.0, reg=0.0, iterations=0, grad_norm=0.0)
    x = np.array([[0.3, 0.6]])
    assert infill_criterion(model, coin, x, 0.5)[0] == pytest.approx(
        0.5 * mei(model, x[0], 0.5), rel=1e-12
    )


def test_constant_classifier_preserves_argmax():
    model = _toy_model()
    grid = np.array([[a, b] for a in np.linspace(0, 1, 21) for b in np.linspace(0, 1, 21)])
    flat = LogisticModel(weights=np.zeros(2), bias=-2.0, reg=0.0, iterations=0, grad_norm=0.0)
    plain = mei(model, grid, 0.2)
    weighted = infill_criterion(model, flat, grid, 0.2)
    assert np.argmax(plain) == np.argmax(weighted)
    assert np.all(weighted[plain > 0.0] > 0.0)  # clamp floor keeps MEI > 0 alive


def test_pso_config_validation():
    with pytest.raises(DomainError):
        PsoConfig(swarm_size=1)
    with pytest.raises(DomainError):
        PsoConfig(inertia=1.2)
    with pytest.raises(DomainError):
        PsoConfig(cognitive=0.0)


def test_pso_finds_bowl_center():
    space = continuous_space(6)

    def criterion(U):
        return -np.sum((U - 0.5) ** 2, axis=1)

    best = pso_maximize(criterion, space, PsoConfig(), np.random.default_rng(3))
    assert np.linalg.norm(best.unit_array() - 0.5) <= 0.05


def test_pso_terminates_on_constant_criterion():
    space = continuous_space(3)

    def criterion(U):
        return np.zeros(len(U))

    best = pso_maximize(criterion, space, PsoConfig(swarm_size=8, iterations=10),
                        np.random.default_rng(0))
    space.validate(best.values)


def test_pso_exact_on_integer_levels():
    space = DesignSpace((Dimension("k", "integer", 1, 5),))
    target = encode([3], space)[0]

    def criterion(U):
        return -((U[:, 0] - target) ** 2)

    # exhaustive check: level 3 is the unique maximizer over the 5 levels
    levels = np.array([encode([k], space)[0] for k in range(1, 6)])
    assert np.argmax(-((levels - target) ** 2)) == 2
    best = pso_maximize(criterion, space, PsoConfig(swarm_size=10, iterations=30),
                        np.random.default_rng(1))
    assert best.values == (3,)


def test_pso_positions_stay_in_cube():
    space = continuous_space(4)
    seen = []

    def criterion(U):
        seen.append(U.copy())
        assert np.all(U >= 0.0) and np.all(U <= 1.0)
        return np.sum(U, axis=1)

    pso_maximize(criterion, space, PsoConfig(swarm_size=12, iterations=40),
                 np.random.default_rng(5))
    assert len(seen) == 41  # initial sweep plus one per iteration


def test_pso_scale_invariance_under_fixed_seed():
    space = continuous_space(5)

    def criterion(U):
        return np.cos(3 * U[:, 0]) + np.sum(U[:, 1:], axis=1)

    def scaled(U):
        return 10.0 * criterion(U)

    a = pso_maximize(criterion, space, PsoConfig(), np.random.default_rng(11))
    b = pso_maximize(scaled, space, PsoConfig(), np.random.default_rng(11))
    assert a.values == b.values


def test_pso_duplicate_guard_returns_runner_up():
    space = DesignSpace((Dimension("k", "integer", 1, 3),))
    peak = encode([2], space)[0]

    def criterion(U):
        return -((U[:, 0] - peak) ** 2)

    cfg = PsoConfig(swarm_size=6, iterations=20)
    unconstrained = pso_maximize(criterion, space, cfg, np.random.default_rng(2))
    assert unconstrained.values == (2,)
    runner_up = pso_maximize(
        criterion, space, cfg, np.random.default_rng(2),
        avoid=np.array([[peak]]),
    )
    assert runner_up.values in ((1,), (3,))
    everything = np.array([[encode([k], space)[0]] for k in (1, 2, 3)])
    fallback = pso_maximize(criterion, space, cfg, np.random.default_rng(2), avoid=everything)
    space.validate(fallback.values)  # pooled-duplicate fallback stays valid

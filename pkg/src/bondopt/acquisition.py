"""Infill criterion and its maximization by particle swarm.

The criterion is the expected improvement of the surrogate posterior below
the incumbent target, times the classifier's probability of feasibility. For
noisy responses the improvement target must be the minimum *predicted mean*
over sampled designs (never the noisy observed minimum) and the uncertainty
is the noise-free posterior standard deviation from ``kriging.predict``.

The swarm moves continuously in the unit cube; discrete dimensions are only
rounded when the criterion is evaluated, and the best post-rounding candidate
seen anywhere in the swarm history is returned.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.stats import norm

from .errors import DomainError
from .kriging import KrigingModel, predict
from .logistic import LogisticModel, predict_probability
from .space import DesignPoint, DesignSpace, decode, snap_rows

SD_FLOOR = 1e-12
DUPLICATE_TOL = 1e-9


@dataclass(frozen=True)
class PsoConfig:
    """Swarm constants: the standard constriction-equivalent setting."""

    swarm_size: int = 40
    iterations: int = 100
    inertia: float = 0.729
    cognitive: float = 1.49445
    social: float = 1.49445
    velocity_cap: float = 0.5

    def __post_init__(self):
        if self.swarm_size < 2:
            raise DomainError("swarm size must be at least 2")
        if not 0.0 < self.inertia < 1.0:
            raise DomainError("inertia must lie in (0, 1)")
        if self.cognitive <= 0.0 or self.social <= 0.0:
            raise DomainError("cognitive and social factors must be positive")
        if self.iterations < 1:
            raise DomainError("iteration cap must be at least 1")
        if self.velocity_cap <= 0.0:
            raise DomainError("velocity cap must be positive")


def expected_improvement(mean, sd, target):
    """E[max(target - N(mean, sd^2), 0)] in closed form; vectorized.

    Degenerate uncertainty (sd <= 1e-12) collapses to the deterministic
    improvement max(target - mean, 0).
    """
    mean = np.asarray(mean, dtype=float)
    sd = np.asarray(sd, dtype=float)
    gap = target - mean
    out = np.maximum(gap, 0.0)
    active = sd > SD_FLOOR
    if np.any(active):
        u = np.where(active, gap / np.where(active, sd, 1.0), 0.0)
        ei = gap * norm.cdf(u) + sd * norm.pdf(u)
        out = np.where(active, np.maximum(ei, 0.0), out)
    if out.ndim == 0:
        return float(out)
    return out


def mei(model: KrigingModel, x, y_star: float):
    """Improvement below the plug-in best predicted mean, at x."""
    mean, var = predict(model, x)
    return expected_improvement(mean, np.sqrt(var), y_star)


def infill_criterion(model: KrigingModel, classifier: LogisticModel, x, y_star: float):
    """Expected improvement weighted by the probability of feasibility."""
    return mei(model, x, y_star) * predict_probability(classifier, x)


def pso_maximize(
    criterion,
    space: DesignSpace,
    cfg: PsoConfig,
    rng: np.random.Generator,
    avoid=None,
) -> DesignPoint:
    """Global-best particle swarm maximization over the design space.

    ``criterion`` maps an (m, d) array of unit-cube rows to m values; it is
    always called on snapped rows (discrete dimensions rounded). Positions
    are clamped to [0, 1] with the offending velocity component zeroed.

    ``avoid`` is an optional array of unit-cube rows of already evaluated
    designs: the best candidate not within 1e-9 of any of them is returned,
    falling back to a uniform random valid design when every candidate seen
    is a duplicate. A heuristic: no optimality guarantee is claimed.
    """
    d = space.ndim
    pos = rng.uniform(size=(cfg.swarm_size, d))
    vel = rng.uniform(-cfg.velocity_cap, cfg.velocity_cap, size=(cfg.swarm_size, d))

    seen: dict[tuple, float] = {}

    def evaluate(positions):
        snapped = snap_rows(positions, space)
        values = np.asarray(criterion(snapped), dtype=float)
        for row, value in zip(snapped, values):
            key = tuple(row)
            if key not in seen or value > seen[key]:
                seen[key] = value
        return values

    fitness = evaluate(pos)
    pbest = pos.copy()
    pbest_val = fitness.copy()
    g = int(np.argmax(pbest_val))
    gbest = pbest[g].copy()
    gbest_val = pbest_val[g]

    for _ in range(cfg.iterations):
        r_cog = rng.uniform(size=(cfg.swarm_size, d))
        r_soc = rng.uniform(size=(cfg.swarm_size, d))
        vel = (
            cfg.inertia * vel
            + cfg.cognitive * r_cog * (pbest - pos)
            + cfg.social * r_soc * (gbest - pos)
        )
        np.clip(vel, -cfg.velocity_cap, cfg.velocity_cap, out=vel)
        pos = pos + vel
        below = pos < 0.0
        above = pos > 1.0
        vel[below | above] = 0.0
        np.clip(pos, 0.0, 1.0, out=pos)

        fitness = evaluate(pos)
        improved = fitness > pbest_val
        pbest[improved] = pos[improved]
        pbest_val[improved] = fitness[improved]
        g = int(np.argmax(pbest_val))
        if pbest_val[g] > gbest_val:
            gbest = pbest[g].copy()
            gbest_val = pbest_val[g]

    ranked = sorted(seen.items(), key=lambda item: -item[1])
    for key, _ in ranked:
        if avoid is None or not _is_duplicate(np.array(key), avoid):
            return decode(np.array(key), space)
    for _ in range(1000):
        candidate = decode(rng.uniform(size=d), space)
        if not _is_duplicate(candidate.unit_array(), avoid):
            return candidate
    # every admissible design is already evaluated; hand back the best
    # duplicate and let the caller pool replications
    return decode(np.array(ranked[0][0]), space)


def _is_duplicate(row: np.ndarray, avoid) -> bool:
    if avoid is None or len(avoid) == 0:
        return False
    return bool(np.any(np.all(np.abs(np.asarray(avoid) - row) <= DUPLICATE_TOL, axis=1)))

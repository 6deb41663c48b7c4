"""Synthetic adhesive-bonding simulator.

A stand-in response surface for a plasma-treatment bonding line. Six process
parameters are exposed:

    pre_process   binary   material pre-processing before plasma treatment
    power         W        plasma torch power
    speed         mm/s     torch traverse speed over the sample
    distance      mm       nozzle-to-sample distance
    passes        count    number of torch passes
    glue_delay    min      time between plasma treatment and glue application

The deterministic strength core combines a log-normal bell in the plasma
dose (under- and over-treatment both hurt adhesion), a saturating gain in
the number of passes, an exponential decay in the glue delay, and a fixed
additive bonus for pre-processing:

    dose   = (power / power_ref) * (speed_ref / speed) ** speed_exponent
                                 * (distance_ref / distance) ** distance_exponent
    core   = peak_strength * exp(-(ln dose)^2 / (2 * bell_width^2))
                           * (1 - exp(-passes / passes_scale))
                           * exp(-glue_delay / delay_scale)
             + pre_process * preprocess_bonus

Production cost is deterministic: a fixed oven cost, an optional
pre-processing surcharge, and plasma energy proportional to torch power times
time under the torch:

    cost = oven_cost + pre_process * preprocess_cost
           + passes * (traverse_mm / speed) * power * energy_rate

Failure rules are deterministic functions of the design. The treatment
intensity index

    intensity = dose * sqrt(passes)

models surface load: intensity above ``damage_threshold`` causes visual
damage (over-treatment). A core strength above ``substrate_cap`` breaks the
substrate before the bond; above ``cohesion_cap`` (but below the substrate
cap) the glue fails cohesively; otherwise the joint fails adhesively, which
is the only acceptable outcome.

Measured break strength is noisy with a standard deviation affine in the
intensity index (heteroscedastic by construction):

    strength = max(core + (noise_base + noise_slope * intensity) * z, 0),  z ~ N(0, 1)

All coefficients live in :class:`SimulatorConfig` (constants version
``CONSTANTS_VERSION``) and can be overridden from the ``[simulator]`` config
section. Setting ``noise_enabled = false`` makes the simulator a pure
function of the design.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, fields

import numpy as np

from .errors import DomainError
from .space import DesignPoint, DesignSpace, Dimension

CONSTANTS_VERSION = "1"


@dataclass(frozen=True)
class SimulatorConfig:
    """Coefficients of the synthetic bonding response surface."""

    version: str = CONSTANTS_VERSION
    noise_enabled: bool = True

    # design-space bounds
    power_min: float = 300.0
    power_max: float = 700.0
    speed_min: float = 5.0
    speed_max: float = 250.0
    distance_min: float = 4.0
    distance_max: float = 20.0
    passes_min: int = 1
    passes_max: int = 5
    delay_min: float = 0.0
    delay_max: float = 60.0

    # strength surface
    peak_strength: float = 40.0
    power_ref: float = 500.0
    speed_ref: float = 25.0
    distance_ref: float = 10.0
    speed_exponent: float = 0.7
    distance_exponent: float = 0.4
    bell_width: float = 0.8
    passes_scale: float = 2.5
    delay_scale: float = 80.0
    preprocess_bonus: float = 3.0

    # failure rules
    cohesion_cap: float = 20.0
    substrate_cap: float = 27.0
    damage_threshold: float = 1.4

    # strength noise
    noise_base: float = 0.25
    noise_slope: float = 0.2

    # cost model
    oven_cost: float = 2.0
    preprocess_cost: float = 1.5
    traverse_mm: float = 100.0
    energy_rate: float = 0.001


SIMULATOR_FIELDS = tuple(f.name for f in fields(SimulatorConfig))


class FailureMode(enum.Enum):
    ADHESIVE = "adhesive"
    COHESIVE = "cohesive"
    SUBSTRATE = "substrate"


@dataclass(frozen=True)
class Observation:
    """One simulated experiment at a single design."""

    strength: float
    cost: float
    failure_mode: FailureMode
    visual_damage: bool

    def __post_init__(self):
        if self.strength < 0.0:
            raise DomainError("strength must be non-negative")
        if self.cost < 0.0:
            raise DomainError("cost must be non-negative")


def is_feasible(obs: Observation) -> bool:
    """Acceptable outcome: adhesive failure without visual damage."""
    return obs.failure_mode is FailureMode.ADHESIVE and not obs.visual_damage


@dataclass(frozen=True)
class ReplicatedObservation:
    """A design with its replications and their summary statistics.

    ``var_strength`` is the sample variance (ddof=1, zero for a single
    replication); the stored summaries must agree with the replication list,
    which is checked at construction.
    """

    design: DesignPoint
    replications: tuple[Observation, ...]
    mean_strength: float
    var_strength: float
    cost: float
    feasible_fraction: float

    def __post_init__(self):
        if not self.replications:
            raise DomainError("at least one replication required")
        strengths = [o.strength for o in self.replications]
        mean = float(np.mean(strengths))
        var = float(np.var(strengths, ddof=1)) if len(strengths) > 1 else 0.0
        frac = sum(is_feasible(o) for o in self.replications) / len(self.replications)
        for stored, computed, name in (
            (self.mean_strength, mean, "mean_strength"),
            (self.var_strength, var, "var_strength"),
            (self.feasible_fraction, frac, "feasible_fraction"),
        ):
            if abs(stored - computed) > 1e-12 * (1.0 + abs(computed)):
                raise DomainError(f"{name} disagrees with the replication list")
        if self.var_strength < 0.0:
            raise DomainError("var_strength must be non-negative")

    @property
    def count(self) -> int:
        return len(self.replications)

    @classmethod
    def from_replications(cls, design: DesignPoint, reps) -> "ReplicatedObservation":
        reps = tuple(reps)
        if not reps:
            raise DomainError("at least one replication required")
        strengths = [o.strength for o in reps]
        return cls(
            design=design,
            replications=reps,
            mean_strength=float(np.mean(strengths)),
            var_strength=float(np.var(strengths, ddof=1)) if len(reps) > 1 else 0.0,
            cost=reps[0].cost,
            feasible_fraction=sum(is_feasible(o) for o in reps) / len(reps),
        )

    def pooled_with(self, other: "ReplicatedObservation") -> "ReplicatedObservation":
        """Merge replications of the same design into one record."""
        if self.design.values != other.design.values:
            raise DomainError("can only pool replications of the same design")
        return ReplicatedObservation.from_replications(
            self.design, self.replications + other.replications
        )


def bonding_space(config: SimulatorConfig | None = None) -> DesignSpace:
    """The six-parameter design space of the bonding process."""
    cfg = config or SimulatorConfig()
    return DesignSpace(
        dimensions=(
            Dimension("pre_process", "binary", 0, 1),
            Dimension("power", "continuous", cfg.power_min, cfg.power_max),
            Dimension("speed", "continuous", cfg.speed_min, cfg.speed_max),
            Dimension("distance", "continuous", cfg.distance_min, cfg.distance_max),
            Dimension("passes", "integer", cfg.passes_min, cfg.passes_max),
            Dimension("glue_delay", "continuous", cfg.delay_min, cfg.delay_max),
        )
    )


def plasma_dose(cfg: SimulatorConfig, power: float, speed: float, distance: float) -> float:
    return (
        (power / cfg.power_ref)
        * (cfg.speed_ref / speed) ** cfg.speed_exponent
        * (cfg.distance_ref / distance) ** cfg.distance_exponent
    )


def treatment_intensity(cfg: SimulatorConfig, values) -> float:
    _, power, speed, distance, passes, _ = values
    return plasma_dose(cfg, power, speed, distance) * math.sqrt(passes)


def core_strength(cfg: SimulatorConfig, values) -> float:
    """Deterministic break-strength core, before noise."""
    pre, power, speed, distance, passes, delay = values
    dose = plasma_dose(cfg, power, speed, distance)
    bell = math.exp(-math.log(dose) ** 2 / (2.0 * cfg.bell_width**2))
    pass_gain = 1.0 - math.exp(-passes / cfg.passes_scale)
    delay_decay = math.exp(-delay / cfg.delay_scale)
    return cfg.peak_strength * bell * pass_gain * delay_decay + pre * cfg.preprocess_bonus


def production_cost(cfg: SimulatorConfig, values) -> float:
    pre, power, speed, _, passes, _ = values
    plasma_energy = passes * (cfg.traverse_mm / speed) * power
    return cfg.oven_cost + pre * cfg.preprocess_cost + plasma_energy * cfg.energy_rate


def noise_std(cfg: SimulatorConfig, values) -> float:
    return cfg.noise_base + cfg.noise_slope * treatment_intensity(cfg, values)


def classify_failure(cfg: SimulatorConfig, core: float) -> FailureMode:
    if core > cfg.substrate_cap:
        return FailureMode.SUBSTRATE
    if core > cfg.cohesion_cap:
        return FailureMode.COHESIVE
    return FailureMode.ADHESIVE


class BondingSimulator:
    """Stochastic evaluator of the synthetic bonding response surface.

    Cost, failure mode and visual damage are deterministic in the design;
    only the measured strength carries noise. Pure function of
    (design, rng state), so concurrent calls are safe as long as each owns
    an independent random stream.
    """

    def __init__(self, config: SimulatorConfig | None = None):
        self.config = config or SimulatorConfig()
        self.space = bonding_space(self.config)

    def simulate(self, design: DesignPoint, rng: np.random.Generator) -> Observation:
        self.space.validate(design.values)
        cfg = self.config
        core = core_strength(cfg, design.values)
        strength = core
        if cfg.noise_enabled:
            strength = core + noise_std(cfg, design.values) * rng.standard_normal()
        return Observation(
            strength=max(strength, 0.0),
            cost=production_cost(cfg, design.values),
            failure_mode=classify_failure(cfg, core),
            visual_damage=treatment_intensity(cfg, design.values) > cfg.damage_threshold,
        )

    def simulate_replicated(
        self, design: DesignPoint, r: int, rng: np.random.Generator
    ) -> ReplicatedObservation:
        if r < 1:
            raise DomainError("replication count must be at least 1")
        reps = [self.simulate(design, rng) for _ in range(r)]
        return ReplicatedObservation.from_replications(design, reps)

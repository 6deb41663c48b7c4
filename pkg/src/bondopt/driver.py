"""Optimization loop, experiment orchestration and result persistence.

``run_mosk`` drives the surrogate loop: Latin hypercube batch, then one
infill design per iteration chosen by maximizing expected improvement times
probability of feasibility under a freshly drawn scalarization weight.
``run_nsga2`` runs the genetic baseline on the same simulator with single
replications. ``run_experiment`` pairs the two on a shared reference point,
and ``emit_results`` serializes a run into CSV files.

Randomness is derived from one seed through a spawn tree with a fixed
derivation order (one child stream per design evaluation and per iteration),
so results are reproducible even if evaluations were dispatched concurrently.
"""

from __future__ import annotations

import csv
import dataclasses
import os
import time
from dataclasses import dataclass, field

import numpy as np
from threadpoolctl import threadpool_limits

from . import kriging
from .acquisition import infill_criterion, pso_maximize
from .config import RunConfig, echo_config
from .errors import ConfigError, DomainError, FitError
from .logistic import fit_logistic
from .nsga2 import EvaluationLedger, EvolutionProblem, nsga2_run
from .pareto import (
    ParetoArchive,
    Weights,
    canonical,
    sample_weights,
    tchebycheff,
    update_archive,
)
from .sampling import latin_hypercube
from .simulator import BondingSimulator, ReplicatedObservation, is_feasible

IDEAL_MARGIN = 1e-6
RANGE_FLOOR = 1e-9


class _StreamFactory:
    """Child random generators in a fixed derivation order."""

    def __init__(self, seed: int):
        self._root = np.random.SeedSequence(seed)
        self._count = 0

    def next(self) -> np.random.Generator:
        child = self._root.spawn(1)[0]
        self._count += 1
        return np.random.default_rng(child)


@dataclass
class TraceRow:
    """One design evaluation: what was run and what came back."""

    iteration: int
    snapshot: int
    design_values: tuple
    mean_strength: float
    cost: float
    feasible: bool
    scalarized: float | None
    criterion: float | None
    wall_clock: float


@dataclass
class RunResult:
    config: RunConfig
    algorithm: str
    archive: ParetoArchive
    trace: list
    ledger: EvaluationLedger
    snapshot_evaluations: list
    feasible_means: np.ndarray  # canonical rows, for default reference resolution

    @property
    def final_hypervolume(self) -> float:
        return self.archive.hypervolume_trace[-1] if self.archive.hypervolume_trace else 0.0


def _design_feasible(obs: ReplicatedObservation, rule: str) -> bool:
    if rule == "majority":
        return obs.feasible_fraction > 0.5
    return obs.feasible_fraction == 1.0


def _observed_front_points(observations) -> np.ndarray:
    rows = [
        canonical(o.mean_strength, o.cost)
        for o in observations
        if o.feasible_fraction == 1.0
    ]
    return np.array(rows).reshape(-1, 2)


def run_mosk(cfg: RunConfig) -> RunResult:
    """The surrogate loop: stops when the design-evaluation budget is reached."""
    # the loop is dense-linear-algebra bound at sizes where one BLAS thread wins
    with threadpool_limits(limits=1, user_api="blas"):
        return _run_mosk(cfg)


def _run_mosk(cfg: RunConfig) -> RunResult:
    sim = BondingSimulator(cfg.simulator)
    space = sim.space
    streams = _StreamFactory(cfg.seed)
    ledger = EvaluationLedger()
    archive = _fresh_archive(cfg)
    observations: dict[tuple, ReplicatedObservation] = {}
    trace: list[TraceRow] = []
    snapshot_evals: list[int] = []
    started = time.perf_counter()

    def absorb(obs: ReplicatedObservation) -> ReplicatedObservation:
        key = obs.design.values
        if key in observations:
            observations[key] = observations[key].pooled_with(obs)
        else:
            observations[key] = obs
        ledger.replications += obs.count
        return observations[key]

    for design in latin_hypercube(cfg.n0, space, streams.next()):
        pooled = absorb(sim.simulate_replicated(design, cfg.replications, streams.next()))
        ledger.initial_designs += 1
        trace.append(
            TraceRow(
                iteration=0,
                snapshot=0,
                design_values=pooled.design.values,
                mean_strength=pooled.mean_strength,
                cost=pooled.cost,
                feasible=_design_feasible(pooled, cfg.feasibility_label),
                scalarized=None,
                criterion=None,
                wall_clock=time.perf_counter() - started,
            )
        )
    update_archive(archive, observations.values())
    snapshot_evals.append(ledger.total_designs)

    warm_start = None
    iteration = 0
    while ledger.total_designs < cfg.budget:
        iteration += 1
        loop_rng = streams.next()
        weights = sample_weights(loop_rng)
        X, y, v, ideal, ranges = _scalarized_training_set(observations, weights, cfg.rho)

        fit_seed = int(loop_rng.integers(2**31))
        try:
            model = kriging.fit(X, y, v, seed=fit_seed, warm_start=warm_start)
        except FitError:
            try:
                model = kriging.fit(
                    X, y, v, seed=fit_seed + 1, initial_jitter_factor=1e-4
                )
            except FitError as exc:
                raise FitError(
                    f"surrogate conditioning failure at iteration {iteration}: {exc}"
                ) from exc
        warm_start = (model.lengthscales, model.sigma2, model.nugget)

        labels = [
            _design_feasible(observations[key], cfg.feasibility_label)
            for key in observations
        ]
        classifier = fit_logistic(X, labels)

        train_means, _ = kriging.predict(model, X)
        y_star = float(np.min(train_means))

        def criterion(unit_rows, _m=model, _c=classifier, _t=y_star):
            return infill_criterion(_m, _c, unit_rows, _t)

        avoid = X if cfg.duplicate_policy == "avoid" else None
        point = pso_maximize(criterion, space, cfg.pso, loop_rng, avoid=avoid)
        criterion_value = float(criterion(point.unit_array()[None, :])[0])

        pooled = absorb(sim.simulate_replicated(point, cfg.replications, streams.next()))
        ledger.added_designs += 1

        update_archive(archive, [pooled])
        snapshot_evals.append(ledger.total_designs)
        scalarized = float(
            tchebycheff(
                canonical(pooled.mean_strength, pooled.cost), weights, ideal, ranges, cfg.rho
            )
        )
        trace.append(
            TraceRow(
                iteration=iteration,
                snapshot=iteration,
                design_values=pooled.design.values,
                mean_strength=pooled.mean_strength,
                cost=pooled.cost,
                feasible=_design_feasible(pooled, cfg.feasibility_label),
                scalarized=scalarized,
                criterion=criterion_value,
                wall_clock=time.perf_counter() - started,
            )
        )

    result = RunResult(
        config=cfg,
        algorithm="mosk",
        archive=archive,
        trace=trace,
        ledger=ledger,
        snapshot_evaluations=snapshot_evals,
        feasible_means=_observed_front_points(observations.values()),
    )
    _finalize_single(result)
    return result


def _scalarized_training_set(observations: dict, weights: Weights, rho: float):
    """Scalarized means, their propagated variances, and the normalization used.

    The scalarization normalizes by the running spread of the observed means;
    the ideal point sits a small margin below the running minimum. Intrinsic
    variances of the scalarized response follow from the delta method at the
    active branch of the max: only the strength channel is noisy, so the
    variance of a design's scalarized mean is

        ((w_s * [strength term active] + rho * w_s) / range_s)^2 * var(mean strength).

    Designs with a single replication borrow the mean of all available sample
    variances; with no replicated design at all the caller gets v=None and
    fits a homoscedastic nugget instead.
    """
    obs_list = list(observations.values())
    X = np.array([o.design.unit_array() for o in obs_list])
    F = np.array([canonical(o.mean_strength, o.cost) for o in obs_list])
    fmin = F.min(axis=0)
    span = F.max(axis=0) - fmin
    # zero spread happens in degenerate early data; keep the scale positive
    ranges = np.maximum(span, RANGE_FLOOR)
    ideal = fmin - IDEAL_MARGIN
    y = np.asarray(tchebycheff(F, weights, ideal, ranges, rho), dtype=float)

    sample_vars = [o.var_strength for o in obs_list if o.count >= 2]
    if not sample_vars:
        return X, y, None, ideal, ranges
    pooled_var = float(np.mean(sample_vars))
    g = (F - ideal) / ranges
    wg = g * weights.as_array()
    active_strength = wg[:, 0] >= wg[:, 1]
    w_strength = weights.strength
    scale = (w_strength * active_strength + rho * w_strength) / ranges[0]
    var_mean = np.array(
        [
            (o.var_strength if o.count >= 2 else pooled_var) / o.count
            for o in obs_list
        ]
    )
    v = scale**2 * var_mean
    return X, y, v, ideal, ranges


def run_nsga2(cfg: RunConfig) -> RunResult:
    """The baseline on the bonding simulator, one replication per individual."""
    sim = BondingSimulator(cfg.simulator)
    started = time.perf_counter()

    def evaluate(design, rng):
        obs = sim.simulate_replicated(design, 1, rng)
        feasible = _design_feasible(obs, cfg.feasibility_label)
        violation = sum(1 for o in obs.replications if not is_feasible(o))
        return canonical(obs.mean_strength, obs.cost), feasible, violation

    problem = EvolutionProblem(space=sim.space, evaluate=evaluate)
    rng = np.random.default_rng(np.random.SeedSequence(cfg.seed))
    archive = _fresh_archive(cfg)
    outcome = nsga2_run(problem, cfg.nsga2, rng, archive=archive)

    trace = [
        TraceRow(
            iteration=generation,
            snapshot=generation - 1,
            design_values=ind.design.values,
            mean_strength=-float(ind.objectives[0]),
            cost=float(ind.objectives[1]),
            feasible=ind.feasible,
            scalarized=None,
            criterion=None,
            wall_clock=time.perf_counter() - started,
        )
        for generation, ind in outcome.evaluation_log
    ]
    feasible_rows = np.array(
        [ind.objectives for _, ind in outcome.evaluation_log if ind.feasible]
    ).reshape(-1, 2)
    result = RunResult(
        config=cfg,
        algorithm="nsga2",
        archive=outcome.archive,
        trace=trace,
        ledger=outcome.ledger,
        snapshot_evaluations=[
            cfg.nsga2.population * g for g in range(1, cfg.nsga2.generations + 1)
        ],
        feasible_means=feasible_rows,
    )
    _finalize_single(result)
    return result


def run_single(cfg: RunConfig) -> RunResult:
    return run_mosk(cfg) if cfg.algorithm == "mosk" else run_nsga2(cfg)


def _fresh_archive(cfg: RunConfig) -> ParetoArchive:
    reference = None
    if cfg.reference_point is not None:
        reference = canonical(*cfg.reference_point)
    return ParetoArchive(reference=reference)


def _finalize_single(result: RunResult) -> None:
    """Fill the hypervolume trace, defaulting the reference from the run itself."""
    reference = result.archive.reference
    if reference is None:
        reference = default_reference([result])
    result.archive.finalize(reference)


def default_reference(results) -> np.ndarray | None:
    """Componentwise worst feasible observed mean across runs, plus 10% margin.

    The margin is 10% of the observed feasible span per objective (or of the
    magnitude, for a degenerate span), so every feasible observation of every
    run contributes dominated area.
    """
    points = [r.feasible_means for r in results if r.feasible_means.size]
    if not points:
        return None
    allpts = np.vstack(points)
    worst = allpts.max(axis=0)
    best = allpts.min(axis=0)
    span = worst - best
    margin = np.where(span > 0.0, 0.1 * span, 0.1 * np.maximum(np.abs(worst), 1.0))
    return worst + margin


@dataclass
class RunSummary:
    algorithm: str
    seed: int
    evaluations: int
    replications: int
    final_hypervolume: float
    front_size: int


@dataclass
class ComparisonReport:
    reference: np.ndarray
    summaries: list
    results: list = field(default_factory=list)

    def final_hypervolumes(self, algorithm: str) -> list[float]:
        return [s.final_hypervolume for s in self.summaries if s.algorithm == algorithm]


def run_experiment(mosk_cfg: RunConfig, nsga2_cfg: RunConfig) -> ComparisonReport:
    """Run both algorithms under a shared simulator, seed and reference point."""
    _check_comparable(mosk_cfg, nsga2_cfg)
    return _comparison([mosk_cfg], [nsga2_cfg])


def batch_compare(base: RunConfig, seeds) -> ComparisonReport:
    """The paired experiment repeated over a list of seeds."""
    mosk_cfgs = [
        dataclasses.replace(base, algorithm="mosk", seed=int(s)) for s in seeds
    ]
    nsga2_cfgs = [
        dataclasses.replace(base, algorithm="nsga2", seed=int(s)) for s in seeds
    ]
    return _comparison(mosk_cfgs, nsga2_cfgs)


def _check_comparable(a: RunConfig, b: RunConfig) -> None:
    if a.simulator != b.simulator:
        raise ConfigError("compared runs must share simulator constants")
    if a.seed != b.seed:
        raise ConfigError("compared runs must share the seed policy")
    if a.reference_point != b.reference_point:
        raise ConfigError("compared runs must share the reference point")


def _comparison(mosk_cfgs, nsga2_cfgs) -> ComparisonReport:
    results = [run_mosk(cfg) for cfg in mosk_cfgs]
    results += [run_nsga2(cfg) for cfg in nsga2_cfgs]
    configured = mosk_cfgs[0].reference_point
    if configured is not None:
        reference = canonical(*configured)
    else:
        reference = default_reference(results)
    for result in results:
        result.archive.finalize(reference)
    summaries = [
        RunSummary(
            algorithm=r.algorithm,
            seed=r.config.seed,
            evaluations=r.ledger.total_designs,
            replications=r.ledger.replications,
            final_hypervolume=r.final_hypervolume,
            front_size=len(r.archive.entries),
        )
        for r in results
    ]
    return ComparisonReport(reference=reference, summaries=summaries, results=results)


def summary_statistics(values) -> dict:
    """Median and interquartile range of a sample, as plain floats."""
    arr = np.asarray(list(values), dtype=float)
    q25, median, q75 = np.percentile(arr, [25.0, 50.0, 75.0])
    return {"median": float(median), "q25": float(q25), "q75": float(q75), "iqr": float(q75 - q25)}


def check_output_dir(outdir: str) -> None:
    """Fail before any run starts if the output directory is not writable."""
    try:
        os.makedirs(outdir, exist_ok=True)
        probe = os.path.join(outdir, ".write_probe")
        with open(probe, "w", encoding="utf-8") as handle:
            handle.write("")
        os.remove(probe)
    except OSError as exc:
        raise ConfigError(f"output directory {outdir!r} is not writable: {exc}") from exc


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def emit_results(result: RunResult, outdir: str) -> None:
    """Write trace.csv, front.csv, hypervolume.csv, config.echo and timings.csv.

    All CSVs are UTF-8, comma separated, '.' decimal, LF terminated, with a
    header row. Wall-clock times go to timings.csv, which is the only output
    excluded from the byte-identical determinism contract.
    """
    check_output_dir(outdir)
    cfg = result.config
    names = BondingSimulator(cfg.simulator).space.names
    hv_trace = result.archive.hypervolume_trace

    with open(os.path.join(outdir, "trace.csv"), "w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(
            ["iteration", *names, "mean_strength", "cost", "feasible",
             "scalarized", "criterion", "hypervolume"]
        )
        for row in result.trace:
            writer.writerow(
                [
                    row.iteration,
                    *[_fmt(v) for v in row.design_values],
                    _fmt(row.mean_strength),
                    _fmt(row.cost),
                    _fmt(row.feasible),
                    _fmt(row.scalarized),
                    _fmt(row.criterion),
                    _fmt(hv_trace[row.snapshot] if hv_trace else 0.0),
                ]
            )

    with open(os.path.join(outdir, "front.csv"), "w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow([*names, "strength", "cost"])
        for entry in result.archive.front():
            writer.writerow(
                [*[_fmt(v) for v in entry.design.values], _fmt(entry.strength), _fmt(entry.cost)]
            )

    with open(
        os.path.join(outdir, "hypervolume.csv"), "w", encoding="utf-8", newline=""
    ) as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(["iteration", "evaluations", "hypervolume"])
        for idx, (evals, hv) in enumerate(zip(result.snapshot_evaluations, hv_trace)):
            writer.writerow([idx, evals, _fmt(hv)])

    with open(os.path.join(outdir, "config.echo"), "w", encoding="utf-8", newline="") as handle:
        handle.write(echo_config(cfg))

    with open(os.path.join(outdir, "timings.csv"), "w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(["row", "iteration", "wall_clock_s"])
        for idx, row in enumerate(result.trace):
            writer.writerow([idx, row.iteration, _fmt(row.wall_clock)])


def emit_comparison(report: ComparisonReport, outdir: str) -> None:
    """Per-run directories plus per-seed rows and a median/IQR summary."""
    check_output_dir(outdir)
    for result in report.results:
        emit_results(result, os.path.join(outdir, f"{result.algorithm}_seed{result.config.seed}"))

    seeds = sorted({s.seed for s in report.summaries})
    by_key = {(s.algorithm, s.seed): s for s in report.summaries}
    with open(os.path.join(outdir, "comparison.csv"), "w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(
            ["seed", "mosk_evaluations", "mosk_hypervolume",
             "nsga2_evaluations", "nsga2_hypervolume"]
        )
        for seed in seeds:
            m = by_key[("mosk", seed)]
            n = by_key[("nsga2", seed)]
            writer.writerow(
                [seed, m.evaluations, _fmt(m.final_hypervolume),
                 n.evaluations, _fmt(n.final_hypervolume)]
            )

    with open(os.path.join(outdir, "summary.csv"), "w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(["algorithm", "runs", "evaluations", "median_hv", "q25_hv", "q75_hv", "iqr_hv"])
        for algorithm in ("mosk", "nsga2"):
            hvs = report.final_hypervolumes(algorithm)
            if not hvs:
                continue
            stats = summary_statistics(hvs)
            evals = {s.evaluations for s in report.summaries if s.algorithm == algorithm}
            writer.writerow(
                [algorithm, len(hvs), max(evals), _fmt(stats["median"]),
                 _fmt(stats["q25"]), _fmt(stats["q75"]), _fmt(stats["iqr"])]
            )

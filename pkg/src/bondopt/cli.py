"""Command-line entry points: optimize, compare, hypervolume."""

from __future__ import annotations

import argparse
import csv
import sys

import numpy as np

from .config import RunConfig, load_config, with_overrides
from .driver import (
    batch_compare,
    check_output_dir,
    emit_comparison,
    emit_results,
    run_single,
    summary_statistics,
)
from .errors import BondoptError
from .pareto import canonical, hypervolume_2d


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bondopt",
        description="Surrogate-assisted multi-objective bonding-process optimization",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    opt = sub.add_parser("optimize", help="run one optimizer and write its results")
    opt.add_argument("--config", help="INI config file (defaults used when omitted)")
    opt.add_argument("--algorithm", choices=("mosk", "nsga2"))
    opt.add_argument("--seed", type=int)
    opt.add_argument("--budget", type=int)
    opt.add_argument("--out", dest="outdir")

    cmp_ = sub.add_parser("compare", help="run both optimizers over a batch of seeds")
    cmp_.add_argument("--config", help="INI config file shared by both algorithms")
    cmp_.add_argument("--seeds", type=int, default=1, help="number of seeds (base seed + i)")
    cmp_.add_argument("--out", dest="outdir")

    hv = sub.add_parser("hypervolume", help="hypervolume of a front CSV")
    hv.add_argument("--front", required=True, help="CSV with strength and cost columns")
    hv.add_argument("--ref", required=True, help="reference point as 'strength,cost'")
    return parser


def _load(args) -> RunConfig:
    cfg = load_config(args.config) if args.config else RunConfig()
    overrides = {
        key: getattr(args, key, None)
        for key in ("algorithm", "seed", "budget", "outdir")
    }
    return with_overrides(cfg, **overrides)


def cmd_optimize(args) -> int:
    cfg = _load(args)
    check_output_dir(cfg.outdir)
    result = run_single(cfg)
    emit_results(result, cfg.outdir)
    print(
        f"{cfg.algorithm}: {result.ledger.total_designs} design evaluations, "
        f"{result.ledger.replications} replications, "
        f"front size {len(result.archive.entries)}, "
        f"final hypervolume {result.final_hypervolume:.6g} -> {cfg.outdir}"
    )
    return 0


def cmd_compare(args) -> int:
    cfg = _load(args)
    check_output_dir(cfg.outdir)
    seeds = [cfg.seed + i for i in range(args.seeds)]
    report = batch_compare(cfg, seeds)
    emit_comparison(report, cfg.outdir)
    for algorithm in ("mosk", "nsga2"):
        stats = summary_statistics(report.final_hypervolumes(algorithm))
        print(
            f"{algorithm}: median hypervolume {stats['median']:.6g} "
            f"(IQR {stats['iqr']:.6g}) over {args.seeds} seed(s)"
        )
    return 0


def cmd_hypervolume(args) -> int:
    parts = args.ref.split(",")
    if len(parts) != 2:
        raise BondoptError("reference must be 'strength,cost'")
    reference = canonical(float(parts[0]), float(parts[1]))
    points = []
    with open(args.front, "r", encoding="utf-8", newline="") as handle:
        reader = csv.DictReader(handle)
        if reader.fieldnames is None or not {"strength", "cost"} <= set(reader.fieldnames):
            raise BondoptError(f"{args.front}: need 'strength' and 'cost' columns")
        for row in reader:
            points.append(canonical(float(row["strength"]), float(row["cost"])))
    value = hypervolume_2d(np.array(points).reshape(-1, 2), reference)
    print(repr(value))
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    handlers = {
        "optimize": cmd_optimize,
        "compare": cmd_compare,
        "hypervolume": cmd_hypervolume,
    }
    try:
        return handlers[args.command](args)
    except (BondoptError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

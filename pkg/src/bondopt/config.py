"""Run configuration: INI-style files with full defaulting and echoing.

Sections: ``[run]`` (loop settings), ``[simulator]`` (response-surface
constants), ``[pso]`` (swarm constants), ``[nsga2]`` (baseline constants).
Every key is optional; ``echo_config`` renders the fully resolved
configuration, and re-running from that echo reproduces the run.
"""

from __future__ import annotations

import configparser
import dataclasses
import io
from dataclasses import dataclass, field, fields

from .acquisition import PsoConfig
from .errors import ConfigError
from .nsga2 import Nsga2Config
from .simulator import SimulatorConfig

ALGORITHMS = ("mosk", "nsga2")
LABEL_RULES = ("all", "majority")
DUPLICATE_POLICIES = ("pool", "avoid")


@dataclass(frozen=True)
class RunConfig:
    algorithm: str = "mosk"
    seed: int = 0
    budget: int = 200
    n0: int = 30
    replications: int = 3
    rho: float = 0.05
    reference_point: tuple[float, float] | None = None  # natural (strength, cost)
    feasibility_label: str = "all"
    duplicate_policy: str = "pool"
    outdir: str = "results"
    simulator: SimulatorConfig = field(default_factory=SimulatorConfig)
    pso: PsoConfig = field(default_factory=PsoConfig)
    nsga2: Nsga2Config = field(default_factory=Nsga2Config)

    def __post_init__(self):
        if self.algorithm not in ALGORITHMS:
            raise ConfigError(f"algorithm must be one of {ALGORITHMS}")
        if self.budget < self.n0:
            raise ConfigError("budget must be at least n0")
        if self.n0 < 1:
            raise ConfigError("n0 must be at least 1")
        if self.replications < 1:
            raise ConfigError("replication count must be at least 1")
        if self.rho <= 0.0:
            raise ConfigError("rho must be positive")
        if self.feasibility_label not in LABEL_RULES:
            raise ConfigError(f"feasibility_label must be one of {LABEL_RULES}")
        if self.duplicate_policy not in DUPLICATE_POLICIES:
            raise ConfigError(f"duplicate_policy must be one of {DUPLICATE_POLICIES}")


def _coerce(raw: str, target_type):
    if target_type is bool:
        lowered = raw.strip().lower()
        if lowered in ("1", "true", "yes", "on"):
            return True
        if lowered in ("0", "false", "no", "off"):
            return False
        raise ConfigError(f"expected a boolean, got {raw!r}")
    if target_type is int:
        return int(raw)
    if target_type is float:
        return float(raw)
    return raw.strip()


def _section_kwargs(parser, section: str, config_cls) -> dict:
    kwargs = {}
    if not parser.has_section(section):
        return kwargs
    known = {f.name: f for f in fields(config_cls)}
    for key, raw in parser.items(section):
        if key not in known:
            raise ConfigError(f"unknown key {key!r} in section [{section}]")
        f = known[key]
        target = f.type
        if target in ("int", int):
            kwargs[key] = _coerce(raw, int)
        elif target in ("float", float):
            kwargs[key] = _coerce(raw, float)
        elif target in ("bool", bool):
            kwargs[key] = _coerce(raw, bool)
        elif target in ("float | None",):
            kwargs[key] = None if raw.strip().lower() == "none" else _coerce(raw, float)
        else:
            kwargs[key] = _coerce(raw, str)
    return kwargs


def load_config(path: str) -> RunConfig:
    """Parse an INI file, defaulting everything that is absent."""
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    try:
        with open(path, "r", encoding="utf-8") as handle:
            parser.read_file(handle)
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    except configparser.Error as exc:
        raise ConfigError(f"malformed config file {path}: {exc}") from exc
    return config_from_parser(parser)


def config_from_parser(parser: configparser.ConfigParser) -> RunConfig:
    run_kwargs = {}
    if parser.has_section("run"):
        known = {f.name for f in fields(RunConfig)} - {"simulator", "pso", "nsga2"}
        for key, raw in parser.items("run"):
            if key not in known:
                raise ConfigError(f"unknown key {key!r} in section [run]")
            if key in ("seed", "budget", "n0", "replications"):
                run_kwargs[key] = _coerce(raw, int)
            elif key == "rho":
                run_kwargs[key] = _coerce(raw, float)
            elif key == "reference_point":
                run_kwargs[key] = _parse_reference(raw)
            else:
                run_kwargs[key] = _coerce(raw, str)
    try:
        return RunConfig(
            simulator=SimulatorConfig(**_section_kwargs(parser, "simulator", SimulatorConfig)),
            pso=PsoConfig(**_section_kwargs(parser, "pso", PsoConfig)),
            nsga2=Nsga2Config(**_section_kwargs(parser, "nsga2", Nsga2Config)),
            **run_kwargs,
        )
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc


def _parse_reference(raw: str) -> tuple[float, float] | None:
    raw = raw.strip()
    if raw.lower() in ("", "none"):
        return None
    parts = raw.split(",")
    if len(parts) != 2:
        raise ConfigError("reference_point must be 'strength,cost'")
    return (float(parts[0]), float(parts[1]))


def echo_config(cfg: RunConfig) -> str:
    """Render the fully resolved configuration as INI text."""
    parser = configparser.ConfigParser()
    parser["run"] = {
        "algorithm": cfg.algorithm,
        "seed": repr(cfg.seed),
        "budget": repr(cfg.budget),
        "n0": repr(cfg.n0),
        "replications": repr(cfg.replications),
        "rho": repr(cfg.rho),
        "reference_point": (
            "none"
            if cfg.reference_point is None
            else f"{cfg.reference_point[0]!r},{cfg.reference_point[1]!r}"
        ),
        "feasibility_label": cfg.feasibility_label,
        "duplicate_policy": cfg.duplicate_policy,
        "outdir": cfg.outdir,
    }
    for section, sub in (("simulator", cfg.simulator), ("pso", cfg.pso), ("nsga2", cfg.nsga2)):
        parser[section] = {
            f.name: _render(getattr(sub, f.name)) for f in fields(sub)
        }
    buffer = io.StringIO()
    parser.write(buffer)
    return buffer.getvalue()


def _render(value) -> str:
    if value is None:
        return "none"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, float)):
        return repr(value)
    return str(value)


def with_overrides(cfg: RunConfig, **overrides) -> RunConfig:
    """A copy of cfg with the given non-None top-level fields replaced."""
    changes = {k: v for k, v in overrides.items() if v is not None}
    return dataclasses.replace(cfg, **changes)

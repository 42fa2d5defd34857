"""Experiment configuration: JSON schema, defaults, and validation.

A config file is a flat JSON object. Unknown keys are rejected so typos fail
loudly instead of silently running defaults; `seed` is always mandatory even
for experiments that happen to be deterministic, because it goes into the run
manifest and keeps rerun comparisons honest.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, fields
from pathlib import Path

from . import approx
from .pauli import PauliSum, build_heisenberg, normalize

EXPERIMENTS = ("lambda_sweep", "tau_sweep", "ground_search", "trotter_diag",
               "approx_diag")
MODES = ("block", "comb")

DESK_SHOTS = 10**6
PAPER_SHOTS = 10**9


class ConfigError(ValueError):
    """Validation failure with a field-level message."""

    def __init__(self, field_name: str, message: str):
        super().__init__(f"config field '{field_name}': {message}")
        self.field_name = field_name


@dataclass
class ExperimentConfig:
    experiment: str
    seed: int
    hamiltonian: str = "heisenberg4"
    tau: float = 20.0
    tau0: float = 20.0
    dt: float = 2.5
    alpha: float = 0.85
    eps_target: float = 1e-4
    degree: int | None = None
    shots: int = DESK_SHOTS
    B: float = 0.005
    gamma_sq: float | None = None
    lambda_grid: list[float] = field(default_factory=list)
    tau_grid: list[float] = field(default_factory=list)
    steps_grid: list[int] = field(default_factory=list)
    exact_loss: bool = False
    mode: str = "block"
    output: str = "out.csv"

    def canonical_json(self) -> str:
        """Stable serialization (sorted keys) for manifests and hashing."""
        payload = {f.name: getattr(self, f.name) for f in fields(self)}
        return json.dumps(payload, sort_keys=True)


_FIELD_TYPES = {f.name: f for f in fields(ExperimentConfig)}


def _check(cfg: ExperimentConfig) -> ExperimentConfig:
    if cfg.experiment not in EXPERIMENTS:
        raise ConfigError("experiment", f"must be one of {EXPERIMENTS}")
    if not isinstance(cfg.seed, int):
        raise ConfigError("seed", "must be an integer")
    if cfg.mode not in MODES:
        raise ConfigError("mode", f"must be one of {MODES}")
    for name in ("tau", "tau0"):
        v = getattr(cfg, name)
        if not v > 0:
            raise ConfigError(name, "must be positive")
    if cfg.dt <= 0:
        raise ConfigError("dt", "must be positive")
    if cfg.B <= 0:
        raise ConfigError("B", "must be positive")
    if cfg.shots < 1:
        raise ConfigError("shots", "must be at least 1")
    if not math.isfinite(cfg.eps_target) or cfg.eps_target <= 0:
        raise ConfigError("eps_target", "must be a positive finite float")
    if cfg.degree is not None and cfg.degree < 1:
        raise ConfigError("degree", "must be at least 1 when given")
    # alpha admissibility depends on the relevant tau for the experiment
    tau_ref = cfg.tau0 if cfg.experiment == "ground_search" else cfg.tau
    try:
        floor = approx.alpha_lower_bound(tau_ref)
    except ValueError as exc:
        raise ConfigError("tau", str(exc)) from exc
    if not floor < cfg.alpha <= 1.0:
        raise ConfigError(
            "alpha", f"must lie in ({floor:.6f}, 1] at tau={tau_ref}"
        )
    if cfg.gamma_sq is not None and not 0.0 < cfg.gamma_sq <= 1.0:
        raise ConfigError("gamma_sq", "must lie in (0, 1]")
    for name in ("lambda_grid", "tau_grid"):
        grid = getattr(cfg, name)
        if not all(isinstance(v, (int, float)) and v > 0 for v in grid):
            raise ConfigError(name, "entries must be positive numbers")
    if not all(isinstance(v, int) and v >= 1 for v in cfg.steps_grid):
        raise ConfigError("steps_grid", "entries must be positive integers")
    return cfg


def config_from_dict(payload: dict) -> ExperimentConfig:
    unknown = set(payload) - set(_FIELD_TYPES)
    if unknown:
        raise ConfigError(sorted(unknown)[0], "unknown key")
    if "experiment" not in payload:
        raise ConfigError("experiment", "missing (required)")
    if "seed" not in payload:
        raise ConfigError("seed", "missing (required)")
    return _check(ExperimentConfig(**payload))


def validate_config(path: str | Path) -> ExperimentConfig:
    """Parse, default, and validate a JSON config file."""
    text = Path(path).read_text()
    try:
        payload = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError("<file>", f"not valid JSON: {exc}") from exc
    if not isinstance(payload, dict):
        raise ConfigError("<file>", "top level must be a JSON object")
    return config_from_dict(payload)


def load_hamiltonian(spec: str) -> PauliSum:
    """Resolve the `hamiltonian` field: the built-in model name or a path to
    a serialized operator. The result is always normalized."""
    if spec == "heisenberg4":
        return normalize(build_heisenberg(4))
    h = PauliSum.from_json(Path(spec).read_text())
    return h if h.normalized else normalize(h)

"""Experiment configuration loaded from JSON documents.

Unknown keys are rejected at every nesting level so that a typo cannot
silently fall back to a default.
"""

from __future__ import annotations

import dataclasses
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

from .errors import ConfigError
from .models import LORENZ_REFERENCE_IC, LinearModelParams, Lorenz63Params

EXPERIMENTS = ("snyder", "linear", "lorenz63", "line_search")
FILTER_LABELS = ("classical_pf", "modified_pf", "enkf")

DEFAULT_ALPHA_GRID = (0.0, 1e-4, 3e-4, 1e-3, 3e-3, 1e-2, 3e-2, 1e-1, 0.3, 0.5, 1.0)

# (desk, full-scale) replicate counts.
REPLICATES = {
    "snyder": (1000, 1000),
    "linear": (1, 1),
    "lorenz63": (200, 1000),
    "line_search": (200, 500),
}

_DEFAULTS = {
    "snyder": dict(filters=("classical_pf", "modified_pf"), n_particles=(1000,), alpha=0.5),
    "linear": dict(filters=("classical_pf", "modified_pf"), n_particles=(1000,), alpha=1e-3),
    "lorenz63": dict(filters=FILTER_LABELS, n_particles=(50, 100),
                     alpha={50: 1e-3, 100: 3e-3}),
    "line_search": dict(filters=("modified_pf",), n_particles=(50,), alpha=0.0),
}


@dataclass(frozen=True)
class LorenzSettings:
    model: Lorenz63Params = Lorenz63Params()
    x0_ref: tuple = LORENZ_REFERENCE_IC
    init_var: float = 2.0
    obs_var: float = 1.0


@dataclass(frozen=True)
class SnyderSettings:
    n_x: tuple = (10, 30, 100)
    likelihood_var: float = 1.0


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: str
    filters: tuple = FILTER_LABELS
    n_particles: tuple = (50, 100)
    alpha: object = 0.0
    n_replicates: int = 200
    seed: int = 0
    spin_up_cycles: int = 30
    n_cycles: int = 100
    obs_every: int = 10
    output_dir: str = "results"
    resampler: str = "systematic"
    threads: int = 1
    full_scale: bool = False
    linear: LinearModelParams = LinearModelParams()
    lorenz63: LorenzSettings = LorenzSettings()
    snyder: SnyderSettings = SnyderSettings()
    alpha_grid: tuple = DEFAULT_ALPHA_GRID

    def __post_init__(self):
        _validate(self)

    def alpha_for(self, n_particles: int) -> float:
        if isinstance(self.alpha, dict):
            try:
                return self.alpha[n_particles]
            except KeyError:
                raise ConfigError(f"no alpha configured for n_particles={n_particles}") from None
        return self.alpha

    def replace(self, **changes) -> "ExperimentConfig":
        return dataclasses.replace(self, **changes)


def _validate(cfg):
    if cfg.experiment not in EXPERIMENTS:
        raise ConfigError(f"unknown experiment {cfg.experiment!r}")
    bad = [f for f in cfg.filters if f not in FILTER_LABELS]
    if bad or not cfg.filters:
        raise ConfigError(f"filters must be a nonempty subset of {FILTER_LABELS}, got {cfg.filters}")
    if len(set(cfg.filters)) != len(cfg.filters):
        raise ConfigError("duplicate filter in filters")
    if cfg.experiment in ("snyder", "linear") and "enkf" in cfg.filters:
        raise ConfigError(f"the {cfg.experiment} experiment compares particle filters only")
    if not cfg.n_particles or any(n < 2 for n in cfg.n_particles):
        raise ConfigError("n_particles entries must be >= 2")
    if cfg.experiment == "line_search" and len(cfg.n_particles) != 1:
        raise ConfigError("line_search runs one ensemble size at a time")
    alphas = cfg.alpha.values() if isinstance(cfg.alpha, dict) else [cfg.alpha]
    if any(not (math.isfinite(a) and a >= 0) for a in alphas):
        raise ConfigError("alpha must be finite and >= 0")
    if cfg.n_replicates < 1:
        raise ConfigError("n_replicates must be >= 1")
    if not 0 <= cfg.seed < 2**64:
        raise ConfigError("seed must be an unsigned 64-bit integer")
    if cfg.n_cycles < 1 or not 0 <= cfg.spin_up_cycles < cfg.n_cycles:
        raise ConfigError("need n_cycles >= 1 and 0 <= spin_up_cycles < n_cycles")
    if cfg.obs_every < 1:
        raise ConfigError("obs_every must be >= 1")
    if cfg.resampler not in ("systematic", "multinomial"):
        raise ConfigError(f"unknown resampler {cfg.resampler!r}")
    if cfg.threads < 1:
        raise ConfigError("threads must be >= 1")
    if not cfg.alpha_grid or any(not (math.isfinite(a) and a >= 0) for a in cfg.alpha_grid):
        raise ConfigError("alpha_grid must be a nonempty list of finite alphas >= 0")
    if any(n < 1 for n in cfg.snyder.n_x):
        raise ConfigError("snyder n_x entries must be >= 1")


def _block(cls, data, name, **convert):
    if not isinstance(data, dict):
        raise ConfigError(f"{name} must be a JSON object")
    allowed = {f.name for f in dataclasses.fields(cls)}
    unknown = sorted(set(data) - allowed)
    if unknown:
        raise ConfigError(f"unknown key(s) in {name}: {', '.join(unknown)}")
    kwargs = {k: convert.get(k, lambda v: v)(v) for k, v in data.items()}
    try:
        return cls(**kwargs)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid {name}: {exc}") from exc


def _tuple_of(kind):
    def conv(v):
        if isinstance(v, (list, tuple)):
            return tuple(kind(x) for x in v)
        return (kind(v),)
    return conv


def _alpha(v):
    if isinstance(v, dict):
        return {int(k): float(a) for k, a in v.items()}
    return float(v)


_TOP_KEYS = {f.name for f in dataclasses.fields(ExperimentConfig)}


def config_from_dict(data: dict, experiment: str | None = None) -> ExperimentConfig:
    """Build a config from a parsed JSON document.

    ``experiment`` (from the CLI subcommand) fills in the experiment when
    the document omits it and must agree with it otherwise.
    """
    if not isinstance(data, dict):
        raise ConfigError("config must be a JSON object")
    data = dict(data)
    unknown = sorted(set(data) - _TOP_KEYS)
    if unknown:
        raise ConfigError(f"unknown config key(s): {', '.join(unknown)}")
    exp = data.pop("experiment", experiment)
    if exp is None:
        raise ConfigError("config does not name an experiment")
    if experiment is not None and exp != experiment:
        raise ConfigError(f"config is for {exp!r} but {experiment!r} was requested")
    if exp not in EXPERIMENTS:
        raise ConfigError(f"unknown experiment {exp!r}")

    kwargs = dict(_DEFAULTS[exp])
    full = bool(data.get("full_scale", False))
    kwargs["n_replicates"] = REPLICATES[exp][1 if full else 0]

    converters = {
        "filters": _tuple_of(str),
        "n_particles": _tuple_of(int),
        "alpha": _alpha,
        "alpha_grid": _tuple_of(float),
        "n_replicates": int, "seed": int, "spin_up_cycles": int, "n_cycles": int,
        "obs_every": int, "threads": int, "output_dir": str, "resampler": str,
        "full_scale": bool,
    }
    try:
        for key, value in data.items():
            if key == "linear":
                kwargs[key] = _block(LinearModelParams, value, "linear")
            elif key == "snyder":
                kwargs[key] = _block(SnyderSettings, value, "snyder",
                                     n_x=_tuple_of(int), likelihood_var=float)
            elif key == "lorenz63":
                kwargs[key] = _lorenz_block(value)
            else:
                kwargs[key] = converters[key](value)
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"bad config value: {exc}") from exc
    return ExperimentConfig(experiment=exp, **kwargs)


def _lorenz_block(value):
    if not isinstance(value, dict):
        raise ConfigError("lorenz63 must be a JSON object")
    model_keys = {f.name for f in dataclasses.fields(Lorenz63Params)}
    model = {k: v for k, v in value.items() if k in model_keys}
    rest = {k: v for k, v in value.items() if k not in model_keys}
    if "model" in rest:
        raise ConfigError("unknown key(s) in lorenz63: model")
    params = _block(Lorenz63Params, model, "lorenz63", q_diag=_tuple_of(float))
    return _block(LorenzSettings, {**rest, "model": params}, "lorenz63",
                  x0_ref=_tuple_of(float))


def load_config(path, experiment: str | None = None) -> ExperimentConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON: {exc}") from exc
    return config_from_dict(data, experiment)


def default_config(experiment: str, **overrides) -> ExperimentConfig:
    """Defaults for ``experiment`` with fields replaced by ``overrides``
    (already-typed values, not JSON)."""
    cfg = config_from_dict({}, experiment)
    return cfg.replace(**overrides) if overrides else cfg

"""Seeded batch runners for the collapse, linear and Lorenz '63 experiments.

Stream layout for a replicate r under a run seed:

* ``r``                        observation noise, shared by every filter
* ``2**62 + r``                initial ensemble, shared by every filter
* ``2**63 + slot * 2**40 + r`` filter-internal noise (forecast forcing,
  resampling offsets, EnKF perturbations); both particle filters use slot 0
  so that alpha = 0 reproduces the classical filter draw for draw

Line-search replicates are shifted by ``LINE_SEARCH_OFFSET`` so they never
reuse evaluation seeds.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .config import ExperimentConfig
from .diagnostics import (
    MAX_WEIGHT_EDGES,
    CycleRecord,
    Histogram,
    effective_ensemble_size,
    histogram,
    max_weight,
    rms_error,
    tau,
)
from .ensemble import RandomSource, weighted_mean, weighted_variance
from .errors import DriftFilterError
from .filters import (
    RESAMPLERS,
    ClassicalPF,
    EnKF,
    ModifiedPF,
    ObservationModel,
    enkf_analysis,
    pf_analysis,
)
from .models import forecast_ensemble, linear_forecast_step, linear_truth, rk4_propagate
from .potential import StepParams

INIT_STREAM = 1 << 62
FILTER_STREAM = 1 << 63
SLOT_STRIDE = 1 << 40
LINE_SEARCH_OFFSET = 1 << 32
SNYDER_NX_STRIDE = 1 << 32
FILTER_SLOT = {"classical_pf": 0, "modified_pf": 0, "enkf": 1}


def obs_stream(replicate: int) -> int:
    return replicate


def init_stream(replicate: int) -> int:
    return INIT_STREAM + replicate


def filter_stream(label: str, replicate: int) -> int:
    return FILTER_STREAM + FILTER_SLOT[label] * SLOT_STRIDE + replicate


def make_filter(label: str, alpha: float = 0.0):
    if label == "classical_pf":
        return ClassicalPF()
    if label == "modified_pf":
        return ModifiedPF(StepParams(alpha=alpha))
    if label == "enkf":
        return EnKF()
    raise ValueError(f"unknown filter {label!r}")


def _map(fn, items, threads):
    items = list(items)
    if threads <= 1:
        return [fn(i) for i in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


@dataclass(frozen=True)
class SummaryStats:
    mean: float
    median: float
    std: float
    n: int

    @classmethod
    def of(cls, sample) -> "SummaryStats":
        s = np.asarray(sample, dtype=float)
        if s.size == 0:
            return cls(math.nan, math.nan, math.nan, 0)
        std = float(np.std(s, ddof=1)) if s.size > 1 else 0.0
        return cls(float(np.mean(s)), float(np.median(s)), std, int(s.size))


# Collapse experiment --------------------------------------------------------

@dataclass
class SnyderResult:
    max_weights: dict  # (filter label, n_x) -> array over trials
    histograms: dict   # (filter label, n_x) -> Histogram

    def frac_above(self, label: str, n_x: int, level: float = 0.9) -> float:
        return float(np.mean(self.max_weights[(label, n_x)] > level))


def snyder_trial(seed, trial, n_x, n_particles, om, kinds, nx_index=0):
    """Max weight of each filter for one draw of truth, observation and prior."""
    rng = RandomSource(seed, obs_stream(trial + nx_index * SNYDER_NX_STRIDE))
    truth = rng.standard_normal(n_x)
    y = truth + rng.standard_normal(n_x)
    particles = rng.standard_normal((n_particles, n_x))
    return [max_weight(pf_analysis(particles, y, om, k).weights) for k in kinds]


def run_snyder(cfg: ExperimentConfig) -> SnyderResult:
    n_particles = cfg.n_particles[0]
    alpha = cfg.alpha_for(n_particles)
    kinds = [make_filter(label, alpha) for label in cfg.filters]
    maxw, hists = {}, {}
    for ix, n_x in enumerate(cfg.snyder.n_x):
        om = ObservationModel.scalar(np.eye(n_x), cfg.snyder.likelihood_var)
        rows = _map(lambda t: snyder_trial(cfg.seed, t, n_x, n_particles, om, kinds, ix),
                    range(cfg.n_replicates), cfg.threads)
        table = np.array(rows, dtype=float).reshape(cfg.n_replicates, len(kinds))
        for j, label in enumerate(cfg.filters):
            maxw[(label, n_x)] = table[:, j]
            hists[(label, n_x)] = histogram(table[:, j], MAX_WEIGHT_EDGES)
    return SnyderResult(maxw, hists)


# Linear experiment ----------------------------------------------------------

@dataclass(frozen=True)
class LinearRow:
    filter: str
    step: int
    time: float
    truth: float
    posterior_mean: float
    posterior_var: float


def run_linear(cfg: ExperimentConfig, replicate: int = 0) -> list:
    """Assimilate at every step n = 0..T/dt, resampling then Euler-forecasting
    between steps. Returns one :class:`LinearRow` per filter and step."""
    p = cfg.linear
    n_particles = cfg.n_particles[0]
    om = ObservationModel.scalar([[1.0]], p.likelihood_var)
    resample = RESAMPLERS[cfg.resampler]

    obs_rng = RandomSource(cfg.seed, obs_stream(replicate))
    truths = [linear_truth(p, n) for n in range(p.n_steps + 1)]
    ys = [np.array([t + p.sigma_obs * obs_rng.standard_normal()]) for t in truths]
    init_rng = RandomSource(cfg.seed, init_stream(replicate))
    x0 = p.prior_mean + p.prior_std * init_rng.standard_normal((n_particles, 1))

    rows = []
    for label in cfg.filters:
        kind = make_filter(label, cfg.alpha_for(n_particles))
        rng = RandomSource(cfg.seed, filter_stream(label, replicate))
        x = x0
        for n in range(p.n_steps + 1):
            w = pf_analysis(x, ys[n], om, kind).weights
            rows.append(LinearRow(label, n, n * p.dt, truths[n],
                                  float(weighted_mean(x, w)[0]),
                                  float(weighted_variance(x, w)[0])))
            if n < p.n_steps:
                x = linear_forecast_step(resample(x, w, rng), p)
    return rows


# Lorenz '63 cycling ---------------------------------------------------------

@dataclass
class ReplicateRun:
    replicate: int
    filter: str
    n_particles: int
    records: list = field(default_factory=list)
    failure: str | None = None
    failed_cycle: int | None = None

    @property
    def ok(self) -> bool:
        return self.failure is None

    def avg_rms(self, spin_up: int) -> float:
        """Mean per-cycle analysis RMS over cycles after the spin-up."""
        return float(np.mean([r.analysis_rms for r in self.records[spin_up:]]))

    def mean_of(self, attr: str) -> float:
        return float(np.mean([getattr(r, attr) for r in self.records]))


def reference_and_observations(cfg: ExperimentConfig, replicate: int):
    """Reference states at each assimilation instant and their observations."""
    s = cfg.lorenz63
    om = ObservationModel.scalar([[1.0, 0.0, 0.0]], s.obs_var)
    rng = RandomSource(cfg.seed, obs_stream(replicate))
    ref = np.array(s.x0_ref, dtype=float)
    refs, obs = [], []
    for c in range(cfg.n_cycles):
        if c:
            ref = rk4_propagate(ref, s.model, cfg.obs_every)
        refs.append(ref)
        obs.append(om.H @ ref + om.noise(rng))
    return np.array(refs), obs, om


def initial_ensemble(cfg: ExperimentConfig, replicate: int, n_particles: int) -> np.ndarray:
    s = cfg.lorenz63
    rng = RandomSource(cfg.seed, init_stream(replicate))
    noise = rng.standard_normal((n_particles, 3))
    return np.asarray(s.x0_ref, dtype=float) + math.sqrt(s.init_var) * noise


def run_filter_cycles(cfg, replicate, label, kind, x0, refs, obs, om) -> ReplicateRun:
    """Cycle one filter: analysis, diagnostics, resample (PFs), forecast."""
    run = ReplicateRun(replicate, label, x0.shape[0])
    rng = RandomSource(cfg.seed, filter_stream(label, replicate))
    resample = RESAMPLERS[cfg.resampler]
    model = cfg.lorenz63.model
    x = x0
    cycle = 0
    try:
        for cycle in range(cfg.n_cycles):
            if isinstance(kind, EnKF):
                res = enkf_analysis(x, obs[cycle], om, rng)
                w = res.weights
                xa = res.ensemble
                estimate = xa.mean(axis=0)
            else:
                w = pf_analysis(x, obs[cycle], om, kind).weights
                estimate = weighted_mean(x, w)
                xa = resample(x, w, rng)
            run.records.append(CycleRecord(
                cycle + 1, max_weight(w), tau(w), effective_ensemble_size(w),
                rms_error(estimate, refs[cycle]), label))
            if cycle < cfg.n_cycles - 1:
                x = forecast_ensemble(xa, model, cfg.obs_every, rng)
    except DriftFilterError as exc:
        run.failure = f"{type(exc).__name__}: {exc}"
        run.failed_cycle = cycle + 1
    return run


def run_lorenz_replicate(cfg: ExperimentConfig, replicate: int, n_particles: int,
                         filters=None) -> list:
    """All requested filters on one shared reference, observation record and
    initial ensemble. ``filters`` is a list of (label, kind) pairs."""
    if filters is None:
        alpha = cfg.alpha_for(n_particles)
        filters = [(label, make_filter(label, alpha)) for label in cfg.filters]
    refs, obs, om = reference_and_observations(cfg, replicate)
    x0 = initial_ensemble(cfg, replicate, n_particles)
    return [run_filter_cycles(cfg, replicate, label, kind, x0, refs, obs, om)
            for label, kind in filters]


@dataclass
class LorenzResult:
    runs: list  # ReplicateRun, ordered by (n_particles, replicate, filter)
    spin_up: int

    def select(self, label: str, n_particles: int, ok_only: bool = True) -> list:
        return [r for r in self.runs
                if r.filter == label and r.n_particles == n_particles and (r.ok or not ok_only)]

    def per_replicate(self, label: str, n_particles: int, metric: str) -> np.ndarray:
        runs = self.select(label, n_particles)
        if metric == "avg_rms":
            return np.array([r.avg_rms(self.spin_up) for r in runs])
        return np.array([r.mean_of(metric) for r in runs])

    def summary(self, label: str, n_particles: int, metric: str) -> SummaryStats:
        return SummaryStats.of(self.per_replicate(label, n_particles, metric))

    @property
    def failures(self) -> list:
        return [r for r in self.runs if not r.ok]

    def all_failed(self) -> bool:
        return bool(self.runs) and not any(r.ok for r in self.runs)


def run_lorenz_cycling(cfg: ExperimentConfig, replicates=None) -> LorenzResult:
    if replicates is None:
        replicates = range(cfg.n_replicates)
    runs = []
    for n in cfg.n_particles:
        batches = _map(lambda r: run_lorenz_replicate(cfg, r, n), replicates, cfg.threads)
        for batch in batches:
            runs.extend(batch)
    return LorenzResult(runs, cfg.spin_up_cycles)


# Alpha line search ----------------------------------------------------------

@dataclass(frozen=True)
class AlphaRow:
    alpha: float
    mean_avg_rms: float
    std_avg_rms: float
    n_replicates: int
    n_failed: int = 0


@dataclass
class LineSearchResult:
    best_alpha: float
    table: list  # AlphaRow per grid point, grid order


def line_search_alpha(cfg: ExperimentConfig, grid=None) -> LineSearchResult:
    """Mean post-spin-up RMS of the modified filter for each alpha on a shared
    set of line-search replicates; ties go to the smallest alpha."""
    grid = tuple(cfg.alpha_grid if grid is None else grid)
    if not grid:
        raise ValueError("alpha grid is empty")
    n = cfg.n_particles[0]
    replicates = [LINE_SEARCH_OFFSET + r for r in range(cfg.n_replicates)]
    table = []
    for alpha in grid:
        filters = [("modified_pf", make_filter("modified_pf", alpha))]
        batches = _map(lambda r: run_lorenz_replicate(cfg, r, n, filters)[0],
                       replicates, cfg.threads)
        good = [b.avg_rms(cfg.spin_up_cycles) for b in batches if b.ok]
        stats = SummaryStats.of(good)
        table.append(AlphaRow(alpha, stats.mean, stats.std, stats.n, len(batches) - stats.n))
    ranked = [row for row in table if row.n_replicates > 0]
    if not ranked:
        return LineSearchResult(math.nan, table)
    best = min(ranked, key=lambda row: (row.mean_avg_rms, row.alpha))
    return LineSearchResult(best.alpha, table)


def backend() -> str:
    return kernels.BACKEND

"""Truth and forecast dynamics for the twin experiments.

Two model families: scalar exponential decay (exact truth, explicit-Euler
forecast, which deliberately carries model bias) and Lorenz '63 integrated
with classical RK4, with optional additive Gaussian forcing per step.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .ensemble import RandomSource
from .errors import NonFiniteError
from .filters import ObservationModel


@dataclass(frozen=True)
class LinearModelParams:
    lam: float = 0.5
    dt: float = 0.1
    x0_true: float = 10.0
    sigma_obs: float = 0.1
    prior_mean: float = 8.0
    prior_std: float = 2.0
    horizon: float = 2.0
    likelihood_var: float = 1.0

    def __post_init__(self):
        vals = (self.lam, self.dt, self.x0_true, self.sigma_obs, self.prior_mean,
                self.prior_std, self.horizon, self.likelihood_var)
        if not all(math.isfinite(v) for v in vals):
            raise ValueError("linear model parameters must be finite")
        if self.lam <= 0 or self.dt <= 0 or self.horizon <= 0 or self.likelihood_var <= 0:
            raise ValueError("lam, dt, horizon and likelihood_var must be positive")
        if self.sigma_obs < 0 or self.prior_std < 0:
            raise ValueError("sigma_obs and prior_std must be nonnegative")
        if self.lam * self.dt >= 1.0:
            raise ValueError("Euler forecast needs lam * dt < 1")

    @property
    def n_steps(self) -> int:
        return int(round(self.horizon / self.dt))


def linear_truth(p: LinearModelParams, n: int) -> float:
    """x0 * exp(-lam * dt * n), evaluated directly."""
    if n < 0 or n * p.dt > p.horizon * (1 + 1e-12):
        raise ValueError(f"step {n} outside [0, horizon]")
    return p.x0_true * math.exp(-p.lam * p.dt * n)


def linear_forecast_step(x, p: LinearModelParams):
    """One explicit Euler step; works on scalars and arrays."""
    return x - p.lam * p.dt * x


@dataclass(frozen=True)
class Lorenz63Params:
    sigma: float = 10.0
    rho: float = 28.0
    b: float = 8.0 / 3.0
    dt: float = 0.01
    q_diag: tuple = (2.0, 12.13, 12.31)

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        if len(self.q_diag) != 3 or any(q < 0 for q in self.q_diag):
            raise ValueError("q_diag must be three nonnegative variances")

    @property
    def increment_std(self) -> np.ndarray:
        """Per-step standard deviation of the additive forcing, sqrt(dt * q)."""
        return np.sqrt(self.dt * np.asarray(self.q_diag, dtype=float))


LORENZ_REFERENCE_IC = (1.508870, -1.531271, 25.46091)


def lorenz_rhs(state, p: Lorenz63Params = Lorenz63Params()) -> np.ndarray:
    x, y, z = np.asarray(state, dtype=float)
    return np.array([p.sigma * (y - x), p.rho * x - x * z - y, x * y - p.b * z])


def _as_block(state):
    s = np.asarray(state, dtype=float)
    if s.shape[-1] != 3 or s.ndim > 2:
        raise ValueError(f"Lorenz '63 states have 3 components, got shape {s.shape}")
    return np.ascontiguousarray(s.reshape(-1, 3)), s.shape


def _checked(out):
    if not np.all(np.isfinite(out)):
        raise NonFiniteError("Lorenz '63 integration produced NaN or Inf")
    return out


def rk4_step(state, p: Lorenz63Params = Lorenz63Params()) -> np.ndarray:
    return rk4_propagate(state, p, 1)


def rk4_propagate(states, p: Lorenz63Params, n_steps: int) -> np.ndarray:
    """``n_steps`` deterministic RK4 steps on one state or an (N, 3) block."""
    block, shape = _as_block(states)
    out = kernels.rk4_propagate(block, p.sigma, p.rho, p.b, p.dt, int(n_steps))
    return _checked(out).reshape(shape)


def forecast_step_stochastic(state, p: Lorenz63Params, rng: RandomSource) -> np.ndarray:
    """RK4 step plus sqrt(dt * q) * xi with xi ~ N(0, I_3) drawn from ``rng``."""
    return forecast_ensemble(state, p, 1, rng)


def forecast_ensemble(states, p: Lorenz63Params, n_steps: int, rng: RandomSource
                      ) -> np.ndarray:
    """Stochastic forecast of an ensemble over ``n_steps`` integration steps.

    Noise is drawn as one (n_steps, N, 3) standard normal block, so the
    stream is consumed step-major, then particle, then component.
    """
    block, shape = _as_block(states)
    xi = rng.standard_normal((int(n_steps), block.shape[0], 3))
    increments = xi * p.increment_std
    out = kernels.rk4_propagate_noisy(block, p.sigma, p.rho, p.b, p.dt, increments)
    return _checked(out).reshape(shape)


def observe(state, om: ObservationModel, rng: RandomSource) -> np.ndarray:
    """Synthetic observation H x + eps with eps ~ N(0, R)."""
    x = np.atleast_1d(np.asarray(state, dtype=float))
    return om.H @ x + om.noise(rng)

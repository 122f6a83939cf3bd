"""Analysis updates: classical and potential-adjusted particle filters,
systematic and multinomial resampling, and the stochastic EnKF."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from . import kernels
from .ensemble import (
    RandomSource,
    as_ensemble,
    as_weights,
    normalize_log_weights,
    uniform_weights,
)
from .errors import (
    AllZeroError,
    DimensionMismatchError,
    SingularInnovationError,
    TooFewParticlesError,
)
from .potential import DEFAULT_POTENTIAL, PotentialSpec, StepParams, adjust_weights

COND_LIMIT = 1e12


def psd_sqrt(m: np.ndarray) -> np.ndarray:
    """A matrix L with L @ L.T == m, for symmetric positive semidefinite m."""
    try:
        return np.linalg.cholesky(m)
    except np.linalg.LinAlgError:
        vals, vecs = np.linalg.eigh(m)
        return vecs * np.sqrt(np.clip(vals, 0.0, None))


@dataclass(frozen=True)
class ObservationModel:
    """Linear observation operator H (N_y x N_x) with error covariance R."""

    H: np.ndarray
    R: np.ndarray
    _R_sqrt: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        H = np.atleast_2d(np.asarray(self.H, dtype=float))
        R = np.atleast_2d(np.asarray(self.R, dtype=float))
        if R.shape != (H.shape[0], H.shape[0]):
            raise DimensionMismatchError(f"R has shape {R.shape} for H of shape {H.shape}")
        if not (np.all(np.isfinite(H)) and np.all(np.isfinite(R))):
            raise ValueError("H and R must be finite")
        if not np.allclose(R, R.T):
            raise ValueError("R must be symmetric")
        if np.linalg.eigvalsh(R).min() < -1e-12 * max(1.0, np.abs(R).max()):
            raise ValueError("R must be positive semidefinite")
        object.__setattr__(self, "H", H)
        object.__setattr__(self, "R", R)
        object.__setattr__(self, "_R_sqrt", psd_sqrt(R))

    @classmethod
    def scalar(cls, H, r: float):
        """Model with R = r * I."""
        H = np.atleast_2d(np.asarray(H, dtype=float))
        return cls(H, r * np.eye(H.shape[0]))

    @property
    def obs_dim(self) -> int:
        return self.H.shape[0]

    @property
    def state_dim(self) -> int:
        return self.H.shape[1]

    def noise(self, rng: RandomSource, n: int | None = None) -> np.ndarray:
        """Draw from N(0, R): shape (N_y,) or (n, N_y), rows in draw order."""
        if n is None:
            return self._R_sqrt @ rng.standard_normal(self.obs_dim)
        return rng.standard_normal((n, self.obs_dim)) @ self._R_sqrt.T


# Filter kinds ---------------------------------------------------------------

@dataclass(frozen=True)
class ClassicalPF:
    label = "classical_pf"


@dataclass(frozen=True)
class ModifiedPF:
    step: StepParams = StepParams(alpha=0.5)
    potential: PotentialSpec = DEFAULT_POTENTIAL
    label = "modified_pf"


@dataclass(frozen=True)
class EnKF:
    label = "enkf"


@dataclass(frozen=True)
class AnalysisResult:
    ensemble: np.ndarray
    weights: np.ndarray
    raw_weights: np.ndarray


def _innovations(ens, y, om):
    x = as_ensemble(ens)
    y = np.atleast_1d(np.asarray(y, dtype=float))
    if x.shape[1] != om.state_dim or y.shape[0] != om.obs_dim:
        raise DimensionMismatchError(
            f"ensemble dim {x.shape[1]}, obs dim {y.shape[0]}, H shape {om.H.shape}"
        )
    return x, y - x @ om.H.T


def log_likelihoods(ens, y, om: ObservationModel) -> np.ndarray:
    """Gaussian log-likelihood of ``y`` for each particle, constants dropped."""
    _, innov = _innovations(ens, y, om)
    try:
        factor = scipy.linalg.cho_factor(om.R, lower=True)
    except np.linalg.LinAlgError as exc:
        raise AllZeroError("observation covariance R is singular") from exc
    white = scipy.linalg.solve_triangular(factor[0], innov.T, lower=True)
    return -0.5 * np.sum(white * white, axis=0)


def likelihood_weights(ens, y, om: ObservationModel) -> np.ndarray:
    return normalize_log_weights(log_likelihoods(ens, y, om))


def pf_analysis(ens, y, om: ObservationModel, kind, rng: RandomSource | None = None
                ) -> AnalysisResult:
    """Particle filter weight update; particles are passed through untouched.

    ``rng`` is accepted for interface symmetry with :func:`enkf_analysis`;
    neither particle filter consumes randomness during the update.
    """
    x = as_ensemble(ens)
    raw = likelihood_weights(x, y, om)
    if isinstance(kind, ClassicalPF):
        return AnalysisResult(x, raw, raw)
    if isinstance(kind, ModifiedPF):
        return AnalysisResult(x, adjust_weights(raw, kind.potential, kind.step), raw)
    raise TypeError(f"pf_analysis needs ClassicalPF or ModifiedPF, got {kind!r}")


# Resampling -----------------------------------------------------------------

def _cdf(w):
    cdf = np.cumsum(w)
    cdf /= cdf[-1]
    cdf[-1] = 1.0
    return cdf


def systematic_indices(w, offset: float) -> np.ndarray:
    """Indices selected by the comb ``offset + k/N``, with offset in [0, 1/N)."""
    w = as_weights(w)
    return kernels.systematic_indices(_cdf(w), float(offset))


def resample_systematic(ens, w, rng: RandomSource) -> np.ndarray:
    """Single-offset comb resampling; draws exactly one uniform from ``rng``."""
    x = as_ensemble(ens)
    w = as_weights(w)
    if w.shape[0] != x.shape[0]:
        raise DimensionMismatchError(f"{w.shape[0]} weights for {x.shape[0]} particles")
    offset = rng.uniform() / x.shape[0]
    return as_ensemble(x[systematic_indices(w, offset)])


def resample_multinomial(ens, w, rng: RandomSource) -> np.ndarray:
    """N independent categorical draws by inverse CDF; N uniforms consumed."""
    x = as_ensemble(ens)
    w = as_weights(w)
    if w.shape[0] != x.shape[0]:
        raise DimensionMismatchError(f"{w.shape[0]} weights for {x.shape[0]} particles")
    idx = np.searchsorted(_cdf(w), rng.uniform(x.shape[0]), side="right")
    return as_ensemble(x[np.minimum(idx, x.shape[0] - 1)])


RESAMPLERS = {
    "systematic": resample_systematic,
    "multinomial": resample_multinomial,
}


# Ensemble Kalman filter -----------------------------------------------------

def sample_covariance(ens) -> np.ndarray:
    x = np.asarray(ens, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    if x.shape[0] < 2:
        raise TooFewParticlesError("sample covariance needs at least 2 particles")
    dev = x - x.mean(axis=0)
    return (dev.T @ dev) / (x.shape[0] - 1)


def kalman_gain(P, om: ObservationModel) -> np.ndarray:
    """K = P H^T (H P H^T + R)^{-1}, via a Cholesky solve of the innovation covariance."""
    P = np.atleast_2d(np.asarray(P, dtype=float))
    H = om.H
    if P.shape != (om.state_dim, om.state_dim):
        raise DimensionMismatchError(f"P has shape {P.shape}, H has shape {H.shape}")
    HP = H @ P
    S = HP @ H.T + om.R
    S = 0.5 * (S + S.T)
    if not np.all(np.isfinite(S)) or np.linalg.cond(S) > COND_LIMIT:
        raise SingularInnovationError("innovation covariance is numerically singular")
    try:
        factor = scipy.linalg.cho_factor(S, lower=True)
    except np.linalg.LinAlgError as exc:
        raise SingularInnovationError("innovation covariance is not positive definite") from exc
    # S is symmetric, so K^T = S^{-1} H P.
    return scipy.linalg.cho_solve(factor, HP).T


def enkf_analysis(ens, y, om: ObservationModel, rng: RandomSource | None = None,
                  perturbations=None) -> AnalysisResult:
    """Stochastic EnKF update with perturbed observations.

    Member i receives ``K (y - (H x_i + eta_i))``. The eta_i are drawn from
    ``rng`` in member order unless ``perturbations`` (N_e x N_y) is given.
    """
    x, innov = _innovations(ens, y, om)
    n = x.shape[0]
    if perturbations is None:
        if rng is None:
            raise ValueError("enkf_analysis needs rng or explicit perturbations")
        eta = om.noise(rng, n)
    else:
        eta = np.asarray(perturbations, dtype=float).reshape(n, om.obs_dim)
    K = kalman_gain(sample_covariance(x), om)
    xa = x + (innov - eta) @ K.T
    w = uniform_weights(n)
    return AnalysisResult(as_ensemble(xa), w, w)

"""Ensembles, weight vectors and the seeded random source.

Ensembles and weight vectors are plain float64 arrays that have passed
validation; :func:`as_ensemble` and :func:`as_weights` return read-only
copies so downstream code cannot mutate a caller's data.

Random numbers come from :class:`RandomSource`, a Philox-4x64 counter-based
generator keyed by ``(seed, stream_id)``. Gaussian variates are produced by
numpy's ziggurat transform of that bit stream, which is deterministic for a
given numpy release.
"""

from __future__ import annotations

import numpy as np

from .errors import (
    AllZeroError,
    DimensionMismatchError,
    NonFiniteError,
    TooFewParticlesError,
)

WEIGHT_SUM_TOL = 1e-12

_U64 = 1 << 64


def _frozen(a):
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


def as_ensemble(particles) -> np.ndarray:
    """Validate an (N_e, N_x) particle matrix and return a read-only copy.

    A 1-d input is read as N_e scalar particles.
    """
    x = np.asarray(particles, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    if x.ndim != 2:
        raise DimensionMismatchError(f"ensemble must be 2-d, got shape {x.shape}")
    if x.shape[0] < 2:
        raise TooFewParticlesError(f"need at least 2 particles, got {x.shape[0]}")
    if x.shape[1] < 1:
        raise DimensionMismatchError("state dimension must be at least 1")
    if not np.all(np.isfinite(x)):
        raise NonFiniteError("ensemble contains NaN or Inf")
    return _frozen(x)


def as_weights(weights, tol: float = WEIGHT_SUM_TOL) -> np.ndarray:
    """Validate a point on the probability simplex and return a read-only copy."""
    w = np.asarray(weights, dtype=float)
    if w.ndim != 1:
        raise DimensionMismatchError(f"weights must be 1-d, got shape {w.shape}")
    if not np.all(np.isfinite(w)):
        raise NonFiniteError("weights contain NaN or Inf")
    if np.any(w < 0.0) or np.any(w > 1.0):
        raise ValueError("weights must lie in [0, 1]")
    total = w.sum()
    if abs(total - 1.0) > tol:
        raise ValueError(f"weights sum to {total!r}, not 1")
    return _frozen(w)


def uniform_weights(n: int) -> np.ndarray:
    return _frozen(np.full(n, 1.0 / n))


def normalize_weights(raw) -> np.ndarray:
    """Divide nonnegative raw weights by their sum.

    Raises
    ------
    NonFiniteError
        If any entry is NaN or Inf.
    AllZeroError
        If the entries sum to zero (likelihood underflow in the linear
        domain; use :func:`normalize_log_weights` instead).
    """
    r = np.asarray(raw, dtype=float)
    if r.ndim != 1:
        raise DimensionMismatchError(f"raw weights must be 1-d, got shape {r.shape}")
    if not np.all(np.isfinite(r)):
        raise NonFiniteError("raw weights contain NaN or Inf")
    if np.any(r < 0.0):
        raise ValueError("raw weights must be nonnegative")
    total = r.sum()
    if total <= 0.0:
        raise AllZeroError("raw weights sum to zero")
    return _frozen(r / total)


def normalize_log_weights(log_raw) -> np.ndarray:
    """Normalize weights given as logs, shifting by the maximum first."""
    lw = np.asarray(log_raw, dtype=float)
    if np.any(np.isnan(lw)) or np.any(lw == np.inf):
        raise NonFiniteError("log weights contain NaN or +Inf")
    top = lw.max()
    if top == -np.inf:
        raise AllZeroError("every log weight is -Inf")
    return normalize_weights(np.exp(lw - top))


def _check_pair(ens, w):
    x = np.asarray(ens, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    w = np.asarray(w, dtype=float)
    if w.ndim != 1 or w.shape[0] != x.shape[0]:
        raise DimensionMismatchError(
            f"{w.shape[0] if w.ndim == 1 else w.shape} weights for {x.shape[0]} particles"
        )
    return x, w


def weighted_mean(ens, w) -> np.ndarray:
    x, w = _check_pair(ens, w)
    return w @ x


def weighted_variance(ens, w) -> np.ndarray:
    """Componentwise population variance about the weighted mean."""
    x, w = _check_pair(ens, w)
    dev = x - w @ x
    return w @ (dev * dev)


class RandomSource:
    """Deterministic stream of random draws keyed by ``(seed, stream_id)``.

    Two sources with the same key yield identical sequences; sources with
    different ``stream_id`` use distinct Philox keys and are independent.
    A source is single-owner mutable state: do not share one across threads.
    """

    def __init__(self, seed: int, stream_id: int = 0):
        if not (0 <= seed < _U64 and 0 <= stream_id < _U64):
            raise ValueError("seed and stream_id must be unsigned 64-bit integers")
        self.seed = int(seed)
        self.stream_id = int(stream_id)
        key = np.array([self.seed, self.stream_id], dtype=np.uint64)
        self.generator = np.random.Generator(np.random.Philox(key=key))

    def __repr__(self):
        return f"RandomSource(seed={self.seed}, stream_id={self.stream_id})"

    def uniform(self, size=None):
        """Draws from [0, 1)."""
        return self.generator.random(size)

    def standard_normal(self, size=None):
        return self.generator.standard_normal(size)

"""Collapse and accuracy diagnostics for weighted ensembles."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .ensemble import as_weights
from .errors import BadEdgesError, DimensionMismatchError, NonFiniteError

LOG_FLOOR = 1e-300
TAU_DDOF = 1


@dataclass(frozen=True)
class CycleRecord:
    cycle_index: int
    max_weight: float
    tau: float
    n_eff: float
    analysis_rms: float
    filter_kind: str


def max_weight(w) -> float:
    return float(np.max(as_weights(w)))


def tau(w) -> float:
    """Standard deviation (divisor N-1) of the log weights.

    Zero weights are floored at 1e-300 before taking logs. The statistic is
    invariant to rescaling, so unnormalized positive weights are accepted.
    """
    w = np.asarray(w, dtype=float)
    if w.ndim != 1 or w.shape[0] < 2:
        raise DimensionMismatchError("tau needs a 1-d vector of at least 2 weights")
    return float(np.std(np.log(np.maximum(w, LOG_FLOOR)), ddof=TAU_DDOF))


def effective_ensemble_size(w) -> float:
    w = as_weights(w)
    return float(1.0 / np.dot(w, w))


def rms_error(estimate, truth) -> float:
    e = np.atleast_1d(np.asarray(estimate, dtype=float))
    t = np.atleast_1d(np.asarray(truth, dtype=float))
    if e.shape != t.shape:
        raise DimensionMismatchError(f"estimate {e.shape} vs truth {t.shape}")
    return float(np.sqrt(np.mean((e - t) ** 2)))


@dataclass(frozen=True)
class Histogram:
    edges: np.ndarray
    counts: np.ndarray
    underflow: int = 0
    overflow: int = 0

    @property
    def total(self) -> int:
        return int(self.counts.sum()) + self.underflow + self.overflow

    def __add__(self, other: "Histogram") -> "Histogram":
        if not np.array_equal(self.edges, other.edges):
            raise BadEdgesError("cannot add histograms with different edges")
        return Histogram(self.edges, self.counts + other.counts,
                         self.underflow + other.underflow, self.overflow + other.overflow)


def uniform_edges(lo: float, hi: float, n_bins: int) -> np.ndarray:
    return np.linspace(lo, hi, n_bins + 1)


MAX_WEIGHT_EDGES = uniform_edges(0.0, 1.0, 50)
RMS_EDGES = uniform_edges(0.0, 12.0, 60)


def histogram(samples, edges) -> Histogram:
    """Bin samples into [e_k, e_{k+1}); the last bin also includes its right edge."""
    edges = np.asarray(edges, dtype=float)
    if edges.ndim != 1 or edges.shape[0] < 2 or np.any(np.diff(edges) <= 0):
        raise BadEdgesError("edges must be a strictly increasing sequence of length >= 2")
    s = np.asarray(samples, dtype=float).ravel()
    if np.any(np.isnan(s)):
        raise NonFiniteError("cannot bin NaN samples")
    under = int(np.count_nonzero(s < edges[0]))
    over = int(np.count_nonzero(s > edges[-1]))
    inside = s[(s >= edges[0]) & (s <= edges[-1])]
    idx = np.searchsorted(edges, inside, side="right") - 1
    idx = np.minimum(idx, edges.shape[0] - 2)
    counts = np.bincount(idx, minlength=edges.shape[0] - 1).astype(np.int64)
    return Histogram(edges, counts, under, over)

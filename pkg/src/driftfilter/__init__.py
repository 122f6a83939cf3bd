"""Particle filters with potential-adjusted weights, a stochastic EnKF
baseline, and a seeded twin-experiment harness."""

from .ensemble import (
    RandomSource,
    as_ensemble,
    as_weights,
    normalize_log_weights,
    normalize_weights,
    weighted_mean,
    weighted_variance,
)
from .filters import (
    AnalysisResult,
    ClassicalPF,
    EnKF,
    ModifiedPF,
    ObservationModel,
    enkf_analysis,
    kalman_gain,
    likelihood_weights,
    pf_analysis,
    resample_multinomial,
    resample_systematic,
    sample_covariance,
)
from .potential import (
    PotentialKind,
    PotentialSpec,
    StepParams,
    adjust_weights,
    diversity,
    morse_energy,
    paper_derivative,
)

__version__ = "0.1.0"

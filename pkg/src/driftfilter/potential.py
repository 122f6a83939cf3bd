"""Energy-based diversity of a weight vector and the weight adjustment step.

The diversity of weights ``w`` under a pair energy ``U`` is the double sum
``(1/N^2) sum_i sum_j U(w_i - w_j)``; clustered weights score higher than
equidistributed ones. :func:`adjust_weights` moves each weight by a single
explicit gradient step of size ``alpha`` against the pair derivative,
optionally clamps to [0, 1] and renormalizes.

Energy and derivative are carried separately in :class:`PotentialSpec`. The
default pairs the Morse energy ``-1/2 exp(-|z|/2)`` with the update kernel
``(1 - exp(-|z|))^2 - 1``. That kernel is even and is not the derivative of
the energy; ``PotentialKind.MORSE_ENERGY`` swaps in the exact (odd)
derivative instead.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import kernels
from .ensemble import as_weights, normalize_weights
from .errors import DegenerateSumError, NonFiniteError


class PotentialKind(enum.Enum):
    PAPER_DERIVATIVE = "paper_derivative"
    MORSE_ENERGY = "morse_energy"
    CUSTOM = "custom"


def _finite(z):
    if not math.isfinite(z):
        raise NonFiniteError(f"non-finite argument {z!r}")


def morse_energy(z: float, amp: float = 0.5, rate: float = 0.5) -> float:
    """Morse pair energy ``-amp * exp(-rate |z|)``; -0.5 at the origin by default."""
    _finite(z)
    return -amp * math.exp(-rate * abs(z))


def morse_derivative(z: float, amp: float = 0.5, rate: float = 0.5) -> float:
    """Exact derivative of :func:`morse_energy` (zero at the cusp)."""
    _finite(z)
    if z == 0.0:
        return 0.0
    return math.copysign(amp * rate * math.exp(-rate * abs(z)), z)


def paper_derivative(z: float) -> float:
    """Update kernel ``(1 - exp(-|z|))^2 - 1``, with range [-1, 0)."""
    _finite(z)
    return (1.0 - math.exp(-abs(z))) ** 2 - 1.0


@dataclass(frozen=True)
class PotentialSpec:
    """Pair energy and update derivative defining the diversity measure.

    ``energy`` and ``derivative`` take scalars. For ``CUSTOM`` specs they
    must also accept numpy arrays elementwise, because the pairwise sums are
    evaluated on whole difference matrices.
    """

    kind: PotentialKind = PotentialKind.PAPER_DERIVATIVE
    energy: Callable[[float], float] | None = None
    derivative: Callable[[float], float] | None = None
    params: tuple = (0.5, 0.5)

    def __post_init__(self):
        if self.kind is PotentialKind.CUSTOM:
            if self.energy is None or self.derivative is None:
                raise ValueError("custom potentials need both energy and derivative")
            return
        amp, rate = self.params
        object.__setattr__(self, "energy", lambda z: morse_energy(z, amp, rate))
        if self.kind is PotentialKind.PAPER_DERIVATIVE:
            object.__setattr__(self, "derivative", paper_derivative)
        else:
            object.__setattr__(self, "derivative", lambda z: morse_derivative(z, amp, rate))

    @classmethod
    def custom(cls, energy, derivative):
        return cls(PotentialKind.CUSTOM, energy, derivative, ())


DEFAULT_POTENTIAL = PotentialSpec()


@dataclass(frozen=True)
class StepParams:
    alpha: float = 0.0
    project: bool = True
    renormalize: bool = True

    def __post_init__(self):
        if not (self.alpha >= 0.0 and math.isfinite(self.alpha)):
            raise ValueError(f"alpha must be finite and >= 0, got {self.alpha!r}")


def derivative_sums(w, spec: PotentialSpec = DEFAULT_POTENTIAL) -> np.ndarray:
    """Return s with ``s_i = sum_j derivative(w_j - w_i)``, j = i included."""
    w = np.ascontiguousarray(w, dtype=float)
    if spec.kind is PotentialKind.CUSTOM:
        out = np.empty(w.shape[0])
        for i in range(w.shape[0]):
            out[i] = np.sum(spec.derivative(w - w[i]))
        return out
    code = (kernels.PAPER_DERIVATIVE if spec.kind is PotentialKind.PAPER_DERIVATIVE
            else kernels.MORSE_DERIVATIVE)
    amp, rate = spec.params
    return kernels.derivative_row_sums(w, code, float(amp), float(rate))


def diversity(w, spec: PotentialSpec = DEFAULT_POTENTIAL) -> float:
    """Mean pair energy over all ordered pairs of weights."""
    w = np.ascontiguousarray(as_weights(w))
    n = w.shape[0]
    if spec.kind is PotentialKind.CUSTOM:
        total = sum(float(np.sum(spec.energy(w[i] - w))) for i in range(n))
    else:
        amp, rate = spec.params
        total = kernels.energy_pair_sum(w, float(amp), float(rate))
    return total / (n * n)


def gradient_step(w, alpha: float, spec: PotentialSpec = DEFAULT_POTENTIAL) -> np.ndarray:
    """Unprojected step ``w_i - (alpha/N) sum_j derivative(w_j - w_i)``."""
    w = np.asarray(w, dtype=float)
    return w - (alpha / w.shape[0]) * derivative_sums(w, spec)


def adjust_weights(w, spec: PotentialSpec = DEFAULT_POTENTIAL,
                   step: StepParams = StepParams()) -> np.ndarray:
    """Adjust Bayes weights by one gradient step on the diversity measure.

    With ``alpha == 0`` the input is returned unchanged. Otherwise the step is
    clamped to [0, 1] if ``step.project`` and divided by its sum if
    ``step.renormalize``. Without renormalization the result is generally not
    on the simplex and is returned unvalidated.

    Raises
    ------
    DegenerateSumError
        If renormalization is requested and every clamped weight is zero.
    """
    w = as_weights(w)
    if step.alpha == 0.0:
        return w
    v = gradient_step(w, step.alpha, spec)
    if not np.all(np.isfinite(v)):
        raise NonFiniteError("adjusted weights are not finite")
    if step.project:
        v = np.clip(v, 0.0, 1.0)
    if not step.renormalize:
        return v
    if v.sum() <= 0.0:
        raise DegenerateSumError(f"all weights clamped to zero at alpha={step.alpha}")
    return normalize_weights(v)

"""Hot numeric kernels with a numba path and a pure-numpy fallback.

The numba implementation is used when numba imports cleanly, unless the
environment variable ``DRIFTFILTER_NUMBA`` is set to ``0``/``false``/``off``.
The choice is made once at import time; ``BACKEND`` records it.
"""

import os

from . import _numpy

PAPER_DERIVATIVE = _numpy.PAPER_DERIVATIVE
MORSE_DERIVATIVE = _numpy.MORSE_DERIVATIVE


def _numba_requested():
    flag = os.environ.get("DRIFTFILTER_NUMBA", "1").strip().lower()
    return flag not in {"0", "false", "no", "off"}


_impl = _numpy
BACKEND = "numpy"
if _numba_requested():
    try:
        from . import _numba as _impl  # noqa: F811
        BACKEND = "numba"
    except ImportError:  # pragma: no cover - numba is a declared dependency
        _impl = _numpy

derivative_row_sums = _impl.derivative_row_sums
energy_pair_sum = _impl.energy_pair_sum
rk4_propagate = _impl.rk4_propagate
rk4_propagate_noisy = _impl.rk4_propagate_noisy
systematic_indices = _impl.systematic_indices

__all__ = [
    "BACKEND",
    "PAPER_DERIVATIVE",
    "MORSE_DERIVATIVE",
    "derivative_row_sums",
    "energy_pair_sum",
    "rk4_propagate",
    "rk4_propagate_noisy",
    "systematic_indices",
]

"""Vectorized numpy implementations of the hot kernels.

These are the fallback path and the reference the numba loops are tested
against. Signatures match :mod:`driftfilter.kernels._numba` exactly.
"""

import numpy as np

PAPER_DERIVATIVE = 0
MORSE_DERIVATIVE = 1

# Rows per block in the O(N^2) kernels; bounds the temporary at ~16 MB.
_BLOCK_ELEMS = 2_000_000


def _row_blocks(n):
    step = max(1, _BLOCK_ELEMS // max(n, 1))
    for start in range(0, n, step):
        yield start, min(n, start + step)


def derivative_row_sums(w, kind, amp, rate):
    """s_i = sum_j U'(w_j - w_i) for one of the built-in derivative kernels."""
    n = w.shape[0]
    out = np.empty(n)
    for lo, hi in _row_blocks(n):
        d = w[None, :] - w[lo:hi, None]
        if kind == PAPER_DERIVATIVE:
            vals = (1.0 - np.exp(-np.abs(d))) ** 2 - 1.0
        else:
            vals = amp * rate * np.sign(d) * np.exp(-rate * np.abs(d))
        out[lo:hi] = vals.sum(axis=1)
    return out


def energy_pair_sum(w, amp, rate):
    """sum_{i,j} -amp * exp(-rate |w_i - w_j|), i = j terms included."""
    n = w.shape[0]
    total = 0.0
    for lo, hi in _row_blocks(n):
        d = np.abs(w[lo:hi, None] - w[None, :])
        total += float((-amp * np.exp(-rate * d)).sum())
    return total


def _lorenz_rhs(X, sigma, rho, b):
    x = X[:, 0]
    y = X[:, 1]
    z = X[:, 2]
    out = np.empty_like(X)
    out[:, 0] = sigma * (y - x)
    out[:, 1] = rho * x - x * z - y
    out[:, 2] = x * y - b * z
    return out


def _rk4(X, sigma, rho, b, dt):
    hh = 0.5 * dt
    k1 = _lorenz_rhs(X, sigma, rho, b)
    k2 = _lorenz_rhs(X + hh * k1, sigma, rho, b)
    k3 = _lorenz_rhs(X + hh * k2, sigma, rho, b)
    k4 = _lorenz_rhs(X + dt * k3, sigma, rho, b)
    return X + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def rk4_propagate(X, sigma, rho, b, dt, n_steps):
    out = X.copy()
    for _ in range(n_steps):
        out = _rk4(out, sigma, rho, b, dt)
    return out


def rk4_propagate_noisy(X, sigma, rho, b, dt, increments):
    """Apply one RK4 step then add ``increments[k]``, for each k in order."""
    out = X.copy()
    for k in range(increments.shape[0]):
        out = _rk4(out, sigma, rho, b, dt) + increments[k]
    return out


def systematic_indices(cdf, u):
    """Comb positions u + k/N located against a cumulative weight function."""
    n = cdf.shape[0]
    positions = u + np.arange(n) / n
    idx = np.searchsorted(cdf, positions, side="right")
    return np.minimum(idx, n - 1)

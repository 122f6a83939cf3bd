"""numba loop implementations of the hot kernels.

Summation order is fixed (pairs i < j, i then j ascending), so results do
not depend on how a caller partitions work.
"""

import math

import numpy as np
from numba import njit

PAPER_DERIVATIVE = 0
MORSE_DERIVATIVE = 1

_jit = njit(cache=True, nogil=True)


@_jit
def derivative_row_sums(w, kind, amp, rate):
    # Each pair is evaluated once: the default kernel is even in its argument
    # and the Morse derivative is odd.
    n = w.shape[0]
    out = np.zeros(n)
    for i in range(n):
        wi = w[i]
        if kind == PAPER_DERIVATIVE:
            out[i] -= 1.0
            for j in range(i + 1, n):
                e = 1.0 - math.exp(-abs(w[j] - wi))
                t = e * e - 1.0
                out[i] += t
                out[j] += t
        else:
            for j in range(i + 1, n):
                d = w[j] - wi
                t = amp * rate * math.exp(-rate * abs(d))
                if d < 0.0:
                    t = -t
                elif d == 0.0:
                    t = 0.0
                out[i] += t
                out[j] -= t
    return out


@_jit
def energy_pair_sum(w, amp, rate):
    n = w.shape[0]
    total = 0.0
    for i in range(n):
        row = 0.0
        for j in range(i + 1, n):
            row += math.exp(-rate * abs(w[i] - w[j]))
        total += row
    return -amp * (n + 2.0 * total)


@_jit
def _rk4_inplace(X, sigma, rho, b, dt):
    hh = 0.5 * dt
    c6 = dt / 6.0
    for p in range(X.shape[0]):
        x = X[p, 0]
        y = X[p, 1]
        z = X[p, 2]

        k1x = sigma * (y - x)
        k1y = rho * x - x * z - y
        k1z = x * y - b * z

        x2 = x + hh * k1x
        y2 = y + hh * k1y
        z2 = z + hh * k1z
        k2x = sigma * (y2 - x2)
        k2y = rho * x2 - x2 * z2 - y2
        k2z = x2 * y2 - b * z2

        x3 = x + hh * k2x
        y3 = y + hh * k2y
        z3 = z + hh * k2z
        k3x = sigma * (y3 - x3)
        k3y = rho * x3 - x3 * z3 - y3
        k3z = x3 * y3 - b * z3

        x4 = x + dt * k3x
        y4 = y + dt * k3y
        z4 = z + dt * k3z
        k4x = sigma * (y4 - x4)
        k4y = rho * x4 - x4 * z4 - y4
        k4z = x4 * y4 - b * z4

        X[p, 0] = x + c6 * (k1x + 2.0 * k2x + 2.0 * k3x + k4x)
        X[p, 1] = y + c6 * (k1y + 2.0 * k2y + 2.0 * k3y + k4y)
        X[p, 2] = z + c6 * (k1z + 2.0 * k2z + 2.0 * k3z + k4z)


@_jit
def rk4_propagate(X, sigma, rho, b, dt, n_steps):
    out = X.copy()
    for _ in range(n_steps):
        _rk4_inplace(out, sigma, rho, b, dt)
    return out


@_jit
def rk4_propagate_noisy(X, sigma, rho, b, dt, increments):
    out = X.copy()
    for k in range(increments.shape[0]):
        _rk4_inplace(out, sigma, rho, b, dt)
        for p in range(out.shape[0]):
            for c in range(3):
                out[p, c] += increments[k, p, c]
    return out


@_jit
def systematic_indices(cdf, u):
    n = cdf.shape[0]
    idx = np.empty(n, dtype=np.int64)
    j = 0
    for k in range(n):
        pos = u + k / n
        while j < n - 1 and cdf[j] <= pos:
            j += 1
        idx[k] = j
    return idx

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from driftfilter.diagnostics import (
    MAX_WEIGHT_EDGES,
    Histogram,
    effective_ensemble_size,
    histogram,
    max_weight,
    rms_error,
    tau,
    uniform_edges,
)
from driftfilter.errors import BadEdgesError, DimensionMismatchError, NonFiniteError

from conftest import random_simplex


def test_max_weight_examples():
    assert max_weight(np.full(4, 0.25)) == 0.25
    assert max_weight([1.0, 0.0, 0.0]) == 1.0
    assert max_weight([0.7142317, 0.2857683]) == 0.7142317


def test_tau_examples():
    assert tau(np.full(5, 0.2)) == 0.0
    w = np.array([math.e, 1.0]) / (math.e + 1.0)
    assert tau(w) == pytest.approx(math.sqrt(0.5), abs=1e-12)
    assert tau(w) == pytest.approx(0.7071068, abs=1e-7)


def test_tau_floors_zeros():
    assert math.isfinite(tau([1.0, 0.0]))
    assert tau([1.0, 0.0]) == pytest.approx(math.log(1e300) / math.sqrt(2), rel=1e-12)


@given(st.integers(2, 30), st.integers(0, 2**32 - 1), st.floats(1e-3, 1e3))
@settings(max_examples=200, deadline=None)
def test_tau_scale_invariant(n, seed, c):
    w = random_simplex(np.random.default_rng(seed), n)
    assert tau(c * w) == pytest.approx(tau(w), rel=1e-9, abs=1e-12)


def test_n_eff_examples():
    assert effective_ensemble_size(np.full(50, 0.02)) == pytest.approx(50, rel=1e-14)
    assert effective_ensemble_size([1.0, 0.0, 0.0, 0.0]) == 1.0
    assert effective_ensemble_size([0.5, 0.5, 0.0, 0.0]) == 2.0


@given(st.integers(2, 100), st.integers(0, 2**32 - 1))
@settings(max_examples=300, deadline=None)
def test_n_eff_bounds(n, seed):
    w = random_simplex(np.random.default_rng(seed), n)
    ne = effective_ensemble_size(w)
    assert 1.0 / max_weight(w) <= ne * (1 + 1e-12)
    assert ne <= n * (1 + 1e-12)


def test_rms_examples():
    assert rms_error([1.0, 2.0], [1.0, 2.0]) == 0.0
    assert rms_error([3.0, 4.0], [0.0, 0.0]) == pytest.approx(3.5355339, abs=1e-7)
    assert rms_error(2.5, -1.0) == 3.5
    with pytest.raises(DimensionMismatchError):
        rms_error([1.0], [1.0, 2.0])


def test_diagnostics_match_brute_force(rng):
    for _ in range(100):
        n = int(rng.integers(2, 12))
        w = random_simplex(rng, n)
        wl = w.tolist()
        assert effective_ensemble_size(w) == pytest.approx(1 / sum(x * x for x in wl), rel=1e-12)
        logs = [math.log(x) for x in wl]
        m = sum(logs) / n
        assert tau(w) == pytest.approx(math.sqrt(sum((v - m) ** 2 for v in logs) / (n - 1)),
                                       rel=1e-12)
        a, b = rng.normal(size=n).tolist(), rng.normal(size=n).tolist()
        assert rms_error(a, b) == pytest.approx(
            math.sqrt(sum((x - y) ** 2 for x, y in zip(a, b)) / n), rel=1e-12)


def test_histogram_example():
    h = histogram([0.05, 0.5, 0.95], uniform_edges(0.0, 1.0, 10))
    expected = np.zeros(10, dtype=int)
    expected[[0, 5, 9]] = 1
    assert np.array_equal(h.counts, expected)
    assert h.total == 3


def test_histogram_conventions():
    edges = uniform_edges(0.0, 1.0, 10)
    assert np.array_equal(histogram([], edges).counts, np.zeros(10))
    assert histogram([0.1], edges).counts[1] == 1
    assert histogram([1.0], edges).counts[-1] == 1
    h = histogram([-0.1, 1.5, 0.3], edges)
    assert (h.underflow, h.overflow, int(h.counts.sum())) == (1, 1, 1)


def test_histogram_errors():
    with pytest.raises(BadEdgesError):
        histogram([0.5], [0.0])
    with pytest.raises(BadEdgesError):
        histogram([0.5], [0.0, 1.0, 1.0])
    with pytest.raises(NonFiniteError):
        histogram([float("nan")], [0.0, 1.0])


@given(st.lists(st.floats(-2, 3), max_size=200), st.integers(1, 30))
@settings(max_examples=200, deadline=None)
def test_histogram_conserves_count(samples, n_bins):
    h = histogram(samples, uniform_edges(-1.0, 2.0, n_bins))
    assert h.total == len(samples)


def test_histogram_addition():
    a = histogram([0.1, 0.2], MAX_WEIGHT_EDGES)
    b = histogram([0.2, 2.0], MAX_WEIGHT_EDGES)
    c = a + b
    assert c.total == 4 and c.overflow == 1
    with pytest.raises(BadEdgesError):
        a + histogram([0.1], [0.0, 1.0])
    assert isinstance(c, Histogram)

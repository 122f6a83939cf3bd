import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from driftfilter.ensemble import RandomSource
from driftfilter.errors import SingularInnovationError, TooFewParticlesError
from driftfilter.filters import (
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
    systematic_indices,
)
from driftfilter.potential import StepParams

from conftest import random_simplex

SCALAR = ObservationModel.scalar([[1.0]], 1.0)
LORENZ_OBS = ObservationModel.scalar([[1.0, 0.0, 0.0]], 1.0)


def counts_of(resampled, n):
    idx = np.rint(resampled[:, 0]).astype(int)
    return np.bincount(idx, minlength=n)


def labelled(n):
    """Particles whose first coordinate is their own index."""
    return np.arange(n, dtype=float)[:, None]


# Likelihood weights -----------------------------------------------------------

def test_likelihood_symmetric():
    np.testing.assert_allclose(likelihood_weights([[-1.0], [1.0]], [0.0], SCALAR), [0.5, 0.5])


def test_likelihood_two_particles():
    w = likelihood_weights([[0.0], [1.0]], [0.0], SCALAR)
    e = math.exp(-0.5)
    np.testing.assert_allclose(w, [1 / (1 + e), e / (1 + e)], rtol=1e-14)
    np.testing.assert_allclose(w, [0.6224593, 0.3775407], atol=1e-7)


def test_likelihood_extreme_separation_in_log_domain():
    w = likelihood_weights([[0.0], [math.sqrt(200.0)]], [0.0], SCALAR)
    assert w[0] == pytest.approx(1.0, abs=1e-15)
    assert w[1] == pytest.approx(math.exp(-100.0), rel=1e-10)
    assert w[1] == pytest.approx(3.7e-44, rel=0.01)


def test_likelihood_matches_brute_force_gaussian(rng):
    H = rng.normal(size=(2, 3))
    A = rng.normal(size=(2, 2))
    om = ObservationModel(H, A @ A.T + 0.5 * np.eye(2))
    x = rng.normal(size=(6, 3))
    y = rng.normal(size=2)
    Rinv = np.linalg.inv(om.R)
    dens = [math.exp(-0.5 * (y - H @ xi) @ Rinv @ (y - H @ xi)) for xi in x]
    np.testing.assert_allclose(likelihood_weights(x, y, om), np.array(dens) / sum(dens),
                               rtol=1e-12)


# Particle filter analysis -------------------------------------------------------

def test_classical_symmetric_case():
    x = np.array([[-1.0], [1.0]])
    res = pf_analysis(x, [0.0], SCALAR, ClassicalPF())
    np.testing.assert_allclose(res.weights, [0.5, 0.5])
    assert np.array_equal(res.ensemble, x)


def test_modified_alpha_zero_equals_classical(rng):
    x = rng.normal(size=(40, 3))
    y = [0.3]
    a = pf_analysis(x, y, LORENZ_OBS, ClassicalPF())
    b = pf_analysis(x, y, LORENZ_OBS, ModifiedPF(StepParams(alpha=0.0)))
    assert np.array_equal(a.weights, b.weights)
    assert np.array_equal(a.ensemble, b.ensemble)


def test_modified_collapsed_likelihood():
    x = np.array([[0.0], [math.sqrt(200.0)]])
    res = pf_analysis(x, [0.0], SCALAR, ModifiedPF(StepParams(alpha=0.5)))
    np.testing.assert_allclose(res.raw_weights, [1.0, 0.0], atol=1e-40)
    np.testing.assert_allclose(res.weights, [0.7142317, 0.2857683], atol=1e-6)


def test_pf_analysis_does_not_mutate_input(rng):
    x = rng.normal(size=(10, 3))
    before = x.copy()
    for kind in (ClassicalPF(), ModifiedPF(StepParams(0.1))):
        pf_analysis(x, [0.0], LORENZ_OBS, kind)
    assert np.array_equal(x, before)


def test_pf_analysis_rejects_enkf():
    with pytest.raises(TypeError):
        pf_analysis([[0.0], [1.0]], [0.0], SCALAR, EnKF())


# Resampling ------------------------------------------------------------------

def test_systematic_degenerate():
    out = resample_systematic(labelled(3), [1.0, 0.0, 0.0], RandomSource(0))
    assert np.array_equal(out[:, 0], [0.0, 0.0, 0.0])


@pytest.mark.parametrize("n", [2, 5, 64])
def test_systematic_uniform_one_copy_each_for_any_offset(n):
    w = np.full(n, 1 / n)
    for frac in np.linspace(0.001, 0.999, 23):
        idx = systematic_indices(w, frac / n)
        assert np.array_equal(np.sort(idx), np.arange(n))


@given(st.integers(2, 60), st.integers(0, 2**32 - 1))
@settings(max_examples=1000, deadline=None)
def test_systematic_count_bounds(n, seed):
    gen = np.random.default_rng(seed)
    w = random_simplex(gen, n)
    counts = np.bincount(systematic_indices(w, gen.random() / n), minlength=n)
    nw = n * w
    assert counts.sum() == n
    assert np.all((counts == np.floor(nw)) | (counts == np.ceil(nw)))


def test_systematic_output_in_comb_order():
    idx = systematic_indices(np.array([0.1, 0.2, 0.3, 0.4]), 0.2)
    assert np.all(np.diff(idx) >= 0)


def test_multinomial_degenerate():
    assert np.array_equal(resample_multinomial(labelled(2), [1.0, 0.0], RandomSource(1))[:, 0], [0, 0])
    assert np.array_equal(resample_multinomial(labelled(2), [0.0, 1.0], RandomSource(1))[:, 0], [1, 1])


def test_multinomial_frequencies():
    rng = RandomSource(5)
    draws = np.concatenate([resample_multinomial(labelled(2), [0.3, 0.7], rng)[:, 0]
                            for _ in range(50_000)])
    p_hat = np.mean(draws == 0)
    se = math.sqrt(0.3 * 0.7 / draws.size)
    assert abs(p_hat - 0.3) < 3 * se


@pytest.mark.parametrize("resampler", [resample_systematic, resample_multinomial])
def test_resamplers_unbiased(resampler):
    w = np.array([0.05, 0.15, 0.3, 0.5])
    n, trials = w.size, 100_000
    rng = RandomSource(11, 3)
    x = labelled(n)
    counts = np.zeros((trials, n))
    for t in range(trials):
        counts[t] = counts_of(resampler(x, w, rng), n)
    mean = counts.mean(axis=0)
    se = counts.std(axis=0, ddof=1) / math.sqrt(trials)
    assert np.all(np.abs(mean - n * w) <= 4 * se + 1e-12)


# Covariance and gain -----------------------------------------------------------

def brute_cov(x):
    n, d = len(x), len(x[0])
    mean = [sum(x[i][k] for i in range(n)) / n for k in range(d)]
    return np.array([[sum((x[i][a] - mean[a]) * (x[i][b] - mean[b]) for i in range(n)) / (n - 1)
                      for b in range(d)] for a in range(d)])


def test_sample_covariance_examples():
    np.testing.assert_array_equal(sample_covariance(np.full((4, 2), 3.3)), np.zeros((2, 2)))
    np.testing.assert_allclose(sample_covariance([0.0, 2.0]), [[2.0]])
    np.testing.assert_allclose(sample_covariance([[1.0, 0.0], [0.0, 1.0]]),
                               [[0.5, -0.5], [-0.5, 0.5]])
    with pytest.raises(TooFewParticlesError):
        sample_covariance([[1.0, 2.0]])


def test_sample_covariance_matches_two_pass(rng):
    for _ in range(50):
        x = rng.normal(size=(rng.integers(2, 11), rng.integers(1, 4)))
        got = sample_covariance(x)
        np.testing.assert_allclose(got, brute_cov(x.tolist()), rtol=1e-12, atol=1e-15)
        np.testing.assert_allclose(got, got.T)
        assert np.linalg.eigvalsh(got).min() > -1e-12


def test_kalman_gain_examples():
    assert np.array_equal(kalman_gain(np.zeros((3, 3)), LORENZ_OBS), np.zeros((3, 1)))
    np.testing.assert_allclose(kalman_gain([[1.0]], SCALAR), [[0.5]])
    np.testing.assert_allclose(kalman_gain(np.eye(3), LORENZ_OBS), [[0.5], [0.0], [0.0]])


def test_kalman_gain_singular():
    with pytest.raises(SingularInnovationError):
        kalman_gain([[0.0]], ObservationModel.scalar([[1.0]], 0.0))


# EnKF ------------------------------------------------------------------------

def test_enkf_identical_particles_unchanged():
    x = np.tile([1.0, 2.0, 3.0], (5, 1))
    res = enkf_analysis(x, [4.0], LORENZ_OBS, RandomSource(0))
    assert np.array_equal(res.ensemble, x)
    np.testing.assert_allclose(res.weights, np.full(5, 0.2))


def test_enkf_zero_obs_error_pins_to_observation(rng):
    om = ObservationModel(np.eye(2), np.zeros((2, 2)))
    x = rng.normal(size=(8, 2))
    y = np.array([0.7, -1.2])
    res = enkf_analysis(x, y, om, RandomSource(0))
    np.testing.assert_allclose(res.ensemble, np.tile(y, (8, 1)), atol=1e-12)


def test_enkf_scalar_hand_case():
    # Members 0 and 2 give P = 2, so K = 2/3 and member 0 moves to 4/3.
    x = np.array([[0.0], [2.0]])
    res = enkf_analysis(x, [2.0], SCALAR, perturbations=np.zeros((2, 1)))
    np.testing.assert_allclose(res.ensemble[:, 0], [4 / 3, 2.0], rtol=1e-14)


def test_enkf_mean_update_identity(rng):
    x = rng.normal(size=(30, 3)) * [1.0, 2.0, 3.0]
    y = np.array([0.4])
    src = RandomSource(3)
    res = enkf_analysis(x, y, LORENZ_OBS, src)
    eta = LORENZ_OBS.noise(RandomSource(3), 30)
    K = kalman_gain(sample_covariance(x), LORENZ_OBS)
    expected = x.mean(0) + K @ (y - LORENZ_OBS.H @ x.mean(0) - eta.mean(0))
    np.testing.assert_allclose(res.ensemble.mean(0), expected, rtol=1e-12, atol=1e-12)


def test_observation_model_validation():
    with pytest.raises(ValueError):
        ObservationModel([[1.0, 0.0]], [[1.0, 0.2], [0.0, 1.0]])
    with pytest.raises(ValueError):
        ObservationModel([[1.0]], [[-1.0]])

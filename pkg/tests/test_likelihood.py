import math

import numpy as np
import numpy.testing as npt
import pytest
from scipy.stats import norm

from prefscan.errors import ConfigurationError, InputError
from prefscan.gp import (
    LikelihoodConfig,
    comparison_log_likelihood,
    comparison_log_likelihood_grad,
    outcome_probabilities,
)
from prefscan.judgments import ComparisonRecord, Outcome
from tests.conftest import random_comparisons


def test_equal_utilities_no_band_gives_half():
    cfg = LikelihoodConfig(tie_tolerance=0.0, noise_scale=1.0,
                           tie_support_enabled=False)
    f = np.array([0.7, 0.7])
    ll = comparison_log_likelihood(f, [ComparisonRecord(0, 1, Outcome.A_PREFERRED)],
                                   cfg)
    npt.assert_allclose(ll, math.log(0.5), rtol=1e-12)


def test_tie_probability_matches_normal_cdf():
    # oracle: standard normal CDF; delta/s = 1 gives P(tie)=1-2*Phi(-1)
    cfg = LikelihoodConfig(tie_tolerance=1.0, noise_scale=1.0)
    pa, pb, ptie = outcome_probabilities(0.0, cfg)
    expected = 1.0 - 2.0 * norm.cdf(-1.0)
    npt.assert_allclose(ptie, expected, rtol=1e-12)
    assert abs(expected - 0.6827) < 1e-4
    ll = comparison_log_likelihood(np.zeros(2),
                                   [ComparisonRecord(0, 1, Outcome.TIE)], cfg)
    npt.assert_allclose(ll, math.log(expected), rtol=1e-10)


def test_weight_scales_loglik_linearly():
    cfg = LikelihoodConfig()
    f = np.array([0.9, 0.1])
    full = comparison_log_likelihood(
        f, [ComparisonRecord(0, 1, Outcome.A_PREFERRED, 1.0)], cfg)
    half = comparison_log_likelihood(
        f, [ComparisonRecord(0, 1, Outcome.A_PREFERRED, 0.5)], cfg)
    npt.assert_allclose(half, 0.5 * full, rtol=1e-15)


def test_weights_ignored_when_disabled():
    cfg = LikelihoodConfig(confidence_weighting_enabled=False)
    f = np.array([0.9, 0.1])
    a = comparison_log_likelihood(
        f, [ComparisonRecord(0, 1, Outcome.A_PREFERRED, 0.25)], cfg)
    b = comparison_log_likelihood(
        f, [ComparisonRecord(0, 1, Outcome.A_PREFERRED, 1.0)], cfg)
    npt.assert_allclose(a, b, rtol=0)


def test_tie_rejected_when_support_disabled():
    cfg = LikelihoodConfig(tie_support_enabled=False)
    with pytest.raises(InputError):
        comparison_log_likelihood(np.zeros(2),
                                  [ComparisonRecord(0, 1, Outcome.TIE)], cfg)


def test_id_out_of_range():
    cfg = LikelihoodConfig()
    with pytest.raises(InputError):
        comparison_log_likelihood(np.zeros(2),
                                  [ComparisonRecord(0, 5, Outcome.TIE)], cfg)


def test_empty_comparisons_rejected():
    with pytest.raises(InputError):
        comparison_log_likelihood(np.zeros(2), [], LikelihoodConfig())


def test_shift_invariance(rng):
    """Adding a constant to every utility never changes the likelihood."""
    for _ in range(100):
        n = int(rng.integers(3, 10))
        f = rng.normal(size=n)
        comps = random_comparisons(rng, n, int(rng.integers(2, 12)))
        cfg = LikelihoodConfig(tie_tolerance=float(rng.uniform(0, 0.5)),
                               noise_scale=float(rng.uniform(0.3, 2.0)))
        c = float(rng.normal() * 10)
        base = comparison_log_likelihood(f, comps, cfg)
        shifted = comparison_log_likelihood(f + c, comps, cfg)
        assert abs(base - shifted) <= 1e-9


def test_three_outcome_normalization_grid():
    """P(A) + P(B) + P(tie) = 1 over a (delta, tolerance, scale) grid."""
    for delta in np.linspace(-6, 6, 25):
        for tol in (0.0, 0.05, 0.3, 1.0, 3.0):
            for s in (0.2, 1.0, 2.5):
                cfg = LikelihoodConfig(tie_tolerance=tol, noise_scale=s)
                pa, pb, pt = outcome_probabilities(float(delta), cfg)
                assert abs(pa + pb + pt - 1.0) <= 1e-12
                assert pa >= 0 and pb >= 0 and pt >= 0


def test_antisymmetry(rng):
    """Swapping the pair and flipping the outcome preserves the value."""
    flip = {Outcome.A_PREFERRED: Outcome.B_PREFERRED,
            Outcome.B_PREFERRED: Outcome.A_PREFERRED,
            Outcome.TIE: Outcome.TIE}
    for _ in range(50):
        f = rng.normal(size=5)
        cfg = LikelihoodConfig(tie_tolerance=float(rng.uniform(0, 0.4)))
        c = random_comparisons(rng, 5, 1)[0]
        mirrored = ComparisonRecord(c.b, c.a, flip[c.outcome], c.weight)
        npt.assert_allclose(comparison_log_likelihood(f, [c], cfg),
                            comparison_log_likelihood(f, [mirrored], cfg),
                            rtol=1e-12)


def test_gradient_matches_finite_differences(rng):
    for _ in range(20):
        n = int(rng.integers(3, 8))
        f = rng.normal(size=n)
        comps = random_comparisons(rng, n, int(rng.integers(2, 10)))
        cfg = LikelihoodConfig(tie_tolerance=float(rng.uniform(0.01, 0.4)),
                               noise_scale=float(rng.uniform(0.5, 1.5)))
        g = comparison_log_likelihood_grad(f, comps, cfg)
        h = 1e-6
        for i in range(n):
            fp = f.copy()
            fm = f.copy()
            fp[i] += h
            fm[i] -= h
            fd = (comparison_log_likelihood(fp, comps, cfg)
                  - comparison_log_likelihood(fm, comps, cfg)) / (2 * h)
            assert abs(g[i] - fd) <= 1e-3 * max(1.0, abs(fd))


def test_config_validation():
    with pytest.raises(ConfigurationError):
        LikelihoodConfig(tie_tolerance=-0.1)
    with pytest.raises(ConfigurationError):
        LikelihoodConfig(noise_scale=0.0)


def test_win_probability_uses_band_offset():
    cfg = LikelihoodConfig(tie_tolerance=0.5, noise_scale=2.0)
    pa, pb, pt = outcome_probabilities(1.2, cfg)
    npt.assert_allclose(pa, norm.cdf((1.2 - 0.5) / 2.0), rtol=1e-12)
    npt.assert_allclose(pb, norm.cdf((-1.2 - 0.5) / 2.0), rtol=1e-12)

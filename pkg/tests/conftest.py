import numpy as np
import pytest

from prefscan.gp import KernelHyperparams, LikelihoodConfig
from prefscan.judgments import ComparisonRecord, Outcome


def random_comparisons(rng, n_points, n_comps, with_ties=True,
                       with_weights=True):
    """Random, id-valid comparison list over n_points candidates."""
    out = []
    outcomes = [Outcome.A_PREFERRED, Outcome.B_PREFERRED]
    if with_ties:
        outcomes.append(Outcome.TIE)
    weights = (0.25, 0.5, 1.0) if with_weights else (1.0,)
    for _ in range(n_comps):
        a, b = rng.choice(n_points, size=2, replace=False)
        out.append(ComparisonRecord(int(a), int(b),
                                    outcomes[rng.integers(len(outcomes))],
                                    float(weights[rng.integers(len(weights))])))
    return out


def random_instance(rng, n_points=None, n_comps=None, latent_dim=2):
    """(Z latents, K-ready hyperparams, comparisons, likelihood config)."""
    n = int(n_points if n_points is not None else rng.integers(4, 21))
    m = int(n_comps if n_comps is not None else rng.integers(n, 3 * n))
    Z = rng.normal(size=(n, latent_dim))
    hp = KernelHyperparams(rng.uniform(-0.5, 0.5, latent_dim),
                           float(rng.uniform(-0.5, 0.5)))
    cfg = LikelihoodConfig(tie_tolerance=float(rng.uniform(0.0, 0.3)),
                           noise_scale=float(rng.uniform(0.5, 1.5)))
    comps = random_comparisons(rng, n, m)
    return Z, hp, comps, cfg


@pytest.fixture
def rng():
    return np.random.default_rng(20240811)

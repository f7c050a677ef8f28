import math

import numpy as np
import pytest
from scipy import stats

from fbmdrift.fbm import (
    FbmSimulationError,
    fbm_covariance,
    make_rng,
    replicate_seed,
    simulate_fbm,
    simulate_fbm_cholesky,
    simulate_fbm_circulant,
)
from fbmdrift.grid import TimeGrid


def test_covariance_examples():
    assert fbm_covariance(1, 2, 0.5) == pytest.approx(1.0)
    assert fbm_covariance(2, 2, 0.75) == pytest.approx(2**1.5)
    assert fbm_covariance(0, 5, 0.3) == 0.0


def test_covariance_rejects_negative_time():
    with pytest.raises(ValueError):
        fbm_covariance(-1, 1, 0.3)


@pytest.mark.parametrize("H", [0.0, 1.0, -0.2, 1.5])
def test_rejects_bad_hurst(H):
    with pytest.raises(ValueError):
        fbm_covariance(1, 1, H)


def test_covariance_vectorized_symmetric():
    t = np.linspace(0, 2, 9)
    c = fbm_covariance(t[:, None], t[None, :], 0.7)
    assert np.allclose(c, c.T)
    assert np.all(np.linalg.eigvalsh(c[1:, 1:]) > 0)


@pytest.mark.parametrize("sampler", [simulate_fbm_cholesky, simulate_fbm_circulant])
def test_determinism_and_start(sampler):
    g = TimeGrid(1.0, 64)
    a = sampler(g, 0.3, 123)
    b = sampler(g, 0.3, 123)
    c = sampler(g, 0.3, 124)
    assert a.values[0] == 0.0
    assert np.array_equal(a.values, b.values)
    assert not np.array_equal(a.values, c.values)


def test_single_step_variance():
    g = TimeGrid(2.0, 1)
    vals = np.array([simulate_fbm_cholesky(g, 0.3, s).values for s in range(4000)])
    assert vals.shape == (4000, 2)
    assert np.all(vals[:, 0] == 0)
    var = vals[:, 1].var()
    assert abs(var / 2.0**0.6 - 1) < 4 * math.sqrt(2 / 4000)


@pytest.mark.parametrize("sampler", [simulate_fbm_cholesky, simulate_fbm_circulant])
def test_brownian_increments(sampler):
    g = TimeGrid(1.0, 16)
    inc = np.array([np.diff(sampler(g, 0.5, s).values) for s in range(10_000)])
    # i.i.d. N(0, 1/16): pooled variance and lag-1 correlation
    pooled = inc.var()
    assert abs(pooled * 16 - 1) < 4 * math.sqrt(2 / inc.size)
    corr = np.mean(inc[:, 1:] * inc[:, :-1]) * 16
    assert abs(corr) < 4 / math.sqrt(inc.shape[0] * 15)


@pytest.mark.parametrize("H", [0.3, 0.7])
def test_variance_self_similarity(H):
    g = TimeGrid(2.0, 32)
    end = np.array([simulate_fbm_circulant(g, H, s).values[-1] for s in range(10_000)])
    se = math.sqrt(2 / end.size) * 2.0 ** (2 * H)
    assert abs(end.var() - 2.0 ** (2 * H)) < 3 * se


def test_circulant_matches_cholesky_law():
    g = TimeGrid(1.0, 32)
    a = [simulate_fbm_cholesky(g, 0.7, replicate_seed(1, r)).values[-1] for r in range(3000)]
    b = [simulate_fbm_circulant(g, 0.7, replicate_seed(2, r)).values[-1] for r in range(3000)]
    assert stats.ks_2samp(a, b).pvalue > 0.01


def test_replicate_seeds_distinct_and_stable():
    seeds = [replicate_seed(7, r) for r in range(1000)]
    assert len(set(seeds)) == 1000
    assert seeds[3] == replicate_seed(7, 3)
    assert replicate_seed(7, 3) != replicate_seed(8, 3)
    with pytest.raises(ValueError):
        make_rng(-1)
    with pytest.raises(ValueError):
        make_rng(2**64)


def test_dispatch():
    g = TimeGrid(1.0, 8)
    assert np.array_equal(simulate_fbm(g, 0.3, 5, "cholesky").values,
                          simulate_fbm_cholesky(g, 0.3, 5).values)
    with pytest.raises(ValueError):
        simulate_fbm(g, 0.3, 5, "wavelet")


def test_circulant_error_type_is_numerical():
    # the embedding is valid for all H on these grids; the error type still has to map to exit 2
    from fbmdrift.errors import NumericalError

    assert issubclass(FbmSimulationError, NumericalError)

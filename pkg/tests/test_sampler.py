"""Inverse-CDF and Gibbs samplers: determinism, marginals, error bars."""

import numpy as np
import pytest

from qnormal3d.densities import ModelParams
from qnormal3d.errors import InsufficientSamples
from qnormal3d.moments import cov_yz, var_z
from qnormal3d.qcore import support_halfwidth
from qnormal3d.sampler import (
    McEstimate,
    SamplerConfig,
    cdf_fn,
    cdf_r,
    ks_critical,
    ks_statistic,
    mc_moment,
    sample_3d,
    sample_fn,
)

FAST_3D = dict(grid_points=64, burn_in=120, thin=2, n_chains=64)


class TestConfig:
    def test_defaults(self):
        cfg = SamplerConfig(seed=1, n_samples=10)
        assert cfg.grid_points == 256
        assert cfg.burn_in == 1000
        assert cfg.thin == 5

    @pytest.mark.parametrize(
        "kwargs",
        [
            dict(seed=-1, n_samples=10),
            dict(seed=2**64, n_samples=10),
            dict(seed=1, n_samples=0),
            dict(seed=1, n_samples=10, grid_points=32),
            dict(seed=1, n_samples=10, burn_in=-1),
            dict(seed=1, n_samples=10, thin=0),
            dict(seed=1, n_samples=10, n_chains=0),
        ],
    )
    def test_rejects_bad_fields(self, kwargs):
        with pytest.raises(ValueError):
            SamplerConfig(**kwargs)


class TestBaseSampler:
    def test_deterministic(self):
        cfg = SamplerConfig(seed=42, n_samples=500)
        a = sample_fn(0.5, cfg)
        b = sample_fn(0.5, cfg)
        np.testing.assert_array_equal(a, b)

    def test_seed_changes_stream(self):
        a = sample_fn(0.5, SamplerConfig(seed=1, n_samples=100))
        b = sample_fn(0.5, SamplerConfig(seed=2, n_samples=100))
        assert not np.array_equal(a, b)

    def test_stays_in_support(self):
        for q in (-0.5, 0.0, 0.7):
            draws = sample_fn(q, SamplerConfig(seed=9, n_samples=2000))
            assert np.max(np.abs(draws)) <= support_halfwidth(q)

    @pytest.mark.parametrize("q", [0.0, 0.5])
    def test_kolmogorov_smirnov(self, q):
        n = 10_000
        draws = sample_fn(q, SamplerConfig(seed=314, n_samples=n))
        stat = ks_statistic(draws, cdf_fn(q))
        assert stat < ks_critical(n, alpha=0.01)

    def test_first_two_moments(self):
        n = 20_000
        draws = sample_fn(0.3, SamplerConfig(seed=11, n_samples=n))
        mean = mc_moment(draws, lambda x: x)
        var = mc_moment(draws, lambda x: x * x)
        assert abs(mean.value) < 4 * mean.std_error
        assert abs(var.value - 1.0) < 4 * var.std_error


class TestGibbsSampler:
    def test_shape_and_support(self, params):
        cfg = SamplerConfig(seed=5, n_samples=1500, **FAST_3D)
        draws = sample_3d(params, cfg)
        assert draws.shape == (1500, 3)
        assert np.max(np.abs(draws)) <= support_halfwidth(params.q)

    def test_deterministic(self, params):
        cfg = SamplerConfig(seed=77, n_samples=800, **FAST_3D)
        a = sample_3d(params, cfg)
        b = sample_3d(params, cfg)
        np.testing.assert_array_equal(a, b)

    def test_covariances_track_targets(self, params):
        cfg = SamplerConfig(seed=2024, n_samples=20_000, grid_points=96, burn_in=400, thin=3, n_chains=128)
        draws = sample_3d(params, cfg)
        var_target = var_z(params.r, params.q)
        checks = [
            (lambda x, y, z: z * z, var_target),
            (lambda x, y, z: y * z, cov_yz(params)),
            (lambda x, y, z: x, 0.0),
        ]
        for fn, target in checks:
            est = mc_moment(draws, fn)
            assert abs(est.value - target) < 4 * est.std_error

    def test_marginal_distribution(self, params):
        cfg = SamplerConfig(seed=404, n_samples=20_000, grid_points=96, burn_in=400, thin=3, n_chains=128)
        draws = sample_3d(params, cfg)
        stat = ks_statistic(draws[:, 2], cdf_r(params.r, params.q))
        assert stat < ks_critical(draws.shape[0], alpha=0.01)


class TestMcMoment:
    def test_constant_series(self):
        est = mc_moment(np.full(200, 3.5), lambda x: x)
        assert isinstance(est, McEstimate)
        assert est.value == pytest.approx(3.5)
        assert est.std_error == pytest.approx(0.0, abs=1e-14)
        assert est.n == 200

    def test_multicolumn_callable(self):
        arr = np.column_stack([np.arange(100.0), np.ones(100)])
        est = mc_moment(arr, lambda a, b: a * b)
        assert est.value == pytest.approx(np.arange(100.0).mean())

    def test_too_few_samples(self):
        with pytest.raises(InsufficientSamples):
            mc_moment(np.arange(5.0), lambda x: x)

    def test_error_scale_on_iid_noise(self):
        gen = np.random.default_rng(8)
        draws = gen.normal(size=40_000)
        est = mc_moment(draws, lambda x: x)
        naive = draws.std(ddof=1) / np.sqrt(draws.size)
        assert est.std_error == pytest.approx(naive, rel=0.5)


class TestCdfHelpers:
    @pytest.mark.parametrize("q", [-0.5, 0.0, 0.5])
    def test_base_cdf_endpoints(self, q):
        cdf = cdf_fn(q)
        half = support_halfwidth(q)
        grid = np.linspace(-half, half, 301)
        vals = cdf(grid)
        assert vals[0] == pytest.approx(0.0, abs=1e-9)
        assert vals[-1] == pytest.approx(1.0, abs=1e-9)
        assert np.all(np.diff(vals) >= -1e-12)

    def test_weighted_cdf_median_symmetry(self):
        cdf = cdf_r(0.3, 0.4)
        assert cdf(np.array([0.0]))[0] == pytest.approx(0.5, abs=1e-9)

    def test_ks_statistic_uniform(self):
        gen = np.random.default_rng(3)
        u = gen.uniform(size=5000)
        stat = ks_statistic(u, lambda x: np.clip(x, 0.0, 1.0))
        assert stat < ks_critical(5000, alpha=0.01)

import numpy as np
import pytest

from hdlss.datagen import (CovarianceSpec, DataMatrix, DegenerateVariableError,
                           DistributionSpec, FactorizationError,
                           InvalidDimensionError, apply_covariance,
                           covariance_factor, iter_row_blocks, load_matrix_csv,
                           make_rng, sample_matrix, save_matrix_csv,
                           standardize)

ALL_DISTS = [
    DistributionSpec.normal(),
    DistributionSpec.exp1(),
    DistributionSpec.t6(),
    DistributionSpec.gamma(4.0, 0.5),
    DistributionSpec.rademacher(),
]


class TestDistributionSpec:
    def test_nu4_values(self):
        assert DistributionSpec.normal().nu4 == 3.0
        assert DistributionSpec.exp1().nu4 == 9.0
        assert DistributionSpec.t6().nu4 == 6.0
        assert DistributionSpec.rademacher().nu4 == 1.0
        assert DistributionSpec.gamma(4.0, 0.5).nu4 == pytest.approx(4.5)

    def test_unknown_kind_rejected(self):
        with pytest.raises(ValueError):
            DistributionSpec("cauchy")

    def test_gamma_needs_positive_parameters(self):
        with pytest.raises(ValueError):
            DistributionSpec.gamma(-1.0, 0.5)

    @pytest.mark.parametrize("dist", ALL_DISTS, ids=lambda d: d.kind)
    def test_standardized_moments(self, dist):
        # Mean/variance/fourth moment of 1e6 draws within 3 standard
        # errors of the corresponding sample moments.
        draws = dist.draw(make_rng(123), 10 ** 6)
        m = draws.size
        mean = draws.mean()
        m2 = np.mean(draws ** 2)
        m4 = np.mean(draws ** 4)
        se_mean = draws.std() / np.sqrt(m)
        se_m2 = np.std(draws ** 2) / np.sqrt(m)
        se_m4 = np.std(draws ** 4) / np.sqrt(m)
        assert abs(mean) <= 3 * se_mean
        assert abs(m2 - 1.0) <= 3 * se_m2 + 1e-9
        assert abs(m4 - dist.nu4) <= 3 * se_m4 + 1e-9

    def test_exp1_mean_and_fourth_moment(self):
        draws = DistributionSpec.exp1().draw(make_rng(7), 10 ** 6)
        assert abs(draws.mean()) <= 5e-3
        assert np.mean(draws ** 4) == pytest.approx(9.0, abs=0.3)


class TestSampleMatrix:
    def test_rademacher_support(self):
        raw = sample_matrix(DistributionSpec.rademacher(), 4, 2, seed=5)
        assert set(np.unique(raw.entries)) <= {-1.0, 1.0}

    def test_deterministic(self):
        a = sample_matrix(DistributionSpec.t6(), 30, 7, seed=42)
        b = sample_matrix(DistributionSpec.t6(), 30, 7, seed=42)
        assert np.array_equal(a.entries, b.entries)

    def test_zero_dimension_rejected(self):
        with pytest.raises(InvalidDimensionError):
            sample_matrix(DistributionSpec.normal(), 0, 3, seed=1)
        with pytest.raises(InvalidDimensionError):
            sample_matrix(DistributionSpec.normal(), 3, 0, seed=1)

    def test_replication_streams_differ(self):
        a = make_rng(9, 0).standard_normal(100)
        b = make_rng(9, 1).standard_normal(100)
        assert not np.array_equal(a, b)


class TestCovarianceFactor:
    def test_identity(self):
        f = covariance_factor(CovarianceSpec.identity(), 5)
        assert np.array_equal(f.dense(), np.eye(5))

    def test_diag_spike_half(self):
        f = covariance_factor(CovarianceSpec.diag_spike(0.5), 4)
        assert np.allclose(f.diag, [np.sqrt(2), np.sqrt(2), 1.0, 1.0])
        assert f.sub is None

    def test_banded_full_block(self):
        # Oracle: direct Cholesky of the 3x3 tridiagonal matrix.
        spec = CovarianceSpec.banded(0.5, 1.0)
        f = covariance_factor(spec, 3)
        ll = f.dense() @ f.dense().T
        oracle = np.linalg.cholesky(spec.sigma(3))
        assert np.allclose(f.dense(), oracle, atol=1e-12)
        assert np.allclose(np.diag(ll), 1.0)
        assert ll[0, 1] == pytest.approx(0.5)

    @pytest.mark.parametrize("spec", [
        CovarianceSpec.identity(),
        CovarianceSpec.diag_spike(0.08),
        CovarianceSpec.diag_spike(0.25),
        CovarianceSpec.banded(0.5, 0.4),
        CovarianceSpec.banded(0.5, 0.8),
        CovarianceSpec.banded(-0.3, 1.0),
    ], ids=str)
    def test_factor_reproduces_sigma(self, spec):
        p = 1000
        f = covariance_factor(spec, p)
        sigma = spec.sigma(p)
        err = np.max(np.abs(f.dense() @ f.dense().T - sigma))
        assert err <= 1e-12 * np.max(np.abs(sigma))

    def test_non_positive_definite_rejected(self):
        with pytest.raises(FactorizationError):
            covariance_factor(CovarianceSpec.banded(0.6, 1.0), 50)


class TestApplyCovariance:
    def test_identity_is_noop(self):
        raw = sample_matrix(DistributionSpec.normal(), 6, 4, seed=1)
        assert apply_covariance(raw, CovarianceSpec.identity()) is raw

    def test_diag_spike_scales_rows(self):
        raw = DataMatrix(np.ones((2, 3)), 2, 3)
        out = apply_covariance(raw, CovarianceSpec.diag_spike(0.5))
        assert np.allclose(out.entries[0], np.sqrt(2))
        assert np.allclose(out.entries[1], 1.0)

    @pytest.mark.parametrize("spec", [
        CovarianceSpec.diag_spike(0.5),
        CovarianceSpec.banded(0.4, 1.0),
    ], ids=str)
    def test_monte_carlo_covariance(self, spec):
        # Sample covariance of 1e5 transformed Gaussian columns ~ Sigma.
        p, n = 6, 10 ** 5
        raw = sample_matrix(DistributionSpec.normal(), p, n, seed=77)
        out = apply_covariance(raw, spec)
        emp = out.entries @ out.entries.T / n
        assert np.max(np.abs(emp - spec.sigma(p))) <= 0.05


class TestIterRowBlocks:
    @pytest.mark.parametrize("spec", [
        CovarianceSpec.identity(),
        CovarianceSpec.diag_spike(0.3),
        CovarianceSpec.banded(0.5, 0.8),
    ], ids=str)
    def test_matches_dense_path(self, spec):
        dist = DistributionSpec.exp1()
        p, n, seed = 137, 11, 3
        dense = apply_covariance(sample_matrix(dist, p, n, seed), spec)
        streamed = np.vstack(list(iter_row_blocks(dist, spec, p, n, seed,
                                                  block_rows=16)))
        assert np.array_equal(streamed, dense.entries)


class TestStandardize:
    def test_none_is_noop(self):
        data = sample_matrix(DistributionSpec.normal(), 5, 8, seed=2)
        assert standardize(data, "none") is data

    def test_constant_row_rejected(self):
        data = DataMatrix(np.vstack([np.ones(4), np.arange(4.0)]), 2, 4)
        with pytest.raises(DegenerateVariableError):
            standardize(data, "per-variable")

    def test_per_variable_two_points(self):
        data = DataMatrix(np.array([[0.0, 2.0]]), 1, 2)
        out = standardize(data, "per-variable")
        assert out.entries.mean() == pytest.approx(0.0, abs=1e-15)
        assert out.entries.std(ddof=1) == pytest.approx(1.0)

    def test_global_moments(self):
        data = sample_matrix(DistributionSpec.exp1(), 10, 20, seed=6)
        out = standardize(data, "global")
        assert out.entries.mean() == pytest.approx(0.0, abs=1e-12)
        assert out.entries.std(ddof=1) == pytest.approx(1.0)


class TestCsvRoundTrip:
    def test_round_trip(self, tmp_path):
        data = sample_matrix(DistributionSpec.t6(), 7, 5, seed=11)
        path = tmp_path / "m.csv"
        save_matrix_csv(data, path)
        back = load_matrix_csv(path)
        assert back.p == 7 and back.n == 5
        assert np.allclose(back.entries, data.entries, rtol=0, atol=0)

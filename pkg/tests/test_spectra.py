import numpy as np
import pytest

from hdlss import semicircle
from hdlss.datagen import DataMatrix, DistributionSpec, iter_row_blocks, \
    sample_matrix, CovarianceSpec
from hdlss.functions import HALFX3, XSQ, polynomial
from hdlss.spectra import (NormalizedMatrix, eigenvalues, frobenius_trace,
                           gram_from_blocks, lss, normalized_gram)


def random_normalized(n, p, seed):
    data = sample_matrix(DistributionSpec.normal(), p, n, seed)
    return normalized_gram(data)


class TestNormalizedGram:
    def test_zero_matrix(self):
        data = DataMatrix(np.zeros((6, 3)), 6, 3)
        a = normalized_gram(data)
        assert np.allclose(a.entries, -np.sqrt(6 / 3) * np.eye(3))

    def test_hand_computed_singleton(self):
        # p=2, n=1, X = (1,1)': X'X = 2 = p, so A = [0].
        data = DataMatrix(np.ones((2, 1)), 2, 1)
        a = normalized_gram(data)
        assert a.entries.shape == (1, 1)
        assert a.entries[0, 0] == pytest.approx(0.0, abs=1e-15)

    def test_symmetric(self):
        a = random_normalized(8, 50, seed=3)
        assert np.array_equal(a.entries, a.entries.T)

    def test_trace_identity(self):
        data = sample_matrix(DistributionSpec.exp1(), 40, 9, seed=5)
        a = normalized_gram(data)
        x = data.entries
        expected = (np.sum(x * x) - 40 * 9) / np.sqrt(40 * 9)
        assert a.trace() == pytest.approx(expected, rel=1e-12)

    def test_blocked_matches_dense(self):
        dist = DistributionSpec.t6()
        cov = CovarianceSpec.identity()
        p, n, seed = 100, 7, 9
        dense = normalized_gram(sample_matrix(dist, p, n, seed))
        blocked = gram_from_blocks(
            iter_row_blocks(dist, cov, p, n, seed, block_rows=13), p, n)
        assert np.allclose(blocked.entries, dense.entries, atol=1e-12)


class TestEigenvalues:
    def test_two_by_two(self):
        a = NormalizedMatrix(np.array([[0.0, 1.5], [1.5, 0.0]]), 2, 8)
        spec = eigenvalues(a)
        assert np.allclose(spec.values, [-1.5, 1.5])

    def test_scaled_identity(self):
        data = DataMatrix(np.zeros((18, 2)), 18, 2)
        spec = eigenvalues(normalized_gram(data))
        assert np.allclose(spec.values, -3.0)

    def test_against_characteristic_polynomial(self):
        # Brute-force oracle: roots of det(A - x I) via np.poly/np.roots.
        a = random_normalized(5, 30, seed=21)
        spec = eigenvalues(a)
        roots = np.sort(np.roots(np.poly(a.entries)).real)
        assert np.allclose(spec.values, roots, atol=1e-8)

    def test_sum_matches_trace(self):
        a = random_normalized(20, 400, seed=2)
        spec = eigenvalues(a)
        scale = max(1.0, abs(a.trace()))
        assert abs(spec.values.sum() - a.trace()) <= 1e-8 * scale


class TestLss:
    def test_two_point_spectrum(self):
        from hdlss.spectra import Spectrum
        spec = Spectrum(np.array([-1.0, 1.0]), 2, 4)
        assert lss(spec, XSQ) == pytest.approx(2.0)

    def test_all_zero_spectrum(self):
        from hdlss.spectra import Spectrum
        n = 6
        spec = Spectrum(np.zeros(n), n, 36)
        f = polynomial([4.0, 1.0, 2.0])
        assert lss(spec, f) == pytest.approx(n * 4.0)

    def test_direct_summation_oracle(self):
        from hdlss.spectra import Spectrum
        vals = np.array([-1.3, -0.2, 0.7, 1.9])
        spec = Spectrum(vals, 4, 16)
        oracle = sum(0.5 * v * (v * v - 3.0) for v in vals)
        assert lss(spec, HALFX3) == pytest.approx(oracle, abs=1e-12)


class TestFrobeniusTrace:
    def test_zero(self):
        a = NormalizedMatrix(np.zeros((3, 3)), 3, 9)
        assert frobenius_trace(a) == 0.0

    def test_swap_matrix(self):
        a = NormalizedMatrix(np.array([[0.0, 1.0], [1.0, 0.0]]), 2, 4)
        assert frobenius_trace(a) == pytest.approx(2.0)

    def test_matches_eigensolve(self):
        a = random_normalized(6, 60, seed=13)
        spec = eigenvalues(a)
        assert frobenius_trace(a) == pytest.approx(
            float(np.sum(spec.values ** 2)), rel=1e-10)


class TestSpectrumAsymptotics:
    @pytest.mark.slow
    def test_support_concentration(self):
        # Largest |eigenvalue| stays near the support edge 2 for nearly
        # all replications once n = 200, p = n^2.
        n, p = 200, 200 ** 2
        dist = DistributionSpec.normal()
        inside = 0
        for r in range(200):
            blocks = iter_row_blocks(dist, CovarianceSpec.identity(), p, n,
                                     seed=1000, rep=r)
            spec = eigenvalues(gram_from_blocks(blocks, p, n))
            if np.max(np.abs(spec.values)) <= 2.5:
                inside += 1
        assert inside >= 0.99 * 200

    def test_esd_close_to_semicircle(self):
        n, p = 500, 500 ** 2
        blocks = iter_row_blocks(DistributionSpec.normal(),
                                 CovarianceSpec.identity(), p, n, seed=8)
        spec = eigenvalues(gram_from_blocks(blocks, p, n))
        grid = np.sort(spec.values)
        ecdf_hi = np.arange(1, n + 1) / n
        ecdf_lo = np.arange(n) / n
        theory = semicircle.cdf(grid)
        ks = max(np.max(np.abs(ecdf_hi - theory)),
                 np.max(np.abs(theory - ecdf_lo)))
        assert ks <= 0.05

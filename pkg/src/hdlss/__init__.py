"""Linear spectral statistics of normalized sample covariance matrices
in the p >> n regime: CLT constants, contour mean corrections, the
identity-covariance test, and a seeded Monte Carlo harness."""

from .correction import (CorrectionOptions, LssResult, asymptotic_cov_integral,
                         asymptotic_cov_series, asymptotic_mean, gn_statistic,
                         mean_correction, qn_statistic)
from .datagen import (CovarianceSpec, DataMatrix, DistributionSpec,
                      apply_covariance, covariance_factor, sample_matrix,
                      standardize)
from .functions import BUILTINS, TestFunction, by_name, polynomial
from .harness import (ExperimentConfig, McReport, qq_export,
                      run_calibrated_moments, run_power, run_size)
from .identity_test import TestResult, l_n, nu4_hat, test_identity
from .semicircle import (cdf, density, m_prime, moment, psi_k,
                         semicircle_integral, stieltjes_m)
from .spectra import (NormalizedMatrix, Spectrum, eigenvalues,
                      frobenius_trace, lss, normalized_gram)

__version__ = "0.1.0"

__all__ = [
    "BUILTINS", "CorrectionOptions", "CovarianceSpec", "DataMatrix",
    "DistributionSpec", "ExperimentConfig", "LssResult", "McReport",
    "NormalizedMatrix", "Spectrum", "TestFunction", "TestResult",
    "apply_covariance", "asymptotic_cov_integral", "asymptotic_cov_series",
    "asymptotic_mean", "by_name", "cdf", "covariance_factor", "density",
    "eigenvalues", "frobenius_trace", "gn_statistic", "l_n", "lss",
    "m_prime", "mean_correction", "moment", "normalized_gram", "nu4_hat",
    "polynomial", "psi_k", "qn_statistic", "qq_export",
    "run_calibrated_moments", "run_power", "run_size", "sample_matrix",
    "semicircle_integral", "standardize", "stieltjes_m", "test_identity",
]

"""Data generation for p x n matrices with i.i.d. standardized entries.

Conventions
-----------
- Matrices are stored with rows = variables (p rows) and columns =
  observations (n columns).
- All entry laws are standardized to mean 0 and variance 1; the exact
  fourth moment of the standardized law is available as ``nu4``.
- Population covariance is applied on the left, ``Y = L @ X`` with
  ``L @ L.T = Sigma``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, Optional

import numpy as np
from numpy.random import Generator, SFC64, SeedSequence


class InvalidDimensionError(ValueError):
    """Matrix dimensions are zero or inconsistent."""


class FactorizationError(ValueError):
    """Covariance design is not positive definite at the requested size."""


class DegenerateVariableError(ValueError):
    """A variable has zero sample variance and cannot be standardized."""


_DIST_KINDS = ("normal", "exp1", "t6", "gamma", "rademacher")


@dataclass(frozen=True)
class DistributionSpec:
    """An i.i.d. entry law, standardized to mean 0 / variance 1.

    ``kind`` is one of ``normal`` (standard Gaussian), ``exp1`` (centered
    exponential with rate 1), ``t6`` (Student t with 6 df, rescaled to unit
    variance), ``gamma`` (standardized Gamma(shape, scale)) and
    ``rademacher`` (symmetric +/-1).
    """

    kind: str
    shape: Optional[float] = None
    scale: Optional[float] = None

    def __post_init__(self):
        if self.kind not in _DIST_KINDS:
            raise ValueError(f"unknown distribution kind {self.kind!r}; "
                             f"expected one of {_DIST_KINDS}")
        if self.kind == "gamma":
            if self.shape is None or self.shape <= 0:
                raise ValueError("gamma distribution needs a positive shape")
            if self.scale is None or self.scale <= 0:
                raise ValueError("gamma distribution needs a positive scale")

    @property
    def nu4(self) -> float:
        """Exact fourth moment of the standardized entry law."""
        if self.kind == "normal":
            return 3.0
        if self.kind == "exp1":
            return 9.0
        if self.kind == "t6":
            return 6.0
        if self.kind == "rademacher":
            return 1.0
        # Gamma(k, theta): excess kurtosis 6/k.
        return 3.0 + 6.0 / self.shape

    def draw(self, rng: Generator, size) -> np.ndarray:
        """Draw standardized variates of the given shape."""
        if self.kind == "normal":
            return rng.standard_normal(size)
        if self.kind == "exp1":
            return rng.standard_exponential(size) - 1.0
        if self.kind == "t6":
            # Var t(6) = 6/4 = 1.5; rescale to unit variance.
            return rng.standard_t(6, size) / np.sqrt(1.5)
        if self.kind == "rademacher":
            return (2.0 * rng.integers(0, 2, size) - 1.0).astype(np.float64)
        mean = self.shape * self.scale
        sd = self.scale * np.sqrt(self.shape)
        return (rng.gamma(self.shape, self.scale, size) - mean) / sd

    @classmethod
    def normal(cls) -> "DistributionSpec":
        return cls("normal")

    @classmethod
    def exp1(cls) -> "DistributionSpec":
        return cls("exp1")

    @classmethod
    def t6(cls) -> "DistributionSpec":
        return cls("t6")

    @classmethod
    def gamma(cls, shape: float, scale: float) -> "DistributionSpec":
        return cls("gamma", shape=shape, scale=scale)

    @classmethod
    def rademacher(cls) -> "DistributionSpec":
        return cls("rademacher")


_COV_KINDS = ("identity", "diag_spike", "banded")


@dataclass(frozen=True)
class CovarianceSpec:
    """Population covariance design.

    - ``identity``: Sigma = I_p.
    - ``diag_spike``: the first floor(nu * p) variances equal 2, the rest 1.
    - ``banded``: the leading floor(v2 * p) block is tridiagonal symmetric
      with unit diagonal and off-diagonal v1; the remainder is identity.
    """

    kind: str = "identity"
    nu: Optional[float] = None
    v1: Optional[float] = None
    v2: Optional[float] = None

    def __post_init__(self):
        if self.kind not in _COV_KINDS:
            raise ValueError(f"unknown covariance kind {self.kind!r}; "
                             f"expected one of {_COV_KINDS}")
        if self.kind == "diag_spike":
            if self.nu is None or not 0.0 < self.nu < 1.0:
                raise ValueError("diag_spike needs a fraction nu in (0, 1)")
        if self.kind == "banded":
            if self.v1 is None:
                raise ValueError("banded needs an off-diagonal value v1")
            if self.v2 is None or not 0.0 < self.v2 <= 1.0:
                raise ValueError("banded needs a fraction v2 in (0, 1]")

    @property
    def is_identity(self) -> bool:
        return self.kind == "identity"

    @classmethod
    def identity(cls) -> "CovarianceSpec":
        return cls("identity")

    @classmethod
    def diag_spike(cls, nu: float) -> "CovarianceSpec":
        return cls("diag_spike", nu=nu)

    @classmethod
    def banded(cls, v1: float, v2: float) -> "CovarianceSpec":
        return cls("banded", v1=v1, v2=v2)

    def sigma(self, p: int) -> np.ndarray:
        """Dense p x p population covariance matrix (for checks; O(p^2))."""
        out = np.eye(p)
        if self.kind == "diag_spike":
            k = int(np.floor(self.nu * p))
            out[np.arange(k), np.arange(k)] = 2.0
        elif self.kind == "banded":
            m = int(np.floor(self.v2 * p))
            idx = np.arange(m - 1)
            out[idx, idx + 1] = self.v1
            out[idx + 1, idx] = self.v1
        return out


@dataclass(frozen=True)
class CovarianceFactor:
    """Lower-bidiagonal factor L with L @ L.T equal to the design covariance.

    ``diag`` holds the main diagonal (length p); ``sub`` the subdiagonal
    (length p - 1) or None when the factor is diagonal.
    """

    diag: np.ndarray
    sub: Optional[np.ndarray] = None

    @property
    def p(self) -> int:
        return self.diag.shape[0]

    def apply(self, x: np.ndarray) -> np.ndarray:
        """Compute L @ x for x with p rows, without forming L."""
        if x.shape[0] != self.p:
            raise InvalidDimensionError(
                f"factor is {self.p}x{self.p}, input has {x.shape[0]} rows")
        y = self.diag[:, None] * x if x.ndim == 2 else self.diag * x
        if self.sub is not None:
            if x.ndim == 2:
                y[1:] += self.sub[:, None] * x[:-1]
            else:
                y[1:] += self.sub * x[:-1]
        return y

    def dense(self) -> np.ndarray:
        out = np.diag(self.diag)
        if self.sub is not None:
            out += np.diag(self.sub, k=-1)
        return out


def covariance_factor(spec: CovarianceSpec, p: int) -> CovarianceFactor:
    """Lower-triangular factor of the design covariance at dimension p.

    Identity and diagonal designs return diagonal factors without dense
    work; the banded design is factorized blockwise (its Cholesky factor
    is lower bidiagonal).
    """
    if p < 1:
        raise InvalidDimensionError("p must be at least 1")
    if spec.kind == "identity":
        return CovarianceFactor(np.ones(p))
    if spec.kind == "diag_spike":
        k = int(np.floor(spec.nu * p))
        d = np.ones(p)
        d[:k] = np.sqrt(2.0)
        return CovarianceFactor(d)

    m = int(np.floor(spec.v2 * p))
    diag = np.ones(p)
    sub = np.zeros(p - 1) if p > 1 else None
    if m >= 2:
        # Tridiagonal Toeplitz block: eigenvalues 1 + 2 v1 cos(k pi / (m+1)).
        min_eig = 1.0 + 2.0 * spec.v1 * np.cos(m * np.pi / (m + 1))
        max_eig = 1.0 + 2.0 * spec.v1 * np.cos(np.pi / (m + 1))
        if min(min_eig, max_eig) <= 0.0:
            raise FactorizationError(
                f"banded design with v1={spec.v1} is not positive definite "
                f"at block size {m}")
        d = np.empty(m)
        e = np.empty(m - 1)
        d[0] = 1.0
        for i in range(1, m):
            e[i - 1] = spec.v1 / d[i - 1]
            t = 1.0 - e[i - 1] ** 2
            if t <= 0.0:
                raise FactorizationError(
                    "banded design lost positive definiteness during "
                    f"factorization at row {i}")
            d[i] = np.sqrt(t)
        diag[:m] = d
        sub[:m - 1] = e
    return CovarianceFactor(diag, sub)


@dataclass(frozen=True)
class DataMatrix:
    """A p x n data matrix (rows = variables) with its generation seed."""

    entries: np.ndarray
    p: int
    n: int
    seed: int = 0

    def __post_init__(self):
        if self.entries.shape != (self.p, self.n):
            raise InvalidDimensionError(
                f"entries have shape {self.entries.shape}, "
                f"expected ({self.p}, {self.n})")


# A raw matrix (pre-covariance) has the same representation.
RawMatrix = DataMatrix


def make_rng(seed: int, rep: Optional[int] = None) -> Generator:
    """Deterministic generator; replication r gets stream (seed, r)."""
    entropy = (seed,) if rep is None else (seed, rep)
    return Generator(SFC64(SeedSequence(entropy)))


def sample_matrix(dist: DistributionSpec, p: int, n: int,
                  seed: int) -> RawMatrix:
    """Draw a p x n matrix of i.i.d. standardized entries."""
    if p < 1 or n < 1:
        raise InvalidDimensionError(f"need p >= 1 and n >= 1, got ({p}, {n})")
    rng = make_rng(seed)
    return RawMatrix(dist.draw(rng, (p, n)), p, n, seed)


def apply_covariance(raw: RawMatrix, spec: CovarianceSpec) -> DataMatrix:
    """Transform columns s -> L s so they have the design covariance."""
    if spec.is_identity:
        return raw
    factor = covariance_factor(spec, raw.p)
    return DataMatrix(factor.apply(raw.entries), raw.p, raw.n, raw.seed)


def iter_row_blocks(dist: DistributionSpec, cov: CovarianceSpec, p: int,
                    n: int, seed: int, rep: Optional[int] = None,
                    block_rows: int = 65536) -> Iterator[np.ndarray]:
    """Yield the rows of a data matrix in blocks, never materializing p x n.

    Produces the same variates as ``sample_matrix`` followed by
    ``apply_covariance`` would for the stream (seed, rep), in row order.
    The bidiagonal covariance factor couples adjacent rows, so a one-row
    carry is kept across block boundaries.
    """
    if p < 1 or n < 1:
        raise InvalidDimensionError(f"need p >= 1 and n >= 1, got ({p}, {n})")
    factor = None if cov.is_identity else covariance_factor(cov, p)
    rng = make_rng(seed, rep)
    prev_raw = None
    for start in range(0, p, block_rows):
        stop = min(start + block_rows, p)
        raw = dist.draw(rng, (stop - start, n))
        if factor is None:
            yield raw
            continue
        block = factor.diag[start:stop, None] * raw
        if factor.sub is not None:
            sub = factor.sub[max(start - 1, 0):stop - 1]
            if start == 0:
                block[1:] += sub[:, None] * raw[:-1]
            else:
                shifted = np.vstack([prev_raw[None, :], raw[:-1]])
                block += sub[:, None] * shifted
        prev_raw = raw[-1]
        yield block


def standardize(data: DataMatrix, mode: str = "none") -> DataMatrix:
    """Center/scale the data: per-variable, global, or not at all."""
    if mode == "none":
        return data
    x = data.entries
    if mode == "per-variable":
        if data.n < 2:
            raise InvalidDimensionError("per-variable mode needs n >= 2")
        mu = x.mean(axis=1, keepdims=True)
        sd = x.std(axis=1, ddof=1, keepdims=True)
        if np.any(sd == 0.0):
            bad = int(np.argmax(sd[:, 0] == 0.0))
            raise DegenerateVariableError(
                f"variable {bad} has zero sample variance")
        out = (x - mu) / sd
    elif mode == "global":
        sd = x.std(ddof=1)
        if sd == 0.0:
            raise DegenerateVariableError("data has zero overall variance")
        out = (x - x.mean()) / sd
    else:
        raise ValueError(f"unknown standardization mode {mode!r}")
    return DataMatrix(out, data.p, data.n, data.seed)


def save_matrix_csv(data: DataMatrix, path) -> None:
    """Write p rows x n columns, header-free, comma-separated."""
    np.savetxt(path, data.entries, delimiter=",", fmt="%.17g")


def load_matrix_csv(path) -> DataMatrix:
    """Read a header-free CSV matrix (rows = variables)."""
    x = np.atleast_2d(np.loadtxt(path, delimiter=",", dtype=np.float64))
    if x.size == 0:
        raise InvalidDimensionError(f"no data in {path!r}")
    return DataMatrix(x, x.shape[0], x.shape[1])

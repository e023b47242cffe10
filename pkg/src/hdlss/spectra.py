"""Normalized Gram matrix A = (X'X - p I)/sqrt(np) and its spectrum."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .datagen import DataMatrix, InvalidDimensionError
from .functions import TestFunction


class EigensolverError(RuntimeError):
    """Dense symmetric eigensolver failed to converge."""


@dataclass(frozen=True)
class NormalizedMatrix:
    """The n x n symmetric matrix sqrt(p/n) (X'X/p - I)."""

    entries: np.ndarray
    n: int
    p: int

    def trace(self) -> float:
        return float(np.trace(self.entries))


@dataclass(frozen=True)
class Spectrum:
    """Sorted (ascending) eigenvalues of a NormalizedMatrix plus sizes."""

    values: np.ndarray
    n: int
    p: int


def normalized_gram(data: DataMatrix) -> NormalizedMatrix:
    """Form A = (X'X - p I)/sqrt(np) via the n x n Gram product.

    The p x p outer product is never formed; cost is O(n^2 p).
    """
    x = data.entries
    p, n = data.p, data.n
    g = x.T @ x
    a = (g - p * np.eye(n)) / np.sqrt(n * p)
    a = 0.5 * (a + a.T)  # kill asymmetric rounding noise
    return NormalizedMatrix(a, n, p)


def gram_from_blocks(blocks: Iterable[np.ndarray], p: int,
                     n: int) -> NormalizedMatrix:
    """Accumulate A from row blocks of X without holding X in memory."""
    g = np.zeros((n, n))
    rows = 0
    for block in blocks:
        if block.shape[1] != n:
            raise InvalidDimensionError(
                f"block has {block.shape[1]} columns, expected {n}")
        g += block.T @ block
        rows += block.shape[0]
    if rows != p:
        raise InvalidDimensionError(f"blocks held {rows} rows, expected {p}")
    a = (g - p * np.eye(n)) / np.sqrt(n * p)
    a = 0.5 * (a + a.T)
    return NormalizedMatrix(a, n, p)


def eigenvalues(a: NormalizedMatrix) -> Spectrum:
    """Real eigenvalues of the symmetric matrix, ascending."""
    try:
        vals = np.linalg.eigvalsh(a.entries)
    except np.linalg.LinAlgError as exc:
        raise EigensolverError(str(exc)) from exc
    return Spectrum(vals, a.n, a.p)


def lss(spec: Spectrum, f: TestFunction) -> float:
    """The linear spectral statistic sum_j f(lambda_j)."""
    vals = f.real_eval(spec.values)
    if not np.all(np.isfinite(vals)):
        raise ValueError(f"{f.label} is not finite on the spectrum")
    return float(np.sum(vals))


def frobenius_trace(a: NormalizedMatrix) -> float:
    """tr(A A') = sum of squared entries = sum of squared eigenvalues."""
    return float(np.sum(a.entries * a.entries))


def save_spectrum_csv(spec: Spectrum, path) -> None:
    """One eigenvalue per line, for external plotting."""
    np.savetxt(path, spec.values, fmt="%.17g")

"""Semicircle-law analytics: density, CDF, moments, Stieltjes transform,
and the Chebyshev-coefficient functionals used by the CLT constants."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .functions import TestFunction


class BranchCutError(ValueError):
    """Stieltjes transform requested on the support [-2, 2]."""


DEFAULT_NODES = 256


def density(x) -> np.ndarray | float:
    """Semicircle density sqrt(4 - x^2) / (2 pi) on [-2, 2], else 0."""
    x = np.asarray(x, dtype=np.float64)
    out = np.where(np.abs(x) <= 2.0,
                   np.sqrt(np.clip(4.0 - x * x, 0.0, None)) / (2.0 * np.pi),
                   0.0)
    return float(out) if out.ndim == 0 else out


def cdf(x) -> np.ndarray | float:
    """Closed-form semicircle CDF, clamped to {0, 1} off the support."""
    x = np.asarray(x, dtype=np.float64)
    xc = np.clip(x, -2.0, 2.0)
    out = 0.5 + xc * np.sqrt(4.0 - xc * xc) / (4.0 * np.pi) \
        + np.arcsin(xc / 2.0) / np.pi
    out = np.clip(out, 0.0, 1.0)
    return float(out) if out.ndim == 0 else out


def moment(k: int) -> float:
    """k-th semicircle moment: Catalan(k/2) for even k, zero for odd."""
    if k < 0:
        raise ValueError("moment order must be nonnegative")
    if k % 2 == 1:
        return 0.0
    j = k // 2
    return float(math.comb(2 * j, j) // (j + 1))


def psi_k(f: TestFunction, k: int, nodes: int = DEFAULT_NODES) -> float:
    """k-th Chebyshev coefficient of f(2 cos t), by the midpoint node rule.

    (1/N) sum_j f(2 cos t_j) cos(k t_j) with t_j = (j - 1/2) pi / N;
    exact for polynomial integrands of harmonic degree below 2N.
    """
    if nodes < 1:
        raise ValueError("need at least one quadrature node")
    theta = (np.arange(nodes) + 0.5) * np.pi / nodes
    vals = f.real_eval(2.0 * np.cos(theta))
    if not np.all(np.isfinite(vals)):
        raise ValueError(f"{f.label} not finite on the quadrature nodes")
    return float(np.mean(vals * np.cos(k * theta)))


def psi_table(f: TestFunction, kmax: int,
              nodes: int = DEFAULT_NODES) -> np.ndarray:
    """Chebyshev coefficients for k = 0..kmax in one pass."""
    theta = (np.arange(nodes) + 0.5) * np.pi / nodes
    vals = f.real_eval(2.0 * np.cos(theta))
    if not np.all(np.isfinite(vals)):
        raise ValueError(f"{f.label} not finite on the quadrature nodes")
    ks = np.arange(kmax + 1)
    return np.cos(np.outer(ks, theta)) @ vals / nodes


def semicircle_integral(f: TestFunction, nodes: int = DEFAULT_NODES) -> float:
    """Integral of f against the semicircle law.

    Uses the weight identity sin^2 t = (1 - cos 2t)/2, i.e. the integral
    equals Psi_0(f) - Psi_2(f).
    """
    return psi_k(f, 0, nodes) - psi_k(f, 2, nodes)


@dataclass(frozen=True)
class StieltjesPoint:
    """A point z off [-2, 2] with the transform value m(z), |m| <= 1."""

    z: complex
    m: complex


def stieltjes_m(z) -> StieltjesPoint:
    """Solve m^2 + z m + 1 = 0 for the branch with |m| <= 1.

    The two roots multiply to 1; the larger-modulus root is computed
    without cancellation and the wanted one recovered as its reciprocal.
    Conjugate symmetry m(conj z) = conj(m(z)) holds exactly.
    """
    z = complex(z)
    if z.imag == 0.0 and abs(z.real) <= 2.0:
        raise BranchCutError(f"z = {z} lies on the branch cut [-2, 2]")
    if z.imag < 0.0:
        return StieltjesPoint(z, stieltjes_m(z.conjugate()).m.conjugate())
    s = np.sqrt(complex(z * z - 4.0))
    r1 = (-z + s) / 2.0
    r2 = (-z - s) / 2.0
    big = r1 if abs(r1) >= abs(r2) else r2
    return StieltjesPoint(z, 1.0 / big)


def m_prime(m) -> complex:
    """Derivative of the transform in terms of its value: m^2 / (1 - m^2)."""
    m = complex(m)
    denom = 1.0 - m * m
    if denom == 0.0:
        raise ZeroDivisionError("m = +/-1 is a singular point")
    return m * m / denom

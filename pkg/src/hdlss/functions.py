"""Analytic test functions evaluable on real and complex arguments."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np


@dataclass(frozen=True)
class TestFunction:
    """An analytic function used as the weight of a spectral statistic.

    ``fn`` must accept real or complex scalars/arrays (the complex path is
    the analytic continuation evaluated on contour images -m - 1/m).
    When ``derivative`` is absent, a central difference with step
    1e-6 * max(1, |x|) is used; results relying on it are approximate.
    """

    label: str
    fn: Callable[[np.ndarray], np.ndarray]
    derivative: Optional[Callable[[np.ndarray], np.ndarray]] = None

    def real_eval(self, x):
        return self.fn(np.asarray(x, dtype=np.float64))

    def complex_eval(self, w):
        return self.fn(np.asarray(w, dtype=np.complex128))

    @property
    def has_exact_derivative(self) -> bool:
        return self.derivative is not None

    def deriv(self, x):
        x = np.asarray(x, dtype=np.float64)
        if self.derivative is not None:
            return self.derivative(x)
        h = 1e-6 * np.maximum(1.0, np.abs(x))
        return (self.fn(x + h) - self.fn(x - h)) / (2.0 * h)


def polynomial(coeffs, label: Optional[str] = None) -> TestFunction:
    """Polynomial with ascending coefficients c0 + c1 x + c2 x^2 + ..."""
    poly = np.polynomial.Polynomial(list(coeffs))
    dpoly = poly.deriv()
    if label is None:
        label = "poly:" + ",".join(repr(float(c)) for c in coeffs)
    return TestFunction(label, poly, dpoly)


ONE = polynomial([1.0], label="one")
X = polynomial([0.0, 1.0], label="x")
XSQ = polynomial([0.0, 0.0, 1.0], label="xsq")
XCUB = polynomial([0.0, 0.0, 0.0, 1.0], label="xcub")
# f(x) = x (x^2 - 3) / 2, the cubic used in the calibration experiments;
# satisfies f(2 cos t) = cos(3 t).
HALFX3 = polynomial([0.0, -1.5, 0.0, 0.5], label="halfx3")

BUILTINS = {f.label: f for f in (ONE, X, XSQ, XCUB, HALFX3)}


def by_name(name: str) -> TestFunction:
    """Look up a builtin by name or parse "poly:c0,c1,..." coefficients."""
    if name in BUILTINS:
        return BUILTINS[name]
    if name.startswith("poly:"):
        try:
            coeffs = [float(c) for c in name[5:].split(",")]
        except ValueError as exc:
            raise ValueError(f"bad polynomial spec {name!r}") from exc
        if not coeffs:
            raise ValueError("polynomial spec needs at least one coefficient")
        return polynomial(coeffs, label=name)
    raise ValueError(
        f"unknown test function {name!r}; builtins: "
        + ", ".join(sorted(BUILTINS)) + ", or poly:c0,c1,...")

"""Special-function kernel: integer-order Bessel J_m and modified Bessel K_m
on the positive axis, plus Gauss-Legendre quadrature.

Values are delegated to scipy.special behind a contract with explicit
argument envelopes; exponentially scaled variants are exposed for the
exterior solutions at large mass, where K_m(kR) underflows. The test
suite pins the values against independent oracles (power-series bisection
for the first J_0 zero, quadrature of the integral representation for
K_0(1)), so the backing library is verified rather than trusted.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy import special as _sp

J_MAX_ORDER = 60
J_MAX_ARG = 1.0e3
K_MAX_ORDER = 60
K_MIN_ARG = 1.0e-6
K_MAX_ARG = 700.0


def bessel_j(m, x):
    """J_m(x) for integer m >= 0, 0 <= x <= 1e3."""
    if m < 0 or m > J_MAX_ORDER:
        raise ValueError(f"bessel_j order out of envelope [0, {J_MAX_ORDER}]: {m}")
    x = np.asarray(x, dtype=float)
    if np.any(x < 0) or np.any(x > J_MAX_ARG):
        raise ValueError(f"bessel_j argument out of envelope [0, {J_MAX_ARG}]")
    out = _sp.jv(m, x)
    return float(out) if out.ndim == 0 else out


def bessel_j_prime(m, x):
    """J_m'(x) = (m/x) J_m(x) - J_{m+1}(x); at x = 0 the limit is 1/2 for
    m = 1 and 0 for every other m >= 0."""
    x = np.asarray(x, dtype=float)
    safe = np.where(x > 0, x, 1.0)
    term = np.where(x > 0, m / safe * _sp.jv(m, x), 0.5 if m == 1 else 0.0)
    out = term - np.where(x > 0, _sp.jv(m + 1, x), 0.0)
    return float(out) if np.ndim(out) == 0 else out


def bessel_k(m, x):
    """K_m(x) for integer 0 <= m <= 60 and 1e-6 <= x <= 700."""
    if m < 0 or m > K_MAX_ORDER:
        raise ValueError(f"bessel_k order out of envelope [0, {K_MAX_ORDER}]: {m}")
    x = np.asarray(x, dtype=float)
    if np.any(x < K_MIN_ARG) or np.any(x > K_MAX_ARG):
        raise ValueError(f"bessel_k argument out of envelope [{K_MIN_ARG}, {K_MAX_ARG}]")
    out = _sp.kn(m, x)
    return float(out) if out.ndim == 0 else out


def bessel_k_scaled(m, x):
    """exp(x) * K_m(x); stable for arbitrarily large x (x > 0)."""
    if m < 0 or m > K_MAX_ORDER:
        raise ValueError(f"bessel_k_scaled order out of envelope [0, {K_MAX_ORDER}]: {m}")
    x = np.asarray(x, dtype=float)
    if np.any(x <= 0):
        raise ValueError("bessel_k_scaled requires x > 0")
    out = _sp.kve(m, x)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class QuadratureRule:
    """Gauss-Legendre nodes/weights on [-1, 1]."""

    nodes: np.ndarray
    weights: np.ndarray

    def mapped(self, a, b):
        """Nodes and weights transported to the interval [a, b]."""
        mid, half = 0.5 * (a + b), 0.5 * (b - a)
        return mid + half * self.nodes, half * self.weights

    def integrate(self, f, a, b):
        x, w = self.mapped(a, b)
        return np.sum(w * f(x))


def gauss_legendre(n):
    """n-point Gauss-Legendre rule, 2 <= n <= 512."""
    if not 2 <= n <= 512:
        raise ValueError(f"gauss_legendre size out of range [2, 512]: {n}")
    x, w = leggauss(n)
    return QuadratureRule(nodes=x, weights=w)

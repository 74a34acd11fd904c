"""Exact small-matrix kernel for the 2D/3D Dirac Clifford algebra.

Provides the Pauli and Dirac matrices, the boundary matrix
B = -i*Theta*(Lambda . n) for a unit outward normal n, its spectral
projectors P+- = (I +- B)/2, the closed-form exponential
exp(z*B) = cosh(z) I + sinh(z) B, and a residual report for the
identity set everything downstream relies on:

    Theta P- = P+ Theta,   Theta P+ = P- Theta,
    B P+- = +-P+-,         Theta B = -i Lambda . n,
    {B, Theta} = 0,        P+- exp(z B) = exp(+-z) P+-.

All matrices are small fixed-size dense complex numpy arrays; every
operation is a pure function, so everything here is thread-safe.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

_I2 = np.eye(2, dtype=complex)
_I4 = np.eye(4, dtype=complex)

_PAULI = (
    np.array([[0, 1], [1, 0]], dtype=complex),
    np.array([[0, -1j], [1j, 0]], dtype=complex),
    np.array([[1, 0], [0, -1]], dtype=complex),
)


def pauli(k):
    """Return the 2x2 Pauli matrix sigma_k, k in {1, 2, 3}."""
    if k not in (1, 2, 3):
        raise ValueError(f"pauli index must be 1, 2 or 3, got {k!r}")
    return _PAULI[k - 1].copy()


def _build_dirac():
    alphas = []
    for k in (1, 2, 3):
        a = np.zeros((4, 4), dtype=complex)
        a[:2, 2:] = _PAULI[k - 1]
        a[2:, :2] = _PAULI[k - 1]
        alphas.append(a)
    beta = np.zeros((4, 4), dtype=complex)
    beta[:2, :2] = _I2
    beta[2:, 2:] = -_I2
    return alphas[0], alphas[1], alphas[2], beta


_DIRAC = _build_dirac()


def dirac_matrices():
    """Return (alpha_1, alpha_2, alpha_3, beta) as 4x4 block matrices.

    alpha_k = [[0, sigma_k], [sigma_k, 0]], beta = diag(I2, -I2).
    """
    return tuple(m.copy() for m in _DIRAC)


def theta_matrix(dim):
    """The mass-sign matrix: sigma_3 in dimension 2, beta in dimension 4."""
    if dim == 2:
        return pauli(3)
    if dim == 4:
        return _DIRAC[3].copy()
    raise ValueError(f"spinor dimension must be 2 or 4, got {dim!r}")


def lambda_dot(dim, n):
    """Lambda . n: sigma . n for dim 2 (n in R^2), alpha . n for dim 4 (n in R^3)."""
    n = np.asarray(n, dtype=float)
    if dim == 2:
        if n.shape != (2,):
            raise ValueError("dim 2 requires a normal in R^2")
        return n[0] * _PAULI[0] + n[1] * _PAULI[1]
    if dim == 4:
        if n.shape != (3,):
            raise ValueError("dim 4 requires a normal in R^3")
        a1, a2, a3, _ = _DIRAC
        return n[0] * a1 + n[1] * a2 + n[2] * a3
    raise ValueError(f"spinor dimension must be 2 or 4, got {dim!r}")


def boundary_matrix(dim, n):
    """B = -i * Theta * (Lambda . n) for a unit outward normal n.

    Hermitian, traceless, B^2 = I.
    """
    n = np.asarray(n, dtype=float)
    if abs(np.linalg.norm(n) - 1.0) > 1e-12:
        raise ValueError(f"normal must be a unit vector, |n| = {np.linalg.norm(n)!r}")
    return -1j * theta_matrix(dim) @ lambda_dot(dim, n)


def projectors(B):
    """Spectral projectors P+- = (I +- B)/2 of an involution B."""
    B = np.asarray(B, dtype=complex)
    eye = np.eye(B.shape[0], dtype=complex)
    if np.max(np.abs(B @ B - eye)) > 1e-12:
        raise ValueError("projectors() requires B^2 = I within 1e-12")
    return 0.5 * (eye + B), 0.5 * (eye - B)


def exp_zB(B, z):
    """exp(z*B) = cosh(z) I + sinh(z) B, exact for any involution B."""
    B = np.asarray(B, dtype=complex)
    eye = np.eye(B.shape[0], dtype=complex)
    return np.cosh(z) * eye + np.sinh(z) * B


@dataclass(frozen=True)
class BoundaryFrame2D:
    """Eigenframe of the 2D boundary matrix at normal angle theta.

    a = i*exp(i*theta); plus_dir and minus_dir are the unit +1/-1
    eigenvectors of B, proportional to (1, a) and (1, -a).
    """

    theta: float
    a: complex
    plus_dir: np.ndarray
    minus_dir: np.ndarray


def tangent_frame_2d(theta):
    """Frame of B at outward-normal angle theta (radians)."""
    a = 1j * np.exp(1j * theta)
    plus_dir = np.array([1.0, a], dtype=complex) / np.sqrt(2.0)
    minus_dir = np.array([1.0, -a], dtype=complex) / np.sqrt(2.0)
    return BoundaryFrame2D(theta=float(theta), a=a, plus_dir=plus_dir, minus_dir=minus_dir)


@dataclass(frozen=True)
class IdentityReport:
    """Max absolute residual per identity, keyed by a short name."""

    residuals: dict

    @property
    def worst(self):
        return max(self.residuals.values())


def verify_identities(dim, n, z=1.0):
    """Residuals of the projector/boundary-matrix identity set at normal n.

    The exponential identities are reported relative to exp(|z|) so large z
    does not inflate the residual artificially.
    """
    n = np.asarray(n, dtype=float)
    theta = theta_matrix(dim)
    lam_n = lambda_dot(dim, n)
    B = boundary_matrix(dim, n)
    Pp, Pm = projectors(B)
    E = exp_zB(B, z)
    scale = np.exp(abs(z))
    res = {
        "theta_pminus_swap": np.max(np.abs(theta @ Pm - Pp @ theta)),
        "theta_pplus_swap": np.max(np.abs(theta @ Pp - Pm @ theta)),
        "b_pplus_eigen": np.max(np.abs(B @ Pp - Pp)),
        "b_pminus_eigen": np.max(np.abs(B @ Pm + Pm)),
        "theta_b_product": np.max(np.abs(theta @ B - (-1j) * lam_n)),
        "b_theta_anticommute": np.max(np.abs(B @ theta + theta @ B)),
        "exp_zb_pplus": np.max(np.abs(Pp @ E - np.exp(z) * Pp)) / scale,
        "exp_zb_pminus": np.max(np.abs(Pm @ E - np.exp(-z) * Pm)) / scale,
    }
    return IdentityReport(residuals={k: float(v) for k, v in res.items()})


def identity_suite(dim, samples, seed, z_range=(-5.0, 5.0)):
    """Worst residual per identity over `samples` random unit normals.

    Randomness flows from a counter-based Philox generator so runs are
    reproducible for a fixed seed. All samples are verified in one batched
    computation (stacked matrices), matching verify_identities pointwise.
    """
    rng = np.random.Generator(np.random.Philox(seed))
    if dim == 2:
        t = rng.uniform(0.0, 2.0 * np.pi, samples)
        n = np.column_stack([np.cos(t), np.sin(t)])
        comps = _PAULI[:2]
    elif dim == 4:
        v = rng.standard_normal((samples, 3))
        n = v / np.linalg.norm(v, axis=1, keepdims=True)
        comps = _DIRAC[:3]
    else:
        raise ValueError(f"spinor dimension must be 2 or 4, got {dim!r}")
    z = rng.uniform(*z_range, samples)

    theta = theta_matrix(dim)
    eye = np.eye(dim, dtype=complex)
    lam_n = np.tensordot(n, np.stack(comps), axes=(1, 0))  # (samples, dim, dim)
    B = -1j * theta @ lam_n
    Pp = 0.5 * (eye + B)
    Pm = 0.5 * (eye - B)
    zc = z[:, None, None]
    E = np.cosh(zc) * eye + np.sinh(zc) * B
    scale = np.exp(np.abs(zc))

    def worst(x):
        return float(np.max(np.abs(x)))

    res = {
        "theta_pminus_swap": worst(theta @ Pm - Pp @ theta),
        "theta_pplus_swap": worst(theta @ Pp - Pm @ theta),
        "b_pplus_eigen": worst(B @ Pp - Pp),
        "b_pminus_eigen": worst(B @ Pm + Pm),
        "theta_b_product": worst(theta @ B - (-1j) * lam_n),
        "b_theta_anticommute": worst(B @ theta + theta @ B),
        "exp_zb_pplus": worst((Pp @ E - np.exp(zc) * Pp) / scale),
        "exp_zb_pminus": worst((Pm @ E - np.exp(-zc) * Pm) / scale),
    }
    return IdentityReport(residuals=res)

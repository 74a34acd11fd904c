"""Boundary-layer profiles of the barrier eigenfunctions near the boundary.

In the fast variable z = M * dist(x, boundary), the exterior part of an
eigenfunction is described by profiles V^j(x, z) with

    V^0(x, z) = exp(-z B) alpha_0(x),        P- alpha_0 = 0,
    V^j(x, z) = sum_k alpha_{j,k}(x) z^{k-1} exp(-z),

where the coefficients are generated by a Duhamel recursion driven by
B Theta (T - xi) applied to the previous profile. Boundary fields are
represented by samples on a uniform periodic arclength grid and split in
the pointwise eigenframe (1, a(s)), (1, -a(s)) of B; in that frame, with
a constant extension along the inward normal, the operator acts on the
frame scalars (p, q) as

    (T - xi)[(1,a)p + (1,-a)q] = (1,a)[(-i d/ds + kappa/2 - xi) p - (kappa/2) q]
                               + (1,-a)[(kappa/2) p + (i d/ds - kappa/2 - xi) q].

The Duhamel integral is evaluated in closed form on the z^{k-1} e^{-z}
family, so the only discretization error is the 8th-order periodic
differentiation in arclength.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import NumericalError, ValidationError

_D8 = np.array([4.0 / 5.0, -1.0 / 5.0, 4.0 / 105.0, -1.0 / 280.0])


@dataclass(frozen=True)
class CollarSpec:
    """Uniform periodic arclength grid on the boundary plus collar data.

    s: arclength samples; normal_angle: angle of the outward normal at the
    samples; kappa: curvature (positive for a counterclockwise convex
    boundary); delta: collar half-width; perimeter: total length.
    """

    s: np.ndarray
    normal_angle: np.ndarray
    kappa: np.ndarray
    delta: float
    perimeter: float

    @property
    def a(self):
        return 1j * np.exp(1j * self.normal_angle)

    def cutoff(self, t):
        """Smooth cutoff: 1 on [0, delta/2], 0 at delta."""
        t = np.asarray(t, dtype=float)
        x = np.clip((t - 0.5 * self.delta) / (0.5 * self.delta), 0.0, 1.0)
        return np.where(x <= 0, 1.0, np.where(x >= 1, 0.0, np.exp(1.0 - 1.0 / np.maximum(1.0 - x**2, 1e-300))))


def disk_collar(R, n_samples=256, delta=None):
    s = np.arange(n_samples) * (2.0 * math.pi * R / n_samples)
    return CollarSpec(
        s=s,
        normal_angle=s / R,
        kappa=np.full(n_samples, 1.0 / R),
        delta=delta if delta is not None else 0.5 * R,
        perimeter=2.0 * math.pi * R,
    )


def _deriv_periodic(g, ds):
    """8th-order central difference of a periodic sample vector."""
    out = np.zeros_like(g, dtype=complex)
    for k, c in enumerate(_D8, start=1):
        out += c * (np.roll(g, -k) - np.roll(g, k))
    return out / ds


def frame_split(samples, collar):
    """Frame scalars (p, q): samples = (1,a) p + (1,-a) q pointwise."""
    samples = np.asarray(samples, dtype=complex)
    ca = np.conj(collar.a)
    p = 0.5 * (samples[:, 0] + ca * samples[:, 1])
    q = 0.5 * (samples[:, 0] - ca * samples[:, 1])
    return p, q


def frame_join(p, q, collar):
    a = collar.a
    return np.stack([p + q, a * (p - q)], axis=1)


def project_plus(samples, collar):
    p, _ = frame_split(samples, collar)
    return frame_join(p, np.zeros_like(p), collar)


def project_minus(samples, collar):
    _, q = frame_split(samples, collar)
    return frame_join(np.zeros_like(q), q, collar)


def apply_B(samples, collar):
    p, q = frame_split(samples, collar)
    return frame_join(p, -q, collar)


def apply_theta(samples, collar):
    """sigma_3 swaps the frame directions, preserving the scalars."""
    p, q = frame_split(samples, collar)
    return frame_join(q, p, collar)


def apply_T_split(samples, collar, xi):
    """(T - xi) on a boundary field, constant extension along the normal."""
    ds = collar.s[1] - collar.s[0]
    p, q = frame_split(samples, collar)
    kap = collar.kappa
    P = -1j * _deriv_periodic(p, ds) + (0.5 * kap - xi) * p - 0.5 * kap * q
    Q = 0.5 * kap * p + 1j * _deriv_periodic(q, ds) - (0.5 * kap + xi) * q
    return frame_join(P, Q, collar)


def tangential_operator_2d(samples, collar, xi):
    """(-i d/ds + kappa/2 - xi) on the P+ frame scalar, re-embedded in (1, a)."""
    p, q = frame_split(samples, collar)
    if np.max(np.abs(q)) > 1e-10 * max(np.max(np.abs(p)), 1e-300):
        raise ValidationError("tangential_operator_2d requires samples in ran P+")
    ds = collar.s[1] - collar.s[0]
    out = -1j * _deriv_periodic(p, ds) + (0.5 * collar.kappa - xi) * p
    return frame_join(out, np.zeros_like(out), collar)


def leading_profile(alpha0, z):
    """V^0(x, z) = exp(-z B) alpha_0 = exp(-z) alpha_0 for alpha_0 in ran P+.

    z may be a scalar or an array; the result broadcasts z over the sample
    axis as shape (len(z), n_samples, 2) for array z.
    """
    alpha0 = np.asarray(alpha0, dtype=complex)
    z = np.asarray(z, dtype=float)
    if z.ndim == 0:
        return np.exp(-float(z)) * alpha0
    return np.exp(-z)[:, None, None] * alpha0[None, :, :]


def check_plus_range(alpha0, collar, tol=1e-10, what="alpha_0"):
    p, q = frame_split(alpha0, collar)
    if np.max(np.abs(q)) > tol * max(np.max(np.abs(p)), 1e-300):
        raise ValidationError(f"{what} must lie in ran P+ (P- part above tolerance)")


@dataclass
class ProfileStack:
    """Coefficients alpha[j][k-1] (arrays of shape (n, 2)) of
    V^j = sum_k alpha_{j,k} z^{k-1} e^{-z}, for j = 0..order."""

    collar: CollarSpec
    xi: complex
    alpha: list

    @property
    def order(self):
        return len(self.alpha) - 1

    def profile(self, j, z):
        """V^j evaluated at z (scalar or 1D array) -> (nz, n, 2) or (n, 2)."""
        z = np.asarray(z, dtype=float)
        zz = z[..., None, None]
        out = sum(
            a[None, ...] * zz ** k if z.ndim else a * float(z) ** k
            for k, a in enumerate(self.alpha[j])
        )
        return out * np.exp(-zz)

    def partial_sum(self, z, inv_mass, order=None):
        """V^0 + sum_{j>=1} inv_mass^j V^j up to the given order."""
        jmax = self.order if order is None else order
        out = self.profile(0, z)
        for j in range(1, jmax + 1):
            out = out + inv_mass**j * self.profile(j, z)
        return out


def make_stack(alpha0, collar, xi):
    check_plus_range(alpha0, collar)
    return ProfileStack(collar=collar, xi=xi, alpha=[[np.asarray(alpha0, dtype=complex)]])


def first_profile(alpha0, alpha1_plus, collar, xi):
    """Order-1 coefficients: alpha_{1,1} = P+ alpha_1 - (1/2) P- Theta (T-xi) alpha_0,
    alpha_{1,2} = -P+ Theta (T-xi) alpha_0."""
    check_plus_range(alpha0, collar)
    if alpha1_plus is None:
        alpha1_plus = np.zeros_like(np.asarray(alpha0, dtype=complex))
    else:
        check_plus_range(alpha1_plus, collar, what="alpha_1 data")
    w = apply_theta(apply_T_split(alpha0, collar, xi), collar)
    a11 = np.asarray(alpha1_plus, dtype=complex) - 0.5 * project_minus(w, collar)
    a12 = -project_plus(w, collar)
    stack = make_stack(alpha0, collar, xi)
    stack.alpha.append([a11, a12])
    return stack


def profile_recursion(stack, target_order, plus_data=None):
    """Extend the stack to the target order by the closed-form Duhamel step.

    At each step the coefficient of the growing exp(+z) branch is forced to
    zero, which fixes P- of the new leading coefficient; the free P+ data
    alpha_{j+1} defaults to zero unless supplied via plus_data[j+1].
    """
    plus_data = plus_data or {}
    while stack.order < target_order:
        j = stack.order
        coeffs = stack.alpha[j]
        w = []
        for a in coeffs:
            w.append(apply_B(apply_theta(apply_T_split(a, collar=stack.collar, xi=stack.xi), stack.collar), stack.collar))
        wp = [project_plus(x, stack.collar) for x in w]
        wm = [project_minus(x, stack.collar) for x in w]
        new = []
        for kap in range(1, j + 3):
            term = np.zeros_like(coeffs[0])
            if kap == 1:
                free = plus_data.get(j + 1)
                if free is not None:
                    check_plus_range(free, stack.collar, what="plus data")
                    term = term + np.asarray(free, dtype=complex)
            else:
                term = term - wp[kap - 2] / (kap - 1)
            for k in range(kap, j + 2):
                coef = math.factorial(k - 1) / (math.factorial(kap - 1) * 2.0 ** (k - kap + 1))
                term = term + coef * wm[k - 1]
            new.append(term)
        stack.alpha.append(new)
    return stack


def mode_boundary_scalar(mode, collar):
    """P+ frame scalar g(s) of a disk mode's boundary trace.

    The trace is (N u(R) e^{i m theta}, i N v(R) e^{i (m+1) theta}) and at
    an eigenvalue v(R) = u(R), so the trace is (1, a) g with
    g = N u(R) e^{i m s / R}.
    """
    p = mode.problem
    uR, _ = mode.radial(np.asarray([p.R]))
    return uR[0] * np.exp(1j * p.m * collar.s / p.R)


def seed_stack_from_mode(mode, collar, xi=None):
    """Profile stack seeded by a confined-disk mode: alpha_0 = (1,a) g."""
    g = mode_boundary_scalar(mode, collar)
    alpha0 = frame_join(g, np.zeros_like(g), collar)
    return make_stack(alpha0, collar, mode.lam if xi is None else xi)


def tangential_eigenvalue_residual(mode, collar, xi=0.0):
    """Diagnostic for the candidate identity P+ (T - xi) P+ alpha_0 = P+ f
    with alpha_0 the trace of f/(lambda - xi): relative residual, reported
    only (nonzero in general; the disk value is
    |((2m+1)/(2R) - xi)/(lambda - xi) - 1|)."""
    g = mode_boundary_scalar(mode, collar)
    alpha0 = frame_join(g / (mode.lam - xi), np.zeros_like(g), collar)
    lhs = tangential_operator_2d(alpha0, collar, xi)
    rhs = frame_join(g, np.zeros_like(g), collar)
    return float(np.max(np.abs(lhs - rhs)) / np.max(np.abs(rhs)))


def _exact_layer_samples(mode, collar, z):
    """Exact exterior eigenfunction samples at distance t = z/M, as spinors
    on the boundary grid: shape (nz, n, 2)."""
    p = mode.problem
    if not np.isfinite(p.mass):
        raise ValidationError("exact layer comparison needs a finite-mass mode")
    r = p.R + np.asarray(z, dtype=float) / p.mass
    u, v = mode.radial(r)
    th = collar.s / p.R
    ph_u = np.exp(1j * p.m * th)
    ph_v = 1j * np.exp(1j * (p.m + 1) * th)
    return np.stack(
        [u[:, None] * ph_u[None, :], v[:, None] * ph_v[None, :]], axis=2
    )


def compare_exterior(mode, stack, z_max=10.0, nz=201):
    """Sup-norm error of V^0 (and V^0 + V^1/M when available) against the
    exact exterior eigenfunction, after matching the P+ frame scalar at z=0.

    The residual at z = 0 is the exact trace's P- component, which is
    O(1/M); it is part of err0 by construction.
    """
    p = mode.problem
    M = p.mass
    z = np.linspace(0.0, z_max, nz)
    exact = _exact_layer_samples(mode, collar=stack.collar, z=z)
    alpha0 = stack.alpha[0][0]
    g0, _ = frame_split(alpha0, stack.collar)
    pex, _ = frame_split(exact[0], stack.collar)
    c = np.vdot(pex, g0) / np.vdot(pex, pex)
    exact = c * exact
    v0 = stack.profile(0, z)
    err0 = float(np.max(np.abs(exact - v0)))
    result = {"err0": err0, "scale": float(np.max(np.abs(alpha0)))}
    if stack.order >= 1:
        approx1 = v0 + stack.profile(1, z) / M
        result["err1"] = float(np.max(np.abs(exact - approx1)))
    return result


def layer_comparison_table(mode, stack, z_max=10.0, nz=201, sample_index=0):
    """Per-z comparison at one boundary sample: exact exterior spinor vs
    the profile partial sum, after the same P+ frame-scalar matching as
    compare_exterior. Returns a dict of arrays z, exact (nz, 2),
    approx (nz, 2), abs_err (nz,)."""
    M = mode.problem.mass
    z = np.linspace(0.0, z_max, nz)
    exact = _exact_layer_samples(mode, collar=stack.collar, z=z)
    g0, _ = frame_split(stack.alpha[0][0], stack.collar)
    pex, _ = frame_split(exact[0], stack.collar)
    c = np.vdot(pex, g0) / np.vdot(pex, pex)
    exact = c * exact
    approx = stack.partial_sum(z, 1.0 / M)
    err = np.linalg.norm(exact - approx, axis=2)[:, sample_index]
    return {
        "z": z,
        "exact": exact[:, sample_index, :],
        "approx": approx[:, sample_index, :],
        "abs_err": err,
    }


def decay_rate_fit(mode, n_points=100):
    """Least-squares decay rate of log |f| on r in [R + 1/M, R + 5/M]."""
    p = mode.problem
    M = p.mass
    if not np.isfinite(M):
        raise ValidationError("decay_rate_fit needs a finite-mass mode")
    r = np.linspace(p.R + 1.0 / M, p.R + 5.0 / M, n_points)
    u, v = mode.radial(r)
    amp = np.sqrt(u * u + v * v)
    if np.any(amp <= 0):
        raise NumericalError("underflow in the exterior amplitude window")
    slope = np.polyfit(r, np.log(amp), 1)[0]
    k = math.sqrt((M - mode.lam) * (M + mode.lam))
    return {"rate": -float(slope), "k": k, "ratio": -float(slope) / k}

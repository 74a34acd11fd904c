import math

import numpy as np
import pytest

import oracles
from diracbag import disk_spectra as ds
from diracbag.errors import NumericalError, ValidationError


def test_first_eigenvalue_matches_fd_oracle_constant():
    lam = ds.eigenvalues_infinite(0, 1, 1.0)[0]
    assert abs(lam - oracles.LAMBDA_INF_M0_R1) < 1e-9


def test_eigenvalues_scale_inversely_with_radius():
    lam1 = ds.eigenvalues_infinite(2, 2, 1.0)
    lam2 = ds.eigenvalues_infinite(2, 2, 2.5)
    assert np.allclose(np.array(lam1) / 2.5, lam2, rtol=1e-10)


def test_negative_branch_roots():
    for m in (0, 1, -2):
        evs = ds.eigenvalues_infinite(m, 2, 1.0, sign=-1)
        assert all(ev < 0 for ev in evs)
        for ev in evs:
            assert abs(ds.secular_infinite(m, ev, 1.0)) < 1e-9


def test_secular_validation():
    with pytest.raises(ValidationError):
        ds.secular_infinite(0, 0.0, 1.0)
    with pytest.raises(ValidationError):
        ds.secular_finite(0, 120.0, 100.0, 1.0)


def test_finite_mass_eigenvalue_below_limit():
    lam_inf = ds.eigenvalues_infinite(0, 1, 1.0)[0]
    lam100 = ds.eigenvalue_finite_near(0, 100.0, 1.0, lam_inf)
    lam200 = ds.eigenvalue_finite_near(0, 200.0, 1.0, lam_inf)
    assert lam100 < lam200 < lam_inf
    # gap roughly halves when the mass doubles
    ratio = (lam_inf - lam100) / (lam_inf - lam200)
    assert 1.8 < ratio < 2.2


def test_mode_boundary_condition_infinite_mass():
    lam = ds.eigenvalues_infinite(1, 1, 1.0)[0]
    mode = ds.normalize_mode(ds.DiskProblem(R=1.0, m=1), lam)
    u, v = mode.radial(np.array([1.0]))
    assert abs(u[0] - v[0]) < 1e-10 * abs(u[0])


def test_mode_normalization_independent_quadrature():
    lam_inf = ds.eigenvalues_infinite(0, 1, 1.0)[0]
    M = 50.0
    lam = ds.eigenvalue_finite_near(0, M, 1.0, lam_inf)
    mode = ds.normalize_mode(ds.DiskProblem(R=1.0, m=0, mass=M), lam)
    # trapezoid on a fine radial grid, interior plus exterior tail
    r = np.linspace(1e-6, 1.0 + 40.0 / M, 200001)
    u, v = mode.radial(r)
    total = 2.0 * math.pi * np.trapezoid((u * u + v * v) * r, r)
    assert abs(total - 1.0) < 1e-5


def test_mode_exterior_decay():
    lam_inf = ds.eigenvalues_infinite(0, 1, 1.0)[0]
    M = 100.0
    lam = ds.eigenvalue_finite_near(0, M, 1.0, lam_inf)
    mode = ds.normalize_mode(ds.DiskProblem(R=1.0, m=0, mass=M), lam)
    u, _ = mode.radial(np.array([1.0, 1.0 + 3.0 / M]))
    k = math.sqrt(M * M - lam * lam)
    assert abs(u[1] / u[0]) < 1.1 * math.exp(-3.0 * k / M)


def test_normalize_mode_rejects_non_eigenvalue():
    with pytest.raises(ValidationError):
        ds.normalize_mode(ds.DiskProblem(R=1.0, m=0), 1.5)


def test_mu_prediction_value():
    # boundary-density prediction for the first m=0 mode at R=1; frozen
    # regression value, cross-checked against the grid Gram matrix
    lam = ds.eigenvalues_infinite(0, 1, 1.0)[0]
    mode = ds.normalize_mode(ds.DiskProblem(R=1.0, m=0), lam)
    assert abs(mode.mu_pred - 0.7674667414797) < 1e-10
    # tangential variant: ((2m+1)/(2R) - lambda) * mu_pred
    mu_t = ds.mu_tangential(mode)
    assert abs(mu_t - (0.5 - lam) * mode.mu_pred) < 1e-12
    # which collapses to -lambda/(2R) * (normalized boundary weight ~ 1)
    assert mu_t < 0


def test_quadratic_form_identity_random_fields():
    rng = np.random.Generator(np.random.Philox(5))
    for _ in range(3):
        phi = ds.SmoothSpinorField.random(rng, 1.0)
        rep = ds.quadratic_form_identity(phi, 3.0, 1.0)
        assert rep["relative_mismatch"] < 1e-8


def test_problem_validation():
    with pytest.raises(ValidationError):
        ds.DiskProblem(R=-1.0, m=0)
    with pytest.raises(ValidationError):
        ds.DiskProblem(R=1.0, m=0, mass=-5.0)

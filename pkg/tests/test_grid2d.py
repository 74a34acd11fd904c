import math

import numpy as np
import pytest

from diracbag import disk_spectra as ds
from diracbag import grid2d
from diracbag.errors import ValidationError


def test_parse_shape_formats():
    disk = grid2d.parse_shape("disk:R=1.5")
    assert disk.kind == "disk" and disk.max_radius() == pytest.approx(1.5)
    ell = grid2d.parse_shape("ellipse:a=1.2,b=0.8")
    assert ell.max_radius() == pytest.approx(1.2, abs=1e-3)
    star = grid2d.parse_shape("star:r0=1.0,c3=0.1")
    assert star.radius(np.array([0.0]))[0] == pytest.approx(1.1)


def test_parse_shape_validation():
    for bad in ("disk", "disk:R=zero", "pentagon:R=1", "disk:R=1,junk"):
        with pytest.raises(ValidationError):
            grid2d.parse_shape(bad)


def test_boundary_samples_disk_geometry():
    shape = grid2d.parse_shape("disk:R=2.0")
    bs = shape.boundary_samples(64)
    assert bs["perimeter"] == pytest.approx(4.0 * math.pi, rel=1e-6)
    assert np.allclose(bs["kappa"], 0.5, atol=1e-5)
    # outward normal points along the position vector on a disk
    rr = np.hypot(bs["x"], bs["y"])
    assert np.allclose(np.cos(bs["normal_angle"]), bs["x"] / rr, atol=1e-6)


def test_build_operator_guards():
    shape = grid2d.parse_shape("disk:R=1.0")
    with pytest.raises(ValidationError):
        grid2d.build_operator(shape, 100.0, 2.0, 0.9)  # resolution guard
    with pytest.raises(ValidationError):
        grid2d.build_operator(shape, 100.0, 2.0, 0.00313)  # h does not divide 2L
    with pytest.raises(ValidationError):
        grid2d.build_operator(shape, 10.0, 1.25, 1.0 / 64.0)  # margin guard


def test_operator_hermitian_and_matvec_agree():
    shape = grid2d.parse_shape("disk:R=1.0")
    op = grid2d.build_operator(shape, 10.0, 2.0, 1.0 / 16.0)
    H = op.assemble()
    assert abs(H - H.conj().T).max() < 1e-12
    rng = np.random.Generator(np.random.Philox(4))
    v = rng.standard_normal((2, op.N, op.N)) + 1j * rng.standard_normal((2, op.N, op.N))
    out1 = op.apply(v).ravel()
    out2 = H @ v.reshape(-1)
    assert np.max(np.abs(out1 - out2)) < 1e-12


def test_small_eigensolve_near_analytic():
    R, M, L, h = 1.0, 20.0, 2.0, 1.0 / 32.0
    shape = grid2d.parse_shape("disk:R=1.0")
    op = grid2d.build_operator(shape, M, L, h)
    lam_inf = ds.eigenvalues_infinite(0, 1, R)[0]
    lam_M = ds.eigenvalue_finite_near(0, M, R, lam_inf)
    vals, fields, res, info = grid2d.folded_spectrum_eigs(op, lam_inf, 1, seed=0)
    assert info["converged"]
    assert res[0] < 1e-4
    assert abs(vals[0] - lam_M) < 3 * h
    cluster = grid2d.orthonormalize_cluster(op, fields)
    tr = grid2d.boundary_trace(op, cluster[0], 256)
    gram = grid2d.gram_correction_matrix([tr])
    m11 = gram["matrix"][0, 0].real
    mode = ds.normalize_mode(ds.DiskProblem(R=R, m=0), lam_inf)
    assert abs(m11 - mode.mu_pred) < 0.25 * mode.mu_pred


def test_eigensolve_deterministic():
    shape = grid2d.parse_shape("disk:R=1.0")
    op = grid2d.build_operator(shape, 20.0, 2.0, 1.0 / 32.0)
    v1, _, _, _ = grid2d.folded_spectrum_eigs(op, 1.43, 1, seed=7)
    v2, _, _, _ = grid2d.folded_spectrum_eigs(op, 1.43, 1, seed=7)
    assert v1 == v2


def test_folded_spectrum_validation():
    shape = grid2d.parse_shape("disk:R=1.0")
    op = grid2d.build_operator(shape, 20.0, 2.0, 1.0 / 32.0)
    with pytest.raises(ValidationError):
        grid2d.folded_spectrum_eigs(op, 25.0, 1)  # shift outside the gap
    with pytest.raises(ValidationError):
        grid2d.folded_spectrum_eigs(op, 1.4, 13)


def test_boundary_trace_sample_guard():
    shape = grid2d.parse_shape("disk:R=1.0")
    op = grid2d.build_operator(shape, 20.0, 2.0, 1.0 / 32.0)
    field = np.ones((2, op.N, op.N), dtype=complex)
    with pytest.raises(ValidationError):
        grid2d.boundary_trace(op, field, samples=64)

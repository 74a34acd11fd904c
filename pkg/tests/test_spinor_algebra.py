import numpy as np
import pytest
from scipy.linalg import expm

from diracbag import spinor_algebra as sa


def test_pauli_products():
    s1, s2, s3 = sa.pauli(1), sa.pauli(2), sa.pauli(3)
    assert np.allclose(s1 @ s2, 1j * s3)
    assert np.allclose(s2 @ s3, 1j * s1)
    assert np.allclose(s3 @ s1, 1j * s2)
    for s in (s1, s2, s3):
        assert np.allclose(s @ s, np.eye(2))
        assert np.allclose(s, s.conj().T)


def test_pauli_index_validation():
    with pytest.raises(ValueError):
        sa.pauli(0)


def test_dirac_anticommutators():
    a1, a2, a3, beta = sa.dirac_matrices()
    mats = [a1, a2, a3, beta]
    for i, mi in enumerate(mats):
        for j, mj in enumerate(mats):
            acom = mi @ mj + mj @ mi
            expect = 2.0 * np.eye(4) if i == j else np.zeros((4, 4))
            assert np.allclose(acom, expect)


def test_boundary_matrix_requires_unit_normal():
    with pytest.raises(ValueError):
        sa.boundary_matrix(2, [1.0, 1.0])
    with pytest.raises(ValueError):
        sa.boundary_matrix(4, [0.5, 0.5, 0.5])


def test_boundary_matrix_involution_and_projectors():
    rng = np.random.Generator(np.random.Philox(7))
    for dim, nc in ((2, 2), (4, 3)):
        v = rng.standard_normal(nc)
        n = v / np.linalg.norm(v)
        B = sa.boundary_matrix(dim, n)
        assert np.allclose(B, B.conj().T)
        assert np.allclose(B @ B, np.eye(dim))
        Pp, Pm = sa.projectors(B)
        assert np.allclose(Pp @ Pp, Pp)
        assert np.allclose(Pm @ Pm, Pm)
        assert np.allclose(Pp @ Pm, np.zeros((dim, dim)))
        assert np.allclose(Pp + Pm, np.eye(dim))


def test_projectors_reject_non_involution():
    with pytest.raises(ValueError):
        sa.projectors(np.diag([1.0, 2.0]))


def test_exp_zb_matches_dense_expm():
    rng = np.random.Generator(np.random.Philox(11))
    for dim, nc in ((2, 2), (4, 3)):
        v = rng.standard_normal(nc)
        n = v / np.linalg.norm(v)
        B = sa.boundary_matrix(dim, n)
        for z in (-2.3, 0.0, 0.7, 4.1):
            assert np.allclose(sa.exp_zB(B, z), expm(z * B), atol=1e-10 * np.exp(abs(z)))


def test_tangent_frame_eigenvectors():
    for theta in (0.0, 0.9, 2.5, -1.1):
        fr = sa.tangent_frame_2d(theta)
        B = sa.boundary_matrix(2, [np.cos(theta), np.sin(theta)])
        assert np.allclose(B @ fr.plus_dir, fr.plus_dir)
        assert np.allclose(B @ fr.minus_dir, -fr.minus_dir)
        assert abs(fr.a - 1j * np.exp(1j * theta)) < 1e-14
        assert abs(np.vdot(fr.plus_dir, fr.minus_dir)) < 1e-14


def test_verify_identities_small_residuals():
    rep = sa.verify_identities(2, [0.6, 0.8], z=1.3)
    assert rep.worst < 1e-13
    rep4 = sa.verify_identities(4, [0.0, 0.6, 0.8], z=-2.0)
    assert rep4.worst < 1e-13


def test_identity_suite_deterministic():
    r1 = sa.identity_suite(4, samples=100, seed=3)
    r2 = sa.identity_suite(4, samples=100, seed=3)
    assert r1.residuals == r2.residuals
    assert r1.worst < 1e-13

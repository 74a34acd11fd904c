import numpy as np
import pytest

from diracbag import asympt_fit as af
from diracbag import disk_spectra as ds
from diracbag.errors import ValidationError


def _synthetic_table(mu1=-0.7, mu2=0.3, lam_inf=1.4, masses=(100, 200, 400, 800, 1600, 3200)):
    masses = np.array(masses, dtype=float)
    lam = lam_inf + mu1 / masses + mu2 / masses**2
    return af.SweepTable(
        masses=masses,
        eigenvalues=lam[:, None],
        cluster=af.ClusterSpec(lambda_inf=lam_inf, eta=0.5),
    )


def test_first_order_fit_bias_is_second_order():
    table = _synthetic_table()
    fit = af.fit_first_order(table)
    # weights M^2 make mu_hat the mean of M (lambda - lambda_inf), so the
    # bias is exactly mu2 * mean(1/M)
    expected_bias = 0.3 * np.mean(1.0 / table.masses)
    assert fit.mu_hat[0, 0] == pytest.approx(-0.7 + expected_bias, abs=1e-12)


def test_any_order_fit_recovers_both_coefficients():
    table = _synthetic_table()
    fit = af.fit_any_order(table, 2)
    assert fit.mu_hat[0, 0] == pytest.approx(-0.7, abs=1e-9)
    assert fit.mu_hat[1, 0] == pytest.approx(0.3, abs=1e-6)
    assert np.max(np.abs(fit.residuals)) < 1e-12
    assert fit.conditioning < 1e3
    assert fit.stability is not None


def test_fit_row_count_validation():
    table = _synthetic_table(masses=(100, 200, 400))
    with pytest.raises(ValidationError):
        af.fit_first_order(table)
    with pytest.raises(ValidationError):
        af.fit_any_order(_synthetic_table(masses=(100, 200, 400, 800)), 2)


def test_fit_order_cap():
    with pytest.raises(ValidationError):
        af.fit_any_order(_synthetic_table(), 5)


def test_fit_permutation_invariance():
    table = _synthetic_table()
    perm = np.array([3, 0, 5, 1, 4, 2])
    shuffled = af.SweepTable(
        masses=table.masses[perm],
        eigenvalues=table.eigenvalues[perm],
        cluster=table.cluster,
    )
    a = af.fit_any_order(table, 2)
    # fit_any_order requires increasing masses only via mass_sweep; the fit
    # itself is permutation invariant
    b = af.fit_any_order(shuffled, 2)
    assert np.allclose(a.mu_hat, b.mu_hat, atol=1e-12)


def test_default_cluster_isolation():
    cluster = af.default_cluster(0, 1.0)
    assert cluster.lambda_inf == pytest.approx(1.434695650819563, abs=1e-9)
    assert cluster.eta > 0
    with pytest.raises(ValidationError):
        cluster.validate_isolation([cluster.lambda_inf + 0.5 * cluster.eta])


def test_mass_sweep_validation():
    problem = ds.DiskProblem(R=1.0, m=0)
    cluster = af.default_cluster(0, 1.0)
    with pytest.raises(ValidationError):
        af.mass_sweep(problem, cluster, [100.0, 100.0])
    with pytest.raises(ValidationError):
        af.mass_sweep(problem, cluster, [5.0, 10.0])


def test_mass_sweep_disk_rows():
    problem = ds.DiskProblem(R=1.0, m=0)
    cluster = af.default_cluster(0, 1.0)
    table = af.mass_sweep(problem, cluster, [100.0, 200.0, 400.0, 800.0])
    assert table.eigenvalues.shape == (4, 1)
    assert table.flags == []
    assert np.all(np.diff(table.eigenvalues[:, 0]) > 0)


def test_loglog_slope_exact_power_law():
    masses = np.array([100.0, 200.0, 400.0, 800.0])
    assert af.loglog_slope(masses, 3.0 / masses) == pytest.approx(-1.0, abs=1e-12)
    with pytest.raises(ValidationError):
        af.loglog_slope(masses, np.zeros(4))


def test_compare_prediction():
    table = _synthetic_table(mu1=-0.7, mu2=0.0)
    fit = af.fit_first_order(table)
    out = af.compare_prediction(fit, np.array([[-0.7]]))
    assert out["relative_errors"][0] < 1e-10
    with pytest.raises(ValidationError):
        af.compare_prediction(fit, np.eye(2))

"""Mass sweeps and asymptotic fits of the eigenvalue expansion
lambda^M = lambda_inf + mu/M + mu_2/M^2 + ...

Sweeps track an eigenvalue cluster inside the isolation window
(lambda_inf - eta, lambda_inf + eta) across a mass ladder, either from
the analytic disk solver (with bracket continuation) or from the grid
solver. Fits are least squares in powers of 1/M; the first-order fit
uses weights M^2 as contracted, the any-order fit a QR solve on the
scaled Vandermonde with leave-one-out stability reporting.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import disk_spectra, grid2d
from .errors import NumericalError, ValidationError


@dataclass(frozen=True)
class ClusterSpec:
    lambda_inf: float
    eta: float
    l: int = 1

    def validate_isolation(self, spectrum):
        for ev in spectrum:
            if abs(ev - self.lambda_inf) > 1e-10 and abs(ev - self.lambda_inf) < self.eta:
                raise ValidationError(
                    f"isolation window of half-width {self.eta} contains another "
                    f"eigenvalue at {ev}"
                )


def default_cluster(m, R, mode_index=1, sign=+1):
    """Cluster around the mode_index-th eigenvalue on the chosen branch,
    with eta = 0.45 x the distance to the nearest spectral neighbor."""
    evs = disk_spectra.eigenvalues_infinite(m, mode_index + 1, R, sign=sign)
    lam = evs[mode_index - 1]
    others = []
    for s in (+1, -1):
        others.extend(disk_spectra.eigenvalues_infinite(m, mode_index + 2, R, sign=s))
    gaps = [abs(e - lam) for e in others if abs(e - lam) > 1e-9]
    eta = 0.45 * min(gaps)
    return ClusterSpec(lambda_inf=lam, eta=eta, l=1)


@dataclass
class SweepTable:
    masses: np.ndarray          # (rows,)
    eigenvalues: np.ndarray     # (rows, l)
    cluster: ClusterSpec
    source: str = "disk-analytic"
    flags: list = field(default_factory=list)


def mass_sweep(problem, cluster, masses, grid_params=None, seed=0):
    """Track the cluster across the mass ladder.

    problem: a disk_spectra.DiskProblem (channel fixed by problem.m) for the
    analytic source, or a grid2d.ShapeSpec when grid_params is given.
    """
    masses = [float(M) for M in masses]
    if any(b <= a for a, b in zip(masses, masses[1:])):
        raise ValidationError("masses must be strictly increasing")
    if masses[0] < 10.0 * abs(cluster.lambda_inf):
        raise ValidationError("smallest mass must be at least 10 |lambda_inf|")
    rows = []
    flags = []
    if grid_params is None:
        target = cluster.lambda_inf
        for M in masses:
            try:
                lam = disk_spectra.eigenvalue_finite_near(
                    problem.m, M, problem.R, target, halfgap=cluster.eta
                )
            except NumericalError as exc:
                flags.append(f"M={M:g}: {exc}")
                rows.append([math.nan])
                continue
            if abs(lam - cluster.lambda_inf) >= cluster.eta:
                flags.append(f"M={M:g}: root left the isolation window")
            rows.append([lam])
            target = lam
        source = "disk-analytic"
    else:
        for M in masses:
            op = grid2d.build_operator(
                problem, M, grid_params["L"], grid_params["h"],
                grid_params.get("wilson_c", 1.0),
            )
            vals, _fields, _res, info = grid2d.folded_spectrum_eigs(
                op, cluster.lambda_inf, cluster.l, seed=seed,
            )
            if not info["converged"]:
                flags.append(f"M={M:g}: eigensolver hit the iteration cap")
            rows.append(sorted(vals))
        source = "grid"
    return SweepTable(
        masses=np.array(masses),
        eigenvalues=np.array(rows, dtype=float),
        cluster=cluster,
        source=source,
        flags=flags,
    )


@dataclass
class FitResult:
    order: int
    mu_hat: np.ndarray            # (order, l): coefficient of M^-j per branch
    residuals: np.ndarray         # (rows, l) model residuals
    diagnostic: np.ndarray        # (rows, l): M (lambda^M - lambda_inf) - mu_hat_1
    conditioning: float
    stability: np.ndarray | None = None   # leave-one-out spread per coefficient


def fit_first_order(table, cluster=None):
    """Weighted least squares of (lambda^M - lambda_inf) against 1/M with
    weights M^2; per tracked branch. With these weights the estimator is
    the mean of M (lambda^M - lambda_inf)."""
    cluster = cluster or table.cluster
    good = ~np.isnan(table.eigenvalues).any(axis=1)
    if good.sum() < 4:
        raise ValidationError("first-order fits need at least 4 complete rows")
    M = table.masses[good]
    y = table.eigenvalues[good] - cluster.lambda_inf
    x = 1.0 / M
    w = M**2
    denom = np.sum(w * x * x)
    mu = (w * x) @ y / denom
    resid = y - np.outer(x, mu)
    diag = M[:, None] * y - mu[None, :]
    return FitResult(
        order=1,
        mu_hat=mu[None, :],
        residuals=resid,
        diagnostic=diag,
        conditioning=1.0,
    )


def fit_any_order(table, N, cluster=None):
    """Polynomial-in-1/M least squares up to order N (QR on the scaled
    Vandermonde), with leave-one-out coefficient stability."""
    if N > 4:
        raise ValidationError("fit order limited to N <= 4 (conditioning guard)")
    cluster = cluster or table.cluster
    good = ~np.isnan(table.eigenvalues).any(axis=1)
    rows = int(good.sum())
    if rows < N + 3:
        raise ValidationError(f"order-{N} fits need at least {N + 3} complete rows")
    M = table.masses[good]
    y = table.eigenvalues[good] - cluster.lambda_inf
    x = 1.0 / M
    scale = x.max()
    V = np.column_stack([(x / scale) ** j for j in range(1, N + 1)])
    cond = float(np.linalg.cond(V))
    if cond > 1e12:
        raise NumericalError(
            f"Vandermonde conditioning {cond:.3g} > 1e12; rescale the mass ladder"
        )
    q, r = np.linalg.qr(V)
    coef = np.linalg.solve(r, q.T @ y)
    mu = coef / scale ** np.arange(1, N + 1)[:, None]
    resid = y - V @ coef
    diag = M[:, None] * y - mu[0][None, :]
    loo = []
    for i in range(rows):
        keep = np.arange(rows) != i
        qi, ri = np.linalg.qr(V[keep])
        ci = np.linalg.solve(ri, qi.T @ y[keep])
        loo.append(ci / scale ** np.arange(1, N + 1)[:, None])
    stability = np.max(np.abs(np.array(loo) - mu[None, ...]), axis=0)
    return FitResult(
        order=N,
        mu_hat=mu,
        residuals=resid,
        diagnostic=diag,
        conditioning=cond,
        stability=stability,
    )


def loglog_slope(masses, values):
    """Least-squares slope of log |values| against log masses."""
    masses = np.asarray(masses, dtype=float)
    values = np.abs(np.asarray(values, dtype=float))
    if np.any(values <= 0):
        raise ValidationError("log-log slope needs nonzero values")
    return float(np.polyfit(np.log(masses), np.log(values), 1)[0])


def compare_prediction(fit, correction_matrix):
    """Match fitted first-order coefficients against the eigenvalues of the
    correction matrix, sorted, with per-branch relative errors."""
    pred = np.sort(np.linalg.eigvalsh(np.asarray(correction_matrix)))
    fitted = np.sort(fit.mu_hat[0])
    if len(pred) != len(fitted):
        raise ValidationError(
            f"dimension mismatch: {len(fitted)} fitted branches, "
            f"{len(pred)} predicted"
        )
    rel = np.array([
        abs(f - p) / abs(p) if p != 0 else abs(f - p)
        for f, p in zip(fitted, pred)
    ])
    return {
        "fitted": fitted,
        "predicted": pred,
        "relative_errors": rel,
        "absolute_only": bool(np.all(pred == 0)),
    }

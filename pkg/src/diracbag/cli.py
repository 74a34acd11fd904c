"""Command-line front end.

Subcommands: identities, bessel-selftest, disk-infty, disk-sweep,
layer-check, grid-solve, fit, report, verify-all. Global flags --seed,
--threads, --config (flat key=value file, command-line flags override),
--output, --format.

Exit codes: 0 success, 2 validation error (single-line diagnostic on
stderr), 1 numerical failure (structured error on stderr). verify-all
additionally exits 1 when any criterion fails.

Output is deterministic for a fixed seed: no timestamps, floats via
shortest round-trip repr, JSON with sorted keys.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys

import numpy as np

from . import __version__, acceptance, asympt_fit, boundary_layer, disk_spectra, grid2d
from .asympt_fit import ClusterSpec, SweepTable
from .disk_spectra import DiskProblem
from .errors import NumericalError, ValidationError

DEFAULT_MASSES = "100,200,400,800,1600,3200"


def _fmt(x):
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    if isinstance(x, (complex, np.complexfloating)):
        return repr(complex(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return str(x)


def _jsonable(x):
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        return float(x)
    if isinstance(x, (complex, np.complexfloating)):
        return [float(x.real), float(x.imag)]
    if isinstance(x, np.ndarray):
        return [_jsonable(v) for v in x.tolist()] if x.dtype.kind == "c" \
            else x.tolist()
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, dict):
        return {k: _jsonable(v) for k, v in x.items()}
    return x


def render(payload, fmt):
    if fmt == "json":
        return json.dumps(_jsonable(payload), sort_keys=True, indent=2) + "\n"
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(payload["columns"])
    for row in payload["rows"]:
        writer.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def emit(payload, args):
    text = render(payload, args.format)
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _parse_masses(text):
    try:
        masses = [float(v) for v in str(text).split(",")]
    except ValueError as exc:
        raise ValidationError(f"bad mass list {text!r}: {exc}") from exc
    if not masses:
        raise ValidationError("empty mass list")
    return masses


def _parse_sign(text):
    if text not in ("+", "-"):
        raise ValidationError(f"sign must be '+' or '-', got {text!r}")
    return +1 if text == "+" else -1


def _read_sweep_csv(path, lambda_inf, eta):
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if not header or header[0] != "M":
            raise ValidationError(f"{path}: expected a sweep CSV with header starting 'M'")
        masses, rows = [], []
        for rec in reader:
            masses.append(float(rec[0]))
            rows.append([float(rec[1])])
    return SweepTable(
        masses=np.array(masses),
        eigenvalues=np.array(rows),
        cluster=ClusterSpec(lambda_inf=lambda_inf, eta=eta),
        source=f"csv:{path}",
    )


def cmd_identities(args):
    from .spinor_algebra import identity_suite

    rep = identity_suite(args.dim, samples=args.samples, seed=args.seed)
    rows = [(name, rep.residuals[name]) for name in sorted(rep.residuals)]
    return {
        "kind": "identities",
        "seed": args.seed,
        "columns": ["identity_name", "max_residual"],
        "rows": rows,
    }, 0


def cmd_bessel_selftest(args):
    row = acceptance.criterion_2()
    rows = [
        ("oracle_worst_abs_error", row["measured"]),
        ("first_j0_zero_oracle", acceptance.FROZEN_FIRST_J0_ZERO),
        ("k0_at_1_oracle", acceptance.FROZEN_K0_AT_1),
        ("passed", row["passed"]),
    ]
    return {
        "kind": "bessel-selftest",
        "seed": args.seed,
        "columns": ["name", "value"],
        "rows": rows,
    }, 0 if row["passed"] else 1


def cmd_disk_infty(args):
    sign = _parse_sign(args.sign)
    evs = disk_spectra.eigenvalues_infinite(args.m, args.count, args.R, sign=sign)
    problem = DiskProblem(R=args.R, m=args.m)
    rows = []
    for idx, lam in enumerate(evs, start=1):
        mode = disk_spectra.normalize_mode(problem, lam)
        rows.append((args.m, idx, lam, mode.mu_pred, mode.boundary_density))
    return {
        "kind": "disk-infty",
        "seed": args.seed,
        "columns": ["m", "index", "lambda", "mu_pred", "boundary_density"],
        "rows": rows,
    }, 0


def _infty_target(args):
    evs = disk_spectra.eigenvalues_infinite(args.m, args.mode_index, args.R)
    return evs[args.mode_index - 1]


def cmd_disk_sweep(args):
    lam_inf = _infty_target(args)
    masses = _parse_masses(args.masses)
    cluster = asympt_fit.default_cluster(args.m, args.R, args.mode_index)
    table = asympt_fit.mass_sweep(DiskProblem(R=args.R, m=args.m), cluster, masses)
    rows = [
        (M, lam, lam - lam_inf)
        for M, lam in zip(table.masses, table.eigenvalues[:, 0])
    ]
    return {
        "kind": "disk-sweep",
        "seed": args.seed,
        "columns": ["M", "lambda_M", "lambda_M_minus_lambda_inf"],
        "rows": rows,
        "flags": table.flags,
    }, 0


def cmd_layer_check(args):
    lam_inf = _infty_target(args)
    lam_M = disk_spectra.eigenvalue_finite_near(args.m, args.M, args.R, lam_inf)
    mode = disk_spectra.normalize_mode(DiskProblem(R=args.R, m=args.m, mass=args.M), lam_M)
    inf_mode = disk_spectra.normalize_mode(DiskProblem(R=args.R, m=args.m), lam_inf)
    collar = boundary_layer.disk_collar(args.R, 256)
    stack = boundary_layer.seed_stack_from_mode(inf_mode, collar, xi=lam_inf)
    if args.order >= 1:
        stack = boundary_layer.profile_recursion(stack, args.order)
    table = boundary_layer.layer_comparison_table(mode, stack)
    rows = [
        (z, eu, ev, pu, pv, err)
        for z, (eu, ev), (pu, pv), err in zip(
            table["z"], table["exact"], table["approx"], table["abs_err"]
        )
    ]
    return {
        "kind": "layer-check",
        "seed": args.seed,
        "columns": ["z", "exact_u", "exact_v", "profile_u", "profile_v", "abs_err"],
        "rows": [
            (z, _fmt(eu), _fmt(ev), _fmt(pu), _fmt(pv), err)
            for z, eu, ev, pu, pv, err in rows
        ],
    }, 0


def cmd_grid_solve(args):
    shape = grid2d.parse_shape(args.shape)
    op = grid2d.build_operator(shape, args.M, args.L, args.h, args.wilson_c)
    vals, fields, res, info = grid2d.folded_spectrum_eigs(
        op, args.sigma, args.k, seed=args.seed
    )
    cluster = grid2d.orthonormalize_cluster(op, fields)
    traces = [grid2d.boundary_trace(op, f, args.trace_samples) for f in cluster]
    gram = grid2d.gram_correction_matrix(traces)
    flags = [k for k, v in info.items() if v is True and k != "converged"]
    if not info["converged"]:
        flags.append("not_converged")
    return {
        "kind": "grid-solve",
        "seed": args.seed,
        "eigenvalues": vals,
        "residuals": res,
        "gram": np.asarray(gram["matrix"]),
        "scalars": {
            "gram_asymmetry": float(gram["asymmetry"]),
            "converged": bool(info["converged"]),
        },
        "flags": flags,
        "columns": ["eigenvalue", "residual"],
        "rows": list(zip(vals, res)),
    }, 0 if info["converged"] else 1


def cmd_fit(args):
    table = _read_sweep_csv(args.input, args.lambda_inf, args.eta)
    if args.order == 1:
        fit = asympt_fit.fit_first_order(table)
    else:
        fit = asympt_fit.fit_any_order(table, args.order)
    return {
        "kind": "fit",
        "seed": args.seed,
        "order": fit.order,
        "mu_hat": fit.mu_hat,
        "residuals": fit.residuals,
        "diagnostic": fit.diagnostic,
        "conditioning": fit.conditioning,
        "stability": fit.stability,
        "columns": ["coefficient_order", "mu_hat"],
        "rows": [(j + 1, fit.mu_hat[j, 0]) for j in range(fit.order)],
    }, 0


def cmd_report(args):
    table = _read_sweep_csv(args.sweep, args.lambda_inf, args.eta)
    fit = asympt_fit.fit_first_order(table)
    with open(args.prediction) as fh:
        pred = json.load(fh)
    if "gram" in pred:
        raw = np.asarray(pred["gram"], dtype=float)
        matrix = raw[..., 0] + 1j * raw[..., 1]
    elif "mu_pred" in pred:
        matrix = np.array([[pred["mu_pred"]]], dtype=float)
    else:
        raise ValidationError(
            f"{args.prediction}: need a 'gram' matrix or a scalar 'mu_pred'"
        )
    comp = asympt_fit.compare_prediction(fit, matrix)
    mu_hat = float(comp["fitted"][0])
    mu_pred = float(comp["predicted"][0])
    rel = float(comp["relative_errors"][0])
    rows = [
        (M, M * (lam - args.lambda_inf), mu_hat, mu_pred, rel)
        for M, lam in zip(table.masses, table.eigenvalues[:, 0])
    ]
    return {
        "kind": "report",
        "seed": args.seed,
        "columns": ["M", "M_times_gap", "mu_hat", "mu_predicted", "relative_error"],
        "rows": rows,
    }, 0


def _verify_rows(seed, skip_grid):
    rows = acceptance.analytic_rows(seed)
    if not skip_grid:
        row9, row10 = acceptance.criteria_9_and_10(seed)
        rows.extend([row9, row10])
    return rows


def _strip_timing(rows):
    return [
        [r["criterion"], r["description"], _fmt(r["measured"]),
         _fmt(r["threshold"]), r["passed"]]
        for r in rows
    ]


def cmd_verify_all(args):
    skip_grid = "grid" in (args.skip or [])
    rows = _verify_rows(args.seed, skip_grid)
    out = _strip_timing(rows)
    # determinism criterion: recompute the analytic rows with the same
    # seed and require identical serialized output
    first = out[:8]
    second = _strip_timing(acceptance.analytic_rows(args.seed))
    deterministic = first == second
    out.append([
        11,
        "determinism: repeated runs with the same seed are byte-identical",
        _fmt(0.0 if deterministic else 1.0),
        "exact match",
        deterministic,
    ])
    payload = {
        "kind": "verify-all",
        "seed": args.seed,
        "columns": ["criterion", "description", "measured", "threshold", "passed"],
        "rows": out,
    }
    failed = [r[0] for r in out if not r[-1]]
    if failed:
        payload["flags"] = [f"criterion {c} failed" for c in failed]
    return payload, (1 if failed else 0)


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="diracbag",
        description="Spectral asymptotics of the 2D Dirac operator with a "
                    "large exterior mass barrier.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("--seed", type=int, default=0, help="global RNG seed")
    parser.add_argument("--threads", type=int, default=0,
                        help="BLAS thread cap (0 = leave unchanged)")
    parser.add_argument("--config", default=None,
                        help="flat key=value config file; flags override")
    parser.add_argument("--output", default=None, help="output path (default stdout)")
    parser.add_argument("--format", choices=["csv", "json"], default=None,
                        help="csv by default; json for grid-solve and fit")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("identities", help="matrix identity residual suite")
    p.add_argument("--dim", type=int, choices=[2, 4], default=2)
    p.add_argument("--samples", type=int, default=1000)
    p.set_defaults(func=cmd_identities)

    p = sub.add_parser("bessel-selftest", help="Bessel kernel invariant suite")
    p.set_defaults(func=cmd_bessel_selftest)

    p = sub.add_parser("disk-infty", help="confined-disk eigenvalues")
    p.add_argument("--R", type=float, default=1.0)
    p.add_argument("--m", type=int, default=0)
    p.add_argument("--count", type=int, default=3)
    p.add_argument("--sign", default="+")
    p.set_defaults(func=cmd_disk_infty)

    p = sub.add_parser("disk-sweep", help="finite-mass eigenvalue sweep on the disk")
    p.add_argument("--R", type=float, default=1.0)
    p.add_argument("--m", type=int, default=0)
    p.add_argument("--mode-index", type=int, default=1)
    p.add_argument("--masses", default=DEFAULT_MASSES)
    p.set_defaults(func=cmd_disk_sweep)

    p = sub.add_parser("layer-check", help="boundary-layer profile vs exact exterior")
    p.add_argument("--R", type=float, default=1.0)
    p.add_argument("--m", type=int, default=0)
    p.add_argument("--mode-index", type=int, default=1)
    p.add_argument("--M", type=float, required=True)
    p.add_argument("--order", type=int, choices=[0, 1], default=1)
    p.set_defaults(func=cmd_layer_check)

    p = sub.add_parser("grid-solve", help="2D grid eigensolve near a shift")
    p.add_argument("--shape", required=True,
                   help="disk:R=1.0 | ellipse:a=1.2,b=0.8 | star:r0=1.0,c3=0.1")
    p.add_argument("--M", type=float, required=True)
    p.add_argument("--L", type=float, default=2.0)
    p.add_argument("--h", type=float, required=True)
    p.add_argument("--sigma", type=float, required=True)
    p.add_argument("--k", type=int, default=1)
    p.add_argument("--wilson-c", type=float, default=1.0)
    p.add_argument("--trace-samples", type=int, default=256)
    p.set_defaults(func=cmd_grid_solve)

    p = sub.add_parser("fit", help="asymptotic fit of a sweep CSV")
    p.add_argument("--input", required=True)
    p.add_argument("--lambda-inf", type=float, required=True)
    p.add_argument("--eta", type=float, required=True)
    p.add_argument("--order", type=int, default=1)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("report", help="fit vs prediction comparison table")
    p.add_argument("--sweep", required=True)
    p.add_argument("--lambda-inf", type=float, required=True)
    p.add_argument("--eta", type=float, required=True)
    p.add_argument("--prediction", required=True,
                   help="JSON with a 'gram' matrix or scalar 'mu_pred'")
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("verify-all", help="run the full acceptance suite")
    p.add_argument("--skip", action="append", choices=["grid"], default=None)
    p.set_defaults(func=cmd_verify_all)
    return parser


def _known_keys(parser):
    keys = set()
    stack = [parser]
    while stack:
        pr = stack.pop()
        for action in pr._actions:
            if isinstance(action, argparse._SubParsersAction):
                stack.extend(action.choices.values())
            elif action.dest not in ("help", "==SUPPRESS=="):
                keys.add(action.dest)
    return keys


def _load_config(path, parser):
    values = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValidationError(f"{path}:{lineno}: expected key=value")
            key, val = (part.strip() for part in line.split("=", 1))
            key = key.replace("-", "_")
            values[key] = val
    unknown = sorted(set(values) - _known_keys(parser))
    if unknown:
        raise ValidationError(f"{path}: unknown config keys: {', '.join(unknown)}")
    coerced = {}
    for key, val in values.items():
        for conv in (int, float):
            try:
                coerced[key] = conv(val)
                break
            except ValueError:
                continue
        else:
            coerced[key] = val
    return coerced


JSON_DEFAULT_COMMANDS = {"grid-solve", "fit"}


def run(argv):
    parser = _build_parser()
    # peek at --config before the real parse so file values become
    # defaults that explicit flags still override
    peek = argparse.ArgumentParser(add_help=False)
    peek.add_argument("--config", default=None)
    pre, _ = peek.parse_known_args(argv)
    try:
        if pre.config:
            values = _load_config(pre.config, parser)
            # subparsers parse into a fresh namespace, so the defaults must
            # be installed on every parser in the tree
            stack = [parser]
            while stack:
                pr = stack.pop()
                pr.set_defaults(**values)
                for action in pr._actions:
                    if isinstance(action, argparse._SubParsersAction):
                        stack.extend(action.choices.values())
        try:
            args = parser.parse_args(argv)
        except SystemExit as exc:
            return int(exc.code or 0)
        if args.format is None:
            args.format = "json" if args.command in JSON_DEFAULT_COMMANDS else "csv"
        if args.threads and args.threads > 0:
            try:
                import threadpoolctl

                threadpoolctl.threadpool_limits(args.threads)
            except ImportError:
                pass
        payload, code = args.func(args)
        emit(payload, args)
        return code
    except ValidationError as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return 2
    except NumericalError as exc:
        err = {"error": "numerical", "message": str(exc)}
        print(json.dumps(err, sort_keys=True), file=sys.stderr)
        return 1
    except FileNotFoundError as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return 2


def main():
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()

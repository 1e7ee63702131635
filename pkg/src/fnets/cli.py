"""Command line front end: estimate, forecast, tune, simulate.

Every subcommand reads an optional JSON config mirroring RunConfig;
explicit flags override it, with "auto" forcing data-driven resolution.
Reports are written as delimited files plus rendered figures, and a JSON
manifest records every resolved parameter.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from pathlib import Path

import numpy as np

from .panel import (
    RunConfig,
    format_float,
    load_panel,
    write_manifest,
    write_network_edgelist,
)
from .pipeline import (
    feasible_orders,
    fnets_estimate,
    fnets_forecast,
    innovation_cv_pairs,
)
from .plots import plot_forecast, plot_networks, plot_roc, plot_scree
from .simulation import (
    COMMON_MODELS,
    DEFAULT_BURNIN,
    IDIO_MODELS,
    DgpSpec,
    average_roc,
    run_replication,
    spawn_specs,
    summarize,
)
from .spectral import default_bandwidth, factor_adjust, sample_acv, spectral_density
from .factors import default_factor_cap, estimate_q
from .forecasting import DEFAULT_PERMUTATIONS, DEFAULT_TRUNCATION
from .precision import innovation_cov
from .tuning import (
    CvGrid,
    cv_select_eta,
    cv_select_lambda_d,
    default_eta_grid,
    default_lambda_grid,
)
from .var import build_yw, estimate_beta

_UNSET = object()


def _auto_int(text: str):
    return None if text == "auto" else int(text)


def _auto_float(text: str):
    return None if text == "auto" else float(text)


def _add_shared(parser: argparse.ArgumentParser, need_input: bool = True):
    if need_input:
        parser.add_argument("--input", required=True, help="panel CSV path")
    parser.add_argument("--output", help="output directory")
    parser.add_argument("--config", help="JSON config mirroring RunConfig")
    parser.add_argument("--seed", type=int, default=_UNSET)


def _add_estimation(parser: argparse.ArgumentParser):
    parser.add_argument("--bandwidth", type=_auto_int, default=_UNSET,
                        metavar="auto|N", help="lag-window bandwidth m")
    parser.add_argument("--q", type=_auto_int, default=_UNSET,
                        metavar="auto|N", help="dynamic factor count")
    parser.add_argument("--r", type=_auto_int, default=_UNSET,
                        metavar="auto|N", help="static factor count")
    parser.add_argument("--var-order", dest="var_order", type=_auto_int,
                        default=_UNSET, metavar="auto|N", help="VAR order d")
    parser.add_argument("--lambda", dest="lam", type=_auto_float,
                        default=_UNSET, metavar="auto|X", help="l1 penalty")
    parser.add_argument("--solver", choices=("lasso", "dantzig"),
                        default=_UNSET)
    parser.add_argument("--threshold", dest="threshold_beta",
                        type=_auto_float, default=_UNSET, metavar="auto|X")
    parser.add_argument("--eta", type=_auto_float, default=_UNSET,
                        metavar="auto|X", help="precision penalty")
    parser.add_argument("--threshold-delta", dest="threshold_delta",
                        type=_auto_float, default=_UNSET, metavar="auto|X")
    parser.add_argument("--threshold-omega", dest="threshold_omega",
                        type=_auto_float, default=_UNSET, metavar="auto|X")


def _build_config(args) -> RunConfig:
    config = RunConfig.from_json(args.config) if args.config else RunConfig()
    updates = {}
    mapping = {
        "bandwidth": "m",
        "q": "q",
        "r": "r",
        "var_order": "d",
        "lam": "lam",
        "solver": "solver",
        "threshold_beta": "threshold_beta",
        "eta": "eta",
        "threshold_delta": "threshold_delta",
        "threshold_omega": "threshold_omega",
        "seed": "seed",
    }
    for attr, field in mapping.items():
        value = getattr(args, attr, _UNSET)
        if value is not _UNSET:
            updates[field] = value
    if getattr(args, "horizon", None) is not None:
        updates["forecast_horizon"] = args.horizon
    return dataclasses.replace(config, **updates)


def _outdir(args) -> Path:
    if not args.output:
        raise SystemExit("--output directory is required for this command")
    out = Path(args.output)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write_matrix_csv(mat: np.ndarray, labels, path: Path):
    with path.open("w", newline="") as fh:
        fh.write(",".join(labels) + "\n")
        for row in mat:
            fh.write(",".join(format_float(v) for v in row) + "\n")


def cmd_estimate(args) -> int:
    panel = load_panel(args.input)
    config = _build_config(args)
    fit = fnets_estimate(panel, config)
    outdir = _outdir(args)
    write_network_edgelist(fit.networks, outdir)
    manifest = fit.manifest()
    manifest["n"] = panel.n
    manifest["input"] = Path(args.input).name
    write_manifest(manifest, outdir / "manifest.json")
    plot_networks(fit.networks, outdir)
    plot_scree(fit.acv_x.lag(0), fit.config.r, outdir / "scree.png")
    if args.dump_acv:
        for ell in range(fit.config.d + 1):
            _write_matrix_csv(
                fit.acv_xi.lag(ell),
                panel.labels,
                outdir / f"acv_xi_lag{ell}.csv",
            )
    c = fit.config
    print(
        f"estimated p={panel.p} n={panel.n}: m={c.m} q={c.q} r={c.r} "
        f"d={c.d} lambda={c.lam:.6g} eta={c.eta:.6g} -> {outdir}"
    )
    return 0


def cmd_forecast(args) -> int:
    panel = load_panel(args.input)
    config = _build_config(args)
    fit = fnets_estimate(panel, config)
    a = config.forecast_horizon
    result = fnets_forecast(
        fit, panel, a, method=args.common, K=args.K, n_perm=args.n_perm
    )
    outdir = _outdir(args)
    manifest = fit.manifest()
    manifest["n"] = panel.n
    manifest["input"] = Path(args.input).name
    payload = {
        "method": result.method,
        "horizons": result.horizons,
        "series": list(panel.labels),
        "x": [[float(v) for v in row] for row in result.x_fc],
        "chi": [[float(v) for v in row] for row in result.chi_fc],
        "xi": [[float(v) for v in row] for row in result.xi_fc],
        "manifest": manifest,
    }
    with (outdir / "forecast.json").open("w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
    write_manifest(manifest, outdir / "manifest.json")
    plot_forecast(panel, result.x_fc, outdir / "forecast.png")
    print(
        f"forecast {result.method} horizons=1..{a} for p={panel.p} "
        f"-> {outdir}"
    )
    return 0


def cmd_tune(args) -> int:
    panel = load_panel(args.input)
    config = _build_config(args)
    config.validate_against(panel)
    m = config.m if config.m is not None else default_bandwidth(panel.n)
    acv_raw = sample_acv(panel, m)
    spec = spectral_density(acv_raw, m)
    q = (
        config.q
        if config.q is not None
        else estimate_q(spec, default_factor_cap(panel.p))
    )
    orders = [config.d] if config.d is not None else feasible_orders(
        panel, config.cv_folds
    )
    if not orders:
        raise SystemExit("no feasible VAR order for these fold lengths")
    _, _, acv_xi, _ = factor_adjust(panel, q, m)
    d_max = max(orders)
    ghat_full = np.vstack([acv_xi.lag(ell) for ell in range(1, d_max + 1)])
    lambdas = (
        np.array([config.lam])
        if config.lam is not None
        else default_lambda_grid(ghat_full)
    )
    grid = CvGrid(lambdas=lambdas, orders=tuple(orders), folds=config.cv_folds)
    lam, d, table = cv_select_lambda_d(panel, q, m, grid, solver=config.solver)
    lines = ["lambda,d,score"]
    for i, lv in enumerate(grid.lambdas):
        for j, dv in enumerate(grid.orders):
            lines.append(
                f"{format_float(lv)},{dv},{format_float(table[i, j])}"
            )
    var_est = estimate_beta(build_yw(acv_xi, d), lam, solver=config.solver)
    gamma_hat = innovation_cov(acv_xi, var_est)
    pairs = innovation_cv_pairs(
        panel, q, d, lam, config.solver, config.cv_folds
    )
    etas = default_eta_grid(gamma_hat)
    eta, eta_scores = cv_select_eta(pairs, etas)
    eta_lines = ["eta,score"]
    for k, ev in enumerate(etas):
        eta_lines.append(f"{format_float(ev)},{format_float(eta_scores[k])}")
    print("\n".join(lines))
    print()
    print("\n".join(eta_lines))
    print()
    print(f"selected lambda={lam:.6g} d={d} eta={eta:.6g}")
    if args.output:
        outdir = _outdir(args)
        (outdir / "lambda_d_scores.csv").write_text("\n".join(lines) + "\n")
        (outdir / "eta_scores.csv").write_text("\n".join(eta_lines) + "\n")
        write_manifest(
            {"m": m, "q": q, "lambda": lam, "d": d, "eta": eta},
            outdir / "manifest.json",
        )
    return 0


def _parse_dgp(text: str) -> tuple[str, str]:
    parts = text.split("x")
    if (
        len(parts) != 2
        or parts[0] not in COMMON_MODELS
        or parts[1] not in IDIO_MODELS
    ):
        raise argparse.ArgumentTypeError(
            f"dgp must look like C1xE1 with C in {COMMON_MODELS} "
            f"and E in {IDIO_MODELS}, got {text!r}"
        )
    return parts[0], parts[1]


def cmd_simulate(args) -> int:
    common, idio = args.dgp
    q = 0 if common == "C0" else args.q
    seed = 0 if args.seed is _UNSET else args.seed
    base = DgpSpec(
        common=common,
        idio=idio,
        n=args.n,
        p=args.p,
        q=q,
        seed=seed,
        burnin=args.burnin,
    )
    config = RunConfig(q=q, d=args.var_order, solver=args.solver)
    outdir = _outdir(args)
    rows = []
    curve_sets: dict[str, list] = {"beta": [], "delta": [], "omega": []}
    for rep, spec in enumerate(spawn_specs(base, args.reps), start=1):
        metrics, curves = run_replication(spec, config, want_curves=True)
        rows.append(metrics)
        for key in curve_sets:
            curve_sets[key].append(curves[key])
        print(
            f"rep {rep}/{args.reps}: "
            + " ".join(f"{k}={v:.4f}" for k, v in metrics.items()),
            file=sys.stderr,
        )
    keys = list(rows[0])
    with (outdir / "replications.csv").open("w", newline="") as fh:
        fh.write("rep," + ",".join(keys) + "\n")
        for rep, row in enumerate(rows, start=1):
            fh.write(
                f"{rep}," + ",".join(format_float(row[k]) for k in keys) + "\n"
            )
    summary = summarize(rows)
    with (outdir / "summary.csv").open("w", newline="") as fh:
        fh.write("metric,mean,sd\n")
        for key in keys:
            fh.write(
                f"{key},{format_float(summary[key + '_mean'])},"
                f"{format_float(summary[key + '_sd'])}\n"
            )
    plot_roc(
        {k: average_roc(v) for k, v in curve_sets.items()},
        outdir / "roc.png",
    )
    write_manifest(
        {
            "dgp": f"{common}x{idio}",
            "n": args.n,
            "p": args.p,
            "q": q,
            "reps": args.reps,
            "seed": seed,
            "burnin": args.burnin,
            "config": dataclasses.asdict(config),
        },
        outdir / "manifest.json",
    )
    for key in keys:
        print(
            f"{key}: mean {summary[key + '_mean']:.4f} "
            f"sd {summary[key + '_sd']:.4f}"
        )
    print(f"wrote {outdir}/replications.csv, summary.csv, roc.png")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fnets",
        description=(
            "Factor-adjusted sparse VAR estimation, network extraction "
            "and forecasting for high-dimensional time series panels."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_est = sub.add_parser("estimate", help="fit networks from a panel CSV")
    _add_shared(p_est)
    _add_estimation(p_est)
    p_est.add_argument("--dump-acv", action="store_true",
                       help="persist idiosyncratic ACV lags 0..d as CSV")
    p_est.set_defaults(func=cmd_estimate)

    p_fc = sub.add_parser("forecast", help="estimate then forecast")
    _add_shared(p_fc)
    _add_estimation(p_fc)
    p_fc.add_argument("--horizon", type=int, default=None)
    p_fc.add_argument("--common", choices=("restricted", "unrestricted"),
                      default="restricted")
    p_fc.add_argument("--K", type=int, default=DEFAULT_TRUNCATION,
                      help="truncation lag of the dynamic expansion")
    p_fc.add_argument("--n-perm", dest="n_perm", type=int,
                      default=DEFAULT_PERMUTATIONS)
    p_fc.set_defaults(func=cmd_forecast)

    p_tune = sub.add_parser("tune", help="print cross-validation tables")
    _add_shared(p_tune)
    _add_estimation(p_tune)
    p_tune.set_defaults(func=cmd_tune)

    p_sim = sub.add_parser("simulate", help="replicate the simulation study")
    _add_shared(p_sim, need_input=False)
    p_sim.add_argument("--dgp", type=_parse_dgp, required=True,
                       metavar="CixEj", help="e.g. C1xE1 or C0xE2")
    p_sim.add_argument("--n", type=int, required=True)
    p_sim.add_argument("--p", type=int, required=True)
    p_sim.add_argument("--reps", type=int, default=20)
    p_sim.add_argument("--q", type=int, default=2,
                       help="dynamic factor count of the DGP")
    p_sim.add_argument("--var-order", dest="var_order", type=int, default=1,
                       help="VAR order used by the estimation step")
    p_sim.add_argument("--solver", choices=("lasso", "dantzig"),
                       default="lasso")
    p_sim.add_argument("--burnin", type=int, default=DEFAULT_BURNIN)
    p_sim.set_defaults(func=cmd_simulate)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())

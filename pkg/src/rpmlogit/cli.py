"""Command-line interface: fit, test, tune, influence, simulate, diabetes.

Every command reads CSV input, prints a human-readable report to standard
output (floats at 6 significant digits unless --raw), and optionally writes
result tables as CSV files under --out.  Exit codes: 0 success, 2 input
error, 3 non-convergence.
"""
from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from . import estimation as _estimation
from . import io as _io
from . import simulate as _simulate
from . import tuning as _tuning
from .hypothesis import LinearHypothesis, approximate_power, required_sample_size, wald_test
from .influence import ContaminationPoint, influence_single, wald_influence

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_NOCONV = 3

THREADS_ENV = "RP_PLRM_THREADS"


def _fmt(x, raw: bool) -> str:
    return _io.format_value(x, raw=raw)


def _comma_floats(text: str) -> np.ndarray:
    try:
        return np.array([float(t) for t in text.split(",") if t.strip() != ""])
    except ValueError as exc:
        raise ValueError(f"expected comma-separated numbers, got {text!r}") from exc


def _parse_matrix(text: str) -> np.ndarray:
    rows = [r for r in text.split(";") if r.strip() != ""]
    return np.vstack([_comma_floats(r) for r in rows])


def _thread_cap() -> int:
    raw = os.environ.get(THREADS_ENV)
    if raw is None:
        return 1
    try:
        cap = int(raw)
    except ValueError:
        raise ValueError(f"{THREADS_ENV} must be an integer, got {raw!r}")
    if cap < 1:
        raise ValueError(f"{THREADS_ENV} must be >= 1, got {cap}")
    return cap


def _check_seed(seed: int) -> int:
    if not 0 <= seed < 2**64:
        raise ValueError("seed must fit in an unsigned 64-bit integer")
    return seed


def _add_data_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--csv", required=True, help="input data file")
    parser.add_argument(
        "--predictors", required=True, help="comma-separated predictor column names"
    )
    parser.add_argument("--response", help="label column name")
    parser.add_argument(
        "--categories",
        help="comma-separated category order; the last one is the reference",
    )
    parser.add_argument(
        "--response-columns", help="comma-separated one-hot indicator columns"
    )


def _load_data(args) -> _io.LoadedData:
    spec = _io.DatasetSpec(
        path=args.csv,
        predictors=tuple(c.strip() for c in args.predictors.split(",")),
        response=args.response,
        categories=(
            tuple(c.strip() for c in args.categories.split(","))
            if args.categories
            else None
        ),
        response_columns=(
            tuple(c.strip() for c in args.response_columns.split(","))
            if args.response_columns
            else None
        ),
    )
    return _io.load_csv(spec)


def _echo(args, data_digest: str | None = None) -> None:
    print(f"command: {' '.join(args._argv) or args.command}")
    if data_digest is not None:
        print(f"input digest: {data_digest}")


def _out_path(args, name: str) -> str | None:
    if args.out is None:
        return None
    os.makedirs(args.out, exist_ok=True)
    return os.path.join(args.out, name)


# ---------------------------------------------------------------------------
# commands


def _cmd_fit(args) -> int:
    data = _load_data(args)
    _echo(args, data.digest)
    res = _estimation.fit(data.design, data.response, alpha=args.alpha)
    if not res.converged:
        print(f"error: fit did not converge: {res.message}", file=sys.stderr)
        return EXIT_NOCONV
    names = ["intercept"] + [c.strip() for c in args.predictors.split(",")]
    d = res.beta_hat.size // len(names)
    se = np.sqrt(np.diag(res.covariance_v) / res.n_obs)
    print(f"alpha: {_fmt(args.alpha, args.raw)}")
    print(f"converged in {res.iterations} iterations; objective {_fmt(res.objective, args.raw)}")
    print(f"reference category: {data.categories[-1]}")
    rows = []
    for j in range(d):
        print(f"[{data.categories[j]}]")
        for m, name in enumerate(names):
            b = res.beta_hat[j * len(names) + m]
            s = se[j * len(names) + m]
            print(f"  {name:<12} {_fmt(b, args.raw):>14}  (se {_fmt(s, args.raw)})")
            rows.append([data.categories[j], name, _fmt(b, True), _fmt(s, True)])
    miscls = _simulate.misclassification_count(data.design, data.response, res.beta_hat)
    print(f"misclassified: {miscls} of {data.design.shape[0]}")
    path = _out_path(args, "fit_coefficients.csv")
    if path:
        _io.write_rows_csv(path, ["category", "feature", "estimate", "std_error"], rows)
        print(f"wrote {path}")
    return EXIT_OK


def _cmd_test(args) -> int:
    data = _load_data(args)
    _echo(args, data.digest)
    hyp = LinearHypothesis(L=_parse_matrix(args.L), l=_comma_floats(args.l))
    res = _estimation.fit(data.design, data.response, alpha=args.alpha)
    if not res.converged:
        print(f"error: fit did not converge: {res.message}", file=sys.stderr)
        return EXIT_NOCONV
    out = wald_test(res.beta_hat, res.covariance_v, res.n_obs, hyp, levels=(args.tau,))
    print(f"alpha: {_fmt(args.alpha, args.raw)}")
    print(f"W = {_fmt(out.statistic, args.raw)}  df = {out.df}  p = {_fmt(out.p_value, args.raw)}")
    verdict = "reject" if out.reject_at[args.tau] else "fail to reject"
    print(f"at level {_fmt(args.tau, args.raw)}: {verdict} H0")
    if args.power_at is not None:
        pw = approximate_power(
            res.beta_hat, hyp, res.covariance_v, args.power_at, tau=args.tau
        )
        print(f"approximate power at n={args.power_at}: {_fmt(pw, args.raw)}")
    if args.sample_size is not None:
        need = required_sample_size(
            res.beta_hat, hyp, res.covariance_v, args.sample_size, tau=args.tau
        )
        print(f"required n for power {_fmt(args.sample_size, args.raw)}: {need}")
    return EXIT_OK


def _cmd_tune(args) -> int:
    data = _load_data(args)
    _echo(args, data.digest)
    grid = _tuning.TuningGrid(
        alpha_max=args.alpha_max, step=args.step, pilot_alpha=args.pilot
    )
    res = _tuning.select_alpha(data.design, data.response, grid=grid, refine=args.refine)
    print(f"pilot alpha: {_fmt(res.pilot_alpha, args.raw)}  rounds: {res.iterations}")
    print("alpha      mse   squared_bias   variance")
    rows = []
    for e in res.table:
        if e.converged:
            print(
                f"{e.alpha:5.2f}  {_fmt(e.mse, args.raw):>10}  "
                f"{_fmt(e.squared_bias, args.raw):>12}  {_fmt(e.variance_term, args.raw):>10}"
            )
        else:
            print(f"{e.alpha:5.2f}  (fit failed: {e.message})")
        rows.append(
            [e.alpha, _fmt(e.mse, True), _fmt(e.squared_bias, True),
             _fmt(e.variance_term, True), e.converged]
        )
    skipped = res.failed_alphas()
    if skipped:
        print(f"warning: skipped grid points {skipped}")
    print(f"selected alpha: {_fmt(res.alpha_star, args.raw)}")
    path = _out_path(args, "tune_table.csv")
    if path:
        _io.write_rows_csv(
            path, ["alpha", "mse", "squared_bias", "variance", "converged"], rows
        )
        print(f"wrote {path}")
    return EXIT_OK


def _cmd_influence(args) -> int:
    data = _load_data(args)
    _echo(args, data.digest)
    res = _estimation.fit(data.design, data.response, alpha=args.alpha)
    if not res.converged:
        print(f"error: fit did not converge: {res.message}", file=sys.stderr)
        return EXIT_NOCONV
    dp1 = data.response.shape[1]
    if args.t is not None:
        t = _comma_floats(args.t)
    elif args.t_category is not None:
        if not 0 <= args.t_category < dp1:
            raise ValueError(f"--t-category must be in 0..{dp1 - 1}")
        t = np.eye(dp1)[args.t_category]
    else:
        raise ValueError("provide --t or --t-category")
    iff = influence_single(data.design, res.beta_hat, args.alpha, args.index, t)
    print(f"influence of row {args.index} contaminated at t = {t.tolist()}")
    print("IF: " + " ".join(_fmt(v, args.raw) for v in iff))
    print(f"norm: {_fmt(np.linalg.norm(iff), args.raw)}")
    if args.L is not None and args.l is not None:
        hyp = LinearHypothesis(L=_parse_matrix(args.L), l=_comma_floats(args.l))
        wif = wald_influence(
            data.design,
            res.beta_hat,
            args.alpha,
            ContaminationPoint(t=t, index=args.index),
            hyp,
        )
        print(f"Wald-statistic influence: {_fmt(wif, args.raw)}")
    return EXIT_OK


def _sim_config_from_file(path: str, seed_override: int | None) -> tuple:
    raw = _io.parse_config_file(path)
    known = {
        "mode", "n", "k", "d", "q", "replications", "seed", "alphas",
        "beta0", "L", "l", "tau",
    }
    unknown = set(raw) - known
    if unknown:
        raise ValueError(f"unknown config keys: {sorted(unknown)}")
    mode = raw.get("mode", "estimator")
    if mode not in ("estimator", "test"):
        raise ValueError(f"mode must be estimator or test, got {mode!r}")
    if "n" not in raw:
        raise ValueError("config needs n")
    kwargs = dict(
        n=int(raw["n"]),
        k=int(raw.get("k", 2)),
        d=int(raw.get("d", 2)),
        q=float(raw.get("q", 0.0)),
        replications=int(raw.get("replications", 1000)),
        seed=_check_seed(int(raw.get("seed", 0))),
    )
    if seed_override is not None:
        kwargs["seed"] = seed_override
    if "beta0" in raw:
        kwargs["beta0"] = _comma_floats(raw["beta0"])
    config = _simulate.SimConfig(**kwargs)
    alphas = _comma_floats(raw.get("alphas", "0,0.2,0.4,0.6"))
    hyp = None
    if mode == "test":
        if "L" not in raw or "l" not in raw:
            raise ValueError("test mode needs L and l")
        hyp = LinearHypothesis(L=_parse_matrix(raw["L"]), l=_comma_floats(raw["l"]))
    tau = float(raw.get("tau", 0.05))
    return mode, config, alphas, hyp, tau


def _cmd_simulate(args) -> int:
    mode, config, alphas, hyp, tau = _sim_config_from_file(args.config, args.seed)
    _echo(args)
    print(
        f"mode: {mode}  n={config.n} q={config.q} replications={config.replications} "
        f"seed={config.seed}"
    )
    if mode == "estimator":
        cells = _simulate.run_estimator_study(config, alphas)
        header = ["alpha", "q", "n", "rmse", "mae", "replications_used", "failure_rate"]
        rows = [
            [c.alpha, c.q, c.n, _fmt(c.rmse, True), _fmt(c.mae, True),
             c.replications_used, _fmt(c.failure_rate, True)]
            for c in cells
        ]
        for c in cells:
            print(
                f"alpha={c.alpha:4.2f}  rmse={_fmt(c.rmse, args.raw)}  "
                f"mae={_fmt(c.mae, args.raw)}  failures={_fmt(c.failure_rate, args.raw)}"
            )
        name = "estimator_study.csv"
    else:
        cells = _simulate.run_test_study(config, alphas, hyp, tau=tau)
        header = ["alpha", "q", "n", "rejection_rate", "replications_used", "failure_rate"]
        rows = [
            [c.alpha, c.q, c.n, _fmt(c.rejection_rate, True), c.replications_used,
             _fmt(c.failure_rate, True)]
            for c in cells
        ]
        for c in cells:
            print(
                f"alpha={c.alpha:4.2f}  rejection={_fmt(c.rejection_rate, args.raw)}  "
                f"failures={_fmt(c.failure_rate, args.raw)}"
            )
        name = "test_study.csv"
    path = _out_path(args, name)
    if path:
        _io.write_rows_csv(path, header, rows)
        print(f"wrote {path}")
    return EXIT_OK


def _diabetes_counts(X, Y_fit, Y_reference, alphas):
    counts = {}
    warm = None
    for a in alphas:
        opts = _estimation.FitOptions(
            initializer="user_supplied" if warm is not None else "mle_warm_start",
            beta_start=warm,
            compute_covariance=False,
        )
        res = _estimation.fit(X, Y_fit, alpha=float(a), options=opts)
        if not res.converged:
            counts[float(a)] = None
            continue
        warm = res.beta_hat
        counts[float(a)] = _simulate.misclassification_count(X, Y_reference, res.beta_hat)
    return counts


def _cmd_diabetes(args) -> int:
    data = _io.load_diabetes(args.data)
    _echo(args, data.digest)
    X, Y = data.design, data.response
    alphas = _comma_floats(args.alphas)
    print(f"rows: {X.shape[0]}  categories: {', '.join(data.categories)}")
    if args.scheme == "original":
        counts = _diabetes_counts(X, Y, Y, alphas)
        print("misclassifications on the original data:")
        for a, c in counts.items():
            print(f"  alpha={a:4.2f}  {c if c is not None else 'fit failed'}")
    elif args.scheme == "example":
        Ymod = _io.modified_diabetes_response(Y)
        counts = _diabetes_counts(X, Ymod, Ymod, alphas)
        print("misclassifications on the modified data (last 14 recorded normal):")
        for a, c in counts.items():
            print(f"  alpha={a:4.2f}  {c if c is not None else 'fit failed'}")
    else:
        mapping = (
            _simulate.SCHEME_FORWARD if args.scheme == "1" else _simulate.SCHEME_BACKWARD
        )
        scheme = _simulate.RelabelScheme(mapping=mapping, m=14, selection="random")
        totals = {float(a): [] for a in alphas}
        for rep in range(args.datasets):
            rng = _simulate.substream(_check_seed(args.seed), rep)
            Yrel, _ = _simulate.relabel(Y, scheme, rng)
            counts = _diabetes_counts(X, Yrel, Y, alphas)
            for a, c in counts.items():
                if c is not None:
                    totals[a].append(c)
        print(
            f"mean misclassifications vs the unaltered labels over "
            f"{args.datasets} relabeled datasets (scheme {args.scheme}):"
        )
        for a, vals in totals.items():
            mean = float(np.mean(vals)) if vals else float("nan")
            print(f"  alpha={a:4.2f}  {_fmt(mean, args.raw)}  ({len(vals)} datasets)")
    if args.select_alpha:
        target = Y if args.scheme == "original" else _io.modified_diabetes_response(Y)
        res = _tuning.select_alpha(X, target)
        print(f"estimated-MSE tuning choice: alpha = {_fmt(res.alpha_star, args.raw)}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rpmlogit",
        description=(
            "Robust polytomous logistic regression: minimum Renyi-pseudodistance "
            "estimation, Wald-type tests, influence diagnostics, and simulation "
            "studies."
        ),
        epilog=(
            f"{THREADS_ENV} caps replication parallelism; results are identical "
            "for any cap because each replication has its own random substream."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_fit = sub.add_parser("fit", help="fit coefficients at one alpha")
    _add_data_arguments(p_fit)
    p_fit.add_argument("--alpha", type=float, default=0.0)
    p_fit.set_defaults(func=_cmd_fit)

    p_test = sub.add_parser("test", help="Wald-type test of L beta = l")
    _add_data_arguments(p_test)
    p_test.add_argument("--alpha", type=float, default=0.0)
    p_test.add_argument("--L", required=True, help="rows split by ';', entries by ','")
    p_test.add_argument("--l", required=True, help="comma-separated right-hand side")
    p_test.add_argument("--tau", type=float, default=0.05)
    p_test.add_argument("--power-at", type=int, help="approximate power at this n")
    p_test.add_argument(
        "--sample-size", type=float, help="smallest n reaching this power"
    )
    p_test.set_defaults(func=_cmd_test)

    p_tune = sub.add_parser("tune", help="estimated-MSE choice of alpha")
    _add_data_arguments(p_tune)
    p_tune.add_argument("--alpha-max", type=float, default=0.7)
    p_tune.add_argument("--step", type=float, default=0.01)
    p_tune.add_argument("--pilot", type=float, default=0.5)
    p_tune.add_argument("--refine", action="store_true")
    p_tune.set_defaults(func=_cmd_tune)

    p_inf = sub.add_parser("influence", help="influence of one contaminated row")
    _add_data_arguments(p_inf)
    p_inf.add_argument("--alpha", type=float, default=0.0)
    p_inf.add_argument("--index", type=int, required=True)
    p_inf.add_argument("--t", help="comma-separated simplex point")
    p_inf.add_argument("--t-category", type=int, help="one-hot contamination category")
    p_inf.add_argument("--L", help="optional hypothesis rows for the test influence")
    p_inf.add_argument("--l", help="optional hypothesis right-hand side")
    p_inf.set_defaults(func=_cmd_influence)

    p_sim = sub.add_parser("simulate", help="run a Monte Carlo study from a config file")
    p_sim.add_argument("--config", required=True)
    p_sim.add_argument("--seed", type=int, help="override the config seed")
    p_sim.set_defaults(func=_cmd_simulate)

    p_dia = sub.add_parser("diabetes", help="reproduce the diabetes case study")
    p_dia.add_argument("--data", help="path to the diabetes CSV (if not bundled)")
    p_dia.add_argument(
        "--scheme", choices=("original", "example", "1", "2"), default="original"
    )
    p_dia.add_argument("--alphas", default="0,0.1,0.2,0.3,0.4,0.5,0.6,0.7")
    p_dia.add_argument("--datasets", type=int, default=200)
    p_dia.add_argument("--select-alpha", action="store_true")
    p_dia.set_defaults(func=_cmd_diabetes)

    for p in (p_fit, p_test, p_tune, p_inf, p_sim, p_dia):
        p.add_argument("--raw", action="store_true", help="full-precision output")
        p.add_argument("--out", help="directory for CSV result files")
        if p is not p_sim:
            p.add_argument("--seed", type=int, default=0)
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    args._argv = list(argv) if argv is not None else sys.argv[1:]
    try:
        if getattr(args, "seed", None) is not None:
            _check_seed(args.seed)
        _thread_cap()
        return args.func(args)
    except (_estimation.SeparationError, _estimation.NonConvergenceError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NOCONV
    except (ValueError, FileNotFoundError, OSError, np.linalg.LinAlgError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())

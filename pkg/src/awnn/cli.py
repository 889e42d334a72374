"""Command-line entry point: ``awnn {synth,impute,bench,slope}``.

Exit codes: 0 success, 1 usage error, 2 data error, 3 estimator failure.
Diagnostics go to standard error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys

import numpy as np

EXIT_USAGE, EXIT_DATA, EXIT_ESTIMATOR = 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}\n{self.format_usage()}")


def _build_parser() -> argparse.ArgumentParser:
    fmt = argparse.ArgumentDefaultsHelpFormatter
    parser = _Parser(prog="awnn", description=__doc__.splitlines()[0], formatter_class=fmt)
    parser.add_argument("--threads", type=int, default=None,
                        help="worker threads for the imputation kernel (default: all cores)")
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser, required=True)

    p = sub.add_parser("synth", help="generate a synthetic instance", formatter_class=fmt)
    p.add_argument("--n", type=int, required=True, help="rows")
    p.add_argument("--m", type=int, default=None, help="columns (default: n)")
    p.add_argument("--d", type=int, default=2, help="latent dimension")
    p.add_argument("--lambda", dest="lam", type=float, default=1.0, help="Hölder exponent in (0,1]")
    p.add_argument("--snr", type=float, default=1.0, help="signal-to-noise ratio")
    p.add_argument("--p", type=float, default=1.0, help="observation probability")
    p.add_argument("--seed", type=int, default=0, help="random seed")
    p.add_argument("--out", required=True, help="output directory")

    p = sub.add_parser("impute", help="complete a CSV matrix", formatter_class=fmt)
    p.add_argument("--input", required=True, help="input CSV (NaN or empty = missing)")
    p.add_argument("--method", required=True, choices=["awnn", "o-awnn", "rownn", "usvt"])
    p.add_argument("--delta", type=float, default=0.05, help="confidence parameter")
    p.add_argument("--sigma2", type=float, default=None,
                   help="noise variance (required for o-awnn; optional for rownn)")
    p.add_argument("--eta2", default="auto", help="RowNN radius or 'auto' (rownn only)")
    p.add_argument("--no-self", action="store_true", help="forbid a row being its own neighbor")
    p.add_argument("--out", required=True, help="output CSV of estimates")
    p.add_argument("--audit", default=None, help="optional audit JSON path")

    p = sub.add_parser("bench", help="run a benchmark sweep", formatter_class=fmt)
    p.add_argument("--config", required=True, help="JSON file with BenchSpec fields")
    p.add_argument("--out", required=True, help="results CSV")
    p.add_argument("--aggregate", default=None, help="aggregate JSON")
    p.add_argument("--jobs", type=int, default=1, help="parallel worker processes")
    p.add_argument("--no-timing", action="store_true", help="leave wall_ms blank in the CSV")

    p = sub.add_parser("slope", help="fit log-log slopes from a results CSV", formatter_class=fmt)
    p.add_argument("--results", required=True, help="results CSV from 'bench'")
    p.add_argument("--group-by", default="method,lambda,snr,p",
                   help="comma-separated subset of method,lambda,snr,p")
    return parser


def _cmd_synth(args) -> int:
    from .synthetic import SyntheticSpec, generate, write_instance
    try:
        spec = SyntheticSpec(args.n, args.m or args.n, args.d, args.lam, args.snr, args.p, args.seed)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    write_instance(generate(spec), args.out)
    return 0


def _k_summary(k) -> dict:
    k = k[k > 0]
    if k.size == 0:
        return {"min": None, "mean": None, "max": None}
    return {"min": int(k.min()), "mean": float(k.mean()), "max": int(k.max())}


def _cmd_impute(args) -> int:
    from .baselines import RowNNConfig, rownn_impute, rownn_tune, usvt_impute
    from .distance import build_distance_table
    from .estimator import EstimatorConfig, audit_lemma4, awnn_fit, oracle_awnn_fit
    from .matrix import load_csv, save_csv

    if args.method == "o-awnn" and args.sigma2 is None:
        raise UsageError("--sigma2 is required for --method o-awnn")
    if args.method != "rownn" and args.eta2 != "auto":
        raise UsageError("--eta2 applies only to --method rownn")
    eta2 = args.eta2
    if eta2 != "auto":
        try:
            eta2 = float(eta2)
        except ValueError:
            raise UsageError("--eta2 must be a number or 'auto'") from None
    try:
        cfg = EstimatorConfig(delta=args.delta, allow_self=not args.no_self)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc

    try:
        matrix = load_csv(args.input)
    except (OSError, ValueError) as exc:
        print(f"awnn: cannot read {args.input}: {exc}", file=sys.stderr)
        return EXIT_DATA

    audit = {"method": args.method}
    try:
        if args.method in ("awnn", "o-awnn"):
            if args.method == "awnn":
                res = awnn_fit(matrix, cfg)
            else:
                res = oracle_awnn_fit(matrix, args.sigma2, cfg)
            table = build_distance_table(matrix, res.sigma2_used, cfg.allow_self, cfg.min_overlap)
            violations = audit_lemma4(res, table, matrix, cfg)
            theta = res.theta_hat
            audit.update(sigma2_hat=res.sigma2_hat, sigma2_trace=res.sigma2_trace,
                         converged=res.converged, non_imputable=res.non_imputable_count,
                         k=_k_summary(res.weight_stats.k),
                         proximity_audit={"violations": len(violations),
                                 "examples": [v.__dict__ for v in violations[:10]]})
        elif args.method == "rownn":
            rcfg = RowNNConfig(allow_self=cfg.allow_self)
            sigma2 = args.sigma2
            if sigma2 is None:
                sigma2 = awnn_fit(matrix, cfg).sigma2_hat
            if eta2 == "auto":
                eta2 = rownn_tune(matrix, rcfg, sigma2=sigma2)
            theta = rownn_impute(matrix, sigma2, eta2, rcfg)
            audit.update(sigma2=sigma2, eta2=eta2,
                         non_imputable=int(np.isnan(theta.values).sum()))
        else:
            theta = usvt_impute(matrix)
    except Exception as exc:
        print(f"awnn: {args.method} failed: {exc}", file=sys.stderr)
        return EXIT_ESTIMATOR

    save_csv(theta, args.out)
    if args.audit:
        with open(args.audit, "w") as fh:
            json.dump(audit, fh, indent=2, sort_keys=True, default=float)
            fh.write("\n")
    return 0


def _cmd_bench(args) -> int:
    from .experiments import BenchSpec, run_bench, write_aggregate_json, write_results_csv
    try:
        with open(args.config) as fh:
            cfg = json.load(fh)
    except OSError as exc:
        print(f"awnn: cannot read {args.config}: {exc}", file=sys.stderr)
        return EXIT_DATA
    except json.JSONDecodeError as exc:
        raise UsageError(f"malformed config: {exc}") from exc
    try:
        spec = BenchSpec.from_dict(cfg)
    except (KeyError, TypeError, ValueError) as exc:
        raise UsageError(f"malformed config: {exc}") from exc

    def progress(k, total):
        logging.getLogger("awnn.bench").info("task %d/%d", k, total)

    result = run_bench(spec, n_jobs=args.jobs, progress=progress)
    write_results_csv(result.records, args.out, include_timing=not args.no_timing)
    if args.aggregate:
        write_aggregate_json(result, args.aggregate)
    failed = [r for r in result.records if r.error]
    for r in failed:
        print(f"awnn: {r.method} n={r.n} replicate={r.replicate}: {r.error}", file=sys.stderr)
    return 0


def _cmd_slope(args) -> int:
    from .experiments import read_results_csv, slope_table
    keys = tuple(k.strip() for k in args.group_by.split(",") if k.strip())
    try:
        records = read_results_csv(args.results)
    except (OSError, ValueError, KeyError) as exc:
        print(f"awnn: cannot read {args.results}: {exc}", file=sys.stderr)
        return EXIT_DATA
    try:
        table = slope_table(records, keys)
    except ValueError as exc:
        if "group" in str(exc):
            raise UsageError(str(exc)) from exc
        print(f"awnn: {exc}", file=sys.stderr)
        return EXIT_DATA
    print("\t".join(keys + ("slope",)))
    for group, slope in table:
        cells = [str(g) for g in group]
        print("\t".join(cells + ["nan" if slope is None else f"{slope:.3f}"]))
    return 0


COMMANDS = {"synth": _cmd_synth, "impute": _cmd_impute, "bench": _cmd_bench, "slope": _cmd_slope}


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                            stream=sys.stderr, format="%(name)s: %(message)s")
        if args.threads:
            import numba
            numba.set_num_threads(min(args.threads, numba.config.NUMBA_NUM_THREADS))
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(str(exc).rstrip(), file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())

"""Command-line interface.

Subcommands:

* ``generate``: write a ground-truth matrix (and optionally a random
  permutation and a noisy observation of it).
* ``metrics``: print the complexity report of a matrix CSV as JSON.
* ``estimate``: run one estimator on an observation CSV, print a JSON
  summary, optionally write the fitted observation.
* ``experiment``: run a figure preset or a JSON-configured grid and write
  the records CSV.

Matrices are headerless CSV (one row per line, '.' decimal, LF endings);
permutations are one 0-based image per line.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys

from . import experiments, metrics, synth
from .core import (
    Permutation,
    derive_rng,
    read_matrix_csv,
    read_permutation,
    write_matrix_csv,
    write_permutation,
)
from .estimators import (
    EstimatorConfig,
    averaging_fit,
    estimation_losses,
    exhaustive_ls,
    oracle_fit,
    rank_score,
    rank_sum,
)
from .shape import MONOTONE, UNIMODAL


def _add_generate(sub):
    p = sub.add_parser("generate", help="write a ground-truth matrix (+ optional observation)")
    p.add_argument("--family", required=True, choices=synth.FAMILIES)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--blocks", type=int, default=5)
    p.add_argument("--custom-path", help="matrix CSV for --family custom")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="truth matrix CSV path")
    p.add_argument("--perm-out", help="also draw a random row permutation and write it here")
    p.add_argument("--noise", choices=synth.NOISE_KINDS, default="gaussian")
    p.add_argument("--sigma", type=float, default=1.0)
    p.add_argument("--obs-out", help="write permuted truth + noise here (implies --perm-out semantics)")
    p.set_defaults(func=_cmd_generate)


def _cmd_generate(args) -> int:
    spec = synth.GeneratorSpec(
        family=args.family, n=args.n, m=args.m, seed=args.seed,
        blocks=args.blocks, path=args.custom_path,
    )
    truth = synth.gen_truth(spec)
    write_matrix_csv(truth, args.out)
    if args.perm_out or args.obs_out:
        rng = derive_rng(args.seed, synth.PERMUTATION_STREAM)
        p = Permutation.random(args.n, rng)
        if args.perm_out:
            write_permutation(p, args.perm_out)
        if args.obs_out:
            noise = synth.NoiseSpec(kind=args.noise, sigma=args.sigma, seed=args.seed)
            y = synth.gen_observation(truth, p, noise)
            write_matrix_csv(y, args.obs_out)
    return 0


def _add_metrics(sub):
    p = sub.add_parser("metrics", help="print K/V/R complexity report as JSON")
    p.add_argument("matrix", help="matrix CSV path")
    p.add_argument(
        "--quantize", type=float, default=None,
        help="snap values to multiples of this width before counting distinct levels",
    )
    p.set_defaults(func=_cmd_metrics)


def _cmd_metrics(args) -> int:
    a = read_matrix_csv(args.matrix)
    report = metrics.complexity_report(a, quantize=args.quantize)
    print(json.dumps(report.to_json_dict()))
    return 0


_METHODS = ("rankscore", "ranksum", "exhaustive", "oracle", "average")


def _add_estimate(sub):
    p = sub.add_parser("estimate", help="run one estimator on an observation CSV")
    p.add_argument("--method", required=True, choices=_METHODS)
    p.add_argument("--shape", choices=("monotone", "unimodal"), default="monotone")
    p.add_argument("--tau", type=float, default=None,
                   help="score threshold (default 6 unless --tau-rule)")
    p.add_argument("--tau-rule", action="store_true",
                   help="derive tau as 3*sigma*sqrt((C+1)*log(n*m))")
    p.add_argument("--tau-c", type=float, default=1.0, help="constant C for --tau-rule")
    p.add_argument("--sigma", type=float, default=1.0)
    p.add_argument("--in", dest="observation", required=True, help="observation CSV path")
    p.add_argument("--truth", help="true matrix CSV, enables loss reporting")
    p.add_argument("--perm", help="true permutation file (required for oracle)")
    p.add_argument("--fitted-out", help="write the fitted observation matrix here")
    p.add_argument("--max-rows", type=int, default=8,
                   help="row cap for the exhaustive method")
    p.set_defaults(func=_cmd_estimate)


def _cmd_estimate(args) -> int:
    y = read_matrix_csv(args.observation)
    n, m = y.shape
    shape = UNIMODAL if args.shape == "unimodal" else MONOTONE

    if args.method == "rankscore":
        if args.tau_rule:
            cfg = EstimatorConfig(shape=shape, sigma=args.sigma, tau=None,
                                  tau_constant=args.tau_c)
        else:
            cfg = EstimatorConfig(shape=shape, sigma=args.sigma,
                                  tau=6.0 if args.tau is None else args.tau)
        fit = rank_score(y, cfg)
        tau_used = cfg.resolve_tau(n, m)
    elif args.method == "ranksum":
        if args.shape == "unimodal":
            raise ValueError("ranksum always fits monotone columns; drop --shape unimodal")
        fit = rank_sum(y)
        tau_used = None
    elif args.method == "exhaustive":
        fit = exhaustive_ls(y, shape, max_rows=args.max_rows)
        tau_used = None
    elif args.method == "oracle":
        if not args.perm:
            raise ValueError("oracle needs the true permutation (--perm)")
        fit = oracle_fit(y, read_permutation(args.perm), shape)
        tau_used = None
    elif args.method == "average":
        if args.shape == "unimodal":
            raise ValueError("average always fits constant columns; drop --shape unimodal")
        fit = averaging_fit(y)
        tau_used = None
    else:
        raise ValueError(f"unknown method {args.method!r}")

    summary = {
        "method": args.method,
        "n": n,
        "m": m,
        "shape": args.shape,
        "tau": tau_used,
        "sse": fit.sse,
        "p_hat": [int(v) for v in fit.p_hat.mapping],
    }
    if fit.scores is not None:
        summary["scores"] = [int(s) for s in fit.scores]
    if args.truth:
        truth = read_matrix_csv(args.truth)
        p_true = read_permutation(args.perm) if args.perm else Permutation.identity(n)
        losses = estimation_losses(fit, p_true, truth)
        summary["losses"] = {
            "total": losses.total,
            "perm_only": losses.perm_only,
            "matrix_only": losses.matrix_only,
        }
    else:
        summary["losses"] = None
    print(json.dumps(summary))
    if args.fitted_out:
        write_matrix_csv(fit.m_hat, args.fitted_out)
    return 0


def _add_experiment(sub):
    p = sub.add_parser("experiment", help="run a preset figure or a JSON-configured grid")
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--figure", choices=experiments.FIGURES)
    group.add_argument("--config", help="JSON file mirroring ExperimentConfig fields")
    p.add_argument("--n-min", type=int, default=None)
    p.add_argument("--n-max", type=int, default=None)
    p.add_argument("--n-points", type=int, default=None)
    p.add_argument("--replications", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="records CSV path (default figure-<name>.csv)")
    p.add_argument("--timing", action="store_true",
                   help="record real wall times (breaks byte-identical reruns)")
    p.add_argument("--slope", action="store_true",
                   help="also print per-method log-log slope fits as JSON")
    p.set_defaults(func=_cmd_experiment)


def _cmd_experiment(args) -> int:
    if args.figure:
        records = experiments.run_figure(
            args.figure,
            timing=args.timing,
            n_min=args.n_min,
            n_max=args.n_max,
            n_points=args.n_points,
            replications=args.replications,
            seed=args.seed,
        )
        out = args.out or f"figure-{args.figure}.csv"
    else:
        with open(args.config) as f:
            raw = json.load(f)
        known = {f.name for f in dataclasses.fields(experiments.ExperimentConfig)}
        unknown = set(raw) - known
        if unknown:
            raise ValueError(
                f"unknown config fields {sorted(unknown)}; expected a subset of {sorted(known)}"
            )
        if "grid" in raw and raw["grid"] is not None:
            raw["grid"] = tuple(tuple(cell) for cell in raw["grid"])
        if "methods" in raw:
            raw["methods"] = tuple(raw["methods"])
        cfg = experiments.ExperimentConfig(**raw)
        records = experiments.run_experiment(cfg, timing=args.timing)
        out = args.out or cfg.out_path
        if not out:
            raise ValueError("no output path: pass --out or set out_path in the config")
    experiments.emit_csv(records, out)
    print(f"wrote {len(records)} records to {out}", file=sys.stderr)
    if args.slope:
        for method in dict.fromkeys(r.method for r in records):
            subset = [r for r in records if r.method == method]
            try:
                fitres = experiments.fit_loglog_slope(subset)
            except ValueError as e:
                print(json.dumps({"method": method, "error": str(e)}))
                continue
            print(json.dumps({
                "method": method,
                "slope": fitres.slope,
                "intercept": fitres.intercept,
                "r_squared": fitres.r_squared,
            }))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="seriation",
        description="Noisy seriation: generators, estimators, metrics and experiments.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    _add_generate(sub)
    _add_metrics(sub)
    _add_estimate(sub)
    _add_experiment(sub)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

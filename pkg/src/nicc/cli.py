"""Command-line surface: fit, cv, select, simulate, experiment.

Everything emits machine-readable output (JSON for single runs, CSV for
experiment grids). Exit codes are a stable contract: 0 success, 1
numerical failure, 2 usage or schema error.
"""

from __future__ import annotations

import argparse
import json
import sys

from .criteria import CRITERION_NAMES, aic, bic, nic, nicc
from .crossval import kfold_cluster_deviance, loo_cluster_deviance
from .errors import NiccError, SchemaError
from .experiment import run_design, write_records_csv, write_timings_csv
from .glm import fit_glm
from .io import read_dataset, write_dataset
from .selection import forward_path, make_criterion, select_1se, select_min
from .simulation import P_GRID, SimConfig, enumerate_design, generate

DESIGN_KEYS = ("sweeps", "families", "iterations", "base_seed", "p_values")
SWEEP_ALIASES = {
    "ni": "cluster_size",
    "cluster_size": "cluster_size",
    "phi": "ar1_level",
    "ar1_level": "ar1_level",
    "rb": "re_sd_ratio",
    "re_sd_ratio": "re_sd_ratio",
    "selection": "selection",
    "strong": "strong",
}


def parse_design_file(path) -> dict:
    """Key-value design spec: ``key = value``, ``#`` comments, lists by comma."""
    spec: dict = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise SchemaError(f"{path}:{lineno}: expected 'key = value', got {raw!r}")
            key, _, value = line.partition("=")
            key = key.strip().lower()
            value = value.strip()
            if key not in DESIGN_KEYS:
                raise SchemaError(f"{path}:{lineno}: unknown key {key!r}; expected {DESIGN_KEYS}")
            spec[key] = value
    if "sweeps" in spec:
        sweeps = []
        for token in spec["sweeps"].split(","):
            token = token.strip().lower()
            if token not in SWEEP_ALIASES:
                raise SchemaError(f"{path}: unknown sweep {token!r}")
            sweeps.append(SWEEP_ALIASES[token])
        spec["sweeps"] = tuple(dict.fromkeys(sweeps))
    if "families" in spec:
        families = tuple(t.strip().lower() for t in spec["families"].split(","))
        for fam in families:
            if fam not in ("gaussian", "binomial"):
                raise SchemaError(f"{path}: unknown family {fam!r}")
        spec["families"] = families
    for key in ("iterations", "base_seed"):
        if key in spec:
            try:
                spec[key] = int(spec[key])
            except ValueError:
                raise SchemaError(f"{path}: {key} must be an integer") from None
    if "p_values" in spec:
        try:
            spec["p_values"] = tuple(int(t.strip()) for t in spec["p_values"].split(","))
        except ValueError:
            raise SchemaError(f"{path}: p_values must be integers") from None
    return spec


def _emit(payload, out_path) -> None:
    text = json.dumps(payload, indent=2)
    if out_path:
        with open(out_path, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def _load(args):
    predictors = args.predictors.split(",") if args.predictors else None
    return read_dataset(args.csv, args.family, args.response, args.cluster, predictors)


def cmd_fit(args) -> int:
    data = _load(args)
    fit = fit_glm(data)
    crit = {}
    for name, value in (
        ("aic", aic(fit)),
        ("bic", bic(fit)),
        ("nic", nic(fit)),
        ("nicc", nicc(fit)),
    ):
        crit[name] = {"value": value.value, "penalty": value.penalty}
    names = fit.names or tuple(f"x{c}" for c in fit.columns)
    _emit(
        {
            "family": data.family,
            "n_obs": data.n_obs,
            "n_clusters": data.n_clusters,
            "converged": fit.converged,
            "iterations": fit.iterations,
            "coefficients": dict(zip(names, fit.theta_hat.tolist())),
            "loglik": fit.loglik,
            "dispersion": fit.dispersion,
            "criteria": crit,
        },
        args.out,
    )
    return 0


def _parse_k(raw: str):
    if raw.lower() == "loo":
        return "loo"
    try:
        return int(raw)
    except ValueError:
        raise SchemaError(f"--k must be an integer or 'loo', got {raw!r}") from None


def cmd_cv(args) -> int:
    data = _load(args)
    k = _parse_k(args.k)
    if k == "loo":
        result = loo_cluster_deviance(data, parallelism=args.parallelism)
    else:
        result = kfold_cluster_deviance(data, k=k, seed=args.seed, parallelism=args.parallelism)
    _emit(
        {
            "method": "loo" if k == "loo" else "kfold",
            "k": result.n_folds,
            "seed": args.seed,
            "total_deviance": result.total_deviance,
            "per_fold_deviance": result.per_fold_deviance.tolist(),
            "n_failed_folds": result.n_failed_folds,
            "fold_errors": list(result.fold_errors),
            "fold_assignment": {str(k_): int(v) for k_, v in result.fold_assignment.items()},
        },
        args.out,
    )
    return 0 if result.ok else 1


def cmd_select(args) -> int:
    data = _load(args)
    if args.criterion == "cvdev":
        k = _parse_k(args.k) if args.k else None
        if k in (None, "loo"):
            raise SchemaError("--criterion cvdev needs an integer --k")
        evaluator = make_criterion("cvdev", k=k, seed=args.seed, parallelism=args.parallelism)
    else:
        evaluator = make_criterion(args.criterion, parallelism=args.parallelism)
    path = forward_path(data, evaluator)
    choice = select_min(path) if args.rule == "min" else select_1se(path)
    def name_of(col):
        return data.names[col] if data.names else f"x{col}"

    _emit(
        {
            "criterion": args.criterion,
            "rule": args.rule,
            "seed": args.seed,
            "chosen_size": choice.size,
            "chosen_variables": [name_of(c) for c in choice.variable_set],
            "value_at_choice": choice.value,
            "path": [
                {
                    "step": i + 1,
                    "added": name_of(s.added),
                    "value": s.value,
                    "se": s.se,
                }
                for i, s in enumerate(path.steps)
            ],
            "failures": [
                {"step": step, "column": name_of(col), "error": msg}
                for step, col, msg in path.failures
            ],
        },
        args.out,
    )
    return 0


def cmd_simulate(args) -> int:
    config = SimConfig(
        family=args.family,
        clusters=args.clusters,
        cluster_size=args.cluster_size,
        n_predictors=args.p,
        re_sd_ratio=args.rb,
        ar1_level=args.phi,
        seed=args.seed,
    )
    data, _ = generate(config)
    write_dataset(args.out, data)
    print(
        json.dumps(
            {
                "out": args.out,
                "family": config.family,
                "n_obs": data.n_obs,
                "clusters": data.n_clusters,
                "predictors": data.n_cols - 1,
                "seed": config.seed,
            }
        )
    )
    return 0


def cmd_experiment(args) -> int:
    spec = parse_design_file(args.design)
    iterations = args.iterations if args.iterations is not None else spec.get("iterations", 20)
    base_seed = args.seed if args.seed is not None else spec.get("base_seed", 0)
    points = enumerate_design(
        base_seed,
        iterations=iterations,
        families=spec.get("families", ("gaussian", "binomial")),
        sweeps=spec.get("sweeps", ("cluster_size", "ar1_level", "re_sd_ratio", "selection")),
        p_values=spec.get("p_values", P_GRID),
    )
    records, timings = run_design(points, parallelism=args.parallelism)
    write_records_csv(args.out, records)
    write_timings_csv(args.out + ".timing.csv", timings)
    failed = sum(1 for r in records if r.criterion == "failed")
    print(
        json.dumps(
            {
                "out": args.out,
                "points": len(points),
                "records": len(records),
                "failed_points": failed,
                "base_seed": base_seed,
                "iterations": iterations,
            }
        )
    )
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nicc",
        description="Clustered information criteria, cluster-based CV, and stepwise selection.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_data_args(p):
        p.add_argument("csv", help="input CSV with a header row")
        p.add_argument("--family", required=True, choices=("gaussian", "binomial"))
        p.add_argument("--response", default="y", help="response column name")
        p.add_argument("--cluster", default="cluster", help="cluster label column name")
        p.add_argument("--predictors", default=None,
                       help="comma-separated predictor columns (default: all others)")
        p.add_argument("--out", default=None, help="write JSON here instead of stdout")
        p.add_argument("--parallelism", type=int, default=1)

    p_fit = sub.add_parser("fit", help="fit one model and report criteria")
    add_data_args(p_fit)
    p_fit.set_defaults(func=cmd_fit)

    p_cv = sub.add_parser("cv", help="cluster-based cross-validated deviance")
    add_data_args(p_cv)
    p_cv.add_argument("--k", default="loo", help="fold count, or 'loo' for one fold per cluster")
    p_cv.add_argument("--seed", type=int, default=0)
    p_cv.set_defaults(func=cmd_cv)

    p_sel = sub.add_parser("select", help="forward stepwise selection")
    add_data_args(p_sel)
    p_sel.add_argument("--criterion", required=True, choices=CRITERION_NAMES)
    p_sel.add_argument("--rule", default="min", choices=("min", "1se"))
    p_sel.add_argument("--k", default=None, help="fold count for --criterion cvdev")
    p_sel.add_argument("--seed", type=int, default=0)
    p_sel.set_defaults(func=cmd_select)

    p_sim = sub.add_parser("simulate", help="generate one clustered dataset as CSV")
    p_sim.add_argument("--family", required=True, choices=("gaussian", "binomial"))
    p_sim.add_argument("--clusters", type=int, default=50)
    p_sim.add_argument("--cluster-size", type=int, default=50)
    p_sim.add_argument("--p", type=int, default=5, help="number of predictors")
    p_sim.add_argument("--rb", type=float, default=1.0, help="random/fixed effect SD ratio")
    p_sim.add_argument("--phi", type=float, default=0.4, help="AR1 level of random-effect predictors")
    p_sim.add_argument("--seed", type=int, default=0)
    p_sim.add_argument("--out", required=True)
    p_sim.set_defaults(func=cmd_simulate)

    p_exp = sub.add_parser("experiment", help="run a simulation design to CSV")
    p_exp.add_argument("--design", required=True, help="key-value design spec file")
    p_exp.add_argument("--out", required=True)
    p_exp.add_argument("--iterations", type=int, default=None)
    p_exp.add_argument("--seed", type=int, default=None, help="base seed (overrides the file)")
    p_exp.add_argument("--parallelism", type=int, default=1)
    p_exp.set_defaults(func=cmd_experiment)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except SchemaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except NiccError as exc:
        print(f"numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


def entry_point() -> None:
    sys.exit(main())


if __name__ == "__main__":
    sys.exit(main())

"""Command-line front end.

Exit codes: 0 success, 1 a statistical check failed, 2 usage or validation
error.
"""

from __future__ import annotations

import argparse
import sys

from . import core, noisy
from .denoising import NoisyDataset, get_kernel, get_metric
from .errors import BayesFprError, ConfigError
from .harness import ExperimentConfig, run_replicates
from .io import dumps, import_csv, load_dataset, load_json, save_dataset, write_report
from .synthetic import (
    FiniteModel,
    MC_ORACLE_SAMPLES,
    SmoothModel,
    model_from_dict,
    noise_from_dict,
    sample_noisy,
    sample_soft,
)

EXIT_OK, EXIT_FAILED, EXIT_USAGE = 0, 1, 2


def _auto_or_float(s: str):
    return s if s == "auto" else float(s)


def cmd_synth(args) -> int:
    model = model_from_dict(load_json(args.model, "model spec"))
    noise = noise_from_dict(load_json(args.noise, "noise spec")) if args.noise else None
    if args.n < 1:
        raise ConfigError(f"--n must be positive, got {args.n}")
    if noise is None:
        data = sample_soft(model, args.n, args.seed)
    else:
        data = sample_noisy(model, noise, args.n, args.seed)
    save_dataset(data, args.out, categories=model.k if isinstance(model, FiniteModel) else None)
    return EXIT_OK


def cmd_estimate(args) -> int:
    data = load_dataset(args.dataset)
    fnr = args.rate == "fnr"
    hyper: dict = {"epsilon": args.epsilon}
    if args.estimator in ("psi1", "psi2"):
        if not isinstance(data, core.SoftDataset):
            raise ConfigError(f"{args.estimator} needs a soft-label dataset, got {args.dataset}")
        if args.estimator == "psi1":
            if args.p0 is None:
                raise ConfigError("psi1 needs the class-0 prior: pass --p0")
            prior = core.ClassPrior(args.p0)
            res = (core.fnr_known_prior if fnr else core.fpr_known_prior)(data, prior)
            hyper = {"p0": args.p0}
        else:
            res = (core.fnr_prior_free if fnr else core.fpr_prior_free)(data, args.epsilon)
    else:
        if not isinstance(data, NoisyDataset):
            data = NoisyDataset(data.x, data.y, (0.0, 1.0))
        spec = noisy.PartitionSpec(args.ratio, args.seed)
        hyper.update(ratio=args.ratio, seed=args.seed)
        if args.estimator == "denoised":
            res = (noisy.fnr_denoised if fnr else noisy.fpr_denoised)(data, spec, args.epsilon)
        else:
            metric = get_metric(args.metric) if args.metric else None
            fn = noisy.fnr_nw if fnr else noisy.fpr_nw
            res = fn(data, spec, metric, get_kernel(args.kernel), args.h, args.epsilon)
            hyper.update(h=float(res.metadata["h"]), metric=res.metadata["metric"], kernel=args.kernel)
    if "epsilon" in res.metadata:
        hyper["epsilon"] = float(res.metadata["epsilon"])
    out = {
        "estimator": args.estimator,
        "rate": args.rate,
        "value": res.value,
        "denominator_clamped": res.denominator_clamped,
        "n_used": res.n_used,
        "hyperparameters": hyper,
        "metadata": dict(res.metadata),
    }
    print(dumps(out))
    return EXIT_OK


def cmd_oracle(args) -> int:
    model = model_from_dict(load_json(args.model, "model spec"))
    if isinstance(model, SmoothModel) and model.dim > 1:
        truth = model._monte_carlo_truth(MC_ORACLE_SAMPLES, args.seed)
    else:
        truth = model.truth()
    print(dumps(truth.to_dict()))
    return EXIT_OK


def cmd_experiment(args) -> int:
    raw = load_json(args.config, "config")
    if args.seed is not None:
        if not isinstance(raw, dict):
            raise ConfigError("config: expected a JSON object")
        raw = {**raw, "seed": args.seed}
    cfg = ExperimentConfig.from_dict(raw)
    report = run_replicates(cfg, workers=args.workers)
    write_report(report, args.out)
    for line in report.summary_lines():
        print(line)
    timing = ", ".join(f"n={n}: {t:.2f}s" for n, t in report.runtime_seconds.items())
    print(f"{'PASS' if report.passed else 'FAIL'} overall ({timing})")
    return EXIT_OK if report.passed else EXIT_FAILED


def cmd_import_csv(args) -> int:
    bounds = tuple(args.bounds) if args.bounds else None
    data = import_csv(args.csv, args.schema, bounds)
    save_dataset(data, args.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="bayesfpr", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("synth", help="sample a dataset from a model spec")
    s.add_argument("model", help="model spec JSON file")
    s.add_argument("--noise", help="noise spec JSON file; omit for soft labels")
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_synth)

    e = sub.add_parser("estimate", help="estimate the Bayes FPR/FNR of a dataset")
    e.add_argument("dataset")
    e.add_argument("estimator", choices=["psi1", "psi2", "denoised", "nw"])
    e.add_argument("--rate", choices=["fpr", "fnr"], default="fpr")
    e.add_argument("--p0", type=float, help="known class prior (class 0 for fpr, class 1 for fnr)")
    e.add_argument("--epsilon", type=_auto_or_float, default="auto")
    e.add_argument("--ratio", type=float, default=0.5, help="|D1| / n for the noisy estimators")
    e.add_argument("--seed", type=int, default=0, help="partition seed")
    e.add_argument("--h", type=_auto_or_float, default="auto", help="NW bandwidth")
    e.add_argument("--metric", choices=["discrete", "euclidean"])
    e.add_argument("--kernel", default="triangular")
    e.set_defaults(func=cmd_estimate)

    o = sub.add_parser("oracle", help="print the exact error rates of a model")
    o.add_argument("model")
    o.add_argument("--seed", type=int, default=0, help="seed of the Monte Carlo oracle (dim > 1)")
    o.set_defaults(func=cmd_oracle)

    x = sub.add_parser("experiment", help="run a Monte Carlo experiment config")
    x.add_argument("config")
    x.add_argument("--out", required=True)
    x.add_argument("--workers", type=int, default=1)
    x.add_argument("--seed", type=int, help="override the config seed")
    x.set_defaults(func=cmd_experiment)

    c = sub.add_parser("import-csv", help="convert a CSV file to the dataset format")
    c.add_argument("csv")
    c.add_argument("--schema", choices=["soft", "noisy", "binary"], required=True)
    c.add_argument("--bounds", type=float, nargs=2)
    c.add_argument("--seed", type=int, default=0, help="unused; accepted for uniformity")
    c.add_argument("--out", required=True)
    c.set_defaults(func=cmd_import_csv)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (BayesFprError, OSError) as exc:
        print(f"bayesfpr {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())

"""Command-line front end.

Subcommands: generate, w1, check, limit, experiment, compare, probe, report.
Each reads flags or a JSON config (schema_version 1, documented in the
README), writes CSV/JSON artifacts, and exits 0 on success, 1 on validation
errors, 2 on numerical failures.
"""
from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import conditions, harness, limitlaw
from .errors import NumericalError, ValidationError
from .limitlaw import StatisticSample
from .models import model_from_dict
from .processes import generate, spec_from_dict
from .transport import w1_two_samples

__all__ = ["cli_main", "main"]


def _load_config(path: str) -> dict:
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)


def _read_values(path: str) -> np.ndarray:
    with open(path, "r", encoding="utf-8") as fh:
        return StatisticSample.read_csv_values(fh)


def _out_path(args, name: str) -> str:
    os.makedirs(args.out_dir, exist_ok=True)
    return os.path.join(args.out_dir, name)


def _emit(obj: dict, args, name: str) -> None:
    text = json.dumps(obj, indent=2, sort_keys=True)
    print(text)
    with open(_out_path(args, name), "w", encoding="utf-8") as fh:
        fh.write(text + "\n")


def _cmd_generate(args) -> int:
    cfg = _load_config(args.config)
    if cfg.get("schema_version") != harness.SCHEMA_VERSION:
        raise ValidationError("config schema_version must be 1")
    spec = spec_from_dict(cfg["process"])
    seed = args.seed if args.seed is not None else int(cfg.get("seed", 0))
    path = generate(spec, int(cfg["n"]), seed, stream=int(cfg.get("stream", 0)))
    out = _out_path(args, cfg.get("out", "path.csv"))
    with open(out, "w", encoding="utf-8") as fh:
        path.to_csv(fh)
    print(out)
    return 0


def _cmd_w1(args) -> int:
    x = _read_values(args.x)
    y = _read_values(args.y)
    print(f"{w1_two_samples(x, y)!r}")
    return 0


def _cmd_check(args) -> int:
    if args.gamma is not None and args.a is not None:
        report = conditions.check_intermittent_threshold(args.gamma, args.a)
        _emit(report.to_dict(), args, "check.json")
        return 0
    if args.config is None:
        raise ValidationError("check needs either --gamma/--a or --config")
    cfg = _load_config(args.config)
    kind = cfg.get("kind")
    if kind == "threshold":
        report = conditions.check_intermittent_threshold(float(cfg["gamma"]), float(cfg["a"]))
    elif kind == "phi":
        bound = conditions.PhiGeometric(float(cfg.get("c1", 1.0)), float(cfg["rho"]))
        report = conditions.check_phi_condition(bound, model_from_dict(cfg["model"]))
    elif kind == "alpha":
        bound = conditions.AlphaPolynomial(float(cfg.get("c_gamma", 1.0)), float(cfg["gamma"]))
        report = conditions.check_alpha_condition(
            bound, model_from_dict(cfg["model"]), int(cfg.get("terms", 200))
        )
    elif kind == "linear":
        from .processes import coeffs_from_dict

        marginal = cfg.get("marginal")
        report = conditions.check_linear_conditions(
            coeffs_from_dict(cfg["coefficients"]),
            model_from_dict(cfg["innovation"]),
            cfg["mode"],
            r=cfg.get("r"),
            marginal=model_from_dict(marginal) if marginal else None,
            terms=int(cfg.get("terms", 200)),
        )
    else:
        raise ValidationError(f"unknown check kind {kind!r}")
    _emit(report.to_dict(), args, "check.json")
    return 0


def _cmd_limit(args) -> int:
    cfg = _load_config(args.config)
    if cfg.get("schema_version") != harness.SCHEMA_VERSION:
        raise ValidationError("config schema_version must be 1")
    seed = args.seed if args.seed is not None else int(cfg.get("seed", 0))
    grid_cfg = cfg.get("grid", {})
    size = int(grid_cfg.get("size", 256))
    scheme = grid_cfg.get("scheme", "quantile")
    model = model_from_dict(cfg["model"]) if "model" in cfg else None
    if model is None:
        raise ValidationError("limit config needs a 'model' for the grid/reference")
    grid = (
        limitlaw.variance_length_grid(model, size)
        if scheme == "vartail"
        else limitlaw.quantile_grid(model, size)
    )
    if "process" in cfg:
        cg = limitlaw.covariance_dependent(
            spec_from_dict(cfg["process"]),
            grid,
            int(cfg["lag_cutoff"]),
            int(cfg["sim_length"]),
            seed,
        )
    else:
        cg = limitlaw.covariance_iid(model, grid)
    sample = limitlaw.sample_limit_functional(cg, int(cfg.get("replications", 10_000)), seed)
    out = _out_path(args, cfg.get("out", "limit.csv"))
    with open(out, "w", encoding="utf-8") as fh:
        sample.to_csv(fh)
    _emit(
        {"covariance": {k: v for k, v in cg.to_dict().items() if k != "matrix"},
         "out": out, "metadata": sample.metadata},
        args, "limit.json",
    )
    return 0


def _cmd_experiment(args) -> int:
    cfg_dict = _load_config(args.config)
    cfg = harness.ExperimentConfig.from_dict(cfg_dict)
    samples = harness.run_clt_experiment(cfg, threads=args.threads)
    files = {}
    for n, sample in samples.items():
        out = _out_path(args, f"tn_{n}.csv")
        with open(out, "w", encoding="utf-8") as fh:
            sample.to_csv(fh)
        files[str(n)] = out
    _emit({"config": cfg_dict, "outputs": files}, args, "experiment.json")
    return 0


def _cmd_compare(args) -> int:
    a = StatisticSample(_read_values(args.a), "finite_n")
    b = StatisticSample(_read_values(args.b), "finite_n")
    report = harness.compare_distributions(a, b)
    _emit(report.to_dict(), args, "compare.json")
    return 0


def _cmd_probe(args) -> int:
    if args.config:
        cfg = _load_config(args.config)
        gamma, a = float(cfg["gamma"]), float(cfg["a"])
        n_values = [int(v) for v in cfg["n_values"]]
        reps = int(cfg.get("replications", 200))
        seed = args.seed if args.seed is not None else int(cfg.get("seed", 0))
        growth = float(cfg.get("growth_factor", 1.5))
    else:
        if args.gamma is None or args.a is None or args.n_values is None:
            raise ValidationError("probe needs --gamma, --a and --n-values (or --config)")
        gamma, a = args.gamma, args.a
        n_values = [int(v) for v in args.n_values.split(",")]
        reps = args.replications
        seed = args.seed if args.seed is not None else 0
        growth = args.growth_factor
    report = harness.divergence_probe(
        gamma, a, n_values, reps, seed, growth_factor=growth, threads=args.threads
    )
    _emit(report.to_dict(), args, "probe.json")
    return 0


def _cmd_report(args) -> int:
    cfg = _load_config(args.config)
    finite = {}
    for key, path in cfg["finite_n"].items():
        finite[int(key)] = StatisticSample(
            _read_values(path), "finite_n", metadata={"n": int(key)}
        )
    limit_sample = StatisticSample(_read_values(cfg["limit"]), "limit_functional")
    report = harness.compare_against_limit(finite, limit_sample)
    _emit(report.to_dict(), args, "report.json")
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="w1clt",
        description="L1-Wasserstein empirical CLT simulation and verification",
    )
    sub = parser.add_subparsers(dest="command")

    def common(p):
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--threads", type=int, default=1)
        p.add_argument("--out-dir", default="out")

    p = sub.add_parser("generate", help="simulate a trajectory to CSV")
    p.add_argument("--config", required=True)
    common(p)
    p.set_defaults(func=_cmd_generate)

    p = sub.add_parser("w1", help="exact W1 between two sample CSVs")
    p.add_argument("--x", required=True)
    p.add_argument("--y", required=True)
    common(p)
    p.set_defaults(func=_cmd_w1)

    p = sub.add_parser("check", help="evaluate a convergence condition")
    p.add_argument("--gamma", type=float)
    p.add_argument("--a", type=float)
    p.add_argument("--config")
    common(p)
    p.set_defaults(func=_cmd_check)

    p = sub.add_parser("limit", help="covariance grid + limit functional sample")
    p.add_argument("--config", required=True)
    common(p)
    p.set_defaults(func=_cmd_limit)

    p = sub.add_parser("experiment", help="finite-n Monte Carlo experiment")
    p.add_argument("--config", required=True)
    common(p)
    p.set_defaults(func=_cmd_experiment)

    p = sub.add_parser("compare", help="KS/W1/mean comparison of two statistic CSVs")
    p.add_argument("--a", required=True)
    p.add_argument("--b", required=True)
    common(p)
    p.set_defaults(func=_cmd_compare)

    p = sub.add_parser("probe", help="intermittent-map growth probe")
    p.add_argument("--gamma", type=float)
    p.add_argument("--a", type=float)
    p.add_argument("--n-values")
    p.add_argument("--replications", type=int, default=200)
    p.add_argument("--growth-factor", type=float, default=1.5)
    p.add_argument("--config")
    common(p)
    p.set_defaults(func=_cmd_probe)

    p = sub.add_parser("report", help="per-n comparison table against a limit sample")
    p.add_argument("--config", required=True)
    common(p)
    p.set_defaults(func=_cmd_report)

    return parser


def cli_main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse exits 2 on usage errors; remap to 1
        return 0 if exc.code == 0 else 1
    if not getattr(args, "command", None):
        parser.print_usage(sys.stderr)
        return 1
    try:
        return args.func(args)
    except ValidationError as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return 1
    except (NumericalError, FileNotFoundError, json.JSONDecodeError, KeyError) as exc:
        if isinstance(exc, (FileNotFoundError, json.JSONDecodeError, KeyError)):
            print(f"validation error: {exc!r}", file=sys.stderr)
            return 1
        diag = getattr(exc, "diagnostic", None)
        print(f"numerical failure: {exc}" + (f" [{diag}]" if diag else ""), file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(cli_main())


if __name__ == "__main__":
    main()

"""Command-line entry point: ``rjmf --data u.data --method rjmcmc --out runs/``."""
from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import fields

from .exceptions import RatingsError
from .experiment import ExperimentConfig, load_config, run_experiment

_HELP = {
    "data_path": "MovieLens u.data file",
    "split_fraction": "fraction of ratings used for training",
    "seed": "seed for the split and the sampler",
    "method": "als or rjmcmc",
    "k": "latent dimension (als only)",
    "k_max": "largest latent dimension the sampler may visit",
    "lambda1_init": "initial user regularization weight",
    "lambda2_init": "initial item regularization weight",
    "alpha": "Adam step size",
    "beta1": "Adam first-moment decay",
    "beta2": "Adam second-moment decay",
    "eps": "Adam denominator offset",
    "freeze_tol": "stop adapting the weights once both move less than this",
    "t0": "initial temperature",
    "cooling": "geometric cooling factor",
    "tmin": "stop once the temperature reaches this",
    "step_scale": "random-walk step for same-dimension moves",
    "window": "smoothing window for the stabilization diagnostic",
    "als_max_iters": "ALS iteration cap",
    "als_tol": "ALS training-loss tolerance",
    "out": "output directory",
    "chains": "number of independent chains to run in parallel",
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rjmf",
        description="Fit latent factors to MovieLens ratings with ALS or reversible-jump annealing.",
    )
    parser.add_argument("--config", help="flat key=value file; flags override it")
    parser.add_argument("-v", "--verbose", action="store_true")
    for f in fields(ExperimentConfig):
        flag = "--data" if f.name == "data_path" else "--" + f.name.replace("_", "-")
        kwargs = {"dest": f.name, "default": None, "help": _HELP.get(f.name)}
        if f.name == "method":
            kwargs["choices"] = ["als", "rjmcmc"]
        elif f.type in ("int", "float"):
            kwargs["type"] = int if f.type == "int" else float
        parser.add_argument(flag, **kwargs)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    overrides = {f.name: getattr(args, f.name) for f in fields(ExperimentConfig)}
    try:
        cfg = load_config(args.config, **overrides)
        reports = run_experiment(cfg)
    except (OSError, RatingsError, ValueError) as exc:
        print(f"rjmf: error: {exc}", file=sys.stderr)
        return 1
    for i, rep in enumerate(reports):
        prefix = f"[chain {i}] " if len(reports) > 1 else ""
        print(f"{prefix}selected k = {rep.selected_k}, test RMSE = {rep.test_rmse_at_selected_k:.6f}, "
              f"lambda = ({rep.lambda1:.4f}, {rep.lambda2:.4f})")
    return 0


if __name__ == "__main__":
    sys.exit(main())

"""Batch experiment driver: config handling, runs, trace CSVs and summaries."""
from __future__ import annotations

import csv
import dataclasses
import logging
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Sequence

import numpy as np

from .als import als_fit
from .annealer import AnnealerConfig, AnnealSchedule, ChainTraceRecord, run_chain
from .data import DataSplit, load_movielens, rmse, split
from .model import HyperParams

_logger = logging.getLogger(__name__)

TRACE_COLUMNS = ("iteration", "temperature", "k", "move_kind", "accepted",
                 "train_loss", "test_rmse", "lambda1", "lambda2")


@dataclass
class ExperimentConfig:
    data_path: str = ""
    split_fraction: float = 0.8
    seed: int = 0
    method: str = "rjmcmc"
    k: int = 10
    k_max: int = 50
    lambda1_init: float = 30.0
    lambda2_init: float = 30.0
    alpha: float = 0.001
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    freeze_tol: float = 1e-5
    t0: float = 1.0
    cooling: float = 0.995
    tmin: float = 1e-3
    step_scale: float = 0.05
    window: int = 10
    als_max_iters: int = 100
    als_tol: float = 1e-6
    out: str = "."
    chains: int = 1

    def validate(self) -> None:
        if self.method not in ("als", "rjmcmc"):
            raise ValueError(f"method must be 'als' or 'rjmcmc', got {self.method!r}")
        if not 0.0 < self.split_fraction <= 1.0:
            raise ValueError("split_fraction must be in (0, 1]")
        if self.k < 1 or self.k_max < 1:
            raise ValueError("k and k_max must be >= 1")
        if self.window < 1:
            raise ValueError("window must be >= 1")
        if self.chains < 1:
            raise ValueError("chains must be >= 1")
        if not self.data_path:
            raise ValueError("no data path given")

    def annealer_config(self) -> AnnealerConfig:
        return AnnealerConfig(
            k_max=self.k_max,
            schedule=AnnealSchedule(self.t0, self.cooling, self.tmin),
            step_scale=self.step_scale,
            lambda1_init=self.lambda1_init,
            lambda2_init=self.lambda2_init,
            alpha=self.alpha, beta1=self.beta1, beta2=self.beta2, eps=self.eps,
            freeze_tol=self.freeze_tol,
        )


def _coerce(field_type: str, value: str):
    if field_type == "int":
        return int(value)
    if field_type == "float":
        return float(value)
    return value


def parse_config_text(text: str) -> dict:
    """Parse flat ``key = value`` lines; ``#`` starts a comment."""
    types = {f.name: f.type for f in fields(ExperimentConfig)}
    out = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"config line {lineno}: expected key=value, got {raw!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in types:
            raise ValueError(f"config line {lineno}: unknown key {key!r}")
        try:
            out[key] = _coerce(types[key], value)
        except ValueError:
            raise ValueError(f"config line {lineno}: bad value for {key}: {value!r}") from None
    return out


def load_config(path: str | os.PathLike | None = None, **overrides) -> ExperimentConfig:
    values = {}
    if path is not None:
        values.update(parse_config_text(Path(path).read_text()))
    values.update({k: v for k, v in overrides.items() if v is not None})
    return ExperimentConfig(**values)


def smooth(series: Sequence[float], window: int) -> np.ndarray:
    """Trailing moving average; the first ``window-1`` points average what is available."""
    if window < 1:
        raise ValueError("window must be >= 1")
    x = np.asarray(series, dtype=np.float64)
    if x.size == 0:
        return x
    csum = np.concatenate([[0.0], np.cumsum(x)])
    idx = np.arange(1, x.size + 1)
    lo = np.maximum(idx - window, 0)
    return (csum[idx] - csum[lo]) / (idx - lo)


def stabilized_index(smoothed: np.ndarray, rel_tol: float = 0.01) -> int | None:
    """First index after which every step changes the series by less than ``rel_tol``."""
    s = np.asarray(smoothed, dtype=np.float64)
    if s.size == 0 or not np.isfinite(s).all():
        return None
    if s.size == 1:
        return 0
    rel = np.abs(np.diff(s)) / np.maximum(np.abs(s[:-1]), 1e-300)
    big = np.nonzero(rel >= rel_tol)[0]
    return 0 if big.size == 0 else int(big[-1]) + 1


@dataclass
class SummaryReport:
    method: str
    selected_k: int
    test_rmse_at_selected_k: float
    lambda1: float
    lambda2: float
    stabilized_k: int | None
    iterations: int
    frozen: bool
    best_iteration: int
    wall_time: float

    def to_text(self) -> str:
        lines = []
        for f in fields(self):
            value = getattr(self, f.name)
            if isinstance(value, float):
                value = format(value, ".12g")
            lines.append(f"{f.name}: {value}")
        return "\n".join(lines) + "\n"


def _fmt(value) -> str:
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, float):
        return format(value, ".12g")
    return str(value)


def write_trace_csv(records: Sequence[ChainTraceRecord], path: str | os.PathLike) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(TRACE_COLUMNS)
        for rec in records:
            writer.writerow([_fmt(getattr(rec, c)) for c in TRACE_COLUMNS])


def read_trace_csv(path: str | os.PathLike) -> list[dict]:
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def _run_als(cfg: ExperimentConfig, data: DataSplit):
    hp = HyperParams(cfg.lambda1_init, cfg.lambda2_init)
    state, trace = als_fit(data.train, data.test, hp, cfg.k, seed=cfg.seed,
                           max_iters=cfg.als_max_iters, tol=cfg.als_tol)
    records = [
        ChainTraceRecord(r.iteration, math.nan, cfg.k, r.train_loss, r.test_rmse,
                         hp.lambda1, hp.lambda2, True, "als")
        for r in trace.records
    ]
    best = int(np.argmin(trace.losses)) if len(trace) else 0
    # ALS is a descent method, so the final state is the lowest-loss one up to slack
    return records, state, hp, False, best + 1


def _run_rjmcmc(cfg: ExperimentConfig, data: DataSplit, seed: int):
    res = run_chain(cfg.annealer_config(), data.train, data.test, seed=seed)
    return res.trace, res.best_state, res.hyperparams, res.adam.frozen, res.best_iteration


def _single(cfg: ExperimentConfig, data: DataSplit, seed: int, suffix: str) -> SummaryReport:
    start = time.perf_counter()
    if cfg.method == "als":
        records, best, hp, frozen, best_iter = _run_als(cfg, data)
    else:
        records, best, hp, frozen, best_iter = _run_rjmcmc(cfg, data, seed)
    out = Path(cfg.out)
    write_trace_csv(records, out / f"trace{suffix}.csv")

    test_rmse = rmse(best, data.test) if len(data.test) else math.nan
    stab_k = None
    if records and len(data.test):
        idx = stabilized_index(smooth([r.test_rmse for r in records], cfg.window))
        stab_k = None if idx is None else records[idx].k
    report = SummaryReport(
        method=cfg.method,
        selected_k=best.k,
        test_rmse_at_selected_k=test_rmse,
        lambda1=hp.lambda1,
        lambda2=hp.lambda2,
        stabilized_k=stab_k,
        iterations=len(records),
        frozen=frozen,
        best_iteration=best_iter,
        wall_time=time.perf_counter() - start,
    )
    (out / f"summary{suffix}.txt").write_text(report.to_text())
    return report


def _chain_job(args):
    cfg, data, seed, suffix = args
    return _single(cfg, data, seed, suffix)


def run_experiment(cfg: ExperimentConfig) -> list[SummaryReport]:
    """Parse, split, fit and write ``trace*.csv`` / ``summary*.txt`` under ``cfg.out``.

    With ``chains > 1`` the chains run in separate processes with seeds
    ``seed, seed+1, ...`` and files suffixed ``_0, _1, ...``.
    """
    cfg.validate()
    ratings = load_movielens(cfg.data_path)
    data = split(ratings, cfg.split_fraction, cfg.seed)
    _logger.info("loaded %d ratings (%d users, %d items); %d train / %d test",
                 len(ratings), ratings.n, ratings.p, len(data.train), len(data.test))
    Path(cfg.out).mkdir(parents=True, exist_ok=True)
    if cfg.chains == 1:
        return [_single(cfg, data, cfg.seed, "")]
    jobs = [(cfg, data, cfg.seed + c, f"_{c}") for c in range(cfg.chains)]
    with ProcessPoolExecutor(max_workers=min(cfg.chains, os.cpu_count() or 1)) as pool:
        return list(pool.map(_chain_job, jobs))


def config_summary(cfg: ExperimentConfig) -> str:
    return "\n".join(f"{k}: {v}" for k, v in dataclasses.asdict(cfg).items())

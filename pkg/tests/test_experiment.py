import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rjmf.cli import build_parser, main
from rjmf.data import write_movielens
from rjmf.experiment import (
    TRACE_COLUMNS,
    ExperimentConfig,
    load_config,
    parse_config_text,
    read_trace_csv,
    run_experiment,
    smooth,
    stabilized_index,
)
from rjmf.synthetic import gen_synthetic


@pytest.fixture
def tiny_file(tmp_path):
    path = tmp_path / "u.data"
    write_movielens(gen_synthetic(8, 6, 1, 0.2, 0.8, seed=3), path)
    return path


# smoothing

def test_smooth_examples():
    x = np.arange(1.0, 11.0)
    assert np.array_equal(smooth(x, 1), x)
    assert np.allclose(smooth([2.5] * 7, 3), 2.5)
    assert smooth(x, 10)[-1] == pytest.approx(5.5)
    assert np.allclose(smooth([1, 2, 3, 4], 2), [1, 1.5, 2.5, 3.5])
    assert smooth([], 4).size == 0
    with pytest.raises(ValueError):
        smooth([1.0], 0)


@given(st.lists(st.floats(-1e6, 1e6), max_size=50), st.integers(1, 20))
@settings(max_examples=60, deadline=None)
def test_smooth_matches_naive(series, window):
    out = smooth(series, window)
    assert len(out) == len(series)
    for t in range(len(series)):
        chunk = series[max(0, t - window + 1):t + 1]
        assert out[t] == pytest.approx(sum(chunk) / len(chunk), rel=1e-9, abs=1e-6)


def test_stabilized_index():
    assert stabilized_index(np.array([10.0, 5.0, 4.99, 4.98])) == 1
    assert stabilized_index(np.array([3.0, 3.0])) == 0
    assert stabilized_index(np.array([])) is None


# synthetic data

def test_synthetic_rank_one():
    data, (U, V, clean) = gen_synthetic(12, 9, 1, 0.0, 1.0, seed=0, return_factors=True)
    assert len(data) == 12 * 9
    sv = np.linalg.svd(clean, compute_uv=False)
    assert sv[1] / sv[0] < 1e-12
    assert np.allclose(U @ V.T, clean)
    assert clean.mean() == pytest.approx(3.0)


def test_synthetic_entry_count():
    # Binomial(600, 0.3): mean 180, sd about 11.2; allow 5 sd
    for seed in range(5):
        assert abs(len(gen_synthetic(30, 20, 2, 0.1, 0.3, seed=seed)) - 180) < 56


def test_synthetic_range_and_determinism():
    a = gen_synthetic(10, 7, 3, 0.5, 0.6, seed=4)
    b = gen_synthetic(10, 7, 3, 0.5, 0.6, seed=4)
    assert np.array_equal(a.ratings, b.ratings) and np.array_equal(a.users, b.users)
    assert a.ratings.min() >= 1 and a.ratings.max() <= 5


def test_synthetic_validation():
    with pytest.raises(ValueError):
        gen_synthetic(3, 3, 0, 0.1, 0.5)
    with pytest.raises(ValueError):
        gen_synthetic(3, 3, 1, 0.1, 0.0)


# configuration

def test_config_defaults():
    c = ExperimentConfig()
    assert (c.split_fraction, c.k_max, c.lambda1_init, c.lambda2_init) == (0.8, 50, 30.0, 30.0)
    assert (c.alpha, c.beta1, c.beta2, c.eps, c.freeze_tol, c.window) == (0.001, 0.9, 0.999, 1e-8, 1e-5, 10)


def test_parse_config_text():
    text = "# comment\nmethod = als\nk=3  # inline\n\nlambda1-init = 2.5\n"
    assert parse_config_text(text) == {"method": "als", "k": 3, "lambda1_init": 2.5}
    for bad in ("nonsense", "unknown = 1", "k = three"):
        with pytest.raises(ValueError):
            parse_config_text(bad)


def test_flags_override_file(tmp_path):
    cfg_path = tmp_path / "run.cfg"
    cfg_path.write_text("seed = 5\nk = 2\nmethod = als\n")
    cfg = load_config(cfg_path, seed=9, k=None)
    assert (cfg.seed, cfg.k, cfg.method) == (9, 2, "als")


def test_config_validation():
    for kw in ({"method": "sgd"}, {"split_fraction": 0.0}, {"window": 0}, {"chains": 0}, {}):
        cfg = ExperimentConfig(**{"data_path": "x", **kw}) if kw else ExperimentConfig()
        with pytest.raises(ValueError):
            cfg.validate()


# runs

def test_als_run_writes_artifacts(tiny_file, tmp_path):
    out = tmp_path / "als"
    cfg = ExperimentConfig(data_path=str(tiny_file), method="als", k=1, lambda1_init=0.01,
                           lambda2_init=0.01, out=str(out))
    [rep] = run_experiment(cfg)
    rows = read_trace_csv(out / "trace.csv")
    assert (out / "trace.csv").read_text().splitlines()[0] == ",".join(TRACE_COLUMNS)
    assert len(rows) >= 1 and len(rows) == rep.iterations
    assert rep.selected_k == 1 and rep.method == "als"
    assert math.isfinite(rep.test_rmse_at_selected_k)
    summary = (out / "summary.txt").read_text()
    assert "selected_k: 1" in summary and "test_rmse_at_selected_k:" in summary


def test_rjmcmc_run_row_count(tiny_file, tmp_path):
    cfg = ExperimentConfig(data_path=str(tiny_file), k_max=4, cooling=0.9, tmin=0.01, out=str(tmp_path))
    [rep] = run_experiment(cfg)
    rows = read_trace_csv(tmp_path / "trace.csv")
    assert len(rows) == rep.iterations == cfg.annealer_config().schedule.n_steps()
    assert 1 <= rep.selected_k <= 4
    assert all(r["accepted"] in ("0", "1") for r in rows)
    temps = [float(r["temperature"]) for r in rows]
    assert temps == sorted(temps, reverse=True)


def test_identical_runs_give_identical_csv(tiny_file, tmp_path):
    blobs = []
    for name in ("a", "b"):
        cfg = ExperimentConfig(data_path=str(tiny_file), seed=11, k_max=5, cooling=0.95,
                               tmin=0.01, out=str(tmp_path / name))
        run_experiment(cfg)
        blobs.append((tmp_path / name / "trace.csv").read_bytes())
    assert blobs[0] == blobs[1]


def test_multiple_chains(tiny_file, tmp_path):
    cfg = ExperimentConfig(data_path=str(tiny_file), k_max=3, cooling=0.8, tmin=0.05,
                           chains=2, out=str(tmp_path))
    reports = run_experiment(cfg)
    assert len(reports) == 2
    for c in range(2):
        assert (tmp_path / f"trace_{c}.csv").is_file()
        assert (tmp_path / f"summary_{c}.txt").is_file()
    assert (tmp_path / "trace_0.csv").read_bytes() != (tmp_path / "trace_1.csv").read_bytes()


# command line

def test_cli_success(tiny_file, tmp_path, capsys):
    code = main(["--data", str(tiny_file), "--method", "als", "--k", "1", "--out", str(tmp_path)])
    assert code == 0
    assert "selected k = 1" in capsys.readouterr().out
    assert (tmp_path / "trace.csv").is_file()


def test_cli_uses_config_file(tiny_file, tmp_path):
    cfg_path = tmp_path / "run.cfg"
    cfg_path.write_text(f"data_path = {tiny_file}\nmethod = als\nk = 2\nout = {tmp_path / 'o'}\n")
    assert main(["--config", str(cfg_path), "--k", "1"]) == 0
    assert "selected_k: 1" in (tmp_path / "o" / "summary.txt").read_text()


def test_cli_errors(tmp_path, capsys):
    assert main(["--data", str(tmp_path / "missing.data"), "--out", str(tmp_path)]) == 1
    bad = tmp_path / "bad.data"
    bad.write_text("1\t1\t9\t0\n")
    assert main(["--data", str(bad), "--out", str(tmp_path)]) == 1
    assert main(["--data", str(bad), "--window", "0"]) == 1
    assert "rjmf: error" in capsys.readouterr().err


def test_parser_has_flag_per_field():
    parser = build_parser()
    dests = {a.dest for a in parser._actions}
    assert {"data_path", "method", "seed", "config", "out", "chains", "k_max", "window"} <= dests
    with pytest.raises(SystemExit):
        parser.parse_args(["--method", "sgd"])

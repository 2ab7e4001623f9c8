import csv
import math
import os

import numpy as np
import pytest

from enhancedpu import harness
from enhancedpu.cli import main
from enhancedpu.errors import ConfigError
from enhancedpu.harness import (
    RAW_COLUMNS,
    REPORT_COLUMNS,
    ExperimentConfig,
    aggregate,
    emit_report,
    run,
    run_grid,
)
from enhancedpu.ingest import SplitSpec
from enhancedpu.metrics import MetricsRow

SMALL = """\
name: small
seed: 3
synthetic: paper
n_grid: [300]
test_size: 2000
c_grid: [0.3, 0.6]
classifiers: [naive, enhanced, joint]
split:
  n_replications: 3
joint:
  restarts: 2
"""


def _read(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def test_emit_report_one_row(tmp_path):
    path = tmp_path / "r.csv"
    emit_report([MetricsRow("naive", 0.5, 0, f1=0.25, balanced_accuracy=0.5, n=100)], path)
    lines = path.read_text().splitlines()
    assert len(lines) == 2
    assert lines[0].split(",") == list(REPORT_COLUMNS)
    row = dict(zip(REPORT_COLUMNS, lines[1].split(",")))
    assert row["angle_degrees"] == "" and row["eta_hat"] == ""
    assert row["f1"] == "0.25" and row["status"] == "ok"
    with pytest.raises(ValueError):
        emit_report([], path)


def test_report_floats_round_trip(tmp_path):
    v = 0.1 + 0.2
    path = tmp_path / "r.csv"
    emit_report([MetricsRow("naive", 0.3, 1, f1=v)], path)
    assert float(_read(path)[0]["f1"]) == v


def test_config_round_trip():
    cfg = ExperimentConfig.from_yaml(SMALL)
    assert cfg.c_grid == (0.3, 0.6) and cfg.n_grid == (300,)
    assert cfg.joint.restarts == 2 and cfg.split.seed == 3
    again = ExperimentConfig.from_yaml(cfg.to_yaml())
    assert again == cfg


@pytest.mark.parametrize(
    "text, line",
    [
        ("synthetic: paper\nn_grid: [10]\nc_grid: [1.5]\nclassifiers: [naive]\n", 3),
        ("synthetic: paper\nn_grid: [10]\nc_grid: [0.5]\nclassifiers: [magic]\n", 4),
        ("synthetic: paper\nn_grid: [10]\nc_grid: [0.5]\nclassifiers: [naive]\nbogus: 1\n", 5),
        ("synthetic: paper\nn_grid: [10]\nc_grid: [0.5]\nclassifiers: [naive]\nfit:\n  ridge: -1\n", 5),
        ("c_grid: [0.5\n", 2),
    ],
)
def test_config_errors_report_lines(text, line):
    with pytest.raises(ConfigError) as info:
        ExperimentConfig.from_yaml(text)
    assert info.value.line == line
    assert str(info.value).startswith(f"line {line}:")


def test_config_needs_one_source():
    with pytest.raises(ConfigError):
        ExperimentConfig.from_yaml("c_grid: [0.5]\nclassifiers: [naive]\n")


def test_bookkeeping_example():
    cfg = ExperimentConfig(
        c_grid=(0.6,), classifiers=("naive", "enhanced"), synthetic="paper", n_grid=(5000,),
        test_size=2000, split=SplitSpec(n_replications=20, seed=1), seed=1,
    )
    rows = run_grid(cfg)
    assert len(rows) == 40 and all(r.status == "ok" for r in rows)
    agg, timing = aggregate(rows)
    assert [a["classifier"] for a in agg] == ["enhanced", "naive"]
    assert all(a["replications"] == 20 for a in agg)


@pytest.fixture(scope="module")
def small_run(tmp_path_factory):
    root = tmp_path_factory.mktemp("runs")
    cfg = ExperimentConfig.from_yaml(SMALL)
    run(cfg, str(root / "a"), jobs=1)
    run(cfg, str(root / "b"), jobs=1)
    run(cfg, str(root / "c"), jobs=2)
    return root, cfg


def test_raw_report_is_byte_identical(small_run):
    root, _ = small_run
    a = (root / "a" / "raw.csv").read_bytes()
    assert a == (root / "b" / "raw.csv").read_bytes()
    assert a == (root / "c" / "raw.csv").read_bytes()
    rows = _read(root / "a" / "raw.csv")
    assert list(rows[0]) == list(RAW_COLUMNS)
    assert len(rows) == 3 * 2 * 3
    keys = [(r["classifier"], float(r["c"]), int(r["replication"])) for r in rows]
    assert keys == sorted(keys)


def test_aggregate_matches_raw(small_run):
    root, _ = small_run
    raw = _read(root / "a" / "raw.csv")
    for a in _read(root / "a" / "aggregate.csv"):
        members = [r for r in raw if r["classifier"] == a["classifier"] and r["c"] == a["c"] and r["status"] == "ok"]
        for metric in ("f1", "balanced_accuracy", "angle_degrees"):
            vals = np.array([float(r[metric]) for r in members])
            assert abs(float(a[f"{metric}_mean"]) - vals.mean()) <= 1e-12
            se = vals.std(ddof=1) / math.sqrt(len(vals))
            assert abs(float(a[f"{metric}_se"]) - se) <= 1e-12
    cfg_text = (root / "a" / "config.yaml").read_text()
    assert ExperimentConfig.from_yaml(cfg_text) == small_run[1]


def test_timing_is_mean_of_replications():
    rows = [MetricsRow("naive", 0.5, k, train_seconds=t) for k, t in enumerate((0.1, 0.2, 0.6))]
    rows.append(MetricsRow("naive", 0.5, 3, train_seconds=9.0, status="failed:X"))
    agg, timing = aggregate(rows)
    assert timing[0]["train_seconds_mean"] == pytest.approx(0.3, abs=1e-15)
    assert agg[0]["failed"] == 1 and agg[0]["replications"] == 3


def test_failed_fits_are_rows(monkeypatch, tmp_path):
    real = harness._fit_classifier

    def flaky(name, *args):
        if name == "enhanced":
            raise RuntimeError("boom")
        return real(name, *args)

    monkeypatch.setattr(harness, "_fit_classifier", flaky)
    cfg = ExperimentConfig.from_yaml(SMALL)
    assert run(cfg, str(tmp_path), jobs=1) == 0
    raw = _read(tmp_path / "raw.csv")
    bad = [r for r in raw if r["classifier"] == "enhanced"]
    assert bad and all(r["status"] == "failed:RuntimeError" and r["f1"] == "" for r in bad)
    assert all(r["status"] == "ok" for r in raw if r["classifier"] != "enhanced")


def test_all_failed_exit_code(monkeypatch, tmp_path):
    def broken(*args):
        raise RuntimeError("boom")

    monkeypatch.setattr(harness, "_fit_classifier", broken)
    assert run(ExperimentConfig.from_yaml(SMALL), str(tmp_path), jobs=1) == 1


def test_cli_run_and_seed_override(tmp_path):
    cfg = tmp_path / "cfg.yaml"
    cfg.write_text(SMALL.replace("[naive, enhanced, joint]", "[naive]"))
    assert main(["run", str(cfg), "--out", str(tmp_path / "x"), "--quiet"]) == 0
    assert main(["run", str(cfg), "--out", str(tmp_path / "y"), "--seed", "3", "--quiet"]) == 0
    assert main(["run", str(cfg), "--out", str(tmp_path / "z"), "--seed", "4", "--quiet"]) == 0
    x = (tmp_path / "x" / "raw.csv").read_bytes()
    assert x == (tmp_path / "y" / "raw.csv").read_bytes()
    assert x != (tmp_path / "z" / "raw.csv").read_bytes()
    for name in ("raw.csv", "aggregate.csv", "timings.csv", "config.yaml"):
        assert os.path.exists(tmp_path / "x" / name)


def test_cli_config_error_exit_code(tmp_path, capsys):
    cfg = tmp_path / "bad.yaml"
    cfg.write_text("synthetic: paper\nn_grid: [10]\nc_grid: [2]\nclassifiers: [naive]\n")
    assert main(["run", str(cfg), "--quiet"]) == 2
    assert "line 3" in capsys.readouterr().err
    assert main(["run", str(tmp_path / "missing.yaml"), "--quiet"]) == 2


def test_shipped_configs_parse():
    root = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
    for name in ("synthetic_fig1.yaml", "banknote.yaml"):
        cfg = ExperimentConfig.load(os.path.join(root, "configs", name))
        assert cfg.classifiers
    bank = ExperimentConfig.load(os.path.join(root, "configs", "banknote.yaml"))
    assert os.path.isabs(bank.recipe) and bank.recipe.endswith("banknote.yaml")


@pytest.mark.xfail(
    strict=True,
    reason="on the Gaussian design the likelihood-optimal oracle is not F1-optimal; enhanced tunes its threshold for F1",
)
def test_oracle_f1_dominates_enhanced():
    cfg = ExperimentConfig(
        c_grid=(0.6,), classifiers=("oracle", "enhanced"), synthetic="paper", n_grid=(5000,),
        test_size=10000, split=SplitSpec(n_replications=20, seed=0), seed=0,
    )
    agg, _ = aggregate(run_grid(cfg))
    by = {a["classifier"]: a for a in agg}
    slack = 2 * math.hypot(by["oracle"]["f1_se"], by["enhanced"]["f1_se"])
    assert by["oracle"]["f1_mean"] + slack >= by["enhanced"]["f1_mean"]

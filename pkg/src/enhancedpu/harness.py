"""Experiment grid runner and report writers.

A run evaluates every requested classifier on every (c, n, replication)
cell, writes per-replication rows to ``raw.csv``, per-cell means and
standard errors to ``aggregate.csv`` and mean fit times to
``timings.csv``.  ``raw.csv`` holds no wall-clock values so identical
configurations reproduce it byte for byte.
"""

from __future__ import annotations

import csv
import logging
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from typing import Optional

import numpy as np
import yaml

from .datamodel import Dataset, ModelParams, classify
from .errors import ConfigError
from .estimators import JointConfig, estimate_c_en, fit_enhanced, fit_joint, fit_naive, fit_weighted_en
from .ingest import SplitSpec, load_recipe, scar_relabel, split, standardize
from .logistic import FitConfig, fit_logistic
from .metrics import MetricsRow, angle_between, balanced_accuracy, estimate_eta, f1_true
from .synth import SynthSpec, generate, paper_spec

log = logging.getLogger(__name__)

CLASSIFIERS = ("oracle", "naive", "enhanced", "joint", "weighted_en_true_c", "weighted_en_estimated_c")
REPORT_COLUMNS = (
    "classifier", "c", "n", "replication", "f1", "balanced_accuracy",
    "angle_degrees", "eta_hat", "train_seconds", "status",
)
RAW_COLUMNS = tuple(c for c in REPORT_COLUMNS if c != "train_seconds")
AGGREGATE_COLUMNS = (
    "classifier", "c", "n", "replications", "failed",
    "f1_mean", "f1_se", "balanced_accuracy_mean", "balanced_accuracy_se",
    "angle_degrees_mean", "angle_degrees_se", "eta_hat_mean", "eta_hat_se",
)
TIMING_COLUMNS = ("classifier", "c", "n", "replications", "train_seconds_mean")


# ----------------------------------------------------------------- config


@dataclass(frozen=True)
class ExperimentConfig:
    """Declarative description of one experiment grid.

    Exactly one of ``synthetic`` (a SynthSpec as dict, or the string
    ``"paper"``) and ``recipe`` (path to a dataset recipe) is set.
    """

    c_grid: tuple
    classifiers: tuple
    synthetic: Optional[object] = None
    recipe: Optional[str] = None
    n_grid: Optional[tuple] = None
    test_size: int = 10000
    split: SplitSpec = field(default_factory=SplitSpec)
    standardize: bool = True
    fit: FitConfig = field(default_factory=FitConfig)
    joint: JointConfig = field(default_factory=JointConfig)
    output: str = "results"
    seed: int = 0
    name: str = "experiment"

    def __post_init__(self):
        if (self.synthetic is None) == (self.recipe is None):
            raise ConfigError("exactly one of 'synthetic' and 'recipe' must be given")
        if not self.c_grid:
            raise ConfigError("c_grid is empty")
        for c in self.c_grid:
            if not 0.0 < c <= 1.0:
                raise ConfigError(f"c_grid: c={c} outside (0, 1]")
        if not self.classifiers:
            raise ConfigError("classifiers is empty")
        unknown = [c for c in self.classifiers if c not in CLASSIFIERS]
        if unknown:
            raise ConfigError(f"classifiers: unknown {unknown}; choose from {list(CLASSIFIERS)}")
        if self.synthetic is not None and not self.n_grid:
            raise ConfigError("synthetic experiments need a nonempty n_grid")

    @property
    def is_synthetic(self) -> bool:
        return self.synthetic is not None

    def synth_spec(self, c: float, n: int, seed: int) -> SynthSpec:
        if self.synthetic == "paper":
            return paper_spec(c, n, seed)
        return SynthSpec.from_dict({**self.synthetic, "c": c, "n": n, "seed": seed})

    def to_dict(self) -> dict:
        out = {"name": self.name, "seed": self.seed}
        if self.is_synthetic:
            out["synthetic"] = self.synthetic if isinstance(self.synthetic, str) else dict(self.synthetic)
            out["n_grid"] = list(self.n_grid)
            out["test_size"] = self.test_size
        else:
            out["recipe"] = self.recipe
            out["standardize"] = self.standardize
        out["c_grid"] = list(self.c_grid)
        out["classifiers"] = list(self.classifiers)
        out["split"] = {"test_fraction": self.split.test_fraction, "n_replications": self.split.n_replications}
        out["fit"] = asdict(self.fit)
        j = asdict(self.joint)
        j.pop("inner")
        j.pop("seed")
        out["joint"] = j
        out["output"] = self.output
        return out

    def to_yaml(self) -> str:
        return yaml.safe_dump(self.to_dict(), sort_keys=False)

    @classmethod
    def from_dict(cls, data: dict, lines: Optional[dict] = None, base_dir: str = "") -> "ExperimentConfig":
        lines = lines or {}

        def err(msg, *path):
            for k in range(len(path), -1, -1):
                if path[:k] in lines:
                    return ConfigError(msg, lines[path[:k]])
            return ConfigError(msg)

        if not isinstance(data, dict):
            raise err("top level must be a mapping")
        known = {"name", "seed", "synthetic", "recipe", "n_grid", "test_size", "standardize",
                 "c_grid", "classifiers", "split", "fit", "joint", "output"}
        for key in data:
            if key not in known:
                raise err(f"unknown key {key!r}", key)
        try:
            seed = int(data.get("seed", 0))
            split_raw = data.get("split") or {}
            split_spec = SplitSpec(
                test_fraction=float(split_raw.get("test_fraction", 0.3)),
                n_replications=int(split_raw.get("n_replications", 200)),
                seed=seed,
            )
        except (TypeError, ValueError) as exc:
            raise err(str(exc), "split") from None
        try:
            fit = FitConfig(**(data.get("fit") or {}))
        except (TypeError, ValueError) as exc:
            raise err(f"fit: {exc}", "fit") from None
        try:
            joint = JointConfig(inner=fit, seed=seed, **(data.get("joint") or {}))
        except (TypeError, ValueError) as exc:
            raise err(f"joint: {exc}", "joint") from None

        recipe = data.get("recipe")
        if recipe is not None and base_dir and not os.path.isabs(recipe):
            recipe = os.path.normpath(os.path.join(base_dir, recipe))
        synthetic = data.get("synthetic")
        if synthetic is not None and synthetic != "paper":
            if not isinstance(synthetic, dict) or not {"mean", "covariance", "beta"} <= set(synthetic):
                raise err("synthetic must be 'paper' or a mapping with mean, covariance and beta", "synthetic")
        n_grid = data.get("n_grid")

        def as_tuple(key, conv):
            raw = data.get(key)
            if raw is None:
                return None
            if not isinstance(raw, list):
                raise err(f"{key} must be a list", key)
            try:
                return tuple(conv(v) for v in raw)
            except (TypeError, ValueError) as exc:
                raise err(f"{key}: {exc}", key) from None

        kwargs = dict(
            c_grid=as_tuple("c_grid", float) or (),
            classifiers=as_tuple("classifiers", str) or (),
            synthetic=synthetic,
            recipe=recipe,
            n_grid=as_tuple("n_grid", int) if n_grid is not None else None,
            test_size=int(data.get("test_size", 10000)),
            split=split_spec,
            standardize=bool(data.get("standardize", True)),
            fit=fit,
            joint=joint,
            output=str(data.get("output", "results")),
            seed=seed,
            name=str(data.get("name", "experiment")),
        )
        try:
            return cls(**kwargs)
        except ConfigError as exc:
            msg = str(exc)
            for key in ("c_grid", "classifiers", "n_grid", "synthetic", "recipe"):
                if key in msg:
                    raise err(msg, key) from None
            raise

    @classmethod
    def from_yaml(cls, text: str, base_dir: str = "") -> "ExperimentConfig":
        try:
            node = yaml.compose(text)
            data = yaml.safe_load(text)
        except yaml.YAMLError as exc:
            mark = getattr(exc, "problem_mark", None)
            raise ConfigError(f"invalid YAML: {getattr(exc, 'problem', exc)}",
                              None if mark is None else mark.line + 1) from None
        return cls.from_dict(data, _key_lines(node), base_dir)

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        with open(path, encoding="utf-8") as fh:
            return cls.from_yaml(fh.read(), base_dir=os.path.dirname(os.path.abspath(path)))


def _key_lines(node, prefix=()) -> dict:
    """Map key paths of a composed YAML mapping to 1-based line numbers."""
    out = {}
    if isinstance(node, yaml.MappingNode):
        for key_node, value_node in node.value:
            path = prefix + (key_node.value,)
            out[path] = key_node.start_mark.line + 1
            out.update(_key_lines(value_node, path))
    return out


# ------------------------------------------------------------------- grid


def _derived_seed(*parts: int) -> int:
    return int(np.random.SeedSequence([int(p) for p in parts]).generate_state(1)[0])


def _fit_classifier(name: str, train: Dataset, c: float, cfg: ExperimentConfig, joint_seed: int) -> ModelParams:
    if name == "oracle":
        return fit_logistic(train, cfg.fit, responses=train.y_labels).params
    if name == "naive":
        return fit_naive(train, cfg.fit)
    if name == "enhanced":
        return fit_enhanced(train, cfg.fit)
    if name == "joint":
        return fit_joint(train, replace(cfg.joint, seed=joint_seed)).params
    if name == "weighted_en_true_c":
        return fit_weighted_en(train, c, cfg.fit)
    if name == "weighted_en_estimated_c":
        naive = fit_naive(train, cfg.fit)
        return fit_weighted_en(train, estimate_c_en(train, naive), cfg.fit, naive=naive)
    raise ValueError(f"unknown classifier {name!r}")


def _cell_data(cfg: ExperimentConfig, data: Optional[Dataset], c: float, n: Optional[int], rep: int):
    """Train set (PU labels) and fully labeled test set for one cell."""
    if cfg.is_synthetic:
        train = generate(cfg.synth_spec(c, n, _derived_seed(cfg.seed, 1, n, rep)))
        test = generate(cfg.synth_spec(1.0, cfg.test_size, _derived_seed(cfg.seed, 2, rep)))
        return train, test
    train, test = split(data, cfg.split, rep)
    if cfg.standardize:
        train, rec = standardize(train)
        test = rec.apply(test)
    train = scar_relabel(train, c, _derived_seed(cfg.seed, 3, rep))
    return train, test


def run_cell(cfg: ExperimentConfig, data: Optional[Dataset], c: float, n: Optional[int], rep: int) -> list:
    """Fit and score every classifier on one (c, n, replication) cell."""
    try:
        train, test = _cell_data(cfg, data, c, n, rep)
    except Exception as exc:  # noqa: BLE001 - recorded as data
        return [MetricsRow(name, c, rep, n=n, status=f"failed:{type(exc).__name__}") for name in cfg.classifiers]
    true_dir = cfg.synth_spec(c, 1, 0).beta.direction if cfg.is_synthetic else None
    rows = []
    for name in cfg.classifiers:
        t0 = time.perf_counter()
        try:
            params = _fit_classifier(name, train, c, cfg, _derived_seed(cfg.seed, 4, rep))
            elapsed = time.perf_counter() - t0
            pred = classify(params, test)
            angle = eta = None
            if true_dir is not None and np.any(params.direction != 0):
                angle = angle_between(params.direction, true_dir)
                eta = estimate_eta(params.direction, true_dir)
            rows.append(MetricsRow(
                name, c, rep, f1=f1_true(pred, test.y_labels),
                balanced_accuracy=balanced_accuracy(pred, test.y_labels),
                angle_degrees=angle, train_seconds=elapsed, n=n, eta_hat=eta,
            ))
        except Exception as exc:  # noqa: BLE001 - failed fits are rows, not aborts
            log.debug("fit %s failed at c=%s n=%s rep=%s: %s", name, c, n, rep, exc)
            rows.append(MetricsRow(name, c, rep, n=n, train_seconds=time.perf_counter() - t0,
                                   status=f"failed:{type(exc).__name__}"))
    return rows


def _row_key(r: MetricsRow):
    return (r.classifier, r.c, -1 if r.n is None else r.n, r.replication)


def run_grid(cfg: ExperimentConfig, jobs: int = 1) -> list:
    data = None if cfg.is_synthetic else load_recipe(cfg.recipe)
    n_values = cfg.n_grid if cfg.is_synthetic else (None,)
    cells = [(c, n, rep) for c in cfg.c_grid for n in n_values for rep in range(cfg.split.n_replications)]
    rows = []
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            futures = [pool.submit(run_cell, cfg, data, c, n, rep) for c, n, rep in cells]
            for k, fut in enumerate(futures):
                rows.extend(fut.result())
                log.info("cell %d/%d done", k + 1, len(cells))
    else:
        for k, (c, n, rep) in enumerate(cells):
            rows.extend(run_cell(cfg, data, c, n, rep))
            log.info("cell %d/%d done (c=%s, n=%s, rep=%d)", k + 1, len(cells), c, n, rep)
    return sorted(rows, key=_row_key)


# ---------------------------------------------------------------- reports


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return "nan" if math.isnan(v) else repr(v)
    return str(v)


def emit_report(rows, path, columns=REPORT_COLUMNS) -> None:
    """Write rows as CSV with a header, in the given column order.

    Absent values are written as empty cells.
    """
    rows = list(rows)
    if not rows:
        raise ValueError("no rows to write")
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for r in rows:
            get = r.get if isinstance(r, dict) else lambda k, r=r: getattr(r, k)
            w.writerow([_fmt(get(col)) for col in columns])


def _mean_se(values):
    vals = [v for v in values if v is not None]
    if not vals:
        return None, None
    mean = math.fsum(vals) / len(vals)
    if len(vals) < 2:
        return mean, None
    var = math.fsum((v - mean) ** 2 for v in vals) / (len(vals) - 1)
    return mean, math.sqrt(var / len(vals))


def aggregate(rows) -> tuple:
    """Per (classifier, c, n) cell: means and standard errors of the
    metrics over successful replications, plus mean fit times."""
    groups = {}
    for r in rows:
        groups.setdefault((r.classifier, r.c, r.n), []).append(r)
    agg, timing = [], []
    for (name, c, n), members in sorted(groups.items(), key=lambda kv: (kv[0][0], kv[0][1], kv[0][2] or -1)):
        ok = [r for r in members if r.status == "ok"]
        entry = {"classifier": name, "c": c, "n": n, "replications": len(ok), "failed": len(members) - len(ok)}
        for metric in ("f1", "balanced_accuracy", "angle_degrees", "eta_hat"):
            entry[f"{metric}_mean"], entry[f"{metric}_se"] = _mean_se([getattr(r, metric) for r in ok])
        agg.append(entry)
        times = [r.train_seconds for r in ok]
        timing.append({"classifier": name, "c": c, "n": n, "replications": len(ok),
                       "train_seconds_mean": math.fsum(times) / len(times) if times else None})
    return agg, timing


def run(cfg: ExperimentConfig, out_dir: Optional[str] = None, jobs: int = 1) -> int:
    """Execute the grid and write raw.csv, aggregate.csv and timings.csv.

    Returns the process exit code: 1 when every fit failed, else 0.
    """
    out_dir = out_dir or cfg.output
    os.makedirs(out_dir, exist_ok=True)
    rows = run_grid(cfg, jobs=jobs)
    agg, timing = aggregate(rows)
    emit_report(rows, os.path.join(out_dir, "raw.csv"), RAW_COLUMNS)
    emit_report(agg, os.path.join(out_dir, "aggregate.csv"), AGGREGATE_COLUMNS)
    emit_report(timing, os.path.join(out_dir, "timings.csv"), TIMING_COLUMNS)
    with open(os.path.join(out_dir, "config.yaml"), "w", encoding="utf-8") as fh:
        fh.write(cfg.to_yaml())
    failed = sum(r.status != "ok" for r in rows)
    log.info("%d rows written to %s (%d failed)", len(rows), out_dir, failed)
    return 1 if failed == len(rows) else 0

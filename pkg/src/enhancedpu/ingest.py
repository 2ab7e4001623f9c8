"""Real-data loading, feature preparation, SCAR relabeling and splitting."""

from __future__ import annotations

import csv
import os
from dataclasses import dataclass, replace
from typing import Optional, Sequence

import numpy as np
import yaml

from .datamodel import Dataset
from .errors import (
    ConstantFeature,
    EmptySplit,
    MissingColumn,
    MissingTruth,
    NonNumericFeature,
    ParseError,
)
from .numkit import make_rng

RELABEL_STREAM = 11
SPLIT_STREAM = 12


@dataclass(frozen=True)
class SplitSpec:
    test_fraction: float = 0.3
    n_replications: int = 200
    seed: int = 0

    def __post_init__(self):
        if not 0.0 < self.test_fraction < 1.0:
            raise ValueError("test_fraction must lie in (0, 1)")
        if self.n_replications < 1:
            raise ValueError("n_replications must be at least 1")


@dataclass(frozen=True)
class Recipe:
    """How to turn a delimited text file into a dataset.

    Relative ``source`` paths resolve against the recipe file's directory.
    """

    source: str
    label_column: str
    positive_value: str
    one_hot: tuple = ()
    drop: tuple = ()
    delimiter: str = ","
    header: bool = True
    column_names: Optional[tuple] = None
    name: str = ""

    @classmethod
    def from_yaml(cls, path) -> "Recipe":
        with open(path, encoding="utf-8") as fh:
            raw = yaml.safe_load(fh) or {}
        unknown = set(raw) - set(cls.__dataclass_fields__)
        if unknown:
            raise ValueError(f"{path}: unknown recipe keys {sorted(unknown)}")
        source = raw["source"]
        if not os.path.isabs(source):
            source = os.path.join(os.path.dirname(os.path.abspath(path)), source)
        names = raw.get("column_names")
        return cls(
            source=source,
            label_column=str(raw["label_column"]),
            positive_value=str(raw["positive_value"]),
            one_hot=tuple(raw.get("one_hot") or ()),
            drop=tuple(raw.get("drop") or ()),
            delimiter=raw.get("delimiter", ","),
            header=bool(raw.get("header", True)),
            column_names=None if names is None else tuple(str(c) for c in names),
            name=raw.get("name") or os.path.splitext(os.path.basename(path))[0],
        )


def _same_label(cell: str, positive: str) -> bool:
    if cell == positive:
        return True
    try:
        return float(cell) == float(positive)
    except ValueError:
        return False


def load_csv(
    path,
    label_column: str,
    positive_value: str,
    *,
    delimiter: str = ",",
    one_hot: Sequence[str] = (),
    drop: Sequence[str] = (),
    header: bool = True,
    column_names: Optional[Sequence[str]] = None,
    name: Optional[str] = None,
) -> Dataset:
    """Read a delimited file into a Dataset with ``y = (label == positive_value)``
    and ``s = y``.

    Columns listed in ``one_hot`` are expanded into one indicator per
    distinct value (sorted); every other kept column must be numeric.
    Headerless files need ``column_names``.
    """
    with open(path, newline="", encoding="utf-8") as fh:
        rows = [r for r in csv.reader(fh, delimiter=delimiter)]
    rows = [r for r in rows if any(cell.strip() for cell in r)]
    if header:
        if not rows:
            raise ParseError(f"{path}: empty file")
        names = [c.strip() for c in rows[0]]
        body, first_line = rows[1:], 2
    else:
        if column_names is None:
            raise ParseError(f"{path}: headerless file needs column_names")
        names, body, first_line = list(column_names), rows, 1
    for col in [label_column, *one_hot, *drop]:
        if col not in names:
            raise MissingColumn(f"{path}: no column named {col!r}")
    for i, r in enumerate(body):
        if len(r) != len(names):
            raise ParseError(f"{path}: row {i + first_line} has {len(r)} cells, expected {len(names)}")

    cells = np.array([[c.strip() for c in r] for r in body], dtype=object).reshape(len(body), len(names))
    label_idx = names.index(label_column)
    y = np.array([_same_label(v, str(positive_value)) for v in cells[:, label_idx]], dtype=np.int8)

    columns, feature_names = [], []
    for j, col in enumerate(names):
        if j == label_idx or col in drop:
            continue
        if col in one_hot:
            levels = sorted(set(cells[:, j]))
            for level in levels:
                columns.append((cells[:, j] == level).astype(float))
                feature_names.append(f"{col}={level}")
            continue
        try:
            columns.append(cells[:, j].astype(float))
        except ValueError:
            bad = next(i for i, v in enumerate(cells[:, j]) if not _is_number(v))
            raise NonNumericFeature(
                f"{path}: row {bad + first_line}, column {col!r}: {cells[bad, j]!r} is not numeric"
            ) from None
        feature_names.append(col)
    X = np.column_stack(columns) if columns else np.empty((len(body), 0))
    if not np.all(np.isfinite(X)):
        raise NonNumericFeature(f"{path}: non-finite feature values")
    return Dataset(X, y.copy(), y, name=name or os.path.basename(str(path)), feature_names=tuple(feature_names))


def _is_number(v: str) -> bool:
    try:
        float(v)
        return True
    except ValueError:
        return False


def load_recipe(path) -> Dataset:
    r = path if isinstance(path, Recipe) else Recipe.from_yaml(path)
    return load_csv(
        r.source,
        r.label_column,
        r.positive_value,
        delimiter=r.delimiter,
        one_hot=r.one_hot,
        drop=r.drop,
        header=r.header,
        column_names=r.column_names,
        name=r.name,
    )


@dataclass(frozen=True, eq=False)
class Standardizer:
    """Per-column affine map ``(x - shift) / scale`` learned on training rows."""

    shift: np.ndarray
    scale: np.ndarray

    def transform(self, X) -> np.ndarray:
        return (np.asarray(X, dtype=float) - self.shift) / self.scale

    def inverse(self, Z) -> np.ndarray:
        return np.asarray(Z, dtype=float) * self.scale + self.shift

    def apply(self, d: Dataset) -> Dataset:
        return replace(d, features=self.transform(d.features))


def standardize(d: Dataset):
    """Centre and scale each column to mean 0 and (population) variance 1.

    Returns the transformed dataset and the :class:`Standardizer` to reuse
    on held-out rows.
    """
    X = d.features
    shift = X.mean(axis=0)
    scale = X.std(axis=0)
    const = np.flatnonzero(~(scale > 0))
    if const.size:
        j = int(const[0])
        label = d.feature_names[j] if d.feature_names else f"#{j}"
        raise ConstantFeature(f"feature {label} is constant")
    rec = Standardizer(shift, scale)
    return rec.apply(d), rec


def _coins(seed: int, row_ids: np.ndarray) -> np.ndarray:
    """One uniform per row, keyed by row id rather than position."""
    size = int(row_ids.max()) + 1 if row_ids.size else 0
    return make_rng(seed, RELABEL_STREAM).random(size)[row_ids]


def scar_relabel(d: Dataset, c: float, seed: int) -> Dataset:
    """Label each true positive independently with probability ``c``."""
    if d.y_labels is None:
        raise MissingTruth("relabeling needs ground-truth labels")
    if not 0.0 < c <= 1.0:
        raise ValueError(f"c must lie in (0, 1], got {c}")
    y = np.asarray(d.y_labels).astype(np.int8)
    s = (y & (_coins(seed, d.row_ids) < c)).astype(np.int8)
    return d.with_labels(s)


def split(d: Dataset, spec: SplitSpec, replication: int):
    """Random train/test partition for one replication.

    The test part has ``round(n * test_fraction)`` rows; both parts keep
    the original row order.
    """
    if not 0 <= replication < spec.n_replications:
        raise ValueError(f"replication {replication} outside [0, {spec.n_replications})")
    n = d.n
    n_test = int(np.floor(n * spec.test_fraction + 0.5))
    if n_test == 0 or n_test == n:
        raise EmptySplit(f"split of {n} rows with test fraction {spec.test_fraction} leaves an empty part")
    perm = make_rng(spec.seed, SPLIT_STREAM, replication).permutation(n)
    test_idx = np.sort(perm[:n_test])
    train_idx = np.sort(perm[n_test:])
    return d.take(train_idx), d.take(test_idx)

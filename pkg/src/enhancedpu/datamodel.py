"""Datasets, hyperplane parameters and fit reports."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .errors import DegenerateLabels, DimensionMismatch, InvalidLabel, ScarViolation


def _frozen(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class Dataset:
    """PU sample: features without an intercept column, observed labels S,
    and optionally the true labels Y.

    ``row_ids`` identify rows across splits and relabelings; they default to
    ``0..n-1`` and are carried along by :meth:`take`.
    """

    features: np.ndarray
    s_labels: np.ndarray
    y_labels: Optional[np.ndarray] = None
    name: str = ""
    feature_names: Optional[tuple] = None
    row_ids: Optional[np.ndarray] = None

    def __post_init__(self):
        X = np.array(self.features, dtype=float)
        if X.ndim == 1:
            X = X.reshape(-1, 1) if X.size else X.reshape(0, 0)
        if X.ndim != 2:
            raise DimensionMismatch(f"features must be 2-d, got shape {X.shape}")
        n = X.shape[0]
        s = np.array(self.s_labels).reshape(-1)
        if s.size != n:
            raise DimensionMismatch(f"{n} feature rows but {s.size} s-labels")
        object.__setattr__(self, "features", _frozen(X))
        object.__setattr__(self, "s_labels", _frozen(s))
        if self.y_labels is not None:
            y = np.array(self.y_labels).reshape(-1)
            if y.size != n:
                raise DimensionMismatch(f"{n} feature rows but {y.size} y-labels")
            object.__setattr__(self, "y_labels", _frozen(y))
        ids = np.arange(n) if self.row_ids is None else np.array(self.row_ids, dtype=np.int64)
        if ids.shape != (n,):
            raise DimensionMismatch("row_ids must have one entry per row")
        object.__setattr__(self, "row_ids", _frozen(ids))
        if self.feature_names is not None:
            names = tuple(self.feature_names)
            if len(names) != X.shape[1]:
                raise DimensionMismatch(f"{len(names)} feature names for {X.shape[1]} columns")
            object.__setattr__(self, "feature_names", names)

    @property
    def n(self) -> int:
        return self.features.shape[0]

    @property
    def p(self) -> int:
        return self.features.shape[1]

    def take(self, idx) -> "Dataset":
        idx = np.asarray(idx)
        return replace(
            self,
            features=self.features[idx],
            s_labels=self.s_labels[idx],
            y_labels=None if self.y_labels is None else self.y_labels[idx],
            row_ids=self.row_ids[idx],
        )

    def with_labels(self, s_labels) -> "Dataset":
        return replace(self, s_labels=s_labels)


@dataclass(frozen=True, eq=False)
class ModelParams:
    """Separating hyperplane ``intercept + x @ direction`` and optional
    label frequency ``c``."""

    intercept: float
    direction: np.ndarray
    label_frequency: Optional[float] = None

    def __post_init__(self):
        d = np.array(self.direction, dtype=float).reshape(-1)
        if not np.all(np.isfinite(d)):
            raise ValueError("direction has non-finite entries")
        object.__setattr__(self, "direction", _frozen(d))
        object.__setattr__(self, "intercept", float(self.intercept))
        c = self.label_frequency
        if c is not None:
            c = float(c)
            if not 0.0 < c <= 1.0:
                raise ValueError(f"label_frequency must lie in (0, 1], got {c}")
            object.__setattr__(self, "label_frequency", c)

    @classmethod
    def from_vector(cls, b, label_frequency=None) -> "ModelParams":
        """Build from a stacked vector ``(intercept, direction...)``."""
        b = np.asarray(b, dtype=float)
        return cls(b[0], b[1:], label_frequency)

    def as_vector(self) -> np.ndarray:
        return np.concatenate(([self.intercept], self.direction))

    def with_intercept(self, intercept: float) -> "ModelParams":
        return replace(self, intercept=intercept)

    def scaled(self, lam: float) -> "ModelParams":
        return replace(self, intercept=lam * self.intercept, direction=lam * self.direction)


@dataclass(frozen=True, eq=False)
class FitReport:
    """Outcome of an iterative fit.

    ``trace`` holds the objective value after every accepted step
    (including the starting point).
    """

    params: ModelParams
    final_loglik: float
    iterations: int
    converged: bool
    wall_time: float
    trace: tuple = field(default=())


def _binary(v, what: str) -> np.ndarray:
    v = np.asarray(v)
    ok = (v == 0) | (v == 1)
    if not np.all(ok):
        bad = int(np.flatnonzero(~ok)[0])
        raise InvalidLabel(f"{what}[{bad}] = {v[bad]!r} is not 0 or 1")
    return v.astype(np.int8)


def validate(d: Dataset) -> None:
    """Raise if ``d`` breaks a Dataset invariant, otherwise return None."""
    s = _binary(d.s_labels, "s_labels")
    if d.y_labels is not None:
        y = _binary(d.y_labels, "y_labels")
        bad = np.flatnonzero((s == 1) & (y == 0))
        if bad.size:
            raise ScarViolation(f"row {int(bad[0])} is labeled (s=1) but has y=0")
    if not np.all(np.isfinite(d.features)):
        raise ValueError("features contain non-finite values")
    if s.size == 0 or s.min() == s.max():
        raise DegenerateLabels("need at least one labeled (s=1) and one unlabeled (s=0) example")


def _features_of(d) -> np.ndarray:
    return d.features if isinstance(d, Dataset) else np.atleast_2d(np.asarray(d, dtype=float))


def decision_scores(params: ModelParams, d) -> np.ndarray:
    """``intercept + x_i @ direction`` for every row of ``d`` (a Dataset or
    a feature matrix)."""
    X = _features_of(d)
    if X.shape[1] != params.direction.size:
        raise DimensionMismatch(f"direction has length {params.direction.size}, data has {X.shape[1]} features")
    return params.intercept + X @ params.direction


def classify(params: ModelParams, d) -> np.ndarray:
    """Predicted labels; a score of exactly 0 is classified negative."""
    return (decision_scores(params, d) > 0).astype(np.int8)

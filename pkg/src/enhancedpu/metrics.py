"""Evaluation measures and Monte-Carlo diagnostics for the misspecified fit."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .datamodel import ModelParams
from .errors import LengthMismatch, SingleClassTruth, ZeroVector
from .logistic import sigma


@dataclass(frozen=True)
class MetricsRow:
    classifier: str
    c: float
    replication: int
    f1: Optional[float] = None
    balanced_accuracy: Optional[float] = None
    angle_degrees: Optional[float] = None
    train_seconds: Optional[float] = None
    n: Optional[int] = None
    eta_hat: Optional[float] = None
    status: str = "ok"

    def __post_init__(self):
        for name in ("f1", "balanced_accuracy"):
            v = getattr(self, name)
            if v is not None and not 0.0 <= v <= 1.0:
                raise ValueError(f"{name}={v} outside [0, 1]")
        if self.angle_degrees is not None and not 0.0 <= self.angle_degrees <= 180.0:
            raise ValueError(f"angle {self.angle_degrees} outside [0, 180]")


def _pair(pred, y):
    pred = np.asarray(pred).reshape(-1)
    y = np.asarray(y).reshape(-1)
    if pred.shape != y.shape:
        raise LengthMismatch(f"{pred.size} predictions for {y.size} labels")
    return pred == 1, y == 1


def f1_true(pred, y) -> float:
    """``2TP / (2TP + FP + FN)``, 0 when the denominator vanishes."""
    p, t = _pair(pred, y)
    tp = int(np.sum(p & t))
    denom = 2 * tp + int(np.sum(p & ~t)) + int(np.sum(~p & t))
    return 0.0 if denom == 0 else 2 * tp / denom


def balanced_accuracy(pred, y) -> float:
    p, t = _pair(pred, y)
    n_pos, n_neg = int(t.sum()), int((~t).sum())
    if n_pos == 0 or n_neg == 0:
        raise SingleClassTruth("balanced accuracy needs both classes in the truth")
    tpr = np.sum(p & t) / n_pos
    tnr = np.sum(~p & ~t) / n_neg
    return float((tpr + tnr) / 2)


def angle_between(a, b) -> float:
    """Angle in degrees between two nonzero vectors."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    na, nb = np.linalg.norm(a), np.linalg.norm(b)
    if na == 0 or nb == 0:
        raise ZeroVector("angle undefined for a zero vector")
    cos = np.clip(np.dot(a, b) / (na * nb), -1.0, 1.0)
    return float(np.degrees(np.arccos(cos)))


def estimate_eta(fitted_dir, true_dir) -> float:
    """Least-squares scalar ``lam`` minimising ``|fitted - lam * true|``."""
    f = np.asarray(fitted_dir, dtype=float)
    t = np.asarray(true_dir, dtype=float)
    tt = np.dot(t, t)
    if tt == 0:
        raise ZeroVector("true direction is zero")
    return float(np.dot(f, t) / tt)


def _sigma_prime(t):
    return sigma(t) * sigma(-t)


def check_theorem2_ratio(
    beta: ModelParams,
    beta_star: ModelParams,
    c: float,
    sampler: Callable[[int, np.random.Generator], np.ndarray],
    rng: np.random.Generator,
    n_draws: int = 100_000,
) -> float:
    """Relative gap between ``eta/c`` and the ratio of expected logistic
    densities under a zero-mean Gaussian design.

    For ``X ~ N(0, Sigma)`` the projection ``beta_star`` of the naive fit
    satisfies ``eta / c = E s'(b0 + X b) / E s'(b0* + eta X b)``.  Both
    expectations are estimated from ``n_draws`` samples of ``sampler``;
    the return value is ``|eta/c - ratio| / (eta/c)``.
    """
    X = np.asarray(sampler(n_draws, rng), dtype=float)
    eta = estimate_eta(beta_star.direction, beta.direction)
    proj = X @ beta.direction
    num = np.mean(_sigma_prime(beta.intercept + proj))
    den = np.mean(_sigma_prime(beta_star.intercept + eta * proj))
    target = eta / c
    return float(abs(target - num / den) / abs(target))

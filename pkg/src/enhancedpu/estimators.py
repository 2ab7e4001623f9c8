"""PU classifiers built on the logistic engine.

* naive:     logistic fit to (X, S) as if S were Y
* enhanced:  naive direction with the intercept chosen to maximise the
             observable F1 surrogate ``recall**2 / P(predicted positive)``
* joint:     maximiser of the full PU likelihood over (b, c)
* EN:        Elkan-Noto weighted logistic fit with the ``e1`` estimate of c
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import scipy.optimize

from .datamodel import Dataset, FitReport, ModelParams, decision_scores, validate
from .errors import AllRestartsFailed, COutOfRange, DimensionMismatch, NoLabeledExamples, ZeroDirection
from .logistic import FitConfig, bernoulli_loglik, fit_logistic, log1m_sigma, log_sigma, sigma
from .numkit import make_rng

C_MIN_EN = 1e-3


# ---------------------------------------------------------------- naive


def fit_naive(d: Dataset, cfg: FitConfig = FitConfig()) -> ModelParams:
    return fit_logistic(d, cfg).params


# ------------------------------------------------------------- enhanced


@dataclass(frozen=True, eq=False)
class SweepResult:
    """Outcome of the intercept sweep.

    ``thresholds`` are the distinct raw scores in increasing order and
    ``values`` the surrogate F1 of the rule ``score >= threshold``.
    """

    chosen_intercept: float
    best_score: float
    thresholds: np.ndarray
    values: np.ndarray
    best_threshold: float = 0.0

    @property
    def curve(self):
        return list(zip(self.thresholds.tolist(), self.values.tolist()))


def _f1pu_counts(hits, n_labeled, n_predicted, n):
    """``recall**2 / P(yhat=1)`` from counts; 0 where nothing is predicted."""
    hits = np.asarray(hits, dtype=float)
    n_predicted = np.asarray(n_predicted, dtype=float)
    recall = hits / n_labeled
    frac = n_predicted / n
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(n_predicted > 0, recall * recall / frac, 0.0)
    return out if out.ndim else float(out)


def f1pu_empirical(predictions, s_labels) -> float:
    pred = np.asarray(predictions)
    s = np.asarray(s_labels)
    if pred.shape != s.shape:
        raise DimensionMismatch(f"{pred.size} predictions for {s.size} labels")
    n_labeled = int(np.sum(s == 1))
    if n_labeled == 0:
        raise NoLabeledExamples("F1_PU needs at least one labeled example")
    hits = int(np.sum((s == 1) & (pred == 1)))
    return _f1pu_counts(hits, n_labeled, int(np.sum(pred == 1)), s.size)


def sweep_intercept(direction, d: Dataset) -> SweepResult:
    """Choose the intercept for ``direction`` maximising the F1 surrogate on ``d``.

    Candidate rules predict positive for ``score >= tau`` at each distinct
    raw score ``tau``.  Counts are accumulated in a single pass from the
    largest score downwards.  Among equal maxima the larger threshold wins.
    The returned intercept puts the boundary halfway between the winning
    threshold and the next smaller distinct score, so the strict rule
    ``score + intercept > 0`` selects exactly the winning set.
    """
    direction = np.asarray(direction, dtype=float)
    if direction.size != d.p:
        raise DimensionMismatch(f"direction has length {direction.size}, data has {d.p} features")
    if not np.any(direction != 0):
        raise ZeroDirection("cannot sweep along a zero direction")
    s = np.asarray(d.s_labels)
    n_labeled = int(np.sum(s == 1))
    if n_labeled == 0:
        raise NoLabeledExamples("intercept sweep needs at least one labeled example")

    t = d.features @ direction
    order = np.argsort(-t, kind="stable")
    t_sorted = t[order]
    hits_sorted = np.cumsum(s[order] == 1)
    # last position of each run of equal scores in descending order
    ends = np.flatnonzero(np.append(t_sorted[1:] != t_sorted[:-1], True))
    taus = t_sorted[ends]
    values = _f1pu_counts(hits_sorted[ends], n_labeled, ends + 1, d.n)

    best = int(np.argmax(values))  # first maximum = largest threshold
    tau = taus[best]
    if best + 1 < taus.size:
        boundary = 0.5 * (tau + taus[best + 1])
    elif taus.size > 1:
        boundary = tau - 0.5 * (taus[best - 1] - tau)
    else:
        boundary = tau - max(1.0, abs(tau))
    if not boundary < tau:
        boundary = np.nextafter(tau, -np.inf)

    return SweepResult(
        chosen_intercept=float(-boundary),
        best_score=float(values[best]),
        thresholds=taus[::-1].copy(),
        values=np.asarray(values, dtype=float)[::-1].copy(),
        best_threshold=float(tau),
    )


def fit_enhanced(d: Dataset, cfg: FitConfig = FitConfig(), sweep_data: Optional[Dataset] = None) -> ModelParams:
    """Naive direction with the F1_PU-maximising intercept.

    The sweep runs on the training data unless ``sweep_data`` is given.
    """
    naive = fit_naive(d, cfg)
    sweep = sweep_intercept(naive.direction, d if sweep_data is None else sweep_data)
    return ModelParams(sweep.chosen_intercept, naive.direction)


# ---------------------------------------------------------------- joint


def _check_c(c) -> float:
    if c is None or not 0.0 < c <= 1.0:
        raise COutOfRange(f"label frequency must lie in (0, 1], got {c}")
    return float(c)


def _log1m_c_sigma(t, c):
    """``log(1 - c*sigma(t))`` = log1p((1-c) e^t) - log1p(e^t)."""
    with np.errstate(divide="ignore"):
        log1mc = np.log1p(-c)
    return np.logaddexp(0.0, log1mc + t) - np.logaddexp(0.0, t)


def loglik_joint(b: ModelParams, d: Dataset) -> float:
    """Full PU log-likelihood with ``P(S=1|x) = c * sigma(score)``; ``c`` is
    ``b.label_frequency``."""
    c = _check_c(b.label_frequency)
    t = decision_scores(b, d)
    return bernoulli_loglik(np.log(c) + log_sigma(t), _log1m_c_sigma(t, c), d.s_labels)


def _joint_grad_parts(t, c, s):
    """Per-row derivatives of the joint log-likelihood w.r.t. score and c."""
    sig = sigma(t)
    one_minus_cs = np.exp(_log1m_c_sigma(t, c))
    pos = s == 1
    d_t = np.where(pos, sigma(-t), -c * sig * sigma(-t) / one_minus_cs)
    d_c = np.where(pos, 1.0 / c, -sig / one_minus_cs)
    return d_t, d_c


def grad_joint(b: ModelParams, d: Dataset) -> np.ndarray:
    """Gradient of :func:`loglik_joint` w.r.t. ``(intercept, direction..., logit c)``."""
    c = _check_c(b.label_frequency)
    t = decision_scores(b, d)
    d_t, d_c = _joint_grad_parts(t, c, np.asarray(d.s_labels))
    return np.concatenate(([d_t.sum()], d.features.T @ d_t, [d_c.sum() * c * (1.0 - c)]))


@dataclass(frozen=True)
class JointConfig:
    restarts: int = 5
    c_floor: float = 1e-3
    inner: FitConfig = field(default_factory=FitConfig)
    max_iterations: int = 1000
    perturbation: float = 0.5
    seed: int = 0

    def __post_init__(self):
        if self.restarts < 1:
            raise ValueError("restarts must be at least 1")
        if not 0.0 < self.c_floor < 1.0:
            raise ValueError("c_floor must lie in (0, 1)")


def fit_joint(d: Dataset, jcfg: JointConfig = JointConfig()) -> FitReport:
    """Maximise the joint PU likelihood over ``(b, c)``.

    ``c = c_floor + (1 - c_floor) * sigma(theta)`` keeps c inside its range
    while L-BFGS works on the unconstrained ``(b, theta)``.  The first start
    is the naive fit with ``c0 = 2 * mean(S)``; the others perturb it.  The
    naive parameters at ``c = 1`` are also scored as a candidate, so the
    result never falls below the naive likelihood.
    """
    t0 = time.perf_counter()
    validate(d)
    s = np.asarray(d.s_labels)
    Z = np.hstack([np.ones((d.n, 1)), d.features])
    floor = jcfg.c_floor
    scale = 1.0 / d.n

    def c_of(theta):
        return floor + (1.0 - floor) * float(sigma(theta))

    def negobj(v):
        b, theta = v[:-1], v[-1]
        c = c_of(theta)
        t = Z @ b
        val = bernoulli_loglik(np.log(c) + log_sigma(t), _log1m_c_sigma(t, c), s)
        d_t, d_c = _joint_grad_parts(t, c, s)
        dc_dtheta = (1.0 - floor) * float(sigma(theta)) * float(sigma(-theta))
        g = np.concatenate((Z.T @ d_t, [d_c.sum() * dc_dtheta]))
        return -val * scale, -g * scale

    def theta_of(c):
        c = min(max(c, floor + 1e-6), 1.0 - 1e-6)
        u = (c - floor) / (1.0 - floor)
        return float(np.log(u) - np.log1p(-u))

    naive = fit_logistic(d, jcfg.inner)
    b0 = naive.params.as_vector()
    c0 = min(max(2.0 * float(np.mean(s == 1)), floor), 1.0)
    starts = [np.append(b0, theta_of(c0))]
    rng = make_rng(jcfg.seed, 7)
    for _ in range(jcfg.restarts - 1):
        jitter = rng.normal(0.0, jcfg.perturbation, size=b0.size) * (np.abs(b0) + 1.0)
        starts.append(np.append(b0 + jitter, theta_of(rng.uniform(0.1, 0.95))))

    best = None
    total_iters = 0
    for v0 in starts:
        try:
            res = scipy.optimize.minimize(
                negobj, v0, jac=True, method="L-BFGS-B",
                options={"maxiter": jcfg.max_iterations, "gtol": 1e-9, "ftol": 1e-14},
            )
        except (FloatingPointError, ValueError, np.linalg.LinAlgError):
            continue
        total_iters += int(res.nit)
        if not np.all(np.isfinite(res.x)) or not np.isfinite(res.fun):
            continue
        params = ModelParams.from_vector(res.x[:-1], c_of(res.x[-1]))
        value = loglik_joint(params, d)
        if np.isfinite(value) and (best is None or value > best[0]):
            best = (value, params, bool(res.success))

    naive_params = ModelParams.from_vector(b0, 1.0)
    naive_value = loglik_joint(naive_params, d)
    if best is None and not np.isfinite(naive_value):
        raise AllRestartsFailed("no restart produced a finite objective")
    if best is None or naive_value > best[0]:
        value, params, converged = naive_value, naive_params, naive.converged
    else:
        value, params, converged = best
    return FitReport(
        params=params,
        final_loglik=float(value),
        iterations=total_iters,
        converged=converged,
        wall_time=time.perf_counter() - t0,
    )


# ----------------------------------------------------------- Elkan-Noto


def estimate_c_en(d: Dataset, naive: ModelParams) -> float:
    """Mean predicted ``P(S=1|x)`` over labeled rows, clamped to [1e-3, 1]."""
    pos = np.asarray(d.s_labels) == 1
    if not pos.any():
        raise NoLabeledExamples("estimate of c needs labeled examples")
    probs = sigma(decision_scores(naive, d.features[pos]))
    return float(np.clip(np.mean(probs), C_MIN_EN, 1.0))


def en_weights(d: Dataset, c: float, naive: ModelParams) -> np.ndarray:
    """Probability that each unlabeled row is positive, clamped to [0, 1]."""
    c = _check_c(c)
    t = decision_scores(naive, d)
    # s/(1-s) = exp(t) for a logistic model
    with np.errstate(divide="ignore", over="ignore"):
        w = np.exp(np.log1p(-c) - np.log(c) + t)
    return np.clip(w, 0.0, 1.0)


def fit_weighted_en(
    d: Dataset, c: float, cfg: FitConfig = FitConfig(), naive: Optional[ModelParams] = None
) -> ModelParams:
    """Weighted logistic fit on the expanded pseudo-labeled sample.

    Labeled rows enter once as positives.  Unlabeled rows enter twice: as
    positives with weight ``w_i`` and as negatives with weight ``1 - w_i``.
    Classification thresholds the fitted posterior at 1/2.
    """
    c = _check_c(c)
    if naive is None:
        naive = fit_naive(d, cfg)
    s = np.asarray(d.s_labels)
    lab = np.flatnonzero(s == 1)
    unl = np.flatnonzero(s != 1)
    w_unl = en_weights(d, c, naive)[unl]
    X = d.features
    features = np.vstack([X[lab], X[unl], X[unl]])
    responses = np.concatenate([np.ones(lab.size), np.ones(unl.size), np.zeros(unl.size)]).astype(np.int8)
    weights = np.concatenate([np.ones(lab.size), w_unl, 1.0 - w_unl])
    expanded = Dataset(features, responses, name=f"{d.name}[EN]")
    report = fit_logistic(expanded, cfg, weights=weights, responses=responses)
    return ModelParams(report.params.intercept, report.params.direction, c)

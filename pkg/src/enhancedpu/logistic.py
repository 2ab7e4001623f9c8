"""Maximum-likelihood logistic regression by damped Newton (IRLS).

The same engine fits the naive model (responses = S), the oracle model
(responses = Y) and weighted fits on expanded pseudo-labeled samples.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .datamodel import Dataset, FitReport, ModelParams, decision_scores, validate
from .errors import (
    DimensionMismatch,
    InvalidLabel,
    NotPositiveDefinite,
    SeparationDetected,
    SingularHessian,
)
from .numkit import solve_spd

SEPARATION_SCORE = 30.0
MAX_HALVINGS = 30


@dataclass(frozen=True)
class FitConfig:
    max_iterations: int = 100
    gradient_tolerance: float = 1e-8
    ridge: float = 1e-6
    step_damping: bool = True

    def __post_init__(self):
        if self.gradient_tolerance <= 0:
            raise ValueError("gradient_tolerance must be positive")
        if self.ridge < 0:
            raise ValueError("ridge must be nonnegative")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be at least 1")


def sigma(t):
    """Logistic function, evaluated without overflow for any real ``t``."""
    t = np.asarray(t, dtype=float)
    out = np.empty_like(t)
    pos = t >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-t[pos]))
    e = np.exp(t[~pos])
    out[~pos] = e / (1.0 + e)
    return out if out.ndim else float(out)


def log_sigma(t):
    """``log(sigma(t))``."""
    return -np.logaddexp(0.0, -np.asarray(t, dtype=float))


def log1m_sigma(t):
    """``log(1 - sigma(t))``."""
    return -np.logaddexp(0.0, np.asarray(t, dtype=float))


def bernoulli_loglik(log_p, log_q, responses, weights=None) -> float:
    """``sum_i w_i * (log_p_i if r_i == 1 else log_q_i)``."""
    terms = np.where(np.asarray(responses) == 1, log_p, log_q)
    if weights is None:
        return float(np.sum(terms))
    return float(np.dot(weights, terms))


def _responses(d: Dataset, responses) -> np.ndarray:
    r = d.s_labels if responses is None else np.asarray(responses)
    if r.shape != (d.n,):
        raise DimensionMismatch(f"responses have shape {r.shape}, expected ({d.n},)")
    if not np.all((r == 0) | (r == 1)):
        raise InvalidLabel("responses must be 0/1")
    return r.astype(float)


def _weights(d: Dataset, weights) -> np.ndarray:
    if weights is None:
        return np.ones(d.n)
    w = np.asarray(weights, dtype=float)
    if w.shape != (d.n,):
        raise DimensionMismatch(f"weights have shape {w.shape}, expected ({d.n},)")
    if np.any(w < 0) or not np.any(w > 0) or not np.all(np.isfinite(w)):
        raise ValueError("case weights must be finite, nonnegative and not all zero")
    return w


def loglik_naive(b: ModelParams, d: Dataset, weights=None, responses=None) -> float:
    """Logistic log-likelihood of ``b`` treating the responses (default S)
    as if they followed the logistic model."""
    t = decision_scores(b, d)
    r = d.s_labels if responses is None else responses
    return bernoulli_loglik(log_sigma(t), log1m_sigma(t), r, weights)


def grad_naive(b: ModelParams, d: Dataset, weights=None, responses=None) -> np.ndarray:
    """Score vector of :func:`loglik_naive`, intercept coordinate first."""
    t = decision_scores(b, d)
    r = _responses(d, responses)
    resid = r - sigma(t)
    if weights is not None:
        resid = np.asarray(weights, dtype=float) * resid
    return np.concatenate(([resid.sum()], d.features.T @ resid))


def fit_logistic(
    d: Dataset,
    cfg: FitConfig = FitConfig(),
    weights=None,
    responses=None,
    start: Optional[ModelParams] = None,
) -> FitReport:
    """Ridge-stabilised maximum-likelihood logistic fit.

    The ridge penalty ``ridge/2 * |direction|^2`` leaves the intercept
    free.  Iterates Newton steps, halving each until the penalised
    log-likelihood does not decrease, and declares convergence once the
    max-abs penalised gradient, divided by the total case weight (n when
    unweighted), is at most ``cfg.gradient_tolerance``.
    """
    t0 = time.perf_counter()
    validate(d)
    r = _responses(d, responses)
    w = _weights(d, weights)
    n, p = d.n, d.p
    Z = np.hstack([np.ones((n, 1)), d.features])
    pen = np.full(p + 1, cfg.ridge)
    pen[0] = 0.0

    def objective(b):
        t = Z @ b
        return float(np.dot(w, np.where(r == 1, log_sigma(t), log1m_sigma(t)))) - 0.5 * float(np.dot(pen * b, b))

    tol = cfg.gradient_tolerance * float(w.sum())
    b = np.zeros(p + 1) if start is None else start.as_vector().copy()
    value = objective(b)
    trace = [value]
    converged = False
    iterations = 0
    while True:
        t = Z @ b
        mu = sigma(t)
        grad = Z.T @ (w * (r - mu)) - pen * b
        if np.max(np.abs(grad)) <= tol:
            converged = True
            break
        if iterations >= cfg.max_iterations:
            break
        hess = (Z * (w * mu * (1.0 - mu))[:, None]).T @ Z
        hess[np.diag_indices_from(hess)] += pen
        try:
            step = solve_spd(hess, grad)
        except NotPositiveDefinite as exc:
            raise SingularHessian(f"Newton system is not positive definite at iteration {iterations}: {exc}") from None
        iterations += 1
        scale = 1.0
        candidate = b + step
        new_value = objective(candidate)
        if cfg.step_damping:
            halvings = 0
            while not new_value >= value and halvings < MAX_HALVINGS:
                scale *= 0.5
                halvings += 1
                candidate = b + scale * step
                new_value = objective(candidate)
            if not new_value >= value:
                # no ascent available at machine precision
                break
        b, value = candidate, new_value
        trace.append(value)

    if cfg.ridge == 0 and np.max(np.abs(Z @ b)) > SEPARATION_SCORE:
        raise SeparationDetected(
            "fitted scores exceed 30 in magnitude without regularisation; the responses look completely separable"
        )
    params = ModelParams.from_vector(b)
    final = bernoulli_loglik(log_sigma(Z @ b), log1m_sigma(Z @ b), r, w)
    return FitReport(
        params=params,
        final_loglik=final,
        iterations=iterations,
        converged=converged,
        wall_time=time.perf_counter() - t0,
        trace=tuple(trace),
    )

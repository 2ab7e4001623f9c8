"""SCAR synthetic data: Gaussian features, logistic labels, random labeling."""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .datamodel import Dataset, ModelParams
from .logistic import sigma
from .numkit import cholesky, make_rng, sample_mvn

PAPER_MEAN = (1.0, 1.0, -1.0)
PAPER_COVARIANCE = (
    (1.0, 0.2, -0.2),
    (0.2, 1.0, 0.0),
    (-0.2, 0.0, 1.0),
)
PAPER_BETA = (-1.0, -1.0, 1.0, 1.0)  # intercept first

FEATURE_STREAM = 0
LABEL_STREAM = 1


@dataclass(frozen=True, eq=False)
class SynthSpec:
    mean: np.ndarray
    covariance: np.ndarray
    beta: ModelParams
    c: float
    n: int
    seed: int = 0

    def __post_init__(self):
        mean = np.array(self.mean, dtype=float).reshape(-1)
        cov = np.array(self.covariance, dtype=float)
        if cov.shape != (mean.size, mean.size) or self.beta.direction.size != mean.size:
            raise ValueError("mean, covariance and beta dimensions disagree")
        if not 0.0 < self.c <= 1.0:
            raise ValueError(f"c must lie in (0, 1], got {self.c}")
        if self.n < 1:
            raise ValueError("n must be positive")
        cholesky(cov)  # SPD check
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "covariance", cov)

    def with_(self, **changes) -> "SynthSpec":
        return replace(self, **changes)

    def to_dict(self) -> dict:
        return {
            "mean": self.mean.tolist(),
            "covariance": self.covariance.tolist(),
            "beta": self.beta.as_vector().tolist(),
            "c": self.c,
            "n": self.n,
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "SynthSpec":
        return cls(
            mean=data["mean"],
            covariance=data["covariance"],
            beta=ModelParams.from_vector(data["beta"]),
            c=float(data["c"]),
            n=int(data["n"]),
            seed=int(data.get("seed", 0)),
        )


def paper_spec(c: float, n: int, seed: int = 0) -> SynthSpec:
    """Three correlated Gaussian features with mean (1, 1, -1) and true
    coefficients (-1; -1, 1, 1)."""
    return SynthSpec(
        mean=PAPER_MEAN,
        covariance=PAPER_COVARIANCE,
        beta=ModelParams.from_vector(PAPER_BETA),
        c=c,
        n=n,
        seed=seed,
    )


def generate(spec: SynthSpec) -> Dataset:
    """Draw ``n`` rows: ``x ~ N(mean, cov)``, ``y ~ Bernoulli(sigma(beta'x))``,
    ``s = y * Bernoulli(c)``.

    Labeling coins come from their own stream, so changing ``c`` under a
    fixed seed keeps ``(x, y)`` and only thins the labels.
    """
    rng = make_rng(spec.seed, FEATURE_STREAM)
    X = sample_mvn(spec.mean, cholesky(spec.covariance), rng, size=spec.n)
    prob = sigma(spec.beta.intercept + X @ spec.beta.direction)
    y = (rng.random(spec.n) < prob).astype(np.int8)
    coins = make_rng(spec.seed, LABEL_STREAM).random(spec.n)
    s = (y & (coins < spec.c)).astype(np.int8)
    return Dataset(X, s, y, name=f"synthetic(c={spec.c}, n={spec.n}, seed={spec.seed})")

"""Positive-unlabeled classification with a misspecified logistic fit.

The enhanced naive classifier keeps the direction of a logistic
regression fitted to (X, S) and re-chooses its intercept to maximise an
F1 surrogate computable from PU data.  JOINT and Elkan-Noto weighted
classifiers are included as baselines, alongside a SCAR data generator
and an experiment harness.
"""

from .datamodel import Dataset, FitReport, ModelParams, classify, decision_scores, validate
from .estimators import (
    JointConfig,
    SweepResult,
    estimate_c_en,
    f1pu_empirical,
    fit_enhanced,
    fit_joint,
    fit_naive,
    fit_weighted_en,
    grad_joint,
    loglik_joint,
    sweep_intercept,
)
from .logistic import FitConfig, fit_logistic, grad_naive, loglik_naive, sigma
from .metrics import MetricsRow, angle_between, balanced_accuracy, check_theorem2_ratio, estimate_eta, f1_true
from .synth import SynthSpec, generate, paper_spec

__version__ = "0.1.0"

"""Predictive-p-value residuals and goodness-of-fit checks for count regression."""

from __future__ import annotations

from .distributions import (
    ZINB,
    ZIP,
    Bernoulli,
    FinitePMF,
    NegBinomial,
    Normal,
    Poisson,
    PredictiveLaw,
)
from .gof import ReplicatedSW, TestResult, ks_uniform, replicated_sw, shapiro_wilk
from .regression import Family, FitError, FittedModel, ModelSpec, fit, predictive_laws
from .residuals import (
    ResidualError,
    ResidualKind,
    ResidualSet,
    aggregate_stats,
    compute,
    deviance,
    mpp,
    normal_transform,
    pearson,
    rpp,
)
from .special import DomainError

__version__ = "0.1.0"

__all__ = [
    "Bernoulli", "DomainError", "Family", "FinitePMF", "FitError", "FittedModel",
    "ModelSpec", "NegBinomial", "Normal", "Poisson", "PredictiveLaw", "ReplicatedSW",
    "ResidualError", "ResidualKind", "ResidualSet", "TestResult", "ZINB", "ZIP",
    "aggregate_stats", "compute", "deviance", "fit", "ks_uniform", "mpp",
    "normal_transform", "pearson", "predictive_laws", "replicated_sw", "rpp",
    "shapiro_wilk",
]

"""Residuals and predictive p-values for fitted discrete-response models.

Given a vector of predictive laws ``F_i`` and observations ``y_i``:

* RPP, the randomized predictive p-value ``F_i(y_i-) + u_i * p_i(y_i)`` with
  ``u_i ~ Uniform(0, 1)``.  Uniform on (0, 1) under the true model.
* MPP, the mid-point version with ``u_i = 0.5``.  Not uniform for discrete
  responses.
* NRPP / NMPP, their standard-normal quantile transforms.
* Pearson residuals ``(y - mean) / sd`` and deviance residuals.

RPP values are clamped to ``[1e-300, 1 - 1e-16]`` so the normal transform
never sees an exact 0 or 1 produced by floating-point saturation in the
extreme tails.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np
from scipy import special as _sp

from .distributions import (
    ZINB,
    ZIP,
    Bernoulli,
    NegBinomial,
    Normal,
    Poisson,
    PredictiveLaw,
)
from .special import std_normal_quantile

__all__ = [
    "ResidualKind",
    "ResidualSet",
    "ResidualError",
    "rpp",
    "rpp_replicate",
    "replicate_stream",
    "mpp",
    "normal_transform",
    "pearson",
    "deviance",
    "aggregate_stats",
    "compute",
]

RPP_FLOOR = 1e-300
RPP_CEIL = 1.0 - 1e-16
DEVIANCE_SLACK = 1e-10


class ResidualKind(str, enum.Enum):
    PEARSON = "pearson"
    DEVIANCE = "deviance"
    RPP = "rpp"
    MPP = "mpp"
    NRPP = "nrpp"
    NMPP = "nmpp"


class ResidualError(ArithmeticError):
    """Residual undefined for the given law or numerically inconsistent."""


@dataclass(frozen=True)
class ResidualSet:
    kind: ResidualKind
    values: np.ndarray
    seed: int | None = None
    replicate_id: int | None = None

    def __len__(self) -> int:
        return self.values.size


def replicate_stream(seed: int, replicate_id: int) -> np.random.Generator:
    """Independent generator for replicate ``replicate_id`` under a master seed."""
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(replicate_id,)))


def _generator(rng) -> tuple[np.random.Generator, int | None]:
    if isinstance(rng, np.random.Generator):
        return rng, None
    if isinstance(rng, np.random.SeedSequence):
        return np.random.default_rng(rng), None
    return np.random.default_rng(rng), int(rng)


def _open_uniform(rng: np.random.Generator, size: int) -> np.ndarray:
    u = rng.random(size)
    # Generator.random() is on [0, 1); exact zeros are redrawn
    while True:
        bad = u == 0.0
        if not bad.any():
            return u
        u[bad] = rng.random(int(bad.sum()))


def _align(laws: PredictiveLaw, y) -> np.ndarray:
    y = np.asarray(y, dtype=float)
    if y.ndim != 1:
        raise ValueError("y must be a 1-d vector")
    shape = laws.shape
    if shape and shape != y.shape:
        raise ValueError(f"laws have shape {shape} but y has shape {y.shape}")
    return y


def _interval(laws, y):
    lower = np.broadcast_to(np.asarray(laws.cdf_left_limit(y), dtype=float), y.shape)
    mass = np.broadcast_to(np.asarray(laws.pmf(y), dtype=float), y.shape)
    return lower, mass


def _pvalues(laws, y, u):
    lower, mass = _interval(laws, y)
    if laws.continuous:
        vals = np.asarray(laws.cdf(y), dtype=float)
    else:
        vals = lower + u * mass
    return np.clip(np.broadcast_to(vals, y.shape), RPP_FLOOR, RPP_CEIL)


def rpp(laws: PredictiveLaw, y, rng, replicate_id: int | None = None) -> ResidualSet:
    """Randomized predictive p-values.

    Args:
        laws: predictive laws aligned with ``y``.
        y: observed responses.
        rng: a ``Generator``, a ``SeedSequence`` or an integer seed.
        replicate_id: with an integer seed, draw from the independent
            substream of that replicate (see :func:`replicate_stream`).
    """
    y = _align(laws, y)
    if replicate_id is not None:
        if isinstance(rng, (np.random.Generator, np.random.SeedSequence)):
            raise TypeError("replicate_id needs an integer master seed")
        gen, seed = replicate_stream(int(rng), replicate_id), int(rng)
    else:
        gen, seed = _generator(rng)
    u = _open_uniform(gen, y.size)
    return ResidualSet(ResidualKind.RPP, _pvalues(laws, y, u), seed, replicate_id)


def rpp_replicate(laws: PredictiveLaw, y, seed: int, replicate_id: int) -> ResidualSet:
    """RPP set number ``replicate_id`` of a replicated randomization."""
    return rpp(laws, y, seed, replicate_id=replicate_id)


def mpp(laws: PredictiveLaw, y) -> ResidualSet:
    """Mid-point predictive p-values (``u = 0.5``)."""
    y = _align(laws, y)
    return ResidualSet(ResidualKind.MPP, _pvalues(laws, y, 0.5))


def normal_transform(pvals: ResidualSet) -> ResidualSet:
    """Standard-normal quantiles of an RPP or MPP set (giving NRPP / NMPP)."""
    target = {ResidualKind.RPP: ResidualKind.NRPP, ResidualKind.MPP: ResidualKind.NMPP}
    if pvals.kind not in target:
        raise ValueError(f"cannot normal-transform a {pvals.kind.value} set")
    values = np.asarray(std_normal_quantile(pvals.values), dtype=float)
    return ResidualSet(target[pvals.kind], values, pvals.seed, pvals.replicate_id)


def pearson(laws: PredictiveLaw, y) -> ResidualSet:
    """Raw residual over the predictive standard deviation."""
    y = _align(laws, y)
    mean = np.broadcast_to(laws.mean(), y.shape)
    var = np.broadcast_to(laws.var(), y.shape)
    if np.any(~(var > 0)):
        raise ResidualError("degenerate law: predictive variance is zero")
    return ResidualSet(ResidualKind.PEARSON, (y - mean) / np.sqrt(var))


def _unit_deviance(laws, y):
    if isinstance(laws, Poisson):
        lam = laws.lam
        return 2.0 * (_sp.xlogy(y, y) - _sp.xlogy(y, lam) - (y - lam))
    if isinstance(laws, NegBinomial):
        mu, k = laws.mu, laws.k
        return 2.0 * (
            _sp.xlogy(y, y) - _sp.xlogy(y, mu) - (y + k) * np.log((y + k) / (mu + k))
        )
    if isinstance(laws, (ZIP, ZINB)):
        # saturated model: Poisson with mean y, whose log-pmf at y is 0 for y = 0
        log_sat = _sp.xlogy(y, y) - y - _sp.gammaln(y + 1.0)
        return 2.0 * (log_sat - np.asarray(laws.logpmf(y)))
    if isinstance(laws, Normal):
        return ((y - laws.mu) / laws.sigma) ** 2
    if isinstance(laws, Bernoulli):
        return -2.0 * np.asarray(laws.logpmf(y))
    raise ResidualError(f"deviance residuals are not defined for {type(laws).__name__}")


def deviance(laws: PredictiveLaw, y) -> ResidualSet:
    """Signed square roots of the per-observation deviance contributions."""
    y = _align(laws, y)
    unit = np.broadcast_to(_unit_deviance(laws, y), y.shape)
    if np.any(unit < -DEVIANCE_SLACK) or np.any(np.isnan(unit)):
        raise ResidualError("negative deviance contribution: saturated model is not maximal")
    mean = np.broadcast_to(laws.mean(), y.shape)
    values = np.sign(y - mean) * np.sqrt(np.maximum(unit, 0.0))
    return ResidualSet(ResidualKind.DEVIANCE, values)


def aggregate_stats(pearson_set: ResidualSet, deviance_set: ResidualSet) -> tuple[float, float]:
    """Pearson chi-square ``X2 = sum r_i^2`` and deviance ``D = sum d_i^2``.

    No reference distribution is attached: the usual chi-square(n - p)
    approximation is not justified when the number of terms grows with n.
    """
    if len(pearson_set) != len(deviance_set):
        raise ValueError("residual sets are not aligned")
    return (
        float(np.sum(pearson_set.values**2)),
        float(np.sum(deviance_set.values**2)),
    )


def compute(kind, laws: PredictiveLaw, y, rng=None, replicate_id=None) -> ResidualSet:
    """Dispatch on ``kind``; ``rng`` is only consulted for RPP and NRPP."""
    kind = ResidualKind(kind)
    if kind is ResidualKind.PEARSON:
        return pearson(laws, y)
    if kind is ResidualKind.DEVIANCE:
        return deviance(laws, y)
    if kind is ResidualKind.MPP:
        return mpp(laws, y)
    if kind is ResidualKind.NMPP:
        return normal_transform(mpp(laws, y))
    if rng is None:
        raise ValueError(f"{kind.value} needs a random stream")
    sets = rpp(laws, y, rng, replicate_id=replicate_id)
    return sets if kind is ResidualKind.RPP else normal_transform(sets)

"""Per-observation predictive laws.

Each law class holds *arrays* of parameters, so one object stands for the
whole vector of fitted predictive distributions of a regression model.
``law[i]`` gives observation ``i`` alone; scalar parameters give a single
law.  Every law exposes what randomized predictive p-values need:

* ``pmf(y)``: probability mass at ``y`` (zero for continuous laws),
* ``cdf(y)``: ``F(y)``,
* ``cdf_left_limit(y)``: ``F(y-)``, the supremum of ``F`` below ``y``,
* ``sample(rng)``: a draw from the law,

plus ``mean()`` and ``var()`` for Pearson residuals.

Negative binomial convention: ``NegBinomial(mu, k)`` has mean ``mu`` and
variance ``mu + mu**2 / k``; ``k`` is the reciprocal of the dispersion, so
Poisson is the ``k -> inf`` limit.  The conversion to the textbook
(size, success-probability) pair lives in :func:`nb_size_prob` only.
"""

from __future__ import annotations

import numpy as np
from scipy import special as _sp

from .special import (
    DomainError,
    reg_inc_beta,
    reg_upper_inc_gamma,
    std_normal_cdf,
)

__all__ = [
    "PredictiveLaw",
    "Poisson",
    "NegBinomial",
    "ZIP",
    "ZINB",
    "Bernoulli",
    "Normal",
    "FinitePMF",
    "nb_size_prob",
]


def nb_size_prob(mu, k):
    """Map ``(mu, k)`` to the (size, success probability) pair used by samplers."""
    mu = np.asarray(mu, dtype=float)
    k = np.asarray(k, dtype=float)
    return k, k / (k + mu)


def _as_param(value, name: str) -> np.ndarray:
    arr = np.asarray(value, dtype=float)
    if np.any(~np.isfinite(arr)):
        raise DomainError(f"{name} must be finite")
    return arr


def _count_values(y) -> np.ndarray:
    y = np.asarray(y, dtype=float)
    if np.any(np.isnan(y)):
        raise DomainError("response contains NaN")
    if np.any(y < 0):
        raise DomainError("count laws are supported on the nonnegative integers")
    return y


def _ret(out, scalar: bool):
    return float(out) if scalar else out


class PredictiveLaw:
    """Base class for a vector of per-observation predictive distributions."""

    continuous = False
    _params: tuple[str, ...] = ()

    @property
    def shape(self) -> tuple[int, ...]:
        return np.broadcast_shapes(*(np.shape(getattr(self, p)) for p in self._params))

    def __len__(self) -> int:
        shape = self.shape
        if not shape:
            raise TypeError(f"scalar {type(self).__name__} has no len()")
        return shape[0]

    def __getitem__(self, idx):
        shape = self.shape
        kwargs = {
            p: np.broadcast_to(getattr(self, p), shape)[idx] for p in self._params
        }
        return type(self)(**kwargs)

    def __iter__(self):
        for i in range(len(self)):
            yield self[i]

    def __repr__(self) -> str:
        body = ", ".join(f"{p}={getattr(self, p)!r}" for p in self._params)
        return f"{type(self).__name__}({body})"

    # subclasses implement these on float arrays already validated
    def _logpmf(self, y: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def _cdf(self, y: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def mean(self):
        raise NotImplementedError

    def var(self):
        raise NotImplementedError

    def sample(self, rng: np.random.Generator, size=None):
        raise NotImplementedError

    def logpmf(self, y):
        """Log probability mass; ``-inf`` off the support."""
        scalar = np.ndim(y) == 0 and not self.shape
        y = _count_values(y)
        integral = y == np.floor(y)
        with np.errstate(divide="ignore"):
            out = np.where(integral, self._logpmf(np.floor(y)), -np.inf)
        return _ret(out, scalar)

    def pmf(self, y):
        scalar = np.ndim(y) == 0 and not self.shape
        return _ret(np.exp(np.asarray(self.logpmf(y))), scalar)

    def cdf(self, y):
        scalar = np.ndim(y) == 0 and not self.shape
        y = _count_values(y)
        return _ret(np.clip(self._cdf(np.floor(y)), 0.0, 1.0), scalar)

    def cdf_left_limit(self, y):
        """``F(y-)``: for integer support this is ``F(ceil(y) - 1)`` with ``F(-1) = 0``."""
        scalar = np.ndim(y) == 0 and not self.shape
        y = _count_values(y)
        below = np.ceil(y) - 1.0
        safe = np.maximum(below, 0.0)
        out = np.where(below < 0, 0.0, self._cdf(safe))
        return _ret(np.clip(out, 0.0, 1.0), scalar)


class Poisson(PredictiveLaw):
    _params = ("lam",)

    def __init__(self, lam):
        self.lam = _as_param(lam, "lam")
        if np.any(self.lam <= 0):
            raise DomainError("Poisson requires lam > 0")

    def _logpmf(self, y):
        return _sp.xlogy(y, self.lam) - self.lam - _sp.gammaln(y + 1.0)

    def _cdf(self, y):
        y, lam = np.broadcast_arrays(y, self.lam)
        return np.asarray(reg_upper_inc_gamma(y + 1.0, lam))

    def mean(self):
        return self.lam

    def var(self):
        return self.lam

    def sample(self, rng, size=None):
        return rng.poisson(self.lam, size=size if size is not None else self.shape or None)


class NegBinomial(PredictiveLaw):
    """Negative binomial with mean ``mu`` and variance ``mu + mu**2 / k``."""

    _params = ("mu", "k")

    def __init__(self, mu, k):
        self.mu = _as_param(mu, "mu")
        self.k = _as_param(k, "k")
        if np.any(self.mu <= 0) or np.any(self.k <= 0):
            raise DomainError("NegBinomial requires mu > 0 and k > 0")

    def _logpmf(self, y):
        mu, k = self.mu, self.k
        return (
            _sp.gammaln(y + k)
            - _sp.gammaln(k)
            - _sp.gammaln(y + 1.0)
            - k * np.log1p(mu / k)
            + _sp.xlogy(y, mu / (k + mu))
        )

    def _cdf(self, y):
        y, mu, k = np.broadcast_arrays(y, self.mu, self.k)
        return np.asarray(reg_inc_beta(k / (k + mu), k, y + 1.0))

    def mean(self):
        return self.mu

    def var(self):
        return self.mu + self.mu**2 / self.k

    def sample(self, rng, size=None):
        n, p = nb_size_prob(self.mu, self.k)
        return rng.negative_binomial(n, p, size=size if size is not None else self.shape or None)


class _ZeroInflated(PredictiveLaw):
    """Mixture of a point mass at zero (weight ``p``) and a count law."""

    def _component(self) -> PredictiveLaw:
        raise NotImplementedError

    def _check_p(self):
        if np.any(self.p < 0) or np.any(self.p >= 1):
            raise DomainError("zero-inflation probability must satisfy 0 <= p < 1")

    def _logpmf(self, y):
        comp = self._component()._logpmf(y)
        with np.errstate(divide="ignore"):
            log_keep = np.log1p(-self.p)
            log_p = np.log(self.p)
        at_zero = np.logaddexp(log_p, log_keep + comp)
        return np.where(y == 0, at_zero, log_keep + comp)

    def _cdf(self, y):
        return self.p + (1.0 - self.p) * self._component()._cdf(y)

    def mean(self):
        return (1.0 - self.p) * self._component().mean()

    def sample(self, rng, size=None):
        shape = size if size is not None else self.shape or None
        structural = rng.random(shape) < self.p
        counts = self._component().sample(rng, size=shape)
        return np.where(structural, 0, counts)


class ZIP(_ZeroInflated):
    _params = ("lam", "p")

    def __init__(self, lam, p):
        self.lam = _as_param(lam, "lam")
        self.p = _as_param(p, "p")
        if np.any(self.lam <= 0):
            raise DomainError("ZIP requires lam > 0")
        self._check_p()

    def _component(self):
        return Poisson(self.lam)

    def var(self):
        return (1.0 - self.p) * self.lam * (1.0 + self.p * self.lam)


class ZINB(_ZeroInflated):
    _params = ("mu", "k", "p")

    def __init__(self, mu, k, p):
        self.mu = _as_param(mu, "mu")
        self.k = _as_param(k, "k")
        self.p = _as_param(p, "p")
        if np.any(self.mu <= 0) or np.any(self.k <= 0):
            raise DomainError("ZINB requires mu > 0 and k > 0")
        self._check_p()

    def _component(self):
        return NegBinomial(self.mu, self.k)

    def var(self):
        # E[Y^2] = (1-p)(mu + mu^2/k + mu^2), minus the squared mixture mean
        mu, k, p = self.mu, self.k, self.p
        return (1.0 - p) * mu * (1.0 + mu / k + p * mu)


class Bernoulli(PredictiveLaw):
    _params = ("prob",)

    def __init__(self, prob):
        self.prob = _as_param(prob, "prob")
        if np.any(self.prob <= 0) or np.any(self.prob >= 1):
            raise DomainError("Bernoulli requires 0 < prob < 1")

    def _logpmf(self, y):
        with np.errstate(divide="ignore"):
            return np.select(
                [y == 0, y == 1], [np.log1p(-self.prob), np.log(self.prob)], -np.inf
            )

    def _cdf(self, y):
        return np.where(y >= 1, 1.0, 1.0 - self.prob)

    def mean(self):
        return self.prob

    def var(self):
        return self.prob * (1.0 - self.prob)

    def sample(self, rng, size=None):
        shape = size if size is not None else self.shape or None
        return (rng.random(shape) < self.prob).astype(np.int64)


class Normal(PredictiveLaw):
    """Normal law.  Continuous, so ``pmf`` is identically zero."""

    continuous = True
    _params = ("mu", "sigma")

    def __init__(self, mu, sigma):
        self.mu = _as_param(mu, "mu")
        self.sigma = _as_param(sigma, "sigma")
        if np.any(self.sigma <= 0):
            raise DomainError("Normal requires sigma > 0")

    def _real(self, y):
        y = np.asarray(y, dtype=float)
        if np.any(np.isnan(y)):
            raise DomainError("response contains NaN")
        return y

    def logpmf(self, y):
        scalar = np.ndim(y) == 0 and not self.shape
        y = self._real(y)
        return _ret(np.full(np.broadcast_shapes(y.shape, self.shape), -np.inf), scalar)

    def cdf(self, y):
        scalar = np.ndim(y) == 0 and not self.shape
        z = (self._real(y) - self.mu) / self.sigma
        return _ret(np.asarray(std_normal_cdf(z)), scalar)

    def cdf_left_limit(self, y):
        return self.cdf(y)

    def logpdf(self, y):
        z = (self._real(y) - self.mu) / self.sigma
        return -0.5 * z * z - np.log(self.sigma) - 0.5 * np.log(2.0 * np.pi)

    def mean(self):
        return self.mu

    def var(self):
        return self.sigma**2

    def sample(self, rng, size=None):
        return rng.normal(self.mu, self.sigma, size=size if size is not None else self.shape or None)


class FinitePMF(PredictiveLaw):
    """A law on finitely many support points, shared by every observation.

    Args:
        support: strictly increasing support values.
        masses: nonnegative probabilities summing to one (within 1e-12).
    """

    _params = ()

    def __init__(self, support, masses):
        support = np.asarray(support, dtype=float)
        masses = np.asarray(masses, dtype=float)
        if support.ndim != 1 or support.shape != masses.shape or support.size == 0:
            raise DomainError("support and masses must be equal-length 1-d arrays")
        if np.any(np.diff(support) <= 0):
            raise DomainError("support must be strictly increasing")
        if np.any(masses < 0) or abs(masses.sum() - 1.0) > 1e-12:
            raise DomainError("masses must be nonnegative and sum to 1")
        self.support = support
        self.masses = masses
        self._cum = np.minimum(np.cumsum(masses), 1.0)

    @property
    def shape(self):
        return ()

    def __getitem__(self, idx):
        return self

    def __repr__(self) -> str:
        return f"FinitePMF(support={self.support.tolist()}, masses={self.masses.tolist()})"

    def _real(self, y):
        y = np.asarray(y, dtype=float)
        if np.any(np.isnan(y)):
            raise DomainError("response contains NaN")
        return y

    def logpmf(self, y):
        scalar = np.ndim(y) == 0
        y = self._real(y)
        idx = np.clip(np.searchsorted(self.support, y), 0, self.support.size - 1)
        hit = self.support[idx] == y
        with np.errstate(divide="ignore"):
            out = np.where(hit, np.log(self.masses[idx]), -np.inf)
        return _ret(out, scalar)

    def cdf(self, y):
        scalar = np.ndim(y) == 0
        idx = np.searchsorted(self.support, self._real(y), side="right")
        out = np.where(idx == 0, 0.0, self._cum[np.maximum(idx - 1, 0)])
        return _ret(out, scalar)

    def cdf_left_limit(self, y):
        scalar = np.ndim(y) == 0
        idx = np.searchsorted(self.support, self._real(y), side="left")
        out = np.where(idx == 0, 0.0, self._cum[np.maximum(idx - 1, 0)])
        return _ret(out, scalar)

    def mean(self):
        return float(np.dot(self.support, self.masses))

    def var(self):
        m = self.mean()
        return float(np.dot((self.support - m) ** 2, self.masses))

    def sample(self, rng, size=None):
        return rng.choice(self.support, size=size, p=self.masses)

"""Normality and uniformity tests for overall goodness of fit.

* :func:`shapiro_wilk`: Royston's AS R94 algorithm (3 <= n <= 5000).
* :func:`ks_uniform`: one-sample Kolmogorov-Smirnov against Uniform(0, 1)
  with the asymptotic Kolmogorov p-value.  No small-sample correction is
  applied, so p-values for n < 35 are only approximate.
* :func:`replicated_sw`: Shapiro-Wilk p-values of R independent NRPP
  randomizations of one dataset.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .distributions import PredictiveLaw
from .residuals import normal_transform, rpp
from .special import std_normal_cdf, std_normal_quantile

__all__ = [
    "TestResult",
    "ReplicatedSW",
    "shapiro_wilk",
    "ks_uniform",
    "kolmogorov_sf",
    "replicated_sw",
    "sw_replicate_pvalue",
]

SW_MIN_N = 3
SW_MAX_N = 5000


@dataclass(frozen=True)
class TestResult:
    statistic: float
    p_value: float
    n: int
    method: str

    __test__ = False  # not a pytest class


@dataclass(frozen=True)
class ReplicatedSW:
    p_values: np.ndarray
    threshold: float
    master_seed: int

    @property
    def fraction_above(self) -> float:
        """Share of replicate p-values strictly above the threshold."""
        return float(np.mean(self.p_values > self.threshold))

    @property
    def fraction_below(self) -> float:
        return float(np.mean(self.p_values < self.threshold))


# --------------------------------------------------------------------------- #
# Shapiro-Wilk
# --------------------------------------------------------------------------- #

_C1 = (0.0, 0.221157, -0.147981, -2.07119, 4.434685, -2.706056)
_C2 = (0.0, 0.042981, -0.293762, -1.752461, 5.682633, -3.582633)
_C3 = (0.544, -0.39978, 0.025054, -6.714e-4)
_C4 = (1.3822, -0.77857, 0.062767, -0.0020322)
_C5 = (-1.5861, -0.31082, -0.083751, 0.0038915)
_C6 = (-0.4803, -0.082676, 0.0030302)
_G = (-2.273, 0.459)


def _poly(coefs, x):
    out = 0.0
    for c in reversed(coefs):
        out = out * x + c
    return out


@lru_cache(maxsize=64)
def _sw_coefficients(n: int) -> np.ndarray:
    """Half-vector of Shapiro-Wilk weights (largest first), cached per n."""
    half = n // 2
    if n == 3:
        return np.array([math.sqrt(0.5)])
    i = np.arange(1, half + 1)
    m = np.asarray(std_normal_quantile((i - 0.375) / (n + 0.25)))  # negative
    summ2 = 2.0 * float(np.sum(m * m))
    ssumm2 = math.sqrt(summ2)
    rsn = 1.0 / math.sqrt(n)
    a = np.empty(half)
    a1 = _poly(_C1, rsn) - m[0] / ssumm2
    if n > 5:
        a2 = -m[1] / ssumm2 + _poly(_C2, rsn)
        fac = math.sqrt(
            (summ2 - 2.0 * m[0] ** 2 - 2.0 * m[1] ** 2) / (1.0 - 2.0 * a1**2 - 2.0 * a2**2)
        )
        a[1] = a2
        start = 2
    else:
        fac = math.sqrt((summ2 - 2.0 * m[0] ** 2) / (1.0 - 2.0 * a1**2))
        start = 1
    a[0] = a1
    a[start:] = -m[start:] / fac
    return a


def _sw_pvalue(w: float, n: int) -> float:
    if n == 3:
        pw = (6.0 / math.pi) * (math.asin(math.sqrt(w)) - math.pi / 3.0)
        return min(max(pw, 0.0), 1.0)
    w1 = math.log1p(-w) if w < 1.0 else -math.inf
    if n <= 11:
        gamma = _poly(_G, n)
        if w1 >= gamma:
            return 1e-99
        w1 = -math.log(gamma - w1)
        mean = _poly(_C3, n)
        sd = math.exp(_poly(_C4, n))
    else:
        xx = math.log(n)
        mean = _poly(_C5, xx)
        sd = math.exp(_poly(_C6, xx))
    if w1 == -math.inf:
        return 1.0
    return float(std_normal_cdf(-(w1 - mean) / sd))


def shapiro_wilk(x) -> TestResult:
    """Shapiro-Wilk W test of normality.

    Raises:
        ValueError: for fewer than 3 or more than 5000 values, non-finite
            values, or a constant sample.
    """
    x = np.asarray(x, dtype=float).ravel()
    n = x.size
    if n < SW_MIN_N or n > SW_MAX_N:
        raise ValueError(f"Shapiro-Wilk needs {SW_MIN_N} <= n <= {SW_MAX_N}, got n={n}")
    if not np.all(np.isfinite(x)):
        raise ValueError("Shapiro-Wilk needs finite values")
    xs = np.sort(x)
    if xs[-1] - xs[0] <= 0.0:
        raise ValueError("Shapiro-Wilk is undefined for a constant sample")
    a = _sw_coefficients(n)
    half = a.size
    spread = xs[::-1][:half] - xs[:half]
    centred = xs - xs.mean()
    ss = float(np.dot(centred, centred))
    w = float(np.dot(a, spread)) ** 2 / ss
    w = min(w, 1.0)
    return TestResult(w, _sw_pvalue(w, n), n, "shapiro-wilk")


# --------------------------------------------------------------------------- #
# Kolmogorov-Smirnov
# --------------------------------------------------------------------------- #


def kolmogorov_sf(lam: float) -> float:
    """Survival function of the Kolmogorov distribution, P(K > lam)."""
    if lam <= 0.0:
        return 1.0
    if lam < 1.0:
        # theta-function form converges fast for small arguments
        s = 0.0
        c = -(math.pi**2) / (8.0 * lam * lam)
        for j in range(1, 20):
            s += math.exp(c * (2 * j - 1) ** 2)
        cdf = math.sqrt(2.0 * math.pi) / lam * s
        return min(max(1.0 - cdf, 0.0), 1.0)
    s = 0.0
    for j in range(1, 101):
        term = math.exp(-2.0 * j * j * lam * lam)
        s += term if j % 2 else -term
        if term < 1e-300:
            break
    return min(max(2.0 * s, 0.0), 1.0)


def ks_uniform(u) -> TestResult:
    """One-sample KS test of ``u`` against Uniform(0, 1)."""
    u = np.asarray(u, dtype=float).ravel()
    n = u.size
    if n == 0:
        raise ValueError("KS test needs at least one value")
    if np.any(~((u >= 0) & (u <= 1))):
        raise ValueError("KS-uniform values must lie in [0, 1]")
    us = np.sort(u)
    i = np.arange(1, n + 1)
    d = float(max(np.max(i / n - us), np.max(us - (i - 1) / n)))
    return TestResult(d, kolmogorov_sf(math.sqrt(n) * d), n, "ks-uniform")


# --------------------------------------------------------------------------- #
# Replicated Shapiro-Wilk on NRPPs
# --------------------------------------------------------------------------- #


def sw_replicate_pvalue(laws: PredictiveLaw, y, master_seed: int, replicate_id: int) -> float:
    """SW p-value of NRPP replicate ``replicate_id``; depends on nothing else."""
    nrpp = normal_transform(rpp(laws, y, master_seed, replicate_id=replicate_id))
    return shapiro_wilk(nrpp.values).p_value


def replicated_sw(
    laws: PredictiveLaw,
    y,
    R: int = 1000,
    master_seed: int = 0,
    threshold: float = 0.05,
) -> ReplicatedSW:
    """Shapiro-Wilk p-values of ``R`` independent NRPP randomizations.

    Replicate ``r`` uses its own substream of ``master_seed``, so the output
    does not depend on the order in which replicates are evaluated.
    """
    if R < 1:
        raise ValueError("R must be at least 1")
    y = np.asarray(y, dtype=float)
    pvals = np.array([sw_replicate_pvalue(laws, y, master_seed, r) for r in range(R)])
    return ReplicatedSW(pvals, threshold, master_seed)

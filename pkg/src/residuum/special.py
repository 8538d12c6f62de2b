"""Special functions behind the count-law CDFs and the normal quantile transform.

Every function accepts scalars or array-likes and broadcasts its arguments.
A scalar call returns a Python ``float``; an array call returns an ``ndarray``.

The regularized incomplete gamma and beta functions follow the classic
series / continued-fraction split (modified Lentz evaluation).  The normal
quantile starts from Acklam's rational approximation and is refined by one
Halley step against :func:`std_normal_cdf`.
"""

from __future__ import annotations

import math

import numpy as np
from scipy import special as _sp

__all__ = [
    "DomainError",
    "log_gamma",
    "reg_upper_inc_gamma",
    "reg_lower_inc_gamma",
    "reg_inc_beta",
    "std_normal_cdf",
    "std_normal_quantile",
]

_EPS = 1e-16
_TINY = 1e-300
_MAX_ITER = 20_000


class DomainError(ValueError):
    """Argument outside the mathematical domain of a function."""


def _wrap(out: np.ndarray, scalar: bool):
    return float(out) if scalar else out


def _is_scalar(*args) -> bool:
    return all(np.ndim(a) == 0 for a in args)


def log_gamma(x):
    """Natural log of the gamma function for ``x > 0``."""
    scalar = _is_scalar(x)
    x = np.asarray(x, dtype=float)
    if np.any(~(x > 0)) or np.any(~np.isfinite(x)):
        raise DomainError("log_gamma requires finite x > 0")
    return _wrap(_sp.gammaln(x), scalar)


# --------------------------------------------------------------------------- #
# Incomplete gamma
# --------------------------------------------------------------------------- #


def _gamma_prefactor(a: np.ndarray, x: np.ndarray) -> np.ndarray:
    # x^a e^{-x} / Gamma(a), evaluated in log space
    with np.errstate(divide="ignore"):
        return np.exp(a * np.log(x) - x - _sp.gammaln(a))


def _gamma_series(a: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Lower regularized P(a, x) by its power series; good for x < a + 1."""
    term = 1.0 / a
    total = term.copy()
    ap = a.copy()
    active = np.ones(a.shape, dtype=bool)
    for _ in range(_MAX_ITER):
        ap = ap + 1.0
        term = np.where(active, term * x / ap, term)
        total = np.where(active, total + term, total)
        active &= np.abs(term) >= np.abs(total) * _EPS
        if not active.any():
            break
    return total * _gamma_prefactor(a, x)


def _gamma_contfrac(a: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Upper regularized Q(a, x) by its continued fraction; good for x >= a + 1."""
    b = x + 1.0 - a
    c = np.full(a.shape, 1.0 / _TINY)
    d = 1.0 / b
    h = d.copy()
    active = np.ones(a.shape, dtype=bool)
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        for i in range(1, _MAX_ITER):
            an = -i * (i - a)
            b = b + 2.0
            d = an * d + b
            d = np.where(np.abs(d) < _TINY, _TINY, d)
            c = b + an / c
            c = np.where(np.abs(c) < _TINY, _TINY, c)
            d = 1.0 / d
            delta = d * c
            h = np.where(active, h * delta, h)
            active &= np.abs(delta - 1.0) >= _EPS
            if not active.any():
                break
    return h * _gamma_prefactor(a, x)


def _upper_gamma(a: np.ndarray, x: np.ndarray) -> np.ndarray:
    out = np.ones(a.shape)
    series = (x > 0) & (x < a + 1.0)
    cf = x >= a + 1.0
    if series.any():
        out[series] = 1.0 - _gamma_series(a[series], x[series])
    if cf.any():
        out[cf] = _gamma_contfrac(a[cf], x[cf])
    return np.clip(out, 0.0, 1.0)


def _check_gamma_args(a, x):
    a, x = np.broadcast_arrays(np.asarray(a, dtype=float), np.asarray(x, dtype=float))
    if np.any(~(a > 0)) or np.any(~np.isfinite(a)):
        raise DomainError("incomplete gamma requires finite a > 0")
    if np.any(~(x >= 0)):
        raise DomainError("incomplete gamma requires x >= 0")
    return a.copy(), x.copy()


def reg_upper_inc_gamma(a, x):
    """Regularized upper incomplete gamma ``Q(a, x) = Gamma(a, x) / Gamma(a)``.

    The Poisson CDF is ``F(y; lam) = Q(y + 1, lam)``.
    """
    scalar = _is_scalar(a, x)
    a, x = _check_gamma_args(a, x)
    out = np.zeros(a.shape)
    finite = np.isfinite(x)
    out[finite] = _upper_gamma(a[finite], x[finite])
    return _wrap(out, scalar)


def reg_lower_inc_gamma(a, x):
    """Regularized lower incomplete gamma ``P(a, x) = 1 - Q(a, x)``."""
    scalar = _is_scalar(a, x)
    a, x = _check_gamma_args(a, x)
    out = np.ones(a.shape)
    finite = np.isfinite(x)
    af, xf = a[finite], x[finite]
    res = np.zeros(af.shape)
    series = (xf > 0) & (xf < af + 1.0)
    cf = xf >= af + 1.0
    if series.any():
        res[series] = _gamma_series(af[series], xf[series])
    if cf.any():
        res[cf] = 1.0 - _gamma_contfrac(af[cf], xf[cf])
    out[finite] = np.clip(res, 0.0, 1.0)
    return _wrap(out, scalar)


# --------------------------------------------------------------------------- #
# Incomplete beta
# --------------------------------------------------------------------------- #


def _beta_contfrac(a: np.ndarray, b: np.ndarray, x: np.ndarray) -> np.ndarray:
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    c = np.ones(a.shape)
    d = 1.0 - qab * x / qap
    d = np.where(np.abs(d) < _TINY, _TINY, d)
    d = 1.0 / d
    h = d.copy()
    active = np.ones(a.shape, dtype=bool)
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        for m in range(1, _MAX_ITER):
            m2 = 2.0 * m
            aa = m * (b - m) * x / ((qam + m2) * (a + m2))
            d = 1.0 + aa * d
            d = np.where(np.abs(d) < _TINY, _TINY, d)
            c = 1.0 + aa / c
            c = np.where(np.abs(c) < _TINY, _TINY, c)
            d = 1.0 / d
            h = np.where(active, h * d * c, h)
            aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
            d = 1.0 + aa * d
            d = np.where(np.abs(d) < _TINY, _TINY, d)
            c = 1.0 + aa / c
            c = np.where(np.abs(c) < _TINY, _TINY, c)
            d = 1.0 / d
            delta = d * c
            h = np.where(active, h * delta, h)
            active &= np.abs(delta - 1.0) >= _EPS
            if not active.any():
                break
    return h


def reg_inc_beta(p, a, b):
    """Regularized incomplete beta ``I_p(a, b)``.

    Used for the negative binomial CDF, ``F(y; mu, k) = I_{k/(k+mu)}(k, y + 1)``.
    """
    scalar = _is_scalar(p, a, b)
    p, a, b = np.broadcast_arrays(
        np.asarray(p, dtype=float), np.asarray(a, dtype=float), np.asarray(b, dtype=float)
    )
    if np.any(~((p >= 0) & (p <= 1))):
        raise DomainError("reg_inc_beta requires 0 <= p <= 1")
    if np.any(~(a > 0)) or np.any(~(b > 0)) or np.any(~np.isfinite(a + b)):
        raise DomainError("reg_inc_beta requires finite a > 0 and b > 0")

    out = np.where(p >= 1.0, 1.0, 0.0)
    inner = (p > 0) & (p < 1)
    if inner.any():
        x, aa, bb = p[inner], a[inner], b[inner]
        log_front = aa * np.log(x) + bb * np.log1p(-x) - _sp.betaln(aa, bb)
        front = np.exp(log_front)
        res = np.empty(x.shape)
        direct = x < (aa + 1.0) / (aa + bb + 2.0)
        if direct.any():
            res[direct] = (
                front[direct] * _beta_contfrac(aa[direct], bb[direct], x[direct]) / aa[direct]
            )
        flip = ~direct
        if flip.any():
            res[flip] = 1.0 - front[flip] * _beta_contfrac(
                bb[flip], aa[flip], 1.0 - x[flip]
            ) / bb[flip]
        out = out.astype(float)
        out[inner] = np.clip(res, 0.0, 1.0)
    return _wrap(np.asarray(out, dtype=float), scalar)


# --------------------------------------------------------------------------- #
# Standard normal
# --------------------------------------------------------------------------- #

_SQRT2 = math.sqrt(2.0)
_SQRT2PI = math.sqrt(2.0 * math.pi)

# Acklam's rational approximation, relative error ~1.15e-9 before refinement.
_A = (-3.969683028665376e01, 2.209460984245205e02, -2.759285104469687e02,
      1.383577518672690e02, -3.066479806614716e01, 2.506628277459239e00)
_B = (-5.447609879822406e01, 1.615858368580409e02, -1.556989798598866e02,
      6.680131188771972e01, -1.328068155288572e01)
_C = (-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e00,
      -2.549732539343734e00, 4.374664141464968e00, 2.938163982698783e00)
_D = (7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e00,
      3.754408661907416e00)
_P_LOW = 0.02425


def std_normal_cdf(z):
    """Standard normal CDF, ``Phi(z) = erfc(-z / sqrt(2)) / 2``."""
    scalar = _is_scalar(z)
    z = np.asarray(z, dtype=float)
    if np.any(np.isnan(z)):
        raise DomainError("std_normal_cdf requires non-NaN input")
    return _wrap(0.5 * _sp.erfc(-z / _SQRT2), scalar)


def _acklam_lower(p: np.ndarray) -> np.ndarray:
    # p in (0, 0.5]; returns the (non-positive) quantile
    x = np.empty(p.shape)
    tail = p < _P_LOW
    if tail.any():
        q = np.sqrt(-2.0 * np.log(p[tail]))
        num = ((((_C[0] * q + _C[1]) * q + _C[2]) * q + _C[3]) * q + _C[4]) * q + _C[5]
        den = (((_D[0] * q + _D[1]) * q + _D[2]) * q + _D[3]) * q + 1.0
        x[tail] = num / den
    body = ~tail
    if body.any():
        q = p[body] - 0.5
        r = q * q
        num = (((((_A[0] * r + _A[1]) * r + _A[2]) * r + _A[3]) * r + _A[4]) * r + _A[5]) * q
        den = ((((_B[0] * r + _B[1]) * r + _B[2]) * r + _B[3]) * r + _B[4]) * r + 1.0
        x[body] = num / den
    return x


def std_normal_quantile(u):
    """Inverse standard normal CDF on the open interval ``(0, 1)``.

    Raises:
        DomainError: if any ``u`` lies outside ``(0, 1)``.  The endpoints are
            rejected so that normal-transformed p-values stay finite.
    """
    scalar = _is_scalar(u)
    u = np.asarray(u, dtype=float)
    if np.any(~((u > 0) & (u < 1))):
        raise DomainError("std_normal_quantile requires 0 < u < 1")
    upper = u > 0.5
    # 1 - u is exact for u in (0.5, 1)
    p = np.where(upper, 1.0 - u, u)
    x = _acklam_lower(p)
    # one Halley step; Phi evaluated in the lower tail keeps relative accuracy
    e = 0.5 * _sp.erfc(-x / _SQRT2) - p
    t = e * _SQRT2PI * np.exp(0.5 * x * x)
    x = x - t / (1.0 + 0.5 * x * t)
    x = np.where(upper, -x, x)
    x = np.where(u == 0.5, 0.0, x)
    return _wrap(x, scalar)

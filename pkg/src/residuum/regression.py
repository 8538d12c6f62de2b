"""Maximum-likelihood fitting of count regression models.

Families: Poisson, negative binomial (NB), zero-inflated Poisson (ZIP) and
zero-inflated negative binomial (ZINB), plus a normal linear model used
internally for checks.  The count mean uses a log link; the zero-inflation
probability uses a logit link.

Algorithms:

* Poisson: iteratively reweighted least squares (IRLS).
* NB: alternate an IRLS step for ``beta`` at fixed ``k`` with Newton steps
  for ``log k`` on the profile log-likelihood.
* ZIP / ZINB: EM, where the E-step computes the posterior probability that
  each zero is structural and the M-step runs a weighted logistic fit for
  ``gamma`` and a weighted count fit for ``beta`` (and ``k``).  EM is then
  polished by BFGS on the full log-likelihood.

Standard errors come from the observed information: the inverse of the
negative Hessian of the full log-likelihood at the optimum.  The Poisson
Hessian is analytic; the others are central differences of the analytic
score.

The flat parameter vector used by :func:`loglik` and :func:`score` is
``[beta, gamma, log_k]`` with absent blocks omitted (``[beta, log_sigma]``
for the normal model).
"""

from __future__ import annotations

import enum
import logging
import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize
from scipy import special as _sp

from .distributions import NegBinomial, Normal, Poisson, PredictiveLaw, ZINB, ZIP

logger = logging.getLogger(__name__)

__all__ = [
    "Family",
    "ModelSpec",
    "FittedModel",
    "FitError",
    "RankDeficientError",
    "fit",
    "loglik",
    "score",
    "predictive_laws",
]

MAX_ITER = 500
REL_TOL = 1e-10
SCORE_TOL = 1e-8
LOG_K_BOUNDS = (math.log(1e-4), math.log(1e6))
RANK_TOL = 1e-8


class Family(str, enum.Enum):
    POISSON = "poisson"
    NEGBIN = "negbin"
    ZIP = "zip"
    ZINB = "zinb"
    NORMAL = "normal"

    @property
    def zero_inflated(self) -> bool:
        return self in (Family.ZIP, Family.ZINB)

    @property
    def has_k(self) -> bool:
        return self in (Family.NEGBIN, Family.ZINB)


class FitError(ValueError):
    """The model cannot be fitted to the given data."""


class RankDeficientError(FitError):
    pass


def _check_rank(X: np.ndarray, name: str) -> None:
    s = np.linalg.svd(X, compute_uv=False)
    if s.size == 0 or s[-1] <= RANK_TOL * s[0]:
        raise RankDeficientError(f"{name} does not have full column rank")


@dataclass(frozen=True)
class ModelSpec:
    """Response family plus design matrices.

    ``mean_design`` is the n x p matrix of the log-mean linear predictor
    (intercept column included by the caller).  ``zero_design`` is the n x q
    matrix of the logit zero-inflation predictor; for zero-inflated families
    it defaults to an intercept column.
    """

    family: Family
    mean_design: np.ndarray
    zero_design: np.ndarray | None = None
    mean_names: tuple[str, ...] | None = None
    zero_names: tuple[str, ...] | None = None

    def __post_init__(self):
        family = Family(self.family)
        object.__setattr__(self, "family", family)
        X = np.atleast_2d(np.asarray(self.mean_design, dtype=float))
        if X.ndim != 2:
            raise FitError("mean_design must be a 2-d matrix")
        object.__setattr__(self, "mean_design", X)
        n, p = X.shape
        Z = self.zero_design
        if family.zero_inflated:
            Z = np.ones((n, 1)) if Z is None else np.asarray(Z, dtype=float)
            if Z.ndim == 1:
                Z = Z[:, None]
            if Z.shape[0] != n:
                raise FitError("zero_design and mean_design have different row counts")
        elif Z is not None:
            raise FitError(f"{family.value} takes no zero_design")
        object.__setattr__(self, "zero_design", Z)
        if not np.all(np.isfinite(X)) or (Z is not None and not np.all(np.isfinite(Z))):
            raise FitError("design matrices must be finite")
        q = 0 if Z is None else Z.shape[1]
        if n <= p + q:
            raise FitError(f"need more observations than parameters (n={n}, p+q={p + q})")
        _check_rank(X, "mean_design")
        if Z is not None:
            _check_rank(Z, "zero_design")
        if self.mean_names is None:
            object.__setattr__(self, "mean_names", tuple(f"x{j}" for j in range(p)))
        if Z is not None and self.zero_names is None:
            object.__setattr__(self, "zero_names", tuple(f"z{j}" for j in range(q)))

    @property
    def n(self) -> int:
        return self.mean_design.shape[0]

    @property
    def p(self) -> int:
        return self.mean_design.shape[1]

    @property
    def q(self) -> int:
        return 0 if self.zero_design is None else self.zero_design.shape[1]

    @property
    def n_params(self) -> int:
        extra = 1 if self.family.has_k or self.family is Family.NORMAL else 0
        return self.p + self.q + extra

    def split(self, params):
        """Split a flat parameter vector into ``(beta, gamma, log_k_or_log_sigma)``."""
        params = np.asarray(params, dtype=float)
        if params.shape != (self.n_params,):
            raise ValueError(f"expected {self.n_params} parameters, got {params.shape}")
        beta = params[: self.p]
        gamma = params[self.p : self.p + self.q] if self.q else None
        extra = params[-1] if self.n_params > self.p + self.q else None
        return beta, gamma, extra


@dataclass(frozen=True)
class FittedModel:
    """Result of :func:`fit`.

    ``std_errors`` follows the order of ``params`` (``beta``, ``gamma``,
    then ``log k``).  ``k_std_error`` is the delta-method SE of ``k``.
    """

    family: Family
    beta: np.ndarray
    gamma: np.ndarray | None
    k: float | None
    sigma: float | None
    std_errors: np.ndarray
    k_std_error: float | None
    loglik: float
    aic: float
    n_params: int
    n_obs: int
    converged: bool
    iterations: int
    k_at_bound: bool = False
    message: str = ""
    trace: tuple[float, ...] = field(default=(), repr=False)

    @property
    def params(self) -> np.ndarray:
        parts = [self.beta]
        if self.gamma is not None:
            parts.append(self.gamma)
        if self.k is not None:
            parts.append([math.log(self.k)])
        if self.sigma is not None:
            parts.append([math.log(self.sigma)])
        return np.concatenate(parts)

    @property
    def beta_se(self) -> np.ndarray:
        return self.std_errors[: self.beta.size]

    @property
    def gamma_se(self) -> np.ndarray | None:
        if self.gamma is None:
            return None
        return self.std_errors[self.beta.size : self.beta.size + self.gamma.size]


# --------------------------------------------------------------------------- #
# Log-likelihood and score
# --------------------------------------------------------------------------- #


def _softplus(z):
    return np.logaddexp(0.0, z)


def _nb_logpmf(y, mu, k):
    return (
        _sp.gammaln(y + k)
        - _sp.gammaln(k)
        - _sp.gammaln(y + 1.0)
        - k * np.log1p(mu / k)
        + _sp.xlogy(y, mu / (k + mu))
    )


def _nb_dk(y, mu, k):
    # d/dk of the NB log-pmf
    return _sp.digamma(y + k) - _sp.digamma(k) - np.log1p(mu / k) + (mu - y) / (k + mu)


def _nb_d2k(y, mu, k):
    return (
        _sp.polygamma(1, y + k)
        - _sp.polygamma(1, k)
        + mu / (k * (k + mu))
        - (mu - y) / (k + mu) ** 2
    )


def _count_terms(family, y, eta, k):
    """Count-component log-pmf and its derivative w.r.t. eta (and k)."""
    mu = np.exp(eta)
    if family in (Family.POISSON, Family.ZIP):
        logf = _sp.xlogy(y, mu) - mu - _sp.gammaln(y + 1.0)
        return logf, y - mu, None
    logf = _nb_logpmf(y, mu, k)
    return logf, (y - mu) * k / (k + mu), _nb_dk(y, mu, k)


def _structural_posterior(y, zeta, logf):
    """Posterior probability that each observation is a structural zero."""
    # w = p / (p + (1-p) f(0)) for y == 0, else 0, computed stably in logit space
    w = _sp.expit(zeta - logf)
    return np.where(y == 0, w, 0.0)


def _terms(spec: ModelSpec, params, y):
    beta, gamma, extra = spec.split(params)
    family = spec.family
    eta = spec.mean_design @ beta
    if family is Family.NORMAL:
        sigma = math.exp(extra)
        r = (y - eta) / sigma
        ll = -0.5 * r * r - extra - 0.5 * math.log(2.0 * math.pi)
        g_beta = spec.mean_design.T @ (r / sigma)
        g_extra = np.sum(r * r - 1.0)
        return ll, np.concatenate([g_beta, [g_extra]])
    k = math.exp(extra) if family.has_k else None
    logf, d_eta, d_k = _count_terms(family, y, eta, k)
    if not family.zero_inflated:
        grads = [spec.mean_design.T @ d_eta]
        if k is not None:
            grads.append([np.sum(d_k) * k])
        return logf, np.concatenate(grads)
    zeta = spec.zero_design @ gamma
    sp_zeta = _softplus(zeta)
    ll = np.where(y == 0, np.logaddexp(zeta, logf), logf) - sp_zeta
    w = _structural_posterior(y, zeta, logf)
    p = _sp.expit(zeta)
    keep = 1.0 - w
    grads = [spec.mean_design.T @ (keep * d_eta), spec.zero_design.T @ (w - p)]
    if k is not None:
        grads.append([np.sum(keep * d_k) * k])
    return ll, np.concatenate(grads)


def _prep_y(y, spec: ModelSpec) -> np.ndarray:
    y = np.asarray(y, dtype=float)
    if y.shape != (spec.n,):
        raise FitError(f"response has shape {y.shape}, expected ({spec.n},)")
    if not np.all(np.isfinite(y)):
        raise FitError("response must be finite")
    if spec.family is not Family.NORMAL:
        if np.any(y < 0) or np.any(y != np.floor(y)):
            raise FitError("count response must contain nonnegative integers")
    return y


def loglik(spec: ModelSpec, params, y) -> float:
    """Total log-likelihood at a flat parameter vector.

    Returns ``-inf`` when any observation has zero probability.
    """
    y = _prep_y(y, spec)
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        ll, _ = _terms(spec, params, y)
    total = float(np.sum(ll))
    return total if not math.isnan(total) else -math.inf


def score(spec: ModelSpec, params, y) -> np.ndarray:
    """Analytic gradient of :func:`loglik` with respect to the flat parameters."""
    y = _prep_y(y, spec)
    _, g = _terms(spec, params, y)
    return g


def _numeric_hessian(spec, params, y, free=None) -> np.ndarray:
    params = np.asarray(params, dtype=float)
    d = params.size
    free = np.arange(d) if free is None else np.asarray(free)
    H = np.empty((free.size, free.size))
    for col, j in enumerate(free):
        h = 1e-5 * max(1.0, abs(params[j]))
        up = params.copy()
        dn = params.copy()
        up[j] += h
        dn[j] -= h
        H[:, col] = (_terms(spec, up, y)[1][free] - _terms(spec, dn, y)[1][free]) / (2 * h)
    return 0.5 * (H + H.T)


# --------------------------------------------------------------------------- #
# Building blocks
# --------------------------------------------------------------------------- #


def _wls(X, w, z):
    sw = np.sqrt(w)
    coef, *_ = np.linalg.lstsq(X * sw[:, None], z * sw, rcond=None)
    return coef


def _irls_count(X, y, weights, beta, k=None, max_iter=50, tol=1e-12):
    """Weighted Poisson (k None) or NB-at-fixed-k IRLS from a starting beta."""

    def objective(b):
        eta = X @ b
        mu = np.exp(eta)
        if k is None:
            return np.sum(weights * (_sp.xlogy(y, mu) - mu))
        return np.sum(weights * (_sp.xlogy(y, mu / (k + mu)) - k * np.log1p(mu / k)))

    with np.errstate(over="ignore", invalid="ignore"):
        current = objective(beta)
        for _ in range(max_iter):
            eta = X @ beta
            mu = np.exp(eta)
            wmu = mu if k is None else mu / (1.0 + mu / k)
            z = eta + (y - mu) / mu
            proposal = _wls(X, weights * wmu, z)
            step = proposal - beta
            new = objective(proposal)
            halvings = 0
            while not (new >= current - 1e-12 * abs(current)) and halvings < 30:
                step *= 0.5
                proposal = beta + step
                new = objective(proposal)
                halvings += 1
            beta = proposal
            done = abs(new - current) <= tol * max(1.0, abs(current))
            current = new
            if done:
                break
    return beta


def _newton_log_k(y, mu, weights, log_k, max_iter=50):
    """Maximize the weighted NB log-likelihood over log k with mu held fixed."""
    lo, hi = LOG_K_BOUNDS

    def obj(lk):
        return np.sum(weights * _nb_logpmf(y, mu, math.exp(lk)))

    current = obj(log_k)
    for _ in range(max_iter):
        k = math.exp(log_k)
        g1 = np.sum(weights * _nb_dk(y, mu, k))
        g2 = np.sum(weights * _nb_d2k(y, mu, k))
        grad = g1 * k
        hess = g2 * k * k + g1 * k
        if hess < 0:
            step = -grad / hess
        else:
            step = math.copysign(1.0, grad)
        step = max(min(step, 2.0), -2.0)
        new_lk = min(max(log_k + step, lo), hi)
        new = obj(new_lk)
        halvings = 0
        while new < current - 1e-12 * abs(current) and halvings < 40:
            step *= 0.5
            new_lk = min(max(log_k + step, lo), hi)
            new = obj(new_lk)
            halvings += 1
        moved = abs(new_lk - log_k)
        log_k, current = new_lk, new
        if moved < 1e-10 or abs(grad) < 1e-9:
            break
    return log_k


def _irls_logistic(Z, w, gamma, max_iter=50, tol=1e-12):
    """Logistic regression on fractional responses ``w`` by Newton/IRLS."""

    def objective(g):
        zeta = Z @ g
        return np.sum(w * zeta - _softplus(zeta))

    current = objective(gamma)
    for _ in range(max_iter):
        zeta = Z @ gamma
        p = _sp.expit(zeta)
        v = np.maximum(p * (1.0 - p), 1e-12)
        z = zeta + (w - p) / v
        proposal = _wls(Z, v, z)
        step = proposal - gamma
        new = objective(proposal)
        halvings = 0
        while not (new >= current - 1e-12 * abs(current)) and halvings < 30:
            step *= 0.5
            proposal = gamma + step
            new = objective(proposal)
            halvings += 1
        gamma = proposal
        done = abs(new - current) <= tol * max(1.0, abs(current))
        current = new
        if done:
            break
    return gamma


def _converged(ll_old, ll_new, grad) -> bool:
    rel = abs(ll_new - ll_old) <= REL_TOL * max(1.0, abs(ll_new))
    return rel or float(np.max(np.abs(grad))) < SCORE_TOL


# --------------------------------------------------------------------------- #
# Family-specific fitters; each returns (params, iterations, converged, trace)
# --------------------------------------------------------------------------- #


def _poisson_start(X, y, weights=None):
    weights = np.ones_like(y) if weights is None else weights
    mu0 = (y + np.average(y, weights=weights)) / 2.0 + 0.1
    beta = _wls(X, weights * mu0, np.log(mu0) + (y - mu0) / mu0)
    return beta


def _fit_poisson(spec, y, max_iter):
    X = spec.mean_design
    beta = _poisson_start(X, y)
    ll_old = -math.inf
    for it in range(1, max_iter + 1):
        beta = _irls_count(X, y, np.ones_like(y), beta, max_iter=1)
        ll_new, grad = _terms(spec, beta, y)
        ll_new = float(np.sum(ll_new))
        if _converged(ll_old, ll_new, grad):
            return beta, it, True, ()
        ll_old = ll_new
    return beta, max_iter, False, ()


def _fit_negbin(spec, y, max_iter):
    X = spec.mean_design
    beta, _, _, _ = _fit_poisson(ModelSpec(Family.POISSON, spec.mean_design), y, max_iter)
    ones = np.ones_like(y)
    log_k = _newton_log_k(y, np.exp(X @ beta), ones, 0.0)
    ll_old = -math.inf
    for it in range(1, max_iter + 1):
        beta = _irls_count(X, y, ones, beta, k=math.exp(log_k), max_iter=1)
        log_k = _newton_log_k(y, np.exp(X @ beta), ones, log_k)
        params = np.append(beta, log_k)
        ll, grad = _terms(spec, params, y)
        ll_new = float(np.sum(ll))
        if _at_bound(log_k):
            grad = grad[:-1]
        if _converged(ll_old, ll_new, grad):
            break
        ll_old = ll_new
    else:
        return params, max_iter, False, ()
    # alternating updates stall on the beta/k coupling; finish jointly
    params, polished, conv = _polish(spec, y, params, max_iter - it)
    return params, it + polished, conv, ()


def _at_bound(log_k) -> bool:
    lo, hi = LOG_K_BOUNDS
    return log_k <= lo + 1e-9 or log_k >= hi - 1e-9


def _fit_zero_inflated(spec, y, max_iter):
    if not np.any(y > 0):
        raise FitError("all-zero response: zero-inflated model is unidentifiable")
    X, Z = spec.mean_design, spec.zero_design
    family = spec.family
    n = y.size

    beta, _, _, _ = _fit_poisson(ModelSpec(Family.POISSON, spec.mean_design), y, max_iter)
    mu = np.exp(X @ beta)
    excess = (np.sum(y == 0) - np.sum(np.exp(-mu))) / n
    excess = min(max(excess, 0.01), 0.95)
    gamma = np.zeros(Z.shape[1])
    gamma[0] = _sp.logit(excess)
    log_k = 0.0
    if family.has_k:
        log_k = _newton_log_k(y, mu, np.ones_like(y), 0.0)

    def pack(b, g, lk):
        return np.concatenate([b, g, [lk]]) if family.has_k else np.concatenate([b, g])

    params = pack(beta, gamma, log_k)
    ll_old = float(np.sum(_terms(spec, params, y)[0]))
    trace = [ll_old]
    it = 0
    em_tol = 1e-9
    for it in range(1, max_iter + 1):
        # E-step
        eta = X @ beta
        logf, _, _ = _count_terms(family, y, eta, math.exp(log_k) if family.has_k else None)
        w = _structural_posterior(y, Z @ gamma, logf)
        # M-step
        gamma = _irls_logistic(Z, w, gamma)
        keep = 1.0 - w
        if family.has_k:
            beta = _irls_count(X, y, keep, beta, k=math.exp(log_k), max_iter=3)
            log_k = _newton_log_k(y, np.exp(X @ beta), keep, log_k)
        else:
            beta = _irls_count(X, y, keep, beta)
        params = pack(beta, gamma, log_k)
        ll_new = float(np.sum(_terms(spec, params, y)[0]))
        trace.append(ll_new)
        if abs(ll_new - ll_old) <= em_tol * max(1.0, abs(ll_new)):
            break
        ll_old = ll_new

    params, polished, conv = _polish(spec, y, params, max_iter - it)
    return params, it + polished, conv, tuple(trace)


def _polish(spec, y, params, budget):
    """Direct quasi-Newton refinement on the full log-likelihood."""
    budget = max(budget, 50)
    has_k = spec.family.has_k
    bounds_lk = LOG_K_BOUNDS

    def neg(theta):
        if has_k:
            theta = theta.copy()
            theta[-1] = min(max(theta[-1], bounds_lk[0]), bounds_lk[1])
        with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
            ll, g = _terms(spec, theta, y)
        val = -float(np.sum(ll))
        if not np.isfinite(val):
            return np.inf, np.zeros_like(theta)
        return val, -g

    start_val, _ = neg(params)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        res = optimize.minimize(
            neg, params, jac=True, method="BFGS",
            options={"gtol": SCORE_TOL, "maxiter": budget},
        )
    theta = res.x if res.fun <= start_val else params
    if has_k:
        theta = theta.copy()
        theta[-1] = min(max(theta[-1], bounds_lk[0]), bounds_lk[1])
    iters = int(res.nit)
    # Newton refinement with the finite-difference Hessian of the analytic score
    val, g = neg(theta)
    for _ in range(20):
        free = np.arange(theta.size)
        if has_k and _at_bound(theta[-1]):
            free = free[:-1]
        if np.max(np.abs(g[free])) < SCORE_TOL:
            return theta, iters, True
        H = _numeric_hessian(spec, theta, y, free)
        try:
            step = np.linalg.solve(H, g[free])  # H is the Hessian of ll; g is -score
        except np.linalg.LinAlgError:
            break
        new = theta.copy()
        accepted = False
        for _ in range(30):
            new[free] = theta[free] + step
            new_val, new_g = neg(new)
            if new_val <= val + 1e-12 * abs(val):
                accepted = True
                break
            step *= 0.5
        iters += 1
        if not accepted:
            break
        rel = abs(val - new_val) <= REL_TOL * max(1.0, abs(new_val))
        theta, val, g = new, new_val, new_g
        if rel:
            return theta, iters, True
    free = np.arange(theta.size)
    if has_k and _at_bound(theta[-1]):
        free = free[:-1]
    ok = bool(np.max(np.abs(g[free])) < SCORE_TOL) or res.success
    return theta, iters, ok


def _fit_normal(spec, y):
    X = spec.mean_design
    beta, *_ = np.linalg.lstsq(X, y, rcond=None)
    resid = y - X @ beta
    sigma = math.sqrt(float(np.mean(resid**2)))
    if sigma <= 0:
        raise FitError("perfect fit: residual variance is zero")
    return np.append(beta, math.log(sigma)), 1, True, ()


# --------------------------------------------------------------------------- #
# Public API
# --------------------------------------------------------------------------- #


def fit(spec: ModelSpec, y, max_iter: int = MAX_ITER) -> FittedModel:
    """Maximum-likelihood fit of ``spec`` to the response ``y``.

    Non-convergence is reported through ``FittedModel.converged`` rather than
    raised, so the partial estimates remain available.

    Raises:
        FitError: invalid response, or an all-zero response for a
            zero-inflated family.
    """
    y = _prep_y(y, spec)
    family = spec.family
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        if family is Family.POISSON:
            params, iters, conv, trace = _fit_poisson(spec, y, max_iter)
        elif family is Family.NEGBIN:
            params, iters, conv, trace = _fit_negbin(spec, y, max_iter)
        elif family.zero_inflated:
            params, iters, conv, trace = _fit_zero_inflated(spec, y, max_iter)
        else:
            params, iters, conv, trace = _fit_normal(spec, y)

    ll = loglik(spec, params, y)
    beta, gamma, extra = spec.split(params)
    k_at_bound = family.has_k and _at_bound(extra)
    free = np.arange(params.size)
    if k_at_bound:
        free = free[:-1]
    if family is Family.POISSON:
        mu = np.exp(spec.mean_design @ beta)
        H = -(spec.mean_design.T * mu) @ spec.mean_design
    else:
        H = _numeric_hessian(spec, params, y, free)
    se = np.full(params.size, np.nan)
    message = ""
    try:
        cov = np.linalg.inv(-H)
        diag = np.diag(cov)
        if np.all(diag > 0) and np.all(np.isfinite(diag)):
            se[free] = np.sqrt(diag)
        else:
            message = "observed information is not positive definite"
    except np.linalg.LinAlgError:
        message = "observed information is singular"
    if message:
        logger.warning("%s fit: %s", family.value, message)
        conv = False
    if not np.isfinite(ll):
        conv = False
        message = message or "log-likelihood is not finite"
    if k_at_bound:
        message = (message + "; " if message else "") + "k reached its bound"

    k = math.exp(extra) if family.has_k else None
    k_se = None
    if k is not None and not k_at_bound:
        k_se = float(se[-1] * k)
    n_params = params.size
    return FittedModel(
        family=family,
        beta=np.array(beta),
        gamma=None if gamma is None else np.array(gamma),
        k=k,
        sigma=math.exp(extra) if family is Family.NORMAL else None,
        std_errors=se,
        k_std_error=k_se,
        loglik=ll,
        aic=-2.0 * ll + 2.0 * n_params,
        n_params=n_params,
        n_obs=spec.n,
        converged=bool(conv),
        iterations=int(iters),
        k_at_bound=bool(k_at_bound),
        message=message,
        trace=trace,
    )


def predictive_laws(model: FittedModel, spec: ModelSpec) -> PredictiveLaw:
    """Fitted per-observation predictive distributions, as one vectorized law."""
    if model.family is not spec.family:
        raise ValueError("model and spec families differ")
    mu = np.exp(spec.mean_design @ model.beta)
    if spec.family is Family.POISSON:
        return Poisson(mu)
    if spec.family is Family.NEGBIN:
        return NegBinomial(mu, np.full_like(mu, model.k))
    if spec.family is Family.NORMAL:
        return Normal(spec.mean_design @ model.beta, np.full(spec.n, model.sigma))
    p = _sp.expit(spec.zero_design @ model.gamma)
    if spec.family is Family.ZIP:
        return ZIP(mu, p)
    return ZINB(mu, np.full_like(mu, model.k), p)

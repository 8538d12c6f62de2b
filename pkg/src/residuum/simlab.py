"""Simulation scenarios and the Monte-Carlo type-I error / power driver.

Scenarios
---------
``FinitePMF-NoCovariate``
    y from the PMF {0: 0.25, 1: 0.5, 2: 0.25}; the wrong model is
    {0: 0.1, 1: 0.8, 2: 0.1}.  Nothing is fitted.
``SinePoisson``
    x ~ U(0, 2 pi), y ~ Poisson(exp(-1 + 2 sin 2x)); wrong model is a
    Poisson regression linear in x.
``NBQuadratic``
    x ~ U(-1.5, 1.5), y ~ NB(mu = exp(b1 x^2), k = 2); effect level b1 in
    {0.5, 1, 2}; wrong model is NB linear in x.
``NBvsPoissonDispersion``
    x ~ U(-1, 2), y ~ NB(mu = exp(1 + 2x), k); effect level k in {1, 2, 10};
    wrong model is Poisson with the same mean form.
``ZIPvsPoisson``
    x ~ U(-1, 2), y ~ ZIP(lam = exp(1 + 2x), p); effect level p in
    {0.1, 0.3, 0.5}; wrong model is Poisson with the same mean form.

Policies: the "true" model is *fitted* (not evaluated at the generating
parameters); covariates are redrawn in every replicate; replicates whose fit
fails or does not converge are excluded from the rejection-rate denominator
and counted in ``failures``.  A cell with more than 5% failures is invalid.

Every replicate draws from ``SeedSequence(master_seed, spawn_key=(scenario,
n, level, rep))``, so results do not depend on evaluation order or on
which other cells or residual kinds were requested.
"""

from __future__ import annotations

import csv
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from .distributions import NegBinomial, Poisson, PredictiveLaw, ZIP, FinitePMF
from .gof import ks_uniform, shapiro_wilk
from .regression import Family, FitError, ModelSpec, fit, predictive_laws
from .residuals import ResidualKind, compute, rpp

logger = logging.getLogger(__name__)

__all__ = [
    "Scenario",
    "SCENARIOS",
    "DEFAULT_SIZES",
    "SW_KINDS",
    "CellResult",
    "PowerRow",
    "PowerStudyResult",
    "get_scenario",
    "generate",
    "fit_form",
    "run_cell",
    "run_grid",
    "illustrative_wrong_pmf",
    "TRUE_PMF",
    "WRONG_PMF",
]

DEFAULT_SIZES = (20, 50, 100, 200, 400, 600, 800, 1000)
DEFAULT_REPS = 500
MAX_FAILURE_SHARE = 0.05
SW_KINDS = (ResidualKind.NRPP, ResidualKind.NMPP, ResidualKind.DEVIANCE, ResidualKind.PEARSON)

TRUE_PMF = FinitePMF([0, 1, 2], [0.25, 0.5, 0.25])
WRONG_PMF = FinitePMF([0, 1, 2], [0.1, 0.8, 0.1])


def _intercept(*cols):
    return np.column_stack([np.ones_like(cols[0]), *cols])


@dataclass(frozen=True)
class ModelForm:
    """A model family plus a map from the covariate to its mean design."""

    family: Family | None
    design: Callable[[np.ndarray], np.ndarray] | None
    label: str
    fixed_law: PredictiveLaw | None = None


@dataclass(frozen=True)
class Scenario:
    name: str
    code: int
    levels: tuple[float, ...]
    level_name: str
    covariate_range: tuple[float, float] | None
    true_form: ModelForm
    wrong_form: ModelForm
    simulate: Callable | None = field(repr=False)

    @property
    def default_level(self) -> float | None:
        return self.levels[len(self.levels) // 2] if self.levels else None

    def check_level(self, level):
        if not self.levels:
            if level is not None:
                raise ValueError(f"{self.name} takes no effect level")
            return None
        if level is None:
            return self.default_level
        for allowed in self.levels:
            if math.isclose(float(level), allowed):
                return allowed
        raise ValueError(f"{self.name}: effect level {level} not in {self.levels}")


def _sim_sine(rng, x, level):
    return Poisson(np.exp(-1.0 + 2.0 * np.sin(2.0 * x))).sample(rng)


def _sim_nb_quadratic(rng, x, level):
    return NegBinomial(np.exp(level * x**2), 2.0).sample(rng)


def _sim_nb_dispersion(rng, x, level):
    return NegBinomial(np.exp(1.0 + 2.0 * x), level).sample(rng)


def _sim_zip(rng, x, level):
    return ZIP(np.exp(1.0 + 2.0 * x), level).sample(rng)


SCENARIOS: dict[str, Scenario] = {
    s.name: s
    for s in (
        Scenario(
            "FinitePMF-NoCovariate", 0, (), "", None,
            ModelForm(None, None, "p0", fixed_law=TRUE_PMF),
            ModelForm(None, None, "p1", fixed_law=WRONG_PMF),
            None,
        ),
        Scenario(
            "SinePoisson", 1, (), "", (0.0, 2.0 * math.pi),
            ModelForm(Family.POISSON, lambda x: _intercept(np.sin(2.0 * x)), "poisson sin(2x)"),
            ModelForm(Family.POISSON, lambda x: _intercept(x), "poisson linear"),
            _sim_sine,
        ),
        Scenario(
            "NBQuadratic", 2, (0.5, 1.0, 2.0), "beta1", (-1.5, 1.5),
            ModelForm(Family.NEGBIN, lambda x: _intercept(x**2), "negbin quadratic"),
            ModelForm(Family.NEGBIN, lambda x: _intercept(x), "negbin linear"),
            _sim_nb_quadratic,
        ),
        Scenario(
            "NBvsPoissonDispersion", 3, (1.0, 2.0, 10.0), "k", (-1.0, 2.0),
            ModelForm(Family.NEGBIN, lambda x: _intercept(x), "negbin linear"),
            ModelForm(Family.POISSON, lambda x: _intercept(x), "poisson linear"),
            _sim_nb_dispersion,
        ),
        Scenario(
            "ZIPvsPoisson", 4, (0.1, 0.3, 0.5), "p", (-1.0, 2.0),
            ModelForm(Family.ZIP, lambda x: _intercept(x), "zip linear"),
            ModelForm(Family.POISSON, lambda x: _intercept(x), "poisson linear"),
            _sim_zip,
        ),
    )
}


def get_scenario(name) -> Scenario:
    if isinstance(name, Scenario):
        return name
    for key, scenario in SCENARIOS.items():
        if key.lower() == str(name).lower():
            return scenario
    raise ValueError(f"unknown scenario {name!r}; choose from {sorted(SCENARIOS)}")


def _as_generator(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def generate(scenario, n: int, effect_level=None, seed=None):
    """Draw one dataset; covariates first, then responses.

    Returns:
        ``(x, y)``; ``x`` is ``None`` for the no-covariate scenario.
    """
    scenario = get_scenario(scenario)
    level = scenario.check_level(effect_level)
    if n < 1:
        raise ValueError("n must be positive")
    rng = _as_generator(seed)
    if scenario.covariate_range is None:
        return None, TRUE_PMF.sample(rng, size=n).astype(np.int64)
    lo, hi = scenario.covariate_range
    x = rng.uniform(lo, hi, size=n)
    return x, np.asarray(scenario.simulate(rng, x, level), dtype=np.int64)


def fit_form(form: ModelForm, x, y) -> PredictiveLaw:
    """Fit a scenario model form and return its predictive laws.

    Raises:
        FitError: if the fit fails or does not converge.
    """
    if form.fixed_law is not None:
        return form.fixed_law
    spec = ModelSpec(form.family, form.design(x))
    model = fit(spec, y)
    if not model.converged:
        raise FitError(f"{form.label}: {model.message or 'did not converge'}")
    return predictive_laws(model, spec)


def _level_key(level) -> int:
    return 0 if level is None else int(round(float(level) * 1000))


def replicate_seed(master_seed: int, scenario: Scenario, n: int, level, rep: int):
    return np.random.SeedSequence(
        master_seed, spawn_key=(scenario.code, int(n), _level_key(level), int(rep))
    )


def _sw_pvalue(values) -> float:
    try:
        return shapiro_wilk(values).p_value
    except ValueError:
        # constant residuals are as non-normal as it gets
        return 0.0


def _one_replicate(args):
    scenario_name, n, level, rep, master_seed, kinds = args
    scenario = get_scenario(scenario_name)
    data_ss, true_ss, wrong_ss = replicate_seed(master_seed, scenario, n, level, rep).spawn(3)
    x, y = generate(scenario, n, level, data_ss)
    out = {}
    for form_name, form, ss in (
        ("true", scenario.true_form, true_ss),
        ("wrong", scenario.wrong_form, wrong_ss),
    ):
        try:
            laws = fit_form(form, x, y)
        except (FitError, ValueError, ArithmeticError, np.linalg.LinAlgError) as exc:
            logger.debug("%s n=%d level=%s rep=%d %s fit failed: %s",
                         scenario.name, n, level, rep, form_name, exc)
            out[form_name] = None
            continue
        pvals = {}
        for kind in kinds:
            rng = np.random.default_rng(ss)
            try:
                resid = compute(kind, laws, y, rng=rng)
                pvals[kind] = _sw_pvalue(resid.values)
            except ArithmeticError:
                pvals[kind] = math.nan
        out[form_name] = pvals
    return out


@dataclass(frozen=True)
class CellResult:
    scenario: str
    kind: ResidualKind
    n: int
    level: float | None
    type1_rate: float
    power: float
    reps: int
    failures_true: int
    failures_wrong: int
    master_seed: int
    alpha: float

    @property
    def valid(self) -> bool:
        limit = MAX_FAILURE_SHARE * self.reps
        return self.failures_true <= limit and self.failures_wrong <= limit


def _run_replicates(scenario, n, level, kinds, reps, master_seed, workers):
    jobs = [(scenario.name, n, level, r, master_seed, tuple(kinds)) for r in range(reps)]
    if workers and workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(_one_replicate, jobs, chunksize=max(1, reps // (4 * workers))))
    return [_one_replicate(job) for job in jobs]


def _summarize(scenario, n, level, kind, results, reps, master_seed, alpha) -> CellResult:
    rates = {}
    failures = {}
    for form in ("true", "wrong"):
        pv = [r[form][kind] for r in results if r[form] is not None]
        pv = [p for p in pv if not math.isnan(p)]
        failures[form] = reps - len(pv)
        rates[form] = float(np.mean(np.asarray(pv) < alpha)) if pv else math.nan
    cell = CellResult(
        scenario.name, kind, n, level, rates["true"], rates["wrong"], reps,
        failures["true"], failures["wrong"], master_seed, alpha,
    )
    if not cell.valid:
        logger.warning("%s n=%d level=%s %s: invalid cell (%d/%d failed fits)",
                       scenario.name, n, level, kind.value,
                       max(cell.failures_true, cell.failures_wrong), reps)
    return cell


def run_cell(
    scenario,
    n: int,
    effect_level=None,
    residual_kind=ResidualKind.NRPP,
    reps: int = DEFAULT_REPS,
    master_seed: int = 0,
    alpha: float = 0.05,
    workers: int = 1,
) -> CellResult:
    """Type-I error (true form) and power (wrong form) of SW on one residual kind."""
    scenario = get_scenario(scenario)
    level = scenario.check_level(effect_level)
    kind = ResidualKind(residual_kind)
    if kind not in SW_KINDS:
        raise ValueError(f"SW is applied to {[k.value for k in SW_KINDS]}, not {kind.value}")
    if reps < 1:
        raise ValueError("reps must be at least 1")
    results = _run_replicates(scenario, n, level, [kind], reps, master_seed, workers)
    return _summarize(scenario, n, level, kind, results, reps, master_seed, alpha)


@dataclass(frozen=True)
class PowerRow:
    scenario: str
    kind: str
    n: int
    level: float | None
    model_form: str
    rejection_rate: float
    reps: int
    failures: int
    seed: int


CSV_COLUMNS = ("scenario", "kind", "n", "level", "model_form", "rejection_rate",
               "reps", "failures", "seed")


@dataclass
class PowerStudyResult:
    rows: list[PowerRow]
    cells: list[CellResult]

    def to_csv(self, path) -> Path:
        path = Path(path)
        with path.open("w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(CSV_COLUMNS)
            for r in self.rows:
                writer.writerow([
                    r.scenario, r.kind, r.n, "" if r.level is None else repr(r.level),
                    r.model_form, repr(r.rejection_rate), r.reps, r.failures, r.seed,
                ])
        return path

    def select(self, **filters) -> list[PowerRow]:
        return [r for r in self.rows if all(getattr(r, k) == v for k, v in filters.items())]


def run_grid(
    scenario,
    sizes: Sequence[int] = DEFAULT_SIZES,
    effect_levels: Sequence[float] | None = None,
    residual_kinds: Sequence = SW_KINDS,
    reps: int = DEFAULT_REPS,
    master_seed: int = 0,
    alpha: float = 0.05,
    workers: int = 1,
    progress: Callable[[CellResult], None] | None = None,
) -> PowerStudyResult:
    """Full cross-product of sizes x effect levels x residual kinds.

    Each replicate is simulated and fitted once and shared by all residual
    kinds; because streams are keyed by (scenario, n, level, rep), each cell
    equals the corresponding :func:`run_cell` call exactly.
    """
    scenario = get_scenario(scenario)
    if not sizes:
        raise ValueError("sizes must be nonempty")
    if effect_levels is None:
        levels = list(scenario.levels) or [None]
    else:
        levels = [scenario.check_level(lv) for lv in effect_levels]
        if not levels:
            raise ValueError("effect_levels must be nonempty")
    kinds = [ResidualKind(k) for k in residual_kinds]
    if not kinds or any(k not in SW_KINDS for k in kinds):
        raise ValueError(f"residual kinds must be a nonempty subset of {[k.value for k in SW_KINDS]}")
    for n in sizes:
        if int(n) < 3:
            raise ValueError("sample sizes must be at least 3")
    rows: list[PowerRow] = []
    cells: list[CellResult] = []
    for n in sizes:
        for level in levels:
            results = _run_replicates(scenario, int(n), level, kinds, reps, master_seed, workers)
            for kind in kinds:
                cell = _summarize(scenario, int(n), level, kind, results, reps, master_seed, alpha)
                cells.append(cell)
                if progress is not None:
                    progress(cell)
                rows.append(PowerRow(scenario.name, kind.value, int(n), level, "true",
                                     cell.type1_rate, reps, cell.failures_true, master_seed))
                rows.append(PowerRow(scenario.name, kind.value, int(n), level, "wrong",
                                     cell.power, reps, cell.failures_wrong, master_seed))
    return PowerStudyResult(rows, cells)


@dataclass(frozen=True)
class Illustration:
    y: np.ndarray
    rpp_true: np.ndarray
    rpp_wrong: np.ndarray
    wrong_interval_mass: dict[str, float]
    ks_true: float
    ks_wrong: float


def illustrative_wrong_pmf(n: int = 2000, seed: int = 0) -> Illustration:
    """RPPs of finite-PMF data under the generating PMF and a too-narrow one.

    Under the wrong PMF, zeros map into (0, 0.1), ones into (0.1, 0.9) and
    twos into (0.9, 1); the reported masses are the observed shares there.
    """
    if n < 100:
        raise ValueError("n must be at least 100")
    data_ss, true_ss, wrong_ss = np.random.SeedSequence(seed).spawn(3)
    _, y = generate("FinitePMF-NoCovariate", n, None, data_ss)
    r_true = rpp(TRUE_PMF, y, np.random.default_rng(true_ss)).values
    r_wrong = rpp(WRONG_PMF, y, np.random.default_rng(wrong_ss)).values
    masses = {
        "(0,0.1)": float(np.mean(r_wrong < 0.1)),
        "(0.1,0.9)": float(np.mean((r_wrong > 0.1) & (r_wrong < 0.9))),
        "(0.9,1)": float(np.mean(r_wrong > 0.9)),
    }
    return Illustration(
        y, r_true, r_wrong, masses, ks_uniform(r_true).p_value, ks_uniform(r_wrong).p_value
    )

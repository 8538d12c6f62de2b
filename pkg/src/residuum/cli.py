"""``residuum`` command-line interface.

Subcommands:

* ``fit``: fit a count regression to a CSV file and write a summary plus a
  machine-readable report bundle.
* ``diagnose``: fit, then emit residuals, QQ plot data, goodness-of-fit tests
  and replicated Shapiro-Wilk p-values.
* ``simulate``: run a power-study grid for a named simulation scenario.

Exit codes: 0 success, 2 input error, 3 non-convergence, 4 numeric failure.
Settings come from flags, then a ``--config`` file (YAML or JSON), then
defaults; the seed additionally falls back to ``$RESIDUUM_SEED``.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path

import numpy as np
import yaml

from . import dataio, gof, simlab
from .regression import Family, FitError, fit, predictive_laws
from .residuals import ResidualKind, aggregate_stats, compute
from .special import DomainError

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_NOT_CONVERGED = 3
EXIT_NUMERIC = 4

SEED_ENV = "RESIDUUM_SEED"
COUNT_FAMILIES = ("poisson", "negbin", "zip", "zinb")
ALL_KINDS = ("rpp", "nrpp", "mpp", "nmpp", "pearson", "deviance")
UNIFORM_KINDS = {ResidualKind.RPP, ResidualKind.MPP}

DEFAULTS = {
    "family": "poisson",
    "mean_covariates": "",
    "zero_covariates": "",
    "replicates": 1000,
    "alpha": 0.05,
    "out": "residuum-out",
    "kinds": None,
    "sizes": ",".join(str(n) for n in simlab.DEFAULT_SIZES),
    "levels": None,
    "reps": simlab.DEFAULT_REPS,
    "workers": 1,
    "seed": 0,
}


class UsageError(Exception):
    """Raised in place of argparse's own exit so codes stay in our taxonomy."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _add_common(p: argparse.ArgumentParser) -> None:
    # defaults are None so that config-file values can be told apart from flags
    p.add_argument("--config", help="YAML or JSON file of settings (flags take precedence)")
    p.add_argument("--seed", type=int, default=None, help=f"master seed (fallback: ${SEED_ENV}, then 0)")
    p.add_argument("--alpha", type=float, default=None, help="significance level (default 0.05)")
    p.add_argument("--out", default=None, help="output directory (default residuum-out)")


def _add_model(p: argparse.ArgumentParser) -> None:
    p.add_argument("csv", help="input CSV with a header row")
    p.add_argument("--family", choices=COUNT_FAMILIES, default=None)
    p.add_argument("--response", default=None, help="response column")
    p.add_argument("--mean-covariates", default=None, help="comma-separated mean covariates")
    p.add_argument("--zero-covariates", default=None,
                   help="comma-separated zero-inflation covariates (zip/zinb)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="residuum", description=__doc__.split("\n\n")[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p_fit = sub.add_parser("fit", help="fit a count regression model")
    _add_model(p_fit)
    _add_common(p_fit)

    p_diag = sub.add_parser("diagnose", help="fit and emit residual diagnostics")
    _add_model(p_diag)
    _add_common(p_diag)
    p_diag.add_argument("--kinds", default=None, help="comma-separated residual kinds (default: all six)")
    p_diag.add_argument("--replicates", type=int, default=None,
                        help="replicated SW realizations (default 1000)")

    p_sim = sub.add_parser("simulate", help="run a power-study grid")
    p_sim.add_argument("--scenario", default=None, help=f"one of {sorted(simlab.SCENARIOS)}")
    p_sim.add_argument("--sizes", default=None, help="comma-separated sample sizes")
    p_sim.add_argument("--levels", default=None, help="comma-separated effect levels")
    p_sim.add_argument("--kinds", default=None, help="comma-separated residual kinds for SW")
    p_sim.add_argument("--reps", type=int, default=None, help="replicates per cell (default 500)")
    p_sim.add_argument("--workers", type=int, default=None, help="worker processes")
    _add_common(p_sim)
    return parser


def _load_config(path: str | None) -> dict:
    if path is None:
        return {}
    try:
        with open(path, encoding="utf-8") as fh:
            data = yaml.safe_load(fh)
    except OSError as exc:
        raise dataio.InputError(f"cannot read config {path}: {exc.strerror or exc}") from None
    except yaml.YAMLError as exc:
        raise dataio.InputError(f"config {path} is not valid YAML/JSON: {exc}") from None
    if data is None:
        return {}
    if not isinstance(data, dict):
        raise dataio.InputError(f"config {path} must hold a mapping of settings")
    return {str(k).replace("-", "_"): v for k, v in data.items()}


def _env_seed() -> int | None:
    raw = os.environ.get(SEED_ENV)
    if raw is None or not raw.strip():
        return None
    try:
        return int(raw)
    except ValueError:
        raise dataio.InputError(f"${SEED_ENV} must be an integer, got {raw!r}") from None


def resolve_settings(args: argparse.Namespace) -> dict:
    """Merge flags over config file over defaults (seed: then env, then 0)."""
    config = _load_config(getattr(args, "config", None))
    flags = {k: v for k, v in vars(args).items() if v is not None}
    merged = dict(DEFAULTS)
    merged.update(config)
    merged.update(flags)
    if "seed" not in flags and "seed" not in config:
        env = _env_seed()
        if env is not None:
            merged["seed"] = env
    for key in ("mean_covariates", "zero_covariates", "kinds", "sizes", "levels"):
        value = merged.get(key)
        if isinstance(value, (list, tuple)):
            merged[key] = ",".join(str(v) for v in value)
    try:
        merged["seed"] = int(merged["seed"])
        merged["alpha"] = float(merged["alpha"])
    except (TypeError, ValueError):
        raise dataio.InputError("seed must be an integer and alpha a number") from None
    if merged["seed"] < 0:
        raise dataio.InputError("seed must be nonnegative")
    if not 0.0 < merged["alpha"] < 1.0:
        raise dataio.InputError("alpha must lie in (0, 1)")
    return merged


def _split(text, cast, what):
    items = [t.strip() for t in str(text).split(",") if t.strip()]
    try:
        return [cast(t) for t in items]
    except ValueError:
        raise dataio.InputError(f"invalid {what}: {text!r}") from None


def _fit_inputs(settings):
    if not settings.get("response"):
        raise dataio.InputError("--response is required")
    family = str(settings["family"]).lower()
    if family not in COUNT_FAMILIES:
        raise dataio.InputError(f"--family must be one of {COUNT_FAMILIES}, got {family!r}")
    data = dataio.read_csv(settings["csv"])
    prepared = dataio.prepare(
        data,
        settings["response"],
        Family(family),
        dataio.parse_covariates(settings["mean_covariates"]),
        dataio.parse_covariates(settings["zero_covariates"]),
    )
    model = fit(prepared.spec, prepared.y)
    return prepared, model


def _write_fit_outputs(out: Path, prepared, model, extra=()) -> None:
    out.mkdir(parents=True, exist_ok=True)
    summary = dataio.format_summary(model, prepared.spec)
    (out / "summary.txt").write_text(summary, encoding="utf-8")
    dataio.write_key_values(out / "report.csv", [*dataio.model_summary_items(model, prepared.dropped), *extra])
    dataio.write_table(
        out / "coefficients.csv", ["part", "term", "estimate", "std_error"],
        dataio.coefficient_rows(model, prepared.spec),
    )
    sys.stdout.write(summary)


def _fit_status(model) -> int:
    if model.converged:
        return EXIT_OK
    logger.error("fit did not converge: %s", model.message or "iteration limit reached")
    return EXIT_NOT_CONVERGED


def cmd_fit(settings) -> int:
    prepared, model = _fit_inputs(settings)
    _write_fit_outputs(Path(settings["out"]), prepared, model)
    return _fit_status(model)


def cmd_diagnose(settings) -> int:
    kinds = _parse_kinds(settings["kinds"], ALL_KINDS)
    R = int(settings["replicates"])
    if R < 1:
        raise dataio.InputError("--replicates must be at least 1")
    n_max = gof.SW_MAX_N
    prepared, model = _fit_inputs(settings)
    n = prepared.y.size
    if not gof.SW_MIN_N <= n <= n_max:
        raise dataio.InputError(f"Shapiro-Wilk needs {gof.SW_MIN_N} <= n <= {n_max}, got n={n}")
    seed = settings["seed"]
    alpha = settings["alpha"]
    out = Path(settings["out"])
    laws = predictive_laws(model, prepared.spec)
    y = prepared.y

    # replicate 0 of the master seed, so the NRPP column equals the first replicated draw
    sets = {kind: compute(kind, laws, y, rng=seed, replicate_id=0) for kind in kinds}
    fitted = np.broadcast_to(laws.mean(), y.shape)

    tests = []
    for kind, res in sets.items():
        if kind in UNIFORM_KINDS:
            t = gof.ks_uniform(res.values)
        else:
            t = gof.shapiro_wilk(res.values)
        tests.append((kind.value, t.method, t.statistic, t.p_value, t.n))
    replicated = gof.replicated_sw(laws, y, R=R, master_seed=seed, threshold=alpha)

    extra = [
        ("seed", seed),
        ("alpha", alpha),
        ("replicates", R),
        ("replicated_sw_fraction_above_alpha", replicated.fraction_above),
        ("replicated_sw_fraction_below_alpha", replicated.fraction_below),
    ]
    kinds_present = {k.value for k in kinds}
    if {"pearson", "deviance"} <= kinds_present:
        x2, d = aggregate_stats(sets[ResidualKind.PEARSON], sets[ResidualKind.DEVIANCE])
        extra += [("pearson_x2", x2), ("deviance_d", d)]
    for kind, method, stat, p, _ in tests:
        extra += [(f"{method}_{kind}_statistic", stat), (f"{method}_{kind}_p_value", p)]

    _write_fit_outputs(out, prepared, model, extra)
    covs = list(prepared.covariates)
    header = ["index", "y", "fitted_value", *covs, *(k.value for k in kinds)]
    rows = []
    for i in range(y.size):
        rows.append([i, int(y[i]), float(fitted[i]),
                     *(float(prepared.covariates[c][i]) for c in covs),
                     *(float(sets[k].values[i]) for k in kinds)])
    dataio.write_table(out / "residuals.csv", header, rows)
    for kind, res in sets.items():
        if kind not in UNIFORM_KINDS:
            dataio.write_table(out / f"qq_{kind.value}.csv", ["rank", "theoretical", "sample"],
                               dataio.qq_rows(res.values))
    dataio.write_table(out / "gof.csv", ["kind", "test", "statistic", "p_value", "n"], tests)
    dataio.write_table(out / "replicated_sw.csv", ["replicate", "p_value"],
                       [(r, float(p)) for r, p in enumerate(replicated.p_values)])
    print(f"replicated SW: {replicated.fraction_above:.3f} of {R} p-values above {alpha}")
    return _fit_status(model)


def _parse_kinds(text, allowed) -> list[ResidualKind]:
    if text is None:
        return [ResidualKind(k) for k in allowed]
    names = _split(text, str.lower, "kinds")
    if not names:
        raise dataio.InputError("--kinds must name at least one residual kind")
    for k in names:
        if k not in allowed:
            raise dataio.InputError(f"unsupported residual kind {k!r}; choose from {list(allowed)}")
    return [ResidualKind(k) for k in dict.fromkeys(names)]


def cmd_simulate(settings) -> int:
    name = settings.get("scenario")
    if not name:
        raise dataio.InputError("--scenario is required")
    try:
        scenario = simlab.get_scenario(name)
    except (KeyError, ValueError):
        raise dataio.InputError(f"unknown scenario {name!r}; choose from {sorted(simlab.SCENARIOS)}") from None
    sizes = _split(settings["sizes"], int, "sizes")
    levels = _split(settings["levels"], float, "levels") if settings.get("levels") else None
    kinds = _parse_kinds(settings["kinds"], tuple(k.value for k in simlab.SW_KINDS))
    reps = int(settings["reps"])
    out = Path(settings["out"])
    log_lines = []

    def progress(cell):
        flag = "ok" if cell.valid else "INVALID"
        level = "" if cell.level is None else f" level={cell.level!r}"
        log_lines.append(
            f"{cell.scenario} n={cell.n}{level} kind={cell.kind.value} "
            f"type1={cell.type1_rate!r} power={cell.power!r} "
            f"failures_true={cell.failures_true} failures_wrong={cell.failures_wrong} {flag}"
        )
        logger.info(log_lines[-1])

    try:
        result = simlab.run_grid(
            scenario, sizes=sizes, effect_levels=levels, residual_kinds=kinds, reps=reps,
            master_seed=settings["seed"], alpha=settings["alpha"],
            workers=int(settings["workers"]), progress=progress,
        )
    except ValueError as exc:
        raise dataio.InputError(str(exc)) from None
    out.mkdir(parents=True, exist_ok=True)
    result.to_csv(out / "power.csv")
    (out / "cells.log").write_text("\n".join(log_lines) + "\n", encoding="utf-8")
    print(f"wrote {len(result.rows)} rows to {out / 'power.csv'}")
    return EXIT_OK


COMMANDS = {"fit": cmd_fit, "diagnose": cmd_diagnose, "simulate": cmd_simulate}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"residuum: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        settings = resolve_settings(args)
        return COMMANDS[args.command](settings)
    except (dataio.InputError, FitError) as exc:
        # rank deficiency and degenerate data are problems with the input
        print(f"residuum: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (ArithmeticError, DomainError, np.linalg.LinAlgError) as exc:
        print(f"residuum: numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())

"""CSV ingestion and report / plot-data emission."""

from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .regression import Family, FittedModel, ModelSpec

logger = logging.getLogger(__name__)

MISSING = {"", "na", "nan", "null", "none"}


class InputError(ValueError):
    """Bad user input: unreadable file, malformed CSV, unknown column, bad values."""


@dataclass
class Dataset:
    """A rectangular table read from CSV; values stay strings until used."""

    columns: list[str]
    rows: list[list[str]] = field(repr=False)
    line_numbers: list[int] = field(repr=False)
    path: str = ""

    @property
    def n(self) -> int:
        return len(self.rows)

    def column(self, name: str) -> np.ndarray:
        """Numeric column; missing markers become NaN."""
        try:
            j = self.columns.index(name)
        except ValueError:
            raise InputError(f"column {name!r} not found in {self.path or 'data'}") from None
        out = np.empty(self.n)
        for i, row in enumerate(self.rows):
            raw = row[j].strip()
            if raw.lower() in MISSING:
                out[i] = math.nan
                continue
            try:
                out[i] = float(raw)
            except ValueError:
                raise InputError(
                    f"{self.path or 'data'}: line {self.line_numbers[i]}: "
                    f"column {name!r} value {raw!r} is not numeric"
                ) from None
        return out


def read_csv(path) -> Dataset:
    """Read a comma-separated UTF-8 file with a header row.

    Raises:
        InputError: unreadable file, empty file, or a row whose field count
            differs from the header (the message names the line).
    """
    path = Path(path)
    try:
        with path.open(newline="", encoding="utf-8") as fh:
            reader = csv.reader(fh)
            try:
                header = next(reader)
            except StopIteration:
                raise InputError(f"{path}: file is empty") from None
            header = [h.strip() for h in header]
            if len(set(header)) != len(header):
                raise InputError(f"{path}: line 1: duplicate column names")
            rows, lines = [], []
            for row in reader:
                if not row or all(not c.strip() for c in row):
                    continue
                if len(row) != len(header):
                    raise InputError(
                        f"{path}: line {reader.line_num}: expected {len(header)} fields, got {len(row)}"
                    )
                rows.append(row)
                lines.append(reader.line_num)
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror or exc}") from None
    except (csv.Error, UnicodeDecodeError) as exc:
        raise InputError(f"{path}: malformed CSV: {exc}") from None
    return Dataset(header, rows, lines, str(path))


def parse_covariates(text: str | None) -> list[str]:
    """Comma-separated covariate names; empty or ``1`` means intercept only."""
    if text is None:
        return []
    names = [t.strip() for t in text.split(",") if t.strip()]
    return [t for t in names if t != "1"]


@dataclass
class Prepared:
    spec: ModelSpec
    y: np.ndarray
    covariates: dict[str, np.ndarray]
    dropped: int


def prepare(
    data: Dataset,
    response: str,
    family: Family,
    mean_covariates: list[str],
    zero_covariates: list[str] | None = None,
) -> Prepared:
    """Build the model spec, dropping rows with missing values in used columns."""
    family = Family(family)
    zero_covariates = zero_covariates or []
    if zero_covariates and not family.zero_inflated:
        raise InputError(f"--zero-covariates only applies to zip/zinb, not {family.value}")
    used = [response, *dict.fromkeys(mean_covariates + zero_covariates)]
    cols = {name: data.column(name) for name in used}
    keep = np.ones(data.n, dtype=bool)
    for values in cols.values():
        keep &= ~np.isnan(values)
    dropped = int(data.n - keep.sum())
    if dropped:
        logger.warning("dropped %d row(s) with missing values in used columns", dropped)
    cols = {k: v[keep] for k, v in cols.items()}
    y = cols[response]
    if y.size == 0:
        raise InputError("no complete rows left")
    if family is not Family.NORMAL:
        bad = (y < 0) | (y != np.floor(y))
        if bad.any():
            first = int(np.flatnonzero(keep)[np.flatnonzero(bad)[0]])
            raise InputError(
                f"line {data.line_numbers[first]}: response {response!r} must be a nonnegative "
                f"integer for {family.value}"
            )
    n = y.size
    X = np.column_stack([np.ones(n)] + [cols[c] for c in mean_covariates])
    Z = None
    if family.zero_inflated:
        Z = np.column_stack([np.ones(n)] + [cols[c] for c in zero_covariates])
    spec = ModelSpec(
        family, X, Z,
        mean_names=("(intercept)", *mean_covariates),
        zero_names=("(intercept)", *zero_covariates) if Z is not None else None,
    )
    covs = {c: cols[c] for c in dict.fromkeys(mean_covariates + zero_covariates)}
    return Prepared(spec, y, covs, dropped)


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def write_key_values(path, items) -> Path:
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["key", "value"])
        for key, value in items:
            writer.writerow([key, _fmt(value)])
    return path


def write_table(path, header, rows) -> Path:
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])
    return path


def coefficient_rows(model: FittedModel, spec: ModelSpec):
    rows = []
    for name, est, se in zip(spec.mean_names, model.beta, model.beta_se):
        rows.append(("mean", name, est, se))
    if model.gamma is not None:
        for name, est, se in zip(spec.zero_names, model.gamma, model.gamma_se):
            rows.append(("zero", name, est, se))
    if model.k is not None:
        rows.append(("dispersion", "k", model.k, model.k_std_error))
    return rows


def model_summary_items(model: FittedModel, dropped: int = 0):
    return [
        ("family", model.family.value),
        ("n", model.n_obs),
        ("rows_dropped", dropped),
        ("n_params", model.n_params),
        ("loglik", model.loglik),
        ("aic", model.aic),
        ("converged", model.converged),
        ("iterations", model.iterations),
        ("k", model.k),
        ("k_std_error", model.k_std_error),
        ("k_at_bound", model.k_at_bound if model.k is not None else None),
        ("message", model.message),
    ]


def format_summary(model: FittedModel, spec: ModelSpec) -> str:
    lines = [
        f"{model.family.value} regression, n = {model.n_obs}",
        f"{'part':<6} {'term':<20} {'estimate':>12} {'std.err':>12}",
    ]
    for part, name, est, se in coefficient_rows(model, spec):
        se_txt = "nan" if se is None else f"{se:12.6g}"
        lines.append(f"{part[:6]:<6} {name:<20} {est:12.6g} {se_txt:>12}")
    lines.append(f"log-likelihood = {model.loglik:.6f}   AIC = {model.aic:.4f}")
    status = "converged" if model.converged else "NOT converged"
    lines.append(f"{status} after {model.iterations} iterations")
    if model.message:
        lines.append(f"note: {model.message}")
    return "\n".join(lines) + "\n"


def qq_rows(values: np.ndarray):
    """(rank, theoretical normal quantile, sorted residual) at (i - 0.375)/(n + 0.25)."""
    from .special import std_normal_quantile

    v = np.sort(np.asarray(values, dtype=float))
    n = v.size
    i = np.arange(1, n + 1)
    theo = np.asarray(std_normal_quantile((i - 0.375) / (n + 0.25)))
    return [(int(r), float(t), float(s)) for r, t, s in zip(i, theo, v)]

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import pytest

from residuum.distributions import ZINB, ZIP, NegBinomial, Poisson
from residuum import simlab
from residuum.regression import Family, FittedModel, ModelSpec, fit

FIXTURES = Path(__file__).resolve().parent / "fixtures"

# true parameters for the recovery datasets: log mu = 1 + 2x, x ~ U(-1, 2)
TRUE_BETA = np.array([1.0, 2.0])
TRUE_K = 2.0
TRUE_GAMMA = np.array([math.log(0.3 / 0.7)])
RECOVERY_SEEDS = {"poisson": 101, "negbin": 102, "zip": 103, "zinb": 104}

# the three misspecification studies, run once per session at full scale
GRID_SCENARIOS = ("NBQuadratic", "NBvsPoissonDispersion", "ZIPvsPoisson")
GRID_REPS = 500
GRID_SEED = 0

# one line per acceptance criterion, echoed in the terminal summary
ACCEPTANCE_LINES: list[str] = []


@dataclass
class Recovery:
    spec: ModelSpec
    y: np.ndarray
    model: FittedModel
    truth: np.ndarray


def simulate_family(family: Family, n: int, seed: int):
    """Draw (spec, y) from the recovery design with the true parameters."""
    rng = np.random.default_rng(seed)
    x = rng.uniform(-1.0, 2.0, size=n)
    X = np.column_stack([np.ones(n), x])
    mu = np.exp(X @ TRUE_BETA)
    p = 1.0 / (1.0 + math.exp(-TRUE_GAMMA[0]))
    law = {
        Family.POISSON: lambda: Poisson(mu),
        Family.NEGBIN: lambda: NegBinomial(mu, TRUE_K),
        Family.ZIP: lambda: ZIP(mu, p),
        Family.ZINB: lambda: ZINB(mu, TRUE_K, p),
    }[family]()
    y = law.sample(rng).astype(float)
    return ModelSpec(family, X), y


def true_params(family: Family) -> np.ndarray:
    parts = [TRUE_BETA]
    if family.zero_inflated:
        parts.append(TRUE_GAMMA)
    if family.has_k:
        parts.append([math.log(TRUE_K)])
    return np.concatenate(parts)


@pytest.fixture(scope="session")
def recovery_fits() -> dict[str, Recovery]:
    out = {}
    for name, seed in RECOVERY_SEEDS.items():
        family = Family(name)
        spec, y = simulate_family(family, 5000, seed)
        out[name] = Recovery(spec, y, fit(spec, y), true_params(family))
    return out


@pytest.fixture
def fixtures_dir() -> Path:
    return FIXTURES


@pytest.fixture(scope="session")
def power_grids() -> dict[str, simlab.PowerStudyResult]:
    """Full size x level x SW-kind grids, 500 replicates each (several minutes)."""
    return {name: simlab.run_grid(name, reps=GRID_REPS, master_seed=GRID_SEED) for name in GRID_SCENARIOS}


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)

"""Test fixtures for spillkit.

This file contains fixtures that are used by tests.
Doctest-specific fixtures are in the root conftest.py.
"""

from pathlib import Path
from typing import Callable, Optional

import numpy as np
import pytest
import yaml

from spillkit.conf.models import DgpSpec
from spillkit.panel.dataset import ReturnPanel, prices_from_returns, write_prices_csv
from spillkit.sim.synthdgp import simulate

HERE = Path(__file__).parent
RUN_CONFIG = HERE / "conf" / "test-run-config.yaml"

# Daily-return sized innovations keep simulated prices in a sane range.
RETURN_VARIANCE = 1e-4


def driver_spec(
    n_series: int = 3,
    length: int = 600,
    seed: int = 0,
    drive: float = 0.4,
    innovation: str = "gaussian",
) -> DgpSpec:
    """VAR(1) in which series 1 drives every other series and nothing drives it."""
    beta = 0.1 * np.eye(n_series)
    beta[1:, 0] = drive
    return DgpSpec(
        n_series=n_series,
        beta_true=beta.tolist(),
        sigma_true=(RETURN_VARIANCE * np.eye(n_series)).tolist(),
        innovation=innovation,
        length=length,
        seed=seed,
        series_names=[f"s{i + 1}" for i in range(n_series)],
    )


def white_noise_spec(
    n_series: int = 2, length: int = 500, seed: int = 0, rho: float = 0.0
) -> DgpSpec:
    sigma = RETURN_VARIANCE * ((1 - rho) * np.eye(n_series) + rho)
    return DgpSpec(
        n_series=n_series,
        beta_true=np.zeros((n_series, n_series)).tolist(),
        sigma_true=sigma.tolist(),
        length=length,
        seed=seed,
    )


@pytest.fixture
def driver_panel() -> ReturnPanel:
    return simulate(driver_spec())


@pytest.fixture
def white_noise_panel() -> ReturnPanel:
    return simulate(white_noise_spec())


@pytest.fixture
def write_csv(tmp_path: Path) -> Callable[..., Path]:
    """Write CSV text (a list of lines) to a file in tmp_path."""

    def _write(lines: list[str], name: str = "prices.csv") -> Path:
        path = tmp_path / name
        path.write_text("\n".join(lines) + "\n", encoding="utf-8")
        return path

    return _write


@pytest.fixture
def price_csv(tmp_path: Path, driver_panel: ReturnPanel) -> Path:
    """Prices of the driver panel, in the CSV shape the CLI ingests."""
    return write_prices_csv(prices_from_returns(driver_panel), tmp_path / "prices.csv")


@pytest.fixture
def make_run_config(tmp_path: Path, price_csv: Path) -> Callable[..., Path]:
    """Write the test run config with the price CSV as input and overrides applied."""

    def _make(name: str = "run.yaml", **overrides: object) -> Path:
        data = yaml.safe_load(RUN_CONFIG.read_text(encoding="utf-8"))
        data["input"] = str(price_csv)
        data["out"] = str(tmp_path / "out")
        data.update(overrides)
        path = tmp_path / name
        path.write_text(yaml.safe_dump(data), encoding="utf-8")
        return path

    return _make


@pytest.fixture
def run_config(make_run_config: Callable[..., Path]) -> Path:
    return make_run_config()


def random_stable_beta(
    rng: np.random.Generator, n: int, radius: Optional[float] = 0.8
) -> np.ndarray:
    """Random N x N matrix rescaled to the given spectral radius."""
    beta = rng.normal(size=(n, n))
    current = np.max(np.abs(np.linalg.eigvals(beta)))
    return beta * (radius / current)


def random_covariance(rng: np.random.Generator, n: int) -> np.ndarray:
    a = rng.normal(size=(n, n))
    return a @ a.T / n + 0.5 * np.eye(n)

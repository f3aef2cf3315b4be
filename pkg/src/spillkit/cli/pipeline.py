"""
Stages shared by the subcommands: configuration, data loading, per-level
estimation and error reporting.
"""

import logging
from pathlib import Path
from typing import Any, NoReturn, Optional, Union

import typer

from spillkit.cli.manifest import RunManifest
from spillkit.conf.models import RunConfig
from spillkit.core.exceptions import (
    ConfigError,
    SimulationError,
    SpillkitError,
    ValidationError,
)
from spillkit.core.types import Level
from spillkit.core.utils import parse_float_list
from spillkit.models.qvar import RollingQuantileVar, fit_quantile_var, rolling_quantile_var
from spillkit.models.tvpvar import PriorSpec, TvpVarPath, fit_static_var, fit_tvp_var
from spillkit.panel.dataset import ReturnPanel, fill_missing, ingest_csv, log_returns
from spillkit.sim.synthdgp import simulate
from spillkit.spillover.connectedness import (
    DynamicIndexSeries,
    FevdMatrix,
    average_fevd,
    dynamic_indices,
    gfevd,
)

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_ESTIMATION = 2
EXIT_PARTIAL = 3


def exit_code_for(exc: BaseException) -> int:
    """Exit code for a failed stage: input/config problems 1, computation 2."""
    if isinstance(exc, (ConfigError, ValidationError, SimulationError)):
        return EXIT_INPUT
    return EXIT_ESTIMATION


def report_error(stage: str, exc: Union[BaseException, str]) -> None:
    typer.secho(f"[ERROR] {stage}: {exc}", fg=typer.colors.RED, err=True)


def report_warning(message: str) -> None:
    typer.secho(f"[WARNING] {message}", fg=typer.colors.YELLOW, err=True)


def abort(
    stage: str, exc: BaseException, manifest: Optional[RunManifest] = None
) -> NoReturn:
    """Report a fatal stage failure, write the manifest if possible and exit."""
    report_error(stage, exc)
    code = exit_code_for(exc)
    if manifest is not None:
        manifest.error(f"{stage}: {exc}")
        try:
            manifest.write(code)
        except OSError as write_exc:
            logger.warning("Cannot write manifest: %s", write_exc)
    raise typer.Exit(code=code)


def finish(
    manifest: RunManifest, failures: int, jobs: int, partial: bool = False
) -> None:
    """
    Write the manifest and exit.

    The code is 0 when every job succeeded, 2 when every job failed and 3
    otherwise, including when a job skipped some dates (``partial``).
    """
    if jobs > 0 and failures == jobs:
        code = EXIT_ESTIMATION
    elif failures or partial:
        code = EXIT_PARTIAL
    else:
        code = EXIT_OK
    manifest.write(code)
    if code == EXIT_PARTIAL:
        report_warning(f"Outputs are incomplete: {failures} of {jobs} jobs failed")
    if code != EXIT_OK:
        raise typer.Exit(code=code)


def load_config(config_path: Optional[Path], **overrides: Any) -> RunConfig:
    """
    Load the YAML config and apply command-line overrides.

    ``quantiles`` may be given as a comma separated string.

    Raises:
        typer.Exit: With code 1 if the config is invalid.
    """
    quantiles = overrides.get("quantiles")
    try:
        if isinstance(quantiles, str):
            overrides["quantiles"] = parse_float_list(quantiles)
        cfg = RunConfig.from_yaml(config_path).with_overrides(**overrides)
    except ValueError as exc:
        abort("config", ConfigError(str(exc)))
    except SpillkitError as exc:
        abort("config", exc)
    logger.info("Loaded configuration %s", cfg.sha256()[:12])
    return cfg


def load_returns(cfg: RunConfig, manifest: RunManifest) -> ReturnPanel:
    """
    Returns to analyse: the input price CSV, filled then differenced, or a
    simulated panel when only a ``simulate`` section is configured.
    """
    try:
        if cfg.input is not None:
            manifest.set_input(cfg.input)
            prices = ingest_csv(cfg.input, cfg.date_column, cfg.value_columns)
            panel = log_returns(fill_missing(prices, cfg.max_lookback))
        elif cfg.simulate is not None:
            panel = simulate(cfg.simulate)
        else:
            raise ConfigError("Configure an input CSV or a simulate section")
    except SpillkitError as exc:
        abort("input", exc, manifest)
    logger.info("Loaded %d returns for %d series", panel.n_obs, panel.n_series)
    return panel


def static_fevd(panel: ReturnPanel, cfg: RunConfig, level: Level, horizon: int) -> FevdMatrix:
    """Full-sample decomposition of one level."""
    if level == "mean":
        if cfg.static_method == "tvp_average":
            series = dynamic_indices(
                fit_mean_path(panel, cfg),
                horizon,
                cfg.fevd_sum_from,
                keep_fevd=True,
                workers=cfg.workers,
            )
            assert series.fevds is not None
            return average_fevd(series.fevds)
        state = fit_static_var(panel, cfg.lags)
        beta, sigma = state.beta, state.sigma
    else:
        fit = fit_quantile_var(panel, float(level), lags=cfg.lags)
        beta, sigma = fit.beta, fit.sigma
    return gfevd(beta, sigma, horizon, cfg.fevd_sum_from, panel.series_names)


def fit_mean_path(panel: ReturnPanel, cfg: RunConfig) -> TvpVarPath:
    return fit_tvp_var(
        panel,
        kappa1=cfg.kappa1,
        kappa2=cfg.kappa2,
        prior=PriorSpec(kind="training", window=cfg.burn_in),
        lags=cfg.lags,
    )


def fit_level_path(
    panel: ReturnPanel, cfg: RunConfig, level: Level
) -> Union[TvpVarPath, RollingQuantileVar]:
    """Time-varying fit of one level: TVP-VAR for the mean, rolling QVAR for a quantile."""
    if level == "mean":
        return fit_mean_path(panel, cfg)
    return rolling_quantile_var(
        panel,
        float(level),
        window_len=cfg.window,
        step=cfg.step,
        lags=cfg.lags,
        workers=cfg.workers,
        skip_failures=True,
    )


def level_dynamics(
    path: Union[TvpVarPath, RollingQuantileVar],
    cfg: RunConfig,
    horizon: int,
    keep_fevd: bool = False,
) -> DynamicIndexSeries:
    return dynamic_indices(
        path,
        horizon,
        cfg.fevd_sum_from,
        keep_fevd=keep_fevd,
        skip_failures=True,
        workers=cfg.workers,
    )

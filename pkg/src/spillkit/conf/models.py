"""
Pydantic models for validating spillkit configuration files.

This module defines Pydantic models for validating all configuration files:
- defaults.yaml / user run configs: ``RunConfig``
- the ``simulate`` section of a run config: ``DgpSpec``
"""

from __future__ import annotations

import hashlib
import json
from pathlib import Path
from typing import Any, Literal, Optional, Union

import numpy as np
import yaml
from pydantic import BaseModel, Field, ValidationError, field_validator, model_validator
from typing_extensions import Self

from spillkit.core.exceptions import ConfigError, SimulationError
from spillkit.core.linalg import is_psd, spectral_radius

DEFAULTS_PATH = Path(__file__).parent / "defaults.yaml"

Matrix = list[list[float]]


# ============================ Simulation Spec ============================


class BetaBreakpoint(BaseModel):
    """Coefficient matrix in force from observation ``start`` onwards."""

    start: int = Field(ge=0, description="First observation index the matrix applies to")
    beta: Matrix = Field(description="N x N coefficient matrix")

    model_config = {"extra": "forbid"}


class SigmaBreakpoint(BaseModel):
    """Innovation covariance in force from observation ``start`` onwards."""

    start: int = Field(ge=0, description="First observation index the matrix applies to")
    sigma: Matrix = Field(description="N x N innovation covariance")

    model_config = {"extra": "forbid"}


class DgpSpec(BaseModel):
    """
    Synthetic VAR(1) data generating process.

    ``Y_t = beta_t Y_{t-1} + s_t * eps_t`` where ``eps_t`` has covariance
    ``sigma_t`` and ``s_t = max(1 + scale_loadings @ Y_{t-1}, 0.1)`` scales each
    equation's innovation (lagged-scale heteroskedasticity, off by default).
    """

    n_series: int = Field(ge=1, description="Number of series N")
    beta_true: Matrix = Field(description="N x N coefficient matrix")
    beta_schedule: list[BetaBreakpoint] = Field(
        default_factory=list, description="Optional coefficient breaks"
    )
    sigma_true: Matrix = Field(description="N x N innovation covariance")
    sigma_schedule: list[SigmaBreakpoint] = Field(
        default_factory=list, description="Optional covariance breaks"
    )
    scale_loadings: Optional[Matrix] = Field(
        None, description="N x N loadings of lagged values on innovation scale"
    )
    innovation: Literal["gaussian", "student_t"] = "gaussian"
    df: float = Field(5.0, gt=2.0, description="Student-t degrees of freedom")
    length: int = Field(ge=2, description="Number of returned observations T")
    seed: int = Field(0, ge=0, lt=2**64)
    warmup: int = Field(100, ge=0, description="Discarded initial steps")
    series_names: Optional[list[str]] = None
    start_date: str = "2000-01-03"

    model_config = {"extra": "forbid"}

    @model_validator(mode="after")
    def _check_shapes(self) -> Self:
        n = self.n_series
        matrices = {"beta_true": self.beta_true, "sigma_true": self.sigma_true}
        matrices.update(
            {f"beta_schedule[{i}]": b.beta for i, b in enumerate(self.beta_schedule)}
        )
        matrices.update(
            {f"sigma_schedule[{i}]": s.sigma for i, s in enumerate(self.sigma_schedule)}
        )
        if self.scale_loadings is not None:
            matrices["scale_loadings"] = self.scale_loadings
        for name, value in matrices.items():
            if np.asarray(value, dtype=float).shape != (n, n):
                raise ValueError(f"{name} must be a {n}x{n} matrix")
        if self.series_names is not None and len(self.series_names) != n:
            raise ValueError(f"series_names must have {n} entries")
        return self

    def names(self) -> list[str]:
        """Series names, defaulting to ``y1 .. yN``."""
        if self.series_names is not None:
            return list(self.series_names)
        return [f"y{i + 1}" for i in range(self.n_series)]

    def beta_at(self, t: int) -> np.ndarray:
        """Coefficient matrix in force at observation ``t`` (warm-up has negative t)."""
        beta = np.asarray(self.beta_true, dtype=float)
        for bp in sorted(self.beta_schedule, key=lambda b: b.start):
            if t >= bp.start:
                beta = np.asarray(bp.beta, dtype=float)
        return beta

    def sigma_at(self, t: int) -> np.ndarray:
        """Innovation covariance in force at observation ``t``."""
        sigma = np.asarray(self.sigma_true, dtype=float)
        for bp in sorted(self.sigma_schedule, key=lambda s: s.start):
            if t >= bp.start:
                sigma = np.asarray(bp.sigma, dtype=float)
        return sigma

    def check_admissible(self) -> None:
        """
        Check stationarity and PSD-ness at every scheduled point.

        Raises:
            SimulationError: If a coefficient matrix has spectral radius >= 1 or
                a covariance matrix is not symmetric positive semi-definite.
        """
        betas = [self.beta_true] + [b.beta for b in self.beta_schedule]
        for beta in betas:
            radius = spectral_radius(np.asarray(beta, dtype=float))
            if radius >= 1.0:
                raise SimulationError(
                    f"Unstable coefficient matrix: spectral radius {radius:.4f} >= 1"
                )
        sigmas = [self.sigma_true] + [s.sigma for s in self.sigma_schedule]
        for sigma in sigmas:
            if not is_psd(np.asarray(sigma, dtype=float)):
                raise SimulationError("Innovation covariance is not symmetric PSD")


# ============================ Run Configuration ============================


class RunConfig(BaseModel):
    """
    Complete configuration of a spillover analysis run.

    Loaded from YAML; every key may be overridden from the command line.
    """

    input: Optional[str] = Field(None, description="Price CSV path")
    date_column: str = "date"
    value_columns: Optional[list[str]] = Field(
        None, description="Series to analyse; all non-date columns when omitted"
    )
    max_lookback: int = Field(5, ge=1, description="Longest gap filled forward")
    burn_in: int = Field(200, ge=0, description="Prior training window of the TVP-VAR")
    lags: int = Field(1, ge=1, le=12)
    horizon: int = Field(5, ge=1, le=30, description="GFEVD forecast horizon H")
    robustness_horizon: int = Field(10, ge=1, le=30)
    kappa1: float = Field(0.99, gt=0.9, le=1.0)
    kappa2: float = Field(0.96, gt=0.9, le=1.0)
    include_mean: bool = True
    quantiles: list[float] = Field(default_factory=lambda: [0.5, 0.05, 0.95])
    window: int = Field(200, ge=1, description="Rolling quantile VAR window length")
    step: int = Field(1, ge=1, description="Rolling quantile VAR step")
    threshold: float = Field(0.5, ge=0.0, description="Net network edge threshold, percent")
    out: str = "out"
    fevd_sum_from: Literal[0, 1] = 0
    full_precision: bool = False
    static_method: Literal["ols", "tvp_average"] = "ols"
    graph_formats: list[Literal["graphml", "dot", "json"]] = Field(
        default_factory=lambda: ["graphml", "dot", "json"]
    )
    max_order: int = Field(8, ge=1, description="Upper bound of the BIC lag search")
    workers: int = Field(1, ge=1)
    simulate: Optional[DgpSpec] = None

    model_config = {"extra": "forbid"}

    @field_validator("quantiles")
    @classmethod
    def _check_quantiles(cls, v: list[float]) -> list[float]:
        for tau in v:
            if not 0.0 < tau < 1.0:
                raise ValueError(f"Quantile {tau} is outside (0, 1)")
        if len(set(v)) != len(v):
            raise ValueError("Quantile levels must be distinct")
        return v

    @model_validator(mode="after")
    def _check_horizons(self) -> Self:
        for name in ("horizon", "robustness_horizon"):
            if getattr(self, name) <= self.fevd_sum_from:
                raise ValueError(
                    f"{name} must exceed fevd_sum_from ({self.fevd_sum_from}); "
                    "the decomposition would have no terms"
                )
        return self

    @classmethod
    def from_yaml(cls, path: Union[Path, str, None] = None) -> Self:
        """
        Load a run configuration from a YAML file.

        Keys missing from the file take the packaged defaults.

        Args:
            path: Path to the YAML config file. If None, uses the defaults.

        Returns:
            RunConfig: Validated configuration.

        Raises:
            ConfigError: If the file cannot be read, is not valid YAML, or fails
                schema validation.
        """
        raw: dict[str, Any] = _load_yaml_mapping(DEFAULTS_PATH)
        if path is not None:
            raw.update(_load_yaml_mapping(Path(path)))
        try:
            return cls.model_validate(raw)
        except ValidationError as exc:
            raise ConfigError(f"Invalid configuration: {exc}") from exc

    def with_overrides(self, **overrides: Any) -> Self:
        """
        Return a re-validated copy with the non-None overrides applied.

        Example:
            >>> RunConfig().with_overrides(horizon=10, threshold=None).horizon
            10
        """
        update = {k: v for k, v in overrides.items() if v is not None}
        data = self.model_dump()
        data.update(update)
        try:
            return type(self).model_validate(data)
        except ValidationError as exc:
            raise ConfigError(f"Invalid configuration override: {exc}") from exc

    def levels(self) -> list[Union[str, float]]:
        """Analysis levels in run order: ``"mean"`` first, then each quantile."""
        levels: list[Union[str, float]] = ["mean"] if self.include_mean else []
        levels.extend(self.quantiles)
        return levels

    def sha256(self) -> str:
        """Digest of the canonical JSON form of the configuration."""
        canonical = json.dumps(self.model_dump(mode="json"), sort_keys=True)
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def _load_yaml_mapping(path: Path) -> dict[str, Any]:
    try:
        with open(path, "r", encoding="utf-8") as f:
            raw = yaml.safe_load(f)
    except OSError as exc:
        raise ConfigError(f"Cannot read config file '{path}': {exc}") from exc
    except yaml.YAMLError as exc:
        raise ConfigError(f"Config file '{path}' is not valid YAML: {exc}") from exc
    if raw is None:
        return {}
    if not isinstance(raw, dict):
        raise ConfigError(f"Config file '{path}' must contain a mapping")
    return raw

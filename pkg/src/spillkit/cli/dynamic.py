from pathlib import Path
from typing import Optional

import typer

from spillkit.cli.cli_formatting import print_artifacts
from spillkit.cli.manifest import RunManifest
from spillkit.cli.pipeline import (
    finish,
    fit_level_path,
    level_dynamics,
    load_config,
    load_returns,
    report_error,
    report_warning,
)
from spillkit.core.exceptions import SpillkitError
from spillkit.core.utils import level_label
from spillkit.spillover.connectedness import (
    dynamic_to_json,
    fevd_dump_to_json,
    tci_correlation,
)


def dynamic(
    config: Optional[Path] = typer.Option(
        None, "--config", "-c", help="YAML run configuration."
    ),
    horizon: Optional[int] = typer.Option(
        None, "--horizon", help="Forecast horizon H of the decomposition."
    ),
    quantiles: Optional[str] = typer.Option(
        None, "--quantiles", help="Comma separated quantile levels, e.g. 0.05,0.5,0.95."
    ),
    window: Optional[int] = typer.Option(
        None, "--window", help="Rolling window length of the quantile VAR."
    ),
    threshold: Optional[float] = typer.Option(
        None, "--threshold", help="Net network edge threshold in percent."
    ),
    out: Optional[str] = typer.Option(None, "--out", help="Output directory."),
    robustness: bool = typer.Option(
        False,
        "--robustness",
        help="Also run every level at the robustness horizon and compare TCI series.",
    ),
    dump_fevd: bool = typer.Option(
        False, "--dump-fevd", help="Write the per-date decomposition matrices."
    ),
):
    """
    Dynamic spillover indices per level.

    The mean level uses the TVP-VAR path, each quantile a rolling-window
    quantile VAR. Writes {level}_dynamic.json and, on request,
    {level}_fevd.json and the robustness series {level}_dynamic_h{H}.json.
    Dates that fail are skipped and flag the run as partial.
    """
    cfg = load_config(
        config,
        horizon=horizon,
        quantiles=quantiles,
        window=window,
        threshold=threshold,
        out=out,
    )
    manifest = RunManifest("dynamic", cfg.out, cfg)
    panel = load_returns(cfg, manifest)
    out_dir = Path(cfg.out)

    levels = cfg.levels()
    failures = 0
    skipped: dict[str, list[str]] = {}
    correlations: dict[str, float] = {}
    for level in levels:
        label = level_label(level)
        try:
            path = fit_level_path(panel, cfg, level)
            series = level_dynamics(path, cfg, cfg.horizon, keep_fevd=dump_fevd)
            manifest.record(dynamic_to_json(series, out_dir / f"{label}_dynamic.json"))
            if dump_fevd:
                manifest.record(fevd_dump_to_json(series, out_dir / f"{label}_fevd.json"))
            if robustness:
                h = cfg.robustness_horizon
                alt = level_dynamics(path, cfg, h)
                manifest.record(dynamic_to_json(alt, out_dir / f"{label}_dynamic_h{h}.json"))
                correlations[label] = tci_correlation(series, alt)
                typer.echo(
                    f"{label}: TCI correlation H={cfg.horizon} vs H={h} is "
                    f"{correlations[label]:.3f}"
                )
        except SpillkitError as exc:
            report_error(f"dynamic {label}", exc)
            manifest.error(f"dynamic {label}: {exc}")
            failures += 1
            continue

        missing = list(series.failed_dates) + list(getattr(path, "failed_dates", ()))
        if missing:
            skipped[label] = sorted(d.strftime("%Y-%m-%d") for d in missing)
            report_warning(f"{label}: {len(missing)} dates skipped")

    manifest.note("skipped_dates", skipped)
    if robustness:
        manifest.note("robustness_tci_correlation", correlations)
    print_artifacts(manifest.artifacts)
    finish(manifest, failures, len(levels), partial=bool(skipped))

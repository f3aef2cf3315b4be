from pathlib import Path
from typing import Optional

import typer

from spillkit.cli.cli_formatting import print_frame_table, write_table_csv
from spillkit.cli.manifest import RunManifest
from spillkit.cli.pipeline import abort, finish, load_config, load_returns, report_warning
from spillkit.core.exceptions import SpillkitError
from spillkit.stats.diagnostics import diagnostics_table, select_var_order

DIAGNOSTICS_FILE = "diagnostics.csv"


def diagnose(
    config: Optional[Path] = typer.Option(
        None, "--config", "-c", help="YAML run configuration."
    ),
    out: Optional[str] = typer.Option(None, "--out", help="Output directory."),
    full_precision: bool = typer.Option(
        False, "--full-precision", help="Write unrounded values."
    ),
):
    """
    Descriptive statistics, Jarque-Bera and ADF tests for every return series.

    Writes diagnostics.csv, one row per series, and records the BIC lag order.
    """
    cfg = load_config(config, out=out, full_precision=full_precision or None)
    manifest = RunManifest("diagnose", cfg.out, cfg)
    panel = load_returns(cfg, manifest)

    try:
        table = diagnostics_table(panel)
    except SpillkitError as exc:
        abort("diagnose", exc, manifest)

    written = table if cfg.full_precision else table.round(4)
    manifest.record(
        write_table_csv(written, Path(cfg.out) / DIAGNOSTICS_FILE, cfg.full_precision)
    )
    print_frame_table(table, title="Return diagnostics")

    try:
        lags = select_var_order(panel, cfg.max_order)
        manifest.note("bic_lag_order", lags)
        typer.echo(f"BIC lag order: {lags}")
    except SpillkitError as exc:
        report_warning(f"Lag order selection skipped: {exc}")

    finish(manifest, failures=0, jobs=1)

from pathlib import Path
from typing import Optional

import typer

from spillkit.cli.cli_formatting import print_frame_table, write_table_csv
from spillkit.cli.manifest import RunManifest
from spillkit.cli.pipeline import (
    finish,
    load_config,
    load_returns,
    report_error,
    static_fevd,
)
from spillkit.core.exceptions import SpillkitError
from spillkit.core.utils import level_label
from spillkit.spillover.connectedness import spillover_table, summarize


def static(
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
    full_precision: bool = typer.Option(
        False, "--full-precision", help="Do not round tables to one decimal."
    ),
):
    """
    Full-sample spillover tables, one per level (mean and each quantile).

    Each {level}_table.csv holds the percent share matrix with a FROM column,
    TO/NET/DOM rows and the TCI in the TO row's FROM cell.
    """
    cfg = load_config(
        config,
        horizon=horizon,
        quantiles=quantiles,
        window=window,
        threshold=threshold,
        out=out,
        full_precision=full_precision or None,
    )
    manifest = RunManifest("static", cfg.out, cfg)
    panel = load_returns(cfg, manifest)

    levels = cfg.levels()
    failures = 0
    tci = {}
    for level in levels:
        label = level_label(level)
        try:
            fevd = static_fevd(panel, cfg, level, cfg.horizon)
            summary = summarize(fevd)
        except SpillkitError as exc:
            report_error(f"static {label}", exc)
            manifest.error(f"static {label}: {exc}")
            failures += 1
            continue
        table = spillover_table(fevd, summary, cfg.full_precision)
        manifest.record(
            write_table_csv(
                table, Path(cfg.out) / f"{label}_table.csv", cfg.full_precision
            )
        )
        tci[label] = summary.tci
        print_frame_table(
            table,
            title=f"Static spillovers ({label}, H={cfg.horizon})",
            digits=None if cfg.full_precision else 1,
        )

    manifest.note("tci", tci)
    finish(manifest, failures, len(levels))

from pathlib import Path
from typing import Optional

import pandas as pd
import typer

from spillkit.cli.cli_formatting import print_artifacts, print_payload_json
from spillkit.cli.manifest import RunManifest
from spillkit.cli.pipeline import (
    abort,
    finish,
    fit_level_path,
    level_dynamics,
    load_config,
    load_returns,
    report_error,
    static_fevd,
)
from spillkit.conf.models import RunConfig
from spillkit.core.exceptions import ConfigError, GraphError, SpillkitError
from spillkit.core.utils import level_label
from spillkit.spillover.connectedness import FevdMatrix, SpilloverSummary, summarize
from spillkit.spillover.network import (
    SpilloverGraph,
    correlation_network,
    export_graph,
    minimum_spanning_tree,
    net_spillover_network,
)


def _export_all(
    fevd: FevdMatrix,
    summary: SpilloverSummary,
    cfg: RunConfig,
    stem: str,
    manifest: RunManifest,
) -> bool:
    """
    Export the three graphs of one decomposition; False if the tree is missing.
    """
    graphs: dict[str, SpilloverGraph] = {
        "correlation": correlation_network(fevd),
        "net": net_spillover_network(summary, cfg.threshold),
    }
    complete = True
    try:
        tree = minimum_spanning_tree(summary)
        graphs["mst"] = tree
        manifest.notes.setdefault("mst", {})[stem] = {
            "tiers": tree.tiers(),
            "longest_path": tree.longest_path(),
        }
    except GraphError as exc:
        report_error(f"network {stem} mst", exc)
        manifest.error(f"network {stem} mst: {exc}")
        complete = False

    out_dir = Path(cfg.out)
    for kind, graph in graphs.items():
        for fmt in cfg.graph_formats:
            manifest.record(export_graph(graph, out_dir / f"{stem}_{kind}.{fmt}", fmt))
    return complete


def network(
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
    dates: Optional[str] = typer.Option(
        None,
        "--dates",
        help="Comma separated dates (YYYY-MM-DD) to also export from the dynamic fits.",
    ),
):
    """
    Correlation network, net spillover network and minimum spanning tree per level.

    Files are named {level}_{kind}.{ext} with kind correlation, net or mst,
    and {level}_{date}_{kind}.{ext} for the dates requested with --dates.
    """
    cfg = load_config(
        config,
        horizon=horizon,
        quantiles=quantiles,
        window=window,
        threshold=threshold,
        out=out,
    )
    manifest = RunManifest("network", cfg.out, cfg)
    requested = [d.strip() for d in dates.split(",") if d.strip()] if dates else []
    try:
        requested = [f"{pd.Timestamp(d):%Y-%m-%d}" for d in requested]
    except ValueError as exc:
        abort("config", ConfigError(f"Invalid --dates value: {exc}"), manifest)
    panel = load_returns(cfg, manifest)

    levels = cfg.levels()
    failures = 0
    partial = False
    for level in levels:
        label = level_label(level)
        try:
            fevd = static_fevd(panel, cfg, level, cfg.horizon)
            partial |= not _export_all(fevd, summarize(fevd), cfg, label, manifest)
            if requested:
                series = level_dynamics(
                    fit_level_path(panel, cfg, level), cfg, cfg.horizon, keep_fevd=True
                )
                assert series.fevds is not None
                for date in requested:
                    pos = series.position(date)
                    stem = f"{label}_{series.dates[pos]:%Y-%m-%d}"
                    partial |= not _export_all(
                        series.fevds[pos], series.summary_at(pos), cfg, stem, manifest
                    )
        except (ConfigError, GraphError) as exc:
            abort(f"network {label}", exc, manifest)
        except SpillkitError as exc:
            report_error(f"network {label}", exc)
            manifest.error(f"network {label}: {exc}")
            failures += 1

    if "mst" in manifest.notes:
        print_payload_json(manifest.notes["mst"])
    print_artifacts(manifest.artifacts)
    finish(manifest, failures, len(levels), partial=partial)

import importlib.metadata as _importlib_metadata

try:
    __version__ = _importlib_metadata.version(__name__)
except _importlib_metadata.PackageNotFoundError:
    # editable/dev installs won't have package metadata
    __version__ = "0+unknown"

from spillkit.conf.models import DgpSpec, RunConfig
from spillkit.models import (
    PriorSpec,
    fit_quantile_var,
    fit_static_var,
    fit_tvp_var,
    quantile_regression,
    rolling_quantile_var,
)
from spillkit.panel import (
    PricePanel,
    ReturnPanel,
    fill_missing,
    ingest_csv,
    log_returns,
)
from spillkit.spillover import (
    FevdMatrix,
    SpilloverSummary,
    correlation_network,
    dynamic_indices,
    export_graph,
    gfevd,
    minimum_spanning_tree,
    net_spillover_network,
    summarize,
)
from spillkit.stats import describe, diagnostics_table

__all__ = [
    "RunConfig",
    "DgpSpec",
    "PricePanel",
    "ReturnPanel",
    "ingest_csv",
    "fill_missing",
    "log_returns",
    "describe",
    "diagnostics_table",
    "PriorSpec",
    "fit_tvp_var",
    "fit_static_var",
    "quantile_regression",
    "fit_quantile_var",
    "rolling_quantile_var",
    "FevdMatrix",
    "SpilloverSummary",
    "gfevd",
    "summarize",
    "dynamic_indices",
    "correlation_network",
    "net_spillover_network",
    "minimum_spanning_tree",
    "export_graph",
    "__version__",
]

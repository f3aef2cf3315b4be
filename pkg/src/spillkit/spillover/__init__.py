from spillkit.spillover.connectedness import (
    DynamicIndexSeries,
    FevdMatrix,
    SpilloverSummary,
    average_fevd,
    dynamic_indices,
    gfevd,
    spillover_table,
    summarize,
    tci_correlation,
)
from spillkit.spillover.network import (
    SpanningTree,
    SpilloverEdge,
    SpilloverGraph,
    SpilloverNode,
    correlation_network,
    export_graph,
    minimum_spanning_tree,
    net_spillover_network,
    read_graph_json,
)

__all__ = [
    "FevdMatrix",
    "SpilloverSummary",
    "DynamicIndexSeries",
    "gfevd",
    "summarize",
    "average_fevd",
    "dynamic_indices",
    "tci_correlation",
    "spillover_table",
    "SpilloverNode",
    "SpilloverEdge",
    "SpilloverGraph",
    "SpanningTree",
    "correlation_network",
    "net_spillover_network",
    "minimum_spanning_tree",
    "export_graph",
    "read_graph_json",
]

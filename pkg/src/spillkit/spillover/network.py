"""
Spillover networks and minimum spanning trees.

Three graphs are built from a decomposition and its summary:

- the correlation network: undirected, complete, edge weight is the pairwise
  spillover sum ``100 * (s_ij + s_ji)``;
- the net spillover network: directed, edge ``i -> j`` when the net pairwise
  spillover ``npdc[i, j]`` exceeds a threshold;
- the minimum spanning tree over reciprocal net pairwise spillovers, with
  each tree edge pointing away from the net transmitter of the pair.
"""

import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Optional

import networkx as nx
import numpy as np

from spillkit.core.exceptions import GraphError, ValidationError
from spillkit.core.types import FilePath, FloatMatrix, GraphFormat, Role
from spillkit.graph_io import get_writer
from spillkit.spillover.connectedness import FevdMatrix, SpilloverSummary, summarize

logger = logging.getLogger(__name__)

DEFAULT_THRESHOLD = 0.5


def _role(net: float) -> Role:
    return "transmitter" if net > 0 else "receiver"


@dataclass(frozen=True)
class SpilloverNode:
    id: str
    strength: float
    role: Role


@dataclass(frozen=True)
class SpilloverEdge:
    source: str
    target: str
    weight: float


@dataclass(frozen=True)
class SpilloverGraph:
    """
    Weighted spillover graph.

    Undirected graphs store each pair once and are symmetric by construction.
    Directed edges must have positive weight.
    """

    nodes: tuple[SpilloverNode, ...]
    edges: tuple[SpilloverEdge, ...]
    directed: bool

    kind = "graph"

    def __post_init__(self) -> None:
        ids = [n.id for n in self.nodes]
        if len(set(ids)) != len(ids):
            raise GraphError("Node identifiers must be unique")
        known = set(ids)
        seen = set()
        for edge in self.edges:
            if edge.source not in known or edge.target not in known:
                raise GraphError(f"Edge {edge.source}->{edge.target} references an unknown node")
            if edge.source == edge.target:
                raise GraphError(f"Self loop on '{edge.source}'")
            key = (
                (edge.source, edge.target)
                if self.directed
                else tuple(sorted((edge.source, edge.target)))
            )
            if key in seen:
                raise GraphError(f"Duplicate edge {edge.source}-{edge.target}")
            seen.add(key)
            if self.directed and not edge.weight > 0:
                raise GraphError(
                    f"Directed edge {edge.source}->{edge.target} has weight {edge.weight}"
                )

    @property
    def node_ids(self) -> list[str]:
        return [n.id for n in self.nodes]

    def node(self, node_id: str) -> SpilloverNode:
        for n in self.nodes:
            if n.id == node_id:
                return n
        raise GraphError(f"No node '{node_id}'")

    def edge_set(self) -> set[tuple[str, str]]:
        return {(e.source, e.target) for e in self.edges}

    def weight_matrix(self) -> FloatMatrix:
        """Adjacency matrix in node order; symmetric for undirected graphs."""
        index = {node_id: k for k, node_id in enumerate(self.node_ids)}
        matrix = np.zeros((len(self.nodes), len(self.nodes)))
        for e in self.edges:
            matrix[index[e.source], index[e.target]] = e.weight
            if not self.directed:
                matrix[index[e.target], index[e.source]] = e.weight
        return matrix

    def to_networkx(self) -> nx.Graph:
        graph: nx.Graph = nx.DiGraph() if self.directed else nx.Graph()
        for n in self.nodes:
            graph.add_node(n.id, strength=float(n.strength), role=n.role)
        for e in self.edges:
            graph.add_edge(e.source, e.target, weight=float(e.weight))
        return graph

    def as_dict(self) -> dict[str, Any]:
        return {
            "kind": self.kind,
            "directed": self.directed,
            "nodes": [
                {"id": n.id, "strength": n.strength, "role": n.role} for n in self.nodes
            ],
            "edges": [
                {"source": e.source, "target": e.target, "weight": e.weight}
                for e in self.edges
            ],
        }


@dataclass(frozen=True)
class SpanningTree(SpilloverGraph):
    """
    Directed spanning tree: N - 1 edges, connected and acyclic.

    Edge weights are the net pairwise spillovers (percent) of the tree pairs.
    """

    kind = "spanning_tree"

    def __post_init__(self) -> None:
        super().__post_init__()
        if not self.directed:
            raise GraphError("A spanning tree is stored as a directed graph")
        if len(self.edges) != len(self.nodes) - 1:
            raise GraphError(
                f"A spanning tree on {len(self.nodes)} nodes needs "
                f"{len(self.nodes) - 1} edges, got {len(self.edges)}"
            )
        if len(self.nodes) > 1 and not nx.is_tree(self.to_networkx().to_undirected()):
            raise GraphError("Edges do not form a spanning tree")

    def tiers(self) -> dict[str, int]:
        """
        Spillover tier of every node.

        Tier 1 nodes have no incoming tree edge; any other node sits one tier
        below its deepest parent.
        """
        tiers = {}
        for depth, generation in enumerate(
            nx.topological_generations(self.to_networkx()), start=1
        ):
            for node_id in generation:
                tiers[node_id] = depth
        return {node_id: tiers[node_id] for node_id in self.node_ids}

    def longest_path(self) -> list[str]:
        """Longest directed transmission path, counted in edges."""
        hops = nx.DiGraph()
        hops.add_nodes_from(self.node_ids)
        hops.add_edges_from((e.source, e.target) for e in self.edges)
        return list(
            nx.dag_longest_path(
                hops, topo_order=nx.lexicographical_topological_sort(hops)
            )
        )


def correlation_network(fevd: FevdMatrix) -> SpilloverGraph:
    """
    Undirected complete graph of pairwise spillover sums.

    Edge ``{i, j}`` has weight ``100 * (s_ij + s_ji)``. Node strength is the
    average incident edge weight (sum over the N - 1 partners); roles follow
    the sign of the net spillover.

    Example:
        >>> g = correlation_network(FevdMatrix(np.eye(2), 5, ("a", "b")))
        >>> [e.weight for e in g.edges]
        [0.0]
    """
    shares = fevd.shares
    labels = fevd.labels
    n = len(labels)
    net = summarize(fevd).net
    pair = 100.0 * (shares + shares.T)
    edges = tuple(
        SpilloverEdge(labels[i], labels[j], float(pair[i, j]))
        for i in range(n)
        for j in range(i + 1, n)
    )
    incident = pair.sum(axis=1) - np.diag(pair)
    strength = incident / (n - 1) if n > 1 else np.zeros(n)
    nodes = tuple(
        SpilloverNode(labels[i], float(strength[i]), _role(net[i])) for i in range(n)
    )
    return SpilloverGraph(nodes, edges, directed=False)


def net_spillover_network(
    summary: SpilloverSummary, threshold: float = DEFAULT_THRESHOLD
) -> SpilloverGraph:
    """
    Directed graph keeping ``i -> j`` when ``npdc[i, j] > threshold`` percent.

    Edge weight is ``npdc[i, j]`` and node strength is out-strength, the sum
    of outgoing edge weights.

    Raises:
        ValidationError: If ``threshold`` is negative.
    """
    if threshold < 0:
        raise ValidationError(f"Threshold must be >= 0, got {threshold}")
    labels = summary.labels
    n = len(labels)
    npdc = summary.npdc
    edges = tuple(
        SpilloverEdge(labels[i], labels[j], float(npdc[i, j]))
        for i in range(n)
        for j in range(n)
        if i != j and npdc[i, j] > threshold
    )
    out_strength = {label: 0.0 for label in labels}
    for e in edges:
        out_strength[e.source] += e.weight
    nodes = tuple(
        SpilloverNode(labels[i], out_strength[labels[i]], _role(summary.net[i]))
        for i in range(n)
    )
    logger.debug("Net network keeps %d edges above %g%%", len(edges), threshold)
    return SpilloverGraph(nodes, edges, directed=True)


def minimum_spanning_tree(summary: SpilloverSummary) -> SpanningTree:
    """
    Minimum spanning tree over distances ``1 / |npdc[i, j]|``.

    Larger net pairwise spillovers give shorter edges; pairs with zero net
    spillover are unusable. Kruskal's algorithm scans edges by weight with
    ties in lexicographic (source, target) label order. Each tree edge points
    from the pair member with positive ``npdc``.

    Raises:
        GraphError: If N < 2 or the usable pairs do not connect every node.

    Example:
        >>> from spillkit.spillover.connectedness import gfevd
        >>> fevd = gfevd(np.array([[0.5, 0.0], [0.3, 0.5]]), np.eye(2), 5, labels=("a", "b"))
        >>> [(e.source, e.target) for e in minimum_spanning_tree(summarize(fevd)).edges]
        [('a', 'b')]
    """
    labels = summary.labels
    n = len(labels)
    if n < 2:
        raise GraphError("A spanning tree needs at least 2 nodes")
    npdc = summary.npdc
    index = {label: k for k, label in enumerate(labels)}
    ordered = sorted(labels)

    graph = nx.Graph()
    graph.add_nodes_from(ordered)
    for a_pos, a in enumerate(ordered):
        for b in ordered[a_pos + 1 :]:
            value = abs(npdc[index[a], index[b]])
            if value > 0:
                graph.add_edge(a, b, weight=1.0 / value)

    tree_edges = list(
        nx.minimum_spanning_edges(graph, algorithm="kruskal", weight="weight", data=False)
    )
    if len(tree_edges) != n - 1:
        raise GraphError(
            "Net pairwise spillovers are zero across a cut; the spanning tree is disconnected"
        )

    edges = []
    for a, b in tree_edges:
        i, j = index[a], index[b]
        if npdc[i, j] > 0:
            edges.append(SpilloverEdge(a, b, float(npdc[i, j])))
        else:
            edges.append(SpilloverEdge(b, a, float(npdc[j, i])))
    edges.sort(key=lambda e: (e.source, e.target))
    out_strength = {label: 0.0 for label in labels}
    for e in edges:
        out_strength[e.source] += e.weight
    nodes = tuple(
        SpilloverNode(labels[i], out_strength[labels[i]], _role(summary.net[i]))
        for i in range(n)
    )
    return SpanningTree(nodes, tuple(edges), directed=True)


def export_graph(
    graph: SpilloverGraph, path: FilePath, format: Optional[GraphFormat] = None
) -> Path:
    """
    Write a graph as GraphML, DOT or JSON.

    The format defaults to the file suffix.

    Raises:
        GraphError: If the format is unknown or the path is not writable.
    """
    path = Path(path)
    fmt = format or path.suffix.lstrip(".")
    writer = get_writer(fmt)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        writer.write(graph, path)
    except OSError as exc:
        raise GraphError(f"Cannot write graph to '{path}': {exc}") from exc
    logger.info("Wrote %s graph to %s", fmt, path)
    return path


def graph_from_dict(data: dict[str, Any]) -> SpilloverGraph:
    """Inverse of :meth:`SpilloverGraph.as_dict`."""
    try:
        nodes = tuple(
            SpilloverNode(str(n["id"]), float(n["strength"]), n["role"])
            for n in data["nodes"]
        )
        edges = tuple(
            SpilloverEdge(str(e["source"]), str(e["target"]), float(e["weight"]))
            for e in data["edges"]
        )
        directed = bool(data["directed"])
    except (KeyError, TypeError, ValueError) as exc:
        raise GraphError(f"Malformed graph document: {exc}") from exc
    cls = SpanningTree if data.get("kind") == SpanningTree.kind else SpilloverGraph
    return cls(nodes, edges, directed)


def read_graph_json(path: FilePath) -> SpilloverGraph:
    """Parse a JSON graph export back into a graph or spanning tree."""
    try:
        with open(Path(path), "r", encoding="utf-8") as f:
            data = json.load(f)
    except (OSError, json.JSONDecodeError) as exc:
        raise GraphError(f"Cannot read graph file '{path}': {exc}") from exc
    return graph_from_dict(data)

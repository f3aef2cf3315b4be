import json
from pathlib import Path
from typing import TYPE_CHECKING

import networkx as nx
import pydot

from spillkit.graph_io.base import GraphWriter

if TYPE_CHECKING:
    from spillkit.spillover.network import SpilloverGraph

# DOT pen width: proportional to weight, MAX at the heaviest edge, floored at MIN.
MIN_PENWIDTH = 0.5
MAX_PENWIDTH = 5.0


class GraphmlWriter(GraphWriter):
    """GraphML with ``strength``/``role`` node and ``weight`` edge attributes."""

    suffix = "graphml"

    def write(self, graph: "SpilloverGraph", path: Path) -> None:
        nx.write_graphml(graph.to_networkx(), path)


class DotWriter(GraphWriter):
    """Graphviz DOT with pen widths proportional to edge weight."""

    suffix = "dot"

    def write(self, graph: "SpilloverGraph", path: Path) -> None:
        dot = pydot.Dot(
            graph_name="spillover",
            graph_type="digraph" if graph.directed else "graph",
        )
        for node in graph.nodes:
            dot.add_node(
                pydot.Node(
                    _quote(node.id),
                    strength=_quote(repr(float(node.strength))),
                    role=node.role,
                )
            )
        top = max((abs(e.weight) for e in graph.edges), default=0.0)
        for edge in graph.edges:
            scale = abs(edge.weight) / top if top > 0 else 0.0
            penwidth = max(MAX_PENWIDTH * scale, MIN_PENWIDTH)
            dot.add_edge(
                pydot.Edge(
                    _quote(edge.source),
                    _quote(edge.target),
                    weight=_quote(repr(float(edge.weight))),
                    penwidth=_quote(f"{penwidth:.3f}"),
                )
            )
        path.write_text(dot.to_string(), encoding="utf-8")


class JsonWriter(GraphWriter):
    """
    JSON document ``{nodes: [{id, strength, role}], edges: [{source, target,
    weight}], directed}`` plus a ``kind`` tag for spanning trees.
    """

    suffix = "json"

    def write(self, graph: "SpilloverGraph", path: Path) -> None:
        with open(path, "w", encoding="utf-8") as f:
            json.dump(graph.as_dict(), f, indent=2)
            f.write("\n")


def _quote(text: str) -> str:
    escaped = text.replace("\\", "\\\\").replace('"', '\\"')
    return f'"{escaped}"'


GRAPH_WRITERS: dict[str, type[GraphWriter]] = {
    cls.suffix: cls for cls in (GraphmlWriter, DotWriter, JsonWriter)
}

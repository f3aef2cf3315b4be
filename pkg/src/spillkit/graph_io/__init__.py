from spillkit.core.exceptions import GraphError
from spillkit.graph_io.base import GraphWriter
from spillkit.graph_io.writers import (
    GRAPH_WRITERS,
    DotWriter,
    GraphmlWriter,
    JsonWriter,
)


def get_writer(fmt: str) -> GraphWriter:
    """Return a writer for ``graphml``, ``dot`` or ``json``."""
    try:
        return GRAPH_WRITERS[fmt.lower()]()
    except KeyError:
        raise GraphError(
            f"Unknown graph format '{fmt}', expected one of {sorted(GRAPH_WRITERS)}"
        ) from None


__all__ = [
    "GraphWriter",
    "GraphmlWriter",
    "DotWriter",
    "JsonWriter",
    "GRAPH_WRITERS",
    "get_writer",
]

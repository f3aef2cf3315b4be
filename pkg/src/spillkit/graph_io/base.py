from abc import ABC, abstractmethod
from pathlib import Path
from typing import TYPE_CHECKING

if TYPE_CHECKING:
    from spillkit.spillover.network import SpilloverGraph


class GraphWriter(ABC):
    """
    Abstract base class for spillover graph writers.
    """

    #: File suffix written by this backend, without the dot.
    suffix: str

    @abstractmethod
    def write(self, graph: "SpilloverGraph", path: Path) -> None:
        """
        Write a spillover graph to a file.

        Args:
            graph (SpilloverGraph): Graph with node strength and role
                attributes and weighted edges.
            path (Path): Destination file; its parent directory exists.
        """
        pass  # pragma: no cover

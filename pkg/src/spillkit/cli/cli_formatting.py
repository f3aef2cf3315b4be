from pathlib import Path
from typing import Any, Optional

import numpy as np
import pandas as pd
from rich import print_json
from rich.console import Console
from rich.table import Table

from spillkit.core.types import FilePath

FULL_PRECISION_FORMAT = "%.17g"


def to_serializable(val: Any) -> Any:
    """
    Recursively convert objects to types suitable for JSON serialization.

    - Any object with an as_dict() method is converted using that method.
    - numpy scalars and arrays become Python numbers and lists.
    - Lists, tuples and dicts are processed recursively.
    """
    if hasattr(val, "as_dict") and callable(val.as_dict):
        return to_serializable(val.as_dict())
    elif isinstance(val, dict):
        return {str(k): to_serializable(v) for k, v in val.items()}
    elif isinstance(val, (list, tuple)):
        return [to_serializable(i) for i in val]
    elif isinstance(val, np.ndarray):
        return val.tolist()
    elif isinstance(val, np.generic):
        return val.item()
    elif isinstance(val, pd.Timestamp):
        return val.strftime("%Y-%m-%d")
    return val


def print_payload_json(payload: Any) -> None:
    """Print any result as JSON using rich formatting."""
    print_json(data=to_serializable(payload))


def write_table_csv(
    table: pd.DataFrame, path: FilePath, full_precision: bool = False
) -> Path:
    """Write a result table as CSV; empty cells stay empty."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    table.to_csv(
        path,
        na_rep="",
        float_format=FULL_PRECISION_FORMAT if full_precision else None,
    )
    return path


def print_frame_table(
    frame: pd.DataFrame, title: str, digits: Optional[int] = 3
) -> None:
    """
    Print a DataFrame as a rich table, the index in the first column.

    Args:
        frame: Table to print.
        title: Table title.
        digits: Decimal places for floats; None prints them unformatted.
    """
    table = Table(title=title)
    table.add_column(frame.index.name or "", style="cyan")
    for column in frame.columns:
        table.add_column(str(column), justify="right")

    for label, row in frame.iterrows():
        cells = [str(label)]
        for value in row:
            if isinstance(value, (float, np.floating)):
                if np.isnan(value):
                    cells.append("")
                elif digits is None:
                    cells.append(repr(float(value)))
                else:
                    cells.append(f"{value:.{digits}f}")
            else:
                cells.append(str(value))
        table.add_row(*cells, end_section=label == frame.index[-1])

    console = Console()
    console.print(table)


def print_artifacts(paths: list[Path]) -> None:
    """List written artifacts."""
    console = Console()
    for path in paths:
        console.print(f"[green]wrote[/green] {path}")

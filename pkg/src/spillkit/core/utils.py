"""
Utility functions for spillkit.

This module provides general utility functions used throughout the spillkit package.
"""

import hashlib
from pathlib import Path
from typing import Iterable

from spillkit.core.types import FilePath, Level


def level_label(level: Level) -> str:
    """
    Label used in artifact file names for an analysis level.

    Args:
        level: ``"mean"`` or a quantile level.

    Returns:
        ``"mean"`` or ``"q<tau>"``.

    Example:
        >>> level_label("mean")
        'mean'
        >>> level_label(0.05)
        'q0.05'
    """
    if level == "mean":
        return "mean"
    return f"q{float(level):g}"


def parse_float_list(text: str) -> list[float]:
    """
    Parse a comma separated list of floats as given on the command line.

    Raises:
        ValueError: If an item is not a number.

    Example:
        >>> parse_float_list("0.05, 0.5,0.95")
        [0.05, 0.5, 0.95]
    """
    items = [item.strip() for item in text.split(",") if item.strip()]
    try:
        return [float(item) for item in items]
    except ValueError as exc:
        raise ValueError(
            f"Expected a comma separated list of numbers, got {_quoted_comma_sep_list(items)}"
        ) from exc


def sha256_file(path: FilePath) -> str:
    """Hex sha256 digest of a file's bytes."""
    digest = hashlib.sha256()
    with open(Path(path), "rb") as f:
        for chunk in iter(lambda: f.read(1 << 16), b""):
            digest.update(chunk)
    return digest.hexdigest()


def _quoted_comma_sep_list(items: Iterable[str]) -> str:
    """
    Format a list of strings as a comma-separated list with each item in quotes.

    Args:
        items: Iterable of strings to format

    Returns:
        A string with each item in quotes, separated by commas
    """
    return ", ".join([f"'{item}'" for item in items])

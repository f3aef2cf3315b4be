"""
Type definitions for spillkit.

This module contains type definitions used throughout the spillkit package.
"""

from pathlib import Path
from typing import Literal, Union

import numpy as np
import numpy.typing as npt

FilePath = Union[str, Path]

FloatArray = npt.NDArray[np.float64]
FloatMatrix = npt.NDArray[np.float64]
IntArray = npt.NDArray[np.int64]

GraphFormat = Literal["graphml", "dot", "json"]
Role = Literal["transmitter", "receiver"]
Innovation = Literal["gaussian", "student_t"]
StaticMethod = Literal["ols", "tvp_average"]
QuantileMethod = Literal["irls", "highs"]

# A level is either the conditional mean or a quantile level tau.
Level = Union[Literal["mean"], float]

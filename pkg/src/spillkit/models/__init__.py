from spillkit.models.qvar import (
    QuantileVarFit,
    RollingQuantileVar,
    fit_quantile_var,
    quantile_regression,
    rolling_quantile_var,
)
from spillkit.models.tvpvar import (
    PriorSpec,
    TvpVarPath,
    TvpVarState,
    fit_static_var,
    fit_tvp_var,
)

__all__ = [
    "PriorSpec",
    "TvpVarPath",
    "TvpVarState",
    "fit_tvp_var",
    "fit_static_var",
    "QuantileVarFit",
    "RollingQuantileVar",
    "quantile_regression",
    "fit_quantile_var",
    "rolling_quantile_var",
]

from spillkit.stats.diagnostics import (
    AdfResult,
    SeriesDiagnostics,
    adf_test,
    describe,
    diagnostics_table,
    select_var_order,
)

__all__ = [
    "AdfResult",
    "SeriesDiagnostics",
    "adf_test",
    "describe",
    "diagnostics_table",
    "select_var_order",
]

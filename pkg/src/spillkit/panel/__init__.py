from spillkit.panel.dataset import (
    PricePanel,
    ReturnPanel,
    fill_missing,
    ingest_csv,
    log_returns,
    merge_panels,
    prices_from_returns,
    write_prices_csv,
    write_returns_csv,
)

__all__ = [
    "PricePanel",
    "ReturnPanel",
    "ingest_csv",
    "merge_panels",
    "fill_missing",
    "log_returns",
    "prices_from_returns",
    "write_prices_csv",
    "write_returns_csv",
]

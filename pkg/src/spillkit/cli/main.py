from typing import Optional

import typer

from spillkit import __version__
from spillkit.cli.diagnose import diagnose
from spillkit.cli.dynamic import dynamic
from spillkit.cli.network import network
from spillkit.cli.simulate import simulate
from spillkit.cli.static import static
from spillkit.core.log_config import configure_logging

app = typer.Typer()


def version_callback(value: bool):
    if value:
        print(__version__)
        raise typer.Exit()


@app.callback()
def main(
    version: bool = typer.Option(
        None,
        "--version",
        help="Show the version and exit.",
        is_eager=True,
        callback=version_callback,
    ),
    log_level: Optional[str] = typer.Option(
        None,
        "--log-level",
        help="DEBUG, INFO, WARNING or ERROR. Overrides SPILLKIT_LOG_LEVEL.",
    ),
):
    """
    Spillkit: time-varying and quantile risk spillovers between return series.
    Run with --help for more info.
    """
    configure_logging(log_level)


app.command()(diagnose)
app.command()(static)
app.command()(dynamic)
app.command()(network)
app.command()(simulate)

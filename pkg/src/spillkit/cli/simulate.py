from pathlib import Path
from typing import Optional

import typer

from spillkit.cli.cli_formatting import print_artifacts
from spillkit.cli.manifest import RunManifest
from spillkit.cli.pipeline import abort, finish, load_config
from spillkit.conf.models import DgpSpec
from spillkit.core.exceptions import ConfigError, SpillkitError
from spillkit.panel.dataset import prices_from_returns, write_prices_csv, write_returns_csv
from spillkit.sim.synthdgp import simulate as simulate_panel

PRICES_FILE = "simulated_prices.csv"
RETURNS_FILE = "simulated_returns.csv"


def simulate(
    config: Optional[Path] = typer.Option(
        None, "--config", "-c", help="YAML run configuration with a simulate section."
    ),
    out: Optional[str] = typer.Option(None, "--out", help="Output directory."),
    seed: Optional[int] = typer.Option(None, "--seed", help="Override the DGP seed."),
    length: Optional[int] = typer.Option(
        None, "--length", help="Override the number of simulated observations."
    ),
):
    """
    Simulate a panel from the configured data generating process.

    Writes simulated_returns.csv and simulated_prices.csv (prices start at
    100), the latter usable as the input of the other commands.
    """
    cfg = load_config(config, out=out)
    manifest = RunManifest("simulate", cfg.out, cfg)
    if cfg.simulate is None:
        abort("config", ConfigError("The configuration has no simulate section"), manifest)

    try:
        updates = {k: v for k, v in {"seed": seed, "length": length}.items() if v is not None}
        spec = DgpSpec.model_validate({**cfg.simulate.model_dump(), **updates})
        returns = simulate_panel(spec)
        out_dir = Path(cfg.out)
        manifest.record(write_returns_csv(returns, out_dir / RETURNS_FILE))
        manifest.record(write_prices_csv(prices_from_returns(returns), out_dir / PRICES_FILE))
    except SpillkitError as exc:
        abort("simulate", exc, manifest)
    except ValueError as exc:
        abort("config", ConfigError(str(exc)), manifest)

    manifest.note("seed", spec.seed)
    print_artifacts(manifest.artifacts)
    finish(manifest, failures=0, jobs=1)

from typer.testing import CliRunner

from spillkit import __version__
from spillkit.cli.main import app

runner = CliRunner()


class TestMain:
    def test_version_option(self):
        result = runner.invoke(app, ["--version"])
        assert result.exit_code == 0
        assert result.output.strip() == __version__

    def test_help_lists_commands(self):
        result = runner.invoke(app, ["--help"])
        assert result.exit_code == 0
        for command in ("diagnose", "static", "dynamic", "network", "simulate"):
            assert command in result.output

    def test_log_level_option(self, run_config):
        result = runner.invoke(app, ["--log-level", "DEBUG", "simulate", "-c", str(run_config)])
        assert result.exit_code == 0

    def test_unknown_command(self):
        result = runner.invoke(app, ["plot"])
        assert result.exit_code != 0

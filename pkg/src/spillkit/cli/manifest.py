"""
Run manifest written next to the artifacts of every command.

The manifest records what is needed to reproduce the outputs: the validated
configuration and its digest, the input file digest, package versions and a
digest of every artifact. It carries no timestamps, so two identical runs
produce identical manifests.
"""

import importlib.metadata
import json
import platform
from pathlib import Path
from typing import Any, Optional

from spillkit.conf.models import RunConfig
from spillkit.core.types import FilePath
from spillkit.core.utils import sha256_file

MANIFEST_NAME = "manifest.json"

VERSIONED_PACKAGES = (
    "spillkit",
    "numpy",
    "pandas",
    "scipy",
    "statsmodels",
    "networkx",
)


def package_versions() -> dict[str, str]:
    """Installed versions of the numerical stack, plus the interpreter."""
    versions = {"python": platform.python_version()}
    for name in VERSIONED_PACKAGES:
        try:
            versions[name] = importlib.metadata.version(name)
        except importlib.metadata.PackageNotFoundError:
            versions[name] = "unknown"
    return versions


class RunManifest:
    """
    Collects artifacts and notes during a command, then writes ``manifest.json``.

    Args:
        command: Subcommand name.
        out_dir: Output directory; the manifest is written there.
        config: Validated run configuration, when one could be loaded.
    """

    def __init__(
        self, command: str, out_dir: FilePath, config: Optional[RunConfig] = None
    ) -> None:
        self.command = command
        self.out_dir = Path(out_dir)
        self.config = config
        self.input_path: Optional[Path] = None
        self.artifacts: list[Path] = []
        self.notes: dict[str, Any] = {}
        self.errors: list[str] = []

    def set_input(self, path: FilePath) -> None:
        self.input_path = Path(path)

    def record(self, path: FilePath) -> Path:
        """Register a written artifact and return its path."""
        path = Path(path)
        self.artifacts.append(path)
        return path

    def note(self, key: str, value: Any) -> None:
        self.notes[key] = value

    def error(self, message: str) -> None:
        self.errors.append(message)

    def as_dict(self, exit_code: int) -> dict[str, Any]:
        status = {0: "ok", 3: "partial"}.get(exit_code, "failed")
        artifacts = []
        for path in sorted(self.artifacts):
            try:
                name = str(path.relative_to(self.out_dir))
            except ValueError:
                name = str(path)
            artifacts.append({"path": name, "sha256": sha256_file(path)})
        return {
            "command": self.command,
            "status": status,
            "exit_code": exit_code,
            "config": None if self.config is None else self.config.model_dump(mode="json"),
            "config_sha256": None if self.config is None else self.config.sha256(),
            "input": None if self.input_path is None else str(self.input_path),
            "input_sha256": (
                sha256_file(self.input_path)
                if self.input_path is not None and self.input_path.is_file()
                else None
            ),
            "versions": package_versions(),
            "artifacts": artifacts,
            "notes": self.notes,
            "errors": self.errors,
        }

    def write(self, exit_code: int) -> Path:
        """Write ``manifest.json`` into the output directory."""
        self.out_dir.mkdir(parents=True, exist_ok=True)
        path = self.out_dir / MANIFEST_NAME
        with open(path, "w", encoding="utf-8") as f:
            json.dump(self.as_dict(exit_code), f, indent=2, sort_keys=True)
            f.write("\n")
        return path

import hashlib
import json

import pytest

from spillkit.cli.manifest import MANIFEST_NAME, RunManifest, package_versions
from spillkit.conf.models import RunConfig


@pytest.fixture
def manifest(tmp_path):
    return RunManifest("static", tmp_path, RunConfig(horizon=7))


def _artifact(path, text):
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")
    return path


class TestRunManifest:
    @pytest.mark.parametrize("code, status", [(0, "ok"), (1, "failed"), (2, "failed"), (3, "partial")])
    def test_status(self, manifest, code, status):
        data = manifest.as_dict(code)
        assert data["status"] == status
        assert data["exit_code"] == code

    def test_artifacts_relative_sorted_hashed(self, manifest, tmp_path):
        manifest.record(_artifact(tmp_path / "q0.5_table.csv", "b"))
        manifest.record(_artifact(tmp_path / "mean_table.csv", "a"))
        artifacts = manifest.as_dict(0)["artifacts"]
        assert [a["path"] for a in artifacts] == ["mean_table.csv", "q0.5_table.csv"]
        assert artifacts[0]["sha256"] == hashlib.sha256(b"a").hexdigest()

    def test_config_and_input(self, manifest, tmp_path):
        source = _artifact(tmp_path / "in" / "prices.csv", "date,a\n")
        manifest.set_input(source)
        data = manifest.as_dict(0)
        assert data["config"]["horizon"] == 7
        assert data["config_sha256"] == RunConfig(horizon=7).sha256()
        assert data["input_sha256"] == hashlib.sha256(b"date,a\n").hexdigest()

    def test_missing_input_still_written(self, manifest, tmp_path):
        manifest.set_input(tmp_path / "absent.csv")
        manifest.error("input: cannot read")
        data = json.loads(manifest.write(1).read_text(encoding="utf-8"))
        assert data["input"] == str(tmp_path / "absent.csv")
        assert data["input_sha256"] is None
        assert data["status"] == "failed"

    def test_without_config(self, tmp_path):
        data = RunManifest("simulate", tmp_path).as_dict(1)
        assert data["config"] is None
        assert data["config_sha256"] is None
        assert data["input"] is None

    def test_notes_and_errors(self, manifest):
        manifest.note("tci", {"mean": 12.5})
        manifest.error("static q0.05: singular")
        data = manifest.as_dict(3)
        assert data["notes"] == {"tci": {"mean": 12.5}}
        assert data["errors"] == ["static q0.05: singular"]

    def test_write_is_repeatable(self, manifest, tmp_path):
        manifest.record(_artifact(tmp_path / "mean_table.csv", "a"))
        path = manifest.write(0)
        assert path.name == MANIFEST_NAME
        first = path.read_bytes()
        manifest.write(0)
        assert path.read_bytes() == first
        assert json.loads(first)["command"] == "static"

    def test_write_creates_directory(self, tmp_path):
        path = RunManifest("diagnose", tmp_path / "nested" / "out").write(0)
        assert path.exists()


def test_package_versions():
    versions = package_versions()
    assert {"python", "numpy", "pandas", "scipy", "statsmodels", "networkx"} <= set(versions)

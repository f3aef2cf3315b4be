"""Set up doctest fixtures.

This file contains fixtures that are needed for doctests.
Test-specific fixtures are in tests/conftest.py.
"""

import numpy as np
import pytest


@pytest.fixture(autouse=True)
def doctest_numpy(doctest_namespace):
    """Make numpy available as ``np`` in every doctest."""
    doctest_namespace["np"] = np


@pytest.fixture(autouse=True)
def doctest_workdir(doctest_namespace, tmp_path, monkeypatch):
    """Run doctests in a scratch directory so written files do not leak."""
    monkeypatch.chdir(tmp_path)
    doctest_namespace["tmp_dir"] = str(tmp_path)

import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from wclim.fixtures import build_fixture


@pytest.fixture(scope="session")
def fixture_dir(tmp_path_factory) -> Path:
    """Synthetic data directory shared by pipeline/service/cli tests."""
    path = tmp_path_factory.mktemp("data")
    build_fixture(path)
    return path

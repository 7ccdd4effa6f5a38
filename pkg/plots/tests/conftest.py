from pathlib import Path

import pytest


@pytest.fixture(scope="session")
def data_dir() -> Path:
    return Path(__file__).parent / "data"


@pytest.fixture(scope="session")
def branch_paths(data_dir):
    return tuple(data_dir / f"branch_l{l}.csv" for l in (1, 2, 3))

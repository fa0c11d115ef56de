import os
from pathlib import Path

import numpy as np
import pytest

from enginepdm.synthetic import generate_fleet, truncate_fleet, write_subset

REPO = Path(__file__).resolve().parents[1]


def fd001_dir():
    """Directory holding the real FD001 files, or None.

    Looked up in $ENGINEPDM_DATA_DIR first, then ``data/`` and
    ``data/CMAPSSData/`` under the repository root.
    """
    candidates = [os.environ.get("ENGINEPDM_DATA_DIR"), REPO / "data", REPO / "data" / "CMAPSSData"]
    for c in candidates:
        if c and all((Path(c) / f"{k}_FD001.txt").is_file() for k in ("train", "test", "RUL")):
            return Path(c)
    return None


@pytest.fixture(scope="session")
def small_fleet():
    return generate_fleet(12, seed=3)


@pytest.fixture(scope="session")
def test_fleet():
    return truncate_fleet(generate_fleet(10, seed=4), seed=5)


@pytest.fixture(scope="session")
def synth_dir(tmp_path_factory):
    d = tmp_path_factory.mktemp("raw")
    write_subset(d, "FD001", n_train=24, n_test=16, seed=11)
    return d


@pytest.fixture
def rng():
    return np.random.default_rng(1234)

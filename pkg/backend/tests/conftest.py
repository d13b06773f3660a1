import os
import sys
sys.path.append(os.path.abspath(os.path.join(os.path.dirname(__file__), '../..')))

import numpy as np
import pytest

from backend.src.seals.families import SealFamily, instantiate


@pytest.fixture(autouse=True)
def _clean_env(monkeypatch, tmp_path):
    """Keep QSEAL_* variables and any local .env out of config tests."""
    for key in ("QSEAL_SEED", "QSEAL_OUTPUT_FORMAT", "QSEAL_OUTPUT_PATH"):
        monkeypatch.delenv(key, raising=False)
    monkeypatch.chdir(tmp_path)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def random_state(rng):
    def _make(dim):
        vec = rng.normal(size=dim) + 1j * rng.normal(size=dim)
        return vec / np.linalg.norm(vec)
    return _make


@pytest.fixture
def scheme_a_family():
    return SealFamily.scheme_a(0.3, 0.25)


@pytest.fixture
def tilted_qubit():
    """One qubit sealed at theta = 0.3 (fixed-angle seal, n = 1)."""
    return instantiate(SealFamily.fixed_angle(0.3), 1)

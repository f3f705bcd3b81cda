import numpy as np
import pytest

from ensemble_vqe.config import settings


@pytest.fixture(autouse=True)
def quiet_file_logging(monkeypatch, tmp_path):
    """Keep CLI tests from writing ./logs"""
    monkeypatch.setattr(settings, "LOG_TO_FILE", False)
    monkeypatch.setattr(settings, "OUT_DIR", tmp_path / "runs")


@pytest.fixture
def rng():
    """Seeded generator shared by property tests"""
    return np.random.default_rng(20240611)

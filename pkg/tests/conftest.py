from pathlib import Path

import pytest

from backend import synthetic
from backend.distributions import load_table

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture
def fixtures_dir() -> Path:
    return FIXTURES


@pytest.fixture
def copy4():
    """4-variable system where the second-order gradient and the local O-information disagree."""
    return load_table(FIXTURES / "copy4.txt")


@pytest.fixture
def latent_csv(tmp_path) -> Path:
    """Five variables driven by one common factor, written as a plain CSV."""
    path = tmp_path / "latent.csv"
    synthetic.latent_factor_data(500, 5, seed=3).to_frame().to_csv(path, index=False)
    return path

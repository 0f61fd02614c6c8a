"""
Общие фикстуры тестов wavefarm

Все фикстуры детерминированы: фиксированные зерна, маленькие сетки.
"""
import numpy as np
import pytest

from core.artifact_store import ArtifactStore
from core.surrogate import oracle_bundle
from core.wave_climate import FrequencyGrid, estimate_climate, synthetic_wave_samples


@pytest.fixture(scope="session")
def grid():
    """Короткая равномерная сетка частот на [0.1, 7]"""
    return FrequencyGrid.uniform(0.1, 7.0, 12)


@pytest.fixture(scope="session")
def bundle(grid):
    """Бандл в режиме обхода суррогата (прямые вызовы оракула)"""
    return oracle_bundle(grid)


@pytest.fixture(scope="session")
def samples():
    return synthetic_wave_samples(n_yr=3, per_year=60, seed=11)


@pytest.fixture(scope="session")
def climate(samples):
    """Три года, сетка квадратуры 4x4"""
    return estimate_climate(samples, n_gq=4)


@pytest.fixture
def store(tmp_path):
    return ArtifactStore(tmp_path / "runs")


@pytest.fixture
def rng():
    return np.random.default_rng(1234)

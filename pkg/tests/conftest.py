"""
Fixtures compartilhadas dos testes
"""
import numpy as np
import pytest

import config
from models.geometry import IdealModel, RydbergModel, regular_chain


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def ideal_model():
    return IdealModel(coupling=1.0)


@pytest.fixture
def rydberg_model_3():
    return RydbergModel(regular_chain(3))


@pytest.fixture
def output_dir(tmp_path, monkeypatch):
    """Isola diretório de saída e banco de registros em tmp_path"""
    monkeypatch.setattr(config, 'OUTPUT_DIR', str(tmp_path / 'resultados'))
    monkeypatch.setattr(config, 'DATABASE_PATH', str(tmp_path / 'resultados' / 'registros.db'))
    return tmp_path / 'resultados'

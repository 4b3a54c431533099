"""
Testes do índice SQLite de registros
"""
import pytest

from models.result_model import ResultRecordModel


@pytest.fixture
def model(tmp_path):
    return ResultRecordModel(tmp_path / 'sub' / 'registros.db')


def test_insert_and_fetch(model):
    assert model.inserir('h1', 'optimize', {'final_population': 0.99}, ['a.json'])
    registros = model.buscar_por_hash('h1')
    assert len(registros) == 1
    assert registros[0]['payload'] == {'final_population': 0.99}
    assert registros[0]['artifacts'] == ['a.json']
    assert registros[0]['tool_version']


def test_same_key_is_replaced(model):
    model.inserir('h1', 'optimize', {'v': 1}, [])
    model.inserir('h1', 'optimize', {'v': 2}, [])
    model.inserir('h1', 'master', {'v': 3}, [])
    assert len(model.buscar_por_hash('h1')) == 2
    assert model.buscar_por_hash('h1', 'optimize')[0]['payload'] == {'v': 2}


def test_latest_and_limit(model):
    assert model.buscar_ultimo() is None
    for i in range(3):
        model.inserir(f'h{i}', 'noise', {'i': i}, [])
    assert model.buscar_ultimo('noise')['config_hash'] == 'h2'
    assert len(model.buscar_todos(limite=2)) == 2
    assert len(model.buscar_todos()) == 3


def test_non_serializable_payload_is_not_indexed(model):
    assert not model.inserir('h1', 'optimize', {'valor': float('nan')}, [])
    assert model.buscar_todos() == []

"""
Testes da interface de linha de comando
"""
import json

import pytest
from click.testing import CliRunner

from app import cli


@pytest.fixture
def runner():
    return CliRunner(mix_stderr=False)


def test_analytic_command_writes_artifacts(runner, output_dir):
    resultado = runner.invoke(cli, ['analytic', '--c1', '0', '--c2', '0', '--output-dir', str(output_dir)])
    assert resultado.exit_code == 0, resultado.output
    assert 'verified_population' in resultado.output
    arquivos = sorted(p.name for p in output_dir.iterdir() if p.suffix in ('.json', '.csv'))
    assert any(nome.startswith('analitico_C0_0_') and nome.endswith('.json') for nome in arquivos)
    dados = json.loads(next(output_dir.glob('analitico_C0_0_*.json')).read_text(encoding='utf-8'))
    assert dados['verified_population'] > 1 - 1e-6
    assert len(dados['config_hash']) == 64


def test_malformed_config_exits_with_code_2(runner, output_dir, tmp_path):
    ruim = tmp_path / 'ruim.yaml'
    ruim.write_text('modelo: [1, 2\n', encoding='utf-8')
    resultado = runner.invoke(cli, ['analytic', '--config', str(ruim), '--output-dir', str(output_dir)])
    assert resultado.exit_code == 2
    assert 'configuração' in resultado.stderr
    assert not output_dir.exists() or not any(output_dir.iterdir())


def test_simulation_error_exits_with_code_1(runner, output_dir, tmp_path):
    resultado = runner.invoke(cli, [
        'noise', '--schedule', str(tmp_path / 'nao_existe.json'), '--output-dir', str(output_dir),
    ])
    assert resultado.exit_code == 1
    assert 'Erro' in resultado.stderr


def test_invalid_c_pair_is_a_config_error(runner, output_dir):
    resultado = runner.invoke(cli, ['analytic', '--c1', '2', '--c2', '1', '--output-dir', str(output_dir)])
    assert resultado.exit_code == 2


def test_records_lists_indexed_runs(runner, output_dir):
    runner.invoke(cli, ['analytic', '--output-dir', str(output_dir)])
    resultado = runner.invoke(cli, ['records', '--json'])
    assert resultado.exit_code == 0
    registros = json.loads(resultado.output)
    assert registros[0]['command'] == 'analytic'


def test_records_empty_index(runner, output_dir):
    resultado = runner.invoke(cli, ['records'])
    assert resultado.exit_code == 0
    assert 'Nenhum registro' in resultado.output


def test_version_option(runner):
    resultado = runner.invoke(cli, ['--version'])
    assert resultado.exit_code == 0
    assert 'grafo-completo' in resultado.output

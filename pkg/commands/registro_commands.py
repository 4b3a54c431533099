"""
Consulta do índice de registros de resultados
"""
import json

import click

import config
from models.result_model import ResultRecordModel


@click.command('records')
@click.option('--limite', type=int, default=20, show_default=True, help='Número máximo de registros')
@click.option('--hash', 'config_hash', help='Filtra por hash de configuração')
@click.option('--json', 'como_json', is_flag=True, help='Saída em JSON')
def records(limite, config_hash, como_json):
    """Lista os registros indexados (mais recentes primeiro)"""
    model = ResultRecordModel(config.DATABASE_PATH)
    registros = model.buscar_por_hash(config_hash) if config_hash else model.buscar_todos(limite=limite)
    if como_json:
        click.echo(json.dumps(registros, indent=2, ensure_ascii=False))
        return
    if not registros:
        click.echo('Nenhum registro encontrado')
        return
    for registro in registros:
        click.echo(
            f"📊 {registro['created_at']}  {registro['command']:<14} "
            f"{registro['config_hash'][:12]}  v{registro['tool_version']}"
        )
        for artefato in registro.get('artifacts') or []:
            click.echo(f'   📄 {artefato}')

"""
Aplicação de linha de comando do gerador de estados de grafo completo
"""
import logging

import click

import config
from commands.experiment_commands import COMMANDS
from commands.registro_commands import records


@click.group()
@click.option('--verbose', '-v', is_flag=True, help='Log em nível DEBUG')
@click.version_option(config.TOOL_VERSION, prog_name='grafo-completo')
def cli(verbose):
    """🎯 Estados de grafo completo em cadeias de spins por controle ótimo"""
    logging.basicConfig(
        level=logging.DEBUG if verbose else config.LOG_LEVEL,
        format='[%(name)s] %(message)s',
    )


# Registra comandos
for comando in COMMANDS:
    cli.add_command(comando)
cli.add_command(records)

if __name__ == '__main__':
    cli()

"""
Comandos de linha de comando dos experimentos
"""
import functools
import logging
from pathlib import Path
from typing import Dict, Optional

import click

import config
from erros import ConfigError, SimulacaoError
from models.experiment_config import ExperimentConfig
from models.result_model import ResultRecordModel
from services.experiment_service import CommandOutput, ExperimentService

logger = logging.getLogger(__name__)

EXIT_ERRO = 1
EXIT_CONFIG = 2


def tratar_erros(comando):
    """
    Converte erros da simulação em mensagem e código de saída
    (configuração malformada: 2, demais: 1)
    """
    @functools.wraps(comando)
    def wrapper(*args, **kwargs):
        try:
            return comando(*args, **kwargs)
        except ConfigError as e:
            click.echo(f'❌ Erro de configuração: {e}', err=True)
            raise SystemExit(EXIT_CONFIG)
        except SimulacaoError as e:
            logger.debug('Falha detalhada', exc_info=True)
            click.echo(f'❌ Erro: {e}', err=True)
            raise SystemExit(EXIT_ERRO)
    return wrapper


def opcoes_comuns(comando):
    """Opções de modelo e saída compartilhadas por todos os comandos"""
    opcoes = [
        click.option('--config', 'config_path', type=click.Path(path_type=Path), help='Arquivo YAML de configuração'),
        click.option('--mode', type=click.Choice(['ideal', 'rydberg']), help='Modelo da cadeia'),
        click.option('--n', 'n_sites', type=int, help='Número de qubits N'),
        click.option('--target-form', type=click.Choice(['literal', 'cz']), help='Forma do estado alvo'),
        click.option('--output-dir', help='Diretório dos artefatos'),
        click.option('--workers', type=int, default=None, help='Processos paralelos (padrão: WORKERS)'),
    ]
    for opcao in reversed(opcoes):
        comando = opcao(comando)
    return comando


def _overrides(kwargs: Dict) -> Dict:
    return {
        'modelo': {'modo': kwargs.pop('mode', None), 'n': kwargs.pop('n_sites', None),
                   'forma_alvo': kwargs.pop('target_form', None)},
        'saida': {'diretorio': kwargs.pop('output_dir', None)},
    }


def _servico(config_path: Optional[Path], overrides: Dict, workers: Optional[int]) -> ExperimentService:
    experimento = ExperimentConfig.load(config_path, overrides)
    registros = ResultRecordModel(config.DATABASE_PATH)
    return ExperimentService(experimento, registros, workers or config.WORKERS)


def _mostrar(titulo: str, saida: CommandOutput) -> None:
    click.echo(f'✅ {titulo}')
    for chave, valor in saida.payload.items():
        if isinstance(valor, float):
            click.echo(f'   {chave}: {valor:.6f}')
        elif not isinstance(valor, (list, dict)):
            click.echo(f'   {chave}: {valor}')
    for artefato in saida.artifacts:
        click.echo(f'📄 {artefato}')


def _grape_overrides(overrides: Dict, **valores) -> Dict:
    overrides['grape'] = {chave: valor for chave, valor in valores.items()}
    return overrides


@click.command('optimize')
@opcoes_comuns
@click.option('--t', 'duration', type=float, help='Duração T (us, ou unidades de 1/J no modo ideal)')
@click.option('--guess', type=click.Choice(['gaussian', 'random']), help='Tipo de campo inicial')
@click.option('--b0', type=float, help='Amplitude B0 do campo inicial')
@click.option('--slices', type=int, help='Número de fatias n')
@click.option('--seed', type=int, help='Semente do campo aleatório')
@click.option('--restarts', type=int, help='Reinícios aleatórios adicionais')
@tratar_erros
def optimize(config_path, workers, duration, guess, b0, slices, seed, restarts, **kwargs):
    """Otimiza B(t) para o estado de grafo completo"""
    overrides = _grape_overrides(
        _overrides(kwargs), t=duration, chute=guess, b0=b0, fatias=slices, semente=seed, reinicios=restarts
    )
    saida = _servico(config_path, overrides, workers).run_optimize()
    _mostrar('Otimização concluída', saida)


@click.command('scan-t')
@opcoes_comuns
@click.option('--t-min', type=float, help='Menor T da varredura')
@click.option('--t-max', type=float, help='Maior T da varredura')
@click.option('--steps', type=int, help='Pontos da grade')
@click.option('--guess', type=click.Choice(['gaussian', 'random']))
@tratar_erros
def scan_t(config_path, workers, t_min, t_max, steps, guess, **kwargs):
    """Otimiza numa grade de T e lista os picos"""
    overrides = _grape_overrides(_overrides(kwargs), t_min=t_min, t_max=t_max, passos=steps, chute=guess)
    saida = _servico(config_path, overrides, workers).run_scan()
    _mostrar('Varredura de T concluída', saida)
    picos = ', '.join(f'{t:.4f}' for t in saida.payload['peak_durations'])
    click.echo(f'🎯 Picos em T = {picos or "nenhum"}')


def _parse_sigmas(valor: Optional[str]):
    if valor is None:
        return None
    try:
        partes = [float(x) for x in valor.split(',')]
    except ValueError as e:
        raise ConfigError(f'--position-sigma inválido: {valor!r}') from e
    if len(partes) != 3:
        raise ConfigError('--position-sigma precisa de 3 valores: x,y,z')
    return partes


@click.command('noise')
@opcoes_comuns
@click.option('--schedule', 'schedule_path', type=click.Path(path_type=Path), help='Campo otimizado salvo (JSON)')
@click.option('--position-sigma', help='Desvios de posição em nm: x,y,z')
@click.option('--field-sigma', type=float, help='Desvio do campo em MHz (x 2pi)')
@click.option('--samples', type=int, help='Amostras do ensemble')
@click.option('--seed', type=int, help='Semente base')
@click.option('--delta-r', type=float, help='Deslocamento determinístico das distâncias (nm)')
@click.option('--sweep-delta-r', is_flag=True, help='Varre delta_r de -300 a 300 nm')
@tratar_erros
def noise(config_path, workers, schedule_path, position_sigma, field_sigma, samples, seed, delta_r,
          sweep_delta_r, **kwargs):
    """Média de ensemble sob ruído de posição e/ou de campo"""
    overrides = _overrides(kwargs)
    overrides['ruido'] = {
        'sigma_posicao_nm': _parse_sigmas(position_sigma),
        'sigma_campo_mhz': field_sigma,
        'amostras': samples,
        'semente': seed,
        'delta_r_nm': delta_r,
    }
    servico = _servico(config_path, overrides, workers)
    if sweep_delta_r:
        _mostrar('Varredura de delta_r concluída', servico.run_delta_r_sweep(schedule_path))
    else:
        _mostrar('Ensemble concluído', servico.run_noise(schedule_path))


@click.command('master')
@opcoes_comuns
@click.option('--schedule', 'schedule_path', type=click.Path(path_type=Path))
@click.option('--tau-up', type=float, help='Tempo de vida do nível up (us)')
@click.option('--tau-down', type=float, help='Tempo de vida do nível down (us)')
@tratar_erros
def master(config_path, workers, schedule_path, tau_up, tau_down, **kwargs):
    """Equação mestra com decaimento espontâneo"""
    overrides = _overrides(kwargs)
    overrides['dissipacao'] = {'tau_up_us': tau_up, 'tau_down_us': tau_down}
    _mostrar('Equação mestra concluída', _servico(config_path, overrides, workers).run_master(schedule_path))


@click.command('analytic')
@opcoes_comuns
@click.option('--c1', type=int, default=0, show_default=True)
@click.option('--c2', type=int, default=0, show_default=True)
@click.option('--coupling', type=float, help='J da solução fechada')
@click.option('--scan', is_flag=True, help='Também varre a grade (B, t)')
@tratar_erros
def analytic(config_path, workers, c1, c2, coupling, scan, **kwargs):
    """Solução de campo constante para N=3"""
    overrides = _overrides(kwargs)
    overrides['modelo']['acoplamento'] = coupling
    _mostrar('Solução analítica', _servico(config_path, overrides, workers).run_analytic(c1, c2, scan))


@click.command('protocol')
@opcoes_comuns
@click.option('--schedule', 'schedule_path', type=click.Path(path_type=Path))
@tratar_erros
def protocol(config_path, workers, schedule_path, **kwargs):
    """Protocolo completo em etapas (preparação, núcleo, desacoplamento, mapeamento)"""
    saida = _servico(config_path, _overrides(kwargs), workers).run_protocol(schedule_path)
    _mostrar('Protocolo concluído', saida)
    for etapa in saida.payload['stages']:
        click.echo(f"   {etapa['stage']:>16} t={etapa['time']:.4f}  "
                   f"psi_1={etapa['psi_1']:.4f} psi_2={etapa['psi_2']:.4f} "
                   f"psi_3={etapa['psi_3']:.4f} psi_4={etapa['psi_4']:.4f}")


@click.command('table')
@click.argument('which', type=click.Choice(['1', '2', '3']))
@opcoes_comuns
@tratar_erros
def table(which, config_path, workers, **kwargs):
    """Reproduz a tabela 1, 2 ou 3"""
    tabela = _servico(config_path, _overrides(kwargs), workers).run_table(int(which))
    click.echo(tabela.render())
    for artefato in tabela.artifacts:
        click.echo(f'📄 {artefato}')


COMMANDS = (optimize, scan_t, noise, master, analytic, protocol, table)

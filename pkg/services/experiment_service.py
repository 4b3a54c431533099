"""
Serviço que orquestra os experimentos: executa, grava artefatos e indexa
os registros
"""
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

import config
from erros import ConfigError
from models.artifact_writer import write_csv, write_json
from models.basis import PROTOCOL
from models.experiment_config import ExperimentConfig
from models.result_model import ResultRecordModel
from models.schedule import ControlSchedule, GrapeResult, load_result, save_result
from services.analytic_service import (
    analytic_population_trace,
    constant_field_params,
    scan_constant_field,
    verify_solution,
)
from services.dynamics_service import (
    default_delta_grid,
    delta_r_sweep,
    ensemble_average,
    evolve_master,
    spin_density_matrix,
    vibration_delta,
)
from services.grape_service import (
    GaussianGuess,
    GrapeConfig,
    LearningSettings,
    RandomGuess,
    optimize_with_restarts,
    population_trace,
    scan_duration,
)
from services.graph_targets import plus_product_state
from services.protocol_service import ProtocolPlan, default_plan, preparation_error, run_full_protocol
from services.quantum_core import state_to_records

logger = logging.getLogger(__name__)

TABLE_SIZES = (3, 4, 5, 6)


@dataclass
class CommandOutput:
    """Resumo de um comando e os arquivos que ele escreveu"""
    payload: Dict
    artifacts: List[Path] = field(default_factory=list)


@dataclass
class TableOutput:
    title: str
    header: List[str]
    rows: List[List]
    artifacts: List[Path] = field(default_factory=list)

    def render(self) -> str:
        """Tabela em texto com colunas alinhadas"""
        celulas = [self.header] + [[_format_cell(v) for v in linha] for linha in self.rows]
        larguras = [max(len(str(linha[i])) for linha in celulas) for i in range(len(self.header))]
        linhas = [self.title, '']
        for k, linha in enumerate(celulas):
            linhas.append('  '.join(str(v).rjust(w) for v, w in zip(linha, larguras)))
            if k == 0:
                linhas.append('  '.join('-' * w for w in larguras))
        return '\n'.join(linhas)


def _format_cell(valor) -> str:
    if isinstance(valor, float):
        return f'{valor:.4f}'
    return str(valor)


class ExperimentService:
    """
    Executa os comandos a partir de uma ExperimentConfig

    Todos os artefatos levam o hash da configuração no nome e no conteúdo.
    """

    def __init__(
        self,
        experimento: ExperimentConfig,
        registros: Optional[ResultRecordModel] = None,
        workers: int = config.WORKERS,
    ):
        self.experimento = experimento
        self.registros = registros
        self.workers = max(1, int(workers))
        self.config_hash = experimento.config_hash

    # Utilitários

    def _artifact(self, nome: str, extensao: str) -> Path:
        return self.experimento.output_dir / f'{nome}_{self.config_hash[:12]}.{extensao}'

    def _write_json(self, nome: str, dados: Dict) -> Path:
        registro = {**dados, 'config_hash': self.config_hash, 'constants_version': config.CONSTANTS_VERSION}
        return write_json(self._artifact(nome, 'json'), registro)

    def _write_csv(self, nome: str, cabecalho: Sequence[str], linhas) -> Path:
        return write_csv(self._artifact(nome, 'csv'), cabecalho, linhas, self.config_hash)

    def _register(self, command: str, saida: CommandOutput) -> CommandOutput:
        if self.registros is not None:
            if not self.registros.inserir(self.config_hash, command, saida.payload, saida.artifacts):
                logger.warning('Registro de %s não foi indexado', command)
        return saida

    def grape_config(self, experimento: Optional[ExperimentConfig] = None, duration: Optional[float] = None) -> GrapeConfig:
        """GrapeConfig derivada das seções modelo e grape"""
        experimento = experimento or self.experimento
        g = experimento.grape
        n_sites = experimento.modelo.n
        b0 = experimento.guess_amplitude()
        if g.chute == 'gaussian':
            guess = GaussianGuess(b0=b0, sigma=g.sigma, slices=g.fatias or config.GAUSSIAN_SLICES)
        else:
            guess = RandomGuess(b0=b0, seed=g.semente, slices=g.fatias or config.RANDOM_SLICES)
        learning = LearningSettings(
            initial_rate=g.taxa_inicial,
            backtracking=g.backtracking,
            rate_floor=g.taxa_minima,
            max_iterations=g.max_iteracoes,
            stop_tolerance=g.tolerancia,
            patience=g.paciencia,
            stall_population=g.limiar_estagnacao,
        )
        return GrapeConfig(
            model=experimento.build_model(n_sites),
            target=experimento.target(n_sites),
            duration=duration if duration is not None else experimento.duration(n_sites),
            guess=guess,
            learning=learning,
        )

    def _optimize(self, experimento: ExperimentConfig, duration: Optional[float] = None) -> GrapeResult:
        grape_config = self.grape_config(experimento, duration)
        psi0 = plus_product_state(experimento.modelo.n)
        resultado = optimize_with_restarts(
            grape_config, psi0, restarts=experimento.grape.reinicios, base_seed=experimento.grape.semente,
            stall_restarts=experimento.grape.reinicios_estagnacao,
        )
        resultado.metadata['config_hash'] = self.config_hash
        return resultado

    def obtain_schedule(self, schedule_path: Optional[Path] = None, experimento: Optional[ExperimentConfig] = None) -> GrapeResult:
        """
        Campo salvo em `schedule_path` ou otimizado na hora

        Raises:
            ArtifactMissingError: se o caminho informado não existe
        """
        if schedule_path is not None:
            resultado = load_result(schedule_path)
            experimento = experimento or self.experimento
            if resultado.metadata.get('N') not in (None, experimento.modelo.n):
                raise ConfigError(
                    f"Campo salvo para N={resultado.metadata['N']}, configuração pede N={experimento.modelo.n}"
                )
            return resultado
        return self._optimize(experimento or self.experimento)

    def _problem_states(self, experimento: Optional[ExperimentConfig] = None):
        experimento = experimento or self.experimento
        n_sites = experimento.modelo.n
        return experimento.build_model(n_sites), plus_product_state(n_sites), experimento.target(n_sites).build()

    def _plan(self, experimento: ExperimentConfig, schedule: ControlSchedule) -> ProtocolPlan:
        """Plano em etapas com as frequências de Rabi da seção protocolo"""
        n_sites = experimento.modelo.n
        p = experimento.protocolo
        return default_plan(
            n_sites, schedule, experimento.build_model(n_sites),
            rabi=config.mhz(p.rabi_mhz), rabi_mw_a=config.mhz(p.rabi_mw_a_mhz),
            rabi_mw_b=config.mhz(p.rabi_mw_b_mhz),
        )

    # Comandos

    def run_optimize(self) -> CommandOutput:
        resultado = self._optimize(self.experimento)
        m = self.experimento.modelo
        nome = f'otimizacao_{m.modo}_N{m.n}'
        caminho_json = save_result(resultado, self._artifact(nome, 'json'))
        caminho_csv = self._write_csv(
            f'{nome}_convergencia', ['iteracao', 'phi'], enumerate(resultado.phi_history)
        )
        modelo, psi0, alvo = self._problem_states()
        curva = population_trace(modelo, resultado.schedule, psi0, alvo)
        tempos = resultado.schedule.boundaries()
        amplitudes = list(resultado.schedule.amplitudes) + [float('nan')]
        caminho_curva = self._write_csv(
            f'{nome}_curva', ['t', 'populacao', 'B'],
            ([t, p, b] for t, p, b in zip(tempos, curva, amplitudes)),
        )
        payload = {
            'mode': m.modo, 'N': m.n, 'T': resultado.schedule.duration,
            'final_population': resultado.final_population,
            'iterations': resultado.iterations, 'converged': resultado.converged,
        }
        return self._register('optimize', CommandOutput(payload, [caminho_json, caminho_csv, caminho_curva]))

    def run_scan(self) -> CommandOutput:
        g = self.experimento.grape
        grape_config = self.grape_config(duration=g.t_min)
        varredura = scan_duration(
            grape_config, g.t_min, g.t_max, g.passos,
            psi0=plus_product_state(self.experimento.modelo.n),
            restarts=g.reinicios, base_seed=g.semente, workers=self.workers,
            peak_height=g.altura_pico, peak_prominence=g.proeminencia_pico,
        )
        picos = set(int(i) for i in varredura.peak_indices)
        caminho_csv = self._write_csv(
            'varredura_t', ['T', 'populacao', 'pico'],
            ([t, p, int(i in picos)] for i, (t, p) in enumerate(zip(varredura.durations, varredura.populations))),
        )
        picos_dados = [
            {'T': float(t), 'population': float(p), **schedule.to_dict()}
            for t, p, schedule in zip(varredura.peak_durations, varredura.peak_populations, varredura.peak_schedules)
        ]
        caminho_json = self._write_json('varredura_t_picos', {'peaks': picos_dados})
        payload = {
            'peak_durations': [float(t) for t in varredura.peak_durations],
            'peak_populations': [float(p) for p in varredura.peak_populations],
        }
        return self._register('scan-t', CommandOutput(payload, [caminho_csv, caminho_json]))

    def run_noise(self, schedule_path: Optional[Path] = None) -> CommandOutput:
        resultado = self.obtain_schedule(schedule_path)
        modelo, psi0, alvo = self._problem_states()
        spec = self.experimento.noise_spec()
        ensemble = ensemble_average(modelo, resultado.schedule, spec, psi0, alvo, workers=self.workers)
        sem_ruido = population_trace(modelo, resultado.schedule, psi0, alvo)
        caminho_csv = self._write_csv(
            'ruido_ensemble', ['t', 'media', 'minimo', 'maximo', 'sem_ruido'],
            zip(ensemble.times, ensemble.mean, ensemble.minimum, ensemble.maximum, sem_ruido),
        )
        payload = {**ensemble.summary(), 'noiseless_final': float(sem_ruido[-1]), 'N': self.experimento.modelo.n}
        caminho_json = self._write_json('ruido_resumo', payload)
        payload.pop('seeds')
        return self._register('noise', CommandOutput(payload, [caminho_csv, caminho_json]))

    def run_delta_r_sweep(self, schedule_path: Optional[Path] = None) -> CommandOutput:
        resultado = self.obtain_schedule(schedule_path)
        modelo, psi0, alvo = self._problem_states()
        grade = default_delta_grid()
        populacoes = delta_r_sweep(modelo, resultado.schedule, grade, psi0, alvo)
        caminho = self._write_csv('delta_r', ['delta_r_nm', 'populacao'], zip(grade, populacoes))
        payload = {'N': self.experimento.modelo.n, 'min_population': float(populacoes.min())}
        return self._register('noise-delta-r', CommandOutput(payload, [caminho]))

    def run_master(self, schedule_path: Optional[Path] = None) -> CommandOutput:
        resultado = self.obtain_schedule(schedule_path)
        modelo, psi0, alvo = self._problem_states()
        n_sites = self.experimento.modelo.n
        fechado = population_trace(modelo, resultado.schedule, psi0, alvo)
        aberto = evolve_master(
            modelo, resultado.schedule, self.experimento.jump_channels(),
            spin_density_matrix(psi0, n_sites), alvo, substep=self.experimento.dissipacao.subpasso_us,
        )
        caminho_csv = self._write_csv(
            'equacao_mestra', ['t', 'populacao_fechada', 'populacao_lindblad'],
            zip(aberto.times, fechado, aberto.populations),
        )
        payload = {
            'N': n_sites,
            'closed_final': float(fechado[-1]),
            'master_final': aberto.final_population,
            'dissipation_delta': float(fechado[-1] - aberto.final_population),
        }
        caminho_json = self._write_json('equacao_mestra_resumo', payload)
        return self._register('master', CommandOutput(payload, [caminho_csv, caminho_json]))

    def run_analytic(self, c1: int, c2: int, scan: bool = False) -> CommandOutput:
        acoplamento = abs(self.experimento.modelo.acoplamento)
        solucao = constant_field_params(c1, c2, acoplamento)
        verificada = verify_solution(solucao, acoplamento)
        tempos = np.linspace(0.0, solucao.t_star, 201)
        curva = analytic_population_trace(acoplamento, solucao.field, tempos)
        artefatos = [
            self._write_csv(f'analitico_C{c1}_{c2}_curva', ['t', 'populacao'], zip(tempos, curva)),
        ]
        payload = {**solucao.to_dict(), 'J': acoplamento, 'verified_population': verificada}
        if scan:
            limite_b = 4 * abs(solucao.field) + 4 * acoplamento
            varredura = scan_constant_field(
                acoplamento,
                np.linspace(-limite_b, limite_b, 161),
                np.linspace(0.0, 2 * solucao.t_star + np.pi / acoplamento, 161),
            )
            artefatos.append(self._write_csv(
                'analitico_grade', ['B', 't', 'populacao'],
                ([b, t, varredura.populations[i, j]]
                 for i, b in enumerate(varredura.b_grid) for j, t in enumerate(varredura.t_grid)),
            ))
            payload['grid_maxima'] = [list(m) for m in varredura.maxima]
        artefatos.append(self._write_json(f'analitico_C{c1}_{c2}', payload))
        return self._register('analytic', CommandOutput(payload, artefatos))

    def run_protocol(self, schedule_path: Optional[Path] = None) -> CommandOutput:
        experimento = self.experimento.with_mode('rydberg')
        resultado = self.obtain_schedule(schedule_path, experimento)
        n_sites = experimento.modelo.n
        execucao = run_full_protocol(self._plan(experimento, resultado.schedule))
        caminho_csv = self._write_csv(
            'protocolo_linha_do_tempo', ['t', 'psi_1', 'psi_2', 'psi_3', 'psi_4', 'etapa'],
            ([t, *pops, etapa] for t, pops, etapa in execucao.timeline),
        )
        payload = {
            'N': n_sites,
            'total_duration': execucao.total_duration,
            'final_population': execucao.final_population,
            'core_population': resultado.final_population,
            'preparation_error': preparation_error(execucao, resultado.final_population),
            'stages': execucao.stage_populations,
        }
        caminho_json = self._write_json(
            'protocolo_resumo', {**payload, 'final_state': state_to_records(execucao.final_state, PROTOCOL)}
        )
        return self._register('protocol', CommandOutput(payload, [caminho_csv, caminho_json]))

    # Tabelas

    def _table_populations(self, modo: str, referencia: Dict) -> List[Tuple[int, float, float, float]]:
        linhas = []
        for n_sites in TABLE_SIZES:
            experimento = self.experimento.with_mode(modo).with_n(n_sites)
            duracao, esperado = referencia[n_sites]
            resultado = self._optimize(experimento, duracao)
            linhas.append((n_sites, duracao, resultado.final_population, esperado))
        return linhas

    def run_table(self, which: int) -> TableOutput:
        """
        Reproduz a tabela 1 (ideal), 2 (Rydberg) ou 3 (orçamento de erro)

        Raises:
            ConfigError: tabela desconhecida
        """
        if which == 1:
            linhas = self._table_populations('ideal', config.TABLE_IDEAL)
            tabela = TableOutput('Tabela 1: cadeia XX ideal (T em unidades de 1/J)',
                                 ['N', 'T', 'populacao', 'referencia'], [list(l) for l in linhas])
        elif which == 2:
            linhas = self._table_populations('rydberg', config.TABLE_RYDBERG)
            tabela = TableOutput('Tabela 2: cadeia de Rydberg (T em us)',
                                 ['N', 'T', 'populacao', 'referencia'], [list(l) for l in linhas])
        elif which == 3:
            tabela = self._error_budget()
        else:
            raise ConfigError(f'Tabela desconhecida: {which} (use 1, 2 ou 3)')
        tabela.artifacts.append(self._write_csv(f'tabela_{which}', tabela.header, tabela.rows))
        self._register(f'table-{which}', CommandOutput({'rows': tabela.rows}, list(tabela.artifacts)))
        return tabela

    def _error_budget(self) -> TableOutput:
        """
        Orçamento de erro por N: fechado - dissipação - vibração (+-100 nm)
        - preparação/desacoplamento (valor de N=3 aplicado a todos)
        """
        base = self.experimento.with_mode('rydberg')
        resultados = {}
        for n_sites in TABLE_SIZES:
            experimento = base.with_n(n_sites)
            resultados[n_sites] = self._optimize(experimento, config.TABLE_RYDBERG[n_sites][0])

        plano = self._plan(base.with_n(3), resultados[3].schedule)
        preparo = preparation_error(run_full_protocol(plano), resultados[3].final_population)

        linhas = []
        for n_sites in TABLE_SIZES:
            experimento = base.with_n(n_sites)
            modelo, psi0, alvo = self._problem_states(experimento)
            schedule = resultados[n_sites].schedule
            fechado = resultados[n_sites].final_population
            aberto = evolve_master(
                modelo, schedule, experimento.jump_channels(),
                spin_density_matrix(psi0, n_sites), alvo, substep=experimento.dissipacao.subpasso_us,
            )
            dissipacao = fechado - aberto.final_population
            vibracao = vibration_delta(modelo, schedule, psi0, alvo)
            final = fechado - dissipacao - vibracao - preparo
            linhas.append([n_sites, fechado, dissipacao, vibracao, preparo, final,
                           config.TABLE_ERROR_BUDGET['populacao'][n_sites]])
        return TableOutput(
            'Tabela 3: estimativa de erro da população',
            ['N', 'fechado', 'dissipacao', 'vibracao', 'preparacao', 'P_O', 'referencia'],
            linhas,
        )

"""
Serviço de dinâmica aberta e ruidosa

Equação mestra de Lindblad com emissão espontânea para |g>, desordem
geométrica estática, ruído no campo e médias de Monte Carlo.
"""
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import List, Sequence

import numpy as np
from scipy.linalg import expm

import config
from erros import ConfigError, DimensionError, EnsembleError, MasterEquationError
from models.basis import SPIN, SPIN_SINK, LocalBasis
from models.geometry import ChainGeometry, IdealModel, ModelKind, RydbergModel
from models.noise import JumpChannels, NoiseSpec
from models.schedule import ControlSchedule
from services.chain_model import assemble_system
from services.grape_service import ControlProblem
from services.quantum_core import (
    DensityMatrix,
    StateVector,
    embed_into_basis,
    embed_local_operator,
    infer_sites,
    population,
    to_density_matrix,
    validate_density_matrix,
)

logger = logging.getLogger(__name__)

GEOMETRY_STREAM = 0
FIELD_STREAM = 1
TRACE_TOL = 1e-8
NM_TO_UM = 1e-3


@dataclass
class MasterResult:
    """Estado final e população do alvo em cada fronteira de fatia"""
    rho: DensityMatrix
    times: np.ndarray
    populations: np.ndarray

    @property
    def final_population(self) -> float:
        return float(self.populations[-1])


class LindbladPropagator:
    """
    Integrador RK4 com fator integrante para
    d rho/dt = -i(H_eff rho - rho H_eff^dagger) + soma gamma s rho s^dagger

    com H_eff = H0 + B Hz - (i/2) soma gamma s^dagger s. A parte coerente
    de cada subpasso é exata; RK4 só atua no termo de salto.
    """

    def __init__(self, h0: np.ndarray, hz: np.ndarray, jumps: JumpChannels, n_sites: int,
                 basis: LocalBasis = SPIN_SINK):
        self.h0 = h0
        self.hz = hz
        self.n_sites = n_sites
        self.basis = basis
        self._saltos = []
        perda = np.zeros(h0.shape[0])
        for canal in jumps.channels:
            origem, destino = basis.index(canal.source), basis.index(canal.sink)
            if canal.rate == 0:
                continue
            for site in range(n_sites):
                self._saltos.append((site, origem, destino, canal.rate))
                projetor = embed_local_operator(basis.projector(canal.source), site, n_sites, basis)
                perda += canal.rate * np.real(np.diag(projetor))
        self._anticomutador = np.diag(perda)

    @property
    def has_jumps(self) -> bool:
        return bool(self._saltos)

    def jump_term(self, rho: DensityMatrix) -> DensityMatrix:
        """soma_i gamma s_i rho s_i^dagger por reindexação do tensor"""
        d, n = self.basis.dim, self.n_sites
        if not self._saltos:
            return np.zeros_like(rho)
        tensor = rho.reshape((d,) * (2 * n))
        saida = np.zeros_like(tensor)
        for site, origem, destino, taxa in self._saltos:
            fonte = [slice(None)] * (2 * n)
            alvo = [slice(None)] * (2 * n)
            fonte[site] = fonte[n + site] = origem
            alvo[site] = alvo[n + site] = destino
            saida[tuple(alvo)] += taxa * tensor[tuple(fonte)]
        return saida.reshape(rho.shape)

    def step_operators(self, field_value: float, h: float):
        """(E(h/2), E(h)) com E(t) = exp(-i H_eff t)"""
        h_eff = self.h0 + field_value * self.hz - 0.5j * self._anticomutador
        meio = expm(-0.5j * h * h_eff)
        return meio, meio @ meio

    def step(self, rho: DensityMatrix, h: float, meio: np.ndarray, inteiro: np.ndarray) -> DensityMatrix:
        def half(x):
            return meio @ x @ meio.conj().T

        def full(x):
            return inteiro @ x @ inteiro.conj().T

        salto = self.jump_term
        y_full = full(rho)
        if not self._saltos:
            return y_full
        y_half = half(rho)
        n0 = salto(rho)
        na = salto(y_half + 0.5 * h * half(n0))
        nb = salto(y_half + 0.5 * h * na)
        nc = salto(y_full + h * half(nb))
        return y_full + (h / 6.0) * (full(n0) + 2.0 * half(na) + 2.0 * half(nb) + nc)


def _substeps(slice_duration: float, substep: float) -> int:
    return max(1, math.ceil(slice_duration / min(slice_duration, substep) - 1e-12))


def _integrate(
    propagador: LindbladPropagator,
    schedule: ControlSchedule,
    rho0: DensityMatrix,
    target: StateVector,
    substep: float,
    validate: bool,
) -> MasterResult:
    dt = schedule.slice_duration
    m = _substeps(dt, substep)
    h = dt / m
    rho = np.array(rho0, dtype=complex)
    populacoes = [population(rho, target)]
    for k, b in enumerate(schedule.amplitudes):
        meio, inteiro = propagador.step_operators(float(b), h)
        for _ in range(m):
            rho = propagador.step(rho, h, meio, inteiro)
        rho = 0.5 * (rho + rho.conj().T)
        if not np.all(np.isfinite(rho)):
            raise MasterEquationError(f'rho não finita na fatia {k}')
        traco = float(np.real(np.trace(rho)))
        if abs(traco - 1.0) > TRACE_TOL:
            raise MasterEquationError(f'Traço {traco:.12f} na fatia {k} (passo {h:.2e} grande demais)')
        if validate:
            validate_density_matrix(rho)
        populacoes.append(population(rho, target))
    return MasterResult(rho, schedule.boundaries(), np.array(populacoes))


def _lift_target(target: StateVector, n_sites: int) -> StateVector:
    target = np.asarray(target, dtype=complex)
    if target.size == 2 ** n_sites:
        return embed_into_basis(target, n_sites, SPIN_SINK)
    return target


def spin_density_matrix(psi: StateVector, n_sites: int) -> DensityMatrix:
    """rho0 na base {up, down, g} a partir de um estado de spin puro"""
    return to_density_matrix(embed_into_basis(psi, n_sites, SPIN_SINK))


def evolve_master(
    model: ModelKind,
    schedule: ControlSchedule,
    jumps: JumpChannels,
    rho0: DensityMatrix,
    target: StateVector,
    substep: float = config.MASTER_MAX_SUBSTEP_US,
    verify_step: bool = True,
    validate: bool = True,
) -> MasterResult:
    """
    Integra a equação de Lindblad em [0, T] com o campo constante por partes

    Args:
        model: Modelo da cadeia (embutido na base {up, down, g})
        schedule: Campo B(t)
        jumps: Canais de decaimento
        rho0: Matriz densidade inicial de dimensão 3^N
        target: Alvo de dimensão 2^N ou 3^N
        substep: Subpasso máximo; o efetivo é min(dt da fatia, substep)
        verify_step: Refaz com metade do passo e compara a população final
        validate: Checa hermiticidade, traço e positividade a cada fatia

    Returns:
        MasterResult com rho(T) e a curva de população

    Raises:
        HermiticityError: se rho0 não é uma matriz densidade válida
        MasterEquationError: se o traço deriva ou a divisão do passo muda
            a população final em 1e-6 ou mais
        DimensionError: acima do limite de dimensão
    """
    rho0 = np.asarray(rho0, dtype=complex)
    if rho0.shape[0] > config.MAX_DIM_LINDBLAD:
        raise DimensionError(f'Dimensão {rho0.shape[0]} acima do limite {config.MAX_DIM_LINDBLAD}')
    n_sites = infer_sites(rho0.shape[0], SPIN_SINK)
    validate_density_matrix(rho0)
    alvo = _lift_target(target, n_sites)
    h0, hz = assemble_system(model, n_sites, SPIN_SINK)
    propagador = LindbladPropagator(h0, hz, jumps, n_sites)

    resultado = _integrate(propagador, schedule, rho0, alvo, substep, validate)
    if verify_step and propagador.has_jumps:
        h = schedule.slice_duration / _substeps(schedule.slice_duration, substep)
        refinado = _integrate(propagador, schedule, rho0, alvo, h / 2, False)
        diferenca = abs(refinado.final_population - resultado.final_population)
        if diferenca >= config.MASTER_HALVING_TOLERANCE:
            raise MasterEquationError(
                f'Passo não convergido: população muda {diferenca:.2e} ao dividir o passo'
            )
    logger.info(
        'Equação mestra: N=%d, T=%g, população final %.6f',
        n_sites, schedule.duration, resultado.final_population,
    )
    return resultado


def no_jump_population(
    model: ModelKind,
    schedule: ControlSchedule,
    jumps: JumpChannels,
    psi0: StateVector,
    target: StateVector,
) -> float:
    """
    População do alvo pelo Hamiltoniano efetivo não hermitiano

    Como o decaimento leva a |g>, que não acopla de volta, a população de
    um alvo sem componente em |g> coincide com a da equação mestra.
    """
    n_sites = infer_sites(np.size(psi0))
    h0, hz = assemble_system(model, n_sites, SPIN)
    perda = np.zeros(h0.shape[0])
    for canal in jumps.channels:
        if canal.source not in SPIN.levels:
            continue
        for site in range(n_sites):
            perda += canal.rate * np.real(np.diag(embed_local_operator(SPIN.projector(canal.source), site, n_sites)))
    dt = schedule.slice_duration
    psi = np.asarray(psi0, dtype=complex)
    for b in schedule.amplitudes:
        psi = expm(-1j * dt * (h0 + b * hz - 0.5j * np.diag(perda))) @ psi
    return float(abs(np.vdot(np.asarray(target, dtype=complex), psi)) ** 2)


def _rng(seed: int, stream: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(stream,)))


def sample_geometry_noise(geometry: ChainGeometry, spec: NoiseSpec, sample_index: int) -> ChainGeometry:
    """
    Geometria perturbada da amostra `sample_index`

    Com delta_r definido, todas as distâncias ganham o mesmo deslocamento
    e os ângulos ficam fixos. Caso contrário cada átomo recebe um
    deslocamento gaussiano estático (sigma_x, sigma_y, sigma_z) no
    referencial da pinça (ChainGeometry.trap_axes): z, o eixo do feixe,
    fica transversal à cadeia.

    Raises:
        GeometryError: se dois átomos deslocados coincidem
    """
    if spec.delta_r_nm is not None:
        return geometry.with_distance_offset(spec.delta_r_nm * NM_TO_UM)
    sigmas = np.asarray(spec.position_sigma_nm) * NM_TO_UM
    if not np.any(sigmas):
        return geometry
    rng = _rng(spec.base_seed + sample_index, GEOMETRY_STREAM)
    deslocamentos = rng.normal(0.0, 1.0, size=(geometry.n_sites, 3)) * sigmas
    return geometry.displaced(deslocamentos @ geometry.trap_axes())


def sample_field_noise(schedule: ControlSchedule, field_sigma: float, seed: int) -> ControlSchedule:
    """B_k + delta B_k com delta B_k ~ N(0, field_sigma) independente por fatia"""
    if field_sigma < 0:
        raise ConfigError(f'field_sigma deve ser >= 0, recebeu {field_sigma}')
    if field_sigma == 0:
        return schedule
    rng = _rng(seed, FIELD_STREAM)
    return schedule.with_amplitudes(schedule.amplitudes + rng.normal(0.0, field_sigma, schedule.slices))


@dataclass
class EnsembleResult:
    times: np.ndarray
    traces: np.ndarray
    seeds: List[int]

    @property
    def mean(self) -> np.ndarray:
        return self.traces.mean(axis=0)

    @property
    def minimum(self) -> np.ndarray:
        return self.traces.min(axis=0)

    @property
    def maximum(self) -> np.ndarray:
        return self.traces.max(axis=0)

    @property
    def finals(self) -> np.ndarray:
        return self.traces[:, -1]

    @property
    def mean_final(self) -> float:
        return float(self.finals.mean())

    @property
    def std_final(self) -> float:
        return float(self.finals.std(ddof=1)) if self.finals.size > 1 else 0.0

    def summary(self) -> dict:
        return {
            'samples': len(self.seeds),
            'mean_final': self.mean_final,
            'std_final': self.std_final,
            'min_final': float(self.finals.min()),
            'max_final': float(self.finals.max()),
            'seeds': list(self.seeds),
        }


def _sample_trace(argumentos) -> np.ndarray:
    model, schedule, spec, indice, psi0, target = argumentos
    seed = spec.base_seed + indice
    try:
        if spec.has_position_noise:
            model = RydbergModel(sample_geometry_noise(model.geometry, spec, indice))
        campo = sample_field_noise(schedule, spec.field_sigma, seed)
        problema = ControlProblem.from_model(model, psi0, target)
        return problema.population_trace(campo.amplitudes, campo.duration)
    except Exception as e:
        raise EnsembleError(seed, e) from e


def ensemble_average(
    model: ModelKind,
    schedule: ControlSchedule,
    spec: NoiseSpec,
    psi0: StateVector,
    target: StateVector,
    workers: int = 1,
) -> EnsembleResult:
    """
    Média de Monte Carlo sobre amostras de ruído com o campo fixo

    A amostra i usa a semente base_seed + i; o resultado não depende da
    ordem de execução.

    Raises:
        ConfigError: ruído de posição pedido no modelo ideal
        EnsembleError: primeira amostra que falhou, com sua semente
    """
    if spec.has_position_noise and isinstance(model, IdealModel):
        raise ConfigError('Ruído de posição exige o modelo rydberg')
    tarefas = [(model, schedule, spec, i, psi0, target) for i in range(spec.samples)]
    try:
        if workers > 1:
            with ProcessPoolExecutor(max_workers=workers) as executor:
                curvas = list(executor.map(_sample_trace, tarefas))
        else:
            curvas = [_sample_trace(t) for t in tarefas]
    except EnsembleError as e:
        logger.error('Amostra do ensemble falhou (semente %d): %s', e.seed, e.causa)
        raise
    resultado = EnsembleResult(
        times=schedule.boundaries(),
        traces=np.array(curvas),
        seeds=[spec.base_seed + i for i in range(spec.samples)],
    )
    logger.info(
        'Ensemble de %d amostras: média final %.6f (desvio %.6f)',
        spec.samples, resultado.mean_final, resultado.std_final,
    )
    return resultado


def _require_rydberg(model: ModelKind) -> RydbergModel:
    if not isinstance(model, RydbergModel):
        raise ConfigError('O erro de distância só se aplica ao modelo rydberg')
    return model


def delta_r_sweep(
    model: ModelKind,
    schedule: ControlSchedule,
    delta_grid_nm: Sequence[float],
    psi0: StateVector,
    target: StateVector,
) -> np.ndarray:
    """População final para cada deslocamento determinístico delta_r (nm)"""
    model = _require_rydberg(model)
    populacoes = []
    for delta in delta_grid_nm:
        geometria = sample_geometry_noise(model.geometry, NoiseSpec(delta_r_nm=float(delta), samples=1), 0)
        problema = ControlProblem.from_model(RydbergModel(geometria), psi0, target)
        populacoes.append(problema.phi(schedule.amplitudes, schedule.duration))
    return np.array(populacoes)


def default_delta_grid() -> np.ndarray:
    inicio, fim, passo = config.DELTA_R_RANGE_NM
    return np.arange(inicio, fim + passo / 2, passo)


def vibration_delta(
    model: ModelKind,
    schedule: ControlSchedule,
    psi0: StateVector,
    target: StateVector,
    delta_nm: float = config.VIBRATION_DELTA_NM,
) -> float:
    """Maior queda de população entre -delta_nm e +delta_nm"""
    base, menos, mais = delta_r_sweep(model, schedule, [0.0, -delta_nm, delta_nm], psi0, target)
    return float(max(base - menos, base - mais))


def dissipation_delta(
    model: ModelKind,
    schedule: ControlSchedule,
    jumps: JumpChannels,
    psi0: StateVector,
    target: StateVector,
    substep: float = config.MASTER_MAX_SUBSTEP_US,
) -> float:
    """Queda de população do sistema fechado para a equação mestra"""
    n_sites = infer_sites(np.size(psi0))
    fechado = ControlProblem.from_model(model, psi0, target).phi(schedule.amplitudes, schedule.duration)
    aberto = evolve_master(model, schedule, jumps, spin_density_matrix(psi0, n_sites), target, substep)
    return fechado - aberto.final_population

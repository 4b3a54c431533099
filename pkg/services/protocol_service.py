"""
Serviço do protocolo experimental completo em etapas

Base local de 5 níveis {0, 1, up, down, r}: preparação do estado inicial,
evolução central com o campo otimizado, desacoplamento para |r> e
mapeamento de volta para os estados de relógio.
"""
import logging
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

import config
from erros import ArtifactMissingError, DimensionError, GeometryError
from models.basis import PROTOCOL
from models.geometry import ModelKind, RydbergModel, regular_chain
from models.schedule import ControlSchedule
from services.chain_model import assemble_system
from services.graph_targets import plus_product_state, relabeled_graph_state
from services.quantum_core import NORM_TOL, Operator, StateVector, embed_local_operator, population

logger = logging.getLogger(__name__)

CORE = 'nucleo'
TARGET_LABELS = ('psi_1', 'psi_2', 'psi_3', 'psi_4')


@dataclass(frozen=True)
class Drive:
    """
    Acoplamento ressonante global source -> target

    H = (rabi/2)(e^{i phase}|target><source| + h.c.) em cada átomo; com
    phase = 0 um pulso pi/2 leva |up> a (|up> - i|down>)/sqrt(2).
    """
    source: str
    target: str
    rabi: float
    phase: float = 0.0

    def __post_init__(self):
        if self.source == self.target:
            raise GeometryError(f'Transição com níveis iguais: {self.source}')
        PROTOCOL.index(self.source)
        PROTOCOL.index(self.target)

    def local_operator(self) -> np.ndarray:
        acoplamento = np.exp(1j * self.phase) * PROTOCOL.transition(self.target, self.source)
        return 0.5 * self.rabi * (acoplamento + acoplamento.conj().T)


@dataclass(frozen=True)
class ProtocolStage:
    label: str
    duration: float
    drives: Tuple[Drive, ...] = ()
    schedule: Optional[ControlSchedule] = None

    def __post_init__(self):
        if not self.duration > 0:
            raise GeometryError(f'Etapa {self.label!r} com duração {self.duration} <= 0')

    @property
    def is_core(self) -> bool:
        return self.schedule is not None


@dataclass(frozen=True)
class ProtocolPlan:
    n_sites: int
    model: ModelKind
    stages: Tuple[ProtocolStage, ...]

    @property
    def total_duration(self) -> float:
        return sum(etapa.duration for etapa in self.stages)


def pi_pulse(rabi: float) -> float:
    return math.pi / rabi


def default_plan(
    n_sites: int,
    core_schedule: Optional[ControlSchedule],
    model: Optional[ModelKind] = None,
    rabi: float = config.RABI_TWO_PHOTON,
    rabi_mw_a: float = config.RABI_MW_A,
    rabi_mw_b: float = config.RABI_MW_B,
) -> ProtocolPlan:
    """
    Plano de cinco etapas:
    (1) |0> -> |up> pulso pi; (2) |up> -> |down> pulso pi/2;
    (3) evolução central; (4) |down> -> |r> pulso pi;
    (5) |up> -> |0> e |r> -> |1> simultâneos, pulso pi

    Raises:
        ArtifactMissingError: sem campo otimizado para a etapa central
    """
    if core_schedule is None:
        raise ArtifactMissingError('O protocolo precisa de um campo otimizado para a etapa central')
    model = model or RydbergModel(regular_chain(n_sites))
    etapas = (
        ProtocolStage('preparacao_pi', pi_pulse(rabi), (Drive('0', 'up', rabi),)),
        ProtocolStage('preparacao_pi/2', pi_pulse(rabi_mw_a) / 2, (Drive('up', 'down', rabi_mw_a),)),
        ProtocolStage(CORE, core_schedule.duration, schedule=core_schedule),
        ProtocolStage('desacoplamento', pi_pulse(rabi_mw_b), (Drive('down', 'r', rabi_mw_b),)),
        ProtocolStage('mapeamento', pi_pulse(rabi), (Drive('up', '0', rabi), Drive('r', '1', rabi))),
    )
    return ProtocolPlan(n_sites=n_sites, model=model, stages=etapas)


def protocol_targets(n_sites: int) -> Dict[str, StateVector]:
    """
    Estados de referência de cada etapa, na base de 5 níveis:
    psi_1 = produto de (|up> - i|down>)/sqrt(2), psi_2..psi_4 são |K_N> com
    up/down trocados por (up, -i down), (up, -r) e (-0, 1)
    """
    return {
        'psi_1': plus_product_state(n_sites, phase=-1j, basis=PROTOCOL),
        'psi_2': relabeled_graph_state(n_sites, PROTOCOL, up=('up', 1), down=('down', -1j)),
        'psi_3': relabeled_graph_state(n_sites, PROTOCOL, up=('up', 1), down=('r', -1)),
        'psi_4': relabeled_graph_state(n_sites, PROTOCOL, up=('0', -1), down=('1', 1)),
    }


def clock_ground_state(n_sites: int) -> StateVector:
    """|00...0>"""
    psi = np.zeros(PROTOCOL.dim ** n_sites, dtype=complex)
    psi[0] = 1.0
    return psi


class StagePropagator:
    """Hamiltonianos da cadeia embutidos na base de 5 níveis, montados uma vez"""

    def __init__(self, model: ModelKind, n_sites: int, interactions: bool = True):
        dimensao = PROTOCOL.dim ** n_sites
        if dimensao > config.MAX_DIM_PROTOCOL:
            raise DimensionError(f'Dimensão {dimensao} acima do limite {config.MAX_DIM_PROTOCOL}')
        self.n_sites = n_sites
        h0, self.hz = assemble_system(model, n_sites, PROTOCOL)
        self.h_sys = h0 if interactions else np.zeros_like(h0)

    def drive_hamiltonian(self, drives: Sequence[Drive]) -> Operator:
        h = np.zeros_like(self.h_sys)
        for drive in drives:
            local = drive.local_operator()
            for site in range(self.n_sites):
                h += embed_local_operator(local, site, self.n_sites, PROTOCOL)
        return h

    def evolve(self, psi: StateVector, stage: ProtocolStage, pontos: int = 1) -> List[Tuple[float, StateVector]]:
        """
        Estados ao longo da etapa: `pontos` amostras uniformes para etapas de
        pulso, uma por fronteira de fatia na etapa central
        """
        if stage.is_core:
            return self._evolve_core(psi, stage.schedule)
        energias, vetores = np.linalg.eigh(self.h_sys + self.drive_hamiltonian(stage.drives))
        coeficientes = vetores.conj().T @ psi
        instantes = np.linspace(0.0, stage.duration, max(pontos, 1) + 1)[1:]
        return [(t, vetores @ (np.exp(-1j * energias * t) * coeficientes)) for t in instantes]

    def _evolve_core(self, psi: StateVector, schedule: ControlSchedule) -> List[Tuple[float, StateVector]]:
        dt = schedule.slice_duration
        hz_diag = np.real(np.diag(self.hz))
        estados = []
        for k, b in enumerate(schedule.amplitudes):
            energias, vetores = np.linalg.eigh(self.h_sys + b * np.diag(hz_diag))
            psi = vetores @ (np.exp(-1j * energias * dt) * (vetores.conj().T @ psi))
            estados.append(((k + 1) * dt, psi))
        return estados


def _check_norm(state: StateVector) -> None:
    desvio = abs(np.linalg.norm(state) - 1.0)
    if desvio > NORM_TOL:
        raise DimensionError(f'Estado não normalizado (desvio {desvio:.2e})')


def run_stage(
    state: StateVector,
    stage: ProtocolStage,
    model: ModelKind,
    interactions: bool = True,
) -> StateVector:
    """
    Evolui o estado por uma etapa sob H_sys (sempre ligado) mais os pulsos

    Args:
        state: Estado na base de 5 níveis
        stage: Etapa com pulsos globais ou campo de controle
        model: Modelo da cadeia
        interactions: False zera H_sys para isolar o efeito dos pulsos

    Raises:
        DimensionError: estado não normalizado ou acima do limite
    """
    state = np.asarray(state, dtype=complex)
    _check_norm(state)
    n_sites = int(round(math.log(state.size, PROTOCOL.dim)))
    propagador = StagePropagator(model, n_sites, interactions)
    return propagador.evolve(state, stage)[-1][1]


@dataclass
class ProtocolRun:
    final_state: StateVector
    stage_populations: List[Dict]
    timeline: List[Tuple[float, Tuple[float, ...], str]]
    total_duration: float
    metadata: Dict = field(default_factory=dict)

    @property
    def final_population(self) -> float:
        return self.stage_populations[-1]['psi_4']

    def population_after(self, label: str) -> Dict:
        for registro in self.stage_populations:
            if registro['stage'] == label:
                return registro
        raise KeyError(label)


def run_full_protocol(
    plan: ProtocolPlan,
    interactions: bool = True,
    points_per_stage: int = 20,
) -> ProtocolRun:
    """
    Executa as etapas em ordem a partir de |00...0>

    Returns:
        ProtocolRun com o estado final, as populações de psi_1..psi_4 ao
        fim de cada etapa e a linha do tempo (t, populações, etapa)
    """
    propagador = StagePropagator(plan.model, plan.n_sites, interactions)
    alvos = protocol_targets(plan.n_sites)
    psi = clock_ground_state(plan.n_sites)

    def medir(estado):
        return tuple(population(estado, alvos[rotulo]) for rotulo in TARGET_LABELS)

    inicio = 0.0
    linha_do_tempo = [(0.0, medir(psi), 'inicio')]
    por_etapa = []
    for etapa in plan.stages:
        for t, estado in propagador.evolve(psi, etapa, points_per_stage):
            linha_do_tempo.append((inicio + t, medir(estado), etapa.label))
        psi = estado
        _check_norm(psi)
        inicio += etapa.duration
        populacoes = dict(zip(TARGET_LABELS, medir(psi)))
        por_etapa.append({'stage': etapa.label, 'time': inicio, **populacoes})
        logger.debug('Etapa %s concluída em t=%.4f: %s', etapa.label, inicio, populacoes)

    resultado = ProtocolRun(psi, por_etapa, linha_do_tempo, plan.total_duration)
    logger.info(
        'Protocolo N=%d: população de psi_4 %.6f em t_tot=%.4f us',
        plan.n_sites, resultado.final_population, resultado.total_duration,
    )
    return resultado


def preparation_error(run: ProtocolRun, core_population: float) -> float:
    """Erro atribuído à preparação e ao mapeamento: núcleo fechado - final"""
    return core_population - run.final_population

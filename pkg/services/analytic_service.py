"""
Solução fechada para N=3 sob campo constante

As amplitudes fechadas resolvem H_con = soma J (sx sx + sy sy) + B soma S^z,
sem o fator 1/2 da cadeia XX: o acoplamento equivalente aqui é 2J. O sinal
de B nas fórmulas corresponde a S^z com sinal oposto ao desta biblioteca,
por isso o Hamiltoniano numérico usa -B.
"""
import logging
import math
from dataclasses import dataclass
from typing import List, Sequence, Tuple

import numpy as np
from scipy.ndimage import maximum_filter

from erros import ConfigError
from services.chain_model import build_control_hz, build_xx_chain
from services.graph_targets import complete_graph_state, plus_product_state
from services.quantum_core import Operator, StateVector, evolve_unitary, population

logger = logging.getLogger(__name__)

N_SITES = 3
APPENDIX_FIELD_SIGN = -1.0
COUPLING_FACTOR = 2.0
SQRT2 = math.sqrt(2.0)


def analytic_n3_amplitudes(coupling: float, field: float, t: float) -> np.ndarray:
    """
    Oito amplitudes fechadas na ordem
    (↓↓↓, ↓↓↑, ↓↑↓, ↓↑↑, ↑↓↓, ↑↓↑, ↑↑↓, ↑↑↑)

    Args:
        coupling: J da forma sem 1/2
        field: B constante
        t: Instante
    """
    j, b = coupling, field
    externo = np.exp(-0.5j * t * (4 * SQRT2 * j + b))
    rotacao = np.exp(4j * SQRT2 * j * t)
    meia_fase = np.exp(0.5j * t * b)
    c = math.cos(4 * j * t / SQRT2)
    s = math.sin(4 * j * t / SQRT2)

    borda_um = externo * (2 + SQRT2 - (SQRT2 - 2) * rotacao) / (8 * SQRT2)
    meio_um = externo * (1 + SQRT2 - (SQRT2 - 1) * rotacao) / (4 * SQRT2)
    borda_dois = 0.25 * meia_fase * (SQRT2 * c - 1j * s)
    meio_dois = 0.25 * meia_fase * (SQRT2 * c - 2j * s)
    return np.array([
        np.exp(-1.5j * t * b) / (2 * SQRT2),
        borda_um,
        meio_um,
        borda_dois,
        borda_um,
        meio_dois,
        borda_dois,
        np.exp(1.5j * t * b) / (2 * SQRT2),
    ], dtype=complex)


def analytic_state(coupling: float, field: float, t: float) -> StateVector:
    """Amplitudes fechadas na ordem da biblioteca (sítio 0 à esquerda, up = 0)"""
    return analytic_n3_amplitudes(coupling, field, t)[::-1].copy()


def constant_field_hamiltonian(coupling: float, field: float) -> Operator:
    """H_con na convenção da biblioteca, reproduzindo as amplitudes fechadas"""
    return (
        build_xx_chain(N_SITES, COUPLING_FACTOR * coupling)
        + APPENDIX_FIELD_SIGN * field * build_control_hz(N_SITES)
    )


@dataclass(frozen=True)
class ConstantFieldSolution:
    field: float
    t_star: float
    c1: int
    c2: int
    global_phase: complex = -1j

    def to_dict(self) -> dict:
        return {
            'C1': self.c1,
            'C2': self.c2,
            'B': self.field,
            't_star': self.t_star,
            'global_phase': [self.global_phase.real, self.global_phase.imag],
        }


def constant_field_params(c1: int, c2: int, coupling: float) -> ConstantFieldSolution:
    """
    Família de soluções (B, t*) que leva |+>^3 a |K_3> com fase global -i

    B = 4J(1 - 4C1) / (sqrt(2)(2C1 - 2C2 - 1)),
    t* = sqrt(2) pi (1 + 2(C2 - C1)) / (4J)

    Raises:
        ConfigError: se C2 < C1 ou J <= 0
    """
    if c2 < c1:
        raise ConfigError(f'É preciso C2 >= C1, recebeu C1={c1}, C2={c2}')
    if coupling <= 0:
        raise ConfigError(f'J deve ser positivo, recebeu {coupling}')
    campo = 4 * coupling * (1 - 4 * c1) / (SQRT2 * (2 * c1 - 2 * c2 - 1))
    t_star = SQRT2 * math.pi * (1 + 2 * (c2 - c1)) / (4 * coupling)
    return ConstantFieldSolution(field=campo, t_star=t_star, c1=c1, c2=c2)


def propagated_state(coupling: float, field: float, t: float) -> StateVector:
    """Propagação numérica de |+>^3 sob H_con (oráculo das fórmulas fechadas)"""
    return evolve_unitary(constant_field_hamiltonian(coupling, field), t, plus_product_state(N_SITES))


def verify_solution(solucao: ConstantFieldSolution, coupling: float) -> float:
    """População numérica de |K_3> em t* para a solução dada"""
    final = propagated_state(coupling, solucao.field, solucao.t_star)
    populacao = population(final, complete_graph_state(N_SITES))
    logger.debug('Solução (C1=%d, C2=%d): população %.12f', solucao.c1, solucao.c2, populacao)
    return populacao


def analytic_population_trace(coupling: float, field: float, t_grid: Sequence[float]) -> np.ndarray:
    """População de |K_3> ao longo do tempo sob campo constante"""
    alvo = complete_graph_state(N_SITES)
    return np.array([population(analytic_state(coupling, field, t), alvo) for t in t_grid])


@dataclass
class ConstantFieldScan:
    b_grid: np.ndarray
    t_grid: np.ndarray
    populations: np.ndarray
    maxima: List[Tuple[float, float, float]]


def scan_constant_field(
    coupling: float,
    b_grid: Sequence[float],
    t_grid: Sequence[float],
    threshold: float = 0.5,
) -> ConstantFieldScan:
    """
    População de |K_3> na grade (B, t) e seus máximos locais

    Um ponto é máximo local quando iguala o máximo da vizinhança 3x3 e
    supera `threshold`.

    Returns:
        ConstantFieldScan com populations[i, j] = P(b_grid[i], t_grid[j])

    Raises:
        ConfigError: se alguma grade é vazia
    """
    campos = np.asarray(b_grid, dtype=float).reshape(-1)
    tempos = np.asarray(t_grid, dtype=float).reshape(-1)
    if campos.size == 0 or tempos.size == 0:
        raise ConfigError('As grades de B e t não podem ser vazias')
    populacoes = np.array([analytic_population_trace(coupling, b, tempos) for b in campos])
    vizinhanca = maximum_filter(populacoes, size=3, mode='nearest')
    picos = np.argwhere((populacoes == vizinhanca) & (populacoes > threshold))
    maximos = [(float(campos[i]), float(tempos[j]), float(populacoes[i, j])) for i, j in picos]
    logger.info('Varredura de campo constante: %d máximos locais', len(maximos))
    return ConstantFieldScan(campos, tempos, populacoes, maximos)

"""
Estados de grafo completo, forma de circuito CZ e estado produto inicial
"""
import itertools
from dataclasses import dataclass
from typing import Dict, Tuple

import numpy as np

from erros import DimensionError
from models.basis import SPIN, LocalBasis
from services.quantum_core import SIGMA_X, SIGMA_Z, StateVector, apply_local_phase, embed_product, expectation

MIN_QUBITS = 2
MAX_QUBITS = 7

LITERAL = 'literal'
CZ_CIRCUIT = 'cz'


def _check_range(n_sites: int) -> None:
    if not MIN_QUBITS <= n_sites <= MAX_QUBITS:
        raise DimensionError(f'N deve estar entre {MIN_QUBITS} e {MAX_QUBITS}, recebeu {n_sites}')


def _literal_sign(spins: Tuple[int, ...]) -> int:
    """
    Sinal da expansão literal do produto que define |K_N>

    Cada sítio i em up contribui (-1)^(N-1-i) vezes o produto dos
    autovalores de sigma_z nos sítios j > i (spins: 0 = up, 1 = down).
    """
    n_sites = len(spins)
    sinal = 1
    for i, s in enumerate(spins):
        if s == 0:
            sinal *= (-1) ** (n_sites - 1 - i)
            for s_j in spins[i + 1:]:
                sinal *= 1 if s_j == 0 else -1
    return sinal


def literal_graph_amplitudes(n_sites: int) -> Dict[Tuple[int, ...], float]:
    """Amplitudes de |K_N> por configuração de spins (0 = up, 1 = down)"""
    norma = 2.0 ** (-n_sites / 2)
    return {
        spins: norma * _literal_sign(spins)
        for spins in itertools.product((0, 1), repeat=n_sites)
    }


def complete_graph_state(n_sites: int) -> StateVector:
    """
    Estado de grafo completo pela expansão literal do produto de definição

    A amplitude de |down...down> é positiva. O sinal resultante coincide com
    (-1)^(m(m-1)/2), m = número de spins up.

    Raises:
        DimensionError: se N fora de [2, 7]
    """
    _check_range(n_sites)
    amplitudes = literal_graph_amplitudes(n_sites)
    return np.array([amplitudes[s] for s in itertools.product((0, 1), repeat=n_sites)], dtype=complex)


def cz_graph_state(n_sites: int) -> StateVector:
    """
    Produto de CZ_ij sobre todos os pares aplicado a |+>^N, com up = |0>

    Construído aplicando cada porta CZ (não pela fórmula do sinal).
    """
    _check_range(n_sites)
    psi = np.full(2 ** n_sites, 2.0 ** (-n_sites / 2), dtype=complex)
    configuracoes = np.array(list(itertools.product((0, 1), repeat=n_sites)))
    for i, j in itertools.combinations(range(n_sites), 2):
        cz = np.where((configuracoes[:, i] == 1) & (configuracoes[:, j] == 1), -1.0, 1.0)
        psi = cz * psi
    return psi


def plus_product_state(n_sites: int, phase: complex = 1.0, basis: LocalBasis = SPIN) -> StateVector:
    """
    Produto de (|up> + phase |down>)/sqrt(2) em todos os sítios

    Raises:
        DimensionError: se |phase| != 1 ou a base não tem up/down
    """
    if n_sites < 1:
        raise DimensionError(f'N deve ser >= 1, recebeu {n_sites}')
    if abs(abs(phase) - 1.0) > 1e-12:
        raise DimensionError(f'Fase deve ter módulo 1, recebeu {phase}')
    local = (basis.ket('up') + phase * basis.ket('down')) / np.sqrt(2)
    psi = np.ones(1, dtype=complex)
    for _ in range(n_sites):
        psi = np.kron(psi, local)
    return psi


def relabeled_graph_state(
    n_sites: int,
    basis: LocalBasis,
    up: Tuple[str, complex],
    down: Tuple[str, complex],
) -> StateVector:
    """
    |K_N> com cada |up> trocado por c_up|nível_up> e |down> por c_down|nível_down>

    Os sinais continuam sendo os da expansão literal. Usado para os estados
    intermediários do protocolo em etapas.

    Args:
        up: (nível, coeficiente) que substitui |up>
        down: (nível, coeficiente) que substitui |down>
    """
    _check_range(n_sites)
    nivel = {0: basis.index(up[0]), 1: basis.index(down[0])}
    coef = {0: up[1], 1: down[1]}
    pesos = basis.dim ** np.arange(n_sites - 1, -1, -1)
    psi = np.zeros(basis.dim ** n_sites, dtype=complex)
    for spins, amplitude in literal_graph_amplitudes(n_sites).items():
        indice = int(np.array([nivel[s] for s in spins]) @ pesos)
        psi[indice] = amplitude * np.prod([coef[s] for s in spins])
    return psi


def stabilizer_expectation(psi: StateVector, site: int) -> float:
    """<sigma_x_i prod_{j != i} sigma_z_j>, igual a 1 para o grafo completo em forma CZ"""
    n_sites = int(np.log2(psi.size))
    ops = {j: SIGMA_Z for j in range(n_sites)}
    ops[site] = SIGMA_X
    return expectation(psi, embed_product(ops, n_sites))


def z_layer(psi: StateVector) -> StateVector:
    """Aplica sigma_z a todos os qubits"""
    n_sites = int(np.log2(psi.size))
    return apply_local_phase(psi, {j: (1, -1) for j in range(n_sites)})


@dataclass(frozen=True)
class TargetSpec:
    """Alvo da otimização: N qubits na forma literal ou de circuito CZ"""
    n_sites: int
    form: str = LITERAL

    def __post_init__(self):
        _check_range(self.n_sites)
        if self.form not in (LITERAL, CZ_CIRCUIT):
            raise DimensionError(f'Forma de alvo desconhecida: {self.form}')

    def build(self) -> StateVector:
        if self.form == CZ_CIRCUIT:
            return cz_graph_state(self.n_sites)
        return complete_graph_state(self.n_sites)

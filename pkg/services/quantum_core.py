"""
Álgebra linear densa para sistemas de spins em produto tensorial

Convenções: o sítio 0 é o fator mais à esquerda do produto tensorial,
sigma_z|up> = +|up> e S^z = sigma_z / 2. Operadores, estados e matrizes
densidade são np.ndarray complexos.
"""
import itertools
import logging
from functools import reduce
from typing import Dict, List, Sequence, Union

import numpy as np

from erros import DimensionError, HermiticityError
from models.basis import SPIN, LocalBasis

logger = logging.getLogger(__name__)

Operator = np.ndarray
StateVector = np.ndarray
DensityMatrix = np.ndarray

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
SIGMA_PLUS = np.array([[0, 1], [0, 0]], dtype=complex)    # |up><down|
SIGMA_MINUS = np.array([[0, 0], [1, 0]], dtype=complex)   # |down><up|
IDENTITY_2 = np.eye(2, dtype=complex)

HERMITICITY_TOL = 1e-12
NORM_TOL = 1e-10
TARGET_NORM_TOL = 1e-8


def infer_sites(dim: int, basis: LocalBasis = SPIN) -> int:
    """
    Número de sítios N tal que basis.dim ** N == dim

    Raises:
        DimensionError: se dim não é potência de basis.dim
    """
    n_sites = int(round(np.log(dim) / np.log(basis.dim)))
    if n_sites < 1 or basis.dim ** n_sites != dim:
        raise DimensionError(f'Dimensão {dim} não é potência de {basis.dim}')
    return n_sites


def embed_local_operator(op: np.ndarray, site: int, n_sites: int, basis: LocalBasis = SPIN) -> Operator:
    """
    Embute um operador local: I x ... x op x ... x I

    Args:
        op: Matriz d x d com d = basis.dim
        site: Posição do fator (0 = mais à esquerda)
        n_sites: Número de sítios N

    Returns:
        Operador de dimensão d**N

    Raises:
        DimensionError: se op não é d x d ou site está fora de [0, N)
    """
    op = np.asarray(op, dtype=complex)
    if op.shape != (basis.dim, basis.dim):
        raise DimensionError(f'Operador local {op.shape} incompatível com base de dimensão {basis.dim}')
    if not 0 <= site < n_sites:
        raise DimensionError(f'Sítio {site} fora do intervalo [0, {n_sites})')
    identidade = np.eye(basis.dim, dtype=complex)
    fatores = [op if k == site else identidade for k in range(n_sites)]
    return reduce(np.kron, fatores)


def embed_product(ops: Dict[int, np.ndarray], n_sites: int, basis: LocalBasis = SPIN) -> Operator:
    """Produto de operadores locais em sítios distintos, {sítio: op}"""
    identidade = np.eye(basis.dim, dtype=complex)
    for site, op in ops.items():
        if not 0 <= site < n_sites:
            raise DimensionError(f'Sítio {site} fora do intervalo [0, {n_sites})')
        if np.shape(op) != (basis.dim, basis.dim):
            raise DimensionError(f'Operador local {np.shape(op)} incompatível com base de dimensão {basis.dim}')
    fatores = [np.asarray(ops.get(k, identidade), dtype=complex) for k in range(n_sites)]
    return reduce(np.kron, fatores)


def commutator(a: Operator, b: Operator) -> Operator:
    return a @ b - b @ a


def max_norm(a: np.ndarray) -> float:
    return float(np.max(np.abs(a))) if a.size else 0.0


def check_hermitian(h: Operator, tol: float = HERMITICITY_TOL, nome: str = 'H') -> None:
    """
    Raises:
        HermiticityError: se max|H - H^dagger| >= tol ou há NaN/Inf
    """
    if not np.all(np.isfinite(h)):
        raise HermiticityError(f'{nome} contém NaN ou Inf')
    desvio = max_norm(h - h.conj().T)
    if desvio >= tol:
        raise HermiticityError(f'{nome} não é hermitiano: max|H - H†| = {desvio:.3e}')


def propagator(h: Operator, t: float) -> Operator:
    """exp(-iHt) por decomposição espectral de H hermitiano"""
    check_hermitian(h)
    energias, vetores = np.linalg.eigh(h)
    return (vetores * np.exp(-1j * energias * t)) @ vetores.conj().T


def evolve_unitary(h: Operator, t: float, psi: StateVector) -> StateVector:
    """
    Evolução exata exp(-iHt) psi via autodecomposição de H

    Args:
        h: Hamiltoniano hermitiano
        t: Tempo (>= 0)
        psi: Estado inicial

    Returns:
        Estado evoluído, com norma preservada

    Raises:
        HermiticityError: se H não é hermitiano ou tem NaN/Inf
        DimensionError: se as dimensões não batem ou t < 0
    """
    psi = np.asarray(psi, dtype=complex)
    check_hermitian(h)
    if h.shape != (psi.size, psi.size):
        raise DimensionError(f'H {h.shape} incompatível com estado de dimensão {psi.size}')
    if t < 0:
        raise DimensionError(f'Tempo de evolução negativo: {t}')
    if t == 0:
        return psi.copy()
    energias, vetores = np.linalg.eigh(h)
    return vetores @ (np.exp(-1j * energias * t) * (vetores.conj().T @ psi))


def _check_target(target: StateVector) -> None:
    desvio = abs(np.linalg.norm(target) - 1.0)
    if desvio > TARGET_NORM_TOL:
        raise DimensionError(f'Estado alvo não normalizado (desvio {desvio:.2e})')


def population(state: Union[StateVector, DensityMatrix], target: StateVector) -> float:
    """
    População do alvo: |<alvo|psi>|^2 ou <alvo|rho|alvo>

    Raises:
        DimensionError: dimensões diferentes ou alvo não normalizado
    """
    state = np.asarray(state)
    target = np.asarray(target, dtype=complex)
    _check_target(target)
    if state.ndim == 1:
        if state.size != target.size:
            raise DimensionError(f'Estado de dimensão {state.size} vs alvo {target.size}')
        return float(abs(np.vdot(target, state)) ** 2)
    if state.shape != (target.size, target.size):
        raise DimensionError(f'Matriz densidade {state.shape} vs alvo {target.size}')
    return float(np.real(np.vdot(target, state @ target)))


def expectation(state: Union[StateVector, DensityMatrix], op: Operator) -> float:
    """Valor esperado real de um observável hermitiano"""
    state = np.asarray(state)
    if state.ndim == 1:
        return float(np.real(np.vdot(state, op @ state)))
    return float(np.real(np.trace(op @ state)))


def apply_local_phase(psi: StateVector, site_phases: Dict[int, Sequence[complex]], basis: LocalBasis = SPIN) -> StateVector:
    """
    Multiplica cada sítio por uma fase diagonal local

    Args:
        psi: Estado de N sítios
        site_phases: {sítio: fases por nível, na ordem da base}
        basis: Base local

    Raises:
        DimensionError: sítio fora do intervalo ou número de fases errado
    """
    psi = np.asarray(psi, dtype=complex)
    n_sites = infer_sites(psi.size, basis)
    tensor = psi.reshape((basis.dim,) * n_sites).copy()
    for site, fases in site_phases.items():
        if not 0 <= site < n_sites:
            raise DimensionError(f'Sítio {site} fora de [0, {n_sites})')
        fases = np.asarray(fases, dtype=complex)
        if fases.shape != (basis.dim,):
            raise DimensionError(f'Esperadas {basis.dim} fases para o sítio {site}, recebeu {fases.shape}')
        formato = [1] * n_sites
        formato[site] = basis.dim
        tensor = tensor * fases.reshape(formato)
    return tensor.reshape(-1)


def to_density_matrix(psi: StateVector) -> DensityMatrix:
    psi = np.asarray(psi, dtype=complex)
    return np.outer(psi, psi.conj())


def validate_density_matrix(rho: DensityMatrix, check_positivity: bool = True) -> None:
    """
    Confere hermiticidade (1e-10), traço (1e-8) e positividade (-1e-8)

    Raises:
        HermiticityError: se alguma das condições falha
    """
    desvio = max_norm(rho - rho.conj().T)
    if desvio > 1e-10:
        raise HermiticityError(f'rho não é hermitiana (desvio {desvio:.2e})')
    traco = np.real(np.trace(rho))
    if abs(traco - 1.0) > 1e-8:
        raise HermiticityError(f'Traço de rho = {traco:.12f}')
    if check_positivity:
        menor = float(np.linalg.eigvalsh(0.5 * (rho + rho.conj().T))[0])
        if menor < -1e-8:
            raise HermiticityError(f'rho com autovalor negativo {menor:.2e}')


def embed_into_basis(psi: StateVector, n_sites: int, basis: LocalBasis) -> StateVector:
    """
    Leva um vetor da base up/down para uma base maior (demais níveis vazios)
    """
    psi = np.asarray(psi, dtype=complex)
    if psi.size != 2 ** n_sites:
        raise DimensionError(f'Estado de spin com dimensão {psi.size} para N={n_sites}')
    if basis == SPIN:
        return psi.copy()
    local = [basis.index('up'), basis.index('down')]
    pesos = basis.dim ** np.arange(n_sites - 1, -1, -1)
    destino = np.zeros(basis.dim ** n_sites, dtype=complex)
    for indice, config_spins in enumerate(itertools.product((0, 1), repeat=n_sites)):
        niveis = np.array([local[s] for s in config_spins])
        destino[int(niveis @ pesos)] = psi[indice]
    return destino


def basis_labels(n_sites: int, basis: LocalBasis = SPIN) -> List[str]:
    """Rótulos dos estados da base, ex. '↑↓↑', na ordem dos índices"""
    return [
        ''.join(basis.symbol(nivel) for nivel in niveis)
        for niveis in itertools.product(basis.levels, repeat=n_sites)
    ]


def state_to_records(psi: StateVector, basis: LocalBasis = SPIN) -> List[list]:
    """Exporta um estado como linhas (string-da-base, re, im)"""
    psi = np.asarray(psi, dtype=complex)
    rotulos = basis_labels(infer_sites(psi.size, basis), basis)
    return [[rotulo, float(a.real), float(a.imag)] for rotulo, a in zip(rotulos, psi)]


def state_from_records(registros: Sequence[Sequence], basis: LocalBasis = SPIN) -> StateVector:
    """Reconstrói um estado exportado por state_to_records"""
    n_sites = infer_sites(len(registros), basis)
    posicao = {rotulo: k for k, rotulo in enumerate(basis_labels(n_sites, basis))}
    psi = np.zeros(len(registros), dtype=complex)
    for rotulo, re, im in registros:
        if rotulo not in posicao:
            raise DimensionError(f'Rótulo de base desconhecido: {rotulo}')
        psi[posicao[rotulo]] = complex(float(re), float(im))
    return psi

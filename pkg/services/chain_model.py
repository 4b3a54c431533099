"""
Construção dos Hamiltonianos da cadeia: XX ideal, termo de controle,
cadeia dipolar de Rydberg e Hamiltoniano de erro de longo alcance
"""
import logging
from typing import List, Tuple

import numpy as np

from erros import DimensionError, GeometryError
from models.basis import SPIN, LocalBasis
from models.geometry import ChainGeometry, IdealModel, ModelKind, RydbergModel
from services.quantum_core import (
    SIGMA_MINUS,
    SIGMA_PLUS,
    SIGMA_Z,
    Operator,
    check_hermitian,
    commutator,
    embed_local_operator,
    embed_product,
    max_norm,
)

logger = logging.getLogger(__name__)


def build_exchange(n_sites: int, i: int, j: int, coupling: float, basis: LocalBasis = SPIN) -> Operator:
    """
    Termo (J/2)(sx_i sx_j + sy_i sy_j) = J (s+_i s-_j + s-_i s+_j)
    """
    plus = basis.lift_spin_operator(SIGMA_PLUS)
    minus = basis.lift_spin_operator(SIGMA_MINUS)
    troca = embed_product({i: plus, j: minus}, n_sites, basis)
    return coupling * (troca + troca.conj().T)


def build_xx_chain(n_sites: int, coupling: float, basis: LocalBasis = SPIN) -> Operator:
    """
    Cadeia XX com contorno aberto e acoplamento uniforme

    Args:
        n_sites: Número de sítios (>= 2)
        coupling: J (rad/us, ou 1 no modo adimensional)

    Returns:
        Soma sobre os N-1 pares vizinhos de (J/2)(sx sx + sy sy)
    """
    if n_sites < 2:
        raise DimensionError(f'A cadeia XX precisa de N >= 2, recebeu {n_sites}')
    return build_nearest_neighbor_chain([coupling] * (n_sites - 1), basis)


def build_nearest_neighbor_chain(couplings: List[float], basis: LocalBasis = SPIN) -> Operator:
    """Cadeia XX com um acoplamento por ligação (N-1 valores)"""
    n_sites = len(couplings) + 1
    h = np.zeros((basis.dim ** n_sites,) * 2, dtype=complex)
    for i, j_bond in enumerate(couplings):
        h += build_exchange(n_sites, i, i + 1, j_bond, basis)
    return h


def build_control_hz(n_sites: int, basis: LocalBasis = SPIN) -> Operator:
    """
    H_z = soma de S^z_i = sigma_z / 2 (zero em níveis fora de up/down)

    Raises:
        DimensionError: se N < 1
    """
    if n_sites < 1:
        raise DimensionError(f'H_z precisa de N >= 1, recebeu {n_sites}')
    sz = basis.lift_spin_operator(SIGMA_Z / 2)
    diagonal = np.zeros(basis.dim ** n_sites)
    for site in range(n_sites):
        diagonal += np.real(np.diag(embed_local_operator(sz, site, n_sites, basis)))
    return np.diag(diagonal).astype(complex)


def dipole_strength(geometry: ChainGeometry, i: int, j: int) -> float:
    """
    V_dip = C3 (1 - 3 cos^2 theta_ij) / R_ij^3

    Raises:
        GeometryError: se i == j
    """
    if i == j:
        raise GeometryError('dipole_strength exige i != j')
    distancia = geometry.distance(i, j)
    cos_theta = geometry.cos_theta(i, j)
    return geometry.c3 * (1.0 - 3.0 * cos_theta ** 2) / distancia ** 3


def van_der_waals(geometry: ChainGeometry, i: int, j: int) -> Tuple[float, float]:
    """Energias de par (U_up, U_down) = -C6 / R_ij^6"""
    r6 = geometry.distance(i, j) ** 6
    return -geometry.c6_up / r6, -geometry.c6_down / r6


def build_error_hamiltonian(geometry: ChainGeometry, basis: LocalBasis = SPIN) -> Operator:
    """
    Termos de erro: van der Waals entre todos os pares e troca dipolar
    entre pares além dos vizinhos, com theta_ij recalculado das posições
    """
    n_sites = geometry.n_sites
    p_up = basis.lift_spin_operator(np.diag([1, 0]))
    p_down = basis.lift_spin_operator(np.diag([0, 1]))
    h = np.zeros((basis.dim ** n_sites,) * 2, dtype=complex)
    for i in range(n_sites):
        for j in range(i + 1, n_sites):
            u_up, u_down = van_der_waals(geometry, i, j)
            h += u_up * embed_product({i: p_up, j: p_up}, n_sites, basis)
            h += u_down * embed_product({i: p_down, j: p_down}, n_sites, basis)
            if j > i + 1:
                h += build_exchange(n_sites, i, j, dipole_strength(geometry, i, j), basis)
    check_hermitian(h, nome='H_err')
    return h


def hopping_couplings(model: ModelKind, n_sites: int) -> List[float]:
    """Acoplamentos entre vizinhos, um por ligação"""
    if isinstance(model, IdealModel):
        return [model.coupling] * (n_sites - 1)
    geometria = _geometry_for(model, n_sites)
    return [dipole_strength(geometria, i, i + 1) for i in range(n_sites - 1)]


def _geometry_for(model: RydbergModel, n_sites: int) -> ChainGeometry:
    if model.geometry.n_sites != n_sites:
        raise DimensionError(
            f'Geometria com {model.geometry.n_sites} átomos usada para N={n_sites}'
        )
    return model.geometry


def assemble_system(model: ModelKind, n_sites: int, basis: LocalBasis = SPIN) -> Tuple[Operator, Operator]:
    """
    Parte de deriva H0 e parte de controle Hz; o total é H0 + B(t) Hz

    Args:
        model: IdealModel ou RydbergModel
        n_sites: Número de sítios (>= 2)
        basis: Base local (interações só atuam em up/down)

    Returns:
        (H0, Hz)
    """
    if n_sites < 2:
        raise DimensionError(f'O sistema precisa de N >= 2, recebeu {n_sites}')
    if isinstance(model, IdealModel):
        h0 = build_xx_chain(n_sites, model.coupling, basis)
    elif isinstance(model, RydbergModel):
        geometria = _geometry_for(model, n_sites)
        h0 = build_nearest_neighbor_chain(hopping_couplings(model, n_sites), basis)
        h0 = h0 + build_error_hamiltonian(geometria, basis)
    else:
        raise TypeError(f'Modelo desconhecido: {model!r}')
    check_hermitian(h0, nome='H0')
    hz = build_control_hz(n_sites, basis)
    logger.debug('Sistema %s montado: N=%d, dim=%d', model.kind, n_sites, h0.shape[0])
    return h0, hz


def magnetization_commutator(h0: Operator, hz: Operator) -> float:
    """max|[H0, Hz]|, zero para todos os modelos suportados"""
    return max_norm(commutator(h0, hz))

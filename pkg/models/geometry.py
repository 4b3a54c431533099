"""
Geometria da cadeia de átomos e tipos de modelo
"""
from dataclasses import dataclass, field, replace
from typing import Tuple, Union

import numpy as np

import config
from erros import GeometryError

Vector3 = Tuple[float, float, float]


@dataclass(frozen=True)
class ChainGeometry:
    """
    Posições 3D dos átomos (um) e constantes de interação (rad/us)

    `distance_offset` soma um deslocamento fixo (um) a todas as distâncias
    entre pares sem alterar os ângulos; é o modelo determinístico de erro de
    distância.
    """
    positions: Tuple[Vector3, ...]
    c3: float = config.C3
    c6_up: float = config.C6_UP
    c6_down: float = config.C6_DOWN
    quantization_axis: Vector3 = (0.0, 0.0, 1.0)
    distance_offset: float = 0.0

    def __post_init__(self):
        posicoes = tuple(tuple(float(x) for x in p) for p in self.positions)
        object.__setattr__(self, 'positions', posicoes)
        if len(posicoes) < 2:
            raise GeometryError(f'A cadeia precisa de pelo menos 2 átomos, recebeu {len(posicoes)}')
        if any(len(p) != 3 for p in posicoes):
            raise GeometryError('Cada posição deve ter 3 coordenadas')
        eixo = np.asarray(self.quantization_axis, dtype=float)
        norma = np.linalg.norm(eixo)
        if norma == 0:
            raise GeometryError('Eixo de quantização nulo')
        object.__setattr__(self, 'quantization_axis', tuple(eixo / norma))
        for i in range(self.n_sites):
            for j in range(i + 1, self.n_sites):
                if self.distance(i, j) < config.MIN_DISTANCE_UM:
                    raise GeometryError(f'Átomos {i} e {j} coincidem (distância < 1 nm)')

    @property
    def n_sites(self) -> int:
        return len(self.positions)

    def separation(self, i: int, j: int) -> np.ndarray:
        return np.asarray(self.positions[j]) - np.asarray(self.positions[i])

    def distance(self, i: int, j: int) -> float:
        """Distância efetiva R_ij (inclui o deslocamento determinístico)"""
        return float(np.linalg.norm(self.separation(i, j))) + self.distance_offset

    def cos_theta(self, i: int, j: int) -> float:
        """Cosseno do ângulo entre r_j - r_i e o eixo de quantização"""
        vetor = self.separation(i, j)
        return float(np.dot(vetor, self.quantization_axis) / np.linalg.norm(vetor))

    def displaced(self, offsets: np.ndarray) -> 'ChainGeometry':
        """Nova geometria com cada átomo deslocado por offsets[i] (um)"""
        novas = np.asarray(self.positions) + np.asarray(offsets, dtype=float)
        return replace(self, positions=tuple(map(tuple, novas)))

    def with_distance_offset(self, delta_r_um: float) -> 'ChainGeometry':
        return replace(self, distance_offset=delta_r_um)

    def trap_axes(self) -> np.ndarray:
        """
        Eixos (x, y, z) da pinça em coordenadas do laboratório, um por linha

        x segue a cadeia (primeiro -> último átomo) e z, o eixo do feixe, é
        o eixo do laboratório mais transversal à cadeia, ortogonalizado.
        """
        cadeia = self.separation(0, self.n_sites - 1)
        cadeia = cadeia / np.linalg.norm(cadeia)
        candidato = np.eye(3)[int(np.argmin(np.abs(cadeia)))]
        feixe = candidato - np.dot(candidato, cadeia) * cadeia
        feixe = feixe / np.linalg.norm(feixe)
        return np.array([cadeia, np.cross(feixe, cadeia), feixe])


def regular_chain(
    n_sites: int,
    spacing: float = config.SPACING_UM,
    c3: float = config.C3,
    c6_up: float = config.C6_UP,
    c6_down: float = config.C6_DOWN,
) -> ChainGeometry:
    """
    Cadeia regular ao longo do eixo z: posição_i = (0, 0, i*R)

    Args:
        n_sites: Número de átomos
        spacing: Distância R entre vizinhos (um)

    Returns:
        Geometria com theta = 0 para todos os pares
    """
    return ChainGeometry(
        positions=tuple((0.0, 0.0, i * spacing) for i in range(n_sites)),
        c3=c3,
        c6_up=c6_up,
        c6_down=c6_down,
    )


@dataclass(frozen=True)
class IdealModel:
    """Cadeia XX ideal com acoplamento J uniforme (qualquer real não nulo)"""
    coupling: float = config.IDEAL_COUPLING

    def __post_init__(self):
        if self.coupling == 0:
            raise GeometryError('Acoplamento J do modelo ideal deve ser não nulo')

    @property
    def kind(self) -> str:
        return 'ideal'


@dataclass(frozen=True)
class RydbergModel:
    """Cadeia de Rydberg com acoplamentos derivados da geometria"""
    geometry: ChainGeometry = field(default_factory=lambda: regular_chain(3))

    @property
    def kind(self) -> str:
        return 'rydberg'


ModelKind = Union[IdealModel, RydbergModel]

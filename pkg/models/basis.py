"""
Bases locais dos sítios da cadeia
"""
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from erros import DimensionError

# Símbolos usados nas strings de base exportadas
SYMBOLS = {'up': '↑', 'down': '↓'}


@dataclass(frozen=True)
class LocalBasis:
    """
    Base ordenada de níveis de um sítio

    Os índices são fixos pela ordem de `levels`:
    SPIN = (up=0, down=1), SPIN_SINK = (up=0, down=1, g=2),
    PROTOCOL = (0=0, 1=1, up=2, down=3, r=4).
    """
    levels: Tuple[str, ...]

    def __post_init__(self):
        if self.dim not in (2, 3, 5):
            raise DimensionError(f'Base local deve ter 2, 3 ou 5 níveis, recebeu {self.dim}')
        if len(set(self.levels)) != self.dim:
            raise DimensionError(f'Níveis repetidos na base: {self.levels}')

    @property
    def dim(self) -> int:
        return len(self.levels)

    def has(self, level: str) -> bool:
        return level in self.levels

    def index(self, level: str) -> int:
        """
        Índice de um nível na base

        Raises:
            DimensionError: se o nível não existe nesta base
        """
        if level not in self.levels:
            raise DimensionError(f'Nível {level!r} ausente da base {self.levels}')
        return self.levels.index(level)

    def ket(self, level: str) -> np.ndarray:
        vetor = np.zeros(self.dim, dtype=complex)
        vetor[self.index(level)] = 1.0
        return vetor

    def transition(self, to_level: str, from_level: str) -> np.ndarray:
        """Operador |to><from| na base local"""
        op = np.zeros((self.dim, self.dim), dtype=complex)
        op[self.index(to_level), self.index(from_level)] = 1.0
        return op

    def projector(self, level: str) -> np.ndarray:
        return self.transition(level, level)

    def lift_spin_operator(self, op: np.ndarray) -> np.ndarray:
        """
        Coloca um operador 2x2 (base up/down) no bloco {up, down} desta base

        Os demais níveis ficam com linhas e colunas nulas.

        Args:
            op: Matriz 2x2 na ordem (up, down)

        Returns:
            Matriz dim x dim
        """
        op = np.asarray(op, dtype=complex)
        if op.shape != (2, 2):
            raise DimensionError(f'Operador de spin deve ser 2x2, recebeu {op.shape}')
        idx = [self.index('up'), self.index('down')]
        lifted = np.zeros((self.dim, self.dim), dtype=complex)
        lifted[np.ix_(idx, idx)] = op
        return lifted

    def symbol(self, level: str) -> str:
        return SYMBOLS.get(level, level)


SPIN = LocalBasis(('up', 'down'))
SPIN_SINK = LocalBasis(('up', 'down', 'g'))
PROTOCOL = LocalBasis(('0', '1', 'up', 'down', 'r'))

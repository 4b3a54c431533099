"""
Model para o campo de controle B(t) e os resultados da otimização
"""
import json
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Dict, List, Optional

import numpy as np

import config
from erros import ArtifactMissingError, ConfigError


@dataclass(frozen=True)
class ControlSchedule:
    """
    Campo global constante por partes

    Attributes:
        duration: Duração total T (us, ou J*t no modo ideal)
        amplitudes: n amplitudes B_k (rad/us), uma por fatia de duração T/n
    """
    duration: float
    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.array(self.amplitudes, dtype=float, copy=True).reshape(-1)
        amps.setflags(write=False)
        object.__setattr__(self, 'amplitudes', amps)
        if amps.size < 1:
            raise ConfigError('O campo precisa de pelo menos uma fatia')
        if not (self.duration > 0 and math.isfinite(self.duration)):
            raise ConfigError(f'Duração deve ser positiva e finita, recebeu {self.duration}')
        if not np.all(np.isfinite(amps)):
            raise ConfigError('Amplitudes do campo devem ser finitas')

    @property
    def slices(self) -> int:
        return int(self.amplitudes.size)

    @property
    def slice_duration(self) -> float:
        return self.duration / self.slices

    @property
    def area(self) -> float:
        """Integral do campo, soma de B_k * dt"""
        return float(np.sum(self.amplitudes) * self.slice_duration)

    def boundaries(self) -> np.ndarray:
        """Instantes das fronteiras das fatias, de 0 a T"""
        return np.arange(self.slices + 1) * self.slice_duration

    def with_amplitudes(self, amplitudes: np.ndarray) -> 'ControlSchedule':
        return replace(self, amplitudes=amplitudes)

    def to_dict(self) -> Dict:
        return {
            'T': self.duration,
            'n': self.slices,
            'amplitudes': [float(a) for a in self.amplitudes],
        }

    @classmethod
    def from_dict(cls, dados: Dict) -> 'ControlSchedule':
        try:
            amplitudes = [float(a) for a in dados['amplitudes']]
            schedule = cls(duration=float(dados['T']), amplitudes=amplitudes)
        except (KeyError, TypeError) as e:
            raise ConfigError(f'Campo serializado inválido: {e}') from e
        if 'n' in dados and int(dados['n']) != schedule.slices:
            raise ConfigError(f"Campo declara n={dados['n']} mas tem {schedule.slices} amplitudes")
        return schedule


@dataclass
class GrapeResult:
    """
    Resultado de uma execução do GRAPE

    Attributes:
        schedule: Campo otimizado
        phi_history: Valores aceitos do funcional (não decrescentes)
        final_population: População do alvo em T com o campo otimizado
        iterations: Iterações externas executadas
        converged: Se o critério de parada foi atingido
        gradient_exact: False quando o gradiente veio de diferenças finitas
    """
    schedule: ControlSchedule
    phi_history: List[float]
    final_population: float
    iterations: int
    converged: bool
    gradient_exact: bool = True
    seed: Optional[int] = None
    metadata: Dict = field(default_factory=dict)

    def to_dict(self) -> Dict:
        """
        Registro JSON do campo otimizado

        Returns:
            Dicionário com {mode, N, T, n, amplitudes, phi_history,
            final_population, seed, constants_version} e metadados extras
        """
        registro = {
            'mode': self.metadata.get('mode'),
            'N': self.metadata.get('N'),
            **self.schedule.to_dict(),
            'phi_history': [float(p) for p in self.phi_history],
            'final_population': float(self.final_population),
            'iterations': self.iterations,
            'converged': self.converged,
            'gradient_exact': self.gradient_exact,
            'seed': self.seed,
            'constants_version': self.metadata.get('constants_version', config.CONSTANTS_VERSION),
        }
        if 'config_hash' in self.metadata:
            registro['config_hash'] = self.metadata['config_hash']
        return registro

    @classmethod
    def from_dict(cls, dados: Dict) -> 'GrapeResult':
        metadata = {
            chave: dados[chave]
            for chave in ('mode', 'N', 'constants_version', 'config_hash')
            if chave in dados
        }
        return cls(
            schedule=ControlSchedule.from_dict(dados),
            phi_history=[float(p) for p in dados.get('phi_history', [])],
            final_population=float(dados['final_population']),
            iterations=int(dados.get('iterations', 0)),
            converged=bool(dados.get('converged', False)),
            gradient_exact=bool(dados.get('gradient_exact', True)),
            seed=dados.get('seed'),
            metadata=metadata,
        )


def save_result(resultado: GrapeResult, caminho: Path) -> Path:
    """
    Salva o resultado como JSON (floats em repr de ida e volta exata)
    """
    from models.artifact_writer import write_json

    return write_json(caminho, resultado.to_dict())


def load_result(caminho: Path) -> GrapeResult:
    """
    Carrega um resultado salvo por save_result

    Raises:
        ArtifactMissingError: se o arquivo não existe
        ConfigError: se o JSON é inválido
    """
    caminho = Path(caminho)
    if not caminho.exists():
        raise ArtifactMissingError(f'Campo salvo não encontrado: {caminho}')
    try:
        dados = json.loads(caminho.read_text(encoding='utf-8'))
    except ValueError as e:
        raise ConfigError(f'JSON inválido em {caminho}: {e}') from e
    return GrapeResult.from_dict(dados)

"""
Especificações de ruído e canais de decaimento
"""
from dataclasses import dataclass
from typing import Optional, Tuple

import config
from erros import ConfigError


@dataclass(frozen=True)
class NoiseSpec:
    """
    Ruído de posição (nm, eixos x, y, z da pinça), de campo (rad/us) e
    parâmetros do ensemble

    Se `delta_r_nm` estiver definido, o ruído de posição é substituído pelo
    deslocamento determinístico de todas as distâncias.
    """
    position_sigma_nm: Tuple[float, float, float] = (0.0, 0.0, 0.0)
    field_sigma: float = 0.0
    samples: int = config.ENSEMBLE_SAMPLES
    base_seed: int = 0
    delta_r_nm: Optional[float] = None

    def __post_init__(self):
        sigmas = tuple(float(s) for s in self.position_sigma_nm)
        object.__setattr__(self, 'position_sigma_nm', sigmas)
        if len(sigmas) != 3:
            raise ConfigError('position_sigma precisa de 3 componentes (x, y, z)')
        if any(s < 0 for s in sigmas) or self.field_sigma < 0:
            raise ConfigError('Desvios padrão do ruído devem ser >= 0')
        if self.samples < 1:
            raise ConfigError(f'samples deve ser >= 1, recebeu {self.samples}')

    @property
    def has_position_noise(self) -> bool:
        return self.delta_r_nm is not None or any(s > 0 for s in self.position_sigma_nm)

    @property
    def has_field_noise(self) -> bool:
        return self.field_sigma > 0


@dataclass(frozen=True)
class DecayChannel:
    """Decaimento espontâneo source -> sink em cada sítio, taxa em 1/us"""
    source: str
    sink: str
    rate: float

    def __post_init__(self):
        if self.rate < 0:
            raise ConfigError(f'Taxa de decaimento negativa: {self.rate}')


@dataclass(frozen=True)
class JumpChannels:
    channels: Tuple[DecayChannel, ...]

    @property
    def total_rate(self) -> float:
        return sum(c.rate for c in self.channels)


def default_jump_channels(
    lifetime_up_us: float = config.LIFETIME_UP_US,
    lifetime_down_us: float = config.LIFETIME_DOWN_US,
) -> JumpChannels:
    """
    Canais up -> g e down -> g com gamma = 1/tau
    """
    return JumpChannels((
        DecayChannel('up', 'g', 1.0 / lifetime_up_us),
        DecayChannel('down', 'g', 1.0 / lifetime_down_us),
    ))

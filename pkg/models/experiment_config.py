"""
Configuração de experimento: arquivo YAML + padrões + sobrescritas da linha de comando
"""
import copy
import hashlib
import json
import logging
from dataclasses import asdict, dataclass, replace
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple

import yaml

import config
from erros import ConfigError
from models.geometry import IdealModel, ModelKind, RydbergModel, regular_chain
from models.noise import JumpChannels, NoiseSpec, default_jump_channels
from services.graph_targets import CZ_CIRCUIT, LITERAL, MAX_QUBITS, MIN_QUBITS, TargetSpec

logger = logging.getLogger(__name__)

MODES = ('ideal', 'rydberg')
GUESSES = ('gaussian', 'random')

DEFAULTS: Dict[str, Dict[str, Any]] = {
    'modelo': {
        'modo': 'rydberg',
        'n': 3,
        'acoplamento': config.IDEAL_COUPLING,
        'espacamento_um': config.SPACING_UM,
        'forma_alvo': LITERAL,
    },
    'grape': {
        't': None,
        'chute': 'gaussian',
        'b0': None,
        'sigma': config.GAUSSIAN_SIGMA,
        'fatias': None,
        'semente': 0,
        'reinicios': 0,
        'reinicios_estagnacao': config.STALL_RESTARTS,
        'limiar_estagnacao': config.STALL_POPULATION,
        'taxa_inicial': config.LEARNING_RATE,
        'backtracking': config.BACKTRACKING_FACTOR,
        'taxa_minima': config.LEARNING_RATE_FLOOR,
        'tolerancia': config.STOP_TOLERANCE,
        'paciencia': config.STOP_PATIENCE,
        'max_iteracoes': config.MAX_ITERATIONS,
        't_min': 0.05,
        't_max': 0.75,
        'passos': 141,
        'altura_pico': config.SCAN_PEAK_HEIGHT,
        'proeminencia_pico': config.SCAN_PEAK_PROMINENCE,
    },
    'ruido': {
        'sigma_posicao_nm': [0.0, 0.0, 0.0],
        'sigma_campo_mhz': 0.0,
        'amostras': config.ENSEMBLE_SAMPLES,
        'semente': 0,
        'delta_r_nm': None,
    },
    'dissipacao': {
        'tau_up_us': config.LIFETIME_UP_US,
        'tau_down_us': config.LIFETIME_DOWN_US,
        'subpasso_us': config.MASTER_MAX_SUBSTEP_US,
    },
    'protocolo': {
        'rabi_mhz': config.RABI_TWO_PHOTON / config.TWO_PI,
        'rabi_mw_a_mhz': config.RABI_MW_A / config.TWO_PI,
        'rabi_mw_b_mhz': config.RABI_MW_B / config.TWO_PI,
    },
    'saida': {
        'diretorio': config.OUTPUT_DIR,
    },
    'constantes': {
        'c3_ghz': config.C3 / config.ghz(1.0),
        'c6_up_ghz': config.C6_UP / config.ghz(1.0),
        'c6_down_ghz': config.C6_DOWN / config.ghz(1.0),
    },
}


@dataclass(frozen=True)
class ModelSection:
    modo: str
    n: int
    acoplamento: float
    espacamento_um: float
    forma_alvo: str


@dataclass(frozen=True)
class GrapeSection:
    t: Optional[float]
    chute: str
    b0: Optional[float]
    sigma: float
    fatias: Optional[int]
    semente: int
    reinicios: int
    reinicios_estagnacao: int
    limiar_estagnacao: float
    taxa_inicial: float
    backtracking: float
    taxa_minima: float
    tolerancia: float
    paciencia: int
    max_iteracoes: int
    t_min: float
    t_max: float
    passos: int
    altura_pico: Optional[float]
    proeminencia_pico: Optional[float]


@dataclass(frozen=True)
class NoiseSection:
    sigma_posicao_nm: Tuple[float, float, float]
    sigma_campo_mhz: float
    amostras: int
    semente: int
    delta_r_nm: Optional[float]


@dataclass(frozen=True)
class DissipationSection:
    tau_up_us: float
    tau_down_us: float
    subpasso_us: float


@dataclass(frozen=True)
class ProtocolSection:
    rabi_mhz: float
    rabi_mw_a_mhz: float
    rabi_mw_b_mhz: float


@dataclass(frozen=True)
class OutputSection:
    diretorio: str


@dataclass(frozen=True)
class ConstantsSection:
    c3_ghz: float
    c6_up_ghz: float
    c6_down_ghz: float


SECTIONS = {
    'modelo': ModelSection,
    'grape': GrapeSection,
    'ruido': NoiseSection,
    'dissipacao': DissipationSection,
    'protocolo': ProtocolSection,
    'saida': OutputSection,
    'constantes': ConstantsSection,
}


def _merge(base: Dict, extra: Dict, origem: str, skip_none: bool) -> Dict:
    """Sobrepõe `extra` em `base` seção a seção; chaves desconhecidas são erro"""
    resultado = copy.deepcopy(base)
    for secao, valores in (extra or {}).items():
        if secao not in resultado:
            raise ConfigError(f'Seção desconhecida em {origem}: {secao!r}')
        if not isinstance(valores, dict):
            raise ConfigError(f'Seção {secao!r} em {origem} deve ser um mapeamento')
        for chave, valor in valores.items():
            if chave not in resultado[secao]:
                raise ConfigError(f'Chave desconhecida em {origem}: {secao}.{chave}')
            if skip_none and valor is None:
                continue
            resultado[secao][chave] = valor
    return resultado


def read_yaml(caminho: Path) -> Dict:
    """
    Lê o arquivo YAML de configuração

    Raises:
        ConfigError: arquivo ausente, YAML malformado ou raiz que não é mapeamento
    """
    caminho = Path(caminho)
    if not caminho.exists():
        raise ConfigError(f'Arquivo de configuração não encontrado: {caminho}')
    try:
        dados = yaml.safe_load(caminho.read_text(encoding='utf-8'))
    except yaml.YAMLError as e:
        raise ConfigError(f'YAML malformado em {caminho}: {e}') from e
    if dados is None:
        return {}
    if not isinstance(dados, dict):
        raise ConfigError(f'A raiz de {caminho} deve ser um mapeamento')
    return dados


@dataclass(frozen=True)
class ExperimentConfig:
    modelo: ModelSection
    grape: GrapeSection
    ruido: NoiseSection
    dissipacao: DissipationSection
    protocolo: ProtocolSection
    saida: OutputSection
    constantes: ConstantsSection

    @classmethod
    def from_dict(cls, dados: Dict) -> 'ExperimentConfig':
        mesclado = _merge(DEFAULTS, dados, 'configuração', skip_none=False)
        try:
            ruido = dict(mesclado['ruido'])
            ruido['sigma_posicao_nm'] = tuple(float(s) for s in ruido['sigma_posicao_nm'])
            mesclado['ruido'] = ruido
            secoes = {nome: SECTIONS[nome](**valores) for nome, valores in mesclado.items()}
        except (TypeError, ValueError) as e:
            raise ConfigError(f'Valor inválido na configuração: {e}') from e
        experimento = cls(**secoes)
        experimento.validate()
        return experimento

    @classmethod
    def load(cls, caminho: Optional[Path] = None, overrides: Optional[Dict] = None) -> 'ExperimentConfig':
        """
        Padrões, depois o arquivo (se houver), depois as sobrescritas da
        linha de comando (valores None são ignorados)
        """
        dados = _merge(DEFAULTS, read_yaml(caminho), str(caminho), skip_none=False) if caminho else DEFAULTS
        dados = _merge(dados, overrides or {}, 'linha de comando', skip_none=True)
        experimento = cls.from_dict(dados)
        logger.debug('Configuração carregada (hash %s)', experimento.config_hash[:12])
        return experimento

    def validate(self) -> None:
        """
        Raises:
            ConfigError: com todos os valores inválidos encontrados
        """
        m, g, r = self.modelo, self.grape, self.ruido
        erros: List[str] = []
        if m.modo not in MODES:
            erros.append(f'modelo.modo deve ser um de {MODES}')
        if not MIN_QUBITS <= m.n <= MAX_QUBITS:
            erros.append(f'modelo.n deve estar entre {MIN_QUBITS} e {MAX_QUBITS}')
        if m.forma_alvo not in (LITERAL, CZ_CIRCUIT):
            erros.append(f'modelo.forma_alvo deve ser {LITERAL!r} ou {CZ_CIRCUIT!r}')
        if m.acoplamento == 0 or m.espacamento_um <= 0:
            erros.append('modelo.acoplamento deve ser não nulo e modelo.espacamento_um positivo')
        if g.chute not in GUESSES:
            erros.append(f'grape.chute deve ser um de {GUESSES}')
        if g.t is not None and g.t <= 0:
            erros.append('grape.t deve ser positivo')
        if g.fatias is not None and g.fatias < 1:
            erros.append('grape.fatias deve ser >= 1')
        if g.sigma == 0:
            erros.append('grape.sigma não pode ser zero')
        if not g.t_min < g.t_max or g.passos < 2:
            erros.append('varredura exige grape.t_min < grape.t_max e grape.passos >= 2')
        if g.reinicios < 0 or g.reinicios_estagnacao < 0:
            erros.append('grape.reinicios e grape.reinicios_estagnacao devem ser >= 0')
        if not 0 <= g.limiar_estagnacao <= 1:
            erros.append('grape.limiar_estagnacao deve estar em [0, 1]')
        if any(v is not None and v < 0 for v in (g.altura_pico, g.proeminencia_pico)):
            erros.append('grape.altura_pico e grape.proeminencia_pico devem ser >= 0')
        if len(r.sigma_posicao_nm) != 3 or any(s < 0 for s in r.sigma_posicao_nm) or r.sigma_campo_mhz < 0:
            erros.append('ruido: desvios padrão devem ser >= 0 (posição com 3 componentes)')
        if r.amostras < 1:
            erros.append('ruido.amostras deve ser >= 1')
        if self.dissipacao.tau_up_us <= 0 or self.dissipacao.tau_down_us <= 0:
            erros.append('dissipacao: tempos de vida devem ser positivos')
        if self.dissipacao.subpasso_us <= 0:
            erros.append('dissipacao.subpasso_us deve ser positivo')
        if min(self.protocolo.rabi_mhz, self.protocolo.rabi_mw_a_mhz, self.protocolo.rabi_mw_b_mhz) <= 0:
            erros.append('protocolo: frequências de Rabi devem ser positivas')
        if erros:
            raise ConfigError('; '.join(erros))

    def to_dict(self) -> Dict:
        dados = asdict(self)
        dados['ruido']['sigma_posicao_nm'] = list(self.ruido.sigma_posicao_nm)
        return dados

    @property
    def config_hash(self) -> str:
        """SHA-256 do JSON canônico da configuração mesclada"""
        canonico = json.dumps(self.to_dict(), sort_keys=True, separators=(',', ':'))
        return hashlib.sha256(canonico.encode('utf-8')).hexdigest()

    # Objetos de domínio derivados

    def build_model(self, n_sites: Optional[int] = None) -> ModelKind:
        n_sites = n_sites or self.modelo.n
        if self.modelo.modo == 'ideal':
            return IdealModel(self.modelo.acoplamento)
        c = self.constantes
        return RydbergModel(regular_chain(
            n_sites,
            spacing=self.modelo.espacamento_um,
            c3=config.ghz(c.c3_ghz),
            c6_up=config.ghz(c.c6_up_ghz),
            c6_down=config.ghz(c.c6_down_ghz),
        ))

    def target(self, n_sites: Optional[int] = None) -> TargetSpec:
        return TargetSpec(n_sites or self.modelo.n, self.modelo.forma_alvo)

    def duration(self, n_sites: Optional[int] = None) -> float:
        """T configurado ou o da tabela de referência do modo"""
        if self.grape.t is not None:
            return float(self.grape.t)
        n_sites = n_sites or self.modelo.n
        tabela = config.TABLE_IDEAL if self.modelo.modo == 'ideal' else config.TABLE_RYDBERG
        if n_sites not in tabela:
            raise ConfigError(f'Sem T de referência para N={n_sites}; informe grape.t')
        return tabela[n_sites][0]

    def guess_amplitude(self) -> float:
        if self.grape.b0 is not None:
            return float(self.grape.b0)
        if self.modelo.modo == 'ideal':
            return abs(self.modelo.acoplamento)
        return config.GUESS_B0_RYDBERG

    def noise_spec(self) -> NoiseSpec:
        r = self.ruido
        return NoiseSpec(
            position_sigma_nm=r.sigma_posicao_nm,
            field_sigma=config.mhz(r.sigma_campo_mhz),
            samples=r.amostras,
            base_seed=r.semente,
            delta_r_nm=r.delta_r_nm,
        )

    def jump_channels(self) -> JumpChannels:
        return default_jump_channels(self.dissipacao.tau_up_us, self.dissipacao.tau_down_us)

    @property
    def output_dir(self) -> Path:
        return Path(self.saida.diretorio)

    def with_mode(self, modo: str) -> 'ExperimentConfig':
        return replace(self, modelo=replace(self.modelo, modo=modo))

    def with_n(self, n_sites: int) -> 'ExperimentConfig':
        return replace(self, modelo=replace(self.modelo, n=n_sites))

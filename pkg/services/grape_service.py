"""
Serviço de otimização GRAPE do campo global B(t)

O campo é constante por fatias; o funcional é a população do estado alvo
em T e o gradiente vem da propagação para frente e para trás.
"""
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import List, NamedTuple, Optional, Union

import numpy as np
from scipy.signal import find_peaks

import config
from erros import ConfigError, DimensionError, OptimizationError
from models.basis import SPIN
from models.geometry import ModelKind
from models.schedule import ControlSchedule, GrapeResult
from services.chain_model import assemble_system, magnetization_commutator
from services.graph_targets import TargetSpec, plus_product_state
from services.quantum_core import Operator, StateVector, check_hermitian, infer_sites

logger = logging.getLogger(__name__)

COMMUTATOR_TOL = 1e-12


@dataclass(frozen=True)
class GaussianGuess:
    """B_G = B0/(sqrt(2 pi) sigma) exp(-t_g^2 / 2 sigma^2), t_g em [-0.5, 0.5]"""
    b0: float
    sigma: float = config.GAUSSIAN_SIGMA
    slices: int = config.GAUSSIAN_SLICES

    def build(self, duration: float) -> ControlSchedule:
        return gaussian_guess(self.slices, duration, self.b0, self.sigma)


@dataclass(frozen=True)
class RandomGuess:
    """B_G = B0 * xi, xi uniforme em [0, 1]"""
    b0: float
    seed: int = 0
    slices: int = config.RANDOM_SLICES

    def build(self, duration: float) -> ControlSchedule:
        return random_guess(self.slices, duration, self.b0, self.seed)


Guess = Union[GaussianGuess, RandomGuess]


@dataclass(frozen=True)
class LearningSettings:
    initial_rate: float = config.LEARNING_RATE
    backtracking: float = config.BACKTRACKING_FACTOR
    rate_floor: float = config.LEARNING_RATE_FLOOR
    max_iterations: int = config.MAX_ITERATIONS
    stop_tolerance: float = config.STOP_TOLERANCE
    patience: int = config.STOP_PATIENCE
    stall_population: float = config.STALL_POPULATION
    rate_ceiling: float = config.LEARNING_RATE_CEILING

    def __post_init__(self):
        if self.initial_rate <= 0:
            raise ConfigError('A taxa de aprendizado inicial deve ser > 0')
        if not 0 < self.backtracking < 1:
            raise ConfigError('O fator de backtracking deve estar em (0, 1)')
        if self.max_iterations < 1:
            raise ConfigError('max_iterations deve ser >= 1')
        if self.stop_tolerance <= 0:
            raise ConfigError('A tolerância de parada deve ser > 0')
        if not 0 <= self.stall_population <= 1:
            raise ConfigError('stall_population deve estar em [0, 1]')
        if self.rate_ceiling < 1:
            raise ConfigError('rate_ceiling deve ser >= 1')

    @property
    def max_rate(self) -> float:
        return self.initial_rate * self.rate_ceiling


@dataclass(frozen=True)
class GrapeConfig:
    model: ModelKind
    target: TargetSpec
    duration: float
    guess: Guess
    learning: LearningSettings = field(default_factory=LearningSettings)

    def with_duration(self, duration: float) -> 'GrapeConfig':
        return replace(self, duration=duration)

    def with_guess(self, guess: Guess) -> 'GrapeConfig':
        return replace(self, guess=guess)


class Landscape(NamedTuple):
    phi: float
    gradient: np.ndarray
    exact: bool


def gaussian_guess(slices: int, duration: float, b0: float, sigma: float) -> ControlSchedule:
    """
    Campo inicial gaussiano amostrado nos pontos médios das fatias

    A fatia k usa t_g = (k + 0.5)/n - 0.5.

    Raises:
        ConfigError: se sigma == 0 ou n < 1
    """
    if slices < 1:
        raise ConfigError(f'n deve ser >= 1, recebeu {slices}')
    if sigma == 0:
        raise ConfigError('sigma do campo gaussiano não pode ser zero')
    t_g = (np.arange(slices) + 0.5) / slices - 0.5
    amplitudes = b0 / (math.sqrt(2 * math.pi) * sigma) * np.exp(-t_g ** 2 / (2 * sigma ** 2))
    return ControlSchedule(duration=duration, amplitudes=amplitudes)


def random_guess(slices: int, duration: float, b0: float, seed: int) -> ControlSchedule:
    """Campo inicial B0 * xi_k com xi_k ~ U[0, 1] de gerador determinístico"""
    if slices < 1:
        raise ConfigError(f'n deve ser >= 1, recebeu {slices}')
    rng = np.random.default_rng(seed)
    return ControlSchedule(duration=duration, amplitudes=b0 * rng.uniform(0.0, 1.0, slices))


class ControlProblem:
    """
    Propagação por fatias de H0 + B_k Hz para um par (estado inicial, alvo)

    Quando [H0, Hz] = 0 o propagador da fatia fatora em
    exp(-i H0 dt) exp(-i B_k Hz dt), com H0 diagonalizado uma única vez.
    """

    def __init__(self, h0: Operator, hz: Operator, psi0: StateVector, target: StateVector):
        check_hermitian(h0, nome='H0')
        check_hermitian(hz, nome='Hz')
        if h0.shape != hz.shape or h0.shape[0] != np.size(psi0) or np.size(psi0) != np.size(target):
            raise DimensionError('H0, Hz, estado inicial e alvo com dimensões incompatíveis')
        self.h0 = h0
        self.hz = hz
        self.psi0 = np.asarray(psi0, dtype=complex)
        self.target = np.asarray(target, dtype=complex)
        self.commuting = magnetization_commutator(h0, hz) < COMMUTATOR_TOL and np.allclose(hz, np.diag(np.diag(hz)))
        self._hz_diag = np.real(np.diag(hz))
        self._energias, self._vetores = np.linalg.eigh(h0)
        self._cache_dt = None
        self._drift = None

    @classmethod
    def from_model(cls, model: ModelKind, psi0: StateVector, target: StateVector) -> 'ControlProblem':
        n_sites = infer_sites(np.size(psi0))
        if np.size(psi0) > config.MAX_DIM_PURE:
            raise DimensionError(f'Dimensão {np.size(psi0)} acima do limite {config.MAX_DIM_PURE}')
        h0, hz = assemble_system(model, n_sites, SPIN)
        return cls(h0, hz, psi0, target)

    def _drift_propagator(self, dt: float) -> Operator:
        if self._cache_dt != dt:
            self._drift = (self._vetores * np.exp(-1j * self._energias * dt)) @ self._vetores.conj().T
            self._cache_dt = dt
        return self._drift

    def slice_propagators(self, amplitudes: np.ndarray, dt: float) -> List[Operator]:
        """Propagadores exatos de cada fatia (caminho geral, sem fatoração)"""
        propagadores = []
        for b in amplitudes:
            energias, vetores = np.linalg.eigh(self.h0 + b * self.hz)
            propagadores.append((vetores * np.exp(-1j * energias * dt)) @ vetores.conj().T)
        return propagadores

    def forward_states(self, amplitudes: np.ndarray, duration: float) -> np.ndarray:
        """Estados nas fronteiras das fatias, shape (n + 1, dim)"""
        amplitudes = np.asarray(amplitudes, dtype=float)
        dt = duration / amplitudes.size
        estados = np.empty((amplitudes.size + 1, self.psi0.size), dtype=complex)
        estados[0] = self.psi0
        if self.commuting:
            drift = self._drift_propagator(dt)
            for k, b in enumerate(amplitudes):
                estados[k + 1] = drift @ (np.exp(-1j * b * dt * self._hz_diag) * estados[k])
        else:
            for k, u in enumerate(self.slice_propagators(amplitudes, dt)):
                estados[k + 1] = u @ estados[k]
        return estados

    def phi(self, amplitudes: np.ndarray, duration: float) -> float:
        final = self.forward_states(amplitudes, duration)[-1]
        return float(abs(np.vdot(self.target, final)) ** 2)

    def population_trace(self, amplitudes: np.ndarray, duration: float) -> np.ndarray:
        estados = self.forward_states(amplitudes, duration)
        return np.abs(estados @ self.target.conj()) ** 2

    def evaluate(self, amplitudes: np.ndarray, duration: float) -> Landscape:
        """
        Funcional Phi e gradiente dPhi/dB_k

        Com [Hz, H0 + B_k Hz] = 0, dU_k/dB_k = -i dt Hz U_k exatamente e
        g_k = 2 dt Im(<chi_k|Hz|psi_k> <psi_T|alvo>). Sem comutação,
        cai para diferenças finitas centrais.
        """
        amplitudes = np.asarray(amplitudes, dtype=float)
        if not self.commuting:
            return self._finite_difference(amplitudes, duration)
        dt = duration / amplitudes.size
        drift = self._drift_propagator(dt)
        estados = self.forward_states(amplitudes, duration)
        overlap = np.vdot(self.target, estados[-1])
        gradiente = np.empty(amplitudes.size)
        chi = self.target.copy()
        for k in range(amplitudes.size - 1, -1, -1):
            hz_psi = self._hz_diag * estados[k + 1]
            gradiente[k] = 2 * dt * np.imag(np.vdot(chi, hz_psi) * np.conj(overlap))
            chi = np.exp(1j * amplitudes[k] * dt * self._hz_diag) * (drift.conj().T @ chi)
        return Landscape(float(abs(overlap) ** 2), gradiente, True)

    def _finite_difference(self, amplitudes: np.ndarray, duration: float) -> Landscape:
        passo = config.FINITE_DIFFERENCE_STEP
        gradiente = np.empty(amplitudes.size)
        for k in range(amplitudes.size):
            mais, menos = amplitudes.copy(), amplitudes.copy()
            mais[k] += passo
            menos[k] -= passo
            gradiente[k] = (self.phi(mais, duration) - self.phi(menos, duration)) / (2 * passo)
        return Landscape(self.phi(amplitudes, duration), gradiente, False)


def landscape_and_gradient(
    model: ModelKind,
    schedule: ControlSchedule,
    psi0: StateVector,
    target: StateVector,
) -> Landscape:
    """
    Phi = |<alvo|U(T,0)|psi0>|^2 e seu gradiente em relação às amplitudes

    Returns:
        Landscape(phi, gradient, exact); exact=False indica diferenças finitas
    """
    problema = ControlProblem.from_model(model, psi0, target)
    return problema.evaluate(schedule.amplitudes, schedule.duration)


def population_trace(
    model: ModelKind,
    schedule: ControlSchedule,
    psi0: StateVector,
    target: StateVector,
) -> np.ndarray:
    """População do alvo em cada fronteira de fatia (n + 1 pontos)"""
    problema = ControlProblem.from_model(model, psi0, target)
    return problema.population_trace(schedule.amplitudes, schedule.duration)


class GrapeOptimizer:
    """
    Subida de gradiente com busca em linha por backtracking

    O passo é aplicado na área de cada fatia (B_k dt), o que torna a taxa
    adimensional: B_k += alpha g_k / dt^2. Cada iteração começa na taxa base
    e a reduz pelo fator de backtracking até Phi não diminuir.

    Enquanto Phi < stall_population, iterações paradas não contam para a
    paciência: a taxa base cresce pelo inverso do backtracking até
    initial_rate * rate_ceiling, o que tira a subida de mínimos e platôs.
    A taxa base volta a initial_rate quando Phi passa do limiar.
    """

    def __init__(self, grape_config: GrapeConfig, problem: Optional[ControlProblem] = None):
        self.config = grape_config
        self.problem = problem

    def run(self, psi0: StateVector) -> GrapeResult:
        """
        Executa a otimização a partir do campo inicial da configuração

        Raises:
            OptimizationError: se Phi ou o gradiente ficam não finitos
        """
        cfg = self.config
        alvo = cfg.target.build()
        problema = self.problem or ControlProblem.from_model(cfg.model, psi0, alvo)
        inicial = cfg.guess.build(cfg.duration)
        seed = getattr(cfg.guess, 'seed', None)
        return self._ascend(problema, inicial, seed)

    def _ascend(self, problema: ControlProblem, inicial: ControlSchedule, seed: Optional[int]) -> GrapeResult:
        aprendizado = self.config.learning
        duracao = inicial.duration
        dt = inicial.slice_duration
        amplitudes = np.array(inicial.amplitudes)
        atual = self._checked(problema.evaluate(amplitudes, duracao), 0)
        historico = [atual.phi]

        if not np.any(atual.gradient):
            logger.info('Gradiente nulo no campo inicial; nada a otimizar')
            return self._result(inicial, historico, atual, 0, True, seed)

        iteracao = 0
        quietas = 0
        convergiu = False
        taxa_base = aprendizado.initial_rate
        while iteracao < aprendizado.max_iterations:
            iteracao += 1
            direcao = atual.gradient / dt ** 2
            taxa = taxa_base
            aceito = None
            while taxa >= aprendizado.rate_floor:
                candidato = amplitudes + taxa * direcao
                avaliacao = self._checked(problema.evaluate(candidato, duracao), iteracao)
                if avaliacao.phi >= atual.phi:
                    aceito = (candidato, avaliacao)
                    break
                taxa *= aprendizado.backtracking
            estagnado = atual.phi < aprendizado.stall_population and taxa_base < aprendizado.max_rate
            if aceito is None:
                if estagnado:
                    taxa_base = self._escalate(taxa_base, iteracao, atual.phi)
                    continue
                logger.debug('Nenhum passo melhora Phi na iteração %d', iteracao)
                convergiu = True
                break
            delta = aceito[1].phi - atual.phi
            amplitudes, atual = aceito
            historico.append(atual.phi)
            if abs(delta) >= aprendizado.stop_tolerance:
                quietas = 0
            elif estagnado:
                taxa_base = self._escalate(taxa_base, iteracao, atual.phi)
            else:
                quietas += 1
            if atual.phi >= aprendizado.stall_population:
                taxa_base = aprendizado.initial_rate
            if iteracao % 100 == 0:
                logger.debug('Iteração %d: Phi = %.10f (alpha = %.2e)', iteracao, atual.phi, taxa)
            if quietas >= aprendizado.patience:
                convergiu = True
                break

        otimizado = inicial.with_amplitudes(amplitudes)
        resultado = self._result(otimizado, historico, atual, iteracao, convergiu, seed)
        logger.info(
            'GRAPE: T=%g, n=%d, população final %.6f em %d iterações (convergiu=%s)',
            duracao, otimizado.slices, resultado.final_population, iteracao, convergiu,
        )
        return resultado

    def _escalate(self, taxa_base: float, iteracao: int, phi: float) -> float:
        aprendizado = self.config.learning
        nova = min(taxa_base / aprendizado.backtracking, aprendizado.max_rate)
        logger.debug('Iteração %d parada em Phi = %.3e; taxa base %.2e -> %.2e', iteracao, phi, taxa_base, nova)
        return nova

    @staticmethod
    def _checked(avaliacao: Landscape, iteracao: int) -> Landscape:
        if not (math.isfinite(avaliacao.phi) and np.all(np.isfinite(avaliacao.gradient))):
            raise OptimizationError(f'Phi ou gradiente não finito na iteração {iteracao}')
        return avaliacao

    def _result(self, schedule, historico, avaliacao, iteracoes, convergiu, seed) -> GrapeResult:
        n_sites = self.config.target.n_sites
        return GrapeResult(
            schedule=schedule,
            phi_history=historico,
            final_population=avaliacao.phi,
            iterations=iteracoes,
            converged=convergiu,
            gradient_exact=avaliacao.exact,
            seed=seed,
            metadata={
                'mode': self.config.model.kind,
                'N': n_sites,
                'constants_version': config.CONSTANTS_VERSION,
            },
        )


def optimize(grape_config: GrapeConfig, psi0: Optional[StateVector] = None) -> GrapeResult:
    """
    Otimiza o campo para a configuração dada

    Args:
        grape_config: Modelo, alvo, duração, campo inicial e aprendizado
        psi0: Estado inicial (padrão: produto de |+>)
    """
    if psi0 is None:
        psi0 = plus_product_state(grape_config.target.n_sites)
    return GrapeOptimizer(grape_config).run(psi0)


def optimize_with_restarts(
    grape_config: GrapeConfig,
    psi0: Optional[StateVector] = None,
    restarts: int = 0,
    base_seed: int = 0,
    stall_restarts: int = 0,
) -> GrapeResult:
    """
    Melhor resultado entre o campo inicial configurado e `restarts`
    campos aleatórios adicionais (semente base_seed + r)

    Se o melhor ainda fica abaixo de learning.stall_population, tenta até
    `stall_restarts` campos aleatórios extras (sementes seguintes) e para
    no primeiro que passa do limiar.
    """
    melhor = optimize(grape_config, psi0)
    b0 = grape_config.guess.b0
    limiar = grape_config.learning.stall_population
    for r in range(restarts + stall_restarts):
        if r >= restarts and melhor.final_population >= limiar:
            break
        if r >= restarts:
            logger.info('Melhor população %.4f abaixo de %.2f; novo campo aleatório (semente %d)',
                        melhor.final_population, limiar, base_seed + r)
        alternativo = grape_config.with_guess(RandomGuess(b0=b0, seed=base_seed + r))
        resultado = optimize(alternativo, psi0)
        if resultado.final_population > melhor.final_population:
            melhor = resultado
    return melhor


@dataclass
class DurationScan:
    durations: np.ndarray
    populations: np.ndarray
    peak_indices: np.ndarray
    results: List[GrapeResult]

    @property
    def peak_durations(self) -> np.ndarray:
        return self.durations[self.peak_indices]

    @property
    def peak_populations(self) -> np.ndarray:
        return self.populations[self.peak_indices]

    @property
    def peak_schedules(self) -> List[ControlSchedule]:
        return [self.results[i].schedule for i in self.peak_indices]


def _optimize_at(argumentos) -> GrapeResult:
    grape_config, duracao, psi0, restarts, base_seed = argumentos
    return optimize_with_restarts(grape_config.with_duration(duracao), psi0, restarts, base_seed)


def scan_duration(
    grape_config: GrapeConfig,
    t_min: float,
    t_max: float,
    steps: int,
    psi0: Optional[StateVector] = None,
    restarts: int = 0,
    base_seed: int = 0,
    workers: int = 1,
    peak_height: Optional[float] = config.SCAN_PEAK_HEIGHT,
    peak_prominence: Optional[float] = config.SCAN_PEAK_PROMINENCE,
) -> DurationScan:
    """
    Otimiza em cada T de uma grade uniforme e localiza os máximos locais

    Só contam como picos os máximos com população >= peak_height e
    proeminência >= peak_prominence (None desliga o critério).

    Raises:
        ConfigError: se t_min >= t_max ou steps < 2
    """
    if not t_min < t_max:
        raise ConfigError(f'Intervalo de T inválido: [{t_min}, {t_max}]')
    if steps < 2:
        raise ConfigError(f'A varredura precisa de pelo menos 2 pontos, recebeu {steps}')
    if psi0 is None:
        psi0 = plus_product_state(grape_config.target.n_sites)
    duracoes = np.linspace(t_min, t_max, steps)
    tarefas = [(grape_config, float(t), psi0, restarts, base_seed) for t in duracoes]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as executor:
            resultados = list(executor.map(_optimize_at, tarefas))
    else:
        resultados = [_optimize_at(t) for t in tarefas]
    populacoes = np.array([r.final_population for r in resultados])
    picos, _ = find_peaks(populacoes, height=peak_height, prominence=peak_prominence)
    logger.info('Varredura de T: %d pontos, picos em %s', steps, np.round(duracoes[picos], 4).tolist())
    return DurationScan(duracoes, populacoes, picos, resultados)

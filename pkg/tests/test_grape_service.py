"""
Testes do otimizador GRAPE
"""
import math

import numpy as np
import pytest

import config
from erros import ConfigError, DimensionError, OptimizationError
from models.geometry import IdealModel, RydbergModel, regular_chain
from models.schedule import ControlSchedule
from services.analytic_service import APPENDIX_FIELD_SIGN, constant_field_params
from services.chain_model import assemble_system, build_control_hz
from services.graph_targets import TargetSpec, complete_graph_state, plus_product_state
from services.grape_service import (
    ControlProblem,
    GaussianGuess,
    GrapeConfig,
    GrapeOptimizer,
    Landscape,
    LearningSettings,
    RandomGuess,
    gaussian_guess,
    landscape_and_gradient,
    optimize,
    optimize_with_restarts,
    population_trace,
    random_guess,
    scan_duration,
)
from tests.helpers import random_hermitian


def _problema_n1(alvo=None):
    mais = plus_product_state(1)
    return ControlProblem(np.zeros((2, 2), dtype=complex), build_control_hz(1), mais,
                          mais if alvo is None else alvo)


def test_gaussian_guess_is_symmetric_with_central_peak():
    schedule = gaussian_guess(101, 0.2, 1.5, 0.1)
    np.testing.assert_allclose(schedule.amplitudes, schedule.amplitudes[::-1], rtol=1e-12)
    assert schedule.amplitudes[50] == pytest.approx(1.5 / (math.sqrt(2 * math.pi) * 0.1))
    assert np.argmax(schedule.amplitudes) == 50


def test_gaussian_guess_area_is_close_to_b0_times_duration():
    schedule = gaussian_guess(100, 2.0, 0.7, 0.1)
    assert schedule.area == pytest.approx(0.7 * 2.0, rel=1e-4)


def test_gaussian_guess_rejects_zero_sigma():
    with pytest.raises(ConfigError):
        gaussian_guess(10, 1.0, 1.0, 0.0)


def test_random_guess_is_deterministic_and_bounded():
    a = random_guess(10, 1.0, 2.0, seed=7)
    b = random_guess(10, 1.0, 2.0, seed=7)
    c = random_guess(10, 1.0, 2.0, seed=8)
    np.testing.assert_array_equal(a.amplitudes, b.amplitudes)
    assert not np.array_equal(a.amplitudes, c.amplitudes)
    assert np.all((a.amplitudes >= 0) & (a.amplitudes <= 2.0))


def test_learning_settings_validation():
    with pytest.raises(ConfigError):
        LearningSettings(initial_rate=0)
    with pytest.raises(ConfigError):
        LearningSettings(backtracking=1.0)
    with pytest.raises(ConfigError):
        LearningSettings(max_iterations=0)


@pytest.mark.parametrize('modelo', [IdealModel(1.0), RydbergModel(regular_chain(3))])
def test_exact_gradient_matches_finite_differences(modelo, rng):
    duracao = 2.0 if isinstance(modelo, IdealModel) else 0.141
    amplitudes = rng.normal(0.0, 5.0, size=12)
    problema = ControlProblem.from_model(modelo, plus_product_state(3), complete_graph_state(3))
    exato = problema.evaluate(amplitudes, duracao)
    numerico = problema._finite_difference(amplitudes, duracao)
    assert exato.exact and not numerico.exact
    assert exato.phi == pytest.approx(numerico.phi, abs=1e-14)
    np.testing.assert_allclose(exato.gradient, numerico.gradient, rtol=1e-5, atol=1e-8)


def test_single_spin_landscape_is_analytic():
    # Phi = cos^2(A/2) para |+> sob exp(-i A sz/2)
    problema = _problema_n1()
    amplitudes = np.array([0.3, -1.1, 2.0, 0.4])
    duracao = 1.2
    dt = duracao / amplitudes.size
    area = amplitudes.sum() * dt
    avaliacao = problema.evaluate(amplitudes, duracao)
    assert avaliacao.phi == pytest.approx(math.cos(area / 2) ** 2, abs=1e-12)
    np.testing.assert_allclose(avaliacao.gradient, -dt * math.sin(area) / 2, atol=1e-12)


def test_commuting_problem_depends_only_on_area(rng):
    problema = ControlProblem.from_model(IdealModel(1.0), plus_product_state(3), complete_graph_state(3))
    a = rng.normal(size=20)
    b = np.full(20, a.mean())
    assert problema.phi(a, 2.3) == pytest.approx(problema.phi(b, 2.3), abs=1e-12)


def test_non_commuting_drift_falls_back_to_finite_differences(rng):
    hz = build_control_hz(2)
    h0 = random_hermitian(rng, 4)
    problema = ControlProblem(h0, hz, plus_product_state(2), complete_graph_state(2))
    assert not problema.commuting
    assert not problema.evaluate(np.ones(4), 1.0).exact


def test_problem_rejects_incompatible_dimensions():
    with pytest.raises(DimensionError):
        ControlProblem(np.zeros((4, 4)), build_control_hz(2), plus_product_state(3), complete_graph_state(3))


def test_population_trace_starts_at_initial_overlap(ideal_model):
    schedule = gaussian_guess(20, 2.3, 1.0, 0.1)
    psi0, alvo = plus_product_state(3), complete_graph_state(3)
    traco = population_trace(ideal_model, schedule, psi0, alvo)
    assert traco.shape == (21,)
    assert traco[0] == pytest.approx(abs(np.vdot(alvo, psi0)) ** 2)
    assert traco[-1] == pytest.approx(landscape_and_gradient(ideal_model, schedule, psi0, alvo).phi)


def test_zero_gradient_start_returns_immediately():
    cfg = GrapeConfig(model=IdealModel(1.0), target=TargetSpec(2), duration=1.0, guess=GaussianGuess(b0=0.0))
    resultado = GrapeOptimizer(cfg, _problema_n1()).run(plus_product_state(1))
    assert resultado.iterations == 0
    assert resultado.converged
    assert resultado.final_population == pytest.approx(1.0)
    np.testing.assert_array_equal(resultado.schedule.amplitudes, np.zeros(config.GAUSSIAN_SLICES))


def test_non_finite_landscape_raises():
    class ProblemaQuebrado:
        def evaluate(self, amplitudes, duration):
            return Landscape(float('nan'), np.zeros(np.size(amplitudes)), True)

    cfg = GrapeConfig(model=IdealModel(1.0), target=TargetSpec(3), duration=1.0, guess=GaussianGuess(b0=1.0))
    with pytest.raises(OptimizationError):
        GrapeOptimizer(cfg, ProblemaQuebrado()).run(plus_product_state(3))


def test_phi_history_is_non_decreasing():
    cfg = GrapeConfig(
        model=RydbergModel(regular_chain(3)),
        target=TargetSpec(3),
        duration=0.141,
        guess=GaussianGuess(b0=config.GUESS_B0_RYDBERG),
        learning=LearningSettings(max_iterations=60),
    )
    resultado = optimize(cfg)
    historico = np.array(resultado.phi_history)
    assert np.all(np.diff(historico) >= 0)
    assert resultado.final_population == pytest.approx(historico[-1])
    assert resultado.metadata['mode'] == 'rydberg'
    assert resultado.metadata['N'] == 3


def test_ideal_three_qubit_state_is_reached():
    # (C1, C2) = (0, 0) com J da forma sem 1/2 igual a 1/2 corresponde a J = 1 aqui
    solucao = constant_field_params(0, 0, 0.5)
    campo = APPENDIX_FIELD_SIGN * solucao.field
    cfg = GrapeConfig(
        model=IdealModel(1.0),
        target=TargetSpec(3),
        duration=solucao.t_star,
        guess=GaussianGuess(b0=1.1 * campo),
    )
    resultado = optimize(cfg)
    assert resultado.final_population >= 0.999
    assert resultado.gradient_exact


def test_restarts_never_lose_to_the_base_guess():
    cfg = GrapeConfig(
        model=IdealModel(1.0),
        target=TargetSpec(3),
        duration=2.3,
        guess=GaussianGuess(b0=0.5),
        learning=LearningSettings(max_iterations=40),
    )
    base = optimize(cfg)
    melhor = optimize_with_restarts(cfg, restarts=2, base_seed=3)
    assert melhor.final_population >= base.final_population


def test_random_guess_seed_is_recorded():
    cfg = GrapeConfig(
        model=IdealModel(1.0), target=TargetSpec(3), duration=2.3,
        guess=RandomGuess(b0=1.0, seed=11), learning=LearningSettings(max_iterations=5),
    )
    resultado = optimize(cfg)
    assert resultado.seed == 11
    assert resultado.schedule.slices == config.RANDOM_SLICES


def test_scan_duration_grid_and_peaks():
    cfg = GrapeConfig(
        model=IdealModel(1.0), target=TargetSpec(3), duration=1.0,
        guess=GaussianGuess(b0=1.0, slices=20), learning=LearningSettings(max_iterations=30),
    )
    varredura = scan_duration(cfg, 0.5, 3.0, 6)
    assert np.all(np.diff(varredura.durations) > 0)
    assert varredura.populations.shape == (6,)
    assert np.all((varredura.populations >= 0) & (varredura.populations <= 1 + 1e-12))
    assert len(varredura.results) == 6
    for indice in varredura.peak_indices:
        assert 0 < indice < 5


def test_scan_duration_rejects_bad_range():
    cfg = GrapeConfig(model=IdealModel(1.0), target=TargetSpec(3), duration=1.0, guess=GaussianGuess(b0=1.0))
    with pytest.raises(ConfigError):
        scan_duration(cfg, 2.0, 1.0, 5)
    with pytest.raises(ConfigError):
        scan_duration(cfg, 1.0, 2.0, 1)


def test_schedule_is_immutable():
    schedule = ControlSchedule(1.0, [1.0, 2.0])
    with pytest.raises(ValueError):
        schedule.amplitudes[0] = 5.0


def test_gaussian_guess_edge_slice():
    schedule = gaussian_guess(100, 2.3, 1.0, 0.1)
    esperado = 1.0 / (math.sqrt(2 * math.pi) * 0.1) * math.exp(-0.495 ** 2 / 0.02)
    assert schedule.amplitudes[0] == pytest.approx(esperado, rel=1e-12)
    assert schedule.amplitudes[-1] == pytest.approx(esperado, rel=1e-12)


def test_rydberg_landscape_is_invariant_under_slice_permutation(rydberg_model_3, rng):
    problema = ControlProblem.from_model(rydberg_model_3, plus_product_state(3), complete_graph_state(3))
    amplitudes = rng.normal(0.0, 10.0, size=15)
    assert problema.phi(amplitudes, 0.141) == pytest.approx(problema.phi(rng.permutation(amplitudes), 0.141),
                                                           abs=1e-12)


class PlatoSigmoide:
    """Phi(A) = 0.001 + 0.99 sigmoide(A - 12) na área A = soma de B_k dt"""

    def evaluate(self, amplitudes, duration):
        dt = duration / np.size(amplitudes)
        s = 1.0 / (1.0 + math.exp(-(float(np.sum(amplitudes)) * dt - 12.0)))
        return Landscape(0.001 + 0.99 * s, np.full(np.size(amplitudes), dt * 0.99 * s * (1 - s)), True)


def test_optimizer_leaves_low_plateau():
    # no início |g| ~ 6e-7 e cada passo com alpha = 1 muda Phi em ~4e-10
    cfg = GrapeConfig(model=IdealModel(1.0), target=TargetSpec(3), duration=1.0,
                      guess=GaussianGuess(b0=1e-6, slices=10), learning=LearningSettings(max_iterations=2000))
    resultado = GrapeOptimizer(cfg, PlatoSigmoide()).run(plus_product_state(3))
    assert resultado.final_population > 0.9
    assert np.all(np.diff(resultado.phi_history) >= 0)


def test_plateau_counts_as_converged_above_stall_population():
    cfg = GrapeConfig(model=IdealModel(1.0), target=TargetSpec(3), duration=1.0,
                      guess=GaussianGuess(b0=1e-6, slices=10),
                      learning=LearningSettings(stall_population=0.0))
    resultado = GrapeOptimizer(cfg, PlatoSigmoide()).run(plus_product_state(3))
    assert resultado.converged
    assert resultado.final_population < 0.01
    assert resultado.iterations == config.STOP_PATIENCE


def test_stall_settings_validation():
    with pytest.raises(ConfigError):
        LearningSettings(stall_population=1.5)
    with pytest.raises(ConfigError):
        LearningSettings(rate_ceiling=0.5)
    assert LearningSettings(initial_rate=2.0, rate_ceiling=8.0).max_rate == 16.0


def test_stall_restarts_run_only_below_threshold(caplog):
    inalcancavel = GrapeConfig(model=IdealModel(1.0), target=TargetSpec(3), duration=2.3,
                               guess=GaussianGuess(b0=0.5),
                               learning=LearningSettings(max_iterations=3, stall_population=1.0))
    with caplog.at_level('INFO', logger='services.grape_service'):
        optimize_with_restarts(inalcancavel, stall_restarts=2, base_seed=5)
    extras = [r for r in caplog.records if 'novo campo aleatório' in r.getMessage()]
    assert [r.getMessage().rstrip(')').split()[-1] for r in extras] == ['5', '6']


def test_stall_restarts_skipped_when_threshold_is_met(caplog):
    cfg = GrapeConfig(model=IdealModel(1.0), target=TargetSpec(3), duration=2.3,
                      guess=GaussianGuess(b0=0.5),
                      learning=LearningSettings(max_iterations=3, stall_population=0.0))
    with caplog.at_level('INFO', logger='services.grape_service'):
        optimize_with_restarts(cfg, stall_restarts=2)
    assert not any('novo campo aleatório' in r.getMessage() for r in caplog.records)


def test_scan_peaks_respect_height_threshold():
    cfg = GrapeConfig(
        model=IdealModel(1.0), target=TargetSpec(3), duration=1.0,
        guess=GaussianGuess(b0=1.0, slices=20), learning=LearningSettings(max_iterations=30),
    )
    livre = scan_duration(cfg, 0.5, 3.0, 6, peak_height=None, peak_prominence=None)
    alto = scan_duration(cfg, 0.5, 3.0, 6, peak_height=1.1)
    assert len(alto.peak_indices) == 0
    filtrado = scan_duration(cfg, 0.5, 3.0, 6, peak_height=0.0, peak_prominence=0.05)
    assert set(filtrado.peak_indices) <= set(livre.peak_indices)
    assert len(livre.peak_schedules) == len(livre.peak_indices)

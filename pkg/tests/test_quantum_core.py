"""
Testes da álgebra densa de operadores e estados
"""
import numpy as np
import pytest
from scipy.linalg import expm

from erros import DimensionError, HermiticityError
from models.basis import PROTOCOL, SPIN, SPIN_SINK
from services.chain_model import build_control_hz, build_xx_chain
from services.quantum_core import (
    SIGMA_X,
    SIGMA_Z,
    apply_local_phase,
    embed_into_basis,
    embed_local_operator,
    evolve_unitary,
    infer_sites,
    population,
    propagator,
    state_from_records,
    state_to_records,
    to_density_matrix,
    validate_density_matrix,
)
from tests.helpers import random_hermitian, random_state

UP = np.array([1, 0], dtype=complex)
DOWN = np.array([0, 1], dtype=complex)


def test_embed_identity_gives_global_identity():
    op = embed_local_operator(np.eye(2), 1, 3)
    np.testing.assert_array_equal(op, np.eye(8))


def test_embed_sigma_z_on_leftmost_site():
    op = embed_local_operator(SIGMA_Z, 0, 2)
    np.testing.assert_array_equal(np.diag(op), [1, 1, -1, -1])


def test_embed_sigma_x_on_site_one():
    op = embed_local_operator(SIGMA_X, 1, 2)
    # <up down| op |up up> com up=0, down=1
    assert op[1, 0] == 1


@pytest.mark.parametrize('site', [-1, 3])
def test_embed_rejects_site_out_of_range(site):
    with pytest.raises(DimensionError):
        embed_local_operator(SIGMA_Z, site, 3)


def test_embed_rejects_wrong_local_dimension():
    with pytest.raises(DimensionError):
        embed_local_operator(np.eye(3), 0, 2, SPIN)


def test_evolve_zero_time_returns_input(rng):
    h = random_hermitian(rng, 8)
    psi = random_state(rng, 8)
    np.testing.assert_array_equal(evolve_unitary(h, 0.0, psi), psi)


def test_evolve_single_spin_phase():
    campo, t = 1.7, 0.9
    final = evolve_unitary(campo * build_control_hz(1), t, UP)
    np.testing.assert_allclose(final, np.exp(-0.5j * campo * t) * UP, atol=1e-12)


def test_evolve_two_site_flip_flop():
    j, t = 0.8, 1.3
    up_down = np.kron(UP, DOWN)
    down_up = np.kron(DOWN, UP)
    final = evolve_unitary(build_xx_chain(2, j), t, up_down)
    esperado = np.cos(j * t) * up_down - 1j * np.sin(j * t) * down_up
    np.testing.assert_allclose(final, esperado, atol=1e-12)


def test_evolve_preserves_norm_and_matches_expm(rng):
    h = random_hermitian(rng, 16)
    psi = random_state(rng, 16)
    final = evolve_unitary(h, 2.5, psi)
    assert abs(np.linalg.norm(final) - 1) < 1e-10
    np.testing.assert_allclose(final, expm(-2.5j * h) @ psi, atol=1e-10)


def test_evolve_composes_over_intervals(rng):
    h = random_hermitian(rng, 8)
    psi = random_state(rng, 8)
    em_partes = evolve_unitary(h, 0.7, evolve_unitary(h, 0.4, psi))
    np.testing.assert_allclose(em_partes, evolve_unitary(h, 1.1, psi), atol=1e-10)


def test_propagator_is_unitary(rng):
    h = random_hermitian(rng, 8)
    produto = propagator(h, 1.3) @ propagator(h, -1.3)
    assert np.max(np.abs(produto - np.eye(8))) < 1e-10


def test_evolve_rejects_non_hermitian(rng):
    h = random_hermitian(rng, 4)
    h[0, 1] += 0.1
    with pytest.raises(HermiticityError):
        evolve_unitary(h, 1.0, random_state(rng, 4))


def test_evolve_rejects_nan(rng):
    h = random_hermitian(rng, 4)
    h[0, 0] = np.nan
    with pytest.raises(HermiticityError):
        evolve_unitary(h, 1.0, random_state(rng, 4))


def test_population_basics(rng):
    psi = random_state(rng, 8)
    assert population(psi, psi) == pytest.approx(1.0)
    assert population(UP, DOWN) == 0.0
    assert population(np.exp(0.7j) * psi, psi) == pytest.approx(1.0)


def test_population_density_matrix_matches_pure(rng):
    psi = random_state(rng, 8)
    alvo = random_state(rng, 8)
    assert population(to_density_matrix(psi), alvo) == pytest.approx(population(psi, alvo), abs=1e-12)


def test_population_rejects_unnormalized_target():
    with pytest.raises(DimensionError):
        population(UP, 2 * UP)


def test_population_rejects_dimension_mismatch(rng):
    with pytest.raises(DimensionError):
        population(random_state(rng, 4), random_state(rng, 8))


def test_validate_density_matrix(rng):
    validate_density_matrix(to_density_matrix(random_state(rng, 9)))
    with pytest.raises(HermiticityError):
        validate_density_matrix(2 * to_density_matrix(random_state(rng, 9)))
    with pytest.raises(HermiticityError):
        validate_density_matrix(np.diag([1.5, -0.5]).astype(complex))


def test_infer_sites():
    assert infer_sites(8) == 3
    assert infer_sites(27, SPIN_SINK) == 3
    assert infer_sites(125, PROTOCOL) == 3
    with pytest.raises(DimensionError):
        infer_sites(6)


def test_embed_into_three_level_basis():
    up_down = np.kron(UP, DOWN)
    down_up = np.kron(DOWN, UP)
    levado = embed_into_basis(0.6 * up_down + 0.8 * down_up, 2, SPIN_SINK)
    assert levado.size == 9
    assert levado[1] == pytest.approx(0.6)
    assert levado[3] == pytest.approx(0.8)
    assert np.linalg.norm(levado) == pytest.approx(1.0)


def test_state_records_round_trip(rng):
    psi = random_state(rng, 8)
    registros = state_to_records(psi)
    assert registros[0][0] == '↑↑↑'
    assert registros[-1][0] == '↓↓↓'
    np.testing.assert_array_equal(state_from_records(registros), psi)


def test_apply_local_phase_matches_embedded_operator(rng):
    psi = random_state(rng, 8)
    fases = {0: (1j, 1), 2: (1, -1)}
    esperado = embed_local_operator(np.diag([1j, 1]), 0, 3) @ embed_local_operator(np.diag([1, -1]), 2, 3) @ psi
    np.testing.assert_allclose(apply_local_phase(psi, fases), esperado, atol=1e-14)


def test_apply_local_phase_rejects_bad_input(rng):
    psi = random_state(rng, 4)
    with pytest.raises(DimensionError):
        apply_local_phase(psi, {2: (1, 1)})
    with pytest.raises(DimensionError):
        apply_local_phase(psi, {0: (1, 1, 1)})

"""
Testes dos Hamiltonianos da cadeia
"""
import math

import numpy as np
import pytest

import config
from erros import DimensionError, GeometryError
from models.basis import SPIN_SINK
from models.geometry import ChainGeometry, IdealModel, RydbergModel, regular_chain
from services.chain_model import (
    assemble_system,
    build_control_hz,
    build_error_hamiltonian,
    build_xx_chain,
    dipole_strength,
    hopping_couplings,
    magnetization_commutator,
    van_der_waals,
)


def test_two_site_chain_has_only_flip_flop_entries():
    h = build_xx_chain(2, 0.7)
    esperado = np.zeros((4, 4))
    esperado[1, 2] = esperado[2, 1] = 0.7
    np.testing.assert_allclose(h, esperado, atol=1e-15)


def test_chain_rejects_single_site():
    with pytest.raises(DimensionError):
        build_xx_chain(1, 1.0)


def test_single_excitation_spectrum():
    h = build_xx_chain(3, 1.3)
    # setor com um único up: |up down down>, |down up down>, |down down up>
    setor = [3, 5, 6]
    autovalores = np.linalg.eigvalsh(h[np.ix_(setor, setor)])
    np.testing.assert_allclose(autovalores, [-math.sqrt(2) * 1.3, 0.0, math.sqrt(2) * 1.3], atol=1e-12)


def test_control_hz_values():
    np.testing.assert_array_equal(np.diag(build_control_hz(2)).real, [1, 0, 0, -1])
    assert build_control_hz(3)[0, 0] == 1.5


def test_control_hz_vanishes_on_sink_level():
    hz = build_control_hz(1, SPIN_SINK)
    np.testing.assert_array_equal(np.diag(hz).real, [0.5, -0.5, 0.0])


@pytest.mark.parametrize('n_sites', [3, 4])
def test_xx_chain_commutes_with_hz(n_sites):
    assert magnetization_commutator(build_xx_chain(n_sites, 1.0), build_control_hz(n_sites)) < 1e-12


def test_nearest_neighbor_dipole_strength():
    geometria = regular_chain(3)
    valor = dipole_strength(geometria, 0, 1)
    assert valor == pytest.approx(-2 * config.C3 / 19.3 ** 3)
    assert valor / config.TWO_PI == pytest.approx(-2.443, rel=1e-3)


def test_dipole_strength_is_symmetric_and_scales_cubically():
    geometria = regular_chain(3)
    assert dipole_strength(geometria, 1, 0) == pytest.approx(dipole_strength(geometria, 0, 1))
    assert dipole_strength(geometria, 0, 2) == pytest.approx(dipole_strength(geometria, 0, 1) / 8)


def test_dipole_strength_vanishes_at_magic_angle():
    theta = math.acos(1 / math.sqrt(3))
    geometria = ChainGeometry(positions=((0, 0, 0), (19.3 * math.sin(theta), 0, 19.3 * math.cos(theta))))
    assert abs(dipole_strength(geometria, 0, 1)) < 1e-9


def test_dipole_strength_invariant_under_translation():
    geometria = regular_chain(3)
    transladada = geometria.displaced(np.tile([1.0, -2.0, 0.5], (3, 1)))
    assert dipole_strength(transladada, 0, 2) == pytest.approx(dipole_strength(geometria, 0, 2))


def test_dipole_strength_requires_distinct_sites():
    with pytest.raises(GeometryError):
        dipole_strength(regular_chain(3), 1, 1)


def test_coincident_atoms_are_rejected():
    with pytest.raises(GeometryError):
        ChainGeometry(positions=((0, 0, 0), (0, 0, 0.0001)))


def test_van_der_waals_pair_energies():
    u_up, u_down = van_der_waals(regular_chain(2), 0, 1)
    assert u_up / config.TWO_PI == pytest.approx(0.0805, rel=2e-3)
    assert u_down / config.TWO_PI == pytest.approx(-0.0668, rel=2e-3)


def test_two_site_error_hamiltonian_is_diagonal():
    geometria = regular_chain(2)
    h = build_error_hamiltonian(geometria)
    u_up, u_down = van_der_waals(geometria, 0, 1)
    np.testing.assert_allclose(h, np.diag([u_up, 0, 0, u_down]), atol=1e-12)


def test_ideal_system_is_plain_chain():
    h0, hz = assemble_system(IdealModel(1.0), 3)
    np.testing.assert_array_equal(h0, build_xx_chain(3, 1.0))
    np.testing.assert_array_equal(hz, build_control_hz(3))


def test_rydberg_default_chain_couplings_are_equal():
    acoplamentos = hopping_couplings(RydbergModel(regular_chain(5)), 5)
    assert len(acoplamentos) == 4
    assert acoplamentos == pytest.approx([acoplamentos[0]] * 4)
    assert acoplamentos[0] / config.TWO_PI == pytest.approx(-2.443, rel=1e-3)


@pytest.mark.parametrize('n_sites', [2, 3, 4, 5, 6])
def test_every_model_conserves_magnetization(n_sites):
    for modelo in (IdealModel(-0.4), RydbergModel(regular_chain(n_sites))):
        h0, hz = assemble_system(modelo, n_sites)
        assert np.max(np.abs(h0 - h0.conj().T)) < 1e-12
        assert magnetization_commutator(h0 + 3.7 * hz, hz) < 1e-12


def test_displaced_geometry_still_conserves_magnetization(rng):
    geometria = regular_chain(4).displaced(rng.normal(0, 0.5, size=(4, 3)))
    h0, hz = assemble_system(RydbergModel(geometria), 4)
    assert magnetization_commutator(h0, hz) < 1e-12


def test_geometry_size_must_match_n():
    with pytest.raises(DimensionError):
        assemble_system(RydbergModel(regular_chain(3)), 4)


def test_distance_offset_scales_coupling():
    geometria = regular_chain(3).with_distance_offset(0.3)
    razao = dipole_strength(geometria, 0, 1) / dipole_strength(regular_chain(3), 0, 1)
    assert razao == pytest.approx((19.3 / 19.6) ** 3)


@pytest.mark.parametrize('direcao', [(0.0, 0.0, 1.0), (1.0, 1.0, 0.0), (0.3, -0.2, 0.9)])
def test_trap_axes_are_orthonormal_with_beam_across_chain(direcao):
    passo = 19.3 * np.asarray(direcao) / np.linalg.norm(direcao)
    geometria = ChainGeometry(positions=tuple(tuple(i * passo) for i in range(3)))
    eixos = geometria.trap_axes()
    np.testing.assert_allclose(eixos @ eixos.T, np.eye(3), atol=1e-12)
    np.testing.assert_allclose(eixos[0], passo / np.linalg.norm(passo), atol=1e-12)
    assert abs(np.dot(eixos[2], eixos[0])) < 1e-12

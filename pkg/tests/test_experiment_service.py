"""
Testes da montagem de objetos pelo serviço de experimentos
"""
import pytest

import config
from models.experiment_config import ExperimentConfig
from models.schedule import ControlSchedule
from services.experiment_service import ExperimentService
from services.protocol_service import pi_pulse


def test_grape_config_carries_stall_threshold(tmp_path):
    experimento = ExperimentConfig.from_dict({'grape': {'limiar_estagnacao': 0.3}, 'saida': {'diretorio': str(tmp_path)}})
    learning = ExperimentService(experimento).grape_config().learning
    assert learning.stall_population == 0.3
    assert learning.initial_rate == config.LEARNING_RATE


def test_protocol_plan_uses_configured_rabi_rates(tmp_path):
    experimento = ExperimentConfig.from_dict({
        'protocolo': {'rabi_mhz': 8.0, 'rabi_mw_a_mhz': 35.0, 'rabi_mw_b_mhz': 100.0},
        'saida': {'diretorio': str(tmp_path)},
    })
    plano = ExperimentService(experimento)._plan(experimento, ControlSchedule(0.141, [1.0] * 10))
    duracoes = [etapa.duration for etapa in plano.stages]
    assert duracoes[0] == pytest.approx(pi_pulse(config.mhz(8.0)))
    assert duracoes[1] == pytest.approx(pi_pulse(config.mhz(35.0)) / 2)
    assert duracoes[3] == pytest.approx(pi_pulse(config.mhz(100.0)))
    assert plano.total_duration > 0.141 + 2 * pi_pulse(config.mhz(8.0))

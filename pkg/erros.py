"""
Hierarquia de erros do sistema de simulação
"""


class SimulacaoError(Exception):
    """
    Erro base de todas as operações do sistema
    """


class DimensionError(SimulacaoError, ValueError):
    """Dimensões incompatíveis ou fora do limite suportado"""


class HermiticityError(SimulacaoError, ValueError):
    """Operador que deveria ser hermitiano não é"""


class GeometryError(SimulacaoError, ValueError):
    """Geometria inválida (átomos coincidentes, cadeia curta demais)"""


class ConfigError(SimulacaoError, ValueError):
    """Configuração de experimento malformada"""


class OptimizationError(SimulacaoError):
    """Falha numérica durante a otimização GRAPE"""


class MasterEquationError(SimulacaoError):
    """Falha na integração da equação mestra"""


class ArtifactMissingError(SimulacaoError):
    """Artefato pré-requisito não encontrado"""


class EnsembleError(SimulacaoError):
    """
    Falha de uma amostra do ensemble; carrega a semente para reprodução
    """

    def __init__(self, seed: int, causa: Exception):
        super().__init__(f'Amostra com semente {seed} falhou: {causa}')
        self.seed = seed
        self.causa = causa

    def __reduce__(self):
        return (EnsembleError, (self.seed, self.causa))

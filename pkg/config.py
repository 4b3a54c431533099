"""
Configurações e constantes do sistema de geração de estados de grafo completo
"""
import math
import os
from dotenv import load_dotenv

# Carrega variáveis de ambiente
load_dotenv()

# Versões gravadas em todos os artefatos
TOOL_VERSION = '1.0.0'
CONSTANTS_VERSION = 'rb87-80s-79p-v1'

# Configurações de execução
WORKERS = int(os.getenv('WORKERS', 1))
OUTPUT_DIR = os.getenv('OUTPUT_DIR', 'resultados')
DATABASE_PATH = os.getenv('DATABASE_PATH', os.path.join(OUTPUT_DIR, 'registros.db'))
LOG_LEVEL = os.getenv('LOG_LEVEL', 'INFO').upper()

# Unidades: hbar = 1, tempo em us, energia em rad/us ("2pi x 1 MHz" -> 2pi rad/us)
TWO_PI = 2.0 * math.pi


def mhz(valor: float) -> float:
    """Converte um valor citado como 2pi x valor MHz para rad/us"""
    return TWO_PI * valor


def ghz(valor: float) -> float:
    """Converte um valor citado como 2pi x valor GHz para rad/us"""
    return TWO_PI * valor * 1.0e3


# Constantes físicas do 87Rb (|80S_1/2> e |79P_3/2>)
C3 = ghz(8.780)             # rad/us . um^3
C6_UP = ghz(-4161.55)       # rad/us . um^6
C6_DOWN = ghz(3452.60)      # rad/us . um^6
SPACING_UM = 19.3           # distância entre vizinhos (um)
LIFETIME_UP_US = 569.0      # tau do |80S_1/2> a 0.1 K
LIFETIME_DOWN_US = 1100.0   # tau do |79P_3/2> a 0.1 K
MIN_DISTANCE_UM = 1.0e-3    # átomos mais próximos que 1 nm são considerados coincidentes

# Frequências de Rabi do protocolo em etapas
RABI_TWO_PHOTON = mhz(4.0)
RABI_MW_A = mhz(70.0)
RABI_MW_B = mhz(200.0)

# Ruído experimental
POSITION_SIGMA_NM = (193.5, 193.5, 1242.9)  # referencial da pinça: z é o eixo do feixe, transversal à cadeia
FIELD_SIGMA = mhz(0.5)
ENSEMBLE_SAMPLES = 50
DELTA_R_RANGE_NM = (-300.0, 300.0, 50.0)
VIBRATION_DELTA_NM = 100.0

# Parâmetros do GRAPE
IDEAL_COUPLING = 1.0
GUESS_B0_RYDBERG = mhz(1.0)
GAUSSIAN_SIGMA = 0.1
GAUSSIAN_SLICES = 100
RANDOM_SLICES = 10
LEARNING_RATE = 1.0
BACKTRACKING_FACTOR = 0.5
LEARNING_RATE_FLOOR = 1.0e-6
STOP_TOLERANCE = 1.0e-8
STOP_PATIENCE = 10
STALL_POPULATION = 0.5         # abaixo disso um platô não conta como convergência
LEARNING_RATE_CEILING = 1024.0  # teto da taxa, em múltiplos da taxa inicial
STALL_RESTARTS = 3
MAX_ITERATIONS = 5000
FINITE_DIFFERENCE_STEP = 1.0e-6
SCAN_PEAK_HEIGHT = 0.9
SCAN_PEAK_PROMINENCE = 0.05

# Integração da equação mestra
MASTER_MAX_SUBSTEP_US = 1.0e-3
MASTER_HALVING_TOLERANCE = 1.0e-6

# Limites de dimensão por modo de simulação
MAX_DIM_PURE = 2 ** 7
MAX_DIM_LINDBLAD = 3 ** 6
MAX_DIM_PROTOCOL = 5 ** 4

# Valores de referência das tabelas (N: (T, população))
TABLE_IDEAL = {
    3: (2.3, 1.0),
    4: (2.808, 0.9931),
    5: (3.386, 0.9710),
    6: (3.952, 0.9346),
}
TABLE_RYDBERG = {
    3: (0.141, 0.9989),
    4: (0.172, 0.9920),
    5: (0.203, 0.9728),
    6: (0.233, 0.9294),
}
TABLE_ERROR_BUDGET = {
    'preparacao_desacoplamento': 0.0074,
    'dissipacao': {3: 0.0006, 4: 0.0009, 5: 0.0010, 6: 0.0017},
    'vibracao': {3: 0.0009, 4: 0.0016, 5: 0.0020, 6: 0.0038},
    'populacao': {3: 0.99, 4: 0.9821, 5: 0.9624, 6: 0.9165},
}

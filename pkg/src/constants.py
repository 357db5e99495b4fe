"""
constants.py - Configuration for the anomalous-reflector link simulator.

Central configuration for:
- Data file locations
- Physical constants
- Pattern grid resolution
- Reflector design and panel sizes
- Horn antennas and materials
- Link budget and EVM limits
- Experiment sweeps and output formatting
- Scene rendering
"""

import os

from scipy.constants import c, epsilon_0

# ============================================================================
# PATHS
# ============================================================================
BASE_DIR = os.path.dirname(os.path.abspath(__file__))
DATA_DIR = os.path.join(BASE_DIR, "data")

# ============================================================================
# PHYSICS
# ============================================================================
SPEED_OF_LIGHT = c              # m/s, exact
VACUUM_PERMITTIVITY = epsilon_0  # F/m
GHZ = 1e9

# ============================================================================
# PATTERN GRID
# ============================================================================
THETA_STEP_DEG = 0.1            # Incidence-plane cut resolution
PHI_STEP_DEG = 1.0              # Azimuth resolution for 3-D integrals
PATTERN_FLOOR_DB = -300.0       # Written in place of exact nulls
HPBW_LEVEL_DB = -3.0

# ============================================================================
# REFLECTOR DESIGN
# ============================================================================
DESIGN_ANGLE_DEG = 65.0         # Maximum deflection direction
DESIGN_FREQUENCY_HZ = 26e9
SUPERCELL_ELEMENTS = 16
QUANTIZATION_BITS = 3
DESIGN_ORDER = 4                # Floquet harmonic carrying the design beam
PANEL_SIZES = {48: (48, 48), 96: (96, 96)}
BASE_PANEL = 48                 # 96x96 is a 2x2 tiling of this
PANEL_EFFICIENCY = 1.0          # e_cd
ELEMENT_MODELS = ("cosine", "isotropic")

# ============================================================================
# HORN ANTENNAS
# ============================================================================
HORN_PEAK_DBI = 18.0
HORN_HPBW_DEG = 22.0
HORN_FLOOR_DB = -30.0           # Relative to peak

# ============================================================================
# MATERIALS (eps_r, conductivity c * f_GHz ** d)
# ============================================================================
MATERIALS = {
    "concrete": {"eps_r": 5.31, "sigma_a": 0.0326, "sigma_b": 0.8095},
}
POLARIZATIONS = ("TE", "TM")

# ============================================================================
# RAY TRACING
# ============================================================================
MAX_REFLECTION_ORDER = 3
ENDPOINT_TOLERANCE_M = 1e-6     # Hits this close to a segment end are ignored
COPLANAR_TOLERANCE_M = 1e-6
TRACE_THREADS_ENV = "ARS_TRACE_THREADS"

# ============================================================================
# LINK BUDGET
# ============================================================================
THERMAL_NOISE_DBM_HZ = -174.0
NOISE_FIGURE_DB = 2.7
EVM_LIMITS_PERCENT = {
    "QPSK": 17.5,
    "16QAM": 12.5,
    "64QAM": 8.0,
    "256QAM": 3.5,
}

# Waveform tag -> (modulation, bandwidth in Hz)
WAVEFORMS = {
    "modulated-16QAM-400MHz": ("16QAM", 400e6),
    "modulated-64QAM-100MHz": ("64QAM", 100e6),
    "continuous-wave": (None, None),
}

# ============================================================================
# EXPERIMENTS
# ============================================================================
SWEEP_ANGLES_DEG = [55.0, 60.0, 65.0, 70.0, 75.0, 80.0, 85.0]
EXTRA_ANGLE_96_DEG = 62.5
CARRIER_FREQUENCIES_GHZ = [25.0, 26.0, 27.0]
SWEEP_FREQUENCIES_GHZ = [24.5 + 0.25 * i for i in range(13)]
FREQUENCY_SWEEP_ANGLES_DEG = [60.0, 65.0, 70.0]
STEERED_BAND_DROP_DB = 3.0

DEFAULT_RUN_CONFIG = {
    "panel": 48,
    "angles_deg": SWEEP_ANGLES_DEG,
    "frequencies_ghz": CARRIER_FREQUENCIES_GHZ,
    "sweep_frequencies_ghz": SWEEP_FREQUENCIES_GHZ,
    "sweep_angles_deg": FREQUENCY_SWEEP_ANGLES_DEG,
    "max_order": MAX_REFLECTION_ORDER,
    "coherent": False,
    "element": "cosine",
    "waveform": "modulated-16QAM-400MHz",
    "noise_figure_db": NOISE_FIGURE_DB,
    "evm": True,
    "scene": "auditorium.scene",
    "link_params": "link_params.csv",
    "corrections": None,
    "rx_pattern": None,
    "tx_pattern": None,
    "element_pattern": None,
}

# ============================================================================
# OUTPUT
# ============================================================================
FLOAT_FORMAT = "%.4f"
RESULT_COLUMNS = ["freq_ghz", "angle_deg", "method", "p_dbm"]
CORRECTION_COLUMNS = ["freq_ghz", "angle_deg", "p_diff_db"]
PATTERN_COLUMNS = ["theta_deg", "phi_deg", "gain_dBi", "phase_deg"]
MEASUREMENT_COLUMNS = ["freq_ghz", "angle_deg", "waveform", "p_m_dbm", "evm_percent"]
LINK_PARAM_COLUMNS = ["symbol", "value", "unit"]
CORRECTED_SUFFIX = "_corrected"

# ============================================================================
# LOGGING
# ============================================================================
LOG_LEVEL_ENV = "ARS_LOG_LEVEL"
LOG_FORMAT = "%(asctime)s %(levelname)-7s %(name)s: %(message)s"
DEFAULT_LOG_LEVEL = "INFO"

# ============================================================================
# EXIT CODES
# ============================================================================
EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DATA = 3
EXIT_NUMERICAL = 4

# ============================================================================
# RENDERING
# ============================================================================
RENDER_SIZE = (900, 1400)       # Pixels (x span, y span)
RENDER_MARGIN = 40
COLORS = {
    "background": (18, 20, 26),
    "floor": (40, 44, 52),
    "wall": (170, 170, 180),
    "absorber": (60, 160, 90),
    "path_los": (255, 200, 60),
    "path_reflected": (90, 140, 230),
    "tx": (230, 80, 80),
    "rx": (80, 200, 230),
    "ar": (250, 250, 250),
    "text": (220, 220, 220),
}

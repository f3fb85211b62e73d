"""
Defaults for levylib runs. A config file or CLI flag overrides them.
"""
import os
from pathlib import Path

BASE_DIR = Path(__file__).resolve().parent.parent.parent

OUTPUT_DIR_ENV = 'LEVY_WN_OUTPUT_DIR'
OUTPUT_DIR = Path(os.environ.get(OUTPUT_DIR_ENV, BASE_DIR / 'output'))

# django runs standalone, for the config forms only
DJANGO = {'USE_I18N': False, 'LOGGING_CONFIG': None}


# Lévy measures

DEFAULT_NODES_PER_SIDE = 64
DEFAULT_MOMENT_ORDER = 12
SAMPLER_GRID_POINTS = 4097


# Deterministic bases

DEFAULT_POLY_DEGREE = 5
DEGENERACY_TOLERANCE = 1e-10
HERMITE_MAX_ORDER = 2048
HERMITE_DIRECT_MAX_ORDER = 150
ANTIDERIVATIVE_NODES_PER_UNIT = 32


# Sheets and chaos

COMPENSATOR_NODES_PER_UNIT = 8
MAX_ITERATED_ORDER = 3
N_STANDARD_ERRORS = 3.0


# White noise truncation

DEFAULT_TRUNCATION = {1: 200, 2: 60}


# Mittag-Leffler evaluation

ML_TOLERANCE = 1e-17
ML_MAX_TERMS = 20000
ML_ASYMPTOTIC_THRESHOLD = 30.0
ML_ASYMPTOTIC_TERMS = 5
ML_SMALL_ARGUMENT = 1.0


# Fractional heat solver

KERNEL_FREQUENCY_CUTOFF = 40.0
KERNEL_PANEL_WIDTH = 0.25
KERNEL_NODES_PER_PANEL = 16
KERNEL_PROFILE_POINTS = 2049
KERNEL_PROFILE_RHO_MAX = 40.0
SPATIAL_WIDTHS = 8.0
COMPENSATOR_TIME_NODES = 64


# Monte-Carlo

DEFAULT_SEED = 20251029
DEFAULT_WORKERS = 1
DEFAULT_SAMPLES = 10_000


# Named presets: partial configs merged under the user's config.

PRESETS = {
    # Subdiffusive invasion front (alpha < 1) with Gaussian nutrient noise and
    # rare two-sided disruptive events. A worked scenario, not a fitted model.
    'tumor': {
        'run': {'command': 'solve-heat', 'n_samples': 10_000},
        'measure': {'atoms': [[-0.5, 2.0], [1.5, 1.0]], 'name': 'tumor-events'},
        'heat': {
            'alpha': 0.7,
            'lambda_diff': 0.5,
            'sigma': 0.3,
            'gamma': 0.5,
            'd': 1,
            't': 1.0,
            'x': [-1.0, -0.5, 0.0, 0.5, 1.0],
            'time_steps': 32,
            'space_step': 0.1,
        },
    },
}

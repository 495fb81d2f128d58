"""
Configuration Settings
Contains all numeric defaults, output schemas and message tables.
"""

# Numeric Controls
DEFAULT_TOL = 1e-8
DEFAULT_TRUNCATION = 32  # Retained residue terms in the strip system
MAX_TRUNCATION = 512
DEFAULT_NODES = 32  # Starting node count for contour quadrature
MIN_NODES = 16
MAX_NODES = 1 << 17
PANEL_ORDER = 16  # Gauss-Legendre nodes per panel
TALBOT_NODES = 24
TRANSFORM_CACHE_SIZE = 1024  # Transformed rod solutions kept per LaplaceRod
SERIES_MAX_TERMS = 100_000

# Contour Quadrature
SINH_SCALE = 1.0  # Core width of the sinh stretch
ALGEBRAIC_HALF_LENGTH = 1e8  # Truncation for algebraically decaying densities
NODE_COLLISION_EPS = 1e-9
TAIL_LIMIT = 1e-6  # Largest admissible truncated-tail estimate
CONDITION_LIMIT = 1e13

# Convolution System
AW_OSCILLATORY_HALF_LENGTH = 2000.0  # Uniform contour for densities carrying exp(-i alpha a)
AW_ASYMPTOTE_HEIGHT = 1e5  # Height on the imaginary axis for the 1/alpha coefficient
AW_TAIL_HEIGHT = 1e7
AW_RESIDUAL_EFOLDS = 18.0  # Reach of the residual quadrature beyond the last point, in decay lengths of u
AW_RESIDUAL_PANEL = 4.0

# Wedge
WEDGE_DECAY_EFOLDS = 40.0  # Truncation of exponentially decaying Mellin integrands
WEDGE_MIN_RATE = 0.05  # Slower decay switches to the oscillatory (QAWF) route
WEDGE_CIRCLE_POINTS = 32
WEDGE_CIRCLE_RADIUS = 0.1  # In units of pi / angle

# Strip
STRIP_LOG_REACH = 25.0  # Cutoff of the log K0 integral in units of 1 / min(b)
STRIP_OSCILLATORY_HALF_LENGTH = 600.0
STRIP_QUAD_TOL_FACTOR = 1e-2  # Cauchy quadrature tolerance relative to the solver tolerance
STRIP_MERGE_EPS = 1e-12  # |sin(pi m b-/b+)| below this merges two lattice zeros
STRIP_DEGENERATE_EPS = 1e-8
STRIP_MOLLIFIER = 0.05  # Gaussian width for inverse transforms on the slit line
STRIP_FIELD_WINDOW = 2048.0
STRIP_EVAL_CHUNK = 32
STRIP_SAMPLE_POINTS = 8
STRIP_CIRCLE_POINTS = 64

# Oracle Grids
HEAT_CN_HALF_WIDTH = 12.0
HEAT_CN_CELLS = 800
HEAT_CN_STEPS = 400
WEDGE_FD_THETA_CELLS = 32
WEDGE_FD_DECADES = 10.0  # Radial span in units of ln r on both sides of the edges
STRIP_FD_CELLS_PER_UNIT = 32
STRIP_FD_HALF_LENGTH = 8.0
NYSTROM_CUTOFF = 25.0
NYSTROM_NODES = 600

# Output
CSV_FLOAT_FORMAT = "{:.17g}"
CSV_SCHEMAS = {
    'heat': ['x', 't', 'u'],
    'wedge': ['r', 'theta', 'u'],
    'strip': ['x', 'y', 're_u', 'im_u'],
    'aw': ['x', 'u1', 'u2'],
}

# Logging Configuration
LOG_LEVEL = "INFO"
LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"
LOG_FILE = "solver.log"

# Error Messages
ERROR_MESSAGES = {
    'domain': "Precondition violated: {detail}",
    'convergence': "Numerical scheme did not converge: {detail}",
    'singular': "Singular linear system: {detail}",
    'tail': "Density does not decay along the contour: {detail}",
    'config': "Invalid configuration: {detail}",
    'internal': "Unexpected solver failure: {detail}",
}

EXIT_CODES = {
    'domain': 2,
    'convergence': 3,
    'singular': 4,
    'tail': 5,
    'config': 6,
    'internal': 1,
}

# Run Configuration
PROBLEMS = ('heat-rod', 'heat-rod-n', 'aw-conv', 'wedge', 'strip', 'oracle', 'selftest')
PROFILE_KINDS = ('zero', 'box', 'gaussian', 'table')
SPLIT_METHODS = ('residue', 'quadrature')
STRIP_NORMALIZATIONS = ('auto', 'normalized', 'bare')
STRIP_LOAD_KINDS = ('constant', 'zero', 'gaussian', 'table')
GRID_KEYS = ('x', 't', 'r', 'theta', 'y')
CONTROL_DEFAULTS = {
    'tol': DEFAULT_TOL,
    'truncation': DEFAULT_TRUNCATION,
    'nodes': DEFAULT_NODES,
    'out': '',
    'report': '',
}
# Heat source modes, each profile(x) * exp(-rate t) under its own key prefix
SOURCE_SLOTS = ('source', 'source2')
SOURCE_DEFAULTS = {
    slot + suffix: value
    for slot in SOURCE_SLOTS
    for suffix, value in (('', 'zero'), ('_lo', -1.0), ('_hi', 1.0), ('_amp', 1.0), ('_center', 0.0),
                          ('_width', 1.0), ('_path', ''), ('_rate', 0.0))
}

# Default Values
DEFAULT_VALUES = {
    'heat-rod': {
        'breakpoint': 0.0,
        'a_minus': 1.0,
        'a_plus': 2.0,
        'k_minus': 1.0,
        'k_plus': 3.0,
        'gamma_minus': 0.0,
        'gamma_plus': 0.0,
        'profile': 'box',
        'profile_lo': -1.0,
        'profile_hi': 1.0,
        'profile_amp': 1.0,
        'profile_center': 0.0,
        'profile_width': 1.0,
        'profile_path': '',
        **SOURCE_DEFAULTS,
        'x': '-1.0:1.0:11',
        't': '0.5',
    },
    'heat-rod-n': {
        'breakpoints': '-0.5,0.5',
        'a': '1.0,2.0,1.0',
        'k': '1.0,3.0,1.0',
        'gamma_minus': 0.0,
        'gamma_plus': 0.0,
        'profile': 'box',
        'profile_lo': -1.0,
        'profile_hi': 1.0,
        'profile_amp': 1.0,
        'profile_center': 0.0,
        'profile_width': 1.0,
        'profile_path': '',
        **SOURCE_DEFAULTS,
        'x': '-1.0:1.0:11',
        't': '0.5',
    },
    'aw-conv': {
        'lambda': 0.1 + 0.0j,
        'a': 1.0,
        'f1_amp': 1.0,
        'f1_rate': 1.0,
        'f2_amp': 0.0,
        'f2_rate': 1.0,
        'method': 'residue',
        'x': '0.1:4.0:20',
    },
    'wedge': {
        'alpha': 1.5707963267948966,
        'a1': 1.0,
        'a2': 2.0,
        't1': 0.0,
        't2': 1.0,
        'c1': 0.0,
        'c2': 0.0,
        'gamma1': 1.0,
        'gamma2': 1.0,
        'd1': 0.0,
        'd2': 0.0,
        'kappa1': 3.0,
        'kappa2': 3.0,
        'mu': '0,1',
        'method': 'residue',
        'r': '0.5:3.0:6',
        'theta': '0.39269908169872414',
    },
    'strip': {
        'b_plus': 1.0,
        'b_minus': 1.0,
        'k': 1.0 + 2.0j,
        'load': 'constant',
        'load_amp': 1.0,
        'load_center': 0.5,
        'load_width': 0.25,
        'load_path': '',
        'normalization': 'auto',
        'x': '-1.0:2.0:7',
        'y': '0.5',
    },
    'oracle': {
        'target': 'wedge',
    },
    'selftest': {
        'slow': False,
    },
}

# Oracle Tolerances
ORACLE_TOLERANCES = {
    'heat': 1e-3,
    'wedge': 1e-2,
    'strip': 1e-2,
    'aw': 1e-4,
}

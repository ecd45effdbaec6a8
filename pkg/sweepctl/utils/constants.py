"""
Numerical constants and documented defaults
"""

# Geometry tolerances
MEMBERSHIP_TOL = 1e-9
CONE_ANGLE_TOL = 1e-6
BOUNDARY_SAMPLES_2D = 720
PROX_SAMPLES = 10_000
LIPSCHITZ_TIME_SAMPLES = 21
# Horizon used to sample static sets that declare an unbounded time domain
STATIC_TIME_WINDOW = 1.0

# Dynamics
TARGET_TOL = 1e-9
DEFAULT_STEP = 1e-3
BISECTION_ITERATIONS = 60

# Solver
BALL_CONTROL_SAMPLES = 16
VALUE_ITERATION_TOL = 1e-9
VALUE_ITERATION_MAX_SWEEPS = 20_000
PETROV_SIGMA_LEVELS = (0.0, 0.5, 1.0)  # sigma / L for Petrov normals
PETROV_DELTA = 0.1
PETROV_NEIGHBORS = 24
ORACLE_MAX_SEGMENTS = 6
ORACLE_BUDGET = 20_000
ORACLE_STEP = 1e-3
ORACLE_HORIZON = 5.0
HIT_BISECTION_ITERATIONS = 40
DESCENT_MAX_STEPS = 10_000
MODULUS_K_PRIME = 1.0
QUAD_LIMIT = 200

# Hamilton-Jacobi checks
ANALYTIC_HJ_TOL = 1e-9
GRID_HJ_FACTOR = 5.0
FD_STEP = 1e-6
KINK_TOL = 1e-4
GRID_KINK_TOL = 5e-2
GRID_CANDIDATE_DX = 0.02
PLAN_STEP = 0.05
FEATURE_SAMPLES = 25

# CLI exit codes
EXIT_OK = 0
EXIT_VERIFICATION_FAILED = 1
EXIT_CONFIG_ERROR = 2


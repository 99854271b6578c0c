import os
from pathlib import Path

from dotenv import load_dotenv

load_dotenv()

# Application settings
APP_NAME = "Toric Instanton Mass"
APP_VERSION = "1.0.0"

# Runtime settings (environment overrides)
THREADS = max(1, int(os.getenv("IML_THREADS", str(os.cpu_count() or 1))))
LOG_LEVEL = os.getenv("IML_LOG_LEVEL", "WARNING")
OUTPUT_DIR = Path(os.getenv("IML_OUTPUT_DIR", str(Path.home() / '.instanton_mass')))
SLOW_TESTS = os.getenv("IML_SLOW_TESTS", "0") == "1"

# Output settings
OUTPUT_DIGITS = 17  # significant digits for JSON/CSV numbers

# Finite difference settings
FD_MIN_STEP = 1e-4
FD_REL_STEP = 1e-3  # h = max(FD_MIN_STEP, FD_REL_STEP * rho)
FD_ORDER = 2

# Chart inversion settings
NEWTON_TOL = 1e-12
NEWTON_MAX_ITER = 50

# Reduction settings
DET_PHI_TOL = 1e-12
BETA_ZERO = 0.0  # case II splits into II_0 / II_beta exactly at this value

# Scalar curvature checks
SCALAR_CHECK_ORDER = 4
SCALAR_CHECK_STEP = 1e-3

# alpha quadrature settings
ALPHA_REFERENCE_RHO = 10.0
ALPHA_PATH_NODES = 1001  # coarse trapezoid nodes per leg; the fine level doubles them
ALPHA_LOOP_TOL = 1e-8
ALPHA_TAIL_EDGES = (0.01, 0.05, 0.25, 1.0)  # in u = rho_ref / rho; [0, 0.01] is extrapolated
ALPHA_TAIL_POINTS = 48

# Mass engine settings
MASS_RADII = (1e2, 10 ** 2.5, 1e3, 10 ** 3.5, 1e4)
MASS_QUAD_POINTS = 128
MASS_MIN_QUAD_POINTS = 64
MASS_FIT_EXPONENT_RANGE = (0.25, 6.0)
MASS_RADIAL_STEP = 1e-2  # relative step for radial derivatives
MASS_MONOTONE_TOL = 1e-6
TORUS_NORMALIZATION = 1.0  # multiplies the analytic 4*pi^2 torus factor

# Defect engine settings
DEFECT_RHO_SAMPLES = (1e-2, 1e-3, 1e-4)
DEFECT_ZETA = 1.0
DEFECT_EVEN_RHO_SAMPLES = (8e-2, 4e-2, 2e-2, 1e-2)  # smooth axes: corrections in powers of rho^2
DEFECT_AGREEMENT_TOL = 1e-6
DEFECT_LIMIT_TOL = 1e-3  # spread of two-sample extrapolations before the limit is accepted
DEFECT_QUAD_POINTS = 32
DEFECT_TAIL_CUTOFF = 1e3

# Harmonic solver settings
SOLVER_TOLERANCE = 1e-8
SOLVER_MAX_SWEEPS = 10000
SOLVER_OMEGA = 1.0
SOLVER_NEWTON_ITER = 5
SOLVER_GRADING = 2.0  # rho_i = rho_max (i / (n - 1))^grading
SOLVER_GRID = (65, 129)  # (n_rho, n_z)
SOLVER_RHO_MAX = 20.0
SOLVER_Z_MAX = 20.0
SOLVER_HARMONIC_TOL = 1e-10  # residual a reference map must reach
SOLVER_ENERGY_SLACK = 1e-12
SIGMA1_SCHEDULE = (1e-1, 1e-2, 1e-3)
SIGMA2_SCHEDULE = (1e-1, 3e-2, 1e-2)
OUTER_RADIUS_SCHEDULE = (50.0, 100.0, 200.0)

# Comparison settings
COMPARISON_TOL = 2e-3

# Create output directory if it doesn't exist
OUTPUT_DIR.mkdir(parents=True, exist_ok=True)

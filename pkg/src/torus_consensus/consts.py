"""Constants for Torus Consensus"""

# ==================== Numeric Tolerances ====================
# A nonzero index whose Laplacian eigenvalue falls below this is a second
# zero mode, i.e. the graph is disconnected.
DISCONNECTED_TOL = 1e-12
# gamma values at or below this are the complete-graph case and clamp to 0.
GAMMA_ZERO_TOL = 1e-12
# Eigenvalues closer than this count as ties when picking extremal indices.
TIE_TOL = 1e-12
# Claimed extremal eigenvalues within this of the enumerated ones confirm
# the closed-form index hypothesis.
HYPOTHESIS_TOL = 1e-9
# Dirichlet kernel arguments within this of a multiple of 2*pi use the limit.
DIRICHLET_SINGULAR_TOL = 1e-12
# Relative slack when comparing power against P_max.
POWER_REL_TOL = 1e-12

# ==================== Simulation Defaults ====================
SIM_EPS = 1e-6
SIM_T_MAX = 10**6
SIM_SEED = 0
SIM_FIT_FRACTION = 1 / 3
SIM_FIT_MIN_POINTS = 30
SIM_DIVERGENCE_FACTOR = 1e12

# ==================== Size Limits ====================
# Dense W/L matrices are only materialized for cross-checks on small graphs.
DENSE_MAX_NODES = 4096

# ==================== Output ====================
FLOAT_SIGNIFICANT_DIGITS = 17

# ==================== CLI Exit Codes ====================
EXIT_INVALID_INPUT = 2
EXIT_NO_SOLUTION = 3

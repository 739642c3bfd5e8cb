"""Pass/fail thresholds used by the CLI checks, the tests and the README.

Bump ``THRESHOLDS_VERSION`` whenever a value changes.
"""

THRESHOLDS_VERSION = "1"

# residual L2 norm below which an exact law counts as satisfied
EXACTNESS = 1e-9
# lower bound for approximate-law residuals in the discriminator check
APPROXIMATE_FLOOR = 1e-5
# numerical residual vs closed form, relative L2
ORACLE_AGREEMENT = 1e-8
# admissible window for fitted log-log slopes of residual norm vs eps
SLOPE_WINDOW = (1.8, 2.2)
SLOPE_WINDOW_TIGHT = (1.95, 2.05)
# relative drift of the conserved integrals
DRIFT_TOLERANCE = 1e-8
DRIFT_ZERO_GUARD = 1e-14
# residual norm growth along a trajectory
UNIFORMITY_RATIO = 1.2
GROWTH_RATE = 1e-3
# column integrals vs printed densities/fluxes: minimum eps slope
COLUMN_SLOPE = 2.8

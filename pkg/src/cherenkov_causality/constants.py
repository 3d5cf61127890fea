"""Numerical tolerances and physical defaults shared by every module."""

import math

# linear algebra
HERMITIAN_REJECT_TOL = 1e-10  # asymmetry above this is an error, below it is symmetrized
HERMITIAN_FLAG_TOL = 1e-12
STATE_HERMITIAN_TOL = 1e-10
STATE_TRACE_TOL = 1e-8
STATE_POSITIVITY_TOL = 1e-8

# dynamics
TRACE_DRIFT_TOL = 1e-6
CHANNEL_CP_TOL = 1e-6
CHANNEL_TP_TOL = 1e-6
CONVERGENCE_TOL = 1e-3
STEPS_PER_PERIOD = 40

# causality
NEGATIVITY_TOL = 1e-10
ASSEMBLAGE_TOL = 1e-8

# conic solver
SDP_GAP_STOP = 1e-9
SDP_GAP_OPTIMAL = 1e-7
SDP_RESIDUAL_OPTIMAL = 1e-8
SDP_MAX_ITER = 200
SDP_STEP_FRACTION = 0.98

# physical defaults (SI, angular frequencies in rad/s)
SPEED_OF_LIGHT = 2.998e8
OMEGA_BASE = 2 * math.pi * 4e9
K_BASE = math.pi / 0.01
ACCELERATION_BASE = 1e15
T1_BASE = 10e-6
T2_BASE = 20e-6
KAPPA_BASE = 1e5

"""Shared numerical tolerances. All values are in bits or relative units."""

from __future__ import annotations

# Largest operator dimension handled anywhere (states, tensor powers, A⊗R).
MAX_DIM = 64

HERMITIAN_TOL = 1e-10
EIG_RESIDUAL_TOL = 1e-11

# Eigenvalues at or below SUPPORT_CUTOFF * lambda_max count as exactly zero.
SUPPORT_CUTOFF = 1e-10

STATE_TOL = 1e-10
MAP_TOL = 1e-9
PROJECTOR_TOL = 1e-9
COMMUTATOR_TOL = 1e-8

# Relative gap below which eigenvalues merge into one cluster.
CLUSTER_TOL = 1e-8

PROB_NEGATIVE_CLIP = 1e-12
PROB_SUM_TOL = 1e-9

# Finite orders closer than this to 1 must use the One tag.
NEAR_ONE_TOL = 1e-4

CHECK_TOL = 1e-7
REVERSE_TEST_GAP_TOL = 1e-7
REVERSE_TEST_GAMMA_TOL = 1e-8

# Floor applied to the second argument during amortized searches.
AMORTIZED_EIG_FLOOR = 1e-6

DEFAULT_RESTARTS = 32
DEFAULT_REFINE_ITERS = 200

SIGNIFICANT_DIGITS = 12

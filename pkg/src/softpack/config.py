"""Global numerical defaults."""

# Absolute tolerance at unit scale; geometric routines multiply it by the
# diameter of the configuration they work on.
TOL = 1e-9

# Regular polygon used as a stand-in for the Euclidean disk.
EUCLID_SURROGATE_SIDES = 96


def scaled_tol(scale, tol=None):
    t = TOL if tol is None else tol
    return t * max(1.0, float(scale))

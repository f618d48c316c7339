"""Input validation helpers shared across the package.

These follow the scikit-learn convention of small `check_*` functions that
either return a normalized value or raise `ValueError` with a message naming
the violated condition.
"""

import numbers

import numpy as np

__all__ = [
    "as_rng",
    "check_hermitian",
    "check_unit_vector",
    "check_in_interval",
    "check_positive",
]


def as_rng(random_state):
    """Coerce `random_state` (None, int, SeedSequence or Generator) to a Generator."""
    if isinstance(random_state, np.random.Generator):
        return random_state
    return np.random.default_rng(random_state)


def check_hermitian(A, name="A", require_contraction=False):
    """Validate that `A` is a square Hermitian array and return it as ndarray.

    Entries must satisfy A[i, j] == conj(A[j, i]) exactly; callers holding a
    nearly-Hermitian matrix should symmetrize it themselves so the convention
    is explicit.  With `require_contraction` the spectral norm is checked to be
    at most 1 (up to roundoff).
    """
    from .spectral import HermitianMatrix

    if isinstance(A, HermitianMatrix):
        if require_contraction and not A.norm_bounded:
            A.assert_contraction()
        return A.values
    M = np.asarray(A)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError(f"{name} must be a square matrix, got shape {M.shape}")
    if M.shape[0] < 1:
        raise ValueError(f"{name} must have dimension >= 1")
    if not np.all(np.isfinite(M)):
        raise ValueError(f"{name} contains non-finite entries")
    if not np.array_equal(M, M.conj().T):
        raise ValueError(f"{name} is not exactly Hermitian; symmetrize before calling")
    if require_contraction:
        norm = np.linalg.norm(M, 2)
        if norm > 1.0 + 1e-10:
            raise ValueError(f"{name} must have spectral norm <= 1, got {norm:.6g}")
    return M


def check_unit_vector(v, name="v", tol=1e-10):
    v = np.asarray(v)
    if v.ndim != 1:
        raise ValueError(f"{name} must be a vector")
    nrm = np.linalg.norm(v)
    if abs(nrm - 1.0) > tol:
        raise ValueError(f"{name} must be a unit vector, got norm {nrm:.6g}")
    return v


def check_in_interval(x, lo, hi, name, lo_open=False, hi_open=False):
    if not isinstance(x, numbers.Real) or not np.isfinite(x):
        raise ValueError(f"{name} must be a finite real number")
    if x < lo or x > hi or (lo_open and x == lo) or (hi_open and x == hi):
        lb, rb = ("(" if lo_open else "["), (")" if hi_open else "]")
        raise ValueError(f"{name}={x} violates {name} in {lb}{lo}, {hi}{rb}")
    return float(x)


def check_positive(x, name):
    if not isinstance(x, numbers.Real) or not x > 0:
        raise ValueError(f"{name} must be positive, got {x}")
    return float(x)

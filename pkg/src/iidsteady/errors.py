"""Exception types and numerical defaults shared across the package."""

import os

# Tolerance ladder. Structural residuals are relative to the operator scale,
# the oracle tolerance is the absolute Frobenius norm accepted for a
# full-space fixed-point residual. Both are overridable per call.
STRUCTURAL_TOL = 1e-10
ORACLE_TOL = 1e-8
RANK_TOL = 1e-10

# Largest dense global Hilbert-space dimension d**n we will materialize.
DEFAULT_MAX_DIM = 4096

# Largest n for which the full symmetric group is enumerated.
DEFAULT_GROUP_CAP = 6


class IIDSteadyError(Exception):
    """Base class for all package errors."""


class InvalidDimension(IIDSteadyError):
    """Operator shapes or site indices are inconsistent."""


class InvalidPermutation(IIDSteadyError):
    """Not a permutation of 0..n-1."""


class InvalidParams(IIDSteadyError):
    """Bad parameters for a built-in model."""


class CapExceeded(IIDSteadyError):
    """A requested dense computation exceeds the configured size cap."""

    def __init__(self, message, dim=None):
        super().__init__(message)
        self.dim = dim


class NonFinite(IIDSteadyError):
    """Overflow or NaN encountered in a dense computation."""


class ConvergenceFailure(IIDSteadyError):
    """An iterative LAPACK routine failed to converge."""


class ConditionViolation(IIDSteadyError):
    """A structural precondition (product-form stability) does not hold."""


class InsufficientDecay(IIDSteadyError):
    """A time series does not decay enough for a rate fit."""


class NoPSDRepresentative(IIDSteadyError):
    """A fixed-point space contains no density matrix (internal error for a
    valid generator)."""


class ModelFormatError(IIDSteadyError):
    """A model file violates the schema; carries a field path."""

    def __init__(self, field, message):
        super().__init__(f"{field}: {message}")
        self.field = field


def max_dim():
    """Dense-dimension cap, overridable through the IID_MAX_DIM env var."""
    value = os.environ.get("IID_MAX_DIM")
    if value:
        try:
            return int(value)
        except ValueError as exc:
            raise InvalidParams(f"IID_MAX_DIM must be an integer, got {value!r}") from exc
    return DEFAULT_MAX_DIM


def ensure_dim(dim, what="dense operator"):
    """Raise CapExceeded when ``dim`` is beyond the configured cap."""
    cap = max_dim()
    if dim > cap:
        raise CapExceeded(f"{what} of dimension {dim} exceeds cap {cap}", dim=dim)
    return dim

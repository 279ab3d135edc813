"""Exception types and small argument checks shared across modules."""

import numpy as np


class DomainError(ValueError):
    """An argument lies outside the domain where the quantity is defined."""


class NumericError(RuntimeError):
    """A numerical procedure failed to reach its tolerance."""

    def __init__(self, message, **diagnostics):
        super().__init__(message)
        self.diagnostics = diagnostics


class UnboundedSupportError(NumericError):
    """No zero of the potential profile was found before the search limit."""


class NonConvergenceError(NumericError):
    """An iteration ran out of budget before converging."""


class ConsistencyError(NumericError):
    """Two independent determinations of the same quantity disagree."""


class BracketError(ValueError):
    """A root-finding bracket does not contain a sign change."""


def check_nonnegative(x, name="s"):
    arr = np.asarray(x, dtype=float)
    if np.any(~np.isfinite(arr)):
        raise DomainError(f"{name} must be finite")
    if np.any(arr < 0):
        raise DomainError(f"{name} must be nonnegative, got min {arr.min()!r}")
    return arr


def check_positive(x, name):
    x = float(x)
    if not np.isfinite(x) or x <= 0:
        raise DomainError(f"{name} must be positive, got {x!r}")
    return x


def check_gamma(gamma, lower=4.0 / 3.0, what="equilibrium"):
    gamma = float(gamma)
    if np.isclose(gamma, 4.0 / 3.0, rtol=0, atol=1e-14):
        raise DomainError("gamma = 4/3 makes the mass scaling exponents singular")
    if gamma <= lower:
        raise DomainError(f"gamma = {gamma} is not admissible for {what} (need gamma > {lower:.6g})")
    return gamma

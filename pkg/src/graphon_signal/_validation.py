"""Input validation helpers shared by the estimators and the functional API."""

import numpy as np

__all__ = [
    "as_float_matrix",
    "check_square_symmetric",
    "check_range",
    "check_graphon_signal",
    "check_same_resolution",
    "check_positive_int",
]

_RANGE_TOL = 1e-12


def as_float_matrix(a, name, square=True):
    a = np.asarray(a, dtype=float)
    if a.ndim != 2:
        raise ValueError(f"{name} must be 2-dimensional, got shape {a.shape}")
    if a.shape[0] == 0 or a.shape[1] == 0:
        raise ValueError(f"{name} must be nonempty")
    if square and a.shape[0] != a.shape[1]:
        raise ValueError(f"{name} must be square, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError(f"{name} contains non-finite values")
    return a


def check_square_symmetric(a, name, tol=1e-12):
    if np.max(np.abs(a - a.T), initial=0.0) > tol:
        raise ValueError(f"{name} must be symmetric")


def check_range(a, lo, hi, name):
    if a.size and (a.min() < lo - _RANGE_TOL or a.max() > hi + _RANGE_TOL):
        raise ValueError(f"{name} entries must lie in [{lo}, {hi}]")


def check_graphon_signal(x):
    """Accept a GraphonSignal or a GraphSignal (converted by inducing)."""
    from .core import GraphonSignal, GraphSignal, induce

    if isinstance(x, GraphonSignal):
        return x
    if isinstance(x, GraphSignal):
        return induce(x)
    raise TypeError(f"expected GraphonSignal or GraphSignal, got {type(x).__name__}")


def check_same_resolution(x, y):
    if x.resolution != y.resolution:
        raise ValueError(
            f"resolution mismatch: {x.resolution} vs {y.resolution}; resample first"
        )


def check_positive_int(v, name):
    if int(v) != v or v < 1:
        raise ValueError(f"{name} must be a positive integer, got {v}")
    return int(v)

"""Input validation helpers shared by all estimators and functions.

Conventions: points are row-stacked in float64 arrays of shape (n, d),
scalar responses/values in arrays of shape (n,). Every public entry point
rejects non-finite values up front so the numerical code never has to.
"""

import numpy as np

__all__ = [
    "as_point_matrix",
    "as_value_vector",
    "check_same_dimension",
    "check_spd",
    "check_probability_vector",
]


def as_point_matrix(X, name="X", min_samples=1):
    """Coerce to a finite float64 matrix of shape (n, d).

    A 1-D input of length n is interpreted as n one-dimensional points.
    """
    X = np.asarray(X, dtype=np.float64)
    if X.ndim == 1:
        X = X.reshape(-1, 1)
    if X.ndim != 2:
        raise ValueError(f"{name} must be a 2-D array of points, got ndim={X.ndim}")
    if X.shape[0] < min_samples:
        raise ValueError(f"{name} needs at least {min_samples} rows, got {X.shape[0]}")
    if X.shape[1] < 1:
        raise ValueError(f"{name} must have dimension >= 1")
    if not np.all(np.isfinite(X)):
        raise ValueError(f"{name} contains non-finite values")
    return X


def as_value_vector(y, name="y", min_samples=1):
    """Coerce to a finite float64 vector of shape (n,)."""
    y = np.asarray(y, dtype=np.float64)
    if y.ndim == 2 and y.shape[1] == 1:
        y = y.ravel()
    if y.ndim != 1:
        raise ValueError(f"{name} must be a 1-D array, got ndim={y.ndim}")
    if y.shape[0] < min_samples:
        raise ValueError(f"{name} needs at least {min_samples} entries, got {y.shape[0]}")
    if not np.all(np.isfinite(y)):
        raise ValueError(f"{name} contains non-finite values")
    return y


def check_same_dimension(A, B, name_a="first", name_b="second"):
    if A.shape[1] != B.shape[1]:
        raise ValueError(
            f"dimension mismatch: {name_a} has d={A.shape[1]}, {name_b} has d={B.shape[1]}"
        )


def check_spd(S, name="covariance"):
    """Validate a symmetric positive-definite matrix via Cholesky."""
    S = np.asarray(S, dtype=np.float64)
    if S.ndim != 2 or S.shape[0] != S.shape[1]:
        raise ValueError(f"{name} must be square, got shape {S.shape}")
    if not np.all(np.isfinite(S)):
        raise ValueError(f"{name} contains non-finite values")
    if not np.allclose(S, S.T, atol=1e-10, rtol=0.0):
        raise ValueError(f"{name} must be symmetric")
    try:
        np.linalg.cholesky(S)
    except np.linalg.LinAlgError as exc:
        raise ValueError(f"{name} is not positive definite") from exc
    return S


def check_probability_vector(w, size=None, name="weights"):
    w = as_value_vector(w, name=name)
    if size is not None and w.shape[0] != size:
        raise ValueError(f"{name} has length {w.shape[0]}, expected {size}")
    if np.any(w < 0):
        raise ValueError(f"{name} must be nonnegative")
    if abs(w.sum() - 1.0) > 1e-10:
        raise ValueError(f"{name} must sum to 1, got {w.sum()!r}")
    return w

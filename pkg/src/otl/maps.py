"""Closed-form evaluable maps and the transfer composition.

All maps follow the row-stacked callable convention of :mod:`otl.samples`:
an (n, d_in) array in, an (n, d_out) or (n,) array out, deterministically.
"""

from dataclasses import dataclass

import numpy as np

from .validation import as_point_matrix

__all__ = ["AffineMap", "ScalarAffineModel", "ComposedPredictor", "identity_map"]


@dataclass(frozen=True)
class AffineMap:
    """x -> A x + b from R^d_in to R^d_out."""

    A: np.ndarray
    b: np.ndarray

    def __call__(self, X):
        X = as_point_matrix(X, name="X")
        return X @ self.A.T + self.b


@dataclass(frozen=True)
class ScalarAffineModel:
    """x -> w . x + c, a scalar-valued affine model."""

    weights: np.ndarray
    intercept: float

    def __call__(self, X):
        X = as_point_matrix(X, name="X")
        return X @ self.weights + self.intercept

    @property
    def gradient_norm(self):
        return float(np.linalg.norm(self.weights))


@dataclass(frozen=True)
class ComposedPredictor:
    """output_map(source_model(input_map(x))): the transfer prediction chain."""

    input_map: object
    source_model: object
    output_map: object

    def __call__(self, X):
        return self.output_map(self.source_model(self.input_map(X)))


def identity_map(d):
    """The identity AffineMap on R^d."""
    return AffineMap(np.eye(d), np.zeros(d))

"""Exact empirical optimal transport on the real line.

For the quadratic cost in one dimension the optimal map between two
samples is the monotone quantile coupling: the i-th smallest source value
goes to the matching empirical quantile of the target. The fitted map is
piecewise linear and globally nondecreasing, with clamped-slope linear
continuation outside the knot range.
"""

import csv

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .validation import as_value_vector

__all__ = ["QuantileTransportMap1D"]


class QuantileTransportMap1D(BaseEstimator, TransformerMixin):
    """Monotone piecewise-linear map fitted by empirical quantile matching.

    ``fit(y_src, y_tgt)`` places one knot at each distinct source value
    and pairs it with the target quantile function (linearly interpolated
    at ranks ``(i - 0.5) / n``) evaluated at the source value's rank.
    Duplicate source values collapse to a single knot mapped to the mean
    of their matched quantiles, which keeps knot abscissas strictly
    increasing while preserving mass balance. Unequal sample sizes are
    handled by the rank interpolation.

    Attributes
    ----------
    knots_x_ : ndarray of shape (k,)
        Strictly increasing knot abscissas (the distinct source values).
    knots_y_ : ndarray of shape (k,)
        Nondecreasing knot images.
    """

    def fit(self, y_src, y_tgt):
        y_src = as_value_vector(y_src, name="y_src")
        y_tgt = as_value_vector(y_tgt, name="y_tgt")
        m = y_src.shape[0]
        order = np.argsort(y_src, kind="stable")
        src_sorted = y_src[order]
        ranks = (np.arange(1, m + 1) - 0.5) / m
        images = np.quantile(y_tgt, ranks, method="hazen")
        knots_x, inverse = np.unique(src_sorted, return_inverse=True)
        knots_y = np.bincount(inverse, weights=images) / np.bincount(inverse)
        self.knots_x_ = knots_x
        self.knots_y_ = knots_y
        return self

    @classmethod
    def from_knots(cls, knots_x, knots_y):
        """Build a fitted map directly from knot lists (e.g. a ground-truth map)."""
        knots_x = as_value_vector(knots_x, name="knots_x")
        knots_y = as_value_vector(knots_y, name="knots_y")
        if knots_x.shape != knots_y.shape:
            raise ValueError("knots_x and knots_y must have equal length")
        if knots_x.shape[0] > 1 and np.any(np.diff(knots_x) <= 0):
            raise ValueError("knots_x must be strictly increasing")
        if np.any(np.diff(knots_y) < 0):
            raise ValueError("knots_y must be nondecreasing")
        est = cls()
        est.knots_x_ = knots_x
        est.knots_y_ = knots_y
        return est

    def _boundary_slopes(self):
        kx, ky = self.knots_x_, self.knots_y_
        if kx.shape[0] < 2:
            return 0.0, 0.0
        left = max(0.0, (ky[1] - ky[0]) / (kx[1] - kx[0]))
        right = max(0.0, (ky[-1] - ky[-2]) / (kx[-1] - kx[-2]))
        return left, right

    def transform(self, y):
        """Evaluate the map; accepts a scalar or a 1-D array."""
        check_is_fitted(self, "knots_x_")
        scalar = np.isscalar(y) or (isinstance(y, np.ndarray) and y.ndim == 0)
        x = np.atleast_1d(np.asarray(y, dtype=np.float64))
        kx, ky = self.knots_x_, self.knots_y_
        out = np.interp(x, kx, ky)
        left_slope, right_slope = self._boundary_slopes()
        below = x < kx[0]
        above = x > kx[-1]
        if np.any(below):
            out[below] = ky[0] + left_slope * (x[below] - kx[0])
        if np.any(above):
            out[above] = ky[-1] + right_slope * (x[above] - kx[-1])
        return float(out[0]) if scalar else out

    __call__ = transform

    @property
    def lipschitz_(self):
        """Maximum slope over all segments (extrapolation included)."""
        check_is_fitted(self, "knots_x_")
        if self.knots_x_.shape[0] < 2:
            return 0.0
        slopes = np.diff(self.knots_y_) / np.diff(self.knots_x_)
        return float(np.max(np.maximum(slopes, 0.0)))

    def to_csv(self, path):
        check_is_fitted(self, "knots_x_")
        with open(path, "w", newline="") as buf:
            writer = csv.writer(buf)
            writer.writerow(["knot_x", "knot_y"])
            for kx, ky in zip(self.knots_x_, self.knots_y_):
                writer.writerow([f"{kx:.17g}", f"{ky:.17g}"])

    @classmethod
    def from_csv(cls, path):
        with open(path, "r", newline="") as buf:
            reader = csv.reader(buf)
            header = next(reader)
            if header != ["knot_x", "knot_y"]:
                raise ValueError(f"unrecognized CSV header {header!r}")
            rows = [(float(a), float(b)) for a, b in reader]
        xs, ys = zip(*rows)
        return cls.from_knots(np.array(xs), np.array(ys))

"""Synthetic Gaussian tasks with closed-form ground truth.

Gaussian input distributions are the canonical testbed because their
quadratic-cost Monge map is affine and available in closed form, so the
estimation error of every fitted map and regressor is measurable against
known truth. Target-side roughness is controlled solely through kinks in
the monotone output map: the composed regressor is then piecewise affine
(smoothness 1) while both input densities stay infinitely smooth.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .maps import AffineMap, ComposedPredictor, ScalarAffineModel
from .quantile_map import QuantileTransportMap1D
from .samples import SampleSet, rng_from
from .validation import as_value_vector, check_spd

__all__ = [
    "GaussianTaskSpec",
    "GroundTruth",
    "gaussian_monge_map",
    "build_ground_truth",
    "sample_task",
    "sample_target",
    "mixture_sampler",
]

EIGENVALUE_FLOOR = 1e-12


def _spd_power(S, power):
    """S**power for SPD S via eigendecomposition, eigenvalues floored."""
    w, V = np.linalg.eigh(S)
    w = np.maximum(w, EIGENVALUE_FLOOR)
    return (V * w**power) @ V.T


def gaussian_monge_map(m1, S1, m2, S2):
    """Closed-form quadratic-cost Monge map N(m1, S1) -> N(m2, S2).

    Returns the affine map x -> m2 + A (x - m1) with
    ``A = S1^{-1/2} (S1^{1/2} S2 S1^{1/2})^{1/2} S1^{-1/2}``,
    symmetric positive definite (the gradient of a convex quadratic).
    """
    m1 = as_value_vector(m1, name="m1")
    m2 = as_value_vector(m2, name="m2")
    S1 = check_spd(S1, name="S1")
    S2 = check_spd(S2, name="S2")
    if not (S1.shape[0] == S2.shape[0] == m1.shape[0] == m2.shape[0]):
        raise ValueError("mean/covariance dimensions disagree")
    root = _spd_power(S1, 0.5)
    inv_root = _spd_power(S1, -0.5)
    middle = _spd_power(root @ S2 @ root, 0.5)
    A = inv_root @ middle @ inv_root
    A = (A + A.T) / 2.0
    return AffineMap(A, m2 - A @ m1)


@dataclass(frozen=True)
class GaussianTaskSpec:
    """Gaussian source/target task with an affine source model and a
    piecewise-linear monotone output map.

    The target regressor implied by the spec is
    ``output_map(source_model(monge_map(x)))`` where ``monge_map`` is the
    closed-form transport from the target to the source input law.

    Parameters
    ----------
    target_mean, target_cov : arrays
        Mean and SPD covariance of the target input distribution.
    source_mean, source_cov : arrays
        Same for the source input distribution.
    source_weights : array of shape (d,)
        Gradient of the affine source model.
    source_intercept : float
        Intercept of the source model.
    output_knots_x, output_knots_y : arrays
        Knots of the monotone output map (strictly increasing abscissas,
        nondecreasing images).
    noise_sd : float
        Standard deviation of the additive target response noise.
    grad_band : (float, float), optional
        Recorded bounds (c, C) with ``0 < c <= |grad| <= C`` for the source
        model; defaults to the exact gradient norm on both sides.
    """

    target_mean: np.ndarray
    target_cov: np.ndarray
    source_mean: np.ndarray
    source_cov: np.ndarray
    source_weights: np.ndarray
    source_intercept: float
    output_knots_x: np.ndarray
    output_knots_y: np.ndarray
    noise_sd: float = 0.0
    grad_band: tuple = field(default=None)

    def __post_init__(self):
        tm = as_value_vector(self.target_mean, name="target_mean")
        sm = as_value_vector(self.source_mean, name="source_mean")
        tc = check_spd(self.target_cov, name="target_cov")
        sc = check_spd(self.source_cov, name="source_cov")
        w = as_value_vector(self.source_weights, name="source_weights")
        d = tm.shape[0]
        if not (sm.shape[0] == d and tc.shape[0] == d and sc.shape[0] == d and w.shape[0] == d):
            raise ValueError("task components have inconsistent dimensions")
        # validates monotone knot structure
        omap = QuantileTransportMap1D.from_knots(self.output_knots_x, self.output_knots_y)
        if not math.isfinite(self.source_intercept):
            raise ValueError("source_intercept must be finite")
        if not (math.isfinite(self.noise_sd) and self.noise_sd >= 0):
            raise ValueError("noise_sd must be finite and >= 0")
        grad = float(np.linalg.norm(w))
        band = self.grad_band if self.grad_band is not None else (grad, grad)
        lo, hi = float(band[0]), float(band[1])
        if not 0 < lo <= hi:
            raise ValueError(f"grad_band must satisfy 0 < c <= C, got {band}")
        if not lo <= grad <= hi:
            raise ValueError(
                f"source model gradient norm {grad} outside recorded band [{lo}, {hi}]"
            )
        for name, value in [
            ("target_mean", tm), ("target_cov", tc), ("source_mean", sm),
            ("source_cov", sc), ("source_weights", w),
            ("output_knots_x", omap.knots_x_), ("output_knots_y", omap.knots_y_),
        ]:
            value.setflags(write=False)
            object.__setattr__(self, name, value)
        object.__setattr__(self, "grad_band", (lo, hi))

    @property
    def d(self):
        return self.target_mean.shape[0]

    @property
    def source_model(self):
        return ScalarAffineModel(self.source_weights, float(self.source_intercept))

    @property
    def output_map(self):
        return QuantileTransportMap1D.from_knots(self.output_knots_x, self.output_knots_y)

    @property
    def output_lipschitz(self):
        return self.output_map.lipschitz_

    def to_dict(self):
        out = {
            "target_mean": self.target_mean.tolist(),
            "target_cov": self.target_cov.tolist(),
            "source_mean": self.source_mean.tolist(),
            "source_cov": self.source_cov.tolist(),
            "source_weights": self.source_weights.tolist(),
            "source_intercept": float(self.source_intercept),
            "output_knots_x": self.output_knots_x.tolist(),
            "output_knots_y": self.output_knots_y.tolist(),
            "noise_sd": float(self.noise_sd),
            "grad_band": [self.grad_band[0], self.grad_band[1]],
        }
        return out

    @classmethod
    def from_dict(cls, doc):
        known = {
            "target_mean", "target_cov", "source_mean", "source_cov",
            "source_weights", "source_intercept", "output_knots_x",
            "output_knots_y", "noise_sd", "grad_band",
        }
        unknown = set(doc) - known
        if unknown:
            raise ValueError(f"unknown task keys: {sorted(unknown)}")
        missing = known - set(doc) - {"noise_sd", "grad_band"}
        if missing:
            raise ValueError(f"missing task keys: {sorted(missing)}")
        kwargs = dict(doc)
        if "grad_band" in kwargs and kwargs["grad_band"] is not None:
            kwargs["grad_band"] = tuple(kwargs["grad_band"])
        return cls(**kwargs)


@dataclass(frozen=True)
class GroundTruth:
    """Exact maps of a Gaussian task: the affine input transport, the fixed
    source model, the monotone output map, and their composition (the
    optimal target regressor)."""

    input_map: AffineMap
    source_model: ScalarAffineModel
    output_map: QuantileTransportMap1D
    target_regressor: ComposedPredictor


def build_ground_truth(spec):
    """Assemble the closed-form ground truth of a :class:`GaussianTaskSpec`.

    The input map transports the target input law onto the source input
    law, so the output-marginal constraint holds by construction and the
    composed regressor is exact.
    """
    input_map = gaussian_monge_map(
        spec.target_mean, spec.target_cov, spec.source_mean, spec.source_cov
    )
    source_model = spec.source_model
    output_map = spec.output_map
    return GroundTruth(
        input_map=input_map,
        source_model=source_model,
        output_map=output_map,
        target_regressor=ComposedPredictor(input_map, source_model, output_map),
    )


def _gaussian_draw(rng, mean, cov, m):
    L = np.linalg.cholesky(cov)
    return mean + rng.standard_normal((m, mean.shape[0])) @ L.T


def sample_task(spec, m_target, m_source, seed):
    """Draw a (source, target) dataset pair for the task.

    Target responses are ``truth(x) + noise_sd * N(0, 1)``; the source task
    is resolved, so source responses are the noiseless model values. The
    three random streams (target inputs, target noise, source inputs) are
    derived from ``seed`` by fixed labels.
    """
    if m_target < 1 or m_source < 1:
        raise ValueError("m_target and m_source must be >= 1")
    truth = build_ground_truth(spec)
    X_t = _gaussian_draw(rng_from(seed, 0), spec.target_mean, spec.target_cov, m_target)
    noise = rng_from(seed, 1).standard_normal(m_target)
    y_t = truth.target_regressor(X_t) + spec.noise_sd * noise
    X_s = _gaussian_draw(rng_from(seed, 2), spec.source_mean, spec.source_cov, m_source)
    y_s = truth.source_model(X_s)
    return SampleSet(X_s, y_s), SampleSet(X_t, y_t)


def sample_target(spec, m, seed):
    """Draw m target pairs only (fresh evaluation or test data)."""
    truth = build_ground_truth(spec)
    X = _gaussian_draw(rng_from(seed, 0), spec.target_mean, spec.target_cov, m)
    y = truth.target_regressor(X) + spec.noise_sd * rng_from(seed, 1).standard_normal(m)
    return SampleSet(X, y)


def mixture_sampler(weights, means, covs, m, seed):
    """I.i.d. draws from a Gaussian mixture; component counts are multinomial."""
    weights = np.asarray(weights, dtype=np.float64)
    if weights.ndim != 1 or abs(weights.sum() - 1.0) > 1e-10 or np.any(weights < 0):
        raise ValueError("weights must be a probability vector")
    if not (len(means) == len(covs) == weights.shape[0]):
        raise ValueError("weights, means, covs must have equal lengths")
    means = [as_value_vector(mu, name="mean") for mu in means]
    covs = [check_spd(S, name="cov") for S in covs]
    d = means[0].shape[0]
    if any(mu.shape[0] != d for mu in means) or any(S.shape[0] != d for S in covs):
        raise ValueError("mixture components have inconsistent dimensions")
    if m < 1:
        raise ValueError("m must be >= 1")
    rng = rng_from(seed)
    comp = rng.choice(weights.shape[0], size=m, p=weights)
    z = rng.standard_normal((m, d))
    X = np.empty((m, d))
    for j in range(weights.shape[0]):
        mask = comp == j
        if np.any(mask):
            X[mask] = means[j] + z[mask] @ np.linalg.cholesky(covs[j]).T
    return SampleSet(X)

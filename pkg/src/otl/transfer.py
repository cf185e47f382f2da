"""The transfer estimator: two fitted transport maps around a fixed model.

``TransferRegressor`` estimates the input-side map from the target inputs
to the source inputs (entropic OT) and the output-side map from the source
model's values to the observed target responses (1-D quantile coupling),
then predicts through the composition
``output_map(source_model(input_map(x)))``.
"""

import json
import os

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_is_fitted

from .entropic import EntropicTransportMap
from .maps import ComposedPredictor, ScalarAffineModel
from .quantile_map import QuantileTransportMap1D
from .samples import SampleSet, rng_from
from .validation import as_point_matrix, as_value_vector, check_same_dimension

__all__ = ["TransferRegressor", "empirical_loss", "l2_error", "save_transfer", "load_transfer"]


class TransferRegressor(BaseEstimator, RegressorMixin):
    """Prediction by transporting through a fixed pretrained source model.

    Parameters
    ----------
    source_model : callable
        The resolved scalar-valued source model, (n, d) -> (n,).
    source_inputs : array-like of shape (n_source, d)
        Sample from the source input distribution. All of it feeds the
        output-side quantile map; at most ``coupling_cap`` points (seeded
        subsample) enter the quadratic-cost coupling, whose cost grows
        with the product of the two support sizes.
    epsilon, epsilon_scale, bandwidth, sinkhorn_tol, sinkhorn_max_iter, method
        Entropic-map solver settings; see
        :class:`~otl.entropic.EntropicTransportMap`.
    coupling_cap : int, optional
        Cap on the source-side support of the entropic problem.
    random_state : int or SeedSequence, default 0
        Seed for the coupling subsample.

    Attributes
    ----------
    input_map_ : EntropicTransportMap
        Fitted map from the target to the source input domain.
    output_map_ : QuantileTransportMap1D
        Fitted map from source model values to target responses.
    """

    def __init__(self, source_model=None, source_inputs=None, epsilon=None,
                 epsilon_scale=0.05, bandwidth=None, sinkhorn_tol=1e-9,
                 sinkhorn_max_iter=10000, method="auto", coupling_cap=None,
                 random_state=0):
        self.source_model = source_model
        self.source_inputs = source_inputs
        self.epsilon = epsilon
        self.epsilon_scale = epsilon_scale
        self.bandwidth = bandwidth
        self.sinkhorn_tol = sinkhorn_tol
        self.sinkhorn_max_iter = sinkhorn_max_iter
        self.method = method
        self.coupling_cap = coupling_cap
        self.random_state = random_state

    def fit(self, X, y):
        if self.source_model is None or self.source_inputs is None:
            raise ValueError("source_model and source_inputs are required")
        X = as_point_matrix(X, name="X")
        y = as_value_vector(y, name="y")
        if y.shape[0] != X.shape[0]:
            raise ValueError("X and y have inconsistent lengths")
        S = as_point_matrix(self.source_inputs, name="source_inputs")
        check_same_dimension(X, S, "X", "source_inputs")

        S_coupling = S
        if self.coupling_cap is not None and S.shape[0] > self.coupling_cap:
            idx = rng_from(self.random_state).choice(
                S.shape[0], size=int(self.coupling_cap), replace=False
            )
            S_coupling = S[np.sort(idx)]

        self.input_map_ = EntropicTransportMap(
            epsilon=self.epsilon,
            epsilon_scale=self.epsilon_scale,
            bandwidth=self.bandwidth,
            tol=self.sinkhorn_tol,
            max_iter=self.sinkhorn_max_iter,
            method=self.method,
        ).fit(X, S_coupling)

        source_values = as_value_vector(self.source_model(S), name="source model values")
        self.output_map_ = QuantileTransportMap1D().fit(source_values, y)
        self.predictor_ = ComposedPredictor(
            self.input_map_, self.source_model, self.output_map_
        )
        return self

    def predict(self, X):
        check_is_fitted(self, "predictor_")
        return self.predictor_(as_point_matrix(X, name="X"))


def empirical_loss(predict, data):
    """Mean squared loss (1/m) sum (y_i - predict(x_i))^2 on a labelled set."""
    if isinstance(data, SampleSet):
        if not data.has_responses:
            raise ValueError("data has no responses")
        X, y = data.X, data.y
    else:
        X, y = data
        X = as_point_matrix(X, name="X")
        y = as_value_vector(y, name="y")
    residual = y - np.asarray(predict(X), dtype=np.float64)
    return float(np.mean(residual**2))


def l2_error(predict, truth, eval_inputs):
    """Root mean squared gap between two predictors over evaluation points.

    With evaluation points drawn from the input distribution this is the
    Monte-Carlo estimate of the L2(P) estimation error.
    """
    X = eval_inputs.X if isinstance(eval_inputs, SampleSet) else as_point_matrix(eval_inputs)
    a = np.asarray(predict(X), dtype=np.float64)
    b = np.asarray(truth(X), dtype=np.float64)
    return float(np.sqrt(np.mean((a - b) ** 2)))


def save_transfer(est, directory):
    """Serialize a fitted TransferRegressor to a directory.

    Writes the two map CSVs and a manifest with the solver settings and
    the source model parameters (affine source models only).
    """
    check_is_fitted(est, "predictor_")
    if not isinstance(est.source_model, ScalarAffineModel):
        raise TypeError("only ScalarAffineModel source models are serializable")
    os.makedirs(directory, exist_ok=True)
    est.input_map_.to_csv(os.path.join(directory, "input_map.csv"))
    est.output_map_.to_csv(os.path.join(directory, "output_map.csv"))
    manifest = {
        "source_weights": est.source_model.weights.tolist(),
        "source_intercept": float(est.source_model.intercept),
        "epsilon": float(est.input_map_.epsilon_),
        "bandwidth": float(est.input_map_.bandwidth_),
    }
    with open(os.path.join(directory, "manifest.json"), "w") as buf:
        json.dump(manifest, buf, indent=2, sort_keys=True)
        buf.write("\n")


def load_transfer(directory):
    """Rebuild a fitted TransferRegressor written by :func:`save_transfer`."""
    with open(os.path.join(directory, "manifest.json")) as buf:
        manifest = json.load(buf)
    source_model = ScalarAffineModel(
        np.asarray(manifest["source_weights"], dtype=np.float64),
        float(manifest["source_intercept"]),
    )
    est = TransferRegressor(
        source_model=source_model,
        epsilon=manifest["epsilon"],
        bandwidth=manifest["bandwidth"],
    )
    est.input_map_ = EntropicTransportMap.from_csv(os.path.join(directory, "input_map.csv"))
    est.output_map_ = QuantileTransportMap1D.from_csv(os.path.join(directory, "output_map.csv"))
    est.predictor_ = ComposedPredictor(est.input_map_, source_model, est.output_map_)
    return est

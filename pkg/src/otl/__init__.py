"""Transfer learning as composed empirical optimal-transport maps.

The package fits two transport maps around a fixed pretrained source
model -- a d-dimensional entropic map on the input side and an exact 1-D
quantile map on the output side -- and compares the composed predictor
against direct nonparametric regression on synthetic tasks whose optimal
maps are known in closed form.
"""

from .entropic import (
    Coupling,
    EntropicTransportMap,
    NumericalError,
    barycentric_projection,
    exact_assignment_oracle,
    sinkhorn,
    squared_cost,
    transport_cost,
)
from .maps import AffineMap, ComposedPredictor, ScalarAffineModel, identity_map
from .metrics import (
    ConfusionCounts,
    accuracy,
    auroc,
    precision,
    relative_improvement,
    sensitivity,
)
from .quantile_map import QuantileTransportMap1D
from .rates import (
    ClassificationResult,
    RateConfig,
    RateExponent,
    RateResult,
    SlopeFit,
    advantage_condition,
    fit_loglog_slope,
    run_classification_experiment,
    run_rate_experiment,
    theoretical_direct_exponent,
    theoretical_transfer_exponent,
)
from .regression import KernelRegressor
from .samples import SampleSet, child_seed, rng_from, split
from .synthetic import (
    GaussianTaskSpec,
    GroundTruth,
    build_ground_truth,
    gaussian_monge_map,
    mixture_sampler,
    sample_target,
    sample_task,
)
from .transfer import (
    TransferRegressor,
    empirical_loss,
    l2_error,
    load_transfer,
    save_transfer,
)

__version__ = "0.1.0"

__all__ = [
    "AffineMap",
    "ClassificationResult",
    "ComposedPredictor",
    "ConfusionCounts",
    "Coupling",
    "EntropicTransportMap",
    "GaussianTaskSpec",
    "GroundTruth",
    "KernelRegressor",
    "NumericalError",
    "QuantileTransportMap1D",
    "RateConfig",
    "RateExponent",
    "RateResult",
    "SampleSet",
    "ScalarAffineModel",
    "SlopeFit",
    "TransferRegressor",
    "accuracy",
    "advantage_condition",
    "auroc",
    "barycentric_projection",
    "build_ground_truth",
    "child_seed",
    "empirical_loss",
    "exact_assignment_oracle",
    "fit_loglog_slope",
    "gaussian_monge_map",
    "identity_map",
    "l2_error",
    "load_transfer",
    "mixture_sampler",
    "precision",
    "relative_improvement",
    "rng_from",
    "run_classification_experiment",
    "run_rate_experiment",
    "sample_target",
    "sample_task",
    "save_transfer",
    "sensitivity",
    "sinkhorn",
    "split",
    "squared_cost",
    "theoretical_direct_exponent",
    "theoretical_transfer_exponent",
    "transport_cost",
]

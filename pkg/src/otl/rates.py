"""Monte-Carlo sample-complexity harness.

Sweeps the target sample size m, fits the transfer and direct estimators
on identical data per trial, aggregates held-out L2 errors, and extracts
empirical rate exponents from log-log slopes for comparison against the
theoretical references. Also runs the synthetic classification sweep that
mirrors the data-scarcity experiments.

Theoretical references:
  transfer:  m^{-1/2} (d=1), sqrt(log m / m) (d=2),
             m^{-(alpha+1)/(2 alpha + d)} (d >= 3),
  direct:    m^{-p/(2p+d)} for a p-smooth regression function.
"""

import math
from dataclasses import dataclass, field, fields
from fractions import Fraction

import numpy as np

from .metrics import (
    ConfusionCounts,
    accuracy,
    auroc,
    precision,
    relative_improvement,
    sensitivity,
)
from .entropic import NumericalError
from .regression import KernelRegressor
from .samples import child_seed
from .synthetic import GaussianTaskSpec, build_ground_truth, sample_target, sample_task
from .transfer import TransferRegressor, l2_error

__all__ = [
    "RateExponent",
    "SlopeFit",
    "RateConfig",
    "RateRow",
    "RateResult",
    "ClassificationRow",
    "ClassificationResult",
    "theoretical_transfer_exponent",
    "theoretical_direct_exponent",
    "advantage_condition",
    "fit_loglog_slope",
    "run_rate_experiment",
    "run_classification_experiment",
]

# mean errors below this are indistinguishable from exact recovery and
# make log-log slopes meaningless
DEGENERATE_ERROR_FLOOR = 1e-12

CLASSIFICATION_METRICS = ("auroc", "accuracy", "precision", "sensitivity")


@dataclass(frozen=True)
class RateExponent:
    """Power-law exponent k in error = O(m^{-k}), optionally log-corrected."""

    value: float
    log_corrected: bool = False


def theoretical_transfer_exponent(d, alpha):
    """Reference exponent for the composed transport estimator.

    1/2 for d = 1; 1/2 with a log correction for d = 2;
    (alpha + 1)/(2 alpha + d) for d >= 3 (1/2 in the alpha -> inf limit).
    """
    if d < 1:
        raise ValueError("d must be >= 1")
    if not (alpha > 0 or math.isinf(alpha)):
        raise ValueError("alpha must be positive")
    if d == 1:
        return RateExponent(0.5)
    if d == 2:
        return RateExponent(0.5, log_corrected=True)
    if math.isinf(alpha):
        return RateExponent(0.5)
    a = Fraction(alpha)
    return RateExponent(float((a + 1) / (2 * a + d)))


def theoretical_direct_exponent(d, p):
    """Reference exponent p/(2p + d) for direct nonparametric estimation."""
    if d < 1:
        raise ValueError("d must be >= 1")
    if not p > 0:
        raise ValueError("p must be positive")
    if math.isinf(p):
        return 0.5
    q = Fraction(p)
    return float(q / (2 * q + d))


def advantage_condition(alpha, p):
    """True when alpha + 1 > p (strict): the transfer exponent dominates."""
    if math.isinf(alpha):
        return True
    return alpha + 1 > p


@dataclass(frozen=True)
class SlopeFit:
    slope: float
    stderr: float
    r_squared: float


def fit_loglog_slope(points):
    """Ordinary least squares of log(error) on log(m).

    ``points`` is a sequence of (m, error) pairs with distinct m and
    strictly positive errors. Returns slope, its standard error, and R^2.
    """
    pts = [(float(m), float(e)) for m, e in points]
    if len(pts) < 2:
        raise ValueError("slope needs >= 2 points")
    ms = np.array([m for m, _ in pts])
    errs = np.array([e for _, e in pts])
    if len(set(ms.tolist())) != len(pts):
        raise ValueError("m values must be distinct")
    if np.any(errs <= 0):
        raise ValueError("errors must be strictly positive")
    x = np.log(ms)
    y = np.log(errs)
    xc = x - x.mean()
    yc = y - y.mean()
    sxx = float(np.dot(xc, xc))
    slope = float(np.dot(xc, yc) / sxx)
    residuals = yc - slope * xc
    ssr = float(np.dot(residuals, residuals))
    sst = float(np.dot(yc, yc))
    n = len(pts)
    stderr = math.sqrt(ssr / (n - 2) / sxx) if n > 2 else 0.0
    r_squared = 1.0 if sst == 0 else 1.0 - ssr / sst
    return SlopeFit(slope, stderr, r_squared)


@dataclass(frozen=True)
class RateConfig:
    """Configuration of one rate (or classification) sweep.

    ``p`` is the smoothness handed to the direct baseline, ``alpha`` the
    input-density smoothness used for the theoretical transfer reference
    (infinity for the Gaussian tasks built here).
    """

    task: GaussianTaskSpec
    m_grid: tuple
    trials: int
    m_source: int
    n_eval: int = 20000
    p: float = 1.0
    alpha: float = math.inf
    bandwidth_scale: float = 1.0
    seed: int = 0
    epsilon: float = None
    epsilon_scale: float = 0.05
    bandwidth: float = None
    sinkhorn_tol: float = 1e-9
    sinkhorn_max_iter: int = 10000
    coupling_cap: int = 2000
    threshold: float = None

    def __post_init__(self):
        grid = tuple(int(m) for m in self.m_grid)
        if len(grid) < 2:
            raise ValueError("m_grid needs >= 2 entries (slope needs >= 2 points)")
        if any(b <= a for a, b in zip(grid, grid[1:])):
            raise ValueError("m_grid must be strictly increasing")
        if grid[0] < 1:
            raise ValueError("m_grid entries must be >= 1")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if self.m_source < 1 or self.n_eval < 1:
            raise ValueError("m_source and n_eval must be >= 1")
        object.__setattr__(self, "m_grid", grid)

    def transfer_params(self, random_state):
        return dict(
            epsilon=self.epsilon,
            epsilon_scale=self.epsilon_scale,
            bandwidth=self.bandwidth,
            sinkhorn_tol=self.sinkhorn_tol,
            sinkhorn_max_iter=self.sinkhorn_max_iter,
            coupling_cap=self.coupling_cap,
            random_state=random_state,
        )

    def to_dict(self):
        out = {}
        for f in fields(self):
            v = getattr(self, f.name)
            if f.name == "task":
                out["task"] = v.to_dict()
            elif isinstance(v, tuple):
                out[f.name] = list(v)
            elif isinstance(v, float) and math.isinf(v):
                out[f.name] = "inf"
            else:
                out[f.name] = v
        return out


@dataclass(frozen=True)
class RateRow:
    m: int
    mean_err_transfer: float
    sd_transfer: float
    mean_err_direct: float
    sd_direct: float
    failed_trials: int = 0


@dataclass(frozen=True)
class RateResult:
    rows: tuple
    slope_transfer: SlopeFit
    slope_direct: SlopeFit
    theory_transfer: RateExponent
    theory_direct: float
    trials: int
    degenerate: bool

    @property
    def valid(self):
        """False when any m-row lost more than half of its trials."""
        return all(r.failed_trials * 2 <= self.trials for r in self.rows)

    def summary(self):
        return {
            "rows": [
                {
                    "m": r.m,
                    "mean_err_transfer": r.mean_err_transfer,
                    "sd_transfer": r.sd_transfer,
                    "mean_err_direct": r.mean_err_direct,
                    "sd_direct": r.sd_direct,
                    "failed_trials": r.failed_trials,
                }
                for r in self.rows
            ],
            "slope_transfer": vars(self.slope_transfer),
            "slope_direct": vars(self.slope_direct),
            "theory_transfer_exponent": -self.theory_transfer.value,
            "theory_transfer_log_corrected": self.theory_transfer.log_corrected,
            "theory_direct_exponent": -self.theory_direct,
            "trials": self.trials,
            "degenerate": self.degenerate,
            "valid": self.valid,
        }


def _aggregate(values):
    arr = np.asarray(values, dtype=np.float64)
    mean = float(arr.mean())
    sd = float(arr.std(ddof=1)) if arr.shape[0] > 1 else 0.0
    return mean, sd


def run_rate_experiment(config):
    """Sweep m: per trial fit both estimators on the same target data and
    measure held-out L2 estimation error against the exact regressor.

    Trials are independently child-seeded by (m-index, trial) labels, so
    the result is bit-reproducible for equal configs. A trial aborted by a
    solver failure is recorded; a row losing more than half its trials
    marks the whole result invalid.
    """
    truth = build_ground_truth(config.task)
    rows = []
    for mi, m in enumerate(config.m_grid):
        errs_t, errs_d, failed = [], [], 0
        for t in range(config.trials):
            try:
                src, tgt = sample_task(
                    config.task, m, config.m_source, child_seed(config.seed, 1, mi, t)
                )
                transfer = TransferRegressor(
                    source_model=truth.source_model,
                    source_inputs=src.X,
                    **config.transfer_params(child_seed(config.seed, 2, mi, t)),
                ).fit(tgt.X, tgt.y)
                direct = KernelRegressor(
                    smoothness=config.p, bandwidth_scale=config.bandwidth_scale
                ).fit(tgt.X, tgt.y)
                X_eval = sample_target(
                    config.task, config.n_eval, child_seed(config.seed, 3, mi, t)
                ).X
                errs_t.append(l2_error(transfer.predict, truth.target_regressor, X_eval))
                errs_d.append(l2_error(direct.predict, truth.target_regressor, X_eval))
            except (ValueError, NumericalError):
                failed += 1
        if not errs_t:
            rows.append(RateRow(m, math.nan, math.nan, math.nan, math.nan, failed))
            continue
        mean_t, sd_t = _aggregate(errs_t)
        mean_d, sd_d = _aggregate(errs_d)
        rows.append(RateRow(m, mean_t, sd_t, mean_d, sd_d, failed))

    usable = [r for r in rows if not math.isnan(r.mean_err_transfer)]
    degenerate = any(
        min(r.mean_err_transfer, r.mean_err_direct) < DEGENERATE_ERROR_FLOOR for r in usable
    ) or len(usable) < 2
    floor = DEGENERATE_ERROR_FLOOR * 1e-3
    slope_t = fit_loglog_slope(
        [(r.m, max(r.mean_err_transfer, floor)) for r in usable]
    ) if len(usable) >= 2 else SlopeFit(math.nan, math.nan, math.nan)
    slope_d = fit_loglog_slope(
        [(r.m, max(r.mean_err_direct, floor)) for r in usable]
    ) if len(usable) >= 2 else SlopeFit(math.nan, math.nan, math.nan)

    return RateResult(
        rows=tuple(rows),
        slope_transfer=slope_t,
        slope_direct=slope_d,
        theory_transfer=theoretical_transfer_exponent(config.task.d, config.alpha),
        theory_direct=theoretical_direct_exponent(config.task.d, config.p),
        trials=config.trials,
        degenerate=degenerate,
    )


def prevalence_threshold_predictions(scores, prevalence):
    """Hard labels from scores at the threshold matching a target prevalence.

    The threshold is the (1 - prevalence) score quantile; of the strict
    and non-strict comparisons, the one whose positive fraction lands
    closer to the prevalence wins (score ties otherwise distort the
    positive mass badly).
    """
    scores = np.asarray(scores, dtype=np.float64)
    t = float(np.quantile(scores, 1.0 - prevalence))
    strict = scores > t
    loose = scores >= t
    if abs(strict.mean() - prevalence) <= abs(loose.mean() - prevalence):
        return strict
    return loose


@dataclass(frozen=True)
class ClassificationRow:
    m: int
    metrics_transfer: dict
    metrics_direct: dict
    improvement: dict
    degenerate_trials: int
    failed_trials: int


@dataclass(frozen=True)
class ClassificationResult:
    rows: tuple
    threshold: float
    trials: int

    @property
    def valid(self):
        bad = lambda r: (r.degenerate_trials + r.failed_trials) * 2 > self.trials
        return not any(bad(r) for r in self.rows)

    @property
    def warning_count(self):
        return sum(r.degenerate_trials + r.failed_trials for r in self.rows)


def _mean_or_none(values):
    vals = [v for v in values if v is not None]
    return float(np.mean(vals)) if vals else None


def run_classification_experiment(config, threshold=None):
    """Synthetic binary classification sweep over m.

    Labels are ``truth(x) + noise > threshold``. Both methods are trained
    on the binary labels and scored on a fresh labelled sample; hard
    decisions use the prevalence-matched score threshold. Per m the trial
    means of AUROC/accuracy/precision/sensitivity are reported for both
    methods together with the relative improvement of their means. Trials
    whose train or evaluation labels collapse to a single class are
    flagged degenerate and excluded from the averages.
    """
    if threshold is None:
        threshold = config.threshold
    if threshold is None:
        raise ValueError("classification sweep needs a threshold")
    truth = build_ground_truth(config.task)
    rows = []
    for mi, m in enumerate(config.m_grid):
        per_method = {"transfer": {k: [] for k in CLASSIFICATION_METRICS},
                      "direct": {k: [] for k in CLASSIFICATION_METRICS}}
        degenerate = 0
        failed = 0
        for t in range(config.trials):
            try:
                src, tgt = sample_task(
                    config.task, m, config.m_source, child_seed(config.seed, 11, mi, t)
                )
                labels_train = tgt.y > threshold
                eval_set = sample_target(
                    config.task, config.n_eval, child_seed(config.seed, 13, mi, t)
                )
                labels_eval = eval_set.y > threshold
                if labels_train.all() or (~labels_train).all() or \
                        labels_eval.all() or (~labels_eval).all():
                    degenerate += 1
                    continue
                transfer = TransferRegressor(
                    source_model=truth.source_model,
                    source_inputs=src.X,
                    **config.transfer_params(child_seed(config.seed, 12, mi, t)),
                ).fit(tgt.X, labels_train.astype(np.float64))
                direct = KernelRegressor(
                    smoothness=config.p, bandwidth_scale=config.bandwidth_scale
                ).fit(tgt.X, labels_train.astype(np.float64))
                prevalence = float(labels_train.mean())
                for name, est in (("transfer", transfer), ("direct", direct)):
                    scores = est.predict(eval_set.X)
                    predicted = prevalence_threshold_predictions(scores, prevalence)
                    counts = ConfusionCounts.from_predictions(predicted, labels_eval)
                    per_method[name]["auroc"].append(auroc(scores, labels_eval))
                    per_method[name]["accuracy"].append(accuracy(counts))
                    per_method[name]["precision"].append(precision(counts))
                    per_method[name]["sensitivity"].append(sensitivity(counts))
            except (ValueError, NumericalError):
                failed += 1
        mt = {k: _mean_or_none(per_method["transfer"][k]) for k in CLASSIFICATION_METRICS}
        md = {k: _mean_or_none(per_method["direct"][k]) for k in CLASSIFICATION_METRICS}
        imp = {k: relative_improvement(mt[k], md[k]) for k in CLASSIFICATION_METRICS}
        rows.append(ClassificationRow(m, mt, md, imp, degenerate, failed))
    return ClassificationResult(rows=tuple(rows), threshold=float(threshold),
                                trials=config.trials)

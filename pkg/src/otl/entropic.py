"""Entropic optimal transport between d-dimensional samples.

The map estimator chains three standard steps: solve the entropy-regularized
transport problem between the two point clouds by alternating Sinkhorn
scaling, project the coupling to a map on the source support (barycentric
projection), and extend off-support with a Gaussian kernel average.
A brute-force assignment oracle for tiny instances serves as the
independent correctness reference.
"""

import csv
import itertools
from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist
from scipy.special import logsumexp
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .validation import (
    as_point_matrix,
    check_probability_vector,
    check_same_dimension,
)

__all__ = [
    "NumericalError",
    "Coupling",
    "squared_cost",
    "sinkhorn",
    "transport_cost",
    "barycentric_projection",
    "EntropicTransportMap",
    "exact_assignment_oracle",
]

# below this epsilon / mean-cost ratio the scaling kernel underflows; the
# solver must run in the log domain
LOG_DOMAIN_RATIO = 0.02


class NumericalError(RuntimeError):
    """Numerical failure inside a solver (underflow, hopeless conditioning)."""


@dataclass(frozen=True)
class Coupling:
    """Entropic transport plan together with its convergence diagnostics.

    ``plan`` is n x n' nonnegative; on a converged result its row sums match
    ``row_marginal`` exactly (closing scaling step) and its column sums match
    ``col_marginal`` within the solver tolerance.
    """

    plan: np.ndarray
    row_marginal: np.ndarray
    col_marginal: np.ndarray
    epsilon: float
    iterations: int
    marginal_violation: float
    converged: bool

    def transport_cost(self, cost):
        return transport_cost(self.plan, cost)


def squared_cost(a, b):
    """Pairwise squared Euclidean distances, entry (i, j) = ||a_i - b_j||^2."""
    a = as_point_matrix(a, name="a")
    b = as_point_matrix(b, name="b")
    check_same_dimension(a, b, "a", "b")
    return np.maximum(cdist(a, b, "sqeuclidean"), 0.0)


def transport_cost(plan, cost):
    return float(np.sum(plan * cost))


def sinkhorn(cost, row_marginal, col_marginal, epsilon, tol=1e-9, max_iter=10000,
             method="auto"):
    """Entropy-regularized coupling via alternating row/column scaling.

    Iterates until the L1 violation of both marginal constraints falls
    below ``tol`` or ``max_iter`` sweeps elapse; a non-converged run is
    returned as a :class:`Coupling` with ``converged=False`` carrying the
    last iterate, so the caller decides what to do with it.

    Parameters
    ----------
    cost : ndarray of shape (n, n')
        Nonnegative cost matrix.
    row_marginal, col_marginal : array-like
        Probability vectors of lengths n and n'.
    epsilon : float
        Regularization strength, > 0.
    method : {"auto", "scaling", "log"}
        "scaling" runs plain multiplicative updates and raises
        :class:`NumericalError` on kernel underflow; "log" runs the
        underflow-safe log-domain updates; "auto" picks by the
        epsilon-to-mean-cost ratio and falls back to "log" on underflow.
    """
    cost = np.asarray(cost, dtype=np.float64)
    if cost.ndim != 2:
        raise ValueError("cost must be a matrix")
    if not np.all(np.isfinite(cost)) or np.any(cost < 0):
        raise ValueError("cost entries must be finite and nonnegative")
    a = check_probability_vector(row_marginal, size=cost.shape[0], name="row_marginal")
    b = check_probability_vector(col_marginal, size=cost.shape[1], name="col_marginal")
    if not epsilon > 0:
        raise ValueError(f"epsilon must be positive, got {epsilon}")
    if tol <= 0 or max_iter < 1:
        raise ValueError("tol must be > 0 and max_iter >= 1")
    if method not in ("auto", "scaling", "log"):
        raise ValueError(f"unknown method {method!r}")

    mean_cost = float(cost.mean())
    if method == "auto":
        use_log = mean_cost > 0 and epsilon / mean_cost <= LOG_DOMAIN_RATIO
        if not use_log:
            try:
                return _sinkhorn_scaling(cost, a, b, epsilon, tol, max_iter)
            except NumericalError:
                pass
        return _sinkhorn_log(cost, a, b, epsilon, tol, max_iter)
    if method == "scaling":
        return _sinkhorn_scaling(cost, a, b, epsilon, tol, max_iter)
    return _sinkhorn_log(cost, a, b, epsilon, tol, max_iter)


def _sinkhorn_scaling(cost, a, b, epsilon, tol, max_iter):
    K = np.exp(-cost / epsilon)
    u = np.ones_like(a)
    violation = np.inf
    for it in range(1, max_iter + 1):
        KTu = K.T @ u
        if np.any(KTu == 0.0):
            raise NumericalError(
                "Sinkhorn scaling underflowed (epsilon too small for this cost "
                "range); rerun with method='log'"
            )
        v = b / KTu
        Kv = K @ v
        if np.any(Kv == 0.0):
            raise NumericalError(
                "Sinkhorn scaling underflowed (epsilon too small for this cost "
                "range); rerun with method='log'"
            )
        u = a / Kv
        # rows are exact after the u-update; only columns can be violated
        violation = float(np.abs(v * (K.T @ u) - b).sum())
        if violation < tol:
            plan = u[:, None] * K * v[None, :]
            return Coupling(plan, a, b, float(epsilon), it, violation, True)
    plan = u[:, None] * K * v[None, :]
    return Coupling(plan, a, b, float(epsilon), max_iter, violation, False)


def _sinkhorn_log(cost, a, b, epsilon, tol, max_iter):
    logK = -cost / epsilon
    with np.errstate(divide="ignore"):
        log_a = np.log(a)
        log_b = np.log(b)
    f = np.zeros_like(a)
    violation = np.inf
    for it in range(1, max_iter + 1):
        g = log_b - logsumexp(logK + f[:, None], axis=0)
        f = log_a - logsumexp(logK + g[None, :], axis=1)
        col_sums = np.exp(g + logsumexp(logK + f[:, None], axis=0))
        violation = float(np.abs(col_sums - b).sum())
        if violation < tol:
            plan = np.exp(f[:, None] + logK + g[None, :])
            return Coupling(plan, a, b, float(epsilon), it, violation, True)
    plan = np.exp(f[:, None] + logK + g[None, :])
    return Coupling(plan, a, b, float(epsilon), max_iter, violation, False)


def barycentric_projection(plan, tgt_points):
    """Send each source atom to the mean of its coupled targets.

    ``plan`` may be a :class:`Coupling` or a raw weight matrix; image i is
    ``sum_j plan[i, j] * tgt[j] / row_mass[i]``.
    """
    weights = plan.plan if isinstance(plan, Coupling) else np.asarray(plan, dtype=np.float64)
    tgt = as_point_matrix(tgt_points, name="tgt_points")
    if weights.ndim != 2 or weights.shape[1] != tgt.shape[0]:
        raise ValueError(
            f"plan has {weights.shape[1] if weights.ndim == 2 else '?'} columns, "
            f"expected {tgt.shape[0]}"
        )
    row_mass = weights.sum(axis=1)
    if np.any(row_mass <= 0.0):
        raise ValueError("plan has a zero row marginal; projection undefined")
    return (weights @ tgt) / row_mass[:, None]


class EntropicTransportMap(BaseEstimator, TransformerMixin):
    """Map between d-dimensional samples via entropic OT and kernel extension.

    ``fit(X_src, X_tgt)`` solves the uniform-marginal entropic problem for
    the squared Euclidean cost, stores the barycentric projections as
    images of the source points, and ``transform`` extends the map off
    support with a Gaussian-kernel weighted average of those images.

    Parameters
    ----------
    epsilon : float, optional
        Regularization strength. Defaults to ``epsilon_scale`` times the
        mean cost entry.
    epsilon_scale : float, default 0.05
        Scale-free epsilon choice used when ``epsilon`` is None.
    bandwidth : float, optional
        Kernel length-scale for off-support evaluation. Defaults to
        ``1.06 * sigma * m**(-1/(4+d))`` with ``sigma`` the mean
        per-coordinate standard deviation of the source sample.
    tol, max_iter, method
        Passed through to :func:`sinkhorn`.
    """

    def __init__(self, epsilon=None, epsilon_scale=0.05, bandwidth=None,
                 tol=1e-9, max_iter=10000, method="auto"):
        self.epsilon = epsilon
        self.epsilon_scale = epsilon_scale
        self.bandwidth = bandwidth
        self.tol = tol
        self.max_iter = max_iter
        self.method = method

    def fit(self, X_src, X_tgt):
        X_src = as_point_matrix(X_src, name="X_src")
        X_tgt = as_point_matrix(X_tgt, name="X_tgt")
        check_same_dimension(X_src, X_tgt, "X_src", "X_tgt")
        cost = squared_cost(X_src, X_tgt)
        if self.epsilon is not None:
            epsilon = float(self.epsilon)
        else:
            if self.epsilon_scale <= 0:
                raise ValueError("epsilon_scale must be positive")
            mean_cost = float(cost.mean())
            epsilon = self.epsilon_scale * (mean_cost if mean_cost > 0 else 1.0)
        if epsilon <= 0:
            raise ValueError(f"epsilon must be positive, got {epsilon}")
        n_src, n_tgt = cost.shape
        result = sinkhorn(
            cost,
            np.full(n_src, 1.0 / n_src),
            np.full(n_tgt, 1.0 / n_tgt),
            epsilon,
            tol=self.tol,
            max_iter=self.max_iter,
            method=self.method,
        )
        self.support_in_ = X_src
        self.support_out_ = barycentric_projection(result, X_tgt)
        self.epsilon_ = epsilon
        self.bandwidth_ = self._resolve_bandwidth(X_src)
        self.coupling_ = result
        return self

    def _resolve_bandwidth(self, X_src):
        if self.bandwidth is not None:
            if self.bandwidth <= 0:
                raise ValueError("bandwidth must be positive")
            return float(self.bandwidth)
        m, d = X_src.shape
        sigma = float(np.mean(np.std(X_src, axis=0, ddof=1))) if m > 1 else 0.0
        bw = 1.06 * sigma * m ** (-1.0 / (4 + d))
        return bw if bw > 0 else 1.0

    def transform(self, X):
        """Gaussian-kernel weighted average of the support images at X."""
        check_is_fitted(self, "support_in_")
        X = as_point_matrix(X, name="X")
        check_same_dimension(X, self.support_in_, "X", "support_in")
        logits = -squared_cost(X, self.support_in_) / (2.0 * self.bandwidth_**2)
        logits -= logits.max(axis=1, keepdims=True)
        weights = np.exp(logits)
        weights /= weights.sum(axis=1, keepdims=True)
        return weights @ self.support_out_

    __call__ = transform

    def to_csv(self, path):
        check_is_fitted(self, "support_in_")
        d_in = self.support_in_.shape[1]
        d_out = self.support_out_.shape[1]
        with open(path, "w", newline="") as buf:
            buf.write(f"# bandwidth={self.bandwidth_:.17g} epsilon={self.epsilon_:.17g}\n")
            writer = csv.writer(buf)
            writer.writerow(
                [f"in{i + 1}" for i in range(d_in)] + [f"out{i + 1}" for i in range(d_out)]
            )
            for row_in, row_out in zip(self.support_in_, self.support_out_):
                writer.writerow([f"{v:.17g}" for v in (*row_in, *row_out)])

    @classmethod
    def from_csv(cls, path):
        with open(path, "r", newline="") as buf:
            meta = buf.readline().strip()
            if not meta.startswith("# "):
                raise ValueError("missing metadata header line")
            fields = dict(part.split("=", 1) for part in meta[2:].split())
            reader = csv.reader(buf)
            header = next(reader)
            d_in = sum(1 for h in header if h.startswith("in"))
            rows = np.asarray([[float(v) for v in row] for row in reader])
        est = cls(epsilon=float(fields["epsilon"]), bandwidth=float(fields["bandwidth"]))
        est.support_in_ = rows[:, :d_in]
        est.support_out_ = rows[:, d_in:]
        est.epsilon_ = float(fields["epsilon"])
        est.bandwidth_ = float(fields["bandwidth"])
        est.coupling_ = None
        return est


def exact_assignment_oracle(cost):
    """Globally optimal assignment of a small square cost by enumeration.

    Returns ``(permutation, total_cost)`` where ``permutation[i]`` is the
    column assigned to row i and ``total_cost = sum_i cost[i, perm[i]]``.
    Ties break to the lexicographically smallest permutation. Refuses
    n > 10 (combinatorial blow-up); this is a test oracle, not a solver.
    """
    cost = np.asarray(cost, dtype=np.float64)
    if cost.ndim != 2 or cost.shape[0] != cost.shape[1]:
        raise ValueError("cost must be square")
    n = cost.shape[0]
    if n > 10:
        raise ValueError(f"exact oracle refuses n={n} > 10")
    rows = np.arange(n)
    best_perm, best_cost = None, np.inf
    for perm in itertools.permutations(range(n)):
        total = float(cost[rows, perm].sum())
        if total < best_cost:
            best_perm, best_cost = perm, total
    return np.asarray(best_perm, dtype=np.intp), best_cost

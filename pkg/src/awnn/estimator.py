"""Adaptively weighted row nearest neighbors (AWNN).

:func:`row_imputer` solves one simplex-constrained weight problem per cell
for a fixed noise variance. :func:`awnn_fit` wraps it in a fixed-point
iteration that re-estimates the noise variance from the residuals on the
observed cells; :func:`oracle_awnn_fit` runs a single pass with a known
variance.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from ._kernels import impute_cells
from .distance import DistanceTable, build_distance_table, pairwise_raw_distances
from .matrix import DenseMatrix, MaskedMatrix

log = logging.getLogger(__name__)

LOG_CONSTANT_MODES = ("theory", "algorithm2")


@dataclass(frozen=True)
class EstimatorConfig:
    """Settings shared by AWNN and O-AWNN.

    ``log_constant_mode="theory"`` uses the regularizer
    ``2 log(2m/delta) sigma2``; ``"algorithm2"`` uses ``2 log(1/delta) sigma2``.
    """

    delta: float = 0.05
    allow_self: bool = True
    log_constant_mode: str = "theory"
    variance_floor: float = 1e-12
    fp_tol: float = 1e-6
    fp_max_iter: int = 50
    min_overlap: int = 1

    def __post_init__(self):
        if not 0.0 < self.delta < 1.0:
            raise ValueError("delta must be in (0, 1)")
        if self.fp_max_iter < 1:
            raise ValueError("fp_max_iter must be >= 1")
        if self.log_constant_mode not in LOG_CONSTANT_MODES:
            raise ValueError(f"log_constant_mode must be one of {LOG_CONSTANT_MODES}")
        if self.min_overlap < 1:
            raise ValueError("min_overlap must be >= 1")

    def log_constant(self, m: int) -> float:
        if self.log_constant_mode == "theory":
            return math.log(2.0 * m / self.delta)
        return math.log(1.0 / self.delta)

    def regularizer(self, sigma2: float, m: int) -> float:
        """Coefficient of ``||w||^2`` in the per-cell objective."""
        return 2.0 * self.log_constant(m) * sigma2


@dataclass
class WeightStats:
    """Per-cell summaries of the solved weight vectors.

    ``k`` is the proximity-set size (0 for a non-imputable cell); the other
    arrays hold the largest weight and the min/max/mean debiased distance
    over the proximity set.
    """

    k: np.ndarray
    w_max: np.ndarray
    d_min: np.ndarray
    d_max: np.ndarray
    d_mean: np.ndarray
    regularizer: float
    degenerate: bool

    @property
    def non_imputable(self) -> np.ndarray:
        return self.k == 0


@dataclass
class ImputationResult:
    theta_hat: DenseMatrix
    sigma2_hat: float
    sigma2_trace: list[float]
    weight_stats: WeightStats
    converged: bool
    sigma2_used: float = field(default=float("nan"))

    @property
    def non_imputable(self) -> np.ndarray:
        return self.weight_stats.non_imputable

    @property
    def non_imputable_count(self) -> int:
        return int(np.count_nonzero(self.non_imputable))


def row_imputer(matrix: MaskedMatrix, sigma2: float, config: EstimatorConfig = EstimatorConfig(),
                raw=None, table: DistanceTable | None = None):
    """One weighted nearest-neighbor pass with noise variance ``sigma2``.

    Returns ``(theta_hat, stats, table)``. Each cell ``(i, j)`` averages the
    column-``j`` entries of the rows observed in that column, with weights
    solving the simplex problem for the debiased distances to row ``i``.
    Cells without any admissible row are NaN and have ``stats.k == 0``.
    """
    if not np.isfinite(sigma2) or sigma2 < 0:
        raise ValueError("sigma2 must be finite and >= 0")
    if table is None:
        if raw is None:
            raw = pairwise_raw_distances(matrix, config.min_overlap)
        table = build_distance_table(matrix, sigma2, config.allow_self, config.min_overlap, raw)

    n, m = matrix.shape
    degenerate = sigma2 < config.variance_floor
    reg = 0.0 if degenerate else config.regularizer(sigma2, m)
    order = np.argsort(table.dist, axis=1, kind="stable")

    theta = np.empty((n, m))
    k = np.empty((n, m), dtype=np.int64)
    w_max, d_min, d_max, d_mean = (np.empty((n, m)) for _ in range(4))
    impute_cells(np.ascontiguousarray(table.dist), order,
                 np.ascontiguousarray(matrix.observed.T),
                 np.ascontiguousarray(matrix.filled(0.0).T), reg, degenerate,
                 theta, k, w_max, d_min, d_max, d_mean)
    stats = WeightStats(k, w_max, d_min, d_max, d_mean, reg, degenerate)
    return DenseMatrix(theta), stats, table


def _residual_variance(matrix: MaskedMatrix, theta_hat: np.ndarray) -> float:
    use = matrix.observed & ~np.isnan(theta_hat)
    r = matrix.values[use] - theta_hat[use]
    return float(np.mean(r * r))


def awnn_fit(matrix: MaskedMatrix, config: EstimatorConfig = EstimatorConfig()) -> ImputationResult:
    """AWNN with the noise variance estimated by fixed-point iteration.

    The variance starts at a tenth of the variance of the observed entries.
    Each round imputes with the current estimate, then replaces it by the
    mean squared residual over observed cells. Iteration stops once the
    relative change is at most ``fp_tol`` (an estimate that reaches exactly
    zero stays there); after ``fp_max_iter`` rounds the last iterate is
    returned with ``converged=False``.
    """
    obs = matrix.values[matrix.observed]
    if obs.size < 2:
        raise ValueError("cannot estimate variance")

    raw = pairwise_raw_distances(matrix, config.min_overlap)
    sigma2 = float(np.var(obs)) / 10.0
    trace = [sigma2]
    converged = False
    for it in range(config.fp_max_iter):
        theta, stats, _ = row_imputer(matrix, sigma2, config, raw=raw)
        new = _residual_variance(matrix, theta.values)
        trace.append(new)
        log.debug("fixed point round %d: sigma2 %.6g -> %.6g", it, sigma2, new)
        used, sigma2 = sigma2, new
        if abs(new - used) <= config.fp_tol * used:
            converged = True
            break
    return ImputationResult(theta, trace[-1], trace, stats, converged, sigma2_used=used)


def oracle_awnn_fit(matrix: MaskedMatrix, sigma2_true: float,
                    config: EstimatorConfig = EstimatorConfig()) -> ImputationResult:
    """AWNN with a known noise variance: one imputation pass, no iteration."""
    if not sigma2_true >= 0:
        raise ValueError("sigma2_true must be >= 0")
    theta, stats, _ = row_imputer(matrix, sigma2_true, config)
    return ImputationResult(theta, float(sigma2_true), [float(sigma2_true)], stats, True,
                            sigma2_used=float(sigma2_true))


@dataclass
class Violation:
    i: int
    j: int
    kind: str
    value: float
    bound: float


def audit_lemma4(result: ImputationResult, table: DistanceTable, matrix: MaskedMatrix,
                 config: EstimatorConfig = EstimatorConfig(), tol: float = 1e-9,
                 constant: str = "corrected") -> list[Violation]:
    """Check the proximity-set distance bounds of every imputed cell.

    With ``c = 2 * regularizer`` (``4 log(2m/delta) sigma2`` in theory mode):

    * every proximity-set distance is at most ``c`` when the target cell is
      observed and may use itself, else at most ``c + min`` over the set;
    * the mean proximity-set distance equals
      ``c * (max weight - 1/K) + min``;
    * the nearest row of the set is the nearest admissible row overall.

    ``constant="literal"`` replaces ``log(2m/delta)`` by ``log(2m*delta)``.
    ``table`` must be the distance table the weights were solved with.
    Returns the violations found; an empty list means the audit passed.
    """
    s = result.weight_stats
    n, m = matrix.shape
    c = 2.0 * s.regularizer
    if constant == "literal" and not s.degenerate:
        c = 4.0 * math.log(2.0 * m * config.delta) * result.sigma2_used
    elif constant not in ("corrected", "literal"):
        raise ValueError("constant must be 'corrected' or 'literal'")

    out = []
    self_ok = matrix.observed & config.allow_self
    dist = np.where(np.isfinite(table.dist), table.dist, np.inf)
    for j in range(m):
        col_d = np.where(matrix.observed[:, j][None, :], dist, np.inf)
        nearest = col_d.min(axis=1)
        for i in range(n):
            k = s.k[i, j]
            if k == 0:
                if np.isfinite(nearest[i]):
                    out.append(Violation(i, j, "missed-admissible", nearest[i], np.inf))
                continue
            dmin, dmax = s.d_min[i, j], s.d_max[i, j]
            slack = tol * max(1.0, abs(c), abs(dmin))
            bound = c if self_ok[i, j] else c + dmin
            if dmax > bound + slack:
                out.append(Violation(i, j, "max-distance", dmax, bound))
            mean_id = c * (s.w_max[i, j] - 1.0 / k) + dmin
            if abs(s.d_mean[i, j] - mean_id) > slack:
                out.append(Violation(i, j, "mean-identity", s.d_mean[i, j], mean_id))
            if dmin != nearest[i]:
                out.append(Violation(i, j, "nearest-row", dmin, nearest[i]))
    return out

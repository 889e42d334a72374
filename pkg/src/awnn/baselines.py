"""Reference estimators: unweighted row nearest neighbors and USVT."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np

from .distance import DistanceTable, build_distance_table
from .estimator import EstimatorConfig, awnn_fit
from .matrix import DenseMatrix, MaskedMatrix, observed_fraction


@dataclass(frozen=True)
class RowNNConfig:
    eta2: Union[float, str] = "auto"
    tuning_grid_size: int = 30
    holdout_fraction: float = 0.1
    seed: int = 0
    allow_self: bool = True
    min_overlap: int = 1

    def __post_init__(self):
        if self.eta2 != "auto" and not float(self.eta2) > 0:
            raise ValueError("eta2 must be > 0 or 'auto'")
        if not 0.0 < self.holdout_fraction < 0.5:
            raise ValueError("holdout_fraction must be in (0, 0.5)")
        if self.tuning_grid_size < 1:
            raise ValueError("tuning_grid_size must be >= 1")


@dataclass(frozen=True)
class UsvtConfig:
    threshold_factor: float = 2.01
    clip_low: Union[float, str] = "auto"
    clip_high: Union[float, str] = "auto"

    def __post_init__(self):
        if not self.threshold_factor > 0:
            raise ValueError("threshold_factor must be > 0")


def _rownn_from_table(matrix: MaskedMatrix, table: DistanceTable, eta2: float) -> np.ndarray:
    M = matrix.observed.astype(np.float64)
    X = matrix.filled(0.0)
    dist = table.dist
    B = (dist <= eta2).astype(np.float64)
    num = B @ (M * X)
    cnt = B @ M
    with np.errstate(invalid="ignore", divide="ignore"):
        theta = num / cnt

    # empty neighborhood: fall back to the nearest admissible row
    empty = np.argwhere(cnt == 0)
    if len(empty):
        order = np.argsort(dist, axis=1, kind="stable")
        for i, j in empty:
            for r in order[i]:
                if not np.isfinite(dist[i, r]):
                    break
                if matrix.observed[r, j]:
                    theta[i, j] = matrix.values[r, j]
                    break
    return theta


def rownn_impute(matrix: MaskedMatrix, sigma2: float, eta2: float,
                 config: RowNNConfig = RowNNConfig(), table: DistanceTable | None = None) -> DenseMatrix:
    """Average column ``j`` over the observed rows within debiased distance ``eta2``.

    Cells whose neighborhood is empty take the entry of the nearest row
    observed in that column; cells with no such row are NaN.
    """
    if not eta2 > 0:
        raise ValueError("eta2 must be > 0")
    if table is None:
        table = build_distance_table(matrix, sigma2, config.allow_self, config.min_overlap)
    return DenseMatrix(_rownn_from_table(matrix, table, eta2))


def tuning_grid(table: DistanceTable, size: int) -> np.ndarray:
    """Geometric grid between the 1st and 99th percentile of the finite positive distances."""
    d = table.dist[~np.eye(table.n, dtype=bool)]
    d = d[np.isfinite(d) & (d > 0)]
    if d.size == 0:
        return np.array([1.0])
    lo, hi = np.percentile(d, [1, 99])
    if size == 1 or lo == hi:
        return np.array([hi])
    return np.geomspace(lo, hi, size)


def rownn_tune(matrix: MaskedMatrix, config: RowNNConfig = RowNNConfig(),
               sigma2: float | None = None) -> float:
    """Pick ``eta2`` on the tuning grid by holdout MSE.

    A ``holdout_fraction`` share of the observed entries is hidden (seeded);
    distances are computed on the rest. When ``sigma2`` is not given it is
    taken from an AWNN fit of ``matrix``. Ties go to the smaller radius.
    """
    obs = np.argwhere(matrix.observed)
    if len(obs) < 10:
        raise ValueError("need at least 10 observed entries to tune eta2")
    if sigma2 is None:
        sigma2 = awnn_fit(matrix, EstimatorConfig(allow_self=config.allow_self,
                                                  min_overlap=config.min_overlap)).sigma2_hat

    rng = np.random.default_rng(config.seed)
    n_hold = max(1, int(round(config.holdout_fraction * len(obs))))
    hold = obs[rng.choice(len(obs), size=n_hold, replace=False)]
    train_mask = matrix.observed.copy()
    train_mask[hold[:, 0], hold[:, 1]] = False
    train = MaskedMatrix(np.where(train_mask, matrix.values, np.nan), train_mask)
    truth = matrix.values[hold[:, 0], hold[:, 1]]

    table = build_distance_table(train, sigma2, config.allow_self, config.min_overlap)
    grid = tuning_grid(table, config.tuning_grid_size)
    best, best_err = float(grid[0]), np.inf
    for eta2 in grid:
        pred = _rownn_from_table(train, table, eta2)[hold[:, 0], hold[:, 1]]
        ok = ~np.isnan(pred)
        if not ok.any():
            continue
        err = float(np.mean((pred[ok] - truth[ok]) ** 2))
        if err < best_err:
            best, best_err = float(eta2), err
    return best


def usvt_impute(matrix: MaskedMatrix, config: UsvtConfig = UsvtConfig()) -> DenseMatrix:
    """Universal singular value thresholding.

    Zero-fill, keep singular values above
    ``threshold_factor * sqrt(max(n, m) * p_hat)``, rescale by ``1/p_hat`` and
    clip (by default to the observed range).
    """
    p_hat = observed_fraction(matrix)
    if p_hat == 0:
        raise ValueError("no observations")
    Y = matrix.filled(0.0)
    n, m = Y.shape
    try:
        U, s, Vt = np.linalg.svd(Y, full_matrices=False)
    except np.linalg.LinAlgError as exc:
        raise RuntimeError(f"SVD failed: {exc}") from exc
    keep = s > config.threshold_factor * np.sqrt(max(n, m) * p_hat)
    W = (U[:, keep] * s[keep]) @ Vt[keep] / p_hat

    obs = matrix.values[matrix.observed]
    lo = obs.min() if config.clip_low == "auto" else float(config.clip_low)
    hi = obs.max() if config.clip_high == "auto" else float(config.clip_high)
    return DenseMatrix(np.clip(W, lo, hi))

"""Debiased row distances over commonly observed columns."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .matrix import MaskedMatrix


@dataclass(frozen=True, eq=False)
class DistanceTable:
    """Pairwise debiased row distances.

    Attributes
    ----------
    dist : (n, n) ndarray
        ``raw - 2 * sigma2`` off the diagonal; may be negative. ``+inf`` where
        two rows share fewer than ``min_overlap`` observed columns. The
        diagonal is 0 when a row may be its own neighbor, ``+inf`` otherwise.
    overlap : (n, n) ndarray of int
        Number of columns observed in both rows.
    debias : float
        The subtracted amount ``2 * sigma2``.
    """

    dist: np.ndarray
    overlap: np.ndarray
    debias: float

    @property
    def n(self) -> int:
        return self.dist.shape[0]


def raw_row_distance(matrix: MaskedMatrix, i: int, i2: int) -> tuple[float, int]:
    """Mean squared difference of rows ``i`` and ``i2`` over shared columns.

    Returns ``(inf, 0)`` when the rows have no observed column in common.
    """
    both = matrix.observed[i] & matrix.observed[i2]
    k = int(np.count_nonzero(both))
    if k == 0:
        return np.inf, 0
    diff = matrix.values[i, both] - matrix.values[i2, both]
    return float(np.sum(diff * diff) / k), k


def pairwise_raw_distances(matrix: MaskedMatrix, min_overlap: int = 1):
    """All raw (not debiased) row distances and overlap counts.

    Only the upper triangle is computed and then mirrored, so the result is
    exactly symmetric. Pairs with overlap below ``min_overlap`` get ``inf``.
    The diagonal is 0.
    """
    M = matrix.observed
    X = matrix.filled(0.0)
    Mf = M.astype(np.float64)
    n = matrix.n_rows
    overlap = (Mf @ Mf.T).round().astype(np.int64)
    sums = np.zeros((n, n))
    for i in range(n - 1):
        diff = X[i + 1:] - X[i]
        diff *= M[i + 1:] & M[i]
        sums[i, i + 1:] = np.einsum("ij,ij->i", diff, diff)
    sums = sums + sums.T
    with np.errstate(divide="ignore", invalid="ignore"):
        raw = sums / overlap
    raw[overlap < max(min_overlap, 1)] = np.inf
    np.fill_diagonal(raw, 0.0)
    return raw, overlap


def build_distance_table(matrix: MaskedMatrix, sigma2: float, allow_self: bool = True,
                         min_overlap: int = 1, raw=None) -> DistanceTable:
    """Debias the raw row distances by ``2 * sigma2``.

    ``raw`` may be a cached ``(raw, overlap)`` pair from
    :func:`pairwise_raw_distances`; only the shift is re-applied.
    Negative debiased distances are kept as they are.
    """
    if not np.isfinite(sigma2) or sigma2 < 0:
        raise ValueError("sigma2 must be finite and >= 0")
    if raw is None:
        raw = pairwise_raw_distances(matrix, min_overlap)
    raw_dist, overlap = raw
    debias = 2.0 * float(sigma2)
    dist = raw_dist - debias
    np.fill_diagonal(dist, 0.0 if allow_self else np.inf)
    dist.flags.writeable = False
    return DistanceTable(dist=dist, overlap=overlap, debias=debias)

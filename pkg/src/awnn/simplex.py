"""Simplex-constrained neighbor weights.

For a target row with candidate distances ``d`` the weights minimize::

    regularizer * ||w||^2 + sum_i w_i * d_i    s.t.  w >= 0, sum(w) = 1

The minimizer keeps a prefix of the rows sorted by distance (the proximity
set) and is affine in ``d`` on that prefix::

    w_i = 1/K - (d_i - mean_R(d)) / (2 * regularizer)
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np


class NoAdmissibleNeighbors(ValueError):
    pass


@dataclass
class WeightSolution:
    """Solution of one per-target weight problem.

    ``proximity_set`` lists the rows with positive weight, nearest first
    (ties by ascending row index). ``u`` is the water-filling level of the
    sequence handed to :func:`weight_adjuster`.
    """

    weights: dict[int, float]
    proximity_set: list[int]
    u: float
    regularizer: float
    distances: dict[int, float] = field(default_factory=dict, repr=False)

    @property
    def k(self) -> int:
        return len(self.proximity_set)

    def as_array(self, n: int) -> np.ndarray:
        w = np.zeros(n)
        for r, x in self.weights.items():
            w[r] = x
        return w

    def objective(self) -> float:
        return objective(self.weights, self.distances, self.regularizer)


def objective(weights, distances, regularizer) -> float:
    """``regularizer * ||w||^2 + <w, d>`` for dict-valued weights."""
    return sum(regularizer * w * w + w * distances[r] for r, w in weights.items() if w)


def weight_adjuster(a: Sequence[float]) -> float:
    """Water-filling level ``u`` with ``sum(max(a_i - u, 0)) == 1``.

    ``a`` must already sum to one. The entries are visited in decreasing
    order; the running mean of the excess over one fixes ``u`` as soon as
    the next entry would fall at or below it.
    """
    a = [float(x) for x in a]
    n = len(a)
    if n == 0:
        raise ValueError("empty sequence")
    total = math.fsum(a)
    if abs(total - 1.0) > 1e-9 * max(1.0, math.fsum(abs(x) for x in a)):
        raise ValueError(f"not pre-normalized (sum = {total!r})")

    b = sorted(a, reverse=True)
    s = 0.0
    u = 0.0
    for k in range(1, n + 1):
        s += b[k - 1]
        u = (s - 1.0) / k
        if k == n or b[k] <= u:
            break
    return u


def _admissible(distances):
    pairs = [(int(r), float(d)) for r, d in distances]
    finite = [(r, d) for r, d in pairs if math.isfinite(d)]
    if not finite:
        raise NoAdmissibleNeighbors("no admissible neighbors")
    # nearest first, ties by ascending row index
    finite.sort(key=lambda rd: (rd[1], rd[0]))
    return finite


def solve_weights(distances: Sequence[tuple[int, float]], regularizer: float) -> WeightSolution:
    """Closed-form minimizer via centered scores and :func:`weight_adjuster`.

    Rows with infinite distance are dropped before the scores are formed
    and get weight zero.
    """
    if not regularizer > 0 or not math.isfinite(regularizer):
        raise ValueError("regularizer must be positive and finite")
    rows = _admissible(distances)
    d = np.array([x for _, x in rows])
    a = 1.0 / len(d) - (d - d.mean()) / (2.0 * regularizer)
    u = weight_adjuster(a)
    w = np.maximum(a - u, 0.0)

    weights, prox = {}, []
    for (r, _), x in zip(rows, w):
        if x > 0:
            weights[r] = float(x)
            prox.append(r)
    return WeightSolution(weights, prox, float(u), float(regularizer),
                          {r: x for r, x in rows})


def solve_weights_degenerate(distances: Sequence[tuple[int, float]],
                             regularizer: float = 0.0) -> WeightSolution:
    """Zero-regularizer limit: split the mass evenly over the nearest rows."""
    rows = _admissible(distances)
    dmin = rows[0][1]
    prox = [r for r, d in rows if d == dmin]
    w = 1.0 / len(prox)
    return WeightSolution({r: w for r in prox}, prox, 0.0, float(regularizer),
                          {r: x for r, x in rows})


def _project_bisect(v: np.ndarray, points: int = 64) -> np.ndarray:
    # Euclidean projection onto the simplex. The threshold is bracketed by
    # repeated multisection of g(t) = sum(max(v - t, 0)) - 1, which is
    # decreasing with g(min(v) - 1) > 0 >= g(max(v)).
    lo, hi = v.min() - 1.0, v.max()
    for _ in range(20):
        taus = np.linspace(lo, hi, points + 1)
        g = np.maximum(v[None, :] - taus[:, None], 0.0).sum(axis=1) - 1.0
        k = int(np.argmax(g <= 0.0))
        lo, hi = taus[k - 1], taus[k]
        if hi - lo <= 4 * np.finfo(float).eps * max(1.0, abs(hi)):
            break
    return np.maximum(v - 0.5 * (lo + hi), 0.0)


def qp_oracle(distances: Sequence[tuple[int, float]], regularizer: float,
              max_iter: int = 100_000, tol: float = 1e-13) -> WeightSolution:
    """Projected gradient descent on the same objective.

    Independent of the sorting-based solver: the projection step finds its
    threshold by bisection. Intended as a test oracle.
    """
    if not regularizer > 0:
        raise ValueError("regularizer must be positive")
    rows = _admissible(distances)
    d = np.array([x for _, x in rows])
    step = 1.0 / (4.0 * regularizer)
    w = np.full(len(d), 1.0 / len(d))
    for _ in range(max_iter):
        w_new = _project_bisect(w - step * (2.0 * regularizer * w + d))
        if np.max(np.abs(w_new - w)) <= tol:
            w = w_new
            break
        w = w_new
    else:
        raise RuntimeError("projected gradient did not converge")

    w = w / w.sum()
    weights = {r: float(x) for (r, _), x in zip(rows, w) if x > 0}
    prox = [r for r, _ in rows if r in weights]
    return WeightSolution(weights, prox, float("nan"), float(regularizer),
                          {r: x for r, x in rows})

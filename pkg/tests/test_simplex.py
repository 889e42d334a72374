import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from awnn.simplex import (NoAdmissibleNeighbors, objective, qp_oracle, solve_weights,
                          solve_weights_degenerate, weight_adjuster)


def bisect_level(a, iters=200):
    """Independent oracle: g(u) = sum(max(a - u, 0)) - 1 is decreasing in u."""
    a = np.asarray(a, dtype=float)
    lo, hi = a.min() - 1.0, a.max()
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if np.maximum(a - mid, 0).sum() > 1.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def normalized(x):
    x = np.asarray(x, dtype=float)
    return x - x.mean() + 1.0 / len(x)


# -- weight_adjuster -------------------------------------------------------

def test_vertex():
    assert weight_adjuster([1.0, 0.0, 0.0]) == 0.0


@pytest.mark.parametrize("n", [1, 2, 7, 50])
def test_uniform(n):
    a = [1.0 / n] * n
    u = weight_adjuster(a)
    assert u == pytest.approx(0.0, abs=1e-15)
    np.testing.assert_allclose(np.maximum(np.array(a) - u, 0), a, atol=1e-15)


def test_worked_example():
    a = [0.7, 0.5, -0.2]
    assert bisect_level(a) == pytest.approx(0.1, abs=1e-12)
    u = weight_adjuster(a)
    assert u == pytest.approx(0.1, abs=1e-15)
    np.testing.assert_allclose(np.maximum(np.array(a) - u, 0), [0.6, 0.4, 0.0], atol=1e-15)


def test_errors():
    with pytest.raises(ValueError, match="empty"):
        weight_adjuster([])
    with pytest.raises(ValueError, match="not pre-normalized"):
        weight_adjuster([0.5, 0.2])


@settings(max_examples=300, deadline=None)
@given(st.lists(st.floats(-50, 50), min_size=1, max_size=60))
def test_water_filling_property(xs):
    a = normalized(xs)
    u = weight_adjuster(a)
    assert abs(np.maximum(a - u, 0).sum() - 1.0) <= 1e-12 * max(1.0, np.abs(a).max())
    assert u == pytest.approx(bisect_level(a), abs=1e-10 * max(1.0, np.abs(a).max()))


# -- solve_weights ---------------------------------------------------------

def two_row_weight(d0, d1, reg):
    # minimize reg*(w^2 + (1-w)^2) + w*d0 + (1-w)*d1 over w in [0, 1]:
    # derivative 2*reg*(2w - 1) + d0 - d1 = 0
    return min(1.0, max(0.0, 0.5 + (d1 - d0) / (4.0 * reg)))


@pytest.mark.parametrize("d0, d1, reg", [(0.0, 5.0, 0.5), (0.0, 0.3, 1.0), (2.0, 1.0, 0.7),
                                         (-1.0, -0.5, 0.1), (0.0, 5.0, 1e9)])
def test_two_rows_analytic(d0, d1, reg):
    w0 = two_row_weight(d0, d1, reg)
    for sol in (solve_weights([(0, d0), (1, d1)], reg), qp_oracle([(0, d0), (1, d1)], reg)):
        assert sol.as_array(2)[0] == pytest.approx(w0, abs=1e-9)


def test_large_regularizer_tends_to_uniform():
    w = solve_weights([(0, 0.0), (1, 5.0)], 1e9).as_array(2)
    assert w[0] > 0.5 > w[1]
    np.testing.assert_allclose(w, [0.5, 0.5], atol=1e-8)


def test_small_regularizer_picks_nearest():
    sol = solve_weights([(0, 0.0), (1, 5.0)], 0.5)
    assert sol.weights == {0: 1.0}
    assert sol.proximity_set == [0] and sol.k == 1


def test_infinite_rows_excluded():
    sol = solve_weights([(3, np.inf), (1, 0.2), (2, 0.1)], 10.0)
    assert 3 not in sol.weights
    assert sum(sol.weights.values()) == pytest.approx(1.0, abs=1e-12)


def test_no_admissible():
    with pytest.raises(NoAdmissibleNeighbors, match="no admissible neighbors"):
        solve_weights([(0, np.inf)], 1.0)
    with pytest.raises(ValueError):
        solve_weights([(0, 1.0)], 0.0)


def random_instance(rng, n_max=50):
    n = int(rng.integers(2, n_max + 1))
    d = rng.uniform(-1, 10, n)
    reg = float(rng.choice([0.01, 0.1, 1.0, 10.0]))
    return list(enumerate(d)), reg


def test_beats_every_vertex(rng):
    for _ in range(200):
        pairs, reg = random_instance(rng, 10)
        sol = solve_weights(pairs, reg)
        vertices = [reg + d for _, d in pairs]
        assert sol.objective() <= min(vertices) + 1e-12


def test_matches_qp_oracle(rng):
    for _ in range(100):
        pairs, reg = random_instance(rng)
        n = len(pairs)
        a = solve_weights(pairs, reg).as_array(n)
        b = qp_oracle(pairs, reg).as_array(n)
        assert np.max(np.abs(a - b)) <= 1e-8


def check_invariants(sol):
    w = np.array([sol.weights[r] for r in sol.proximity_set])
    d = np.array([sol.distances[r] for r in sol.proximity_set])
    assert np.all(w > 0)
    assert abs(w.sum() - 1.0) <= 1e-12
    assert sol.k == len(sol.weights) >= 1
    # nearer rows weigh at least as much
    order = np.argsort(d, kind="stable")
    assert np.all(np.diff(w[order]) <= 1e-15)
    # affine closed form on the proximity set
    if sol.regularizer > 0:
        closed = 1.0 / sol.k - (d - d.mean()) / (2.0 * sol.regularizer)
        np.testing.assert_allclose(w, closed, rtol=0, atol=1e-12)
    # rows left out are no nearer than any row kept
    out = [x for r, x in sol.distances.items() if r not in sol.weights]
    if out:
        assert min(out) >= d.max()


def test_invariants_random(rng):
    for _ in range(300):
        pairs, reg = random_instance(rng)
        check_invariants(solve_weights(pairs, reg))


def test_ties_get_equal_weight():
    sol = solve_weights([(0, 1.0), (1, 1.0), (2, 4.0)], 0.3)
    assert sol.weights[0] == sol.weights[1]


@settings(max_examples=200, deadline=None)
@given(st.lists(st.floats(-5, 5), min_size=1, max_size=30),
       st.floats(-100, 100), st.sampled_from([0.01, 0.3, 2.0]))
def test_translation_invariance(ds, c, reg):
    a = solve_weights(list(enumerate(ds)), reg).as_array(len(ds))
    b = solve_weights([(i, d + c) for i, d in enumerate(ds)], reg).as_array(len(ds))
    np.testing.assert_allclose(a, b, atol=1e-9)


# -- degenerate ------------------------------------------------------------

@pytest.mark.parametrize("pairs, expected", [
    ([(0, 0.0), (1, 2.0)], {0: 1.0}),
    ([(0, 1.0), (1, 1.0)], {0: 0.5, 1: 0.5}),
    ([(0, 3.0)], {0: 1.0}),
    ([(4, np.inf), (2, -1.0), (7, -1.0), (1, 0.0)], {2: 0.5, 7: 0.5}),
])
def test_degenerate(pairs, expected):
    assert solve_weights_degenerate(pairs).weights == expected


def test_degenerate_is_limit_of_closed_form():
    pairs = [(0, 0.5), (1, 0.2), (2, 0.9)]
    assert solve_weights(pairs, 1e-6).weights == pytest.approx(
        solve_weights_degenerate(pairs).weights)


# -- qp_oracle ---------------------------------------------------------------

def test_oracle_uniform_for_equal_distances():
    w = qp_oracle([(i, 2.0) for i in range(5)], 1.0).as_array(5)
    np.testing.assert_allclose(w, 0.2, atol=1e-12)


def test_oracle_non_convergence_is_an_error():
    with pytest.raises(RuntimeError):
        qp_oracle([(0, 0.0), (1, 1.0), (2, 0.5)], 1.0, max_iter=1, tol=0.0)


def test_objective_helper():
    assert objective({0: 0.5, 1: 0.5}, {0: 1.0, 1: 3.0}, 2.0) == pytest.approx(2.0 * 0.5 + 2.0)
    assert math.isclose(solve_weights([(0, 1.0)], 2.0).objective(), 3.0)

"""Distance backends, powered costs, and the powered triangle bounds."""

import math

import numpy as np
import pytest

from kzcoreset.errors import DomainError, InputError
from kzcoreset.metric import (
    DistanceMatrixBackend,
    EuclideanBackend,
    GraphBackend,
    PointSet,
    Solution,
    check_exponent,
    point_cost,
    powered_center_slack,
    powered_triangle_slack,
    set_cost,
)


def test_euclidean_distance_is_pythagorean():
    b = EuclideanBackend(np.array([[0.0, 0.0], [3.0, 4.0]]))
    assert b.dist(0, 1) == 5.0


def test_euclidean_accepts_coordinate_references():
    b = EuclideanBackend(np.array([[0.0, 0.0], [3.0, 4.0]]))
    assert b.dist(0, np.array([3.0, 4.0])) == 5.0
    assert b.dist(np.array([1.0, 0.0]), np.array([1.0, 0.0])) == 0.0


def test_euclidean_fractional_norm():
    b = EuclideanBackend(np.array([[0.0, 0.0], [1.0, 1.0]]), p=1.5)
    assert b.dist(0, 1) == pytest.approx(2.0 ** (1.0 / 1.5), rel=1e-12)


def test_euclidean_rejects_norms_outside_range():
    coords = np.zeros((2, 2))
    with pytest.raises(InputError):
        EuclideanBackend(coords, p=0.5)
    with pytest.raises(InputError):
        EuclideanBackend(coords, p=3.0)


def test_euclidean_one_dimensional_input_becomes_column():
    b = EuclideanBackend(np.array([0.0, 3.0]))
    assert b.dist(0, 1) == 3.0


def test_graph_shortest_path_example():
    b = GraphBackend(3, [(0, 1, 2.0), (1, 2, 3.0)])
    assert b.dist(0, 2) == 5.0
    assert b.dist(2, 0) == 5.0


def test_graph_parallel_edges_keep_minimum():
    b = GraphBackend(2, [(0, 1, 5.0), (0, 1, 2.0)])
    assert b.dist(0, 1) == 2.0


def test_graph_rejects_bad_edges():
    with pytest.raises(InputError):
        GraphBackend(2, [(0, 0, 1.0)])
    with pytest.raises(InputError):
        GraphBackend(2, [(0, 1, -1.0)])
    with pytest.raises(InputError):
        GraphBackend(2, [(0, 1, math.inf)])
    with pytest.raises(InputError):
        GraphBackend(2, [(0, 2, 1.0)])
    with pytest.raises(InputError):
        GraphBackend(2, [])


def test_graph_connectivity_contract():
    with pytest.raises(InputError):
        GraphBackend(3, [(0, 1, 1.0)])
    b = GraphBackend(3, [(0, 1, 1.0)], require_connected=False)
    assert b.dist(0, 1) == 1.0
    with pytest.raises(DomainError):
        b.dist(0, 2)


def _brute_shortest(n, edges, s, t):
    # exhaustive simple-path search, the independent check for dijkstra
    adj = {}
    for u, v, w in edges:
        adj.setdefault(u, []).append((v, w))
        adj.setdefault(v, []).append((u, w))
    best = [math.inf]

    def walk(node, seen, acc):
        if acc >= best[0]:
            return
        if node == t:
            best[0] = acc
            return
        for nxt, w in adj.get(node, ()):
            if nxt not in seen:
                walk(nxt, seen | {nxt}, acc + w)

    walk(s, {s}, 0.0)
    return best[0]


def test_graph_distances_match_exhaustive_paths():
    rng = np.random.default_rng(5)
    for _ in range(10):
        n = int(rng.integers(3, 8))
        edges = [(i, int(rng.integers(0, i)), float(rng.integers(1, 9)))
                 for i in range(1, n)]
        for _ in range(n):
            u, v = rng.choice(n, size=2, replace=False)
            edges.append((int(u), int(v), float(rng.integers(1, 9))))
        b = GraphBackend(n, edges)
        for s in range(n):
            for t in range(n):
                assert b.dist(s, t) == _brute_shortest(n, edges, s, t)


def test_matrix_backend_round_trips_euclidean_distances():
    rng = np.random.default_rng(0)
    coords = rng.normal(size=(12, 3))
    e = EuclideanBackend(coords)
    m = e.distances(list(range(12)), list(range(12)))
    b = DistanceMatrixBackend(m)
    assert np.allclose(b.distances(list(range(12)), list(range(12))), m)


def test_matrix_backend_rejections():
    with pytest.raises(InputError):
        DistanceMatrixBackend(np.array([[0.0, 1.0], [1.0, 0.5]]))
    with pytest.raises(InputError):
        DistanceMatrixBackend(np.array([[0.0, 1.0], [2.0, 0.0]]))
    with pytest.raises(InputError):
        DistanceMatrixBackend(np.array([[0.0, -1.0], [-1.0, 0.0]]))
    with pytest.raises(InputError):
        DistanceMatrixBackend(np.array([[0.0, 1.0, 3.0],
                                        [1.0, 0.0, 1.0],
                                        [3.0, 1.0, 0.0]]), spot_checks=500)


def test_metric_axioms_on_random_instances():
    rng = np.random.default_rng(7)
    coords = rng.normal(size=(120, 2))
    ids = list(range(120))
    for b in (EuclideanBackend(coords),
              EuclideanBackend(coords, p=1.3),
              DistanceMatrixBackend(EuclideanBackend(coords).distances(ids, ids))):
        m = b.distances(ids, ids)
        assert np.allclose(m, m.T, atol=1e-9)
        assert np.abs(np.diag(m)).max() <= 1e-9
        i, j, k = (rng.integers(0, 120, size=10000) for _ in range(3))
        assert np.all(m[i, j] <= m[i, k] + m[k, j] + 1e-9)


def test_graph_metric_axioms():
    rng = np.random.default_rng(11)
    n = 40
    edges = [(i, int(rng.integers(0, i)), float(rng.integers(1, 20)))
             for i in range(1, n)]
    edges += [(int(u), int(v), float(rng.integers(1, 20)))
              for u, v in rng.integers(0, n, size=(40, 2)) if u != v]
    b = GraphBackend(n, edges)
    ids = list(range(n))
    m = b.distances(ids, ids)
    assert np.array_equal(m, m.T)
    assert np.abs(np.diag(m)).max() == 0.0
    i, j, k = (rng.integers(0, n, size=10000) for _ in range(3))
    assert np.all(m[i, j] <= m[i, k] + m[k, j] + 1e-9)


def test_check_exponent():
    check_exponent(1)
    check_exponent(4)
    for bad in (0, -1, 1.5, True):
        with pytest.raises(InputError):
            check_exponent(bad)


def test_point_cost_examples():
    b = EuclideanBackend(np.array([[0.0, 0.0], [3.0, 4.0], [1.0, 0.0]]))
    assert point_cost(b, 0, Solution([1, 2]), 2) == 1.0
    assert point_cost(b, 1, Solution([1]), 3) == 0.0
    line = EuclideanBackend(np.array([0.0, 2.0]))
    assert point_cost(line, 0, Solution([1]), 3) == 8.0


def test_set_cost_examples():
    b = EuclideanBackend(np.array([0.0, 1.0, 2.0]))
    assert set_cost(PointSet(b, ids=[1, 2]), Solution([0]), 2) == 5.0
    assert set_cost(PointSet(b, ids=[0]), Solution([0]), 2) == 0.0
    w = PointSet(b, ids=[1, 2], weights=np.array([2.0, 3.0]))
    # costs 1 and 4 under weights 2 and 3
    assert set_cost(w, Solution([0]), 2) == 14.0


def test_powered_triangle_slack_examples():
    line = EuclideanBackend(np.array([0.0, 1.0, 2.0]))
    lhs, rhs = powered_triangle_slack(line, 0, 1, 0, 2, 1.0)
    assert (lhs, rhs) == (1.0, 2.0)
    lhs, rhs = powered_triangle_slack(line, 0, 2, 1, 1, 0.5)
    assert (lhs, rhs) == (2.0, 2.0)
    assert lhs <= rhs + 1e-9


def test_powered_center_slack_holds_on_random_data():
    rng = np.random.default_rng(3)
    coords = rng.normal(size=(60, 3)) * 4.0
    b = EuclideanBackend(coords)
    S = Solution([0, 1, 2])
    for z in (1, 2, 3):
        for eps in (0.1, 0.5, 1.0):
            for _ in range(300):
                a, c = rng.integers(3, 60, size=2)
                lhs, rhs = powered_center_slack(b, int(a), int(c), S, z, eps)
                assert lhs <= rhs + 1e-9 * max(1.0, rhs)


def test_solution_validation():
    with pytest.raises(InputError):
        Solution([])
    assert Solution([4, 7]).k == 2

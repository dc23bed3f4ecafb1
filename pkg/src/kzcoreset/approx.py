"""Seed solution and the per-point clustering context the pipeline consumes."""

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InputError
from .metric import EuclideanBackend, PointSet, Solution, check_exponent, set_cost


def _seed_rng(seed, spawn_key=()):
    """Counter-based generator; distinct spawn keys give independent streams."""
    ss = np.random.SeedSequence(int(seed), spawn_key=tuple(int(x) for x in spawn_key))
    return np.random.Generator(np.random.Philox(ss))


def distinct_point_count(P):
    """Number of distinct client locations (distinct coordinates for
    Euclidean backends, distinct ambient ids otherwise)."""
    if isinstance(P.backend, EuclideanBackend):
        return int(np.unique(P.backend.coords[P.ids], axis=0).shape[0])
    return int(np.unique(P.ids).size)


@dataclass
class ClusteringContext:
    """Clusters induced by a seed solution, with every aggregate the
    decomposition and samplers need.

    Sizes and costs are weighted, so integer-weighted inputs behave exactly
    like duplicated unit points.  Clusters that would be empty are dropped
    from the solution before aggregates are computed; a cluster whose cost is
    zero carries delta = 0 as a sentinel.
    """

    points: PointSet
    solution: Solution
    assign: np.ndarray
    dist_to_A: np.ndarray
    cost_to_A: np.ndarray
    cluster_size: np.ndarray
    cluster_cost: np.ndarray
    delta: np.ndarray
    z: int
    cluster_members: list = field(repr=False, default=None)

    @property
    def k(self):
        return self.solution.k

    def total_cost(self):
        return math.fsum(self.cluster_cost)


def dz_seed(P, k, z, seed):
    """Adaptive D^z seeding: k centers drawn from the clients.

    The first center is drawn proportionally to weight, every next one
    proportionally to w(p) * cost(p, chosen so far).  If all remaining mass is
    zero (every client coincides with a chosen center) the draw falls back to
    uniform over unchosen clients.  Deterministic given the seed.

    Args:
        P: client PointSet.
        k: number of centers, at most the number of distinct client locations.
        z: cost exponent.
        seed: 64-bit integer.

    Returns:
        Solution whose centers are ambient point ids.
    """
    z = check_exponent(z)
    if isinstance(k, bool) or int(k) != k or k < 1:
        raise InputError(f"k must be a positive integer, got {k!r}")
    k = int(k)
    if distinct_point_count(P) < k:
        raise InputError(f"need at least {k} distinct points, have fewer")
    rng = _seed_rng(seed)
    n = P.n
    chosen = []
    best = None
    for _ in range(k):
        if best is None:
            scores = P.weights.copy()
        else:
            scores = P.weights * best
        total = scores.sum()
        if total > 0:
            pos = int(rng.choice(n, p=scores / total))
        else:
            pool = np.setdiff1d(np.arange(n), np.asarray(chosen, dtype=np.int64))
            pos = int(pool[rng.integers(pool.size)])
        chosen.append(pos)
        d = P.backend.distances(P.ids, [int(P.ids[pos])])[:, 0] ** z
        best = d if best is None else np.minimum(best, d)
    return Solution([int(P.ids[pos]) for pos in chosen])


def _exact_cost(P, centers, z):
    return set_cost(P, Solution(centers), z)


def local_search_refine(P, S, z, max_swaps):
    """Single-swap hill climbing over client-indexed candidate centers.

    Each sweep scores every (center out, client in) swap and applies the best
    strictly improving one; the search stops after a sweep without
    improvement or after max_swaps sweeps.  The returned cost never exceeds
    the input cost.  Each sweep costs O(n^2 k) distance work, so this is meant
    for desk-scale instances.
    """
    z = check_exponent(z)
    if int(max_swaps) != max_swaps or max_swaps < 0:
        raise InputError("max_swaps must be a nonnegative integer")
    centers = [int(c) for c in S.centers]
    if max_swaps == 0:
        return Solution(list(S.centers))
    w = P.weights
    cand_ids = np.unique(P.ids)
    cur_cost = _exact_cost(P, centers, z)
    for _ in range(int(max_swaps)):
        k = len(centers)
        d = P.backend.distances(P.ids, centers) ** z
        order = np.argsort(d, axis=1, kind="stable")
        d1 = d[np.arange(P.n), order[:, 0]]
        assign = order[:, 0]
        d2 = d[np.arange(P.n), order[:, 1]] if k > 1 else np.full(P.n, np.inf)
        # cost of each point if center i were removed
        without = np.where(assign[None, :] == np.arange(k)[:, None], d2[None, :], d1[None, :])
        best_gain = None
        best_swap = None
        for c in cand_ids:
            c = int(c)
            if c in centers:
                continue
            dc = P.backend.distances(P.ids, [c])[:, 0] ** z
            costs = np.minimum(without, dc[None, :]) @ w
            i = int(np.argmin(costs))
            if best_gain is None or costs[i] < best_gain:
                best_gain = float(costs[i])
                best_swap = (i, c)
        if best_swap is None:
            break
        trial = list(centers)
        trial[best_swap[0]] = best_swap[1]
        trial_cost = _exact_cost(P, trial, z)
        if trial_cost < cur_cost:
            centers = trial
            cur_cost = trial_cost
        else:
            break
    return Solution(centers)


def build_context(P, A, z):
    """Assign clients to the nearest center of A and aggregate per cluster.

    Ties go to the lowest center index.  Centers whose cluster has zero
    weighted size are removed, so every surviving cluster_size is positive.
    Aggregates are exactly rounded sums over members in ascending client
    order.
    """
    z = check_exponent(z)
    d = P.backend.distances(P.ids, A.centers)
    assign = np.argmin(d, axis=1)
    sizes = np.bincount(assign, weights=P.weights, minlength=A.k)
    keep = np.flatnonzero(sizes > 0)
    if keep.size < A.k:
        remap = -np.ones(A.k, dtype=np.int64)
        remap[keep] = np.arange(keep.size)
        centers = [A.centers[int(i)] for i in keep]
        d = d[:, keep]
        assign = remap[assign]
    else:
        centers = list(A.centers)
    kk = len(centers)
    rows = np.arange(P.n)
    dist_to_A = d[rows, assign]
    cost_to_A = dist_to_A ** z
    members = [np.flatnonzero(assign == i) for i in range(kk)]
    cluster_size = np.array([math.fsum(P.weights[m]) for m in members])
    cluster_cost = np.array(
        [math.fsum(P.weights[m] * cost_to_A[m]) for m in members]
    )
    delta = np.where(cluster_cost > 0, cluster_cost / cluster_size, 0.0)
    return ClusteringContext(
        points=P,
        solution=Solution(centers),
        assign=assign,
        dist_to_A=dist_to_A,
        cost_to_A=cost_to_A,
        cluster_size=cluster_size,
        cluster_cost=cluster_cost,
        delta=delta,
        z=z,
        cluster_members=members,
    )

"""Distances and powered clustering costs over pluggable metric backends.

Three backends share one interface: Euclidean point clouds under an l_p norm
with p in [1, 2], explicit symmetric distance matrices, and weighted
undirected graphs under shortest-path distance.  Point refs are integer
indices into the backend's ambient point set; Euclidean backends additionally
accept raw coordinate vectors wherever a center is expected.
"""

import math
import threading

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components, dijkstra
from scipy.spatial.distance import cdist

from .errors import DomainError, InputError

# Tolerance for metric-axiom spot checks on loaded matrices.
AXIOM_TOL = 1e-9


def check_exponent(z):
    """Validate the cost exponent and return it as an int."""
    if isinstance(z, bool) or int(z) != z or z < 1:
        raise InputError(f"cost exponent z must be a positive integer, got {z!r}")
    return int(z)


class MetricBackend:
    """Common interface for distance queries.

    Subclasses are immutable after construction, so concurrent readers are
    safe; the graph backend's row cache uses an insert-once discipline.
    """

    size = 0

    def dist(self, a, b):
        """Distance between two refs."""
        raise NotImplementedError

    def distances(self, ids, centers):
        """Matrix of distances from each point index in `ids` to each center.

        Args:
            ids: iterable of ambient point indices.
            centers: list of center refs.

        Returns:
            float array of shape (len(ids), len(centers)).
        """
        raise NotImplementedError

    def describe(self):
        """Short stable string used in fingerprints."""
        raise NotImplementedError

    def _check_index(self, i):
        if isinstance(i, bool) or int(i) != i:
            raise InputError(f"point ref {i!r} is not an integer index")
        i = int(i)
        if not 0 <= i < self.size:
            raise InputError(f"point index {i} outside [0, {self.size})")
        return i


class EuclideanBackend(MetricBackend):
    """Point cloud in R^d under the Minkowski l_p norm, p in [1, 2]."""

    def __init__(self, coords, p=2.0):
        coords = np.asarray(coords, dtype=float)
        if coords.ndim == 1:
            coords = coords[:, None]
        if coords.ndim != 2 or coords.shape[0] == 0:
            raise InputError("coords must be a nonempty 2-d array")
        if not np.all(np.isfinite(coords)):
            raise InputError("coords must be finite")
        if not 1.0 <= float(p) <= 2.0:
            raise InputError(f"norm exponent p must lie in [1, 2], got {p}")
        self.coords = coords
        self.p = float(p)
        self.size = coords.shape[0]

    def _ref_coords(self, ref):
        if isinstance(ref, (int, np.integer)) and not isinstance(ref, bool):
            return self.coords[self._check_index(ref)]
        v = np.asarray(ref, dtype=float)
        if v.shape != (self.coords.shape[1],):
            raise InputError(
                f"center ref has shape {v.shape}, expected ({self.coords.shape[1]},)"
            )
        if not np.all(np.isfinite(v)):
            raise InputError("center coordinates must be finite")
        return v

    def center_coords(self, centers):
        return np.vstack([self._ref_coords(c) for c in centers])

    def dist(self, a, b):
        diff = np.abs(self._ref_coords(a) - self._ref_coords(b))
        if self.p == 2.0:
            return float(math.sqrt(float(np.dot(diff, diff))))
        return float(np.sum(diff ** self.p) ** (1.0 / self.p))

    def distances(self, ids, centers):
        pts = self.coords[np.asarray(ids, dtype=np.int64)]
        ctr = self.center_coords(centers)
        if self.p == 2.0:
            return cdist(pts, ctr)
        return cdist(pts, ctr, metric="minkowski", p=self.p)

    def describe(self):
        return f"euclidean(n={self.size},d={self.coords.shape[1]},p={self.p!r})"


class DistanceMatrixBackend(MetricBackend):
    """Explicit n x n distance matrix.

    Symmetry and the zero diagonal are required within AXIOM_TOL and then made
    exact; the triangle inequality is spot-checked on random triples at load.
    """

    def __init__(self, matrix, spot_checks=200, check_seed=0):
        m = np.asarray(matrix, dtype=float)
        if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] == 0:
            raise InputError("distance matrix must be square and nonempty")
        if not np.all(np.isfinite(m)):
            raise InputError("distance matrix must be finite")
        if np.any(m < 0):
            raise InputError("distance matrix entries must be nonnegative")
        if np.any(np.abs(np.diagonal(m)) > AXIOM_TOL):
            raise InputError("distance matrix diagonal must be zero")
        if np.any(np.abs(m - m.T) > AXIOM_TOL):
            raise InputError("distance matrix must be symmetric within 1e-9")
        m = 0.5 * (m + m.T)
        np.fill_diagonal(m, 0.0)
        n = m.shape[0]
        if n >= 3 and spot_checks > 0:
            rng = np.random.default_rng(check_seed)
            triples = rng.integers(0, n, size=(spot_checks, 3))
            a, b, c = triples.T
            if np.any(m[a, b] > m[a, c] + m[c, b] + AXIOM_TOL):
                raise InputError("distance matrix violates the triangle inequality")
        self.matrix = m
        self.size = n

    def dist(self, a, b):
        return float(self.matrix[self._check_index(a), self._check_index(b)])

    def distances(self, ids, centers):
        cols = np.asarray([self._check_index(c) for c in centers], dtype=np.int64)
        rows = np.asarray(ids, dtype=np.int64)
        return self.matrix[np.ix_(rows, cols)]

    def describe(self):
        return f"matrix(n={self.size})"


class GraphBackend(MetricBackend):
    """Weighted undirected graph under shortest-path distance.

    Rows of single-source distances are computed on demand and memoized, one
    row per queried source; the cache insert is guarded so concurrent readers
    agree on the stored row.
    """

    def __init__(self, n_vertices, edges, require_connected=True):
        if int(n_vertices) != n_vertices or n_vertices < 1:
            raise InputError("vertex count must be a positive integer")
        n = int(n_vertices)
        best = {}
        for idx, (u, v, w) in enumerate(edges):
            if int(u) != u or int(v) != v:
                raise InputError(f"edge {idx}: endpoints must be integers")
            u, v = int(u), int(v)
            if not (0 <= u < n and 0 <= v < n):
                raise InputError(f"edge {idx}: endpoint outside [0, {n})")
            if u == v:
                raise InputError(f"edge {idx}: self loops are not allowed")
            w = float(w)
            if not (w > 0) or not math.isfinite(w):
                raise InputError(f"edge {idx}: weight must be positive and finite")
            key = (min(u, v), max(u, v))
            if key not in best or w < best[key]:
                best[key] = w
        if best:
            uv = np.array(sorted(best), dtype=np.int64)
            ws = np.array([best[tuple(k)] for k in uv], dtype=float)
            rows = np.concatenate([uv[:, 0], uv[:, 1]])
            cols = np.concatenate([uv[:, 1], uv[:, 0]])
            data = np.concatenate([ws, ws])
        else:
            rows = cols = np.array([], dtype=np.int64)
            data = np.array([], dtype=float)
        self._adj = csr_matrix((data, (rows, cols)), shape=(n, n))
        self.size = n
        self.n_edges = len(best)
        if require_connected and n > 1:
            ncomp, _ = connected_components(self._adj, directed=False)
            if ncomp != 1:
                raise InputError("graph must be connected")
        self._rows = {}
        self._lock = threading.Lock()

    def _row(self, s):
        row = self._rows.get(s)
        if row is None:
            computed = dijkstra(self._adj, directed=False, indices=s)
            with self._lock:
                row = self._rows.setdefault(s, computed)
        return row

    def dist(self, a, b):
        d = float(self._row(self._check_index(a))[self._check_index(b)])
        if not math.isfinite(d):
            raise DomainError(f"vertices {a} and {b} are disconnected")
        return d

    def distances(self, ids, centers):
        cols = [self._check_index(c) for c in centers]
        block = np.vstack([self._row(c) for c in cols])
        out = block[:, np.asarray(ids, dtype=np.int64)].T
        if not np.all(np.isfinite(out)):
            raise DomainError("query touches a disconnected vertex pair")
        return out

    def describe(self):
        return f"graph(n={self.size},m={self.n_edges})"


class PointSet:
    """Weighted clients over a backend.

    Client i refers to ambient point ids[i]; weights are strictly positive.
    """

    def __init__(self, backend, ids=None, weights=None):
        if not isinstance(backend, MetricBackend):
            raise InputError("backend must be a MetricBackend")
        if ids is None:
            ids = np.arange(backend.size, dtype=np.int64)
        else:
            ids = np.asarray(ids, dtype=np.int64)
        if ids.ndim != 1 or ids.size == 0:
            raise InputError("a point set needs at least one client")
        if np.any(ids < 0) or np.any(ids >= backend.size):
            raise InputError("client id outside the backend's ambient range")
        if weights is None:
            weights = np.ones(ids.size, dtype=float)
        else:
            weights = np.asarray(weights, dtype=float)
        if weights.shape != ids.shape:
            raise InputError("weights must align with client ids")
        if not np.all(np.isfinite(weights)) or np.any(weights <= 0):
            raise InputError("all weights must be positive and finite")
        self.backend = backend
        self.ids = ids
        self.weights = weights

    @property
    def n(self):
        return int(self.ids.size)

    def reweighted(self, weights):
        return PointSet(self.backend, self.ids.copy(), weights)


class Solution:
    """A set of k candidate centers."""

    def __init__(self, centers):
        centers = list(centers)
        if len(centers) == 0:
            raise InputError("a solution needs at least one center")
        self.centers = centers

    @property
    def k(self):
        return len(self.centers)


def point_cost(backend, p, solution, z):
    """min over centers of dist(p, s)^z for a single point ref."""
    z = check_exponent(z)
    if solution.k == 0:
        raise InputError("empty solution")
    return float(min(backend.dist(p, c) for c in solution.centers) ** z)


def nearest_powers(P, solution, z):
    """Per-client min_s dist^z as a vector, ascending client order."""
    z = check_exponent(z)
    d = P.backend.distances(P.ids, solution.centers)
    return d.min(axis=1) ** z


def set_cost(P, solution, z):
    """Weighted (k,z)-clustering cost of P under the given centers.

    The sum is exactly rounded (math.fsum), so the result is independent of
    accumulation order and bit-stable across runs.
    """
    return math.fsum(P.weights * nearest_powers(P, solution, z))


def powered_triangle_slack(backend, a, b, c, z, eps):
    """Both sides of the powered triangle inequality through waypoint c.

    Returns (lhs, rhs) with lhs = dist(a,b)^z and
    rhs = (1+eps)^(z-1) dist(a,c)^z + ((1+eps)/eps)^(z-1) dist(b,c)^z;
    the caller asserts lhs <= rhs.
    """
    z = check_exponent(z)
    if not eps > 0:
        raise InputError("eps must be positive")
    lhs = backend.dist(a, b) ** z
    rhs = (1.0 + eps) ** (z - 1) * backend.dist(a, c) ** z + (
        (1.0 + eps) / eps
    ) ** (z - 1) * backend.dist(b, c) ** z
    return lhs, rhs


def powered_center_slack(backend, a, b, solution, z, eps):
    """Both sides of the powered inequality for costs against a center set.

    Returns (lhs, rhs) with lhs = |cost(a,S) - cost(b,S)| and
    rhs = eps * cost(a,S) + ((2z+eps)/eps)^(z-1) * dist(a,b)^z.
    """
    z = check_exponent(z)
    if not eps > 0:
        raise InputError("eps must be positive")
    ca = point_cost(backend, a, solution, z)
    cb = point_cost(backend, b, solution, z)
    lhs = abs(ca - cb)
    rhs = eps * ca + ((2.0 * z + eps) / eps) ** (z - 1) * backend.dist(a, b) ** z
    return lhs, rhs

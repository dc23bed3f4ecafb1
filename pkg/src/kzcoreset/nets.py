"""Greedy nets, candidate centroid sets, and their desk-scale verifier.

A gamma-net keeps members pairwise further than gamma apart while covering
every host point within gamma.  Candidate centers union, for every client p
at distance r from the seed centers, a net at granularity (eps/4z) r of the
ball of radius (8z/eps) r around p, plus one far sentinel if some indexed
point lies outside every (10z/eps) r ball.  Finite backends net the indexed
points inside the ball; coordinate backends lay a global lattice over it, so
the covering holds over the whole region and not just where data happens to
sit.  Arbitrary center sets are then snapped onto candidates and the
per-point cost drift is checked behind the standard gate.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InputError, InvariantError
from .metric import EuclideanBackend, Solution, check_exponent

DEFAULT_CANDIDATE_CAP = 500
DEFAULT_LATTICE_BUDGET = 400_000


@dataclass
class Net:
    """Greedy gamma-net over a host point list."""

    gamma: float
    members: np.ndarray
    host: np.ndarray


def greedy_net(backend, host_ids, gamma):
    """Build a gamma-net by ascending-index greedy insertion.

    A host point is admitted exactly when it lies strictly further than gamma
    from every point admitted before it; both net invariants then hold by
    construction and are asserted before returning.

    Args:
        backend: MetricBackend the ids refer to.
        host_ids: iterable of ambient point indices.
        gamma: net radius, positive.

    Returns:
        Net over the ascending-sorted host.
    """
    if not gamma > 0:
        raise InputError("gamma must be positive")
    host = np.unique(np.asarray(list(host_ids), dtype=np.int64))
    if host.size == 0:
        raise InputError("greedy_net needs a nonempty host")
    mind = np.full(host.size, np.inf)
    members = []
    for t in range(host.size):
        if mind[t] > gamma:
            members.append(int(host[t]))
            mind = np.minimum(mind, backend.distances(host, [int(host[t])])[:, 0])
    members = np.asarray(members, dtype=np.int64)
    if np.max(mind) > gamma:
        raise InvariantError("net fails to cover its host")
    if members.size > 1:
        pair = backend.distances(members, [int(m) for m in members])
        off = pair[~np.eye(members.size, dtype=bool)]
        if np.min(off) <= gamma:
            raise InvariantError("net members are not separated")
    return Net(gamma=float(gamma), members=members, host=host)


def _key(ref):
    """Hashable exact identity for a candidate ref (index or coordinates)."""
    if isinstance(ref, (int, np.integer)) and not isinstance(ref, bool):
        return int(ref)
    return tuple(float(v) for v in np.asarray(ref, dtype=float))


def _dists_to(backend, refs, s):
    """Distances from each candidate ref to one center ref."""
    if isinstance(backend, EuclideanBackend):
        diff = np.abs(backend.center_coords(refs) - backend._ref_coords(s)[None, :])
        if backend.p == 2.0:
            return np.sqrt(np.einsum("ij,ij->i", diff, diff))
        return np.sum(diff ** backend.p, axis=1) ** (1.0 / backend.p)
    return backend.distances(np.asarray(refs, dtype=np.int64), [s])[:, 0]


def _lattice_members(x, radius, gamma, p):
    """Lattice points of pitch h covering the ball around x within 2*gamma.

    The pitch is the largest h with half-cell reach h*d^(1/p)/2 <= gamma that
    still keeps members separated by more than gamma; near the ball boundary
    the nearest interior lattice point may sit up to one extra reach away,
    which the snapping error budget absorbs.
    """
    d = x.size
    reach = float(d) ** (1.0 / p)
    h = max(2.0 * gamma / reach, gamma * (1.0 + 2.0 ** -20))
    lo = np.ceil((x - radius) / h).astype(np.int64)
    hi = np.floor((x + radius) / h).astype(np.int64)
    axes = [np.arange(a, b + 1, dtype=np.int64) for a, b in zip(lo, hi)]
    grid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, d)
    pts = grid.astype(float) * h
    diff = np.abs(pts - x[None, :])
    dist = np.sum(diff ** p, axis=1) ** (1.0 / p)
    pts = pts[dist <= radius]
    order = np.lexsort(pts.T[::-1])
    return pts[order]


def _lattice_cell_count(x, radius, gamma, p):
    d = x.size
    reach = float(d) ** (1.0 / p)
    h = max(2.0 * gamma / reach, gamma * (1.0 + 2.0 ** -20))
    lo = np.ceil((x - radius) / h)
    hi = np.floor((x + radius) / h)
    return int(np.prod(np.maximum(hi - lo + 1.0, 0.0)))


@dataclass
class CentroidCandidates:
    """Union of per-anchor nets plus an optional far sentinel.

    Candidate refs are point indices on finite backends and exact coordinate
    tuples on coordinate backends.  zero_keys marks candidates that coincide
    with a zero-cost client; snapping never creates such a center from afar,
    since doing so would manufacture a zero-cost match the original solution
    does not have.
    """

    members: list
    anchor_of: dict  # candidate key -> first client position that produced it
    nets: dict  # client position -> list of candidate refs
    zero_keys: set
    s_f: object  # ambient id or None
    eps: float
    z: float
    extras: dict = field(default_factory=dict)

    @property
    def size(self):
        return len(self.members)


def build_candidates(P, ctx, eps, z, cap=DEFAULT_CANDIDATE_CAP,
                     lattice_budget=DEFAULT_LATTICE_BUDGET):
    """Construct the candidate center set for every client anchor.

    Candidate counts grow like n * (z/eps)^O(d), so construction refuses
    instances with more than `cap` clients, and coordinate backends also
    refuse when the lattice would exceed `lattice_budget` points.

    Args:
        P: client PointSet.
        ctx: ClusteringContext over P.
        eps: accuracy parameter, positive.
        z: cost exponent.
        cap: client-count guard.
        lattice_budget: total synthesized-point guard.

    Returns:
        CentroidCandidates.
    """
    z = check_exponent(z)
    if not eps > 0:
        raise InputError("eps must be positive")
    if P.n > cap:
        raise InputError(
            f"candidate construction is capped at {cap} clients, got {P.n}"
        )
    backend = P.backend
    euclid = isinstance(backend, EuclideanBackend)
    anchor_ids = [int(P.ids[p]) for p in range(P.n)]

    nets = {}
    if euclid:
        xs = backend.coords[P.ids]
        if float(xs.shape[1]) ** (1.0 / backend.p) > 4.0:
            raise InputError(
                "lattice candidates need d^(1/p) <= 4; reduce the dimension"
            )
        counts = 0
        for p in range(P.n):
            r = float(ctx.dist_to_A[p])
            if r == 0.0:
                continue
            counts += _lattice_cell_count(
                xs[p], (8.0 * z / eps) * r, (eps / (4.0 * z)) * r, backend.p
            )
        if counts > lattice_budget:
            raise InputError(
                f"lattice candidates would need about {counts} points, over "
                f"the budget of {lattice_budget}; raise eps or shrink the "
                "instance"
            )
        for p in range(P.n):
            r = float(ctx.dist_to_A[p])
            if r == 0.0:
                nets[p] = [tuple(float(v) for v in xs[p])]
                continue
            pts = _lattice_members(
                xs[p], (8.0 * z / eps) * r, (eps / (4.0 * z)) * r, backend.p
            )
            nets[p] = [tuple(float(v) for v in row) for row in pts]
    else:
        ambient = np.arange(backend.size, dtype=np.int64)
        d_all = backend.distances(ambient, anchor_ids)  # (ambient, clients)
        for p in range(P.n):
            r = float(ctx.dist_to_A[p])
            if r == 0.0:
                nets[p] = [anchor_ids[p]]
                continue
            ball = ambient[d_all[:, p] <= (8.0 * z / eps) * r]
            net = greedy_net(backend, ball, (eps / (4.0 * z)) * r)
            nets[p] = [int(m) for m in net.members]

    if euclid:
        d_sf = backend.distances(
            np.arange(backend.size, dtype=np.int64), anchor_ids
        )
    else:
        d_sf = d_all
    radius10 = (10.0 * z / eps) * np.asarray(ctx.dist_to_A)[None, :]
    far = np.flatnonzero(np.all(d_sf > radius10, axis=1))
    s_f = int(far[0]) if far.size else None

    anchor_of = {}
    members = []
    for p in range(P.n):
        for ref in nets[p]:
            k = _key(ref)
            if k not in anchor_of:
                anchor_of[k] = p
                members.append(ref)
    if s_f is not None and _key(s_f if not euclid else backend.coords[s_f]) not in anchor_of:
        sref = s_f if not euclid else tuple(float(v) for v in backend.coords[s_f])
        anchor_of[_key(sref)] = None
        members.append(sref)

    zero_keys = set()
    for p in range(P.n):
        if float(ctx.cost_to_A[p]) == 0.0:
            zk = _key(anchor_ids[p] if not euclid else backend.coords[P.ids[p]])
            if zk in anchor_of:
                zero_keys.add(zk)
    members.sort(key=_key)
    return CentroidCandidates(
        members=members, anchor_of=anchor_of, nets=nets, zero_keys=zero_keys,
        s_f=s_f, eps=float(eps), z=z,
    )


def _candidate_identity(backend, cands, s):
    """Candidate ref exactly matching a center ref, else None."""
    if isinstance(backend, EuclideanBackend):
        k = _key(backend._ref_coords(s))
    else:
        k = _key(s)
    if k in cands.anchor_of:
        return s if not isinstance(s, np.ndarray) else k
    if not isinstance(backend, EuclideanBackend) and k == cands.s_f:
        return cands.s_f
    return None


def snap_center(P, ctx, cands, s):
    """Snap one center onto the candidate set.

    A candidate snaps to itself.  Otherwise the anchor q minimizing
    dist(q, A) + dist(q, s) among clients whose net ball actually reaches s
    (dist(q, s) <= (8z/eps) dist(q, A), dist(q, A) > 0) nominates its net,
    and the nearest member not sitting exactly on a zero-cost client wins;
    with no such anchor the far sentinel is used, and None is returned when
    that is absent too.
    """
    ident = _candidate_identity(P.backend, cands, s)
    if ident is not None:
        return ident
    z, eps = cands.z, cands.eps
    d_a = np.asarray(ctx.dist_to_A)
    d_ps = P.backend.distances(P.ids, [s])[:, 0]
    qualifying = np.flatnonzero((d_a > 0.0) & (d_ps <= (8.0 * z / eps) * d_a))
    if qualifying.size == 0:
        return cands.s_f
    score = d_a[qualifying] + d_ps[qualifying]
    q = int(qualifying[int(np.argmin(score))])
    refs = [r for r in cands.nets[q] if _key(r) not in cands.zero_keys]
    if not refs:
        return cands.s_f
    d_net = _dists_to(P.backend, refs, s)
    return refs[int(np.argmin(d_net))]


@dataclass
class CentroidReport:
    """Outcome of the centroid-set verifier."""

    solutions: int
    gated_checks: int
    violations: int
    worst_ratio: float
    snapped_empty: int
    tolerance: float


def _random_solutions(P, k, trials, seed):
    out = []
    backend = P.backend
    for t in range(trials):
        rng = np.random.Generator(
            np.random.Philox(np.random.SeedSequence(int(seed), spawn_key=(11, t)))
        )
        if isinstance(backend, EuclideanBackend):
            lo = backend.coords.min(axis=0)
            hi = backend.coords.max(axis=0)
            span = np.maximum(hi - lo, 1e-12)
            centers = [
                rng.uniform(lo - 0.25 * span, hi + 0.25 * span) for _ in range(k)
            ]
        else:
            centers = [
                int(c)
                for c in rng.choice(backend.size, size=min(k, backend.size), replace=False)
            ]
        out.append(Solution(centers))
    return out


def verify_centroid_property(P, ctx, cands, eps, z, trials=20, seed=0, solutions=None):
    """Check the snapped-solution cost drift behind the standard gate.

    For each solution S, every center is snapped onto the candidates giving
    S~.  A client p is gated in when cost(p, S) or cost(p, S~) is at most
    (8z/eps)^z * cost(p, A); each gated client must then satisfy
    |cost(p, S) - cost(p, S~)| <= eps * (cost(p, S) + cost(p, A)).  The
    report carries the violation count and the worst observed ratio.
    """
    z = check_exponent(z)
    if solutions is None:
        solutions = _random_solutions(P, ctx.k, trials, seed)
    gate_factor = (8.0 * z / eps) ** z
    gated = violations = empties = 0
    worst = 0.0
    for S in solutions:
        snapped = [snap_center(P, ctx, cands, s) for s in S.centers]
        snapped = [s for s in snapped if s is not None]
        if not snapped:
            empties += 1
            continue
        S_tilde = Solution(snapped)
        d = P.backend.distances(P.ids, S.centers)
        c_s = d.min(axis=1) ** z
        d2 = P.backend.distances(P.ids, S_tilde.centers)
        c_t = d2.min(axis=1) ** z
        c_a = ctx.cost_to_A
        gate = (c_s <= gate_factor * c_a) | (c_t <= gate_factor * c_a)
        diff = np.abs(c_s - c_t)
        denom = c_s + c_a
        for p in np.flatnonzero(gate):
            gated += 1
            if diff[p] == 0.0:
                continue
            if denom[p] == 0.0:
                violations += 1
                worst = math.inf
                continue
            ratio = diff[p] / denom[p]
            worst = max(worst, float(ratio))
            if diff[p] > eps * denom[p]:
                violations += 1
    return CentroidReport(
        solutions=len(solutions),
        gated_checks=gated,
        violations=violations,
        worst_ratio=worst,
        snapped_empty=empties,
        tolerance=float(eps),
    )

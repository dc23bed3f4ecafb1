"""Partition clients into inner/main/outer rings and cost-band groups.

Every client lands in exactly one label.  With Delta_i the average cost of
its cluster under the seed solution:

  inner:  cost(p, A) <= (eps/z)^(2z) * Delta_i, or the cluster has zero cost;
  outer:  cost(p, A) >= (z/eps)^(2z) * Delta_i;
  main:   everything between, in the ring j with
          2^j * Delta_i <= cost(p, A) < 2^(j+1) * Delta_i  (half-open).

Rings at one level j are bucketed across clusters by how their cost compares
to the level's per-cluster average: ring (i, j) sits in band b when

  edge(b) <= cost(R_ij, A) < edge(b+1),  edge(b) = (eps/4z)^z * 2^b * cost(R_j, A)/k.

Bands b <= 0 collapse into the discard-bound min class, bands
b >= z*log2(4z/eps) into the max class.  The per-cluster outer sets are
bucketed the same way against the total outer cost.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import InputError, InvariantError

INNER, MAIN, OUTER = 0, 1, 2

BAND_MIN = "min"
BAND_MAX = "max"


def ring_index(cost_pA, delta):
    """Ring index j with 2^j * delta <= cost_pA < 2^(j+1) * delta.

    Returns None (the inner sentinel) when either argument is zero.
    """
    if cost_pA < 0 or delta < 0:
        raise InputError("ring_index needs nonnegative inputs")
    if cost_pA == 0 or delta == 0:
        return None
    j = math.frexp(cost_pA / delta)[1] - 1
    # comparison fix-up: the quotient rounds, the defining inequality decides
    while math.ldexp(delta, j) > cost_pA:
        j -= 1
    while math.ldexp(delta, j + 1) <= cost_pA:
        j += 1
    return j


def _ring_index_vec(cost, delta):
    """Vector form of ring_index for positive inputs."""
    j = np.frexp(cost / delta)[1].astype(np.int64) - 1
    for _ in range(3):
        too_high = np.ldexp(delta, j) > cost
        j[too_high] -= 1
        too_low = np.ldexp(delta, j + 1) <= cost
        j[too_low] += 1
        if not (too_high.any() or too_low.any()):
            break
    return j


def band_edge(eps, z, k, total, b):
    """Lower cost edge of band b against a level total."""
    base = ((eps / (4.0 * z)) ** z) * (total / k)
    return math.ldexp(base, b)


def band_class(part, total, eps, z, k):
    """Band label for a part cost inside a level of the given total.

    Returns (BAND_MIN, b), ("band", b), or (BAND_MAX, b) where b satisfies
    edge(b) <= part < edge(b+1).
    """
    if not part > 0 or not total > 0:
        raise InputError("band_class needs positive costs")
    base = ((eps / (4.0 * z)) ** z) * (total / k)
    b = math.frexp(part / base)[1] - 1
    while band_edge(eps, z, k, total, b) > part:
        b -= 1
    while band_edge(eps, z, k, total, b + 1) <= part:
        b += 1
    if b <= 0:
        return (BAND_MIN, b)
    if b >= z * math.log2(4.0 * z / eps):
        return (BAND_MAX, b)
    return ("band", b)


@dataclass
class Decomposition:
    """Labels plus the ring/band aggregates derived from one classify call."""

    points: object
    ctx: object
    eps: float
    kind: np.ndarray
    ring: np.ndarray
    ring_members: dict
    ring_cost: dict
    ring_size: dict
    rj_cost: dict
    main_band: dict
    outer_members: dict
    outer_cluster_cost: dict
    outer_cluster_size: dict
    outer_total: float
    outer_band: dict

    @property
    def params(self):
        return (self.eps, self.ctx.z, self.ctx.k)

    def label_of(self, p):
        """Readable label tuple for one client."""
        i = int(self.ctx.assign[p])
        if self.kind[p] == INNER:
            return ("inner", i)
        if self.kind[p] == MAIN:
            j = int(self.ring[p])
            cls, b = self.main_band[(i, j)]
            return ("main", i, j, cls, b)
        cls, b = self.outer_band[i]
        return ("outer", i, cls, b)

    def discard_positions(self):
        """Clients removed by the preprocessing step: inner points plus the
        members of min-band main rings and min-band outer clusters."""
        take = self.kind == INNER
        for (i, j), members in self.ring_members.items():
            if self.main_band[(i, j)][0] == BAND_MIN:
                take[members] = True
        for i, members in self.outer_members.items():
            if self.outer_band[i][0] == BAND_MIN:
                take[members] = True
        return np.flatnonzero(take)

    def dump_rows(self):
        """Per-point label lines for the inspect command."""
        out = []
        for p in range(self.points.n):
            lab = self.label_of(p)
            out.append(f"{p},{'/'.join(str(x) for x in lab)}")
        return out


def classify(P, ctx, eps):
    """Label every client and compute ring/band aggregates.

    Args:
        P: client PointSet (must be the one ctx was built from).
        ctx: ClusteringContext of the seed solution.
        eps: accuracy parameter in (0, 1/3).

    Returns:
        Decomposition.
    """
    if not 0 < eps < 1.0 / 3.0:
        raise InputError(f"eps must lie in (0, 1/3), got {eps}")
    z = ctx.z
    k = ctx.k
    n = P.n
    i_arr = ctx.assign
    cost = ctx.cost_to_A
    dlt = ctx.delta[i_arr]
    inner_thresh = (eps / z) ** (2 * z) * dlt
    outer_thresh = (z / eps) ** (2 * z) * dlt

    kind = np.full(n, MAIN, dtype=np.int8)
    inner = (dlt == 0) | (cost <= inner_thresh)
    kind[inner] = INNER
    outer = ~inner & (cost >= outer_thresh)
    kind[outer] = OUTER

    ring = np.zeros(n, dtype=np.int64)
    main_pos = np.flatnonzero(kind == MAIN)
    if main_pos.size:
        ring[main_pos] = _ring_index_vec(cost[main_pos], dlt[main_pos])

    ring_members = {}
    for p in main_pos:
        ring_members.setdefault((int(i_arr[p]), int(ring[p])), []).append(int(p))
    ring_members = {
        key: np.asarray(val, dtype=np.int64) for key, val in sorted(ring_members.items())
    }
    w = P.weights
    ring_cost = {
        key: math.fsum(w[m] * cost[m]) for key, m in ring_members.items()
    }
    ring_size = {key: math.fsum(w[m]) for key, m in ring_members.items()}
    levels = sorted({j for (_, j) in ring_members})
    rj_cost = {
        j: math.fsum(ring_cost[(i, jj)] for (i, jj) in ring_members if jj == j)
        for j in levels
    }
    max_levels = math.ceil(4 * z * math.log2(z / eps)) + 2
    if len(levels) > max_levels:
        raise InvariantError(
            f"{len(levels)} non-empty main ring levels exceed the bound {max_levels}"
        )
    main_band = {
        (i, j): band_class(ring_cost[(i, j)], rj_cost[j], eps, z, k)
        for (i, j) in ring_members
    }

    outer_pos = np.flatnonzero(kind == OUTER)
    outer_members = {}
    for p in outer_pos:
        outer_members.setdefault(int(i_arr[p]), []).append(int(p))
    outer_members = {
        i: np.asarray(val, dtype=np.int64) for i, val in sorted(outer_members.items())
    }
    outer_cluster_cost = {
        i: math.fsum(w[m] * cost[m]) for i, m in outer_members.items()
    }
    outer_cluster_size = {i: math.fsum(w[m]) for i, m in outer_members.items()}
    outer_total = math.fsum(outer_cluster_cost[i] for i in outer_cluster_cost)
    outer_band = {
        i: band_class(outer_cluster_cost[i], outer_total, eps, z, k)
        for i in outer_members
    }

    return Decomposition(
        points=P,
        ctx=ctx,
        eps=float(eps),
        kind=kind,
        ring=ring,
        ring_members=ring_members,
        ring_cost=ring_cost,
        ring_size=ring_size,
        rj_cost=rj_cost,
        main_band=main_band,
        outer_members=outer_members,
        outer_cluster_cost=outer_cluster_cost,
        outer_cluster_size=outer_cluster_size,
        outer_total=outer_total,
        outer_band=outer_band,
    )


@dataclass(frozen=True)
class Restriction:
    """One cluster's share of a group."""

    cluster: int
    members: np.ndarray
    size: float
    cost: float


@dataclass(frozen=True)
class GroupEntry:
    """One sampleable (or discard-bound) group of clients."""

    gid: tuple
    sampler: str
    discard: bool
    members: np.ndarray
    size: float
    cost: float
    restrictions: tuple

    @property
    def distinct_size(self):
        return int(self.members.size)


def _band_sort_key(label):
    cls, b = label
    if cls == BAND_MIN:
        return -(10 ** 9)
    if cls == BAND_MAX:
        return 10 ** 9
    return b


def _band_gid_part(label):
    cls, b = label
    return cls if cls in (BAND_MIN, BAND_MAX) else b


def group_registry(D):
    """Enumerate the groups of a decomposition in deterministic order.

    Main rings sharing a level j and a band label form one group; the
    per-cluster outer sets sharing a band label form one outer group.  Min
    classes are flagged discard-bound; everything else carries the sampler
    that applies to it.

    Returns:
        list of GroupEntry, main groups first ordered by (j, band), then
        outer groups ordered by band.
    """
    entries = []
    by_group = {}
    for (i, j), label in D.main_band.items():
        by_group.setdefault((j, _band_sort_key(label), _band_gid_part(label)), []).append(i)
    for key in sorted(by_group):
        j, _, bpart = key
        clusters = sorted(by_group[key])
        restr = tuple(
            Restriction(
                cluster=i,
                members=D.ring_members[(i, j)],
                size=D.ring_size[(i, j)],
                cost=D.ring_cost[(i, j)],
            )
            for i in clusters
        )
        members = np.sort(np.concatenate([r.members for r in restr]))
        entries.append(
            GroupEntry(
                gid=("main", j, bpart),
                sampler="group",
                discard=bpart == BAND_MIN,
                members=members,
                size=math.fsum(r.size for r in restr),
                cost=math.fsum(r.cost for r in restr),
                restrictions=restr,
            )
        )
    by_outer = {}
    for i, label in D.outer_band.items():
        by_outer.setdefault((_band_sort_key(label), _band_gid_part(label)), []).append(i)
    for key in sorted(by_outer):
        _, bpart = key
        clusters = sorted(by_outer[key])
        restr = tuple(
            Restriction(
                cluster=i,
                members=D.outer_members[i],
                size=D.outer_cluster_size[i],
                cost=D.outer_cluster_cost[i],
            )
            for i in clusters
        )
        members = np.sort(np.concatenate([r.members for r in restr]))
        entries.append(
            GroupEntry(
                gid=("outer", bpart),
                sampler="sensitivity",
                discard=bpart == BAND_MIN,
                members=members,
                size=math.fsum(r.size for r in restr),
                cost=math.fsum(r.cost for r in restr),
                restrictions=restr,
            )
        )
    return entries

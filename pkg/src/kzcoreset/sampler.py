"""The three sampling procedures that populate a coreset.

Each call derives its own counter-based random stream from (master seed,
group id), so results do not depend on the order groups are visited in or on
any parallel schedule.  Draws landing on the same point are merged by summing
weights, and every sampler returns draws sorted by point position.  Whenever
the requested number of draws reaches the group's distinct size the group is
returned verbatim, which is exact and strictly dominates sampling.
"""

import math
from dataclasses import dataclass

import numpy as np

from .decompose import BAND_MAX, BAND_MIN
from .errors import InputError, InvariantError

PROB_SUM_TOL = 1e-9

_KIND_CODE = {"main": 0, "outer": 1, "ring": 2}
_OFFSET = 2 ** 20


@dataclass(frozen=True)
class WeightedDraw:
    """One coreset member produced by a sampler."""

    point: int
    weight: float
    provenance: tuple  # (group id, procedure tag, first round index)


def _band_code(part):
    if part == BAND_MIN:
        return 0
    if part == BAND_MAX:
        return 1
    b = int(part)
    if abs(b) >= _OFFSET:
        raise InvariantError(f"band index {b} out of spawn-key range")
    return b + _OFFSET


def _gid_spawn_key(gid):
    kind = gid[0]
    if kind not in _KIND_CODE:
        raise InputError(f"unknown group kind {kind!r}")
    code = _KIND_CODE[kind]
    if kind == "main":
        j = int(gid[1])
        if abs(j) >= _OFFSET:
            raise InvariantError(f"ring level {j} out of spawn-key range")
        return (code, j + _OFFSET, _band_code(gid[2]))
    if kind == "outer":
        return (code, 0, _band_code(gid[1]))
    i, j = int(gid[1]), int(gid[2])
    if i < 0 or abs(j) >= _OFFSET:
        raise InvariantError(f"ring id {gid!r} out of spawn-key range")
    return (code, i, j + _OFFSET)


def group_rng(seed, gid):
    """Generator for one group, independent of every other group's stream."""
    ss = np.random.SeedSequence(int(seed), spawn_key=_gid_spawn_key(gid))
    return np.random.Generator(np.random.Philox(ss))


def _check_delta(delta):
    if isinstance(delta, bool) or int(delta) != delta or delta < 1:
        raise InputError(f"delta must be a positive integer, got {delta!r}")
    return int(delta)


def _copy_draws(entry, ctx, tag):
    w = ctx.points.weights
    return [
        WeightedDraw(point=int(p), weight=float(w[p]), provenance=(entry.gid, tag, -1))
        for p in entry.members
    ]


def _merge(entry, tag, members, f_per_pos, drawn_pos):
    """Merge repeated draws; provenance keeps the first round an index won."""
    uniq, first, counts = np.unique(drawn_pos, return_index=True, return_counts=True)
    return [
        WeightedDraw(
            point=int(members[u]),
            weight=float(counts[t] * f_per_pos[u]),
            provenance=(entry.gid, tag, int(first[t])),
        )
        for t, u in enumerate(uniq)
    ]


def group_sample(entry, ctx, delta, seed):
    """Round-based importance sampling inside one structured group.

    Each of the delta rounds draws one point; a point p in the cluster
    restriction C_i wins the round with probability
    w(p) * cost(C_i, A) / (|C_i| * cost(G, A)) and deposits the fixed weight
    f_i = |C_i| * cost(G, A) / (delta * cost(C_i, A)), where sizes and costs
    are the weighted restriction aggregates.

    Args:
        entry: GroupEntry with at least one restriction, all with positive cost.
        ctx: ClusteringContext the entry was derived from.
        delta: number of rounds.
        seed: master seed; the stream is split per group id.

    Returns:
        list of WeightedDraw sorted by point.
    """
    delta = _check_delta(delta)
    if not entry.restrictions:
        raise InputError("group_sample needs at least one restriction")
    if any(not r.cost > 0 for r in entry.restrictions):
        raise InputError("group_sample needs positive restriction costs")
    tag = "group_sample"
    if delta >= entry.distinct_size:
        return _copy_draws(entry, ctx, tag)
    members = entry.members
    w = ctx.points.weights
    prob = np.empty(members.size)
    f_per_pos = np.empty(members.size)
    for r in entry.restrictions:
        sel = np.searchsorted(members, r.members)
        prob[sel] = w[r.members] * (r.cost / (r.size * entry.cost))
        f_per_pos[sel] = r.size * entry.cost / (delta * r.cost)
    total = math.fsum(prob)
    if abs(total - 1.0) > PROB_SUM_TOL:
        raise InvariantError(f"round probabilities sum to {total!r}, not 1")
    cum = np.cumsum(prob)
    rng = group_rng(seed, entry.gid)
    u = rng.random(delta) * cum[-1]
    drawn = np.minimum(np.searchsorted(cum, u, side="right"), members.size - 1)
    return _merge(entry, tag, members, f_per_pos, drawn)


def sensitivity_sample(entry, ctx, delta, seed):
    """Cost-proportional sampling for one outer group.

    Each of the delta draws picks p with probability
    w(p) * cost(p, A) / cost(G, A) and deposits weight
    cost(G, A) / (delta * cost(p, A)), so the expected mass landing on p is
    exactly w(p).

    Args and return as for group_sample.
    """
    delta = _check_delta(delta)
    if not entry.cost > 0:
        raise InputError("sensitivity_sample needs a positive group cost")
    tag = "sensitivity_sample"
    members = entry.members
    cost = ctx.cost_to_A[members]
    if np.any(cost <= 0):
        raise InvariantError("zero-cost point inside a sampled outer group")
    if delta >= entry.distinct_size:
        return _copy_draws(entry, ctx, tag)
    w = ctx.points.weights[members]
    prob = w * cost / entry.cost
    total = math.fsum(prob)
    if abs(total - 1.0) > PROB_SUM_TOL:
        raise InvariantError(f"draw probabilities sum to {total!r}, not 1")
    f_per_pos = entry.cost / (delta * cost)
    cum = np.cumsum(prob)
    rng = group_rng(seed, entry.gid)
    u = rng.random(delta) * cum[-1]
    drawn = np.minimum(np.searchsorted(cum, u, side="right"), members.size - 1)
    return _merge(entry, tag, members, f_per_pos, drawn)


def ring_uniform_sample(entry, ctx, delta, seed):
    """Uniform without-replacement sampling from one ring.

    Draws delta member points uniformly, each deposited with weight
    (weighted ring size) / delta; a ring no larger than delta is returned
    whole with original weights.
    """
    delta = _check_delta(delta)
    if entry.members.size == 0:
        raise InputError("ring_uniform_sample needs a nonempty ring")
    tag = "ring_uniform"
    if entry.distinct_size <= delta:
        return _copy_draws(entry, ctx, tag)
    rng = group_rng(seed, entry.gid)
    sel = rng.choice(entry.members.size, size=delta, replace=False)
    share = entry.size / delta
    order = np.argsort(sel, kind="stable")
    return [
        WeightedDraw(
            point=int(entry.members[sel[t]]),
            weight=float(share),
            provenance=(entry.gid, tag, int(t)),
        )
        for t in order
    ]

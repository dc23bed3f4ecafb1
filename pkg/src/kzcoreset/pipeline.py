"""End-to-end coreset construction and composition.

A build runs: seed k centers, aggregate clusters, classify clients into
rings and band groups, discard the inner points and the min-band groups by
crediting their weighted count to their cluster centers, then sample every
remaining main group round-wise and every remaining outer group
cost-proportionally.  The output is the seed centers (weight zero plus any
credited discard mass) together with the merged draws.
"""

import hashlib
import math
from dataclasses import dataclass

import numpy as np

from .approx import build_context, distinct_point_count, dz_seed
from .decompose import BAND_MIN, GroupEntry, Restriction, classify, group_registry
from .errors import InputError, InvariantError
from .metric import PointSet, check_exponent
from .sampler import group_sample, ring_uniform_sample, sensitivity_sample


@dataclass
class Coreset:
    """Weighted subset standing in for a full instance."""

    ids: np.ndarray
    weights: np.ndarray
    provenance: list
    meta: dict
    source: str

    @property
    def size(self):
        return int(self.ids.size)

    def members(self):
        return list(zip(self.ids.tolist(), self.weights.tolist()))

    @property
    def total_weight(self):
        return math.fsum(self.weights)

    def as_pointset(self, backend):
        """Positive-weight members as a PointSet over the given backend."""
        keep = self.weights > 0
        if not np.any(keep):
            raise InputError("coreset has no positive-weight members")
        return PointSet(backend, self.ids[keep], self.weights[keep])


@dataclass
class ReducedInstance:
    """Integer reweighting of a PointSet.

    scale * int_weights approximates the original weights within a
    (eps/2) relative error per point.
    """

    points: PointSet
    int_weights: np.ndarray
    scale: float

    def pointset(self):
        return self.points.reweighted(self.int_weights.astype(float))


def fingerprint(P):
    """Stable digest of a PointSet identity."""
    h = hashlib.sha256()
    h.update(P.backend.describe().encode())
    h.update(P.ids.tobytes())
    h.update(P.weights.tobytes())
    return h.hexdigest()[:16]


def _format_band(part):
    return part if isinstance(part, str) else f"{int(part)}"


def _format_provenance(prov):
    gid, tag, rnd = prov
    if gid[0] == "main":
        head = f"main/j={gid[1]}/b={_format_band(gid[2])}"
    elif gid[0] == "outer":
        head = f"outer/b={_format_band(gid[1])}"
    else:
        head = f"ring/i={gid[1]}/j={gid[2]}"
    return f"{head}/{tag}/round={rnd}"


def _checked_params(k, z, eps, seed):
    z = check_exponent(z)
    if isinstance(k, bool) or int(k) != k or k < 1:
        raise InputError(f"k must be a positive integer, got {k!r}")
    if not 0 < eps < 1.0 / 3.0:
        raise InputError(f"eps must lie in (0, 1/3), got {eps}")
    if int(seed) != seed or seed < 0:
        raise InputError(f"seed must be a nonnegative integer, got {seed!r}")
    return int(k), z, float(eps), int(seed)


def _discard_credits(P, ctx, D):
    """Weighted discarded mass per cluster, exactly rounded per cluster."""
    pos = D.discard_positions()
    clusters = ctx.assign[pos]
    credits = []
    for i in range(ctx.k):
        mine = pos[clusters == i]
        credits.append(math.fsum(P.weights[mine]))
    return np.array(credits), pos


def _assemble(P, ctx, credits, draws, meta):
    center_ids = np.asarray([int(c) for c in ctx.solution.centers], dtype=np.int64)
    center_prov = [f"center/cluster={i}" for i in range(ctx.k)]
    if draws:
        pos = np.asarray([d.point for d in draws], dtype=np.int64)
        order = np.argsort(pos, kind="stable")
        d_ids = P.ids[pos[order]]
        d_w = np.asarray([draws[int(t)].weight for t in order], dtype=float)
        d_prov = [_format_provenance(draws[int(t)].provenance) for t in order]
    else:
        d_ids = np.array([], dtype=np.int64)
        d_w = np.array([], dtype=float)
        d_prov = []
    ids = np.concatenate([center_ids, d_ids])
    weights = np.concatenate([credits, d_w])
    return Coreset(
        ids=ids,
        weights=weights,
        provenance=center_prov + d_prov,
        meta=meta,
        source=fingerprint(P),
    )


def build(P, k, z, eps, delta_main, delta_outer, seed, refine_sweeps=0):
    """Construct a coreset for (k, z)-clustering on P.

    Args:
        P: client PointSet.
        k: number of centers.
        z: cost exponent.
        eps: accuracy parameter in (0, 1/3).
        delta_main: rounds per sampled main group.
        delta_outer: draws per sampled outer group.
        seed: master seed; every random stream derives from it.
        refine_sweeps: optional local-search sweeps on the seed solution
            (quadratic per sweep; desk-scale instances only).

    Returns:
        Coreset.  Deterministic given identical inputs.
    """
    k, z, eps, seed = _checked_params(k, z, eps, seed)
    if int(delta_main) != delta_main or delta_main < 1:
        raise InputError("delta_main must be a positive integer")
    if int(delta_outer) != delta_outer or delta_outer < 1:
        raise InputError("delta_outer must be a positive integer")
    delta_main, delta_outer = int(delta_main), int(delta_outer)

    A = dz_seed(P, k, z, seed)
    if refine_sweeps:
        from .approx import local_search_refine

        A = local_search_refine(P, A, z, refine_sweeps)
    ctx = build_context(P, A, z)
    D = classify(P, ctx, eps)
    registry = group_registry(D)
    credits, discarded = _discard_credits(P, ctx, D)

    draws = []
    n_main = n_outer = 0
    for entry in registry:
        if entry.discard:
            continue
        if entry.sampler == "group":
            draws.extend(group_sample(entry, ctx, delta_main, seed))
            n_main += 1
        else:
            draws.extend(sensitivity_sample(entry, ctx, delta_outer, seed))
            n_outer += 1

    meta = {
        "variant": "main",
        "k": k,
        "z": z,
        "eps": eps,
        "delta_main": delta_main,
        "delta_outer": delta_outer,
        "seed": seed,
        "n": P.n,
        "input_weight": math.fsum(P.weights),
        "cost_A": ctx.total_cost(),
        "centers": ctx.k,
        "sampled_main_groups": n_main,
        "sampled_outer_groups": n_outer,
        "discarded_points": int(discarded.size),
        "discarded_weight": math.fsum(P.weights[discarded]),
        "draws": len(draws),
    }
    omega = _assemble(P, ctx, credits, draws, meta)
    cap = ctx.k + n_main * delta_main + n_outer * delta_outer
    if omega.size > cap:
        raise InvariantError(f"coreset size {omega.size} exceeds the cap {cap}")
    return omega


def k2_ring_index(cost_pA, delta, eps, z):
    """Coarse ring level used by the uniform variant.

    Levels are anchored at (eps/z)^2 * delta and clamped into
    [1, ceil(4 z log2(z/eps))].
    """
    if not cost_pA > 0 or not delta > 0:
        raise InputError("k2_ring_index needs positive inputs")
    anchor = (eps / z) ** 2 * delta
    j_max = math.ceil(4 * z * math.log2(z / eps))
    j = math.frexp(cost_pA / anchor)[1] - 1
    while math.ldexp(anchor, j) > cost_pA:
        j -= 1
    while math.ldexp(anchor, j + 1) <= cost_pA:
        j += 1
    return min(max(j, 1), j_max)


def build_k2(P, k, z, eps, delta, seed):
    """Variant that re-bins surviving main points into coarse per-cluster
    rings and samples each ring uniformly; outer groups are still sampled
    cost-proportionally.  The preprocessing discard is identical to build.
    """
    k, z, eps, seed = _checked_params(k, z, eps, seed)
    if int(delta) != delta or delta < 1:
        raise InputError("delta must be a positive integer")
    delta = int(delta)

    A = dz_seed(P, k, z, seed)
    ctx = build_context(P, A, z)
    D = classify(P, ctx, eps)
    registry = group_registry(D)
    credits, discarded = _discard_credits(P, ctx, D)

    survivors = np.concatenate(
        [e.members for e in registry if e.sampler == "group" and not e.discard]
        or [np.array([], dtype=np.int64)]
    )
    rings = {}
    for p in np.sort(survivors):
        i = int(ctx.assign[p])
        j = k2_ring_index(float(ctx.cost_to_A[p]), float(ctx.delta[i]), eps, z)
        rings.setdefault((i, j), []).append(int(p))

    w = P.weights
    draws = []
    n_rings = 0
    for (i, j) in sorted(rings):
        members = np.asarray(rings[(i, j)], dtype=np.int64)
        cost = math.fsum(w[members] * ctx.cost_to_A[members])
        size = math.fsum(w[members])
        entry = GroupEntry(
            gid=("ring", i, j),
            sampler="ring",
            discard=False,
            members=members,
            size=size,
            cost=cost,
            restrictions=(
                Restriction(cluster=i, members=members, size=size, cost=cost),
            ),
        )
        draws.extend(ring_uniform_sample(entry, ctx, delta, seed))
        n_rings += 1
    n_outer = 0
    for entry in registry:
        if entry.sampler == "sensitivity" and not entry.discard:
            draws.extend(sensitivity_sample(entry, ctx, delta, seed))
            n_outer += 1

    meta = {
        "variant": "k2",
        "k": k,
        "z": z,
        "eps": eps,
        "delta_main": delta,
        "delta_outer": delta,
        "seed": seed,
        "n": P.n,
        "input_weight": math.fsum(P.weights),
        "cost_A": ctx.total_cost(),
        "centers": ctx.k,
        "sampled_rings": n_rings,
        "sampled_outer_groups": n_outer,
        "discarded_points": int(discarded.size),
        "discarded_weight": math.fsum(P.weights[discarded]),
        "draws": len(draws),
    }
    omega = _assemble(P, ctx, credits, draws, meta)
    cap = ctx.k + (n_rings + n_outer) * delta
    if omega.size > cap:
        raise InvariantError(f"coreset size {omega.size} exceeds the cap {cap}")
    return omega


def reduce_weighted(P, eps):
    """Round weights to integers at granularity eps * w_min / 2.

    Every point keeps its weight within a factor (1 +- eps/2):
    |w(p) - scale * int_weight(p)| <= (eps/2) * w(p).
    """
    if not eps > 0:
        raise InputError("eps must be positive")
    w_min = float(P.weights.min())
    scale = eps * w_min / 2.0
    int_w = np.floor(2.0 * P.weights / (eps * w_min)).astype(np.int64)
    return ReducedInstance(points=P, int_weights=int_w, scale=scale)


def compose(P, stages):
    """Chain builds, feeding each stage's coreset into the next.

    Args:
        P: initial PointSet.
        stages: list of dicts with keys k, z, eps, delta_main, delta_outer,
            seed; all stages must share k and z.

    Returns:
        the final stage's Coreset; meta["stages"] records the chain.  When a
        stage input has fewer distinct points than k it is passed through
        verbatim.
    """
    if not stages:
        raise InputError("compose needs at least one stage")
    k = stages[0]["k"]
    z = stages[0]["z"]
    if any(s["k"] != k or s["z"] != z for s in stages):
        raise InputError("all stages must share k and z")
    current = P
    chain = []
    omega = None
    for s in stages:
        if distinct_point_count(current) < k:
            omega = Coreset(
                ids=current.ids.copy(),
                weights=current.weights.copy(),
                provenance=["verbatim"] * current.n,
                meta={
                    "variant": "verbatim",
                    "k": k,
                    "z": z,
                    "n": current.n,
                },
                source=fingerprint(current),
            )
            chain.append(omega.meta.copy())
            break
        scale = 1.0
        stage_in = current
        w = current.weights
        if not np.all(w == np.floor(w)):
            reduced = reduce_weighted(current, s["eps"])
            stage_in = reduced.pointset()
            scale = reduced.scale
        omega = build(
            stage_in,
            k,
            z,
            s["eps"],
            s["delta_main"],
            s["delta_outer"],
            s["seed"],
        )
        if scale != 1.0:
            omega.weights = omega.weights * scale
            omega.meta["weight_scale"] = scale
        chain.append(omega.meta.copy())
        current = omega.as_pointset(P.backend)
    omega.meta["stages"] = chain
    return omega


def delta_heuristic(eps, k, z, pi, union_budget):
    """Sample-count suggestion from the accuracy and failure budgets.

    Returns (delta_main, delta_outer) with
    delta = ceil(log2(1/eps)^2 / denom * (k * union_budget
            + max(log2 log2(1/eps), 0) + log2(1/pi))),
    where denom is min(eps^2, eps^z) for main groups and eps^2 for outer.
    """
    z = check_exponent(z)
    if not 0 < eps < 1 or not 0 < pi < 1 or not union_budget > 0 or k < 1:
        raise InputError("delta_heuristic needs eps, pi in (0,1), positive budget, k >= 1")
    lg = math.log2(1.0 / eps)
    loglog = max(math.log2(lg), 0.0) if lg > 0 else 0.0
    common = k * union_budget + loglog + math.log2(1.0 / pi)
    d_main = math.ceil(lg * lg / min(eps ** 2, eps ** z) * common)
    d_outer = math.ceil(lg * lg / eps ** 2 * common)
    return max(d_main, 1), max(d_outer, 1)

"""Exact-versus-coreset measurement, solution panels, sweeps, and the
empirical checks of the preprocessing step and the per-round mass event."""

import hashlib
import math
from dataclasses import dataclass

import numpy as np

from .approx import build_context, dz_seed
from .decompose import classify
from .errors import DomainError, InputError, InvariantError
from .metric import (
    EuclideanBackend,
    Solution,
    check_exponent,
    nearest_powers,
    point_cost,
    set_cost,
)
from .pipeline import build
from .sampler import group_sample

SOLUTION_KINDS = (
    "random_points",
    "dz_sampled",
    "perturbed_seed",
    "near_cluster_adversarial",
)
_KIND_CODE = {kind: t for t, kind in enumerate(SOLUTION_KINDS)}


def coreset_cost(backend, omega, S, z):
    """Weighted cost of a coreset under a solution, exactly rounded."""
    z = check_exponent(z)
    if omega.ids.size == 0:
        return 0.0
    d = backend.distances(omega.ids, S.centers)
    return math.fsum(omega.weights * d.min(axis=1) ** z)


def distortion(P, omega, S, z, absolute=False):
    """Relative cost error of a coreset for one solution.

    Args:
        P: ground PointSet.
        omega: Coreset (or any object with ids and weights arrays).
        S: Solution.
        z: cost exponent.
        absolute: with a zero exact cost, return the absolute error instead
            of raising.

    Returns:
        |cost(P,S) - cost(omega,S)| / cost(P,S), or the absolute difference
        in absolute mode.
    """
    exact = set_cost(P, S, z)
    approx = coreset_cost(P.backend, omega, S, z)
    if exact == 0.0:
        if absolute:
            return abs(exact - approx)
        raise DomainError("exact cost is zero; relative distortion undefined")
    return abs(exact - approx) / exact


def _solution_rng(seed, kind, idx):
    ss = np.random.SeedSequence(int(seed), spawn_key=(9, _KIND_CODE[kind], int(idx)))
    return np.random.Generator(np.random.Philox(ss))


def _solution_fingerprint(backend, S):
    h = hashlib.sha256()
    for c in S.centers:
        if isinstance(c, (int, np.integer)):
            h.update(f"i{int(c)};".encode())
        else:
            h.update(np.asarray(c, dtype=float).tobytes())
    return h.hexdigest()[:12]


def gen_solutions(P, k, z, kind, count, seed, perturb_scale=1.0):
    """Deterministic panel of candidate solutions of one kind.

    random_points picks k distinct clients; dz_sampled reruns the adaptive
    seeding with a per-solution stream; perturbed_seed jitters a fixed seed
    solution (returned verbatim when perturb_scale is 0); and
    near_cluster_adversarial places centers exactly on power-of-two ring
    boundaries around the seed centers to stress band edges.
    """
    z = check_exponent(z)
    if kind not in SOLUTION_KINDS:
        raise InputError(f"unknown solution kind {kind!r}")
    if int(count) != count or count < 1:
        raise InputError("count must be a positive integer")
    out = []
    need_ctx = kind in ("perturbed_seed", "near_cluster_adversarial")
    ctx = None
    if need_ctx:
        A = dz_seed(P, k, z, seed)
        ctx = build_context(P, A, z)
    euclid = isinstance(P.backend, EuclideanBackend)
    for idx in range(int(count)):
        rng = _solution_rng(seed, kind, idx)
        if kind == "random_points":
            pos = rng.choice(P.n, size=min(k, P.n), replace=False)
            centers = [int(P.ids[p]) for p in pos]
        elif kind == "dz_sampled":
            sub = int(rng.integers(0, 2 ** 63 - 1))
            centers = list(dz_seed(P, k, z, sub).centers)
        elif kind == "perturbed_seed":
            if perturb_scale == 0.0:
                centers = list(ctx.solution.centers)
            elif euclid:
                centers = []
                for i, c in enumerate(ctx.solution.centers):
                    radius = ctx.delta[i] ** (1.0 / z) if ctx.delta[i] > 0 else 1.0
                    base = P.backend.coords[int(c)]
                    centers.append(base + rng.normal(size=base.shape) * perturb_scale * radius)
            else:
                centers = []
                for i, c in enumerate(ctx.solution.centers):
                    mine = ctx.cluster_members[i]
                    centers.append(int(P.ids[int(rng.choice(mine))]))
        else:
            centers = []
            for i, c in enumerate(ctx.solution.centers):
                jj = int(rng.integers(-3, 7))
                target = math.ldexp(ctx.delta[i], jj) if ctx.delta[i] > 0 else 0.0
                radius = target ** (1.0 / z) if target > 0 else 0.0
                if euclid:
                    base = P.backend.coords[int(c)]
                    direction = rng.normal(size=base.shape)
                    norm = float(np.linalg.norm(direction))
                    direction = direction / norm if norm > 0 else direction
                    centers.append(base + radius * direction)
                else:
                    mine = ctx.cluster_members[i]
                    gap = np.abs(ctx.cost_to_A[mine] - target)
                    centers.append(int(P.ids[int(mine[int(np.argmin(gap))])]))
        out.append(Solution(centers))
    return out


def standard_panel(P, k, z, seed, per_kind):
    """Fixed mixed panel: per_kind solutions of each kind, kind order fixed."""
    panel = []
    for kind in SOLUTION_KINDS:
        panel.extend(gen_solutions(P, k, z, kind, per_kind, seed))
    return panel


@dataclass
class EvalReport:
    """Distortion of one coreset over a solution panel."""

    rows: list
    zero_rows: list
    summary: dict
    config: dict


def report_distortion(P, omega, solutions, z, config=None):
    """Evaluate a coreset against every solution in a fixed panel."""
    rows = []
    zero_rows = []
    errs = []
    for S in solutions:
        exact = set_cost(P, S, z)
        approx = coreset_cost(P.backend, omega, S, z)
        fp = _solution_fingerprint(P.backend, S)
        if exact == 0.0:
            zero_rows.append(
                {"solution": fp, "exact": exact, "coreset": approx, "abs_err": abs(approx)}
            )
            continue
        rel = abs(exact - approx) / exact
        errs.append(rel)
        rows.append(
            {"solution": fp, "exact": exact, "coreset": approx, "rel_err": rel}
        )
    if errs:
        arr = np.asarray(errs)
        summary = {
            "max": float(arr.max()),
            "mean": float(arr.mean()),
            "median": float(np.median(arr)),
            "p95": float(np.percentile(arr, 95)),
            "count": len(errs),
        }
    else:
        summary = {"max": 0.0, "mean": 0.0, "median": 0.0, "p95": 0.0, "count": 0}
    summary["zero_cost_solutions"] = len(zero_rows)
    return EvalReport(rows=rows, zero_rows=zero_rows, summary=summary, config=dict(config or {}))


def sweep(P, k, z, eps, delta_values, seeds, panel=None, panel_seed=0, panel_per_kind=25):
    """Distortion summaries across sample counts and construction seeds.

    The panel is fixed before any build, and exact costs are computed once.

    Returns:
        list of row dicts (delta, seed, max, mean, median, p95) sorted by
        (delta, seed).
    """
    if not delta_values or not seeds:
        raise InputError("sweep needs nonempty delta and seed lists")
    if panel is None:
        panel = standard_panel(P, k, z, panel_seed, panel_per_kind)
    exact = [set_cost(P, S, z) for S in panel]
    rows = []
    for delta in sorted(int(d) for d in delta_values):
        for seed in [int(s) for s in seeds]:
            omega = build(P, k, z, eps, delta, delta, seed)
            errs = []
            for S, ex in zip(panel, exact):
                if ex == 0.0:
                    continue
                approx = coreset_cost(P.backend, omega, S, z)
                errs.append(abs(ex - approx) / ex)
            arr = np.asarray(errs) if errs else np.asarray([0.0])
            rows.append(
                {
                    "delta": delta,
                    "seed": seed,
                    "max": float(arr.max()),
                    "mean": float(arr.mean()),
                    "median": float(np.median(arr)),
                    "p95": float(np.percentile(arr, 95)),
                }
            )
    return rows


@dataclass
class PreprocessReport:
    """Worst observed drift of the discard-and-credit step."""

    solutions: int
    max_ratio: float
    bound: float

    @property
    def ok(self):
        return self.max_ratio <= self.bound


def verify_preprocess(P, ctx, eps, solutions, strict=True):
    """Compare the discarded points with the credited centers over solutions.

    For each S the weighted cost of the discarded clients is compared with
    the cost of the same mass sitting on the cluster centers; the gap is
    normalized by cost(P, S) + cost(P, A) and must stay within 8 * eps.
    """
    D = classify(P, ctx, eps)
    discarded = D.discard_positions()
    credits = []
    for i in range(ctx.k):
        mine = discarded[ctx.assign[discarded] == i]
        credits.append(math.fsum(P.weights[mine]))
    credits = np.asarray(credits)
    cost_A = ctx.total_cost()
    worst = 0.0
    for S in solutions:
        powers = nearest_powers(P, S, ctx.z)
        cost_D = math.fsum(P.weights[discarded] * powers[discarded])
        # centers may be ambient ids or raw coordinates, so resolve one by one
        center_powers = np.array(
            [point_cost(P.backend, c, S, ctx.z) for c in ctx.solution.centers]
        )
        cost_P1 = math.fsum(credits * center_powers)
        denom = math.fsum(P.weights * powers) + cost_A
        if denom > 0:
            worst = max(worst, abs(cost_D - cost_P1) / denom)
        elif cost_D != cost_P1:
            worst = math.inf
    report = PreprocessReport(solutions=len(solutions), max_ratio=worst, bound=8.0 * eps)
    if strict and not report.ok:
        raise InvariantError(
            f"preprocessing drift {report.max_ratio:.6g} exceeds 8*eps = {report.bound:.6g}"
        )
    return report


def verify_event_E(P, ctx, group, delta, trials, eps, seed):
    """Fraction of trials in which every restriction keeps its mass.

    One trial is a full group_sample run; it succeeds when each restriction's
    deposited weight lies within (1 +- eps) of its weighted size.
    """
    if int(trials) != trials or trials < 1:
        raise InputError("trials must be a positive integer")
    hits = 0
    for t in range(int(trials)):
        sub = int(
            np.random.SeedSequence(int(seed), spawn_key=(7, t)).generate_state(1)[0]
        )
        draws = group_sample(group, ctx, delta, sub)
        deposited = {r.cluster: [] for r in group.restrictions}
        member_cluster = {}
        for r in group.restrictions:
            for m in r.members:
                member_cluster[int(m)] = r.cluster
        for d in draws:
            deposited[member_cluster[d.point]].append(d.weight)
        ok = True
        for r in group.restrictions:
            mass = math.fsum(deposited[r.cluster])
            if not (1.0 - eps) * r.size <= mass <= (1.0 + eps) * r.size:
                ok = False
                break
        if ok:
            hits += 1
    return hits / int(trials)

"""Command-line front end: ingestion, construction, evaluation, inspection.

Exit codes: 0 success, 2 bad input or domain error, 3 violated internal
invariant. Seeds are 64-bit unsigned decimals, default 0, so identical
invocations produce byte-identical artifacts.
"""

import argparse
import json
import math
import sys

from .approx import build_context, dz_seed
from .decompose import classify
from .errors import DomainError, InputError, InvariantError
from .evaluate import report_distortion, standard_panel, sweep
from .io import (
    FORMATS,
    ingest,
    write_coreset_csv,
    write_coreset_json,
    write_report_csv,
    write_report_json,
    write_sweep_csv,
)
from .metric import EuclideanBackend
from .nets import build_candidates, verify_centroid_property
from .pipeline import Coreset, build, build_k2, delta_heuristic, fingerprint


def _add_instance_flags(sp):
    sp.add_argument("--input", required=True, help="instance file")
    sp.add_argument("--format", required=True, choices=FORMATS)
    sp.add_argument("--k", type=int, required=True)
    sp.add_argument("--z", type=float, required=True)
    sp.add_argument("--eps", type=float, required=True)
    sp.add_argument("--seed", type=int, default=0)


def _add_delta_flags(sp):
    sp.add_argument("--delta-main", type=int, default=None)
    sp.add_argument("--delta-outer", type=int, default=None)
    sp.add_argument("--pi", type=float, default=None,
                    help="failure budget for the sample-count heuristic")
    sp.add_argument("--union-budget", type=float, default=None)


def _build_parser():
    parser = argparse.ArgumentParser(prog="kzcoreset")
    sub = parser.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("build", help="construct a coreset")
    _add_instance_flags(sp)
    _add_delta_flags(sp)
    sp.add_argument("--variant", choices=("main", "k2"), default="main")
    sp.add_argument("--out", required=True,
                    help="output stem; writes <out>.json and <out>.csv")

    sp = sub.add_parser("eval", help="build and measure against a solution panel")
    _add_instance_flags(sp)
    _add_delta_flags(sp)
    sp.add_argument("--variant", choices=("main", "k2"), default="main")
    sp.add_argument("--identity", action="store_true",
                    help="evaluate the input against itself instead of building")
    sp.add_argument("--per-kind", type=int, default=25)
    sp.add_argument("--panel-seed", type=int, default=0)
    sp.add_argument("--out", required=True,
                    help="output stem; writes <out>.json and <out>.csv")
    sp.add_argument("--report", default=None, help="also render a histogram PNG")

    sp = sub.add_parser("sweep", help="distortion across sample counts and seeds")
    _add_instance_flags(sp)
    sp.add_argument("--deltas", required=True,
                    help="comma-separated per-group sample counts")
    sp.add_argument("--seeds", default=None,
                    help="comma-separated construction seeds (default: --seed)")
    sp.add_argument("--per-kind", type=int, default=25)
    sp.add_argument("--panel-seed", type=int, default=0)
    sp.add_argument("--out", required=True, help="CSV output path")
    sp.add_argument("--report", default=None, help="also render a trend PNG")

    sp = sub.add_parser("inspect", help="dump the per-point decomposition labels")
    _add_instance_flags(sp)
    sp.add_argument("--out", default=None, help="CSV output path (default stdout)")

    sp = sub.add_parser("net-verify", help="check the snapped-solution cost property")
    _add_instance_flags(sp)
    sp.add_argument("--trials", type=int, default=20)
    sp.add_argument("--out", default=None, help="JSON report path (default stdout)")

    return parser


def _default_union_budget(P, k):
    if isinstance(P.backend, EuclideanBackend):
        return P.backend.coords.shape[1] + math.log2(k)
    return math.log2(max(P.n, 2))


def _resolve_deltas(args, P):
    explicit = args.delta_main is not None or args.delta_outer is not None
    heuristic = args.pi is not None or args.union_budget is not None
    if explicit and heuristic:
        raise InputError(
            "give either explicit --delta-main/--delta-outer or the "
            "--pi/--union-budget heuristic, not both"
        )
    if explicit:
        if args.delta_main is None or args.delta_outer is None:
            raise InputError("both --delta-main and --delta-outer are required")
        return args.delta_main, args.delta_outer
    if args.pi is None:
        raise InputError(
            "supply --delta-main/--delta-outer or --pi for the heuristic"
        )
    ub = args.union_budget
    if ub is None:
        ub = _default_union_budget(P, args.k)
    return delta_heuristic(args.eps, args.k, args.z, args.pi, ub)


def _build_omega(args, P):
    dm, do = _resolve_deltas(args, P)
    if args.variant == "k2":
        return build_k2(P, args.k, args.z, args.eps, dm, args.seed)
    return build(P, args.k, args.z, args.eps, dm, do, args.seed)


def _identity_coreset(P):
    return Coreset(
        ids=P.ids.copy(),
        weights=P.weights.copy(),
        provenance=["input"] * P.n,
        meta={"variant": "identity", "n": int(P.n)},
        source=fingerprint(P),
    )


def _cmd_build(args):
    P = ingest(args.input, args.format)
    omega = _build_omega(args, P)
    write_coreset_json(omega, args.out + ".json")
    write_coreset_csv(omega, args.out + ".csv")
    print(f"coreset size {omega.size} -> {args.out}.json, {args.out}.csv")
    return 0


def _cmd_eval(args):
    P = ingest(args.input, args.format)
    omega = _identity_coreset(P) if args.identity else _build_omega(args, P)
    panel = standard_panel(P, args.k, args.z, args.panel_seed, args.per_kind)
    config = {
        "k": args.k, "z": args.z, "eps": args.eps, "seed": args.seed,
        "variant": omega.meta.get("variant"), "panel_seed": args.panel_seed,
        "per_kind": args.per_kind,
    }
    report = report_distortion(P, omega, panel, args.z, config=config)
    write_report_json(report, args.out + ".json")
    write_report_csv(report, args.out + ".csv")
    if args.report:
        from .figures import render_eval_report

        render_eval_report(report, args.report)
    s = report.summary
    print(f"max {s['max']!r} median {s['median']!r} over {s['count']} solutions")
    return 0


def _parse_int_list(text, flag):
    try:
        return [int(tok) for tok in text.split(",") if tok.strip()]
    except ValueError as e:
        raise InputError(f"{flag}: {e}") from e


def _cmd_sweep(args):
    P = ingest(args.input, args.format)
    deltas = _parse_int_list(args.deltas, "--deltas")
    seeds = _parse_int_list(args.seeds, "--seeds") if args.seeds else [args.seed]
    rows = sweep(
        P, args.k, args.z, args.eps, deltas, seeds,
        panel_seed=args.panel_seed, panel_per_kind=args.per_kind,
    )
    write_sweep_csv(rows, args.out)
    if args.report:
        from .figures import render_sweep

        render_sweep(rows, args.report)
    print(f"{len(rows)} rows -> {args.out}")
    return 0


def _cmd_inspect(args):
    P = ingest(args.input, args.format)
    A = dz_seed(P, args.k, args.z, args.seed)
    ctx = build_context(P, A, args.z)
    D = classify(P, ctx, args.eps)
    lines = ["point,label"] + D.dump_rows()
    text = "\n".join(lines) + "\n"
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
        print(f"{P.n} labels -> {args.out}")
    else:
        sys.stdout.write(text)
    return 0


def _cmd_net_verify(args):
    P = ingest(args.input, args.format)
    A = dz_seed(P, args.k, args.z, args.seed)
    ctx = build_context(P, A, args.z)
    cands = build_candidates(P, ctx, args.eps, args.z)
    rep = verify_centroid_property(
        P, ctx, cands, args.eps, args.z, trials=args.trials, seed=args.seed
    )
    payload = {
        "candidates": cands.size,
        "solutions": rep.solutions,
        "gated_checks": rep.gated_checks,
        "violations": rep.violations,
        "worst_ratio": rep.worst_ratio,
        "snapped_empty": rep.snapped_empty,
        "tolerance": rep.tolerance,
    }
    text = json.dumps(payload, sort_keys=True) + "\n"
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


_COMMANDS = {
    "build": _cmd_build,
    "eval": _cmd_eval,
    "sweep": _cmd_sweep,
    "inspect": _cmd_inspect,
    "net-verify": _cmd_net_verify,
}


def main(argv=None):
    args = _build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except (InputError, DomainError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except InvariantError as e:
        print(f"invariant violation: {e}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())

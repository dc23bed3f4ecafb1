"""File formats: instance ingestion and deterministic artifact writers.

All delimited output uses '.' decimals, comma separation, and repr float
formatting, so identical runs produce byte-identical files.
"""

import csv
import io as _io
import json

import numpy as np

from .errors import InputError
from .metric import (
    DistanceMatrixBackend,
    EuclideanBackend,
    GraphBackend,
    PointSet,
)
from .pipeline import Coreset

FORMATS = ("points_csv", "matrix_txt", "edges_txt")


def _fmt(x):
    return repr(float(x))


def ingest(path, fmt):
    """Load a PointSet from one of the supported formats.

    points_csv: one row per point, all columns coordinates; an optional
        header row may end in a `weight` column.
    matrix_txt: the count n followed by n*n whitespace-separated reals.
    edges_txt: `u v w` lines; an optional `#clients: ...` line restricts the
        client set; other `#` lines are comments.
    """
    if fmt not in FORMATS:
        raise InputError(f"unknown format {fmt!r}; expected one of {FORMATS}")
    try:
        text = open(path, "r", encoding="utf-8").read()
    except OSError as e:
        raise InputError(f"cannot read {path}: {e}") from e
    if fmt == "points_csv":
        return _ingest_points_csv(text, path)
    if fmt == "matrix_txt":
        return _ingest_matrix(text, path)
    return _ingest_edges(text, path)


def _ingest_points_csv(text, path):
    rows = list(csv.reader(_io.StringIO(text)))
    rows = [r for r in rows if r and any(cell.strip() for cell in r)]
    if not rows:
        raise InputError(f"{path}: no data rows")
    header = None
    try:
        [float(cell) for cell in rows[0]]
    except ValueError:
        header = [cell.strip().lower() for cell in rows[0]]
        rows = rows[1:]
        if not rows:
            raise InputError(f"{path}: header but no data rows")
    has_weight = header is not None and header and header[-1] == "weight"
    coords = []
    weights = []
    width = None
    for lineno, row in enumerate(rows, start=2 if header else 1):
        try:
            vals = [float(cell) for cell in row]
        except ValueError as e:
            raise InputError(f"{path} line {lineno}: {e}") from e
        if width is None:
            width = len(vals)
        elif len(vals) != width:
            raise InputError(f"{path} line {lineno}: expected {width} columns")
        if has_weight:
            coords.append(vals[:-1])
            weights.append(vals[-1])
        else:
            coords.append(vals)
    if has_weight and any(w <= 0 for w in weights):
        raise InputError(f"{path}: weights must be positive")
    backend = EuclideanBackend(np.asarray(coords))
    return PointSet(backend, weights=np.asarray(weights) if has_weight else None)


def _ingest_matrix(text, path):
    tokens = text.split()
    if not tokens:
        raise InputError(f"{path}: empty matrix file")
    try:
        n = int(tokens[0])
    except ValueError as e:
        raise InputError(f"{path}: first token must be the matrix size") from e
    if len(tokens) != 1 + n * n:
        raise InputError(
            f"{path}: expected {n * n} entries after the size, got {len(tokens) - 1}"
        )
    try:
        vals = np.asarray([float(t) for t in tokens[1:]]).reshape(n, n)
    except ValueError as e:
        raise InputError(f"{path}: {e}") from e
    backend = DistanceMatrixBackend(vals)
    return PointSet(backend)


def _ingest_edges(text, path):
    edges = []
    clients = None
    n_vertices = 0
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line:
            continue
        if line.startswith("#clients:"):
            try:
                clients = [int(tok) for tok in line[len("#clients:"):].split()]
            except ValueError as e:
                raise InputError(f"{path} line {lineno}: bad client list") from e
            continue
        if line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) != 3:
            raise InputError(f"{path} line {lineno}: expected 'u v w'")
        try:
            u, v, w = int(parts[0]), int(parts[1]), float(parts[2])
        except ValueError as e:
            raise InputError(f"{path} line {lineno}: {e}") from e
        edges.append((u, v, w))
        n_vertices = max(n_vertices, u + 1, v + 1)
    if not edges:
        raise InputError(f"{path}: no edges")
    backend = GraphBackend(n_vertices, edges)
    ids = np.asarray(clients, dtype=np.int64) if clients is not None else None
    return PointSet(backend, ids=ids)


def serialize_pointset(P, path):
    """Write a PointSet back out in its backend's native format.

    Distances survive the round trip exactly; the matrix form stores the
    client-restricted matrix and therefore drops weights.
    """
    backend = P.backend
    if isinstance(backend, EuclideanBackend):
        cols = [f"x{t}" for t in range(backend.coords.shape[1])] + ["weight"]
        lines = [",".join(cols)]
        for p in range(P.n):
            row = [_fmt(v) for v in backend.coords[P.ids[p]]] + [_fmt(P.weights[p])]
            lines.append(",".join(row))
        fmt = "points_csv"
    elif isinstance(backend, DistanceMatrixBackend):
        sub = backend.matrix[np.ix_(P.ids, P.ids)]
        lines = [str(P.n)]
        for row in sub:
            lines.append(" ".join(_fmt(v) for v in row))
        fmt = "matrix_txt"
    elif isinstance(backend, GraphBackend):
        lines = ["#clients: " + " ".join(str(int(i)) for i in P.ids)]
        adj = backend._adj.tocoo()
        seen = set()
        for u, v, w in zip(adj.row, adj.col, adj.data):
            key = (min(int(u), int(v)), max(int(u), int(v)))
            if key in seen:
                continue
            seen.add(key)
            lines.append(f"{key[0]} {key[1]} {_fmt(w)}")
        fmt = "edges_txt"
    else:
        raise InputError(f"cannot serialize backend {type(backend).__name__}")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")
    return fmt


def coreset_json_str(omega):
    payload = {
        "meta": omega.meta,
        "source": omega.source,
        "members": [
            {"id": int(i), "weight": float(w), "provenance": p}
            for i, w, p in zip(omega.ids, omega.weights, omega.provenance)
        ],
    }
    return json.dumps(payload, sort_keys=True, separators=(",", ":")) + "\n"


def write_coreset_json(omega, path):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(coreset_json_str(omega))


def read_coreset_json(path):
    with open(path, "r", encoding="utf-8") as fh:
        payload = json.load(fh)
    return Coreset(
        ids=np.asarray([m["id"] for m in payload["members"]], dtype=np.int64),
        weights=np.asarray([m["weight"] for m in payload["members"]], dtype=float),
        provenance=[m["provenance"] for m in payload["members"]],
        meta=payload["meta"],
        source=payload["source"],
    )


def write_coreset_csv(omega, path):
    lines = ["id,weight"]
    for i, w in zip(omega.ids, omega.weights):
        lines.append(f"{int(i)},{_fmt(w)}")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def report_json_str(report):
    payload = {
        "config": report.config,
        "summary": report.summary,
        "rows": report.rows,
        "zero_rows": report.zero_rows,
    }
    return json.dumps(payload, sort_keys=True, separators=(",", ":")) + "\n"


def write_report_json(report, path):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(report_json_str(report))


def write_report_csv(report, path):
    lines = ["solution,exact,coreset,rel_err,abs_err"]
    for row in report.rows:
        lines.append(
            f"{row['solution']},{_fmt(row['exact'])},{_fmt(row['coreset'])},"
            f"{_fmt(row['rel_err'])},"
        )
    for row in report.zero_rows:
        lines.append(
            f"{row['solution']},{_fmt(row['exact'])},{_fmt(row['coreset'])},,"
            f"{_fmt(row['abs_err'])}"
        )
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def write_sweep_csv(rows, path):
    lines = ["delta,seed,max,mean,median,p95"]
    for row in rows:
        lines.append(
            f"{row['delta']},{row['seed']},{_fmt(row['max'])},{_fmt(row['mean'])},"
            f"{_fmt(row['median'])},{_fmt(row['p95'])}"
        )
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")

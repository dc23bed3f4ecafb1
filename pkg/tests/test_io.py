"""Ingestion, serialization, and the delimited output writers."""

import numpy as np
import pytest

from kzcoreset.errors import InputError
from kzcoreset.evaluate import gen_solutions, report_distortion, sweep
from kzcoreset.io import (
    coreset_json_str,
    ingest,
    read_coreset_json,
    serialize_pointset,
    write_coreset_csv,
    write_coreset_json,
    write_report_csv,
    write_sweep_csv,
)
from kzcoreset.metric import (
    DistanceMatrixBackend,
    EuclideanBackend,
    GraphBackend,
    PointSet,
)
from kzcoreset.pipeline import build


def test_ingest_bare_points_csv(tmp_path):
    f = tmp_path / "pts.csv"
    f.write_text("0,0\n3,4\n")
    P = ingest(str(f), "points_csv")
    assert P.n == 2
    assert P.weights.tolist() == [1.0, 1.0]
    assert P.backend.dist(0, 1) == 5.0


def test_ingest_points_csv_with_header_and_weights(tmp_path):
    f = tmp_path / "pts.csv"
    f.write_text("x0,x1,weight\n0,0,2\n3,4,1.5\n")
    P = ingest(str(f), "points_csv")
    assert P.weights.tolist() == [2.0, 1.5]


def test_ingest_points_csv_errors(tmp_path):
    f = tmp_path / "bad.csv"
    f.write_text("x0,weight\n1,0\n")
    with pytest.raises(InputError, match="positive"):
        ingest(str(f), "points_csv")
    f.write_text("0,0\n3\n")
    with pytest.raises(InputError, match="line 2"):
        ingest(str(f), "points_csv")
    f.write_text("x0,x1,weight\n")
    with pytest.raises(InputError, match="no data"):
        ingest(str(f), "points_csv")
    f.write_text("0,0\n3,oops\n")
    with pytest.raises(InputError, match="line 2"):
        ingest(str(f), "points_csv")
    # a non-numeric first row reads as a header, never as a bad data row
    f.write_text("0,oops\n")
    with pytest.raises(InputError, match="header but no data"):
        ingest(str(f), "points_csv")


def test_ingest_matrix(tmp_path):
    f = tmp_path / "m.txt"
    f.write_text("2\n0 5\n5 0\n")
    P = ingest(str(f), "matrix_txt")
    assert P.backend.dist(0, 1) == 5.0
    f.write_text("2\n0 5\n5 0.1\n")
    with pytest.raises(InputError, match="diagonal"):
        ingest(str(f), "matrix_txt")
    f.write_text("2\n0 5 5\n")
    with pytest.raises(InputError, match="entries"):
        ingest(str(f), "matrix_txt")
    f.write_text("x\n")
    with pytest.raises(InputError, match="matrix size"):
        ingest(str(f), "matrix_txt")


def test_ingest_edges(tmp_path):
    f = tmp_path / "g.txt"
    f.write_text("# a comment\n0 1 2\n1 2 3\n")
    P = ingest(str(f), "edges_txt")
    assert P.n == 3
    assert P.backend.dist(0, 2) == 5.0
    f.write_text("#clients: 0 2\n0 1 2\n1 2 3\n")
    P = ingest(str(f), "edges_txt")
    assert P.ids.tolist() == [0, 2]
    f.write_text("0 1\n")
    with pytest.raises(InputError, match="expected 'u v w'"):
        ingest(str(f), "edges_txt")
    f.write_text("# nothing\n")
    with pytest.raises(InputError, match="no edges"):
        ingest(str(f), "edges_txt")


def test_ingest_path_and_format_validation(tmp_path):
    with pytest.raises(InputError, match="cannot read"):
        ingest(str(tmp_path / "missing.csv"), "points_csv")
    f = tmp_path / "x.csv"
    f.write_text("0,0\n")
    with pytest.raises(InputError):
        ingest(str(f), "bogus")


def test_round_trip_preserves_distances(tmp_path):
    rng = np.random.default_rng(2)
    coords = rng.normal(size=(8, 2))
    ids = list(range(8))

    P_e = PointSet(EuclideanBackend(coords), weights=rng.uniform(1, 3, size=8))
    fmt = serialize_pointset(P_e, str(tmp_path / "e.csv"))
    back = ingest(str(tmp_path / "e.csv"), fmt)
    assert np.array_equal(back.weights, P_e.weights)
    assert np.array_equal(
        back.backend.distances(ids, ids), P_e.backend.distances(ids, ids)
    )

    m = EuclideanBackend(coords).distances(ids, ids)
    P_m = PointSet(DistanceMatrixBackend(m), ids=[1, 3, 5])
    fmt = serialize_pointset(P_m, str(tmp_path / "m.txt"))
    back = ingest(str(tmp_path / "m.txt"), fmt)
    assert back.n == 3
    assert np.array_equal(
        back.backend.distances([0, 1, 2], [0, 1, 2]),
        P_m.backend.distances([1, 3, 5], [1, 3, 5]),
    )

    g = GraphBackend(4, [(0, 1, 1.5), (1, 2, 2.0), (2, 3, 0.5), (0, 3, 9.0)])
    P_g = PointSet(g, ids=[0, 2, 3])
    fmt = serialize_pointset(P_g, str(tmp_path / "g.txt"))
    back = ingest(str(tmp_path / "g.txt"), fmt)
    assert back.ids.tolist() == [0, 2, 3]
    assert np.array_equal(
        back.backend.distances([0, 1, 2, 3], [0, 1, 2, 3]),
        g.distances([0, 1, 2, 3], [0, 1, 2, 3]),
    )


def _small_coreset():
    rng = np.random.default_rng(4)
    coords = np.concatenate([rng.normal(size=40), rng.normal(size=40) + 12.0])
    P = PointSet(EuclideanBackend(coords))
    return P, build(P, 2, 2, 0.25, 6, 6, seed=1)


def test_coreset_json_round_trip(tmp_path):
    _, omega = _small_coreset()
    path = str(tmp_path / "c.json")
    write_coreset_json(omega, path)
    back = read_coreset_json(path)
    assert np.array_equal(back.ids, omega.ids)
    assert np.array_equal(back.weights, omega.weights)
    assert back.provenance == omega.provenance
    assert back.meta == omega.meta
    assert back.source == omega.source
    assert coreset_json_str(back) == coreset_json_str(omega)


def test_coreset_csv_shape(tmp_path):
    _, omega = _small_coreset()
    path = tmp_path / "c.csv"
    write_coreset_csv(omega, str(path))
    lines = path.read_text().splitlines()
    assert lines[0] == "id,weight"
    assert len(lines) == 1 + omega.size
    first = lines[1].split(",")
    assert int(first[0]) == int(omega.ids[0])
    assert float(first[1]) == omega.weights[0]


def test_report_csv_separates_zero_rows(tmp_path):
    P, omega = _small_coreset()
    panel = gen_solutions(P, 2, 2, "random_points", 5, seed=3)
    rep = report_distortion(P, omega, panel, 2)
    rep.zero_rows.append({"solution": "zzz", "exact": 0.0, "coreset": 0.0,
                          "abs_err": 0.0})
    path = tmp_path / "r.csv"
    write_report_csv(rep, str(path))
    lines = path.read_text().splitlines()
    assert lines[0] == "solution,exact,coreset,rel_err,abs_err"
    body = [l.split(",") for l in lines[1:]]
    assert all(len(cols) == 5 for cols in body)
    regular = body[: len(rep.rows)]
    assert all(cols[4] == "" for cols in regular)
    assert body[-1][3] == "" and body[-1][4] == "0.0"


def test_sweep_csv_layout(tmp_path):
    P, _ = _small_coreset()
    rows = sweep(P, 2, 2, 0.25, [4, 8], [0], panel_per_kind=3)
    path = tmp_path / "s.csv"
    write_sweep_csv(rows, str(path))
    lines = path.read_text().splitlines()
    assert lines[0] == "delta,seed,max,mean,median,p95"
    assert len(lines) == 3
    assert lines[1].startswith("4,0,")
    assert lines[2].startswith("8,0,")

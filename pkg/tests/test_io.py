import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from goclust import io
from goclust.baselines import discrepancy_matrix
from goclust.datagen import GenConfig, generate_dataset
from goclust.errors import ParseError, SchemaError
from goclust.goc import GocConfig, run_goc
from goclust.types import Assignment, Dataset, EmpiricalFeatureSet
from goclust.uncertainty import standardize


def _same(a: Dataset, b: Dataset):
    assert a.n == b.n and a.standardized == b.standardized and a.seed == b.seed
    assert a.norm_meta == b.norm_meta
    for x, y in zip(a.sets, b.sets):
        assert x.individual_id == y.individual_id
        assert x.candidates.tobytes() == y.candidates.tobytes()
        assert x.penalties.tobytes() == y.penalties.tobytes()
    if a.true_labels is None:
        assert b.true_labels is None
    else:
        assert np.array_equal(a.true_labels, b.true_labels)


finite = st.floats(allow_nan=False, allow_infinity=False, width=64)


@settings(max_examples=30, deadline=None)
@given(st.lists(st.lists(st.tuples(finite, finite), min_size=1, max_size=4), min_size=1, max_size=5), st.booleans())
def test_round_trip_bit_exact(tmp_path_factory, rows, labelled):
    sets = tuple(
        EmpiricalFeatureSet(np.array(r, dtype=float), np.abs(np.array(r, dtype=float)[:, 0]), i + 1)
        for i, r in enumerate(rows)
    )
    d = Dataset(sets, true_labels=list(range(1, len(sets) + 1)) if labelled else None)
    path = tmp_path_factory.mktemp("ds")
    io.save_dataset(d, path)
    _same(d, io.load_dataset(path))


def test_round_trip_standardized(tmp_path):
    d = standardize(generate_dataset(GenConfig(K_star=3, m=4, seed=2)))
    io.save_dataset(d, tmp_path)
    _same(d, io.load_dataset(tmp_path))
    meta = json.loads((tmp_path / io.META).read_text())
    assert meta["standardized"] is True and meta["q"] == 3


def test_candidate_csv_layout(tmp_path):
    d = Dataset((EmpiricalFeatureSet([[0.1, 2.0]], [0.5], 1),))
    io.save_dataset(d, tmp_path)
    lines = (tmp_path / io.CANDIDATES).read_text().splitlines()
    assert lines == ["individual,candidate,f1,f2,penalty", "1,1,0.10000000000000001,2,0.5"]


def _write_ds(tmp_path, body, n=2, q=1):
    (tmp_path / io.META).write_text(json.dumps({"n": n, "q": q, "standardized": False}))
    (tmp_path / io.CANDIDATES).write_text("individual,candidate,f1,penalty\n" + body)


def test_bad_number_reports_line(tmp_path):
    _write_ds(tmp_path, "1,1,0.5,0\n2,1,abc,0\n")
    with pytest.raises(ParseError, match=r"candidates.csv:3"):
        io.load_dataset(tmp_path)


def test_ungrouped_rows_rejected(tmp_path):
    _write_ds(tmp_path, "1,1,0,0\n2,1,0,0\n1,2,0,0\n")
    with pytest.raises(ParseError, match="grouped"):
        io.load_dataset(tmp_path)


def test_wrong_header_rejected(tmp_path):
    _write_ds(tmp_path, "")
    (tmp_path / io.CANDIDATES).write_text("a,b\n")
    with pytest.raises(SchemaError):
        io.load_dataset(tmp_path)


def test_n_mismatch_rejected(tmp_path):
    _write_ds(tmp_path, "1,1,0,0\n", n=2)
    with pytest.raises(SchemaError):
        io.load_dataset(tmp_path)


def test_bad_json_rejected(tmp_path):
    (tmp_path / io.META).write_text("{\n  oops")
    with pytest.raises(ParseError):
        io.load_dataset(tmp_path)


def test_assignment_round_trip(tmp_path):
    a = Assignment([1, 2, 2], 2, selected=[3, 1, 2])
    io.write_assignment(tmp_path / "a.csv", a)
    b = io.read_assignment(tmp_path / "a.csv")
    assert np.array_equal(a.labels, b.labels) and np.array_equal(a.selected, b.selected)
    assert io.read_labels(tmp_path / "a.csv").tolist() == [1, 2, 2]
    io.write_assignment(tmp_path / "b.csv", Assignment([1, 1], 1))
    assert io.read_assignment(tmp_path / "b.csv").selected is None


def test_trace_round_trip(tmp_path):
    d = standardize(generate_dataset(GenConfig(K_star=3, m=5, seed=1)))
    _, tr = run_goc(d, None, GocConfig(K0=3, lam=0.01))
    io.write_trace(tmp_path / "t.csv", tr)
    rows = io.read_trace(tmp_path / "t.csv")
    assert [r["objective"] for r in rows] == [r.objective for r in tr.iterations]
    assert [r["K"] for r in rows] == [r.K for r in tr.iterations]


def test_similarity_round_trip(tmp_path):
    d = generate_dataset(GenConfig(K_star=3, m=5, seed=1))
    S = discrepancy_matrix(d, "s3")
    io.write_similarity(tmp_path / "s.csv", S)
    T = io.read_similarity(tmp_path / "s.csv")
    assert T.kind == "s3" and T.values.tobytes() == S.values.tobytes()


def test_truth_ids_consecutive(tmp_path):
    (tmp_path / "t.csv").write_text("individual,true_cluster\n1,1\n3,1\n")
    with pytest.raises(ParseError, match=":3"):
        io.read_truth(tmp_path / "t.csv")

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ksep.boolfn import constant, from_index, parity
from ksep.data import (CVPlan, DataError, LabeledDataset, SmallBooleanCVWarning, complexity_index,
                       crossvalidate, from_boolean, load_csv, make_folds, save_csv)
from ksep.learner import TrainConfig


def write(tmp_path, text, name="d.csv"):
    p = tmp_path / name
    p.write_text(text)
    return p


def test_load_xor(tmp_path):
    d = load_csv(write(tmp_path, "x1,x2,label\n0,0,0\n0,1,1\n1,0,1\n1,1,0\n"))
    assert len(d) == 4 and d.dim == 2
    assert d.labels.tolist() == [False, True, True, False]
    assert d.feature_names == ["x1", "x2"] and d.class_names == ("0", "1")
    assert not d.degenerate


def test_label_column_by_name_and_positive(tmp_path):
    d = load_csv(write(tmp_path, "cls;a;b\nyes;1;2\nno;3;4\n"), delimiter=";",
                 label_column="cls", positive="no")
    assert d.points.tolist() == [[1, 2], [3, 4]]
    assert d.labels.tolist() == [False, True]
    d2 = load_csv(write(tmp_path, "1,2,b\n3,4,a\n", "nh.csv"), header=False)
    assert d2.feature_names == ["x1", "x2"] and d2.labels.tolist() == [True, False]


def test_three_classes_named(tmp_path):
    with pytest.raises(DataError, match="3 classes: a, b, c"):
        load_csv(write(tmp_path, "x,label\n0,a\n1,b\n2,c\n"))


def test_missing_values_report_rows(tmp_path):
    with pytest.raises(DataError, match="rows 3, 5"):
        load_csv(write(tmp_path, "x,y,label\n0,1,a\n,1,b\n1,1,a\n1,nan,b\n"))


def test_non_numeric_and_ragged(tmp_path):
    with pytest.raises(DataError, match=r"d.csv:3: column 2 is not numeric: 'q'"):
        load_csv(write(tmp_path, "x,y,label\n0,1,a\n1,q,b\n"))
    with pytest.raises(DataError, match="expected 3 columns"):
        load_csv(write(tmp_path, "x,y,label\n0,1\n", "r.csv"))
    with pytest.raises(DataError):
        load_csv(tmp_path / "absent.csv")
    with pytest.raises(DataError, match="no column"):
        load_csv(write(tmp_path, "x,label\n0,a\n", "n.csv"), label_column="cls")


def test_single_class_is_flagged(tmp_path):
    d = load_csv(write(tmp_path, "x,label\n0,a\n1,a\n"))
    assert d.degenerate


def test_from_boolean():
    d = from_boolean(parity(2))
    assert d.points.tolist() == [[0, 0], [0, 1], [1, 0], [1, 1]]
    assert d.labels.tolist() == [False, True, True, False]
    assert from_boolean(constant(3, True)).degenerate
    f27 = from_boolean(from_index(3, 27))
    assert np.flatnonzero(f27.labels).tolist() == [0, 1, 3, 4]


def test_parity3_export_round_trip(tmp_path):
    d = from_boolean(parity(3))
    p = tmp_path / "parity3.csv"
    save_csv(d, p)
    lines = p.read_text().splitlines()
    assert lines[0] == "x1,x2,x3,label" and len(lines) == 9
    assert lines[1:3] == ["0,0,0,0", "0,0,1,1"]
    back = load_csv(p)
    assert np.array_equal(back.points, d.points)
    assert back.labels.tolist() == [bin(v).count("1") % 2 == 1 for v in range(8)]


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 4).flatmap(lambda n: st.tuples(st.just(n), st.integers(1, (1 << (1 << n)) - 2))))
def test_export_load_identity(tmp_path_factory, args):
    n, idx = args
    d = from_boolean(from_index(n, idx))
    p = tmp_path_factory.mktemp("rt") / "t.csv"
    save_csv(d, p)
    back = load_csv(p)
    assert np.array_equal(back.points, d.points)
    assert np.array_equal(back.labels, d.labels)


def test_save_float_points(tmp_path):
    d = LabeledDataset(np.array([[0.25, 1.0], [2.0, -1.5]]), [True, False], ["a", "b"],
                       ("neg", "pos"))
    p = tmp_path / "f.csv"
    save_csv(d, p)
    back = load_csv(p, positive="pos")
    assert np.array_equal(back.points, d.points) and back.labels.tolist() == [True, False]


def test_dataset_invariants():
    with pytest.raises(DataError):
        LabeledDataset(np.zeros((2, 2)), [True], ["a", "b"])
    with pytest.raises(DataError):
        LabeledDataset(np.array([[np.nan]]), [True], ["a"])


def test_standardize_is_opt_in():
    d = from_boolean(parity(2))
    s = d.standardized()
    assert np.allclose(s.points.mean(axis=0), 0) and np.allclose(s.points.std(axis=0), 1)
    assert s.boolean_n is None and d.points.max() == 1


@settings(max_examples=50)
@given(st.lists(st.booleans(), min_size=4, max_size=60), st.integers(2, 7), st.integers(0, 99))
def test_stratified_folds(labels, folds, seed):
    lab = np.array(labels)
    parts = make_folds(lab, CVPlan("kfold", folds, seed))
    allidx = np.sort(np.concatenate(parts))
    assert allidx.tolist() == list(range(len(lab)))
    for cls in (True, False):
        total = int((lab == cls).sum())
        for p in parts:
            expect = total * len(p) / len(lab)
            assert abs(int((lab[p] == cls).sum()) - expect) <= 1 + 1e-9
        counts = [int((lab[p] == cls).sum()) for p in parts]
        assert max(counts) - min(counts) <= 1


def test_loo_plan_and_validation():
    assert [p.tolist() for p in make_folds([True, False, True], CVPlan("loo"))] == [[0], [1], [2]]
    with pytest.raises(ValueError):
        CVPlan("bootstrap")
    with pytest.raises(ValueError):
        CVPlan("kfold", folds=1)


def test_crossvalidate_rejects_single_class():
    with pytest.raises(DataError):
        crossvalidate(from_boolean(constant(3, False)))


def test_crossvalidate_xor_warns():
    with pytest.warns(SmallBooleanCVWarning):
        s = crossvalidate(from_boolean(parity(2)), plan=CVPlan("loo"))
    assert len(s.accuracies) == 4 and s.warnings


def test_crossvalidate_reproducible_across_workers():
    rng = np.random.default_rng(0)
    X = np.vstack([rng.normal(-2, 1, (20, 2)), rng.normal(2, 1, (20, 2))])
    y = np.r_[np.zeros(20, bool), np.ones(20, bool)]
    d = LabeledDataset(X, y, ["a", "b"])
    plan = CVPlan("kfold", 5, seed=3)
    a = crossvalidate(d, TrainConfig(restarts=5), plan, workers=1)
    b = crossvalidate(d, TrainConfig(restarts=5), plan, workers=3)
    assert a.to_json() == b.to_json()
    assert a.mean > 0.9 and sum(a.k_distribution.values()) == 5


def test_parity4_loo_above_base_rate():
    """With k pinned at n+1 most folds recover the held-out vertex."""
    d = from_boolean(parity(4))
    s = crossvalidate(d, TrainConfig(k_min=5, k_max=5), CVPlan("loo"))
    assert s.mean >= 0.7
    assert set(s.k_distribution) <= {4, 5}


def test_complexity_index():
    assert complexity_index(from_boolean(parity(2))).k == 3
    rep = complexity_index(from_boolean(parity(5)))
    assert rep.k == 6 and rep.pure
    assert rep.to_json()["cluster_sizes"] == rep.cluster_sizes
    rng = np.random.default_rng(2)
    X = np.vstack([rng.normal(-4, 1, (30, 3)), rng.normal(4, 1, (30, 3))])
    y = np.r_[np.zeros(30, bool), np.ones(30, bool)]
    assert complexity_index(LabeledDataset(X, y, list("abc"))).k == 2
    with pytest.raises(DataError):
        complexity_index(from_boolean(constant(2, True)))

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from qubofs import dataio
from qubofs.dataio import DataError, Dataset, SplitSpec


def _write(path, text):
    path.write_text(text)
    return path


def test_load_csv_basic(tmp_path):
    p = _write(tmp_path / "d.csv", "a,b,y\n1,5,0\n2,3,1\n3,4,0\n")
    ds = dataio.load_csv(p, "y")
    assert ds.names == ("a", "b")
    assert ds.n_rows == 3 and ds.n_features == 2
    assert ds.target.tolist() == [0, 1, 0]


def test_non_binary_target_rejected(tmp_path):
    p = _write(tmp_path / "d.csv", "a,y\n1,0\n2,1\n3,2\n")
    with pytest.raises(DataError, match="non-binary target"):
        dataio.load_csv(p, "y")


def test_standardize_three_rows(tmp_path):
    p = _write(tmp_path / "d.csv", "a,y\n1.0,0\n2.0,1\n3.0,0\n")
    x = dataio.load_csv(p, "y", standardize=True).features[:, 0]
    assert abs(x.mean()) < 1e-12
    assert abs(x.var() - 1.0) < 1e-12


def test_missing_rows_dropped_and_counted(tmp_path):
    p = _write(tmp_path / "d.csv", "a,b,y\n1,2,0\n,3,1\n2,NA,1\n3,1,1\n4,0,0\n")
    ds = dataio.load_csv(p, "y")
    assert ds.n_rows == 3
    assert ds.dropped_rows == 2


def test_constant_column_strict_and_dropped(tmp_path, caplog):
    p = _write(tmp_path / "d.csv", "a,c,y\n1,7,0\n2,7,1\n3,7,0\n")
    with pytest.raises(DataError, match="constant"):
        dataio.load_csv(p, "y")
    ds = dataio.load_csv(p, "y", drop_constant=True)
    assert "constant" in caplog.text
    assert ds.names == ("a",)
    assert ds.dropped_columns == ("c",)


def test_single_class_rejected(tmp_path):
    p = _write(tmp_path / "d.csv", "a,y\n1,1\n2,1\n")
    with pytest.raises(DataError):
        dataio.load_csv(p, "y")


def test_too_few_rows(tmp_path):
    p = _write(tmp_path / "d.csv", "a,y\n1,1\n")
    with pytest.raises(DataError):
        dataio.load_csv(p, "y")


def test_missing_target_column(tmp_path):
    p = _write(tmp_path / "d.csv", "a,y\n1,1\n2,0\n")
    with pytest.raises(DataError):
        dataio.load_csv(p, "label")


def test_write_read_roundtrip_bitwise(tmp_path, rng):
    x = rng.normal(size=(20, 3)) * 1e3
    y = (rng.random(20) < 0.5).astype(int)
    y[:2] = [0, 1]
    ds = Dataset(x, y, ("p", "q", "r"))
    dataio.write_csv(ds, tmp_path / "o.csv")
    back = dataio.load_csv(tmp_path / "o.csv", "target")
    assert np.array_equal(back.features, ds.features)
    assert np.array_equal(back.target, ds.target)


def test_standardize_idempotent(rng):
    ds = dataio.make_planted(200, 4, {0: 1.0, 1: -1.0}, seed=3)
    once = dataio.standardize(ds)
    twice = dataio.standardize(once)
    assert np.max(np.abs(once.features - twice.features)) < 1e-12


def test_split_partition_and_determinism():
    ds = dataio.load_breast_cancer()
    a, b = dataio.split(ds, SplitSpec(0.5, 7))
    a2, b2 = dataio.split(ds, SplitSpec(0.5, 7))
    assert np.array_equal(a.features, a2.features) and np.array_equal(b.target, b2.target)
    assert a.n_rows + b.n_rows == ds.n_rows
    assert a.n_rows == round(0.5 * ds.n_rows)
    joined = np.vstack([a.features, b.features])
    key = lambda m: m[np.lexsort(m.T[::-1])]
    assert np.array_equal(key(joined), key(ds.features))


@given(st.integers(0, 2**64 - 1), st.floats(0.2, 0.8))
def test_split_parts_keep_both_classes(seed, fraction):
    ds = dataio.make_planted(40, 3, {0: 1.0}, seed=1)
    a, b = dataio.split(ds, SplitSpec(fraction, seed))
    for part in (a, b):
        assert 0 < part.target.sum() < part.n_rows


def test_split_spec_validation():
    with pytest.raises(ValueError):
        SplitSpec(1.0)
    with pytest.raises(ValueError):
        SplitSpec(0.5, -1)


def test_bundled_breast_cancer():
    ds = dataio.load_breast_cancer()
    assert (ds.n_rows, ds.n_features) == (569, 10)
    assert int(ds.target.sum()) == 212


def test_bundled_german_credit():
    ds = dataio.load_german_credit()
    assert (ds.n_rows, ds.n_features) == (1000, 27)
    assert int(ds.target.sum()) == 300


def test_lending_standin_deterministic():
    a = dataio.make_lending_standin()
    b = dataio.make_lending_standin()
    assert a.n_features == 8 and a.n_rows == 1000
    assert np.array_equal(a.features, b.features)


def test_dataset_is_read_only():
    ds = dataio.load_breast_cancer()
    with pytest.raises(ValueError):
        ds.features[0, 0] = 1.0

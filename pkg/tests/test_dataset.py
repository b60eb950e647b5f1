import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from bigtax.dataset import (
    ColumnSchema, TransformParams, VariableKind, apply_transform, fit_transform, from_arrays,
    impute, load_csv, missing_summary, read_schema, split, write_csv, write_schema,
)
from bigtax.errors import (
    ConstantColumn, EmptyData, InvalidParameter, MissingValues, SchemaError,
)


def write(tmp_path, text, name="d.csv"):
    p = tmp_path / name
    p.write_text(text)
    return p


def test_musk_shape(musk):
    assert (musk.n, musk.p, musk.g) == (476, 166, 2)


def test_pima_and_crabs_shapes(pima, crabs):
    assert (pima.n, pima.p, pima.g) == (768, 8, 2)
    assert (crabs.n, crabs.p, crabs.g) == (200, 5, 2)
    assert crabs.label_names == ("F", "M")


def test_header_only_is_empty(tmp_path):
    with pytest.raises(EmptyData):
        load_csv(write(tmp_path, "a,b,class\n"), "class")


def test_question_mark_is_missing(tmp_path):
    p = write(tmp_path, "a,b,class\n1,2,x\n3,?,y\n5,6,x\n7,8,y\n")
    ds = load_csv(p, "class")
    assert missing_summary(ds).total == 1
    assert np.isnan(ds.values[1, 1])


def test_empty_cell_is_missing(tmp_path):
    ds = load_csv(write(tmp_path, "a,class\n1,x\n,y\n"), "class")
    assert missing_summary(ds).total == 1


def test_label_column_absent(tmp_path):
    with pytest.raises(SchemaError):
        load_csv(write(tmp_path, "a,b\n1,2\n"), "class")


def test_single_label_rejected(tmp_path):
    with pytest.raises(SchemaError):
        load_csv(write(tmp_path, "a,class\n1,x\n2,x\n"), "class")


def test_missing_file(tmp_path):
    with pytest.raises(FileNotFoundError):
        load_csv(tmp_path / "nope.csv", "class")


def test_kind_inference(tmp_path):
    p = write(tmp_path, "b,c,r,s,class\n0,1,1.5,u,x\n1,3,2.0,v,y\n1,0,-1,u,x\n")
    ds = load_csv(p, "class")
    kinds = [c.kind for c in ds.schema]
    assert kinds == [VariableKind.BINARY, VariableKind.COUNT, VariableKind.REAL,
                     VariableKind.CATEGORICAL]
    assert ds.schema[3].levels == ("u", "v")


def test_labels_sorted_numerically(tmp_path):
    ds = load_csv(write(tmp_path, "a,class\n1,10\n2,9\n3,10\n"), "class")
    assert ds.label_names == ("9", "10")
    assert ds.labels.tolist() == [2, 1, 2]


def test_schema_sidecar_violation(tmp_path):
    p = write(tmp_path, "a,class\n0.5,x\n1,y\n")
    s = tmp_path / "s.json"
    s.write_text(json.dumps({"columns": [{"name": "a", "kind": "binary"}]}))
    with pytest.raises(SchemaError):
        load_csv(p, "class", schema=s)


def test_ordinal_schema_roundtrip(tmp_path):
    p = write(tmp_path, "a,class\nlow,x\nhigh,y\nmid,x\n")
    s = tmp_path / "s.json"
    s.write_text(json.dumps({"columns": [{"name": "a", "kind": "ordinal",
                                          "levels": ["low", "mid", "high"]}]}))
    ds = load_csv(p, "class", schema=s)
    assert ds.values[:, 0].tolist() == [0, 2, 1]
    write_schema(ds, tmp_path / "s2.json")
    assert read_schema(tmp_path / "s2.json")[0].levels == ("low", "mid", "high")


def test_ordinal_requires_levels():
    with pytest.raises(SchemaError):
        ColumnSchema("a", VariableKind.ORDINAL)


def test_expected_shape_checked(tmp_path):
    p = write(tmp_path, "a,class\n1,x\n2,y\n", "pima.csv")
    with pytest.raises(SchemaError):
        load_csv(p, "class")


def test_write_load_roundtrip(tmp_path, crabs):
    write_csv(crabs, tmp_path / "c.csv", "sex", comment="provenance line")
    back = load_csv(tmp_path / "c.csv", "sex")
    np.testing.assert_array_equal(back.values, crabs.values)
    np.testing.assert_array_equal(back.labels, crabs.labels)
    assert back.names == crabs.names


def test_write_load_roundtrip_with_missing_and_categories(tmp_path):
    p = write(tmp_path, "a,s,class\n1.25,u,x\n?,v,y\n3,?,x\n")
    ds = load_csv(p, "class")
    write_csv(ds, tmp_path / "out.csv")
    back = load_csv(tmp_path / "out.csv", "class", schema=list(ds.schema))
    np.testing.assert_array_equal(np.isnan(back.values), np.isnan(ds.values))
    np.testing.assert_array_equal(np.nan_to_num(back.values), np.nan_to_num(ds.values))


def test_missing_summary_fully_observed():
    ds = from_arrays(np.arange(30.0).reshape(10, 3), [1, 2] * 5)
    s = missing_summary(ds)
    assert s.rates.tolist() == [0, 0, 0] and s.rows_affected == 0 and s.total == 0


def test_missing_rate_half(tmp_path):
    ds = load_csv(write(tmp_path, "a,b,class\n?,1,x\n2,1,y\n?,1,x\n4,1,y\n"), "class")
    s = missing_summary(ds)
    assert s.rates[0] == 0.5 and s.total == 2 and s.rows_affected == 2


def test_musk_has_no_missing(musk):
    s = missing_summary(musk)
    assert s.total == 0 and np.all(s.rates == 0)


def test_impute_delete(tmp_path):
    ds = load_csv(write(tmp_path, "a,b,class\n1,2,x\n?,2,y\n3,4,x\n5,6,y\n"), "class")
    assert impute(ds, "delete").n == 3


def test_impute_mean(tmp_path):
    ds = load_csv(write(tmp_path, "a,class\n1,x\n2,y\n?,x\n3,y\n"), "class")
    ds = impute(ds, "central")
    assert ds.values[2, 0] == 2.0


def test_impute_mode_categorical(tmp_path):
    ds = load_csv(write(tmp_path, "a,class\na,x\na,y\nb,x\n?,y\n"), "class")
    out = impute(ds, "central")
    assert out.schema[0].levels[int(out.values[3, 0])] == "a"


def test_impute_lower_median_count(tmp_path):
    ds = load_csv(write(tmp_path, "a,class\n1,x\n4,y\n2,x\n7,y\n?,x\n"), "class")
    assert impute(ds, "central").values[4, 0] == 2.0


def test_impute_mode_tie_smallest(tmp_path):
    ds = load_csv(write(tmp_path, "a,class\n1,x\n0,y\n?,x\n"), "class")
    assert impute(ds, "central").values[2, 0] == 0.0


def test_impute_all_missing_column(tmp_path):
    ds = load_csv(write(tmp_path, "a,b,class\n?,1,x\n?,2,y\n"), "class")
    with pytest.raises(MissingValues):
        impute(ds, "central")


def test_impute_delete_everything(tmp_path):
    ds = load_csv(write(tmp_path, "a,b,class\n?,1,x\n2,?,y\n"), "class")
    with pytest.raises(EmptyData):
        impute(ds, "delete")


@given(arrays(float, (12, 3), elements=st.floats(-50, 50, allow_nan=False)),
       st.lists(st.booleans(), min_size=36, max_size=36))
def test_impute_keeps_observed_cells(values, holes):
    mask = np.array(holes).reshape(12, 3)
    mask[0] = False  # every column keeps an observed cell
    v = np.where(mask, np.nan, values)
    ds = from_arrays(v, [1, 2] * 6)
    out = impute(ds, "central")
    assert out.n == ds.n and out.p == ds.p
    assert not np.isnan(out.values).any()
    np.testing.assert_array_equal(out.values[~mask], values[~mask])
    if mask.any(axis=1).sum() < 12:
        assert impute(ds, "delete").p == ds.p


def test_standardize_hand_example():
    ds = from_arrays([[1.0], [2.0], [3.0]], [1, 2, 1])
    out, params = fit_transform(ds, "standardize")
    np.testing.assert_allclose(out.values[:, 0], [-0.70711, 0, 0.70711], atol=1e-5)
    assert params.scale[0] == pytest.approx(np.sqrt(2))


def test_standardize_sd_mode():
    ds = from_arrays([[1.0], [2.0], [3.0]], [1, 2, 1])
    out, _ = fit_transform(ds, "standardize", scale_mode="sd")
    np.testing.assert_allclose(out.values[:, 0], [-1, 0, 1])


def test_standardize_constant_column():
    ds = from_arrays([[5.0], [5.0], [5.0]], [1, 2, 1])
    with pytest.raises(ConstantColumn):
        fit_transform(ds, "standardize")


def test_transform_rejects_missing():
    ds = from_arrays([[1.0], [np.nan], [3.0]], [1, 2, 1])
    with pytest.raises(MissingValues):
        fit_transform(ds, "unitize")


def test_unitize_endpoints():
    ds = from_arrays([[2.0], [4.0], [6.0]], [1, 2, 1])
    out, params = fit_transform(ds, "unitize")
    assert out.values[:, 0].tolist() == [0, 0.5, 1]
    new = apply_transform(params, from_arrays([[8.0]], [1]))
    assert new.values[0, 0] == 1.5


def test_apply_transform_matches_fit(crabs):
    out, params = fit_transform(crabs, "standardize")
    np.testing.assert_array_equal(apply_transform(params, crabs).values, out.values)


def test_apply_transform_at_mean_is_zero(crabs):
    _, params = fit_transform(crabs, "standardize")
    row = np.array([params.offset])
    assert np.all(apply_transform(params, from_arrays(row, [1], crabs.names)).values == 0)


def test_apply_transform_schema_mismatch(crabs, pima):
    _, params = fit_transform(crabs, "standardize")
    with pytest.raises(SchemaError):
        apply_transform(params, pima)


def test_categorical_passes_through(tmp_path):
    ds = load_csv(write(tmp_path, "a,s,class\n1,u,x\n2,v,y\n4,u,x\n"), "class")
    out, params = fit_transform(ds, "standardize")
    np.testing.assert_array_equal(out.values[:, 1], ds.values[:, 1])
    assert params.columns == (0,)


def test_transform_params_json_roundtrip(pima):
    _, params = fit_transform(pima, "standardize", scale_mode="sd")
    assert TransformParams.from_json(params.to_json()) == params


@given(arrays(float, (15, 4), elements=st.floats(-1e3, 1e3, allow_nan=False)))
def test_standardize_moments(X):
    X = X + np.arange(15)[:, None] * np.array([1.0, -2.0, 0.5, 3.0])  # never constant
    out, _ = fit_transform(from_arrays(X, [1, 2] * 7 + [1]), "standardize")
    Z = out.values
    assert np.all(np.abs(Z.mean(axis=0)) < 1e-10)
    assert np.all(np.abs((Z ** 2).sum(axis=0) - 1) < 1e-10)


@given(arrays(float, (15, 4), elements=st.floats(-1e3, 1e3, allow_nan=False)))
def test_unitize_range(X):
    X = X + np.arange(15)[:, None] * np.array([1.0, -2.0, 0.5, 3.0])
    Z = fit_transform(from_arrays(X, [1, 2] * 7 + [1]), "unitize")[0].values
    assert np.all(np.abs(Z.min(axis=0)) <= 1e-12)
    assert np.all(np.abs(Z.max(axis=0) - 1) <= 1e-12)


def test_split_sizes_and_determinism():
    ds = from_arrays(np.arange(10.0)[:, None], [1, 2] * 5)
    tr, te = split(ds, 0.3, 42)
    assert (tr.n, te.n) == (7, 3)
    assert not set(tr.values[:, 0]) & set(te.values[:, 0])
    tr2, te2 = split(ds, 0.3, 42)
    np.testing.assert_array_equal(te.values, te2.values)


@pytest.mark.parametrize("frac", [0.0, 1.0, -0.1, 0.01])
def test_split_bad_fraction(frac):
    ds = from_arrays(np.arange(10.0)[:, None], [1, 2] * 5)
    with pytest.raises(InvalidParameter):
        split(ds, frac, 1)


@given(st.integers(2, 60), st.floats(0.05, 0.95), st.integers(0, 2**31))
def test_split_is_partition(n, frac, seed):
    m = round(n * frac)
    ds = from_arrays(np.arange(float(n))[:, None], [1, 2] * (n // 2) + [1] * (n % 2))
    if m < 1 or n - m < 1:
        with pytest.raises(InvalidParameter):
            split(ds, frac, seed)
        return
    tr, te = split(ds, frac, seed)
    ids = np.concatenate([tr.values[:, 0], te.values[:, 0]])
    assert te.n == m and sorted(ids.tolist()) == list(range(n))


def test_dataset_is_read_only(crabs):
    with pytest.raises(ValueError):
        crabs.values[0, 0] = 1.0

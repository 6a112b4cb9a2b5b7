import io

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from failsort.dataset import (
    ACTIVE,
    INACTIVE,
    INCREASING,
    TRIM_LITERAL,
    TRIM_STANDARD,
    CriterionSpec,
    DatasetError,
    PanelDataset,
    PerformanceMatrix,
    align_directions,
    build_matrix,
    iqr_trim,
    load_dataset,
    write_dataset_csv,
)

CSV_SMALL = """company_id,label,size_stratum,year_offset,ROA,TD_TA
a,active,large,1,0.07,0.4
b,inactive,small,1,-0.02,0.9
c,Active,micro,1,0.01,0.5
"""


def test_load_small_file():
    ds = load_dataset(CSV_SMALL)
    assert len(ds.companies) == 3
    assert ds.criterion_ids == ["ROA", "TD_TA"]
    assert ds.companies[0].get("ROA", 1) == 0.07


def test_label_case_insensitive():
    ds = load_dataset(CSV_SMALL)
    by_id = {c.company_id: c for c in ds.companies}
    assert by_id["c"].label == ACTIVE
    assert by_id["b"].label == INACTIVE


def test_missing_required_column_is_header_error():
    bad = "company_id,size_stratum,year_offset,ROA\na,large,1,0.1\n"
    with pytest.raises(DatasetError, match="label"):
        load_dataset(bad)


def test_unknown_label_token_rejected():
    bad = CSV_SMALL.replace("inactive", "zombie")
    with pytest.raises(DatasetError, match="label token"):
        load_dataset(bad)


def test_duplicate_company_year_rejected():
    bad = CSV_SMALL + "a,active,large,1,0.0,0.0\n"
    with pytest.raises(DatasetError, match="duplicate"):
        load_dataset(bad)


def test_unparseable_numeric_recorded_as_missing():
    csv_text = CSV_SMALL.replace("0.07", "n/a")
    ds = load_dataset(csv_text)
    assert ds.companies[0].get("ROA", 1) is None
    assert ds.companies[0].get("TD_TA", 1) == 0.4


def test_roundtrip_through_csv():
    ds = load_dataset(CSV_SMALL)
    buf = io.StringIO()
    write_dataset_csv(ds, buf)
    ds2 = load_dataset(buf.getvalue())
    assert [c.company_id for c in ds2.companies] == [c.company_id for c in ds.companies]
    assert ds2.companies[1].values == ds.companies[1].values


def _panel(rows, criteria=("ROA",)):
    csv_lines = ["company_id,label,size_stratum,year_offset," + ",".join(criteria)]
    csv_lines += rows
    return load_dataset("\n".join(csv_lines) + "\n")


def test_build_matrix_drops_missing_rows():
    ds = _panel([
        "a,active,large,1,0.1",
        "b,active,large,1,",
        "c,inactive,small,1,0.3",
        "d,inactive,small,1,0.4",
        "e,active,micro,1,0.5",
    ])
    m = build_matrix(ds, 1, ["ROA"], drop_missing=True)
    assert m.company_ids == ("a", "c", "d", "e")
    assert m.values.shape == (4, 1)


def test_build_matrix_unknown_criterion():
    ds = _panel(["a,active,large,1,0.1"])
    with pytest.raises(DatasetError, match="unknown criterion"):
        build_matrix(ds, 1, ["NOPE"])


def test_build_matrix_all_rows_when_complete():
    ds = load_dataset(CSV_SMALL)
    m = build_matrix(ds, 1, ["ROA", "TD_TA"])
    assert len(m.company_ids) == 3
    assert not np.isnan(m.values).any()


def test_align_negates_min_criteria_only():
    ds = load_dataset(CSV_SMALL)
    m = build_matrix(ds, 1, ["ROA", "TD_TA"])
    aligned = align_directions(m, ds.criteria)
    assert aligned.column("TD_TA")[0] == -0.4
    assert aligned.column("ROA")[0] == 0.07
    assert all(d == INCREASING for d in aligned.directions)


def test_align_is_involution_on_values():
    ds = load_dataset(CSV_SMALL)
    m = build_matrix(ds, 1, ["ROA", "TD_TA"])
    twice = align_directions(align_directions(m, ds.criteria), ds.criteria)
    assert np.array_equal(twice.values, m.values)


def _matrix_from_column(col):
    col = np.asarray(col, dtype=float)
    ids = tuple(f"c{i}" for i in range(len(col)))
    labels = {cid: ACTIVE for cid in ids}
    return PerformanceMatrix(1, ("X",), ids, col.reshape(-1, 1), labels, (INCREASING,))


def test_trim_standard_clamps_to_tukey_fence():
    # quartiles (linear interpolation): Q1=1, Q3=3 for 1,1,2,3,3 plus outlier
    col = [1.0, 1.0, 2.0, 3.0, 3.0, 7.0]
    q1, q3 = np.quantile(col, [0.25, 0.75])
    m = iqr_trim(_matrix_from_column(col), TRIM_STANDARD)
    assert m.values[-1, 0] == pytest.approx(q3 + 1.5 * (q3 - q1))


def test_trim_literal_uses_q1_upper_fence():
    col = [1.0, 1.0, 2.0, 3.0, 3.0, 7.0]
    q1, q3 = np.quantile(col, [0.25, 0.75])
    m = iqr_trim(_matrix_from_column(col), TRIM_LITERAL)
    assert m.values[-1, 0] == pytest.approx(q1 + 1.5 * (q3 - q1))


def test_trim_leaves_infence_values_alone():
    col = [1.0, 1.0, 2.0, 3.0, 3.0, 7.0]
    m = iqr_trim(_matrix_from_column(col))
    assert m.values[2, 0] == 2.0


def test_trim_constant_column_passthrough():
    col = [2.0, 2.0, 2.0, 2.0]
    m = iqr_trim(_matrix_from_column(col))
    assert np.array_equal(m.values[:, 0], col)


def test_trim_requires_four_rows():
    with pytest.raises(DatasetError):
        iqr_trim(_matrix_from_column([1.0, 2.0, 3.0]))


@settings(max_examples=60, deadline=None)
@given(st.lists(st.floats(min_value=-1e6, max_value=1e6, allow_nan=False),
                min_size=4, max_size=40))
def test_trim_values_inside_fences(col):
    m = iqr_trim(_matrix_from_column(col), TRIM_STANDARD)
    q1, q3 = np.quantile(col, [0.25, 0.75])
    iqr = q3 - q1
    if iqr == 0:
        assert np.array_equal(m.values[:, 0], np.asarray(col))
    else:
        assert np.all(m.values[:, 0] >= q1 - 1.5 * iqr - 1e-9)
        assert np.all(m.values[:, 0] <= q3 + 1.5 * iqr + 1e-9)


@settings(max_examples=40, deadline=None)
@given(st.lists(st.sampled_from(["active", "inactive"]), min_size=2, max_size=12))
def test_matrix_row_order_follows_input_order(labels):
    rows = [f"c{i},{lab},large,1,{0.1 * i}" for i, lab in enumerate(labels)]
    ds = _panel(rows)
    m = build_matrix(ds, 1, ["ROA"])
    assert m.company_ids == tuple(f"c{i}" for i in range(len(labels)))


def test_unknown_criterion_requires_spec():
    text = "company_id,label,size_stratum,year_offset,WEIRD\na,active,large,1,0.1\n"
    with pytest.raises(DatasetError, match="WEIRD"):
        load_dataset(text)
    spec = {"WEIRD": CriterionSpec("WEIRD", "weird ratio", "activity", INCREASING)}
    ds = load_dataset(text, specs=spec)
    assert ds.criteria[0].name == "weird ratio"


def test_trim_literal_lower_fence_unchanged():
    # the lower fence is the same in both modes
    col = [-9.0, 1.0, 1.0, 2.0, 3.0, 3.0]
    q1, q3 = np.quantile(col, [0.25, 0.75])
    lit = iqr_trim(_matrix_from_column(col), TRIM_LITERAL)
    std = iqr_trim(_matrix_from_column(col), TRIM_STANDARD)
    assert lit.values[0, 0] == pytest.approx(q1 - 1.5 * (q3 - q1))
    assert lit.values[0, 0] == std.values[0, 0]


def test_build_matrix_empty_after_dropping():
    ds = _panel(["a,active,large,1,", "b,inactive,small,1,"])
    with pytest.raises(DatasetError, match="no complete rows"):
        build_matrix(ds, 1, ["ROA"], drop_missing=True)

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from failsort.dataset import RATIO_CATALOG, RETAINED_SIX, CriterionSpec
from failsort.metrics import ConfusionMatrix, MetricsError, confusion, metrics
from failsort.pairs import PairsError, generate_pairs

CORRELATED = [("ROA", "EBITDA_TA"), ("EQ_RATIO", "TD_TA")]


def test_confusion_perfect_prediction():
    c = confusion(["C1"] * 3 + ["C2"] * 2, ["C1"] * 3 + ["C2"] * 2)
    assert (c.tp, c.fp, c.fn, c.tn) == (3, 0, 0, 2)


def test_confusion_all_predicted_healthy():
    c = confusion(["C1", "C2"], ["C1", "C1"])
    assert (c.tp, c.fp, c.fn, c.tn) == (1, 0, 1, 0)


def test_confusion_length_mismatch():
    with pytest.raises(MetricsError):
        confusion(["C1"], ["C1", "C2"])


def test_metrics_reference_cell():
    # the averaged holdout confusion 8/3/4/7 gives 68.18% overall accuracy
    rep = metrics(ConfusionMatrix(8, 3, 4, 7))
    assert rep.oca == pytest.approx(100 * 15 / 22, abs=5e-3)
    assert rep.oca == pytest.approx(68.18, abs=5e-3)
    assert rep.sens == pytest.approx(100 * 8 / 11, rel=1e-10)
    assert rep.spec == pytest.approx(100 * 7 / 11, rel=1e-10)
    assert rep.aca == pytest.approx(100 * 15 / 22, rel=1e-10)
    assert rep.auroc == pytest.approx(50 * (8 / 12 + 7 / 10), rel=1e-10)
    assert rep.gini == pytest.approx(100 * (8 / 12 + 7 / 10) - 100, rel=1e-10)


def test_metrics_perfect_classifier():
    rep = metrics(ConfusionMatrix(5, 0, 0, 5))
    assert rep.sens == rep.spec == rep.aca == rep.oca == rep.auroc == 100.0
    assert rep.gini == 100.0


def test_metrics_undefined_not_zero():
    rep = metrics(ConfusionMatrix(0, 0, 1, 1))  # no true C1 companies
    assert rep.sens is None
    assert rep.aca is None
    assert rep.oca == 50.0


def test_metrics_empty_matrix_rejected():
    with pytest.raises(MetricsError):
        metrics(ConfusionMatrix(0, 0, 0, 0))


@settings(max_examples=80, deadline=None)
@given(st.integers(0, 50), st.integers(0, 50), st.integers(0, 50), st.integers(0, 50))
def test_metrics_identities(tp, fp, fn, tn):
    if tp + fp + fn + tn == 0:
        return
    rep = metrics(ConfusionMatrix(tp, fp, fn, tn))
    if rep.sens is not None and rep.spec is not None:
        assert rep.aca == pytest.approx((rep.sens + rep.spec) / 2, rel=1e-12)
    if rep.auroc is not None:
        assert rep.gini == pytest.approx(2 * rep.auroc - 100, rel=1e-9, abs=1e-9)
    assert rep.oca * (tp + fp + fn + tn) == pytest.approx(100 * (tp + tn), rel=1e-12)


def _six_specs():
    return [RATIO_CATALOG[c] for c in RETAINED_SIX]


def test_reference_pairs():
    got = generate_pairs(_six_specs(), CORRELATED)
    assert len(got) == 8
    fronts = {p.front for p in got}
    expected = {
        ("CA_TS", "EQ_RATIO", "ROA"),
        ("CA_TA", "EQ_RATIO", "ROA"),
        ("CA_TS", "ROA", "TD_TA"),
        ("CA_TA", "ROA", "TD_TA"),
        ("CA_TS", "EBITDA_TA", "EQ_RATIO"),
        ("CA_TA", "EBITDA_TA", "EQ_RATIO"),
        ("CA_TS", "EBITDA_TA", "TD_TA"),
        ("CA_TA", "EBITDA_TA", "TD_TA"),
    }
    assert {tuple(sorted(f)) for f in fronts} == expected


def test_pairs_closed_under_complement():
    got = generate_pairs(_six_specs(), CORRELATED)
    fronts = {p.front for p in got}
    for p in got:
        assert tuple(sorted(p.complement)) in {tuple(sorted(f)) for f in fronts}


def test_pairs_all_distinct_dimensions_no_correlation():
    dims = ["profitability", "financial-structure", "liquidity",
            "turnover", "solvency", "activity"]
    specs = [CriterionSpec(f"X{i}", f"X{i}", dims[i], "increasing")
             for i in range(6)]
    got = generate_pairs(specs, [])
    assert len(got) == 20


def test_pairs_single_dimension_yields_none():
    specs = [CriterionSpec(f"X{i}", f"X{i}", "profitability", "increasing")
             for i in range(6)]
    assert generate_pairs(specs, []) == []


def test_pairs_requires_six():
    with pytest.raises(PairsError):
        generate_pairs(_six_specs()[:5], [])


def test_pairs_ordering_deterministic():
    a = generate_pairs(_six_specs(), CORRELATED)
    b = generate_pairs(_six_specs(), CORRELATED)
    assert [p.front for p in a] == [p.front for p in b]
    assert [p.index for p in a] == list(range(1, 9))

import io
import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from failsort.dataset import ACTIVE, INACTIVE, INCREASING, PerformanceMatrix
from failsort.promethee import (
    KINDS,
    NetFlowTable,
    PrometheeError,
    ThresholdSet,
    majority_vote,
    median_cut,
    net_flows,
    pairwise_pi,
    preference_degree,
    run_promethee,
)
from failsort.sampling import sample_weights


def matrix(values, criteria=None, year=1):
    values = np.asarray(values, dtype=float)
    n, k = values.shape
    criteria = tuple(criteria or (f"g{j}" for j in range(k)))
    ids = tuple(f"c{i}" for i in range(n))
    labels = {cid: (ACTIVE if i % 2 == 0 else INACTIVE) for i, cid in enumerate(ids)}
    return PerformanceMatrix(year, criteria, ids, values, labels,
                             tuple(INCREASING for _ in criteria))


def test_thresholds_from_range_rule():
    t = ThresholdSet((6.0,))
    assert t.q == (1.0,)
    assert t.p == (4.0,)
    assert t.s == (2.5,)


def test_preference_zero_for_nonpositive_differences():
    for kind in KINDS:
        assert preference_degree(kind, 0.0, q=1.0, p=4.0, s=2.5) == 0.0
        assert preference_degree(kind, -3.0, q=1.0, p=4.0, s=2.5) == 0.0


def test_preference_linear_midpoint():
    assert preference_degree("linear", 2.5, q=1.0, p=4.0) == pytest.approx(0.5)


def test_preference_shapes():
    assert preference_degree("usual", 1e-9) == 1.0
    assert preference_degree("u_shape", 0.5, q=1.0) == 0.0
    assert preference_degree("u_shape", 1.5, q=1.0) == 1.0
    assert preference_degree("v_shape", 2.0, p=4.0) == pytest.approx(0.5)
    assert preference_degree("level", 2.0, q=1.0, p=4.0) == 0.5
    assert preference_degree("level", 5.0, q=1.0, p=4.0) == 1.0
    g = preference_degree("gaussian", 2.5, s=2.5)
    assert g == pytest.approx(1.0 - np.exp(-0.5))


@settings(max_examples=50, deadline=None)
@given(st.sampled_from(KINDS), st.floats(0.1, 10.0))
def test_preference_nondecreasing_in_d(kind, r):
    t = ThresholdSet((r,))
    grid = np.linspace(-2 * r, 2 * r, 1000)
    vals = preference_degree(kind, grid, t.q[0], t.p[0], t.s[0])
    assert np.all(np.diff(vals) >= -1e-12)
    assert np.all((vals >= 0) & (vals <= 1))


def test_pi_identical_rows_zero():
    m = matrix([[1.0, 2.0], [1.0, 2.0], [3.0, 0.0]])
    pi = pairwise_pi(m, [0.5, 0.5], "usual")
    assert pi[0, 1] == 0.0 and pi[1, 0] == 0.0


def test_pi_dominating_row():
    m = matrix([[2.0, 3.0], [1.0, 1.0]])
    pi = pairwise_pi(m, [0.4, 0.6], "usual")
    assert pi[0, 1] == pytest.approx(1.0)
    assert pi[1, 0] == 0.0


def test_pi_half_when_better_on_one_criterion():
    m = matrix([[2.0, 1.0], [1.0, 1.0]])
    with pytest.warns(UserWarning, match="zero range"):
        pi = pairwise_pi(m, [0.5, 0.5], "usual")
    assert pi[0, 1] == pytest.approx(0.5)
    assert pi[1, 0] == 0.0


def test_net_flow_endpoints_for_dominance():
    m = matrix([[2.0, 2.0], [1.0, 1.0]])
    pi = pairwise_pi(m, [0.5, 0.5], "usual")
    plus, minus, phi = net_flows(pi)
    assert phi[0] == pytest.approx(1.0)
    assert phi[1] == pytest.approx(-1.0)


def test_net_flow_identical_alternatives():
    m = matrix([[1.0], [1.0], [1.0]])
    with pytest.warns(UserWarning, match="zero range"):
        pi = pairwise_pi(m, [1.0], "usual")
    assert np.allclose(net_flows(pi)[2], 0.0)


@settings(max_examples=40, deadline=None)
@given(st.integers(3, 12), st.integers(1, 5), st.sampled_from(KINDS),
       st.integers(0, 10**6))
def test_net_flow_conservation(n_alt, n_crit, kind, seed):
    rng = np.random.default_rng(seed)
    m = matrix(rng.normal(size=(n_alt, n_crit)))
    w = rng.dirichlet(np.ones(n_crit))
    pi = pairwise_pi(m, w, kind)
    plus, minus, phi = net_flows(pi)
    assert abs(phi.sum()) < 1e-9
    assert np.all(phi >= -1 - 1e-12) and np.all(phi <= 1 + 1e-12)


def test_run_promethee_single_criterion_weights_trivial():
    rng = np.random.default_rng(5)
    m = matrix(rng.normal(size=(6, 1)))
    t = run_promethee(m, kind="usual", scenarios=50, seed=1)
    pi = pairwise_pi(m, [1.0], "usual")
    plus, minus, phi = net_flows(pi)
    assert np.allclose(t.phi, phi)


def test_run_promethee_deterministic():
    rng = np.random.default_rng(6)
    m = matrix(rng.normal(size=(8, 3)))
    t1 = run_promethee(m, kind="gaussian", scenarios=200, seed=4)
    t2 = run_promethee(m, kind="gaussian", scenarios=200, seed=4)
    assert np.array_equal(t1.phi, t2.phi)


def test_scenario_average_equals_mean_weight_flow():
    rng = np.random.default_rng(9)
    m = matrix(rng.normal(size=(10, 3)))
    w = sample_weights(3, 400, seed=11)
    table = run_promethee(m, kind="v_shape", weights=w)
    # explicit per-scenario loop
    th = ThresholdSet.from_matrix(m)
    phis = []
    for row in w:
        pi = pairwise_pi(m, row, "v_shape", th)
        phis.append(net_flows(pi)[2])
    assert np.max(np.abs(np.mean(phis, axis=0) - table.phi)) < 1e-9


def test_zero_range_criterion_warns_and_contributes_nothing():
    m = matrix([[1.0, 5.0], [1.0, 3.0], [1.0, 1.0], [1.0, 2.0]])
    with pytest.warns(UserWarning, match="zero range"):
        t = run_promethee(m, kind="usual", scenarios=20, seed=0)
    m2 = matrix([[5.0], [3.0], [1.0], [2.0]])
    t2 = run_promethee(m2, kind="usual", scenarios=20, seed=0)
    # the degenerate criterion dilutes weights but cannot reorder flows
    assert np.array_equal(np.argsort(t.phi), np.argsort(t2.phi))


def test_median_cut_example():
    t = NetFlowTable(("a", "b", "c", "d"), np.zeros(4), np.zeros(4),
                     np.array([0.5, 0.1, -0.2, -0.6]), 1, "usual", ("g0",))
    cls = median_cut(t)
    assert cls.cutoff == pytest.approx(-0.05)
    assert [cls.classes[i] for i in ("a", "b", "c", "d")] == ["C1", "C1", "C2", "C2"]


def test_median_cut_all_equal_goes_riskier():
    t = NetFlowTable(("a", "b"), np.zeros(2), np.zeros(2),
                     np.zeros(2), 1, "usual", ("g0",))
    cls = median_cut(t)
    assert set(cls.classes.values()) == {"C2"}


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 10), st.integers(0, 10**6))
def test_median_cut_even_split(half, seed):
    rng = np.random.default_rng(seed)
    phi = rng.normal(size=2 * half)
    if len(np.unique(phi)) < len(phi):
        return
    ids = tuple(f"c{i}" for i in range(2 * half))
    t = NetFlowTable(ids, np.zeros(2 * half), np.zeros(2 * half),
                     phi, 1, "usual", ("g0",))
    cls = median_cut(t)
    values = list(cls.classes.values())
    assert values.count("C1") == half
    assert values.count("C2") == half


def _vote_fixture(votes_per_company):
    from failsort.promethee import PrometheeClassification

    ids = tuple(votes_per_company)
    out = []
    for k in range(6):
        classes = {cid: votes_per_company[cid][k] for cid in ids}
        out.append(PrometheeClassification(ids, classes, 0.0, KINDS[k]))
    return out


def test_majority_vote_rules():
    votes = {
        "u": ["C1"] * 6,
        "v": ["C1"] * 3 + ["C2"] * 3,
        "w": ["C2"] * 4 + ["C1"] * 2,
    }
    result = majority_vote(_vote_fixture(votes))
    assert result["u"] == "C1"
    assert result["v"] == "undetermined"
    assert result["w"] == "C2"


def test_majority_vote_mismatched_sets():
    a = _vote_fixture({"u": ["C1"] * 6})
    b = _vote_fixture({"z": ["C1"] * 6})
    with pytest.raises(PrometheeError):
        majority_vote(a[:3] + b[:3])


@settings(max_examples=25, deadline=None)
@given(st.integers(3, 10), st.integers(2, 4), st.sampled_from(KINDS),
       st.integers(0, 10**6), st.floats(0.1, 10.0), st.floats(-5.0, 5.0))
def test_classification_invariant_under_positive_affine(n_alt, n_crit, kind,
                                                        seed, scale, offset):
    rng = np.random.default_rng(seed)
    base = rng.normal(size=(n_alt, n_crit))
    w = sample_weights(n_crit, 50, seed=seed % 1000)
    m1 = matrix(base)
    col = seed % n_crit
    transformed = base.copy()
    transformed[:, col] = scale * transformed[:, col] + offset
    m2 = matrix(transformed)
    t1 = run_promethee(m1, kind=kind, weights=w)
    t2 = run_promethee(m2, kind=kind, weights=w)
    c1, c2 = median_cut(t1), median_cut(t2)
    assert np.allclose(t1.phi, t2.phi, atol=1e-9)
    assert c1.classes == c2.classes


def test_rank_invariance_for_usual_kind():
    rng = np.random.default_rng(33)
    base = rng.normal(size=(9, 3))
    w = sample_weights(3, 80, seed=2)
    warped = np.exp(base / 2.0)  # strictly increasing, nonlinear
    t1 = run_promethee(matrix(base), kind="usual", weights=w)
    t2 = run_promethee(matrix(warped), kind="usual", weights=w)
    assert np.allclose(t1.phi, t2.phi, atol=1e-12)


def test_flow_table_serialization():
    rng = np.random.default_rng(3)
    m = matrix(rng.normal(size=(5, 2)))
    t = run_promethee(m, kind="usual", scenarios=10, seed=0)
    cls = median_cut(t)
    buf = io.StringIO()
    t.write_csv(buf, cls.classes)
    assert buf.getvalue().splitlines()[0] == "company_id,phi_plus,phi_minus,phi,class"
    doc = json.loads(t.to_json(cls.classes))
    assert len(doc["flows"]) == 5


def test_flow_table_records_scenario_count_and_kind():
    rng = np.random.default_rng(12)
    m = matrix(rng.normal(size=(6, 2)))
    t = run_promethee(m, kind="level", scenarios=37, seed=3)
    assert t.scenario_count == 37
    assert t.kind == "level"
    assert t.criteria == m.criteria


def test_median_cut_needs_two_companies():
    t = NetFlowTable(("only",), np.zeros(1), np.zeros(1), np.zeros(1),
                     1, "usual", ("g0",))
    with pytest.raises(PrometheeError):
        median_cut(t)

"""Three-stage predictor screening: information value, two-sample t-test,
pairwise correlation.

Stage 1 drops criteria that are weak (IV below the cutoff) in most years,
stage 2 drops criteria whose class means are indistinguishable in most years,
stage 3 iteratively drops criteria that stay highly correlated with at least
two other survivors in every year.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from .dataset import ACTIVE, INACTIVE, PanelDataset

GRADES = ("useless", "weak", "medium", "strong", "suspicious")


class ScreeningError(ValueError):
    pass


@dataclass(frozen=True)
class ScreeningConfig:
    bins: int = 10
    eps: float = 1e-6
    iv_cutoff: float = 0.1          # stage-1 removal threshold
    weak_years: int = 3             # remove when weak in at least this many years
    alpha: float = 0.10             # stage-2 significance level
    insignificant_years: int = 3
    corr_cutoff: float = 0.5        # stage-3 |r| threshold
    corr_links: int = 2             # links needed in every year to flag removal
    # grade thresholds on the canonical scale, in ascending order
    grade_edges: tuple[float, ...] = (0.02, 0.1, 0.3, 0.5)


@dataclass
class IvResult:
    criterion: str
    year: int
    iv: float
    grade: str


@dataclass
class TTestResult:
    criterion: str
    year: int
    t_statistic: float
    p_value: float
    significant: bool


@dataclass
class CorrelationMatrix:
    year: int
    criteria: tuple[str, ...]
    matrix: np.ndarray


@dataclass
class ScreeningReport:
    initial: list[str]
    stage1_survivors: list[str]
    stage2_survivors: list[str]
    retained: list[str]
    iv_results: list[IvResult]
    t_results: list[TTestResult]
    correlations: list[CorrelationMatrix]
    removed: dict[str, str] = field(default_factory=dict)   # criterion -> stage

    def to_json(self) -> str:
        rows = []
        for r in self.iv_results:
            rows.append({"stage": 1, "criterion": r.criterion, "year": r.year,
                         "iv": r.iv, "grade": r.grade})
        for r in self.t_results:
            rows.append({"stage": 2, "criterion": r.criterion, "year": r.year,
                         "t": r.t_statistic, "p_value": r.p_value,
                         "significant": r.significant})
        doc = {
            "initial": self.initial,
            "stage1_survivors": self.stage1_survivors,
            "stage2_survivors": self.stage2_survivors,
            "retained": self.retained,
            "removed": self.removed,
            "rows": rows,
            "correlations": [
                {"year": c.year, "criteria": list(c.criteria),
                 "matrix": c.matrix.tolist()}
                for c in self.correlations
            ],
        }
        return json.dumps(doc, indent=2)


def woe(p_active: float, p_inactive: float, eps: float = 0.0) -> float:
    """Weight of evidence ln((p_active + eps) / (p_inactive + eps))."""
    if not (0.0 <= p_active <= 1.0 and 0.0 <= p_inactive <= 1.0):
        raise ScreeningError("proportions must lie in [0, 1]")
    if eps == 0.0:
        if p_active == 0.0 and p_inactive == 0.0:
            raise ScreeningError("WOE undefined for two zero proportions without smoothing")
        if p_inactive == 0.0:
            return math.inf
        if p_active == 0.0:
            return -math.inf
    return math.log((p_active + eps) / (p_inactive + eps))


def grade_iv(iv: float, edges=ScreeningConfig.grade_edges) -> str:
    for threshold, grade in zip(edges, GRADES):
        if iv < threshold:
            return grade
    return GRADES[-1]


def _quantile_bins(values: np.ndarray, bins: int) -> np.ndarray:
    """Rank-based bin index per value: edges at interior quantiles, values
    equal to an edge fall in the lower bin."""
    edges = np.quantile(values, np.arange(1, bins) / bins)
    return np.digitize(values, edges, right=True)


def information_value(values, labels, bins: int = 10, eps: float = 1e-6,
                      criterion: str = "", year: int = 0,
                      grade_edges=ScreeningConfig.grade_edges) -> IvResult:
    """IV over quantile bins: sum over bins of
    (active share - inactive share) * WOE(active share, inactive share)."""
    values = np.asarray(values, dtype=float)
    labels = np.asarray(labels)
    if bins < 2:
        raise ScreeningError("need at least 2 bins")
    is_active = labels == ACTIVE
    is_inactive = labels == INACTIVE
    n_act, n_inact = int(is_active.sum()), int(is_inactive.sum())
    if n_act == 0 or n_inact == 0:
        raise ScreeningError("both classes must be present")
    idx = _quantile_bins(values, bins)
    iv = 0.0
    for b in range(bins):
        in_bin = idx == b
        pa = (in_bin & is_active).sum() / n_act
        pi = (in_bin & is_inactive).sum() / n_inact
        if pa == 0.0 and pi == 0.0:
            continue
        iv += (pa - pi) * woe(pa, pi, eps)
    return IvResult(criterion, year, float(iv), grade_iv(iv, grade_edges))


def t_test(values_a, values_b, criterion: str = "", year: int = 0,
           alpha: float = 0.10) -> TTestResult:
    """Welch two-sample t statistic with a two-sided p-value from the
    Student-t distribution at the Welch-Satterthwaite degrees of freedom."""
    a = np.asarray(values_a, dtype=float)
    b = np.asarray(values_b, dtype=float)
    if len(a) < 2 or len(b) < 2:
        raise ScreeningError("each group needs at least 2 observations")
    va, vb = a.var(ddof=1), b.var(ddof=1)
    if va == 0.0 and vb == 0.0:
        if a.mean() == b.mean():
            return TTestResult(criterion, year, 0.0, 1.0, False)
        raise ScreeningError("degenerate groups: zero variance with distinct means")
    sa, sb = va / len(a), vb / len(b)
    t = (a.mean() - b.mean()) / math.sqrt(sa + sb)
    # Welch-Satterthwaite df via normalized ratios (robust to underflow)
    ra, rb = sa / (sa + sb), sb / (sa + sb)
    df = 1.0 / (ra ** 2 / (len(a) - 1) + rb ** 2 / (len(b) - 1))
    p = float(2.0 * stats.t.sf(abs(t), df))
    return TTestResult(criterion, year, float(t), p, p < alpha)


def pearson(values_x, values_y) -> float:
    x = np.asarray(values_x, dtype=float)
    y = np.asarray(values_y, dtype=float)
    if len(x) != len(y) or len(x) < 2:
        raise ScreeningError("need equal-length inputs with at least 2 points")
    xd, yd = x - x.mean(), y - y.mean()
    sx = math.sqrt(float(xd @ xd))
    sy = math.sqrt(float(yd @ yd))
    if sx == 0.0 or sy == 0.0:
        raise ScreeningError("zero variance input")
    return float(np.clip((xd @ yd) / (sx * sy), -1.0, 1.0))


def _values_by_class(ds: PanelDataset, criterion: str, year: int):
    va, vi, ids = [], [], []
    for rec in ds.companies:
        v = rec.get(criterion, year)
        if v is None:
            continue
        ids.append(rec.company_id)
        if rec.label == ACTIVE:
            va.append(v)
        else:
            vi.append(v)
    return np.array(va), np.array(vi)


def _paired_values(ds: PanelDataset, c1: str, c2: str, year: int):
    xs, ys = [], []
    for rec in ds.companies:
        a, b = rec.get(c1, year), rec.get(c2, year)
        if a is None or b is None:
            continue
        xs.append(a)
        ys.append(b)
    return np.array(xs), np.array(ys)


def run_screening(ds: PanelDataset, config: ScreeningConfig | None = None) -> ScreeningReport:
    cfg = config or ScreeningConfig()
    years = sorted({y for rec in ds.companies for (_, y) in rec.values})
    if len(years) < 2:
        raise ScreeningError("need at least 2 years of data")
    initial = list(ds.criterion_ids)

    iv_results: list[IvResult] = []
    iv_by_crit: dict[str, dict[int, float]] = {c: {} for c in initial}
    for c in initial:
        for y in years:
            va, vi = _values_by_class(ds, c, y)
            if len(va) == 0 or len(vi) == 0:
                continue
            res = information_value(np.concatenate([va, vi]),
                                    np.array([ACTIVE] * len(va) + [INACTIVE] * len(vi)),
                                    cfg.bins, cfg.eps, c, y, cfg.grade_edges)
            iv_results.append(res)
            iv_by_crit[c][y] = res.iv

    removed: dict[str, str] = {}
    stage1 = []
    for c in initial:
        weak = sum(1 for y in years if iv_by_crit[c].get(y, 0.0) < cfg.iv_cutoff)
        if weak >= cfg.weak_years:
            removed[c] = "stage1"
        else:
            stage1.append(c)

    t_results: list[TTestResult] = []
    stage2 = []
    for c in stage1:
        insig = 0
        for y in years:
            va, vi = _values_by_class(ds, c, y)
            if len(va) < 2 or len(vi) < 2:
                insig += 1
                continue
            try:
                res = t_test(va, vi, c, y, cfg.alpha)
            except ScreeningError:
                insig += 1
                continue
            t_results.append(res)
            if not res.significant:
                insig += 1
        if insig >= cfg.insignificant_years:
            removed[c] = "stage2"
        else:
            stage2.append(c)

    # stage 3: iterative removal of criteria with >= corr_links high-|r| links
    # to other survivors in every year; heaviest total link count goes first,
    # ties break toward the lower mean IV.
    survivors = list(stage2)
    correlations: list[CorrelationMatrix] = []

    def corr_matrix(crits, year):
        n = len(crits)
        mat = np.eye(n)
        for i in range(n):
            for j in range(i + 1, n):
                x, y_ = _paired_values(ds, crits[i], crits[j], year)
                try:
                    r = pearson(x, y_) if len(x) >= 2 else 0.0
                except ScreeningError:
                    r = 0.0
                mat[i, j] = mat[j, i] = r
        return mat

    while True:
        per_year = {y: corr_matrix(survivors, y) for y in years}
        candidates = []
        for i, c in enumerate(survivors):
            links_per_year = []
            for y in years:
                links = int((np.abs(per_year[y][i]) >= cfg.corr_cutoff).sum()) - 1
                links_per_year.append(links)
            if all(l >= cfg.corr_links for l in links_per_year):
                mean_iv = np.mean([iv_by_crit[c].get(y, 0.0) for y in years])
                candidates.append((sum(links_per_year), -mean_iv, i, c))
        if not candidates:
            break
        candidates.sort(key=lambda t: (-t[0], -t[1], t[2]))
        victim = candidates[0][3]
        removed[victim] = "stage3"
        survivors.remove(victim)

    for y in years:
        correlations.append(CorrelationMatrix(y, tuple(stage2), corr_matrix(stage2, y)))

    return ScreeningReport(initial, stage1, stage2, survivors,
                           iv_results, t_results, correlations, removed)

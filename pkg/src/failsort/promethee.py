"""PROMETHEE II: pairwise preference degrees, net flows averaged over
simulated weight scenarios, and the median-cut two-class labeling.

Thresholds follow the fixed rule q = r/6, p = 2r/3, s = (p+q)/2 where r is
the post-trim range of each criterion. Flows are linear in the weights, so
the scenario average is computed as the flow of per-criterion unweighted
flows under the scenario-mean weights; this equals averaging per-scenario
flows up to float reassociation.
"""

from __future__ import annotations

import csv
import json
import warnings
from dataclasses import dataclass

import numpy as np

from .dataset import PerformanceMatrix
from .sampling import WEIGHTS_HIT_AND_RUN, sample_weights

KINDS = ("usual", "u_shape", "v_shape", "level", "linear", "gaussian")

MAJORITY_NEEDED = 4


class PrometheeError(ValueError):
    pass


@dataclass(frozen=True)
class ThresholdSet:
    """Per-criterion indifference q, preference p and Gaussian shape s."""

    ranges: tuple[float, ...]

    @property
    def q(self) -> tuple[float, ...]:
        return tuple(r / 6.0 for r in self.ranges)

    @property
    def p(self) -> tuple[float, ...]:
        return tuple(2.0 * r / 3.0 for r in self.ranges)

    @property
    def s(self) -> tuple[float, ...]:
        return tuple((pi + qi) / 2.0 for pi, qi in zip(self.p, self.q))

    @classmethod
    def from_matrix(cls, m: PerformanceMatrix) -> "ThresholdSet":
        spans = m.values.max(axis=0) - m.values.min(axis=0)
        return cls(tuple(abs(float(s)) for s in spans))


@dataclass
class NetFlowTable:
    company_ids: tuple[str, ...]
    phi_plus: np.ndarray
    phi_minus: np.ndarray
    phi: np.ndarray
    scenario_count: int
    kind: str
    criteria: tuple[str, ...]

    def to_rows(self, classes: dict[str, str] | None = None):
        rows = []
        for i, cid in enumerate(self.company_ids):
            row = {"company_id": cid,
                   "phi_plus": float(self.phi_plus[i]),
                   "phi_minus": float(self.phi_minus[i]),
                   "phi": float(self.phi[i])}
            if classes is not None:
                row["class"] = classes[cid]
            rows.append(row)
        return rows

    def write_csv(self, stream, classes: dict[str, str] | None = None):
        rows = self.to_rows(classes)
        writer = csv.DictWriter(stream, fieldnames=list(rows[0]), lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)

    def to_json(self, classes: dict[str, str] | None = None) -> str:
        return json.dumps({"kind": self.kind, "criteria": list(self.criteria),
                           "scenarios": self.scenario_count,
                           "flows": self.to_rows(classes)}, indent=2)


@dataclass
class PrometheeClassification:
    company_ids: tuple[str, ...]
    classes: dict[str, str]
    cutoff: float
    kind: str


def preference_degree(kind: str, d, q: float = 0.0, p: float = 0.0,
                      s: float = 0.0):
    """Degree to which a criterion difference d supports strict preference.

    Non-decreasing in d, zero for d <= 0, with the six canonical shapes.
    Accepts scalars or arrays.
    """
    d = np.asarray(d, dtype=float)
    if kind == "usual":
        out = np.where(d > 0, 1.0, 0.0)
    elif kind == "u_shape":
        out = np.where(d > q, 1.0, 0.0)
    elif kind == "v_shape":
        if p <= 0:
            out = np.where(d > 0, 1.0, 0.0)
        else:
            out = np.where(d > 0, np.minimum(d / p, 1.0), 0.0)
    elif kind == "level":
        out = np.where(d > p, 1.0, np.where(d > q, 0.5, 0.0))
    elif kind == "linear":
        if p <= q:
            out = np.where(d > q, 1.0, 0.0)
        else:
            ramp = (d - q) / (p - q)
            out = np.where(d > p, 1.0, np.where(d > q, ramp, 0.0))
    elif kind == "gaussian":
        if s <= 0:
            out = np.where(d > 0, 1.0, 0.0)
        else:
            out = np.where(d > 0, 1.0 - np.exp(-np.square(d) / (2.0 * s * s)), 0.0)
    else:
        raise PrometheeError(f"unknown preference function kind {kind!r}")
    return out if out.ndim else float(out)


def _per_criterion_degrees(m: PerformanceMatrix, kind: str,
                           thresholds: ThresholdSet) -> np.ndarray:
    """Stack of m x m preference-degree matrices, one per criterion.

    Zero-range criteria contribute zero preference everywhere.
    """
    n_alt, n_crit = m.values.shape
    stack = np.zeros((n_crit, n_alt, n_alt))
    for i in range(n_crit):
        r = thresholds.ranges[i]
        if r == 0.0:
            warnings.warn(f"criterion {m.criteria[i]!r} has zero range; "
                          "it contributes no preference", stacklevel=3)
            continue
        col = m.values[:, i]
        diff = col[:, None] - col[None, :]
        stack[i] = preference_degree(kind, diff, thresholds.q[i],
                                     thresholds.p[i], thresholds.s[i])
        np.fill_diagonal(stack[i], 0.0)
    return stack


def pairwise_pi(m: PerformanceMatrix, weights, kind: str,
                thresholds: ThresholdSet | None = None) -> np.ndarray:
    """Weighted aggregate preference matrix pi(j, y) in [0, 1], zero diagonal."""
    weights = np.asarray(weights, dtype=float)
    if weights.size != len(m.criteria):
        raise PrometheeError("weight dimension does not match criterion count")
    thresholds = thresholds or ThresholdSet.from_matrix(m)
    stack = _per_criterion_degrees(m, kind, thresholds)
    return np.tensordot(weights, stack, axes=(0, 0))


def net_flows(pi: np.ndarray):
    """Positive, negative and net flow per alternative from a pi matrix."""
    pi = np.asarray(pi, dtype=float)
    m = pi.shape[0]
    if pi.ndim != 2 or pi.shape[0] != pi.shape[1] or m < 2:
        raise PrometheeError("need a square matrix of size at least 2")
    plus = pi.sum(axis=1) / (m - 1)
    minus = pi.sum(axis=0) / (m - 1)
    return plus, minus, plus - minus


def run_promethee(m: PerformanceMatrix, criteria: list[str] | None = None,
                  kind: str = "usual", scenarios: int = 10000, seed: int = 0,
                  method: str = WEIGHTS_HIT_AND_RUN,
                  weights: np.ndarray | None = None) -> NetFlowTable:
    """Scenario-averaged net flows on the chosen criterion subset.

    Thresholds derive from the matrix ranges (trim and align first). The
    supplied weights array overrides simulation when given.
    """
    sub = m.restrict(criteria) if criteria is not None else m
    if len(sub.criteria) < 1:
        raise PrometheeError("need at least one criterion")
    thresholds = ThresholdSet.from_matrix(sub)
    stack = _per_criterion_degrees(sub, kind, thresholds)
    n_alt = sub.values.shape[0]
    plus_c = stack.sum(axis=2) / (n_alt - 1)          # criterion x alternative
    minus_c = stack.sum(axis=1) / (n_alt - 1)
    if weights is None:
        weights = sample_weights(len(sub.criteria), scenarios, seed, method)
    weights = np.asarray(weights, dtype=float)
    w_mean = weights.mean(axis=0)
    plus = w_mean @ plus_c
    minus = w_mean @ minus_c
    return NetFlowTable(sub.company_ids, plus, minus, plus - minus,
                        int(weights.shape[0]), kind, sub.criteria)


def median_cut(t: NetFlowTable) -> PrometheeClassification:
    """Companies strictly above the median net flow go to C1, the rest to C2."""
    if len(t.company_ids) < 2:
        raise PrometheeError("need at least 2 companies")
    cutoff = float(np.median(t.phi))
    classes = {cid: ("C1" if t.phi[i] > cutoff else "C2")
               for i, cid in enumerate(t.company_ids)}
    return PrometheeClassification(t.company_ids, classes, cutoff, t.kind)


def majority_vote(classifications: list[PrometheeClassification]) -> dict[str, str]:
    """C1 or C2 when at least four of the six kinds agree, else undetermined."""
    if len(classifications) != len(KINDS):
        raise PrometheeError(f"expected {len(KINDS)} classifications")
    companies = set(classifications[0].classes)
    for c in classifications[1:]:
        if set(c.classes) != companies:
            raise PrometheeError("mismatched company sets")
    out = {}
    for cid in classifications[0].company_ids:
        votes = [c.classes[cid] for c in classifications]
        c1 = votes.count("C1")
        c2 = votes.count("C2")
        if c1 >= MAJORITY_NEEDED:
            out[cid] = "C1"
        elif c2 >= MAJORITY_NEEDED:
            out[cid] = "C2"
        else:
            out[cid] = "undetermined"
    return out

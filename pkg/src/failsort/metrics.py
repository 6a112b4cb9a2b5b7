"""Confusion counts and the six performance indicators.

The confusion orientation follows the credit-risk convention used throughout
this project: FP is an actually-healthy (C1) company predicted risky and FN a
risky (C2) company predicted healthy, so SENS and SPEC are the per-class
recalls of C1 and C2. The AUROC/GINI closed forms combine the four cells
accordingly and are kept exactly as defined; all values are percentages.
"""

from __future__ import annotations

from dataclasses import dataclass


class MetricsError(ValueError):
    pass


@dataclass(frozen=True)
class ConfusionMatrix:
    tp: int   # true C1 predicted C1
    fp: int   # true C1 predicted C2 (type I error)
    fn: int   # true C2 predicted C1 (type II error)
    tn: int   # true C2 predicted C2

    def __post_init__(self):
        if min(self.tp, self.fp, self.fn, self.tn) < 0:
            raise MetricsError("negative confusion count")

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.fn + self.tn


@dataclass(frozen=True)
class MetricsReport:
    sens: float | None
    spec: float | None
    aca: float | None
    oca: float | None
    auroc: float | None
    gini: float | None
    confusion: ConfusionMatrix

    def as_dict(self) -> dict:
        return {"sens": self.sens, "spec": self.spec, "aca": self.aca,
                "oca": self.oca, "auroc": self.auroc, "gini": self.gini,
                "tp": self.confusion.tp, "fp": self.confusion.fp,
                "fn": self.confusion.fn, "tn": self.confusion.tn}


def confusion(true_labels, predicted_labels) -> ConfusionMatrix:
    true_labels = list(true_labels)
    predicted_labels = list(predicted_labels)
    if len(true_labels) != len(predicted_labels):
        raise MetricsError("label length mismatch")
    tp = fp = fn = tn = 0
    for t, p in zip(true_labels, predicted_labels):
        if t not in ("C1", "C2") or p not in ("C1", "C2"):
            raise MetricsError(f"labels must be C1/C2, got {t!r}/{p!r}")
        if t == "C1":
            if p == "C1":
                tp += 1
            else:
                fp += 1
        else:
            if p == "C1":
                fn += 1
            else:
                tn += 1
    return ConfusionMatrix(tp, fp, fn, tn)


def _ratio(num: int, den: int) -> float | None:
    """Percent ratio; None when the denominator vanishes (undefined, not 0)."""
    if den == 0:
        return None
    return 100.0 * num / den


def metrics(c: ConfusionMatrix) -> MetricsReport:
    if c.total == 0:
        raise MetricsError("empty confusion matrix")
    sens = _ratio(c.tp, c.tp + c.fp)
    spec = _ratio(c.tn, c.tn + c.fn)
    aca = (sens + spec) / 2.0 if sens is not None and spec is not None else None
    oca = _ratio(c.tp + c.tn, c.total)
    r1 = _ratio(c.tp, c.tp + c.fn)
    r2 = _ratio(c.tn, c.tn + c.fp)
    auroc = (r1 + r2) / 2.0 if r1 is not None and r2 is not None else None
    gini = 2.0 * auroc - 100.0 if auroc is not None else None
    return MetricsReport(sens, spec, aca, oca, auroc, gini, c)

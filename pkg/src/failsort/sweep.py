"""Cross-validated experiment sweep comparing the external labeling with the
six benchmark labelings across criterion pairs and year offsets.

For every retained (front, complement) split: the front criteria produce one
benchmark classification per preference function on the full year-1 matrix;
utility models are then fitted on the complement criteria per fold against
each labeling, evaluated on train and test rows, and the year-1 models are
re-applied to the older year matrices of the same companies. Each
(pair, labeling, fold) cell is independent; failures are recorded per cell
and never poison siblings. All randomness is derived from the root seed per
task label, so results do not depend on scheduling or worker count.
"""

from __future__ import annotations

import csv
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, asdict

import numpy as np

from ._seeds import subseed
from .dataset import (
    CLASS_OF,
    TRIM_STANDARD,
    PanelDataset,
    PerformanceMatrix,
    align_directions,
    build_matrix,
    iqr_trim,
)
from .mhdis import MhdisConfig, classify_matrix, fit
from .metrics import confusion, metrics
from .pairs import PairCombination, generate_pairs
from .promethee import KINDS, majority_vote, median_cut, run_promethee
from .sampling import FOLD_PARTITION, kfold_split, sample_weights
from .screening import pearson, run_screening, ScreeningError

EXTERNAL = "external"
LABELINGS = (EXTERNAL,) + KINDS


class SweepError(RuntimeError):
    pass


@dataclass(frozen=True)
class SweepConfig:
    seed: int = 7
    folds: int = 5
    scenarios: int = 1000
    delta: float = 0.001
    breakpoints: int = 3
    trim_mode: str = TRIM_STANDARD
    fold_mode: str = FOLD_PARTITION
    years: tuple[int, ...] = (1, 2, 3, 4)
    criteria: tuple[str, ...] | None = None          # None: run screening
    correlated_pairs: tuple[tuple[str, str], ...] | None = None   # None: derive
    refit_per_year: bool = False
    workers: int = 1

    def mhdis_config(self) -> MhdisConfig:
        return MhdisConfig(breakpoints=self.breakpoints, delta=self.delta)


@dataclass
class SweepResult:
    config: dict
    criteria: list[str]
    pairs: list[dict]
    rows: list[dict]          # per (pair, labeling, year, fold, split)
    fold_avg: list[dict]      # per (pair, labeling, year, split)
    summary: list[dict]       # per (pair, year, split): external vs min/max
    majority: list[dict]      # per pair: benchmark vote counts
    errors: list[dict]

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True)

    def write_csvs(self, outdir) -> None:
        import pathlib

        out = pathlib.Path(outdir)
        out.mkdir(parents=True, exist_ok=True)
        _write_csv(out / "cells.csv", self.rows)
        _write_csv(out / "fold_avg.csv", self.fold_avg)
        _write_csv(out / "year1_by_labeling.csv", self._year1_table())
        _write_csv(out / "years_min_max.csv", self.summary)
        _write_csv(out / "majority_vote.csv", self.majority)

    def _year1_table(self) -> list[dict]:
        """Year-1 fold-averaged indicators, one column per labeling."""
        rows = []
        for pair in sorted({r["pair"] for r in self.fold_avg}):
            for split in ("train", "test"):
                for metric in ("sens", "spec", "aca", "oca", "auroc", "gini"):
                    row = {"pair": pair, "split": split, "metric": metric}
                    for lab in LABELINGS:
                        match = [r for r in self.fold_avg
                                 if r["pair"] == pair and r["labeling"] == lab
                                 and r["year"] == 1 and r["split"] == split]
                        row[lab] = match[0][metric] if match else None
                    rows.append(row)
        return rows

    def external_test_oca_by_year(self) -> dict[int, float]:
        """Test OCA for the external labeling averaged over pairs and folds."""
        out = {}
        years = sorted({r["year"] for r in self.fold_avg})
        for y in years:
            vals = [r["oca"] for r in self.fold_avg
                    if r["labeling"] == EXTERNAL and r["split"] == "test"
                    and r["year"] == y and r["oca"] is not None]
            out[y] = float(np.mean(vals)) if vals else None
        return out


def _write_csv(path, rows: list[dict]) -> None:
    if not rows:
        path.write_text("")
        return
    fields = list(rows[0])
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=fields, lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)


def prepare_matrices(ds: PanelDataset, criteria, years, trim_mode) -> dict[int, PerformanceMatrix]:
    """Aligned, trimmed full-sample matrix per year offset."""
    out = {}
    for y in years:
        m = build_matrix(ds, y, list(criteria), drop_missing=True)
        m = align_directions(m, ds.criteria)
        m = iqr_trim(m, trim_mode)
        out[y] = m
    return out


def derive_correlated_pairs(matrices: dict[int, PerformanceMatrix],
                            cutoff: float = 0.5):
    """Criterion couples with |r| at or above the cutoff in any year."""
    flagged = set()
    for m in matrices.values():
        k = len(m.criteria)
        for i in range(k):
            for j in range(i + 1, k):
                try:
                    r = pearson(m.values[:, i], m.values[:, j])
                except ScreeningError:
                    continue
                if abs(r) >= cutoff:
                    flagged.add(tuple(sorted((m.criteria[i], m.criteria[j]))))
    return tuple(sorted(flagged))


def _average(rows: list[dict]) -> dict:
    keys = ("sens", "spec", "aca", "oca", "auroc", "gini",
            "tp", "fp", "fn", "tn")
    out = {}
    for k in keys:
        vals = [r[k] for r in rows if r.get(k) is not None]
        out[k] = float(np.mean(vals)) if vals else None
    return out


def _evaluate_fold(model, labeling_classes, matrices, years, train_ids, test_ids,
                   refit_context=None):
    """Metric rows for one fitted fold across years and splits."""
    rows = []
    for y in years:
        my = matrices[y]
        if refit_context is not None and y != min(years):
            model = refit_context(y)
        preds = classify_matrix(model, my)
        for split, ids in (("train", train_ids), ("test", test_ids)):
            have = [cid for cid in ids if cid in preds and cid in labeling_classes]
            if not have:
                rows.append({"year": y, "split": split, "error": "no rows"})
                continue
            c = confusion([labeling_classes[cid] for cid in have],
                          [preds[cid] for cid in have])
            rep = metrics(c).as_dict()
            rep.update({"year": y, "split": split})
            rows.append(rep)
    return rows


def _run_pair(args) -> dict:
    """Full computation for one criterion pair; safe to run in a worker."""
    (pair_dict, matrices, folds, external_classes, cfg_dict) = args
    cfg = SweepConfig(**cfg_dict)
    pair = PairCombination(pair_dict["index"], tuple(pair_dict["front"]),
                           tuple(pair_dict["complement"]))
    years = tuple(cfg.years)
    y1 = min(years)
    m1 = matrices[y1]
    mcfg = cfg.mhdis_config()

    weights = sample_weights(len(pair.front), cfg.scenarios,
                             subseed(cfg.seed, "weights", pair.index))
    classifications = []
    for kind in KINDS:
        table = run_promethee(m1, list(pair.front), kind, weights=weights)
        classifications.append(median_cut(table))
    vote = majority_vote(classifications)
    vote_counts = {"pair": pair.index,
                   "C1": sum(1 for v in vote.values() if v == "C1"),
                   "C2": sum(1 for v in vote.values() if v == "C2"),
                   "undetermined": sum(1 for v in vote.values()
                                       if v == "undetermined"),
                   "total": len(vote)}

    labelings: dict[str, dict[str, str]] = {EXTERNAL: external_classes}
    for kind, cls in zip(KINDS, classifications):
        labelings[kind] = cls.classes

    rows, errors = [], []
    for lab_name, classes in labelings.items():
        for f, (train_ids, test_ids) in enumerate(folds):
            base = {"pair": pair.index, "labeling": lab_name, "fold": f}
            try:
                train_m = m1.rows_for(train_ids).restrict(list(pair.complement))
                model = fit(train_m, ("C1", "C2"), mcfg,
                            labels={cid: classes[cid] for cid in train_m.company_ids})

                refit = None
                if cfg.refit_per_year:
                    def refit(y, _train=train_ids, _classes=classes):
                        ty = matrices[y].rows_for(_train).restrict(list(pair.complement))
                        return fit(ty, ("C1", "C2"), mcfg,
                                   labels={cid: _classes[cid]
                                           for cid in ty.company_ids})

                sub_matrices = {y: matrices[y].restrict(list(pair.complement))
                                for y in years}
                for rep in _evaluate_fold(model, classes, sub_matrices, years,
                                          train_ids, test_ids, refit):
                    if "error" in rep:
                        errors.append({**base, **rep})
                    else:
                        rows.append({**base, **rep})
            except Exception as exc:   # cell isolation is part of the contract
                errors.append({**base, "error": f"{type(exc).__name__}: {exc}"})
    return {"rows": rows, "errors": errors, "majority": vote_counts}


def run_sweep(ds: PanelDataset, config: SweepConfig | None = None) -> SweepResult:
    cfg = config or SweepConfig()
    if cfg.criteria is not None:
        criteria = tuple(cfg.criteria)
    else:
        criteria = tuple(run_screening(ds).retained)
    if len(criteria) != 6:
        raise SweepError(f"need exactly six criteria, have {list(criteria)}")

    matrices = prepare_matrices(ds, criteria, cfg.years, cfg.trim_mode)
    correlated = (cfg.correlated_pairs if cfg.correlated_pairs is not None
                  else derive_correlated_pairs(matrices))
    specs = [ds.spec(c) for c in criteria]
    pair_list = generate_pairs(specs, correlated)
    if not pair_list:
        raise SweepError("no admissible criterion pairs")

    y1 = min(cfg.years)
    m1 = matrices[y1]
    external_classes = {cid: CLASS_OF[m1.labels[cid]] for cid in m1.company_ids}
    folds = kfold_split(m1.company_ids,
                        [external_classes[cid] for cid in m1.company_ids],
                        cfg.folds, cfg.fold_mode, subseed(cfg.seed, "kfold")).folds

    cfg_dict = asdict(cfg)
    tasks = [(p.as_dict(), matrices, folds, external_classes, cfg_dict)
             for p in pair_list]
    if cfg.workers > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            results = list(pool.map(_run_pair, tasks))
    else:
        results = [_run_pair(t) for t in tasks]

    rows, errors, majority = [], [], []
    for res in results:
        rows.extend(res["rows"])
        errors.extend(res["errors"])
        majority.append(res["majority"])

    fold_avg = []
    for p in pair_list:
        for lab in LABELINGS:
            for y in cfg.years:
                for split in ("train", "test"):
                    cell = [r for r in rows
                            if r["pair"] == p.index and r["labeling"] == lab
                            and r["year"] == y and r["split"] == split]
                    if not cell:
                        continue
                    avg = _average(cell)
                    avg.update({"pair": p.index, "labeling": lab,
                                "year": y, "split": split, "folds": len(cell)})
                    fold_avg.append(avg)

    summary = []
    for p in pair_list:
        for y in cfg.years:
            for split in ("train", "test"):
                def val(lab, metric):
                    match = [r for r in fold_avg
                             if r["pair"] == p.index and r["labeling"] == lab
                             and r["year"] == y and r["split"] == split]
                    return match[0][metric] if match else None
                row = {"pair": p.index, "year": y, "split": split}
                for metric in ("aca", "oca"):
                    row[f"external_{metric}"] = val(EXTERNAL, metric)
                    kind_vals = [val(k, metric) for k in KINDS]
                    kind_vals = [v for v in kind_vals if v is not None]
                    row[f"benchmark_min_{metric}"] = min(kind_vals) if kind_vals else None
                    row[f"benchmark_max_{metric}"] = max(kind_vals) if kind_vals else None
                summary.append(row)

    snapshot = {k: v for k, v in cfg_dict.items() if k != "workers"}
    return SweepResult(
        config={**snapshot, "criteria": list(criteria),
                "correlated_pairs": [list(c) for c in correlated]},
        criteria=list(criteria),
        pairs=[p.as_dict() for p in pair_list],
        rows=rows, fold_avg=fold_avg, summary=summary,
        majority=majority, errors=errors)

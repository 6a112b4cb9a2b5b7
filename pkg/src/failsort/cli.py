"""Command-line interface.

Subcommands: screen, promethee, fit, evaluate, pairs, sweep, gen. Global
flags (before the subcommand) control seeding and the shared experiment
knobs. Errors exit nonzero with a machine-readable JSON object on stderr.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path


from .dataset import (
    CLASS_OF,
    RETAINED_SIX,
    TRIM_LITERAL,
    TRIM_STANDARD,
    CriterionSpec,
    align_directions,
    build_matrix,
    iqr_trim,
    load_dataset,
    write_dataset_csv,
)
from .metrics import confusion, metrics
from .mhdis import MhdisConfig, MhdisModel, classify_matrix, fit
from .pairs import generate_pairs
from .promethee import KINDS, median_cut, run_promethee
from .sampling import FOLD_LITERAL, FOLD_PARTITION
from .screening import run_screening
from .sweep import SweepConfig, derive_correlated_pairs, prepare_matrices, run_sweep
from .synthetic import gen_synthetic

DEFAULT_SEPARATION = 2.0


def _read_specs(path: str | None) -> dict[str, CriterionSpec] | None:
    if not path:
        return None
    doc = json.loads(Path(path).read_text())
    out = {}
    for item in doc:
        out[item["id"]] = CriterionSpec(item["id"], item.get("name", item["id"]),
                                        item["dimension"], item["direction"])
    return out


def _read_labels(path: str | None) -> dict[str, str] | None:
    """company_id,class CSV with class in {C1, C2}."""
    if not path:
        return None
    out = {}
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            out[row["company_id"]] = row["class"]
    return out


def _load(args) -> "PanelDataset":
    specs = _read_specs(getattr(args, "criteria_spec", None))
    with open(args.data, newline="") as fh:
        return load_dataset(fh, specs)


def _prepared_matrix(ds, args, criteria):
    m = build_matrix(ds, args.year, criteria, drop_missing=True)
    m = align_directions(m, ds.criteria)
    return iqr_trim(m, args.trim_mode)


def _emit(doc, out: str | None):
    text = doc if isinstance(doc, str) else json.dumps(doc, indent=2)
    if out:
        Path(out).write_text(text + "\n")
    else:
        print(text)


def _cmd_screen(args):
    ds = _load(args)
    report = run_screening(ds)
    _emit(report.to_json(), args.out)
    return 0


def _cmd_promethee(args):
    ds = _load(args)
    criteria = args.criteria.split(",")
    m = _prepared_matrix(ds, args, criteria)
    table = run_promethee(m, criteria, args.kind, args.scenarios, args.seed)
    cls = median_cut(table)
    out = Path(args.out) if args.out else None
    if out:
        with open(out, "w", newline="") as fh:
            table.write_csv(fh, cls.classes)
    else:
        table.write_csv(sys.stdout, cls.classes)
    if args.json:
        Path(args.json).write_text(table.to_json(cls.classes) + "\n")
    return 0


def _cmd_fit(args):
    ds = _load(args)
    criteria = args.criteria.split(",")
    m = _prepared_matrix(ds, args, criteria)
    labels = _read_labels(args.labels)
    if labels is None:
        labels = {cid: CLASS_OF[m.labels[cid]] for cid in m.company_ids}
    cfg = MhdisConfig(breakpoints=args.breakpoints, delta=args.delta)
    model = fit(m, ("C1", "C2"), cfg, labels={cid: labels[cid]
                                              for cid in m.company_ids})
    _emit(model.to_json(), args.out)
    return 0


def _cmd_evaluate(args):
    ds = _load(args)
    model = MhdisModel.from_json(Path(args.model).read_text())
    m = _prepared_matrix(ds, args, list(model.criteria))
    labels = _read_labels(args.labels)
    if labels is None:
        labels = {cid: CLASS_OF[m.labels[cid]] for cid in m.company_ids}
    preds = classify_matrix(model, m)
    ids = [cid for cid in m.company_ids if cid in labels]
    rep = metrics(confusion([labels[cid] for cid in ids],
                            [preds[cid] for cid in ids]))
    _emit(rep.as_dict(), args.out)
    return 0


def _cmd_pairs(args):
    ds = _load(args)
    criteria = args.criteria.split(",") if args.criteria else list(RETAINED_SIX)
    specs = [ds.spec(c) for c in criteria]
    if args.correlated:
        correlated = [tuple(p.split(":")) for p in args.correlated.split(",")]
    else:
        matrices = prepare_matrices(ds, criteria, (1, 2, 3, 4), args.trim_mode)
        correlated = derive_correlated_pairs(matrices)
    result = generate_pairs(specs, correlated)
    _emit({"correlated_pairs": [list(c) for c in correlated],
           "pairs": [p.as_dict() for p in result]}, args.out)
    return 0


def _cmd_sweep(args):
    if args.synthetic:
        n, sep = args.synthetic.split(",")
        ds = gen_synthetic(int(n), float(sep), seed=args.seed)
    elif args.data:
        ds = _load(args)
    else:
        raise ValueError("sweep needs --data or --synthetic n,sep")
    criteria = tuple(args.criteria.split(",")) if args.criteria else None
    correlated = None
    if args.correlated:
        correlated = tuple(tuple(p.split(":")) for p in args.correlated.split(","))
    cfg = SweepConfig(seed=args.seed, folds=args.folds, scenarios=args.scenarios,
                      delta=args.delta, breakpoints=args.breakpoints,
                      trim_mode=args.trim_mode, fold_mode=args.fold_mode,
                      criteria=criteria, correlated_pairs=correlated,
                      refit_per_year=args.refit_per_year, workers=args.workers)
    result = run_sweep(ds, cfg)
    outdir = Path(args.out_dir)
    outdir.mkdir(parents=True, exist_ok=True)
    (outdir / "sweep.json").write_text(result.to_json() + "\n")
    result.write_csvs(outdir)
    print(f"wrote sweep results to {outdir}")
    if result.errors:
        print(f"{len(result.errors)} cells failed; see sweep.json", file=sys.stderr)
    return 0


def _cmd_gen(args):
    ds = gen_synthetic(args.n, args.separation, seed=args.seed)
    if args.out:
        with open(args.out, "w", newline="") as fh:
            write_dataset_csv(ds, fh)
    else:
        write_dataset_csv(ds, sys.stdout)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="failsort",
        description="Two-class failure discrimination with utility models "
                    "and an outranking benchmark")
    parser.add_argument("--seed", type=int, default=7)
    parser.add_argument("--folds", type=int, default=5)
    parser.add_argument("--scenarios", type=int, default=10000)
    parser.add_argument("--delta", type=float, default=0.001)
    parser.add_argument("--breakpoints", type=int, default=3)
    parser.add_argument("--trim-mode", choices=[TRIM_STANDARD, TRIM_LITERAL],
                        default=TRIM_STANDARD)
    parser.add_argument("--fold-mode", choices=[FOLD_PARTITION, FOLD_LITERAL],
                        default=FOLD_PARTITION)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("screen", help="three-stage predictor screening report")
    p.add_argument("--data", required=True)
    p.add_argument("--criteria-spec")
    p.add_argument("--out")
    p.set_defaults(func=_cmd_screen)

    p = sub.add_parser("promethee", help="net flows and median-cut classes")
    p.add_argument("--data", required=True)
    p.add_argument("--criteria", required=True, help="comma-separated ids")
    p.add_argument("--kind", choices=list(KINDS), default="usual")
    p.add_argument("--year", type=int, default=1)
    p.add_argument("--criteria-spec")
    p.add_argument("--out", help="flows CSV path (stdout if omitted)")
    p.add_argument("--json", help="optional JSON output path")
    p.set_defaults(func=_cmd_promethee)

    p = sub.add_parser("fit", help="fit a discrimination model")
    p.add_argument("--data", required=True)
    p.add_argument("--criteria", required=True)
    p.add_argument("--labels", help="CSV company_id,class overriding the data labels")
    p.add_argument("--year", type=int, default=1)
    p.add_argument("--criteria-spec")
    p.add_argument("--out")
    p.set_defaults(func=_cmd_fit)

    p = sub.add_parser("evaluate", help="score a fitted model on a dataset")
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--labels")
    p.add_argument("--year", type=int, default=1)
    p.add_argument("--criteria-spec")
    p.add_argument("--out")
    p.set_defaults(func=_cmd_evaluate)

    p = sub.add_parser("pairs", help="admissible 3-vs-3 criterion splits")
    p.add_argument("--data", required=True)
    p.add_argument("--criteria", help="comma-separated six ids")
    p.add_argument("--correlated", help="colon pairs, e.g. ROA:EBITDA_TA,EQ_RATIO:TD_TA")
    p.add_argument("--criteria-spec")
    p.add_argument("--out")
    p.set_defaults(func=_cmd_pairs)

    p = sub.add_parser("sweep", help="full cross-validated experiment grid")
    p.add_argument("--data")
    p.add_argument("--synthetic", help="n_per_class,separation")
    p.add_argument("--criteria")
    p.add_argument("--correlated")
    p.add_argument("--criteria-spec")
    p.add_argument("--refit-per-year", action="store_true")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out-dir", default="sweep_out")
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("gen", help="write a synthetic dataset CSV")
    p.add_argument("--n", type=int, default=57)
    p.add_argument("--separation", type=float, default=DEFAULT_SEPARATION)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_gen)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except BrokenPipeError:
        return 0
    except Exception as exc:
        print(json.dumps({"error": type(exc).__name__, "message": str(exc)}),
              file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

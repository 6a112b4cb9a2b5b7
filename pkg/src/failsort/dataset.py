"""Panel-data ingestion, preference-direction alignment and outlier trimming.

Everything downstream consumes a rectangular, maximization-oriented
PerformanceMatrix produced here. All operations are pure; matrices keep the
input row order so results are reproducible.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field, replace

import numpy as np

ACTIVE = "C1_active"
INACTIVE = "C2_inactive"
LABELS = (ACTIVE, INACTIVE)
CLASS_OF = {ACTIVE: "C1", INACTIVE: "C2"}

DIMENSIONS = (
    "profitability",
    "financial-structure",
    "liquidity",
    "turnover",
    "solvency",
    "activity",
    "size",
)
STRATA = ("large", "medium", "small", "micro")
YEAR_OFFSETS = (1, 2, 3, 4)

INCREASING = "increasing"
DECREASING = "decreasing"

TRIM_STANDARD = "standard_tukey"
TRIM_LITERAL = "paper_literal"


class DatasetError(ValueError):
    pass


@dataclass(frozen=True)
class CriterionSpec:
    id: str
    name: str
    dimension: str
    direction: str

    def __post_init__(self):
        if self.dimension not in DIMENSIONS:
            raise DatasetError(f"unknown dimension {self.dimension!r} for {self.id}")
        if self.direction not in (INCREASING, DECREASING):
            raise DatasetError(f"unknown direction {self.direction!r} for {self.id}")


@dataclass
class CompanyRecord:
    company_id: str
    label: str
    size_stratum: str
    values: dict[tuple[str, int], float] = field(default_factory=dict)

    def get(self, criterion_id: str, year: int) -> float | None:
        return self.values.get((criterion_id, year))


@dataclass
class PanelDataset:
    criteria: list[CriterionSpec]
    companies: list[CompanyRecord]

    def __post_init__(self):
        ids = [c.id for c in self.criteria]
        if len(set(ids)) != len(ids):
            raise DatasetError("duplicate criterion id")
        known = set(ids)
        for rec in self.companies:
            for (cid, year) in rec.values:
                if cid not in known:
                    raise DatasetError(f"value keyed by undeclared criterion {cid!r}")
                if year not in YEAR_OFFSETS:
                    raise DatasetError(f"year offset {year} outside {YEAR_OFFSETS}")

    def spec(self, criterion_id: str) -> CriterionSpec:
        for s in self.criteria:
            if s.id == criterion_id:
                return s
        raise DatasetError(f"unknown criterion {criterion_id!r}")

    @property
    def criterion_ids(self) -> list[str]:
        return [s.id for s in self.criteria]


@dataclass
class PerformanceMatrix:
    """Rectangular company x criterion slice for one year offset.

    directions marks each column's current preference orientation; after
    align_directions every column is 'increasing'.
    """

    year: int
    criteria: tuple[str, ...]
    company_ids: tuple[str, ...]
    values: np.ndarray
    labels: dict[str, str]
    directions: tuple[str, ...]

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (len(self.company_ids), len(self.criteria)):
            raise DatasetError("matrix shape mismatch")

    def column(self, criterion_id: str) -> np.ndarray:
        return self.values[:, self.criteria.index(criterion_id)]

    def restrict(self, criteria: list[str]) -> "PerformanceMatrix":
        idx = [self.criteria.index(c) for c in criteria]
        return PerformanceMatrix(self.year, tuple(criteria), self.company_ids,
                                 self.values[:, idx].copy(), self.labels,
                                 tuple(self.directions[i] for i in idx))

    def rows_for(self, company_ids) -> "PerformanceMatrix":
        have = {cid: i for i, cid in enumerate(self.company_ids)}
        keep = [cid for cid in company_ids if cid in have]
        idx = [have[cid] for cid in keep]
        return PerformanceMatrix(self.year, self.criteria, tuple(keep),
                                 self.values[idx].copy(), self.labels, self.directions)

    @property
    def class_labels(self) -> np.ndarray:
        return np.array([CLASS_OF[self.labels[cid]] for cid in self.company_ids])


# Ratio catalog used as the default input schema: ids grouped by company
# dimension, with preference directions for the retained six and sensible
# defaults elsewhere (overridable by an explicit spec file).
_CATALOG_ROWS = [
    # profitability
    ("EBIT_TA", "profitability", INCREASING), ("LTDR", "profitability", DECREASING),
    ("OP_MARG", "profitability", INCREASING), ("PROF_MARG", "profitability", INCREASING),
    ("ROE", "profitability", INCREASING), ("ROA", "profitability", INCREASING),
    ("ROCE", "profitability", INCREASING), ("EBIT_EQ", "profitability", INCREASING),
    ("EBITDA_TA", "profitability", INCREASING), ("CF_TA", "profitability", INCREASING),
    ("CF_EQ", "profitability", INCREASING),
    # financial structure
    ("EQ_RATIO", "financial-structure", INCREASING),
    ("FAT", "financial-structure", INCREASING),
    ("TD_TA", "financial-structure", DECREASING),
    ("LTD_EQ", "financial-structure", DECREASING),
    ("NOWC", "financial-structure", INCREASING),
    ("TD_EQ", "financial-structure", DECREASING),
    # liquidity
    ("CA_TA", "liquidity", INCREASING), ("CR", "liquidity", INCREASING),
    ("DR", "liquidity", DECREASING), ("WC_TA", "liquidity", INCREASING),
    ("CASH_CL", "liquidity", INCREASING), ("CASH_TA", "liquidity", INCREASING),
    ("CL_TA", "liquidity", DECREASING), ("CASH_CA", "liquidity", INCREASING),
    ("CF_CL", "liquidity", INCREASING),
    # solvency
    ("FE_EBITDA", "solvency", DECREASING), ("FE_NI", "solvency", DECREASING),
    ("FE_TA", "solvency", DECREASING),
    # turnover
    ("CL_TS", "turnover", DECREASING), ("CA_TS", "turnover", DECREASING),
    ("WC_TS", "turnover", INCREASING),
    # activity / growth
    ("CF_NS", "activity", INCREASING), ("GROW_TA", "activity", INCREASING),
    ("EBITDA_TS", "activity", INCREASING),
    # size
    ("TA", "size", INCREASING), ("SALES", "size", INCREASING),
]

RATIO_CATALOG: dict[str, CriterionSpec] = {
    cid: CriterionSpec(cid, cid, dim, direction)
    for cid, dim, direction in _CATALOG_ROWS
}

RETAINED_SIX = ("ROA", "EBITDA_TA", "EQ_RATIO", "TD_TA", "CA_TA", "CA_TS")

_REQUIRED_COLUMNS = ("company_id", "label", "size_stratum", "year_offset")

_LABEL_TOKENS = {"active": ACTIVE, "inactive": INACTIVE}


def load_dataset(source, specs: dict[str, CriterionSpec] | None = None) -> PanelDataset:
    """Parse the panel CSV (one row per company x year offset).

    Columns: company_id,label,size_stratum,year_offset,<criterion ids...>.
    Empty cells are missing; unparseable numerics are recorded as missing,
    never dropped. Criterion specs default to the built-in ratio catalog.
    """
    if isinstance(source, (str, bytes)):
        source = io.StringIO(source if isinstance(source, str) else source.decode("utf-8"))
    reader = csv.reader(source)
    try:
        header = next(reader)
    except StopIteration:
        raise DatasetError("empty input") from None
    header = [h.strip() for h in header]
    for col in _REQUIRED_COLUMNS:
        if col not in header:
            raise DatasetError(f"malformed header: missing column {col!r}")
    crit_cols = [(i, h) for i, h in enumerate(header) if h not in _REQUIRED_COLUMNS]
    if len({h for _, h in crit_cols}) != len(crit_cols):
        raise DatasetError("malformed header: duplicate criterion column")
    col_idx = {h: i for i, h in enumerate(header)}

    criteria: list[CriterionSpec] = []
    for _, cid in crit_cols:
        if specs and cid in specs:
            criteria.append(specs[cid])
        elif cid in RATIO_CATALOG:
            criteria.append(RATIO_CATALOG[cid])
        else:
            raise DatasetError(
                f"criterion {cid!r} not in the ratio catalog; supply a spec for it")

    companies: dict[str, CompanyRecord] = {}
    seen_rows: set[tuple[str, int]] = set()
    for lineno, row in enumerate(reader, start=2):
        if not row or all(not cell.strip() for cell in row):
            continue
        if len(row) != len(header):
            raise DatasetError(f"line {lineno}: expected {len(header)} cells, got {len(row)}")
        cid = row[col_idx["company_id"]].strip()
        if not cid:
            raise DatasetError(f"line {lineno}: empty company_id")
        label_tok = row[col_idx["label"]].strip().lower()
        if label_tok not in _LABEL_TOKENS:
            raise DatasetError(f"line {lineno}: unknown label token {label_tok!r}")
        label = _LABEL_TOKENS[label_tok]
        stratum = row[col_idx["size_stratum"]].strip().lower()
        if stratum not in STRATA:
            raise DatasetError(f"line {lineno}: unknown size stratum {stratum!r}")
        try:
            year = int(row[col_idx["year_offset"]])
        except ValueError:
            raise DatasetError(f"line {lineno}: bad year_offset") from None
        if year not in YEAR_OFFSETS:
            raise DatasetError(f"line {lineno}: year_offset {year} outside {YEAR_OFFSETS}")
        if (cid, year) in seen_rows:
            raise DatasetError(f"line {lineno}: duplicate company_id {cid!r} for year {year}")
        seen_rows.add((cid, year))

        rec = companies.get(cid)
        if rec is None:
            rec = CompanyRecord(cid, label, stratum)
            companies[cid] = rec
        else:
            if rec.label != label or rec.size_stratum != stratum:
                raise DatasetError(f"line {lineno}: inconsistent label/stratum for {cid!r}")
        for i, crit in crit_cols:
            cell = row[i].strip()
            if not cell:
                continue
            try:
                rec.values[(crit, year)] = float(cell)
            except ValueError:
                continue  # unparseable numeric -> missing
    return PanelDataset(criteria, list(companies.values()))


def write_dataset_csv(ds: PanelDataset, stream) -> None:
    """Inverse of load_dataset for the same schema."""
    label_tok = {ACTIVE: "active", INACTIVE: "inactive"}
    ids = ds.criterion_ids
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(list(_REQUIRED_COLUMNS) + ids)
    for rec in ds.companies:
        years = sorted({y for (_, y) in rec.values})
        for year in years:
            cells = [rec.company_id, label_tok[rec.label], rec.size_stratum, str(year)]
            for cid in ids:
                v = rec.values.get((cid, year))
                cells.append("" if v is None else repr(v))
            writer.writerow(cells)


def build_matrix(ds: PanelDataset, year: int, criteria: list[str] | None = None,
                 drop_missing: bool = True) -> PerformanceMatrix:
    """Rectangular slice for one year offset; companies with any missing value
    on the requested cells are excluded when drop_missing is set."""
    if criteria is None:
        criteria = ds.criterion_ids
    known = set(ds.criterion_ids)
    for c in criteria:
        if c not in known:
            raise DatasetError(f"unknown criterion {c!r}")
    rows, ids, labels = [], [], {}
    for rec in ds.companies:
        vals = [rec.get(c, year) for c in criteria]
        if drop_missing and any(v is None for v in vals):
            continue
        if any(v is None for v in vals):
            raise DatasetError(
                f"missing value for {rec.company_id!r} with drop_missing unset")
        rows.append(vals)
        ids.append(rec.company_id)
        labels[rec.company_id] = rec.label
    if not rows:
        raise DatasetError(f"no complete rows for year {year} on {criteria}")
    dirs = tuple(ds.spec(c).direction for c in criteria)
    return PerformanceMatrix(year, tuple(criteria), tuple(ids),
                             np.array(rows, dtype=float), labels, dirs)


def align_directions(m: PerformanceMatrix, specs: list[CriterionSpec]) -> PerformanceMatrix:
    """Negate every column whose spec direction is decreasing and mark all
    columns increasing. Applying twice restores the original values."""
    by_id = {s.id: s for s in specs}
    values = m.values.copy()
    for j, cid in enumerate(m.criteria):
        spec = by_id.get(cid)
        if spec is None:
            raise DatasetError(f"no spec for criterion {cid!r}")
        if spec.direction == DECREASING:
            values[:, j] = -values[:, j]
    return replace(m, values=values, directions=tuple(INCREASING for _ in m.criteria))


def iqr_trim(m: PerformanceMatrix, mode: str = TRIM_STANDARD) -> PerformanceMatrix:
    """Clamp per-criterion outliers to interquartile fences.

    standard_tukey: fences Q1 - 1.5*IQR and Q3 + 1.5*IQR.
    paper_literal:  fences Q1 - 1.5*IQR and Q1 + 1.5*IQR.
    Quartiles use linear interpolation of order statistics. Constant columns
    (IQR = 0) pass through unchanged.
    """
    if mode not in (TRIM_STANDARD, TRIM_LITERAL):
        raise DatasetError(f"unknown trim mode {mode!r}")
    if m.values.shape[0] < 4:
        raise DatasetError("iqr_trim needs at least 4 rows")
    values = m.values.copy()
    for j in range(values.shape[1]):
        col = values[:, j]
        q1, q3 = np.quantile(col, [0.25, 0.75])
        iqr = q3 - q1
        if iqr == 0:
            continue
        lo = q1 - 1.5 * iqr
        hi = (q3 + 1.5 * iqr) if mode == TRIM_STANDARD else (q1 + 1.5 * iqr)
        values[:, j] = np.clip(col, lo, hi)
    return replace(m, values=values)

"""Multi-group hierarchical discrimination with additive utility pairs.

Each hierarchy stage fits two additive utility functions, one scoring
membership in the current best class and one scoring the riskier remainder,
and assigns an alternative to the class whose utility wins. Marginal
utilities are piecewise linear over equal-width breakpoints and modeled as
nonnegative increments, so monotonicity is a variable bound rather than a
constraint row.

Fitting runs a three-program cascade per stage:
  1. an LP minimizing the total classification error slack,
  2. a binary MIP minimizing the number of misclassified alternatives among
     those the LP could not separate (others keep hard margin rows),
  3. an LP maximizing the common margin of the correctly classified set,
     with a secondary pass maximizing the margin sum at the fixed optimum.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .dataset import PerformanceMatrix
from .metrics import ConfusionMatrix, confusion
from .solver import (
    INFEASIBLE,
    OPTIMAL,
    LinearProgram,
    MixedBinaryProgram,
    SolverConfig,
    solve_lp,
    solve_mip,
)


class MhdisError(RuntimeError):
    pass


@dataclass(frozen=True)
class MhdisConfig:
    breakpoints: int = 3          # subintervals per criterion
    delta: float = 0.001          # required separation on training rows
    tie_tol: float = 1e-12
    error_tol: float = 1e-6       # slack above this marks an LP-stage miss
    solver: SolverConfig = field(default_factory=SolverConfig)

    @property
    def big_m(self) -> float:
        return 1.0 + self.delta


@dataclass
class PiecewiseUtility:
    criterion: str
    breakpoints: np.ndarray       # ascending, spans the training range
    values: np.ndarray            # cumulative marginal utility, values[0] = 0

    def __post_init__(self):
        self.breakpoints = np.asarray(self.breakpoints, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if self.breakpoints.size != self.values.size:
            raise MhdisError("breakpoints/values size mismatch")
        if np.any(np.diff(self.values) < -1e-9):
            raise MhdisError(f"marginal utility for {self.criterion} decreases")

    def __call__(self, g) -> float:
        if self.breakpoints.size == 1:
            return 0.0
        return float(np.interp(g, self.breakpoints, self.values))

    @property
    def weight(self) -> float:
        return float(self.values[-1])


@dataclass
class StageDiagnostics:
    lp1_error: float
    mip_count: int
    lp2_margin: float
    n_train: int
    misclassified_ids: tuple[str, ...] = ()
    truncated: bool = False


@dataclass
class UtilityPair:
    stage: int
    criteria: tuple[str, ...]
    main: dict[str, PiecewiseUtility]      # utilities of the stage class
    rest: dict[str, PiecewiseUtility]      # utilities of the riskier remainder
    diagnostics: StageDiagnostics | None = None

    def weights(self, side: str) -> dict[str, float]:
        """Criterion weight percentages (maximal marginal value x 100)."""
        utilities = self.main if side == "main" else self.rest
        return {c: 100.0 * utilities[c].weight for c in self.criteria}


def global_utility(pair: UtilityPair, side: str, g) -> float:
    """Sum of interpolated marginal utilities; lies in [0, 1] after clamping."""
    utilities = pair.main if side == "main" else pair.rest
    g = np.asarray(g, dtype=float)
    if g.size != len(pair.criteria):
        raise MhdisError("criterion vector dimension mismatch")
    return float(sum(utilities[c](g[i]) for i, c in enumerate(pair.criteria)))


@dataclass
class MhdisModel:
    categories: tuple[str, ...]
    criteria: tuple[str, ...]
    stages: list[UtilityPair]
    config: MhdisConfig
    train_confusion: ConfusionMatrix | None = None

    def to_json(self) -> str:
        def side(utilities):
            return {c: {"breakpoints": u.breakpoints.tolist(),
                        "values": u.values.tolist()}
                    for c, u in utilities.items()}

        doc = {
            "categories": list(self.categories),
            "criteria": list(self.criteria),
            "delta": self.config.delta,
            "breakpoints": self.config.breakpoints,
            "stages": [],
        }
        for pair in self.stages:
            d = pair.diagnostics
            doc["stages"].append({
                "stage": pair.stage,
                "main": side(pair.main),
                "rest": side(pair.rest),
                "weights_main_pct": pair.weights("main"),
                "weights_rest_pct": pair.weights("rest"),
                "diagnostics": None if d is None else {
                    "lp1_error": d.lp1_error, "mip_count": d.mip_count,
                    "lp2_margin": d.lp2_margin, "n_train": d.n_train,
                    "misclassified_ids": list(d.misclassified_ids),
                    "truncated": d.truncated,
                },
            })
        if self.train_confusion is not None:
            c = self.train_confusion
            doc["train_confusion"] = {"tp": c.tp, "fp": c.fp, "fn": c.fn, "tn": c.tn}
        return json.dumps(doc, indent=2)

    @classmethod
    def from_json(cls, text: str) -> "MhdisModel":
        doc = json.loads(text)
        cfg = MhdisConfig(breakpoints=doc["breakpoints"], delta=doc["delta"])
        stages = []
        for sd in doc["stages"]:
            def side(block):
                return {c: PiecewiseUtility(c, np.array(v["breakpoints"]),
                                            np.array(v["values"]))
                        for c, v in block.items()}
            diag = None
            if sd.get("diagnostics"):
                dd = sd["diagnostics"]
                diag = StageDiagnostics(dd["lp1_error"], dd["mip_count"],
                                        dd["lp2_margin"], dd["n_train"],
                                        tuple(dd.get("misclassified_ids", ())),
                                        dd.get("truncated", False))
            stages.append(UtilityPair(sd["stage"], tuple(doc["criteria"]),
                                      side(sd["main"]), side(sd["rest"]), diag))
        tc = doc.get("train_confusion")
        conf = ConfusionMatrix(tc["tp"], tc["fp"], tc["fn"], tc["tn"]) if tc else None
        return cls(tuple(doc["categories"]), tuple(doc["criteria"]), stages, cfg, conf)


def _coverage(values: np.ndarray, breakpoints: np.ndarray) -> np.ndarray:
    """Fraction of each subinterval lying below each value, clipped to [0, 1].

    The marginal utility at g is the increment vector dotted with this row.
    """
    widths = np.diff(breakpoints)
    cov = (values[:, None] - breakpoints[:-1][None, :]) / widths[None, :]
    return np.clip(cov, 0.0, 1.0)


class _StageProblem:
    """Shared geometry for the three programs of one stage."""

    def __init__(self, values: np.ndarray, members: np.ndarray, cfg: MhdisConfig):
        self.cfg = cfg
        self.m, n_crit = values.shape
        self.lo = values.min(axis=0)
        self.hi = values.max(axis=0)
        self.active = [i for i in range(n_crit) if self.hi[i] > self.lo[i]]
        if not self.active:
            raise MhdisError("every criterion is constant on this stage's data")
        self.breaks = {i: np.linspace(self.lo[i], self.hi[i], cfg.breakpoints + 1)
                       for i in self.active}
        blocks = [_coverage(values[:, i], self.breaks[i]) for i in self.active]
        self.phi = np.hstack(blocks)                       # m x K
        self.K = self.phi.shape[1]
        self.sign = np.where(members, 1.0, -1.0)
        # per-alternative coefficients on [main increments, rest increments]
        self.diff_rows = np.hstack([
            self.sign[:, None] * self.phi, -self.sign[:, None] * self.phi])

    def norm_rows(self, extra: int):
        rows = np.zeros((2, 2 * self.K + extra))
        rows[0, :self.K] = 1.0
        rows[1, self.K:2 * self.K] = 1.0
        return rows

    def build_utilities(self, w: np.ndarray, criteria) -> tuple[dict, dict]:
        cfg = self.cfg
        main: dict[str, PiecewiseUtility] = {}
        rest: dict[str, PiecewiseUtility] = {}
        per_side = {0: main, 1: rest}
        for side in (0, 1):
            pos = 0
            for i, cid in enumerate(criteria):
                if i in self.active:
                    inc = w[side * self.K + pos: side * self.K + pos + cfg.breakpoints]
                    inc = np.clip(inc, 0.0, None)
                    vals = np.concatenate([[0.0], np.cumsum(inc)])
                    per_side[side][cid] = PiecewiseUtility(cid, self.breaks[i], vals)
                    pos += cfg.breakpoints
                else:
                    per_side[side][cid] = PiecewiseUtility(
                        cid, np.array([self.lo[i]]), np.array([0.0]))
        return main, rest


def _solve_or_raise(prog, cfg: SolverConfig, what: str):
    sol = solve_lp(prog, cfg)
    if sol.status != OPTIMAL:
        raise MhdisError(f"{what} ended with status {sol.status}")
    return sol


def fit_stage(m: PerformanceMatrix, member_class: str, config: MhdisConfig | None = None,
              labels: dict[str, str] | None = None) -> UtilityPair:
    """Fit one stage's utility pair on a two-group training matrix.

    member_class marks the rows forming the current best class; every other
    row is treated as the riskier remainder.
    """
    cfg = config or MhdisConfig()
    labels = labels or {cid: m.labels[cid] for cid in m.company_ids}
    members = np.array([labels[cid] == member_class for cid in m.company_ids])
    if members.all() or not members.any():
        raise MhdisError("both groups must be nonempty")

    sp = _StageProblem(m.values, members, cfg)
    K, n = sp.K, sp.m
    delta, big_m = cfg.delta, cfg.big_m
    scfg = cfg.solver

    # --- program 1: minimize total error slack ---
    A1 = np.hstack([sp.diff_rows, np.eye(n)])
    A1 = np.vstack([A1, sp.norm_rows(extra=n)])
    rel1 = [">="] * n + ["="] * 2
    rhs1 = np.concatenate([np.full(n, delta), [1.0, 1.0]])
    c1 = np.concatenate([np.zeros(2 * K), np.ones(n)])
    bounds1 = [(0.0, 1.0)] * (2 * K) + [(0.0, big_m)] * n
    sol1 = _solve_or_raise(LinearProgram("min", c1, A1, rel1, rhs1, bounds1),
                           scfg, "error-minimization program")
    slack = sol1.x[2 * K:]
    lp1_error = float(slack.sum())

    def run_mip(binarize: list[int], short: list[int]):
        """Minimize the number of margin violations.

        binarize: rows whose slack gets an indicator variable.
        short: rows keeping a continuous slack capped at delta; these were
        sign-correct but margin-short after the error program and cannot be
        forced to the full margin without sacrificing others.
        Every remaining row keeps its hard margin constraint.
        """
        if not binarize:
            return [], 0
        nm, ns = len(binarize), len(short)
        pos_b = {r: j for j, r in enumerate(binarize)}
        pos_s = {r: j for j, r in enumerate(short)}
        cols = 2 * K + nm + ns + nm      # increments, e_bin, e_short, y
        rows, rels, rhs = [], [], []
        for r in range(n):
            row = np.zeros(cols)
            row[:2 * K] = sp.diff_rows[r]
            if r in pos_b:
                row[2 * K + pos_b[r]] = 1.0
            elif r in pos_s:
                row[2 * K + nm + pos_s[r]] = 1.0
            rows.append(row)
            rels.append(">=")
            rhs.append(delta)
        for r, j in pos_b.items():
            row = np.zeros(cols)
            row[2 * K + j] = 1.0
            row[2 * K + nm + ns + j] = -big_m
            rows.append(row)
            rels.append("<=")
            rhs.append(0.0)
        norm = sp.norm_rows(extra=nm + ns + nm)
        rows += [norm[0], norm[1]]
        rels += ["=", "="]
        rhs += [1.0, 1.0]
        c = np.zeros(cols)
        c[2 * K + nm + ns:] = 1.0
        bounds = ([(0.0, 1.0)] * (2 * K) + [(0.0, big_m)] * nm
                  + [(0.0, delta)] * ns + [(0.0, 1.0)] * nm)
        prog = LinearProgram("min", c, np.array(rows), rels, np.array(rhs), bounds)
        sol = solve_mip(MixedBinaryProgram(prog, list(range(2 * K + nm + ns, cols))),
                        scfg)
        if sol.status == INFEASIBLE:
            return None, None
        if sol.status != OPTIMAL:
            raise MhdisError(f"count-minimization program ended {sol.status}")
        chosen = [r for r, j in pos_b.items() if sol.x[2 * K + nm + ns + j] > 0.5]
        return chosen, int(round(sol.objective))

    sign_wrong = [r for r in range(n) if slack[r] > delta]
    margin_short = [r for r in range(n) if cfg.error_tol < slack[r] <= delta]
    mis_rows, mip_count = run_mip(sign_wrong, margin_short)
    if mis_rows is None:
        # the hard rows were unsatisfiable at full margin; binarize every
        # strictly positive slack instead
        fallback = [r for r in range(n) if slack[r] > 1e-12]
        margin_short = []
        mis_rows, mip_count = run_mip(fallback, [])
        if mis_rows is None:
            raise MhdisError("count-minimization program infeasible")

    # --- program 3: maximize the common margin of the separated set ---
    mis_set = set(mis_rows)
    short_rows = [r for r in margin_short if r not in mis_set]
    pos_m = {r: j for j, r in enumerate(mis_rows)}
    pos_s = {r: j for j, r in enumerate(short_rows)}
    nm, ns = len(mis_rows), len(short_rows)

    def margin_program(maximize_margin: bool, d_fixed: float | None):
        cols = 2 * K + nm + ns + (1 if maximize_margin else 0)
        rows, rels, rhs = [], [], []
        obj = np.zeros(cols)
        for r in range(n):
            row = np.zeros(cols)
            row[:2 * K] = sp.diff_rows[r]
            if r in pos_m:
                row[2 * K + pos_m[r]] = 1.0
                rhs.append(delta)
            elif r in pos_s:
                row[2 * K + nm + pos_s[r]] = 1.0
                rhs.append(delta)
            elif maximize_margin:
                row[-1] = -1.0
                rhs.append(0.0)
            else:
                rhs.append(max(d_fixed - 1e-9, 0.0))
                obj += row
            rows.append(row)
            rels.append(">=")
        norm = sp.norm_rows(extra=cols - 2 * K)
        rows += [norm[0], norm[1]]
        rels += ["=", "="]
        rhs += [1.0, 1.0]
        bounds = ([(0.0, 1.0)] * (2 * K) + [(0.0, big_m)] * nm
                  + [(0.0, delta)] * ns)
        if maximize_margin:
            obj[-1] = 1.0
            bounds.append((0.0, 2.0))
        return LinearProgram("max", obj, np.array(rows), rels,
                             np.array(rhs), bounds)

    sol3 = _solve_or_raise(margin_program(True, None), scfg, "margin program")
    d_star = float(sol3.objective)
    # secondary pass: maximize the sum of margins at the fixed optimum
    sol4 = _solve_or_raise(margin_program(False, d_star), scfg,
                           "margin tie-break program")

    w = sol4.x[:2 * K]
    main, rest = sp.build_utilities(w, m.criteria)
    diag = StageDiagnostics(lp1_error, mip_count, d_star, n,
                            tuple(m.company_ids[r] for r in mis_rows))
    return UtilityPair(0, m.criteria, main, rest, diag)


def fit(m: PerformanceMatrix, categories, config: MhdisConfig | None = None,
        labels: dict[str, str] | None = None) -> MhdisModel:
    """Fit the full hierarchy: one utility pair per category boundary.

    Alternatives a stage assigns to its class, correctly or not, are excluded
    from later stages. A stage left with an empty group truncates the
    hierarchy with a diagnostic instead of failing.
    """
    cfg = config or MhdisConfig()
    categories = tuple(categories)
    if len(categories) < 2:
        raise MhdisError("need at least two categories")
    labels = labels or {cid: m.labels[cid] for cid in m.company_ids}
    for cat in categories:
        if not any(labels[cid] == cat for cid in m.company_ids):
            raise MhdisError(f"category {cat!r} empty in training data")

    stages: list[UtilityPair] = []
    remaining = m
    for k, cat in enumerate(categories[:-1]):
        members = [cid for cid in remaining.company_ids if labels[cid] == cat]
        others = [cid for cid in remaining.company_ids if labels[cid] != cat]
        if not members or not others:
            if stages:
                stages[-1].diagnostics.truncated = True
            break
        pair = fit_stage(remaining, cat, cfg, labels)
        pair.stage = k + 1
        stages.append(pair)
        if k + 1 < len(categories) - 1:
            keep = []
            for i, cid in enumerate(remaining.company_ids):
                um = global_utility(pair, "main", remaining.values[i])
                ur = global_utility(pair, "rest", remaining.values[i])
                if um - ur > cfg.tie_tol:
                    continue                  # claimed by this stage
                keep.append(cid)
            remaining = remaining.rows_for(keep)
            if len(remaining.company_ids) == 0:
                pair.diagnostics.truncated = True
                break

    model = MhdisModel(categories, m.criteria, stages, cfg)
    predicted = classify_matrix(model, m)
    if len(categories) == 2:
        true = [("C1" if labels[cid] == categories[0] else "C2")
                for cid in m.company_ids]
        pred = [("C1" if predicted[cid] == categories[0] else "C2")
                for cid in m.company_ids]
        model.train_confusion = confusion(true, pred)
    return model


def classify(model: MhdisModel, g) -> str:
    """Walk the hierarchy; ties route to the riskier branch. Falls through to
    the last category when no stage claims the alternative."""
    g = np.asarray(g, dtype=float)
    for k, pair in enumerate(model.stages):
        um = global_utility(pair, "main", g)
        ur = global_utility(pair, "rest", g)
        if um - ur > model.config.tie_tol:
            return model.categories[k]
    return model.categories[-1]


def classify_matrix(model: MhdisModel, m: PerformanceMatrix) -> dict[str, str]:
    sub = m.restrict(list(model.criteria))
    return {cid: classify(model, sub.values[i])
            for i, cid in enumerate(sub.company_ids)}

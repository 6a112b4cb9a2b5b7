"""Dense LP / small binary-MIP solver.

Bounded-variable primal simplex (Dantzig pricing, Bland's rule as the
anti-cycling fallback) plus best-first branch-and-bound on binary variables.
Child nodes re-solve by warm-started dual simplex: fixing a binary changes
only bounds, which preserves dual feasibility of the parent basis. Instances
here are small and dense; no presolve, no sparse factorization.
"""

from __future__ import annotations

from dataclasses import dataclass
import heapq
import math

import numpy as np

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"

_LOWER, _UPPER, _BASIC = 0, 1, 2


class SolverError(RuntimeError):
    """Numerical failure or resource exhaustion, distinct from infeasibility."""


@dataclass
class LinearProgram:
    """min/max objective @ x subject to rows and box bounds.

    rows: (coefficients, relation, rhs) with relation in {'<=', '>=', '='}.
    bounds: per-variable (lo, hi); lo finite, hi may be math.inf.
    """

    sense: str
    objective: np.ndarray
    row_coeffs: np.ndarray        # shape (k, n); k may be 0
    row_relations: list[str]
    row_rhs: np.ndarray
    bounds: list[tuple[float, float]]

    def __post_init__(self):
        self.objective = np.asarray(self.objective, dtype=float)
        self.row_coeffs = np.asarray(self.row_coeffs, dtype=float)
        if self.row_coeffs.ndim == 1:
            self.row_coeffs = self.row_coeffs.reshape(0, self.objective.size)
        self.row_rhs = np.asarray(self.row_rhs, dtype=float)
        n = self.objective.size
        if self.row_coeffs.size and self.row_coeffs.shape[1] != n:
            raise ValueError("row width does not match objective length")
        if len(self.bounds) != n:
            raise ValueError("bounds length does not match objective length")
        if self.sense not in ("min", "max"):
            raise ValueError(f"unknown sense {self.sense!r}")
        for rel in self.row_relations:
            if rel not in ("<=", ">=", "="):
                raise ValueError(f"unknown relation {rel!r}")

    @property
    def n_vars(self) -> int:
        return self.objective.size


@dataclass
class MixedBinaryProgram:
    program: LinearProgram
    binary_idx: list[int]


@dataclass
class Solution:
    status: str
    x: np.ndarray | None
    objective: float | None
    iterations: int = 0
    nodes: int = 0


@dataclass
class SolverConfig:
    feas_tol: float = 1e-9
    opt_tol: float = 1e-9
    int_tol: float = 1e-6
    pivot_tol: float = 1e-10
    max_iter: int = 20000
    node_limit: int = 50000
    refactor_every: int = 100


def _standard_form(prog: LinearProgram):
    """Equality form min c@x, A@x = b, lb <= x <= ub (slack per inequality)."""
    n = prog.n_vars
    obj_sign = 1.0 if prog.sense == "min" else -1.0
    lb_s = np.array([b[0] for b in prog.bounds], dtype=float)
    ub_s = np.array([b[1] for b in prog.bounds], dtype=float)
    if not np.all(np.isfinite(lb_s)):
        raise ValueError("lower bounds must be finite")
    if np.any(ub_s < lb_s):
        raise ValueError("upper bound below lower bound")

    k = prog.row_coeffs.shape[0]
    n_slack = sum(1 for r in prog.row_relations if r != "=")
    A = np.zeros((k, n + n_slack))
    if k:
        A[:, :n] = prog.row_coeffs
    b = prog.row_rhs.astype(float).copy()
    lb = np.concatenate([lb_s, np.zeros(n_slack)])
    ub = np.concatenate([ub_s, np.full(n_slack, math.inf)])
    c = np.concatenate([obj_sign * prog.objective, np.zeros(n_slack)])
    s = n
    for i, rel in enumerate(prog.row_relations):
        if rel == "<=":
            A[i, s] = 1.0
            s += 1
        elif rel == ">=":
            A[i, s] = -1.0
            s += 1
    return A, b, c, lb, ub, n, obj_sign


class _Simplex:
    """Bounded-variable simplex core on min c@x, A@x = b, lb <= x <= ub.

    Supports a fresh two-phase primal solve and a warm dual re-solve after
    bound changes (basis stays dual feasible when only bounds move).
    """

    def __init__(self, A, b, c, lb, ub, cfg: SolverConfig):
        self.m, self.N = A.shape
        # artificial columns appended once; fixed at zero outside phase one
        self.A = np.hstack([A, np.eye(self.m)]) if self.m else A.copy()
        self.b = b.astype(float).copy()
        self.c = np.concatenate([c, np.zeros(self.m)])
        self.lb = np.concatenate([lb, np.zeros(self.m)])
        self.ub = np.concatenate([ub, np.zeros(self.m)])
        self.cfg = cfg
        self.iterations = 0
        self.basis = None
        self.status = None
        self.Binv = None
        self.xb = None

    # --- state helpers ---

    def set_bounds(self, j: int, lo: float, hi: float):
        self.lb[j] = lo
        self.ub[j] = hi

    def _nonbasic_values(self):
        xn = np.where(self.status == _UPPER, self.ub, self.lb)
        xn[self.basis] = 0.0
        return xn

    def _recompute_xb(self):
        rhs = self.b - self.A @ self._nonbasic_values()
        self.xb = self.Binv @ rhs

    def _refactor(self):
        B = self.A[:, self.basis]
        try:
            self.Binv = np.linalg.inv(B)
        except np.linalg.LinAlgError as exc:
            raise SolverError("singular basis during refactorization") from exc
        self._recompute_xb()

    def load_basis(self, basis, status):
        self.basis = np.asarray(basis, dtype=int).copy()
        self.status = np.asarray(status, dtype=int).copy()
        self._refactor()


    def solution(self):
        x = self._nonbasic_values()
        x[self.basis] = self.xb
        return x

    def objective_value(self, c=None):
        c = self.c if c is None else c
        return float(c @ self.solution())

    # --- primal iteration ---

    def _run_primal(self, c, phase_two: bool) -> str:
        cfg = self.cfg
        movable = (self.ub - self.lb) > 0
        stall = 0
        bland = False
        since_refactor = 0
        while True:
            self.iterations += 1
            if self.iterations > cfg.max_iter:
                raise SolverError("iteration limit exceeded")
            y = c[self.basis] @ self.Binv
            red = c - y @ self.A
            at_lower = (self.status == _LOWER) & movable & (red < -cfg.opt_tol)
            at_upper = (self.status == _UPPER) & movable & (red > cfg.opt_tol)
            eligible = at_lower | at_upper
            if not eligible.any():
                return OPTIMAL
            if bland:
                j = int(np.flatnonzero(eligible)[0])
            else:
                scores = np.where(eligible, np.abs(red), -1.0)
                j = int(np.argmax(scores))
            sigma = 1.0 if self.status[j] == _LOWER else -1.0

            d = self.Binv @ self.A[:, j]
            step = sigma * d
            lbv = self.lb[self.basis]
            ubv = self.ub[self.basis]
            with np.errstate(divide="ignore", invalid="ignore"):
                dec = np.where(step > cfg.pivot_tol,
                               (self.xb - lbv) / step, math.inf)
                inc = np.where(step < -cfg.pivot_tol,
                               (ubv - self.xb) / (-step), math.inf)
            limits = np.minimum(dec, inc)
            t_rows = limits.min() if self.m else math.inf
            t_flip = self.ub[j] - self.lb[j]
            t = min(t_rows, t_flip)
            if not np.isfinite(t):
                if phase_two:
                    return UNBOUNDED
                raise SolverError("phase-one subproblem unbounded")

            if t_flip <= t_rows and t > 0:
                self.xb = self.xb - step * t
                self.status[j] = _UPPER if self.status[j] == _LOWER else _LOWER
            else:
                tied = np.flatnonzero(limits <= t + 1e-15)
                r = int(tied[np.argmin(self.basis[tied])])
                leave = self.basis[r]
                hit_upper = inc[r] <= dec[r]
                start = self.lb[j] if self.status[j] == _LOWER else self.ub[j]
                self.xb = self.xb - step * t
                self.status[leave] = _UPPER if hit_upper else _LOWER
                self.status[j] = _BASIC
                self.basis[r] = j
                piv = d[r]
                if abs(piv) < cfg.pivot_tol:
                    raise SolverError("pivot element below tolerance")
                self._eta_update(r, d)
                self.xb[r] = start + sigma * t
                since_refactor += 1
                if since_refactor >= cfg.refactor_every:
                    self._refactor()
                    since_refactor = 0

            if t <= cfg.opt_tol:
                stall += 1
                if stall > 4 * (self.m + self.N):
                    bland = True
            else:
                stall = 0

    def _eta_update(self, r: int, d: np.ndarray):
        self.Binv[r, :] /= d[r]
        others = np.arange(self.m) != r
        self.Binv[others, :] -= np.outer(d[others], self.Binv[r, :])

    def primal_two_phase(self) -> str:
        """Fresh solve: artificial basis, phase one, then the real objective."""
        if self.m == 0:
            raise SolverError("two-phase needs at least one row")
        n_tot = self.N + self.m
        self.status = np.full(n_tot, _LOWER, dtype=int)
        self.basis = np.arange(self.N, n_tot)
        self.status[self.basis] = _BASIC
        xn = np.where(self.status == _UPPER, self.ub, self.lb)
        xn[self.basis] = 0.0
        r0 = self.b - self.A[:, :self.N] @ xn[:self.N]
        sign = np.where(r0 >= 0, 1.0, -1.0)
        self.A[:, self.N:] = np.diag(sign)
        self.ub[self.N:] = math.inf
        self.Binv = np.diag(sign)
        self.xb = np.abs(r0)

        c1 = np.zeros(n_tot)
        c1[self.N:] = 1.0
        self._run_primal(c1, phase_two=False)
        if float(c1[self.basis] @ np.clip(self.xb, 0.0, None)) > math.sqrt(self.cfg.feas_tol):
            return INFEASIBLE
        self.ub[self.N:] = 0.0
        return self._run_primal(self.c, phase_two=True)

    # --- dual iteration (after bound changes) ---

    def run_dual(self) -> str:
        """Restore primal feasibility while keeping reduced-cost optimality.

        Requires a dual-feasible basis (any optimal basis before the bound
        change). Returns optimal or infeasible; raises on stall so callers
        can fall back to a fresh primal solve.
        """
        cfg = self.cfg
        feas = math.sqrt(cfg.feas_tol)
        movable = (self.ub - self.lb) > 0
        y = self.c[self.basis] @ self.Binv
        red = self.c - y @ self.A
        for _ in range(2 * (self.m + self.N) + 200):
            self.iterations += 1
            lbv = self.lb[self.basis]
            ubv = self.ub[self.basis]
            low_viol = lbv - self.xb
            up_viol = self.xb - ubv
            viol = np.maximum(low_viol, up_viol)
            r = int(np.argmax(viol))
            if viol[r] <= feas:
                return OPTIMAL
            below = low_viol[r] >= up_viol[r]

            alpha = self.Binv[r, :] @ self.A
            if below:
                elig_low = (self.status == _LOWER) & movable & (alpha < -cfg.pivot_tol)
                elig_up = (self.status == _UPPER) & movable & (alpha > cfg.pivot_tol)
            else:
                elig_low = (self.status == _LOWER) & movable & (alpha > cfg.pivot_tol)
                elig_up = (self.status == _UPPER) & movable & (alpha < -cfg.pivot_tol)
            eligible = elig_low | elig_up
            if not eligible.any():
                return INFEASIBLE
            with np.errstate(divide="ignore", invalid="ignore"):
                ratios = np.where(eligible, np.abs(red) / np.abs(alpha), math.inf)
            j = int(np.argmin(ratios))

            d = self.Binv @ self.A[:, j]
            bound = lbv[r] if below else ubv[r]
            delta_j = (self.xb[r] - bound) / d[r]
            leave = self.basis[r]
            x_j = self.lb[j] if self.status[j] == _LOWER else self.ub[j]
            self.xb = self.xb - d * delta_j
            self.status[leave] = _LOWER if below else _UPPER
            self.status[j] = _BASIC
            self.basis[r] = j
            self._eta_update(r, d)
            self.xb[r] = x_j + delta_j
            y = self.c[self.basis] @ self.Binv
            red = self.c - y @ self.A
        raise SolverError("dual simplex stalled")


def _verify(prog: LinearProgram, x: np.ndarray, cfg: SolverConfig):
    tol = math.sqrt(cfg.feas_tol) * 10
    lo = np.array([b[0] for b in prog.bounds])
    hi = np.array([b[1] for b in prog.bounds])
    if np.any(x < lo - tol) or np.any(x > hi + tol):
        raise SolverError("bound violation in returned solution")
    if prog.row_coeffs.shape[0]:
        lhs = prog.row_coeffs @ x
        scale = 1.0 + np.abs(prog.row_rhs)
        for i, rel in enumerate(prog.row_relations):
            resid = lhs[i] - prog.row_rhs[i]
            if rel == "<=" and resid > tol * scale[i]:
                raise SolverError("row violation in returned solution")
            if rel == ">=" and resid < -tol * scale[i]:
                raise SolverError("row violation in returned solution")
            if rel == "=" and abs(resid) > tol * scale[i]:
                raise SolverError("row violation in returned solution")


def _trivial_solution(prog: LinearProgram, c, lb, ub, n, obj_sign):
    x = lb.copy()
    unbounded = (c < 0) & ~np.isfinite(ub)
    if unbounded.any():
        return Solution(UNBOUNDED, None, None)
    x[c < 0] = ub[c < 0]
    xs = x[:n]
    return Solution(OPTIMAL, xs, float(prog.objective @ xs))


def solve_lp(prog: LinearProgram, cfg: SolverConfig | None = None) -> Solution:
    """Solve to a certified optimum, or report infeasible/unbounded."""
    cfg = cfg or SolverConfig()
    A, b, c, lb, ub, n, obj_sign = _standard_form(prog)
    if A.shape[0] == 0:
        return _trivial_solution(prog, c, lb, ub, n, obj_sign)
    sim = _Simplex(A, b, c, lb, ub, cfg)
    stat = sim.primal_two_phase()
    if stat == INFEASIBLE:
        return Solution(INFEASIBLE, None, None, iterations=sim.iterations)
    if stat == UNBOUNDED:
        return Solution(UNBOUNDED, None, None, iterations=sim.iterations)
    x = sim.solution()[:n]
    _verify(prog, x, cfg)
    return Solution(OPTIMAL, x, float(prog.objective @ x), iterations=sim.iterations)


class _MipEngine:
    """Branch and bound over one standard form with per-node binary bounds."""

    def __init__(self, mip: MixedBinaryProgram, cfg: SolverConfig):
        self.prog = mip.program
        self.cfg = cfg
        self.binaries = sorted(mip.binary_idx)
        A, b, c, lb, ub, n, obj_sign = _standard_form(self.prog)
        for j in self.binaries:
            lb[j] = max(lb[j], 0.0)
            ub[j] = min(ub[j], 1.0)
        self.base_lb, self.base_ub = lb, ub
        self.A, self.b, self.c = A, b, c
        self.n = n
        self.obj_sign = obj_sign
        self.sim = _Simplex(A, b, c, lb, ub, cfg) if A.shape[0] else None
        self.lp_solves = 0

    def _apply(self, fixes: dict[int, float]):
        sim = self.sim
        sim.lb[:self.base_lb.size] = self.base_lb
        sim.ub[:self.base_ub.size] = self.base_ub
        for j, v in fixes.items():
            sim.set_bounds(j, v, v)

    def solve_node(self, fixes, warm=None):
        """Returns (status, x, internal objective, basis, status array)."""
        self.lp_solves += 1
        if self.sim is None:
            x = np.where(self.c < 0, self.base_ub, self.base_lb)
            for j, v in fixes.items():
                x[j] = v
            if np.any((self.c < 0) & ~np.isfinite(self.base_ub) &
                      ~np.isin(np.arange(self.c.size), list(fixes))):
                return UNBOUNDED, None, None, None, None
            return OPTIMAL, x, float(self.c @ x), None, None

        sim = self.sim
        self._apply(fixes)
        stat = None
        if warm is not None:
            basis, status = warm
            try:
                # nonbasic variables track the moved bounds through their
                # status; load_basis recomputes the basic values, and the
                # untouched reduced costs keep the basis dual feasible
                sim.load_basis(basis, status)
                stat = sim.run_dual()
            except SolverError:
                stat = None
        if stat is None:
            stat = sim.primal_two_phase()
        if stat != OPTIMAL:
            return stat, None, None, None, None
        x = sim.solution()
        return (OPTIMAL, x, float(self.c @ x[:self.c.size]),
                sim.basis.copy(), sim.status.copy())


def solve_mip(mip: MixedBinaryProgram, cfg: SolverConfig | None = None) -> Solution:
    """Globally optimal binary MIP via best-first branch and bound.

    Deterministic: branching picks the lowest-index fractional binary and the
    node queue breaks bound ties by insertion order. With a purely integral
    objective the bound is rounded up before pruning.
    """
    cfg = cfg or SolverConfig()
    prog = mip.program
    eng = _MipEngine(mip, cfg)
    binaries = eng.binaries
    sense_sign = eng.obj_sign

    obj = prog.objective
    nonbin = np.ones(prog.n_vars, dtype=bool)
    nonbin[binaries] = False
    integral_obj = (np.allclose(obj[nonbin], 0.0)
                    and np.allclose(obj[binaries], np.round(obj[binaries])))

    stat, x, val, basis, vstat = eng.solve_node({})
    if stat != OPTIMAL:
        return Solution(stat, None, None)

    best_x, best_obj = None, math.inf

    def consider(x_full, internal_obj):
        nonlocal best_x, best_obj
        if internal_obj < best_obj - cfg.feas_tol:
            best_obj = internal_obj
            best_x = x_full[:prog.n_vars].copy()

    # rounding probe for an early incumbent
    probe = {j: float(round(x[j])) for j in binaries}
    pstat, px, pval, _, _ = eng.solve_node(probe, warm=(basis, vstat))
    if pstat == OPTIMAL:
        consider(px, pval)

    def cutoff(bound):
        if integral_obj:
            return math.ceil(bound - 1e-9) >= best_obj - 1e-9
        return bound >= best_obj - 1e-9

    counter = 0
    heap = [(val, 0, {}, (basis, vstat))]
    nodes = 0
    while heap:
        bound, _, fixes, warm = heapq.heappop(heap)
        if cutoff(bound):
            continue
        nodes += 1
        if nodes > cfg.node_limit:
            raise SolverError("node limit exceeded")
        stat, x, nval, nbasis, nstat = eng.solve_node(fixes, warm=warm)
        if stat != OPTIMAL:
            continue
        if cutoff(nval):
            continue
        frac = [j for j in binaries if j not in fixes
                and abs(x[j] - round(x[j])) > cfg.int_tol]
        if not frac:
            xr = x.copy()
            for j in binaries:
                xr[j] = round(xr[j])
            consider(xr, nval)
            continue
        j = frac[0]
        for v in (0.0, 1.0):
            child = dict(fixes)
            child[j] = v
            counter += 1
            heapq.heappush(heap, (nval, counter, child, (nbasis, nstat)))

    if best_x is None:
        return Solution(INFEASIBLE, None, None, nodes=nodes)
    return Solution(OPTIMAL, best_x, sense_sign * best_obj, nodes=nodes)


def to_lp_text(prog: LinearProgram, name: str = "lp") -> str:
    """Plain-text dump of an instance for external cross-checking."""
    lines = [f"\\ {name}", prog.sense]
    terms = " + ".join(f"{c:.12g} x{j}" for j, c in enumerate(prog.objective) if c != 0)
    lines.append("  " + (terms or "0"))
    lines.append("subject to")
    for i in range(prog.row_coeffs.shape[0]):
        row = " + ".join(f"{c:.12g} x{j}" for j, c in enumerate(prog.row_coeffs[i]) if c != 0)
        lines.append(f"  r{i}: {row or '0'} {prog.row_relations[i]} {prog.row_rhs[i]:.12g}")
    lines.append("bounds")
    for j, (lo, hi) in enumerate(prog.bounds):
        hi_s = "inf" if math.isinf(hi) else f"{hi:.12g}"
        lines.append(f"  {lo:.12g} <= x{j} <= {hi_s}")
    lines.append("end")
    return "\n".join(lines)

"""Bounded-variable revised simplex for small dense LPs.

Solves ``min c x  s.t.  a_i x {>=,<=,=} b_i,  lo <= x <= hi`` and always
returns a basic (vertex) solution.  Pivoting is deterministic: Dantzig's
rule for a warm-up phase, then Bland's rule, with ties in the ratio test
broken by the smallest variable index.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

FEAS_TOL = 1e-7
OPT_TOL = 1e-9
PIVOT_TOL = 1e-9
REFACTOR_EVERY = 40

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"
ITERATION_LIMIT = "iteration-limit"


@dataclass
class LpProblem:
    objective: np.ndarray
    matrix: np.ndarray
    senses: Sequence[str]
    rhs: np.ndarray
    lo: np.ndarray | None = None
    hi: np.ndarray | None = None

    def __post_init__(self):
        self.objective = np.asarray(self.objective, dtype=np.float64)
        n = self.objective.shape[0]
        self.matrix = np.asarray(self.matrix, dtype=np.float64).reshape(-1, n)
        self.rhs = np.asarray(self.rhs, dtype=np.float64).reshape(-1)
        self.senses = tuple(self.senses)
        if len(self.senses) != self.matrix.shape[0] or self.rhs.shape[0] != self.matrix.shape[0]:
            raise ValueError("matrix, senses and rhs disagree on the number of rows")
        self.lo = np.zeros(n) if self.lo is None else np.asarray(self.lo, dtype=np.float64)
        self.hi = np.ones(n) if self.hi is None else np.asarray(self.hi, dtype=np.float64)
        if np.any(self.lo > self.hi) or not (np.all(np.isfinite(self.lo)) and np.all(np.isfinite(self.hi))):
            raise ValueError("bounds must be finite with lo <= hi")

    @property
    def n(self) -> int:
        return self.objective.shape[0]

    @property
    def m(self) -> int:
        return self.matrix.shape[0]

    @classmethod
    def from_rows(cls, objective, rows, n=None, lo=None, hi=None) -> "LpProblem":
        """Build from a sequence of :class:`~lpbm.model.ConstraintRow`."""
        objective = np.asarray(objective, dtype=np.float64)
        n = objective.shape[0] if n is None else n
        mat = np.zeros((len(rows), n))
        for k, row in enumerate(rows):
            for idx, c in row.coeffs:
                mat[k, idx] = c
        return cls(objective, mat, [r.sense for r in rows], [r.rhs for r in rows], lo, hi)


@dataclass
class LpResult:
    status: str
    x: np.ndarray | None = None
    value: float = float("nan")
    is_vertex: bool = False
    duals: np.ndarray | None = None
    iterations: int = 0

    @property
    def optimal(self) -> bool:
        return self.status == OPTIMAL


@dataclass
class _State:
    cols: np.ndarray  # m x N
    b: np.ndarray
    lo: np.ndarray
    hi: np.ndarray
    x: np.ndarray  # N
    basis: list[int]
    at_upper: np.ndarray  # N bool, meaningful for nonbasic columns
    binv: np.ndarray = field(default=None)
    is_basic: np.ndarray = field(default=None)
    pivots_since_refactor: int = 0

    def refactor(self):
        bmat = self.cols[:, self.basis]
        self.binv = np.linalg.inv(bmat)
        nonbasic = ~self.is_basic
        resid = self.b - self.cols[:, nonbasic] @ self.x[nonbasic]
        self.x[self.basis] = self.binv @ resid
        self.pivots_since_refactor = 0


class SimplexSolver:
    """Single-use solver object; holds the factorisation state for one problem."""

    def __init__(self, prob: LpProblem, max_iter: int | None = None, warm_iters: int | None = None):
        self.prob = prob
        self.max_iter = 50 * (prob.n + prob.m) if max_iter is None else max_iter
        self.warm_iters = prob.n + prob.m if warm_iters is None else warm_iters
        self.iterations = 0

    def solve(self) -> LpResult:
        prob = self.prob
        n, m = prob.n, prob.m
        if m == 0:
            # separable over the box
            x = np.where(prob.objective < 0, prob.hi, prob.lo)
            return LpResult(OPTIMAL, x, float(prob.objective @ x), True, np.zeros(0), 0)

        st, n_art = self._initial_state()
        N = st.cols.shape[1]
        art = np.arange(N - n_art, N)

        if n_art:
            cost1 = np.zeros(N)
            cost1[art] = 1.0
            status = self._iterate(st, cost1)
            if status != OPTIMAL:
                return LpResult(status, iterations=self.iterations)
            infeas = float(st.x[art].sum())
            if infeas > FEAS_TOL * max(1.0, float(np.abs(prob.rhs).max(initial=0.0))):
                return LpResult(INFEASIBLE, iterations=self.iterations)
            st.hi[art] = 0.0
            nonbasic_art = art[~st.is_basic[art]]
            st.x[nonbasic_art] = 0.0
            st.at_upper[nonbasic_art] = False

        cost2 = np.zeros(N)
        cost2[:n] = prob.objective
        status = self._iterate(st, cost2)
        if status != OPTIMAL:
            return LpResult(status, iterations=self.iterations)

        st.refactor()
        x = np.clip(st.x[:n], prob.lo, prob.hi)
        duals = cost2[st.basis] @ st.binv
        return LpResult(OPTIMAL, x, float(prob.objective @ x), True, duals, self.iterations)

    def _initial_state(self) -> tuple[_State, int]:
        prob = self.prob
        n, m = prob.n, prob.m
        x0 = prob.lo.copy()
        resid = prob.rhs - prob.matrix @ x0

        slack_cols, slack_rows, art_cols = [], [], []
        basis = [None] * m
        slack_val, art_val = [], []
        for i, sense in enumerate(prob.senses):
            r = resid[i]
            if sense == "<=":
                sign = 1.0
            elif sense == ">=":
                sign = -1.0
            else:
                sign = 0.0
            if sign:
                slack_rows.append(i)
                slack_cols.append(sign)
                # slack value needed to close the row: sign * s = r
                s = r / sign
                if s >= 0:
                    basis[i] = ("slack", len(slack_cols) - 1)
                    slack_val.append(s)
                    continue
                slack_val.append(0.0)
            a_sign = 1.0 if r >= 0 else -1.0
            art_cols.append((i, a_sign))
            art_val.append(abs(r))
            basis[i] = ("art", len(art_cols) - 1)

        ns, na = len(slack_cols), len(art_cols)
        N = n + ns + na
        cols = np.zeros((m, N))
        cols[:, :n] = prob.matrix
        for k, (i, sign) in enumerate(zip(slack_rows, slack_cols)):
            cols[i, n + k] = sign
        for k, (i, sign) in enumerate(art_cols):
            cols[i, n + ns + k] = sign
        lo = np.concatenate([prob.lo, np.zeros(ns + na)])
        hi = np.concatenate([prob.hi, np.full(ns, np.inf), np.full(na, np.inf)])
        x = np.concatenate([x0, np.array(slack_val), np.array(art_val)])
        basis_idx = [n + k if kind == "slack" else n + ns + k for kind, k in basis]
        is_basic = np.zeros(N, dtype=bool)
        is_basic[basis_idx] = True
        st = _State(cols, prob.rhs.copy(), lo, hi, x.astype(np.float64), basis_idx,
                    np.zeros(N, dtype=bool), is_basic=is_basic)
        st.refactor()
        return st, na

    def _iterate(self, st: _State, cost: np.ndarray) -> str:
        degenerate_run = 0
        bland = False
        while True:
            if st.pivots_since_refactor >= REFACTOR_EVERY:
                st.refactor()
            y = cost[st.basis] @ st.binv
            d = cost - y @ st.cols
            movable = (~st.is_basic) & (st.hi > st.lo)
            improve_up = movable & ~st.at_upper & (d < -OPT_TOL)
            improve_down = movable & st.at_upper & (d > OPT_TOL)
            cand = np.flatnonzero(improve_up | improve_down)
            if cand.size == 0:
                return OPTIMAL
            if self.iterations >= self.max_iter:
                return ITERATION_LIMIT
            self.iterations += 1
            if not bland and (self.iterations > self.warm_iters or degenerate_run >= 10):
                bland = True
            if bland:
                j = int(cand[0])
            else:
                j = int(cand[np.argmax(np.abs(d[cand]))])

            direction = -1.0 if st.at_upper[j] else 1.0
            alpha = st.binv @ st.cols[:, j]
            delta = -direction * alpha
            xb = st.x[st.basis]
            lo_b = st.lo[st.basis]
            hi_b = st.hi[st.basis]

            steps = np.full(len(st.basis), np.inf)
            dec = delta < -PIVOT_TOL
            inc = delta > PIVOT_TOL
            steps[dec] = (xb[dec] - lo_b[dec]) / -delta[dec]
            inc_fin = inc & np.isfinite(hi_b)
            steps[inc_fin] = (hi_b[inc_fin] - xb[inc_fin]) / delta[inc_fin]
            steps = np.maximum(steps, 0.0)

            t_min = steps.min()
            flip_len = st.hi[j] - st.lo[j]
            if not np.isfinite(t_min) and not np.isfinite(flip_len):
                return UNBOUNDED

            if flip_len <= t_min:
                t = flip_len
                st.x[j] = st.hi[j] if direction > 0 else st.lo[j]
                st.at_upper[j] = direction > 0
                st.x[st.basis] = xb + delta * t
                degenerate_run = 0
                continue

            ties = np.flatnonzero(steps <= t_min + 1e-12)
            basis_arr = np.asarray(st.basis)
            r = int(ties[np.argmin(basis_arr[ties])])
            t = steps[r]
            degenerate_run = degenerate_run + 1 if t <= 1e-12 else 0

            leaving = st.basis[r]
            st.x[st.basis] = xb + delta * t
            st.x[j] = st.x[j] + direction * t
            to_upper = delta[r] > 0
            st.x[leaving] = st.hi[leaving] if to_upper else st.lo[leaving]
            st.at_upper[leaving] = bool(to_upper)
            st.is_basic[leaving] = False
            st.is_basic[j] = True
            st.basis[r] = j

            piv = alpha[r]
            row = st.binv[r] / piv
            st.binv -= np.outer(alpha, row)
            st.binv[r] = row
            st.pivots_since_refactor += 1


def solve_lp(prob: LpProblem, max_iter: int | None = None) -> LpResult:
    """Solve ``prob`` to a vertex optimum (see module docstring)."""
    return SimplexSolver(prob, max_iter=max_iter).solve()

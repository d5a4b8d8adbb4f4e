"""Bounded-variable revised simplex over sparse data.

The solver works on the computational form  [A | I] (x, s) = b  where each
row's logical variable s_r carries the row sense through its bounds
(<=: s in [0, inf), =: s fixed at 0, >=: s in (-inf, 0]). Phase 1 uses the
composite (big-M-free) method: basic variables outside their bounds get a
piecewise-linear cost of +/-1 and the same pivoting machinery drives the
total infeasibility to zero. The basis inverse is maintained as an LU
factorization (SuperLU) plus a product-form eta file, refactorized
periodically. After a stall of degenerate pivots the pricing and ratio test
fall back to Bland's rule.
"""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from griddays.solver.sparse_lp import SolveResult, SolverError, SolverOptions, SparseLp

BASIC, AT_LO, AT_HI, FREE_NB = 0, 1, 2, 3

_PIVOT_TOL = 1e-9


class _Basis:
    """LU-factorized basis with product-form eta updates."""

    def __init__(self, abar: sp.csc_matrix):
        self.abar = abar
        self.m = abar.shape[0]
        self.lu = None
        self.etas: list[tuple[int, np.ndarray]] = []

    def factorize(self, basis: np.ndarray):
        b_mat = self.abar[:, basis].tocsc()
        try:
            self.lu = spla.splu(b_mat)
        except RuntimeError as exc:  # singular basis
            raise SolverError(f"singular basis during refactorization: {exc}") from exc
        self.etas = []

    def ftran(self, v: np.ndarray) -> np.ndarray:
        z = self.lu.solve(v)
        for r, w in self.etas:
            t = z[r] / w[r]
            if t != 0.0:
                z -= w * t
            z[r] = t
        return z

    def btran(self, v: np.ndarray) -> np.ndarray:
        z = v.copy()
        for r, w in reversed(self.etas):
            z[r] = (z[r] - (w @ z - w[r] * z[r])) / w[r]
        return self.lu.solve(z, trans="T")

    def push_eta(self, r: int, w: np.ndarray):
        self.etas.append((r, w.copy()))


def _presolve(lp: SparseLp):
    """Remove empty rows and substitute fixed variables.

    Returns ((reduced lp, info), None) or (None, terminal SolveResult) when
    presolve alone decides the problem.
    """
    lp.validate()
    n, m = lp.n_cols, lp.n_rows
    fixed = lp.lo == lp.hi
    keep_cols = np.where(~fixed)[0]
    a = lp.matrix()
    x_fixed = np.where(fixed, lp.lo, 0.0)
    b_eff = lp.b - a @ x_fixed
    const = float(lp.c @ x_fixed)

    a_red = a[:, keep_cols].tocsr()
    row_nnz = np.diff(a_red.indptr)
    keep_rows = np.where(row_nnz > 0)[0]
    # an empty row is either trivially satisfied or proves infeasibility
    for i in np.where(row_nnz == 0)[0]:
        r, s = b_eff[i], lp.senses[i]
        bad = (s == "L" and r < -1e-9) or (s == "G" and r > 1e-9) or (s == "E" and abs(r) > 1e-9)
        if bad:
            cert = np.zeros(m)
            cert[i] = 1.0
            return None, SolveResult(status="infeasible", certificate=cert)

    coo = a_red[keep_rows].tocoo()
    info = {
        "keep_cols": keep_cols,
        "keep_rows": keep_rows,
        "x_fixed": x_fixed,
        "const": const,
        "n": n,
        "m": m,
    }
    red = SparseLp(
        c=lp.c[keep_cols],
        rows=coo.row.astype(np.int64),
        cols=coo.col.astype(np.int64),
        vals=coo.data.astype(float),
        senses=[lp.senses[i] for i in keep_rows],
        b=b_eff[keep_rows],
        lo=lp.lo[keep_cols],
        hi=lp.hi[keep_cols],
        integrality=lp.integrality[keep_cols],
        col_names=[lp.col_names[j] for j in keep_cols],
        row_names=[lp.row_names[i] for i in keep_rows],
        name=lp.name,
    )
    return (red, info), None


def _postsolve(lp: SparseLp, info, res: SolveResult) -> SolveResult:
    n, m = info["n"], info["m"]
    if res.x is not None:
        x = info["x_fixed"].copy()
        x[info["keep_cols"]] = res.x
        res.x = x
        res.objective = res.objective + info["const"]
        res.bound = res.objective
    if res.duals is not None:
        y = np.zeros(m)
        y[info["keep_rows"]] = res.duals
        res.duals = y
        res.reduced_costs = lp.c - lp.matrix().T @ y
    if res.certificate is not None:
        if res.status == "infeasible" and res.certificate.size == info["keep_rows"].size:
            cert = np.zeros(m)
            cert[info["keep_rows"]] = res.certificate
            res.certificate = cert
        elif res.status == "unbounded":
            ray = np.zeros(n)
            ray[info["keep_cols"]] = res.certificate
            res.certificate = ray
    return res


class _Simplex:
    def __init__(self, lp: SparseLp, opts: SolverOptions):
        self.lp = lp
        self.opts = opts
        self.n = lp.n_cols
        self.m = lp.n_rows
        nm = self.n + self.m
        a = lp.matrix()
        self.abar = sp.hstack([a, sp.eye(self.m, format="csc")], format="csc")
        self.abar_t = self.abar.T.tocsr()
        self.cbar = np.concatenate([lp.c, np.zeros(self.m)])
        lo = np.concatenate([lp.lo, np.zeros(self.m)])
        hi = np.concatenate([lp.hi, np.zeros(self.m)])
        for i, s in enumerate(lp.senses):
            if s == "L":
                lo[self.n + i], hi[self.n + i] = 0.0, np.inf
            elif s == "G":
                lo[self.n + i], hi[self.n + i] = -np.inf, 0.0
        self.lo, self.hi = lo, hi
        self.x = np.zeros(nm)
        self.vstat = np.full(nm, AT_LO, dtype=np.int8)
        self.vstat[(~np.isfinite(lo)) & (~np.isfinite(hi))] = FREE_NB
        self.vstat[(~np.isfinite(lo)) & np.isfinite(hi)] = AT_HI
        self.basis = np.arange(self.n, nm, dtype=np.int64)
        self.factor = _Basis(self.abar)
        self.iterations = 0
        self.bland = False
        self.stall = 0

    def _column(self, j: int) -> np.ndarray:
        v = np.zeros(self.m)
        a = self.abar
        v[a.indices[a.indptr[j] : a.indptr[j + 1]]] = a.data[a.indptr[j] : a.indptr[j + 1]]
        return v

    def _snap_nonbasic(self):
        at_lo = self.vstat == AT_LO
        at_hi = self.vstat == AT_HI
        self.x[at_lo] = np.where(np.isfinite(self.lo[at_lo]), self.lo[at_lo], 0.0)
        self.x[at_hi] = np.where(np.isfinite(self.hi[at_hi]), self.hi[at_hi], 0.0)
        self.x[self.vstat == FREE_NB] = 0.0

    def _refresh_basics(self):
        """Recompute basic values from scratch: x_B = B^-1 (b - N x_N)."""
        xn = np.where(self.vstat == BASIC, 0.0, self.x)
        rhs = self.lp.b - self.abar @ xn
        self.x[self.basis] = self.factor.ftran(rhs)

    def _refactorize(self):
        self.factor.factorize(self.basis)
        self._refresh_basics()

    def _infeasibility(self):
        xb = self.x[self.basis]
        below = np.maximum(self.lo[self.basis] - xb, 0.0)
        above = np.maximum(xb - self.hi[self.basis], 0.0)
        below[~np.isfinite(below)] = 0.0
        above[~np.isfinite(above)] = 0.0
        return below, above

    def _phase1_costs(self, below: np.ndarray, above: np.ndarray):
        c = np.zeros(self.n + self.m)
        tol = self.opts.feas_tol
        c[self.basis[above > tol]] = 1.0
        c[self.basis[below > tol]] = -1.0
        return c

    def _price(self, costs: np.ndarray):
        y = self.factor.btran(costs[self.basis])
        d = costs - self.abar_t @ y
        return y, d

    def _choose_entering(self, d: np.ndarray):
        tol = self.opts.opt_tol
        movable = (self.hi - self.lo) > 0
        down = (self.vstat == AT_LO) & movable & (d < -tol)
        up = (self.vstat == AT_HI) & movable & (d > tol)
        fr = (self.vstat == FREE_NB) & (np.abs(d) > tol)
        cand = np.where(down | up | fr)[0]
        if cand.size == 0:
            return -1, 0
        if self.bland:
            j = int(cand[0])
        else:
            j = int(cand[np.argmax(np.abs(d[cand]))])
        sigma = 1 if d[j] < 0 else -1
        return j, sigma

    def _ratio_test(self, j: int, sigma: int, w: np.ndarray, phase1: bool):
        """Returns (step, blocking basis position or -1 for a bound flip,
        blocking bound value); an infinite step signals unboundedness."""
        tol = self.opts.feas_tol
        own_range = self.hi[j] - self.lo[j]
        rate = -sigma * w
        xb = self.x[self.basis]
        lo_b, hi_b = self.lo[self.basis], self.hi[self.basis]

        decreasing = rate < -_PIVOT_TOL
        increasing = rate > _PIVOT_TOL
        target = np.full(self.m, np.nan)
        if phase1:
            above = xb > hi_b + tol
            below = xb < lo_b - tol
            feas = ~above & ~below
            # infeasible basics block at the bound they are converging to
            target[decreasing & above] = hi_b[decreasing & above]
            target[decreasing & feas] = lo_b[decreasing & feas]
            target[increasing & below] = lo_b[increasing & below]
            target[increasing & feas] = hi_b[increasing & feas]
        else:
            target[decreasing] = lo_b[decreasing]
            target[increasing] = hi_b[increasing]
        with np.errstate(invalid="ignore", divide="ignore"):
            steps = (target - xb) / rate
        steps[~np.isfinite(steps)] = np.inf
        np.maximum(steps, 0.0, out=steps)  # degenerate: already at the bound

        min_step = steps.min() if steps.size else np.inf
        if min_step < own_range:
            if self.bland:
                ties = np.where(steps <= min_step + 1e-12)[0]
                pos = int(ties[np.argmin(self.basis[ties])])
            else:
                ties = np.where(steps <= min_step + 1e-9)[0]
                pos = int(ties[np.argmax(np.abs(w[ties]))])
            return float(steps[pos]), pos, float(target[pos])
        return float(own_range), -1, 0.0

    def _pivot(self, j: int, sigma: int, step: float, pos: int, bound: float, w: np.ndarray):
        self.x[self.basis] -= sigma * step * w
        if pos < 0:
            # bound flip: no basis change
            if sigma > 0:
                self.x[j] = self.hi[j]
                self.vstat[j] = AT_HI
            else:
                self.x[j] = self.lo[j]
                self.vstat[j] = AT_LO
            return
        leaving = self.basis[pos]
        self.x[j] = self.x[j] + sigma * step
        self.x[leaving] = bound  # snap to kill numerical drift
        self.vstat[leaving] = AT_LO if bound == self.lo[leaving] else AT_HI
        self.vstat[j] = BASIC
        self.basis[pos] = j
        self.factor.push_eta(pos, w)
        if len(self.factor.etas) >= self.opts.refactor_every:
            self._refactorize()

    def run(self, start=None) -> SolveResult:
        if start is not None:
            basis, vstat = start
            self.basis = np.asarray(basis, dtype=np.int64).copy()
            self.vstat = np.asarray(vstat, dtype=np.int8).copy()
        self._snap_nonbasic()
        self._refactorize()
        limit = self.opts.lp_iteration_limit(self.m, self.n)

        while True:
            below, above = self._infeasibility()
            infeas = float(below.sum() + above.sum())
            phase1 = infeas > self.opts.feas_tol * (1 + self.m)
            costs = self._phase1_costs(below, above) if phase1 else self.cbar
            y, d = self._price(costs)
            j, sigma = self._choose_entering(d)
            if j < 0:
                if phase1:
                    return SolveResult(
                        status="infeasible", certificate=y, iterations=self.iterations
                    )
                res = self._try_finish()
                if res is not None:
                    return res
                continue
            w = self.factor.ftran(self._column(j))
            step, pos, bound = self._ratio_test(j, sigma, w, phase1)
            if not np.isfinite(step):
                if phase1:
                    raise SolverError("phase-1 unbounded direction: numerical failure")
                ray = np.zeros(self.n)
                if j < self.n:
                    ray[j] = sigma
                struct = self.basis < self.n
                ray[self.basis[struct]] = -sigma * w[struct]
                return SolveResult(
                    status="unbounded", certificate=ray, iterations=self.iterations
                )
            self._pivot(j, sigma, step, pos, bound, w)
            self.iterations += 1
            if step <= 1e-11:
                self.stall += 1
                if self.stall >= self.opts.stall_limit:
                    self.bland = True
            else:
                self.stall = 0
            if self.iterations >= limit:
                return SolveResult(status="iteration-limit", iterations=self.iterations)

    def _try_finish(self) -> SolveResult | None:
        """Refactorize and extract the optimum; None if drift forces resume."""
        self._refactorize()
        below, above = self._infeasibility()
        drift = max(float(below.max(initial=0.0)), float(above.max(initial=0.0)))
        if drift > 10 * self.opts.feas_tol:
            return None
        y = self.factor.btran(self.cbar[self.basis])
        d = self.cbar - self.abar_t @ y
        x = self.x[: self.n].copy()
        obj = float(self.lp.c @ x)
        return SolveResult(
            status="optimal",
            x=x,
            objective=obj,
            bound=obj,
            duals=y,
            reduced_costs=d[: self.n],
            iterations=self.iterations,
        )

    def state(self):
        return self.basis.copy(), self.vstat.copy()


def _solve_box(lp: SparseLp) -> SolveResult:
    """Row-free LP: minimize each variable independently over its box."""
    x = np.zeros(lp.n_cols)
    for j in range(lp.n_cols):
        if lp.c[j] > 0:
            if not np.isfinite(lp.lo[j]):
                ray = np.zeros(lp.n_cols)
                ray[j] = -1.0
                return SolveResult(status="unbounded", certificate=ray)
            x[j] = lp.lo[j]
        elif lp.c[j] < 0:
            if not np.isfinite(lp.hi[j]):
                ray = np.zeros(lp.n_cols)
                ray[j] = 1.0
                return SolveResult(status="unbounded", certificate=ray)
            x[j] = lp.hi[j]
        else:
            x[j] = lp.lo[j] if np.isfinite(lp.lo[j]) else min(lp.hi[j], 0.0)
    obj = float(lp.c @ x)
    return SolveResult(
        status="optimal",
        x=x,
        objective=obj,
        bound=obj,
        duals=np.zeros(0),
        reduced_costs=lp.c.copy(),
    )


def solve_lp(
    lp: SparseLp,
    opts: SolverOptions | None = None,
    presolve: bool = True,
    start=None,
) -> SolveResult:
    """Solve the LP relaxation of ``lp`` (integrality is ignored).

    ``start`` optionally warm-starts from a (basis, vstat) pair produced by a
    previous solve of a problem with identical structure (only bounds and
    objective may differ); warm starting skips presolve.
    """
    opts = opts or SolverOptions()
    if lp.n_rows == 0:
        lp.validate()
        return _solve_box(lp)
    if presolve and start is None:
        reduced, terminal = _presolve(lp)
        if terminal is not None:
            return terminal
        red, info = reduced
        if red.n_cols == 0:
            x = info["x_fixed"]
            return SolveResult(
                status="optimal",
                x=x,
                objective=float(lp.c @ x),
                bound=float(lp.c @ x),
                duals=np.zeros(lp.n_rows),
                reduced_costs=lp.c.copy(),
            )
        res = _solve_box(red) if red.n_rows == 0 else _Simplex(red, opts).run()
        return _postsolve(lp, info, res)
    lp.validate()
    engine = _Simplex(lp, opts)
    res = engine.run(start=start)
    res.basis_state = engine.state()  # type: ignore[attr-defined]
    return res

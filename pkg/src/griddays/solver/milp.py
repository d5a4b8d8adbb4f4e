"""Branch-and-bound MILP solver on top of the bounded revised simplex.

Best-bound node selection, most-fractional branching (ties broken toward
the lowest variable index), warm starts from the parent node's basis. The
search stops when the relative incumbent/bound gap reaches ``opts.gap`` or
a node/time limit fires.
"""

from __future__ import annotations

import heapq
import itertools
import time

import numpy as np

from griddays.solver.simplex import solve_lp
from griddays.solver.sparse_lp import SolveResult, SolverError, SolverOptions, SparseLp


def _fractional(x: np.ndarray, int_idx: np.ndarray, tol: float) -> np.ndarray:
    frac = x[int_idx] - np.floor(x[int_idx])
    return int_idx[(frac > tol) & (frac < 1 - tol)]


def _branch_var(x: np.ndarray, viol: np.ndarray) -> int:
    frac = x[viol] - np.floor(x[viol])
    score = np.abs(frac - 0.5)
    best = score.min()
    ties = viol[score <= best + 1e-12]
    return int(ties.min())


def solve_milp(lp: SparseLp, opts: SolverOptions | None = None) -> SolveResult:
    """Solve ``lp`` respecting its integrality mask."""
    opts = opts or SolverOptions()
    lp.validate()
    int_idx = np.where(lp.integrality)[0]
    if int_idx.size == 0:
        return solve_lp(lp, opts)

    t0 = time.monotonic()
    root = solve_lp(lp, opts, presolve=False)
    if root.status in ("infeasible", "unbounded"):
        return root
    if root.status != "optimal":
        raise SolverError(f"root LP terminated with status {root.status}")

    incumbent: SolveResult | None = None
    nodes_done = 1
    counter = itertools.count()
    heap: list = []

    def push(bound, lo, hi, state):
        heapq.heappush(heap, (bound, next(counter), lo, hi, state))

    def timed_out():
        return opts.time_limit_s > 0 and time.monotonic() - t0 > opts.time_limit_s

    def accept(res: SolveResult):
        nonlocal incumbent
        x = res.x.copy()
        x[int_idx] = np.round(x[int_idx])
        res.x = x
        res.objective = float(lp.c @ x)
        if incumbent is None or res.objective < incumbent.objective:
            incumbent = res

    viol = _fractional(root.x, int_idx, opts.int_tol)
    if viol.size == 0:
        accept(root)
        incumbent.bound = root.objective
        incumbent.nodes = 1
        return incumbent
    push(root.objective, lp.lo.copy(), lp.hi.copy(), getattr(root, "basis_state", None))

    status = "optimal"
    final_bound = np.inf
    while heap:
        bound, _, lo, hi, state = heapq.heappop(heap)
        if incumbent is not None:
            gap_ok = incumbent.objective - bound <= opts.gap * max(1.0, abs(incumbent.objective))
            if gap_ok:
                final_bound = bound
                heap.clear()
                break
        if nodes_done >= opts.node_limit or timed_out():
            status = "gap-limit"
            break

        node_lp = SparseLp(
            c=lp.c,
            rows=lp.rows,
            cols=lp.cols,
            vals=lp.vals,
            senses=lp.senses,
            b=lp.b,
            lo=lo,
            hi=hi,
            integrality=lp.integrality,
            col_names=lp.col_names,
            row_names=lp.row_names,
            name=lp.name,
        )
        res = solve_lp(node_lp, opts, presolve=False, start=state)
        nodes_done += 1
        if res.status == "infeasible":
            continue
        if res.status != "optimal":
            raise SolverError(f"node LP terminated with status {res.status}")
        node_bound = max(bound, res.objective)
        if incumbent is not None and node_bound >= incumbent.objective - opts.gap * max(
            1.0, abs(incumbent.objective)
        ):
            continue
        viol = _fractional(res.x, int_idx, opts.int_tol)
        if viol.size == 0:
            accept(res)
            continue
        j = _branch_var(res.x, viol)
        state = getattr(res, "basis_state", None)
        lo_up = lo.copy()
        lo_up[j] = np.ceil(res.x[j] - opts.int_tol)
        hi_dn = hi.copy()
        hi_dn[j] = np.floor(res.x[j] + opts.int_tol)
        if hi_dn[j] >= lo[j]:
            push(node_bound, lo.copy(), hi_dn, state)
        if not np.isfinite(hi[j]) or lo_up[j] <= hi[j]:
            push(node_bound, lo_up, hi.copy(), state)

    best_open = min((entry[0] for entry in heap), default=np.inf)
    best_open = min(best_open, final_bound)
    if incumbent is None:
        if status == "gap-limit":
            return SolveResult(status="gap-limit", bound=best_open, nodes=nodes_done)
        return SolveResult(status="infeasible", nodes=nodes_done)
    incumbent.nodes = nodes_done
    incumbent.bound = float(min(best_open, incumbent.objective))
    incumbent.status = status
    return incumbent

"""Bundled sparse LP/MILP solver with MPS import/export."""

from griddays.solver.sparse_lp import (
    SparseLp,
    SolveResult,
    SolverError,
    SolverOptions,
    verify_kkt,
)
from griddays.solver.simplex import solve_lp
from griddays.solver.milp import solve_milp
from griddays.solver.mps import write_mps, read_mps

__all__ = [
    "SparseLp",
    "SolveResult",
    "SolverError",
    "SolverOptions",
    "solve_lp",
    "solve_milp",
    "write_mps",
    "read_mps",
    "verify_kkt",
]

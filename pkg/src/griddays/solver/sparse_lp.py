"""Sparse LP/MILP container, solver options, results, and the KKT check."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

SENSES = ("L", "E", "G")  # <=, =, >=


class SolverError(RuntimeError):
    """Raised on malformed problems or numerical failure."""


@dataclass
class SparseLp:
    """Minimization problem  min c'x  s.t.  Ax {<=,=,>=} b,  lo <= x <= hi.

    The constraint matrix is held as coordinate triplets with no duplicate
    (row, col) entries; ``integrality`` marks integer-constrained variables
    (ignored by the pure LP solver).
    """

    c: np.ndarray
    rows: np.ndarray
    cols: np.ndarray
    vals: np.ndarray
    senses: list[str]
    b: np.ndarray
    lo: np.ndarray
    hi: np.ndarray
    integrality: np.ndarray
    col_names: list[str] = field(default_factory=list)
    row_names: list[str] = field(default_factory=list)
    name: str = "LP"

    def __post_init__(self):
        self.c = np.asarray(self.c, dtype=float)
        self.rows = np.asarray(self.rows, dtype=np.int64)
        self.cols = np.asarray(self.cols, dtype=np.int64)
        self.vals = np.asarray(self.vals, dtype=float)
        self.b = np.asarray(self.b, dtype=float)
        self.lo = np.asarray(self.lo, dtype=float)
        self.hi = np.asarray(self.hi, dtype=float)
        self.integrality = np.asarray(self.integrality, dtype=bool)
        if not self.col_names:
            self.col_names = [f"x{j}" for j in range(self.n_cols)]
        if not self.row_names:
            self.row_names = [f"r{i}" for i in range(self.n_rows)]

    @property
    def n_cols(self) -> int:
        return self.c.size

    @property
    def n_rows(self) -> int:
        return self.b.size

    def validate(self):
        n, m = self.n_cols, self.n_rows
        if not (self.lo.size == self.hi.size == self.integrality.size == n):
            raise SolverError("bound/integrality arrays must match column count")
        if len(self.senses) != m:
            raise SolverError("sense list must match row count")
        if any(s not in SENSES for s in self.senses):
            raise SolverError(f"row senses must be one of {SENSES}")
        if len(self.col_names) != n or len(self.row_names) != m:
            raise SolverError("name maps must match problem dimensions")
        if self.rows.size != self.cols.size or self.rows.size != self.vals.size:
            raise SolverError("triplet arrays must have equal length")
        if self.rows.size:
            if self.rows.min() < 0 or self.rows.max() >= m:
                raise SolverError("triplet row index out of range")
            if self.cols.min() < 0 or self.cols.max() >= n:
                raise SolverError("triplet column index out of range")
            keys = self.rows * n + self.cols
            if np.unique(keys).size != keys.size:
                raise SolverError("duplicate (row, col) triplet")
        if np.any(self.lo > self.hi):
            raise SolverError("lower bound exceeds upper bound")
        if not np.all(np.isfinite(self.vals)):
            raise SolverError("non-finite constraint coefficient")
        if not np.all(np.isfinite(self.c)):
            raise SolverError("non-finite objective coefficient")

    def matrix(self) -> sp.csc_matrix:
        return sp.csc_matrix(
            (self.vals, (self.rows, self.cols)), shape=(self.n_rows, self.n_cols)
        )

    def canonical_triplets(self) -> list[tuple[int, int, float]]:
        """Triplets sorted by (col, row); the order used by the MPS writer."""
        order = np.lexsort((self.rows, self.cols))
        return [
            (int(self.rows[k]), int(self.cols[k]), float(self.vals[k]))
            for k in order
        ]


class LpBuilder:
    """Incremental construction of a SparseLp with named rows and columns."""

    def __init__(self, name: str = "LP"):
        self.name = name
        self._c: list[float] = []
        self._lo: list[float] = []
        self._hi: list[float] = []
        self._int: list[bool] = []
        self._col_names: list[str] = []
        self._col_index: dict[str, int] = {}
        self._rows: list[int] = []
        self._cols: list[int] = []
        self._vals: list[float] = []
        self._senses: list[str] = []
        self._b: list[float] = []
        self._row_names: list[str] = []
        self._row_index: dict[str, int] = {}

    def add_col(
        self,
        name: str,
        cost: float = 0.0,
        lo: float = 0.0,
        hi: float = np.inf,
        integer: bool = False,
    ) -> int:
        if name in self._col_index:
            raise SolverError(f"duplicate column name {name!r}")
        j = len(self._c)
        self._col_index[name] = j
        self._col_names.append(name)
        self._c.append(float(cost))
        self._lo.append(float(lo))
        self._hi.append(float(hi))
        self._int.append(bool(integer))
        return j

    def add_row(self, name: str, coeffs: dict[int, float], sense: str, rhs: float) -> int:
        if name in self._row_index:
            raise SolverError(f"duplicate row name {name!r}")
        if sense not in SENSES:
            raise SolverError(f"bad sense {sense!r}")
        i = len(self._b)
        self._row_index[name] = i
        self._row_names.append(name)
        self._senses.append(sense)
        self._b.append(float(rhs))
        for j, v in coeffs.items():
            if v != 0.0:
                self._rows.append(i)
                self._cols.append(j)
                self._vals.append(float(v))
        return i

    def col_id(self, name: str) -> int:
        return self._col_index[name]

    def set_bounds(self, j: int, lo: float, hi: float):
        self._lo[j] = float(lo)
        self._hi[j] = float(hi)

    def tighten_bounds(self, j: int, lo: float = -np.inf, hi: float = np.inf):
        self._lo[j] = max(self._lo[j], float(lo))
        self._hi[j] = min(self._hi[j], float(hi))

    def build(self) -> SparseLp:
        lp = SparseLp(
            c=np.array(self._c, dtype=float),
            rows=np.array(self._rows, dtype=np.int64),
            cols=np.array(self._cols, dtype=np.int64),
            vals=np.array(self._vals, dtype=float),
            senses=list(self._senses),
            b=np.array(self._b, dtype=float),
            lo=np.array(self._lo, dtype=float),
            hi=np.array(self._hi, dtype=float),
            integrality=np.array(self._int, dtype=bool),
            col_names=list(self._col_names),
            row_names=list(self._row_names),
            name=self.name,
        )
        lp.validate()
        return lp


@dataclass
class SolverOptions:
    """Tolerances and limits shared by the LP and MILP solvers."""

    feas_tol: float = 1e-7
    opt_tol: float = 1e-7
    int_tol: float = 1e-6
    gap: float = 1e-6
    refactor_every: int = 100
    stall_limit: int = 200
    iteration_limit: int = 0  # 0: derive from problem size
    node_limit: int = 100_000
    time_limit_s: float = 0.0  # 0: no limit
    seed: int = 0

    def lp_iteration_limit(self, m: int, n: int) -> int:
        if self.iteration_limit > 0:
            return self.iteration_limit
        return 50 * (m + n) + 10_000


@dataclass
class SolveResult:
    status: str  # optimal | infeasible | unbounded | gap-limit | iteration-limit
    x: np.ndarray | None = None
    objective: float = np.nan
    bound: float = np.nan
    duals: np.ndarray | None = None
    reduced_costs: np.ndarray | None = None
    iterations: int = 0
    nodes: int = 0
    # infeasible: row multipliers of a Farkas-style certificate;
    # unbounded: improving primal ray
    certificate: np.ndarray | None = None

    def value(self, lp: SparseLp, name: str) -> float:
        return float(self.x[lp.col_names.index(name)])


def verify_kkt(lp: SparseLp, result: SolveResult, tol: float = 1e-6) -> dict[str, float]:
    """Independent optimality check from problem data and (x, y) only.

    Recomputes reduced costs as z = c - A'y and checks primal feasibility,
    dual feasibility (sign conditions by row sense and bound status),
    complementary slackness and the primal-dual objective gap. Returns the
    violation magnitudes; raises SolverError if any exceeds ``tol``.
    """
    if result.status != "optimal":
        raise SolverError(f"KKT check requires an optimal result, got {result.status}")
    x, y = result.x, result.duals
    a = lp.matrix()
    ax = a @ x
    primal = 0.0
    for i, s in enumerate(lp.senses):
        r = ax[i] - lp.b[i]
        if s == "L":
            primal = max(primal, r)
        elif s == "G":
            primal = max(primal, -r)
        else:
            primal = max(primal, abs(r))
    primal = max(primal, float(np.max(np.maximum(lp.lo - x, 0.0), initial=0.0)))
    primal = max(primal, float(np.max(np.maximum(x - lp.hi, 0.0), initial=0.0)))

    z = lp.c - a.T @ y
    scale = 1.0 + float(np.max(np.abs(lp.c), initial=0.0))
    dual = 0.0
    comp = 0.0
    for i, s in enumerate(lp.senses):
        if s == "L":
            dual = max(dual, y[i])  # y <= 0 for <= rows (min problem)
        elif s == "G":
            dual = max(dual, -y[i])
        comp = max(comp, abs(y[i] * (ax[i] - lp.b[i])))
    for j in range(lp.n_cols):
        at_lo = np.isfinite(lp.lo[j]) and x[j] - lp.lo[j] <= tol * (1 + abs(lp.lo[j]))
        at_hi = np.isfinite(lp.hi[j]) and lp.hi[j] - x[j] <= tol * (1 + abs(lp.hi[j]))
        if at_lo and at_hi:
            continue  # fixed variable: any sign admissible
        if at_lo:
            dual = max(dual, -z[j])
        elif at_hi:
            dual = max(dual, z[j])
        else:
            dual = max(dual, abs(z[j]))

    # strong duality with bound terms
    dual_obj = float(y @ lp.b)
    zp = np.maximum(z, 0.0)
    zm = np.minimum(z, 0.0)
    finite_lo = np.where(np.isfinite(lp.lo), lp.lo, 0.0)
    finite_hi = np.where(np.isfinite(lp.hi), lp.hi, 0.0)
    dual_obj += float(zp @ finite_lo + zm @ finite_hi)
    primal_obj = float(lp.c @ x)
    gap = abs(primal_obj - dual_obj)
    gap_ok = gap <= max(tol, 1e-8 * max(1.0, abs(primal_obj)))

    report = {
        "primal": float(primal),
        "dual": float(dual) / scale,
        "complementarity": float(comp),
        "duality_gap": float(gap),
    }
    if primal > tol or report["dual"] > tol or not gap_ok:
        raise SolverError(f"KKT check failed: {report}")
    return report

"""MPS export/import for SparseLp problems.

The writer emits a fixed-layout file (one entry per data line, columns wide
enough for long names and full-precision numbers) with deterministic column
and row order, so writing the same problem twice is byte-identical and a
write/read round trip reproduces the exact triplets, senses and bounds.
Values are printed with ``repr`` so they survive the round trip bit-exactly.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from griddays.solver.sparse_lp import SolverError, SparseLp

_OBJ = "OBJ"
_SENSE_TO_TAG = {"L": "L", "E": "E", "G": "G"}


class MpsError(SolverError):
    """Malformed MPS content; carries the offending line number."""

    def __init__(self, message: str, line_no: int | None = None):
        self.line_no = line_no
        if line_no is not None:
            message = f"line {line_no}: {message}"
        super().__init__(message)


def _check_name(name: str):
    if not name or any(ch.isspace() for ch in name):
        raise SolverError(f"MPS names must be nonempty and space-free: {name!r}")


def write_mps(lp: SparseLp, path: str | Path):
    """Write ``lp`` in MPS format; deterministic given identical input."""
    lp.validate()
    for name in lp.col_names + lp.row_names + [lp.name]:
        _check_name(name)
    w_name = max(8, max((len(n) for n in lp.col_names + lp.row_names), default=8))
    lines = [f"NAME          {lp.name}"]

    lines.append("ROWS")
    lines.append(f" N  {_OBJ}")
    for i, sense in enumerate(lp.senses):
        lines.append(f" {_SENSE_TO_TAG[sense]}  {lp.row_names[i]}")

    # triplets grouped per column, rows in index order
    by_col: list[list[tuple[int, float]]] = [[] for _ in range(lp.n_cols)]
    for r, c, v in lp.canonical_triplets():
        by_col[c].append((r, v))

    lines.append("COLUMNS")
    in_int = False
    marker = 0
    for j in range(lp.n_cols):
        want_int = bool(lp.integrality[j])
        if want_int != in_int:
            tag = "INTORG" if want_int else "INTEND"
            lines.append(f"    MKR{marker:<{w_name - 3}} 'MARKER'{'':17s}'{tag}'")
            marker += 1
            in_int = want_int
        col = lp.col_names[j]
        if lp.c[j] != 0.0 or not by_col[j]:
            # entry-less columns get a zero objective record so they keep
            # their position in the column order
            lines.append(f"    {col:<{w_name}} {_OBJ:<{w_name}} {lp.c[j]!r}")
        for r, v in by_col[j]:
            lines.append(f"    {col:<{w_name}} {lp.row_names[r]:<{w_name}} {v!r}")
    if in_int:
        lines.append(f"    MKR{marker:<{w_name - 3}} 'MARKER'{'':17s}'INTEND'")

    lines.append("RHS")
    for i in range(lp.n_rows):
        if lp.b[i] != 0.0:
            lines.append(f"    RHS{'':<{w_name - 3}} {lp.row_names[i]:<{w_name}} {lp.b[i]!r}")

    lines.append("RANGES")

    lines.append("BOUNDS")

    def bnd(tag: str, j: int, value: float | None = None):
        base = f" {tag} BND{'':<{w_name - 3}} {lp.col_names[j]:<{w_name}}"
        if value is not None:
            base += f" {value!r}"
        lines.append(base)

    for j in range(lp.n_cols):
        lo, hi = lp.lo[j], lp.hi[j]
        if lo == hi:
            bnd("FX", j, lo)
        elif not np.isfinite(lo) and not np.isfinite(hi):
            bnd("FR", j)
        else:
            if not np.isfinite(lo):
                bnd("MI", j)
            elif lo != 0.0 or lp.integrality[j]:
                bnd("LO", j, lo)
            if np.isfinite(hi):
                bnd("UP", j, hi)
            elif lp.integrality[j]:
                bnd("PL", j)

    lines.append("ENDATA")
    Path(path).write_text("\n".join(lines) + "\n")


_SECTIONS = {"NAME", "ROWS", "COLUMNS", "RHS", "RANGES", "BOUNDS", "ENDATA", "OBJSENSE"}


def read_mps(path: str | Path) -> SparseLp:
    """Parse an MPS file; inverse of :func:`write_mps` on its own output."""
    name = "LP"
    row_names: list[str] = []
    row_index: dict[str, int] = {}
    senses: list[str] = []
    obj_row: str | None = None
    col_names: list[str] = []
    col_index: dict[str, int] = {}
    integrality: list[bool] = []
    costs: dict[int, float] = {}
    triplets: dict[tuple[int, int], float] = {}
    rhs: dict[int, float] = {}
    bounds: dict[int, list[float]] = {}

    def col_id(token: str, line_no: int, create: bool, integer: bool = False) -> int:
        if token not in col_index:
            if not create:
                raise MpsError(f"unknown column {token!r}", line_no)
            col_index[token] = len(col_names)
            col_names.append(token)
            integrality.append(integer)
        return col_index[token]

    section = None
    in_int = False
    with open(path) as fh:
        for line_no, raw in enumerate(fh, start=1):
            line = raw.rstrip("\n")
            if not line.strip() or line.lstrip().startswith("*"):
                continue
            if line[0] not in (" ", "\t"):
                parts = line.split()
                keyword = parts[0]
                if keyword not in _SECTIONS:
                    raise MpsError(f"unknown section {keyword!r}", line_no)
                section = keyword
                if keyword == "NAME" and len(parts) > 1:
                    name = parts[1]
                if keyword == "ENDATA":
                    break
                continue
            fields = line.split()
            if section == "ROWS":
                if len(fields) != 2:
                    raise MpsError("ROWS entries need a sense and a name", line_no)
                tag, rname = fields[0].upper(), fields[1]
                if tag == "N":
                    if obj_row is None:
                        obj_row = rname
                    continue
                if tag not in ("L", "E", "G"):
                    raise MpsError(f"unknown row sense {tag!r}", line_no)
                if rname in row_index:
                    raise MpsError(f"duplicate row {rname!r}", line_no)
                row_index[rname] = len(row_names)
                row_names.append(rname)
                senses.append(tag)
            elif section == "COLUMNS":
                if len(fields) >= 3 and fields[1] == "'MARKER'":
                    tag = fields[-1].strip("'")
                    if tag == "INTORG":
                        in_int = True
                    elif tag == "INTEND":
                        in_int = False
                    else:
                        raise MpsError(f"unknown marker {tag!r}", line_no)
                    continue
                if len(fields) not in (3, 5):
                    raise MpsError("COLUMNS entries need name/row/value groups", line_no)
                j = col_id(fields[0], line_no, create=True, integer=in_int)
                for k in range(1, len(fields), 2):
                    rname, value = fields[k], float(fields[k + 1])
                    if rname == obj_row:
                        if j in costs:
                            raise MpsError(f"duplicate objective entry for {fields[0]!r}", line_no)
                        costs[j] = value
                        continue
                    if rname not in row_index:
                        raise MpsError(f"unknown row {rname!r}", line_no)
                    key = (row_index[rname], j)
                    if key in triplets:
                        raise MpsError(f"duplicate entry for {fields[0]!r}/{rname!r}", line_no)
                    triplets[key] = value
            elif section == "RHS":
                if len(fields) not in (3, 5):
                    raise MpsError("RHS entries need set/row/value groups", line_no)
                for k in range(1, len(fields), 2):
                    rname, value = fields[k], float(fields[k + 1])
                    if rname == obj_row:
                        raise MpsError("objective-row RHS (constant terms) unsupported", line_no)
                    if rname not in row_index:
                        raise MpsError(f"unknown row {rname!r}", line_no)
                    rhs[row_index[rname]] = value
            elif section == "RANGES":
                raise MpsError("RANGES entries are not supported", line_no)
            elif section == "BOUNDS":
                if len(fields) < 3:
                    raise MpsError("BOUNDS entries need type/set/column", line_no)
                tag = fields[0].upper()
                j = col_id(fields[2], line_no, create=True)
                if j not in bounds:
                    bounds[j] = [0.0, np.inf, False]  # lo, hi, lo-was-explicit
                if tag in ("UP", "LO", "FX", "UI", "LI"):
                    if len(fields) < 4:
                        raise MpsError(f"{tag} bound needs a value", line_no)
                    value = float(fields[3])
                    if tag in ("UP", "UI"):
                        bounds[j][1] = value
                        if value < 0 and not bounds[j][2]:
                            bounds[j][0] = -np.inf  # classic negative-UP convention
                    elif tag in ("LO", "LI"):
                        bounds[j][0] = value
                        bounds[j][2] = True
                    else:
                        bounds[j] = [value, value, True]
                    if tag in ("UI", "LI"):
                        integrality[j] = True
                elif tag == "FR":
                    bounds[j] = [-np.inf, np.inf, True]
                elif tag == "MI":
                    bounds[j][0] = -np.inf
                    bounds[j][2] = True
                elif tag == "PL":
                    bounds[j][1] = np.inf
                elif tag == "BV":
                    bounds[j] = [0.0, 1.0, True]
                    integrality[j] = True
                else:
                    raise MpsError(f"unknown bound type {tag!r}", line_no)
            elif section in ("NAME", "OBJSENSE"):
                continue
            else:
                raise MpsError("data line outside any section", line_no)

    n, m = len(col_names), len(row_names)
    c = np.zeros(n)
    for j, v in costs.items():
        c[j] = v
    b = np.zeros(m)
    for i, v in rhs.items():
        b[i] = v
    lo = np.zeros(n)
    hi = np.full(n, np.inf)
    for j, (l, h, _explicit) in bounds.items():
        lo[j], hi[j] = l, h
    keys = sorted(triplets)
    lp = SparseLp(
        c=c,
        rows=np.array([k[0] for k in keys], dtype=np.int64),
        cols=np.array([k[1] for k in keys], dtype=np.int64),
        vals=np.array([triplets[k] for k in keys], dtype=float),
        senses=senses,
        b=b,
        lo=lo,
        hi=hi,
        integrality=np.array(integrality, dtype=bool),
        col_names=col_names,
        row_names=row_names,
        name=name,
    )
    lp.validate()
    return lp

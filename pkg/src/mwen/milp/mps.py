"""Free-format MPS writer and reader.

The writer emits NAME, ROWS, COLUMNS (binary columns bracketed by
``MARKER``/``INTORG``..``INTEND`` lines), RHS, BOUNDS and ENDATA. Every column
gets an explicit bound line whenever its bounds differ from the MPS default
``[0, +inf)``, and binaries always get both ``LO`` and ``UP`` so readers that
default integer upper bounds differently agree. Numbers are written with
``repr`` so values survive a round trip bit for bit.

Row and column names must be single whitespace-free tokens not starting with
``$`` or ``*``; :func:`sanitize_names` maps anything else to a legal token and
returns the map so it can be stored next to the file.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field

from .problem import BINARY, CONTINUOUS, MilpProblem, Variable

OBJECTIVE_ROW = "OBJ"
_SENSE_CODE = {"<=": "L", "=": "E", ">=": "G"}
_CODE_SENSE = {v: k for k, v in _SENSE_CODE.items()}
_ILLEGAL = re.compile(r"[^\x21-\x7e]")
_SECTIONS = ("NAME", "ROWS", "COLUMNS", "RHS", "RANGES", "BOUNDS", "ENDATA")


class MpsError(ValueError):
    pass


@dataclass
class NameMap:
    """Sanitized token -> original name, for names that had to change."""

    columns: dict[str, str] = field(default_factory=dict)
    rows: dict[str, str] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"columns": dict(self.columns), "rows": dict(self.rows)}


def _legal(name: str) -> str:
    token = _ILLEGAL.sub("_", name) or "_"
    if token[0] in "$*":
        token = "_" + token
    return token


def sanitize_names(problem: MilpProblem) -> tuple[list[str], list[str], NameMap]:
    """Return legal column names, legal row names and the map of changed names."""
    mapping = NameMap()

    def assign(names, reserved, out_map):
        used = set(reserved)
        tokens = []
        for name in names:
            token = _legal(name)
            base, k = token, 1
            while token in used:
                token = f"{base}~{k}"
                k += 1
            used.add(token)
            tokens.append(token)
            if token != name:
                out_map[token] = name
        return tokens

    cols = assign([v.name for v in problem.variables], (), mapping.columns)
    rows = assign([r.name for r in problem.constraints], (OBJECTIVE_ROW,), mapping.rows)
    return cols, rows, mapping


def _num(x: float) -> str:
    return repr(float(x))


def export_mps(problem: MilpProblem) -> str:
    """Serialize ``problem`` as free-format MPS text."""
    problem.validate()
    cols, rows, _ = sanitize_names(problem)
    lines = [f"NAME {_legal(problem.name)}", "ROWS", f" N {OBJECTIVE_ROW}"]
    for token, row in zip(rows, problem.constraints):
        lines.append(f" {_SENSE_CODE[row.sense]} {token}")

    by_col: list[list[tuple[str, float]]] = [[] for _ in problem.variables]
    for j, a in problem.objective:
        by_col[j].append((OBJECTIVE_ROW, a))
    for token, row in zip(rows, problem.constraints):
        for j, a in row.coeffs:
            by_col[j].append((token, a))

    lines.append("COLUMNS")
    in_marker = False
    marker_id = 0
    for j, v in enumerate(problem.variables):
        if v.is_binary and not in_marker:
            lines.append(f"    MARKER{marker_id} 'MARKER' 'INTORG'")
            in_marker = True
        elif not v.is_binary and in_marker:
            lines.append(f"    MARKER{marker_id} 'MARKER' 'INTEND'")
            marker_id += 1
            in_marker = False
        entries = by_col[j] or [(OBJECTIVE_ROW, 0.0)]
        for rname, a in entries:
            lines.append(f"    {cols[j]} {rname} {_num(a)}")
    if in_marker:
        lines.append(f"    MARKER{marker_id} 'MARKER' 'INTEND'")

    lines.append("RHS")
    if problem.objective_constant != 0.0:
        lines.append(f"    RHS {OBJECTIVE_ROW} {_num(-problem.objective_constant)}")
    for token, row in zip(rows, problem.constraints):
        if row.rhs != 0.0:
            lines.append(f"    RHS {token} {_num(row.rhs)}")

    lines.append("BOUNDS")
    for token, v in zip(cols, problem.variables):
        lines.extend(_bound_lines(token, v))
    lines.append("ENDATA")
    return "\n".join(lines) + "\n"


def _bound_lines(token: str, v: Variable) -> list[str]:
    lo, up = v.lower, v.upper
    if v.is_binary:
        return [f" LO BND {token} {_num(lo)}", f" UP BND {token} {_num(up)}"]
    if lo == up:
        return [f" FX BND {token} {_num(lo)}"]
    if lo == -math.inf and up == math.inf:
        return [f" FR BND {token}"]
    out = []
    if lo == -math.inf:
        out.append(f" MI BND {token}")
    elif lo != 0.0:
        out.append(f" LO BND {token} {_num(lo)}")
    if up != math.inf:
        out.append(f" UP BND {token} {_num(up)}")
    return out


def parse_mps(text: str, name_map: NameMap | dict | None = None) -> MilpProblem:
    """Parse free-format MPS text into a :class:`MilpProblem`.

    Missing RHS entries are zero. Integer columns (inside markers, or ``BV``)
    must be binary; a marker column with no upper bound gets upper bound 1.
    Ranged rows are split into a ``>=`` row and a companion ``<=`` row named
    ``<row>~range``. ``name_map`` (as returned by :func:`sanitize_names`)
    restores original names.
    """
    if isinstance(name_map, dict):
        name_map = NameMap(name_map.get("columns", {}), name_map.get("rows", {}))
    col_names = name_map.columns if name_map else {}
    row_names = name_map.rows if name_map else {}

    name = "problem"
    section = None
    order_seen: list[str] = []
    obj_row = None
    row_sense: dict[str, str] = {}
    row_order: list[str] = []
    free_rows: set[str] = set()
    coeffs: dict[str, list[tuple[int, float]]] = {}
    obj: list[tuple[int, float]] = []
    rhs: dict[str, float] = {}
    ranges: dict[str, float] = {}
    columns: dict[str, int] = {}
    col_list: list[str] = []
    integer: list[bool] = []
    lower: list[float] = []
    upper: list[float | None] = []
    obj_constant = 0.0
    in_marker = False

    def number(tok, lineno):
        try:
            return float(tok)
        except ValueError:
            raise MpsError(f"line {lineno}: bad number {tok!r}") from None

    def row_ref(rname, lineno):
        if rname != obj_row and rname not in row_sense and rname not in free_rows:
            raise MpsError(f"line {lineno}: reference to undeclared row {rname!r}")

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("*"):
            continue
        parts = line.split()
        head = parts[0].upper()
        if not raw[0].isspace() and head in _SECTIONS:
            if order_seen and _SECTIONS.index(head) < _SECTIONS.index(order_seen[-1]):
                raise MpsError(f"line {lineno}: section {head} out of order")
            if head in ("COLUMNS",) and "ROWS" not in order_seen:
                raise MpsError(f"line {lineno}: COLUMNS before ROWS")
            if head in ("RHS", "RANGES", "BOUNDS") and "COLUMNS" not in order_seen:
                raise MpsError(f"line {lineno}: {head} before COLUMNS")
            order_seen.append(head)
            section = head
            if head == "NAME" and len(parts) > 1:
                name = parts[1]
            if head == "ENDATA":
                break
            continue
        if section == "ROWS":
            code, rname = parts[0].upper(), parts[1]
            if code == "N":
                if obj_row is None:
                    obj_row = rname
                else:
                    free_rows.add(rname)
            elif code in _CODE_SENSE:
                if rname in row_sense:
                    raise MpsError(f"line {lineno}: duplicate row {rname!r}")
                row_sense[rname] = _CODE_SENSE[code]
                row_order.append(rname)
                coeffs[rname] = []
            else:
                raise MpsError(f"line {lineno}: unknown row type {code!r}")
        elif section == "COLUMNS":
            if len(parts) >= 3 and parts[1].strip("'\"").upper() == "MARKER":
                tag = parts[2].strip("'\"").upper()
                if tag == "INTORG":
                    in_marker = True
                elif tag == "INTEND":
                    in_marker = False
                else:
                    raise MpsError(f"line {lineno}: unknown marker {tag!r}")
                continue
            cname = parts[0]
            if cname not in columns:
                columns[cname] = len(col_list)
                col_list.append(cname)
                integer.append(in_marker)
                lower.append(0.0)
                upper.append(None)
            j = columns[cname]
            if len(parts) not in (3, 5):
                raise MpsError(f"line {lineno}: malformed COLUMNS entry")
            for k in range(1, len(parts), 2):
                rname, val = parts[k], number(parts[k + 1], lineno)
                row_ref(rname, lineno)
                if rname == obj_row:
                    obj.append((j, val))
                elif rname in row_sense:
                    coeffs[rname].append((j, val))
        elif section in ("RHS", "RANGES"):
            body = parts[1:] if len(parts) % 2 == 1 else parts
            for k in range(0, len(body), 2):
                rname, val = body[k], number(body[k + 1], lineno)
                row_ref(rname, lineno)
                if section == "RHS":
                    if rname == obj_row:
                        obj_constant = -val
                    elif rname in row_sense:
                        rhs[rname] = val
                elif rname in row_sense:
                    ranges[rname] = val
        elif section == "BOUNDS":
            code = parts[0].upper()
            if len(parts) < 3:
                raise MpsError(f"line {lineno}: malformed BOUNDS entry")
            cname = parts[2]
            if cname not in columns:
                raise MpsError(f"line {lineno}: bound on unknown column {cname!r}")
            j = columns[cname]
            val = number(parts[3], lineno) if len(parts) > 3 else None
            if code in ("LO", "UP", "FX", "LI", "UI") and val is None:
                raise MpsError(f"line {lineno}: bound {code} needs a value")
            if code in ("LO", "LI"):
                lower[j] = val
            elif code in ("UP", "UI"):
                upper[j] = val
            elif code == "FX":
                lower[j] = upper[j] = val
            elif code == "FR":
                lower[j], upper[j] = -math.inf, math.inf
            elif code == "MI":
                lower[j] = -math.inf
            elif code == "PL":
                upper[j] = math.inf
            elif code == "BV":
                lower[j], upper[j] = 0.0, 1.0
                integer[j] = True
            else:
                raise MpsError(f"line {lineno}: unknown bound type {code!r}")
            if code in ("LI", "UI"):
                integer[j] = True
        elif section is None:
            raise MpsError(f"line {lineno}: data before any section header")
        else:
            raise MpsError(f"line {lineno}: unexpected data in {section}")

    if "ROWS" not in order_seen:
        raise MpsError("missing ROWS section")

    problem = MilpProblem(name)
    for j, cname in enumerate(col_list):
        up = upper[j]
        if up is None:
            up = 1.0 if integer[j] else math.inf
        if integer[j] and (lower[j] < 0.0 or up > 1.0):
            raise MpsError(f"column {cname!r}: general integers are not supported")
        problem.add_variable(col_names.get(cname, cname), lower[j], up, BINARY if integer[j] else CONTINUOUS)
    for rname in row_order:
        sense = row_sense[rname]
        b = rhs.get(rname, 0.0)
        label = row_names.get(rname, rname)
        if rname in ranges:
            r = ranges[rname]
            if sense == "=":
                lo, hi = (b, b + r) if r >= 0 else (b + r, b)
            elif sense == "<=":
                lo, hi = b - abs(r), b
            else:
                lo, hi = b, b + abs(r)
            problem.add_constraint(label, coeffs[rname], ">=", lo)
            problem.add_constraint(label + "~range", coeffs[rname], "<=", hi)
        else:
            problem.add_constraint(label, coeffs[rname], sense, b)
    problem.set_objective(obj, obj_constant)
    return problem

"""LP-format text for the assignment model, and an independent reader.

The writer emits the classic CPLEX dialect (Maximize / Subject To / Bounds /
Binary / End) so the file loads in any off-the-shelf solver.  Output is a
pure function of the model: same model, same bytes.

The reader below shares nothing with the writer beyond this module's name
formatting rules; it tokenizes the text from scratch.  Feeding an exported
file through the reader and into a different solver is the cheapest honest
check that the model means what we think it means.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field

from .ilp import IlpModel, LinearRow
from .model import TapError

_UNSAFE = re.compile(r"[^A-Za-z0-9_.]")


class LpFormatError(TapError):
    """The text does not parse as an LP-format model."""


def _safe_name(name: str, taken: dict[str, str]) -> str:
    base = _UNSAFE.sub("_", name)
    out = base
    k = 2
    while out in taken and taken[out] != name:
        out = f"{base}~{k}"
        k += 1
    taken[out] = name
    return out


def _num(value: float) -> str:
    if value == int(value) and abs(value) < 1e15:
        return str(int(value))
    return repr(value)


def _terms(pairs: list[tuple[float, str]]) -> str:
    parts: list[str] = []
    for coeff, name in pairs:
        sign = "-" if coeff < 0 else "+"
        mag = abs(coeff)
        body = name if mag == 1 else f"{_num(mag)} {name}"
        if not parts:
            parts.append(body if sign == "+" else f"- {body}")
        else:
            parts.append(f"{sign} {body}")
    # wrap long expressions; continuation lines stay indented
    lines: list[str] = []
    line = ""
    for part in parts:
        if line and len(line) + len(part) + 1 > 78:
            lines.append(line)
            line = "   " + part
        else:
            line = part if not line else f"{line} {part}"
    if line:
        lines.append(line)
    return "\n ".join(lines)


def export_lp(model: IlpModel, name: str = "tap") -> str:
    """Render the model as LP-format text."""
    taken: dict[str, str] = {}
    var_names = [
        _safe_name(f"x_{tid}_{cid}", taken) for tid, cid in model.variables
    ]
    row_taken: dict[str, str] = {}

    out: list[str] = []
    out.append(f"\\ {name}: {len(model.variables)} variables,"
               f" {len(model.constraints)} rows, {len(model.fixings)} fixings")
    out.append("Maximize")
    obj = [(c, var_names[i]) for i, c in model.objective]
    out.append(f" obj: {_terms(obj)}" if obj else " obj:")
    out.append("Subject To")
    for row in model.constraints:
        rname = _safe_name(row.name, row_taken)
        if not row.coeffs:
            # unsatisfiable on its face; recorded for the reader, not the solver
            out.append(f"\\ infeasible: {rname}: 0 {row.sense} {_num(row.rhs)}")
            continue
        pairs = [(c, var_names[i]) for i, c in row.coeffs]
        out.append(f" {rname}: {_terms(pairs)} {row.sense} {_num(row.rhs)}")
    fixed = dict(model.fixings)
    if fixed:
        out.append("Bounds")
        for idx in sorted(fixed):
            out.append(f" {var_names[idx]} = {fixed[idx]}")
    if var_names:
        out.append("Binary")
        for vn in var_names:
            out.append(f" {vn}")
    out.append("End")
    return "\n".join(out) + "\n"


def model_is_declared_infeasible(model: IlpModel) -> bool:
    """True when the model carries an empty row no point can satisfy."""
    return any(not row.coeffs for row in model.constraints)


# ---------------------------------------------------------------------------
# independent reader

@dataclass
class ParsedRow:
    name: str
    coeffs: dict[str, float]
    sense: str
    rhs: float


@dataclass
class ParsedLp:
    maximize: bool
    objective: dict[str, float]
    rows: list[ParsedRow] = field(default_factory=list)
    bounds: dict[str, tuple[float | None, float | None]] = field(default_factory=dict)
    binaries: set[str] = field(default_factory=set)
    generals: set[str] = field(default_factory=set)

    def variable_names(self) -> list[str]:
        names = set(self.objective) | self.binaries | self.generals | set(self.bounds)
        for row in self.rows:
            names.update(row.coeffs)
        return sorted(names)


_NUMBER = re.compile(r"(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?")
_NAME = re.compile(r"[A-Za-z_.!#$%&(),;?@'`{}|~][A-Za-z0-9_.!#$%&(),;?@'`{}|~]*")
_TOKEN = re.compile(
    r"(?P<sense><=|>=|=<|=>|[<>=])|(?P<colon>:)|(?P<sign>[+-])"
    rf"|(?P<number>{_NUMBER.pattern})|(?P<name>{_NAME.pattern})"
)

_SECTIONS = {
    "maximize": "objective", "maximise": "objective", "max": "objective",
    "minimize": "objective", "minimise": "objective", "min": "objective",
    "subject_to": "rows", "such_that": "rows", "st": "rows", "s.t.": "rows",
    "bounds": "bounds", "bound": "bounds",
    "binary": "binary", "binaries": "binary", "bin": "binary",
    "general": "general", "generals": "general", "gen": "general",
    "end": "end",
}


def _tokenize(text: str) -> list[tuple[str, str]]:
    text = re.sub(r"\\[^\n]*", "", text)  # comments run to end of line
    text = re.sub(r"(?i)subject\s+to", "subject_to", text)
    text = re.sub(r"(?i)such\s+that", "such_that", text)
    tokens: list[tuple[str, str]] = []
    pos = 0
    while pos < len(text):
        ch = text[pos]
        if ch == "\n":
            tokens.append(("newline", "\n"))
            pos += 1
            continue
        if ch.isspace():
            pos += 1
            continue
        m = _TOKEN.match(text, pos)
        if not m:
            raise LpFormatError(f"unreadable character {ch!r} at offset {pos}")
        kind = m.lastgroup or "?"
        tokens.append((kind, m.group()))
        pos = m.end()
    return tokens


class _Cursor:
    def __init__(self, tokens: list[tuple[str, str]]):
        self.tokens = tokens
        self.pos = 0

    def peek(self, skip_newlines: bool = True) -> tuple[str, str] | None:
        pos = self.pos
        while pos < len(self.tokens):
            kind, val = self.tokens[pos]
            if kind == "newline" and skip_newlines:
                pos += 1
                continue
            return kind, val
        return None

    def next(self, skip_newlines: bool = True) -> tuple[str, str] | None:
        while self.pos < len(self.tokens):
            kind, val = self.tokens[self.pos]
            self.pos += 1
            if kind == "newline" and skip_newlines:
                continue
            return kind, val
        return None


def _is_section(token: tuple[str, str] | None) -> str | None:
    if token is None:
        return "end"
    kind, val = token
    if kind == "name":
        return _SECTIONS.get(val.lower())
    return None


def _read_expression(cur: _Cursor) -> dict[str, float]:
    """Read sign/coefficient/name terms until a sense token or section."""
    coeffs: dict[str, float] = {}
    while True:
        tok = cur.peek()
        if tok is None or tok[0] == "sense" or _is_section(tok):
            return coeffs
        sign = 1.0
        while tok and tok[0] == "sign":
            cur.next()
            if tok[1] == "-":
                sign = -sign
            tok = cur.peek()
        coeff = sign
        saw_number = False
        if tok and tok[0] == "number":
            cur.next()
            coeff = sign * float(tok[1])
            saw_number = True
            tok = cur.peek()
        if tok and tok[0] == "name" and not _is_section(tok):
            cur.next()
            coeffs[tok[1]] = coeffs.get(tok[1], 0.0) + coeff
        elif saw_number:
            coeffs[""] = coeffs.get("", 0.0) + coeff  # loose constant
        else:
            raise LpFormatError(f"expected a term, found {tok!r}")


def _read_constant(cur: _Cursor, where: str) -> float:
    """One signed number; the right side of a row is never an expression."""
    sign = 1.0
    tok = cur.next()
    while tok and tok[0] == "sign":
        if tok[1] == "-":
            sign = -sign
        tok = cur.next()
    if tok is None or tok[0] != "number":
        raise LpFormatError(f"row {where}: right side must be a constant")
    return sign * float(tok[1])


def _normalize_sense(raw: str) -> str:
    if raw in ("<=", "=<", "<"):
        return "<="
    if raw in (">=", "=>", ">"):
        return ">="
    return "="


def parse_lp(text: str) -> ParsedLp:
    """Parse LP-format text written by this module or by other tools."""
    cur = _Cursor(_tokenize(text))
    tok = cur.next()
    direction = _is_section(tok)
    if direction != "objective":
        raise LpFormatError("file must open with Maximize or Minimize")
    maximize = tok is not None and tok[1].lower().startswith("max")

    # objective: optional label, then one expression
    if (t := cur.peek()) and t[0] == "name" and not _is_section(t):
        save = cur.pos
        cur.next()
        if (c := cur.peek()) and c[0] == "colon":
            cur.next()
        else:
            cur.pos = save
    objective = _read_expression(cur)
    objective.pop("", None)

    parsed = ParsedLp(maximize=maximize, objective=objective)

    section = _is_section(cur.peek())
    if section == "rows":
        cur.next()
        counter = 0
        while True:
            tok = cur.peek()
            sec = _is_section(tok)
            if sec and sec != "rows":
                break
            name = f"r{counter}"
            if tok and tok[0] == "name":
                save = cur.pos
                cur.next()
                if (c := cur.peek()) and c[0] == "colon":
                    cur.next()
                    name = tok[1]
                else:
                    cur.pos = save
            coeffs = _read_expression(cur)
            shift = coeffs.pop("", 0.0)  # loose constants move to the rhs
            sense_tok = cur.next()
            if sense_tok is None or sense_tok[0] != "sense":
                raise LpFormatError(f"row {name}: expected a sense, got {sense_tok!r}")
            rhs = _read_constant(cur, name) - shift
            parsed.rows.append(
                ParsedRow(name=name, coeffs=coeffs,
                          sense=_normalize_sense(sense_tok[1]), rhs=rhs)
            )
            counter += 1

    while (section := _is_section(cur.peek())) not in (None, "end"):
        cur.next()
        if section == "bounds":
            _read_bounds(cur, parsed)
        elif section == "binary":
            while (t := cur.peek()) and t[0] == "name" and not _is_section(t):
                cur.next()
                parsed.binaries.add(t[1])
        elif section == "general":
            while (t := cur.peek()) and t[0] == "name" and not _is_section(t):
                cur.next()
                parsed.generals.add(t[1])
        else:
            raise LpFormatError(f"unexpected section {section!r}")
    return parsed


def _read_bounds(cur: _Cursor, parsed: ParsedLp) -> None:
    def setb(name: str, lo: float | None, hi: float | None) -> None:
        old_lo, old_hi = parsed.bounds.get(name, (None, None))
        parsed.bounds[name] = (lo if lo is not None else old_lo,
                               hi if hi is not None else old_hi)

    while True:
        tok = cur.peek()
        if tok is None or _is_section(tok):
            return
        # forms: "l <= x <= u" | "x <= u" | "x >= l" | "x = v" | "x free"
        sign = 1.0
        if tok[0] == "sign":
            cur.next()
            sign = -1.0 if tok[1] == "-" else 1.0
            tok = cur.peek()
        if tok is None:
            return
        if tok[0] == "number":
            cur.next()
            lo = sign * float(tok[1])
            sense = cur.next()
            if sense is None or sense[0] != "sense" or _normalize_sense(sense[1]) != "<=":
                raise LpFormatError("bound: expected <= after leading constant")
            name_tok = cur.next()
            if name_tok is None or name_tok[0] != "name":
                raise LpFormatError("bound: expected a variable name")
            setb(name_tok[1], lo, None)
            nxt = cur.peek(skip_newlines=False)
            if nxt and nxt[0] == "sense":
                cur.next()
                hi_tok = cur.next()
                if hi_tok is None or hi_tok[0] != "number":
                    raise LpFormatError("bound: expected upper constant")
                setb(name_tok[1], None, float(hi_tok[1]))
        elif tok[0] == "name":
            cur.next()
            name = tok[1]
            nxt = cur.peek(skip_newlines=False)
            if nxt and nxt[0] == "name" and nxt[1].lower() == "free":
                cur.next()
                parsed.bounds[name] = (-math.inf, math.inf)
                continue
            if nxt is None or nxt[0] != "sense":
                raise LpFormatError(f"bound for {name}: expected a sense")
            cur.next()
            sense = _normalize_sense(nxt[1])
            vsign = 1.0
            val_tok = cur.next()
            if val_tok and val_tok[0] == "sign":
                vsign = -1.0 if val_tok[1] == "-" else 1.0
                val_tok = cur.next()
            if val_tok is None or val_tok[0] != "number":
                raise LpFormatError(f"bound for {name}: expected a constant")
            value = vsign * float(val_tok[1])
            if sense == "<=":
                setb(name, None, value)
            elif sense == ">=":
                setb(name, value, None)
            else:
                parsed.bounds[name] = (value, value)
        else:
            raise LpFormatError(f"unreadable bounds entry at {tok!r}")

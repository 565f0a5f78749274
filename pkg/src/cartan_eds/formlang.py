"""Line-based text format and JSON report schema.

Documents declare a chart, named systems of 1-forms, named scalar
functions, named rational points and first-order PDE blocks:

    coords x1 x2 x3 x4 x5

    system P
     dx1 + x4*dx5
     dx2

    function H
     x1*x2^2

    point origin
     x1 = 0

    pde S on n=2
     p1 = x2
     p2 = 0

Expressions use infix arithmetic with exact integer and ratio literals,
`d<coord>` for coordinate differentials and `^` for wedge between forms
(and integer powers of scalars).  Rendering is deterministic and
round-trips through the parser up to nothing at all: parse(render(d))
is structurally equal to d.
"""

from __future__ import annotations

import hashlib
import json
import re
from dataclasses import dataclass, field
from fractions import Fraction

from .chart import Chart, PointAssignment
from .contact import ContactChart, Hamiltonian, PDESystem
from .errors import ParseError
from .forms import DifferentialForm
from .rational import Polynomial, RationalFunction, _grlex_key

SCHEMA = "cartan-eds/1"


# -- expression tokens ---------------------------------------------------

_TOKEN_RE = re.compile(
    r"\s*(?:(?P<number>\d+)|(?P<name>[A-Za-z][A-Za-z0-9_]*)|(?P<op>[-+*/^()]))"
)


@dataclass(frozen=True)
class Token:
    kind: str  # "number" | "name" | "op" | "end"
    text: str
    line: int
    column: int


def _tokenize(text: str, line: int, column_offset: int) -> list[Token]:
    tokens: list[Token] = []
    pos = 0
    while pos < len(text):
        match = _TOKEN_RE.match(text, pos)
        if not match or match.end() == match.start():
            stripped = text[pos:].lstrip()
            if not stripped:
                break
            bad_at = pos + (len(text[pos:]) - len(stripped))
            raise ParseError(
                f"unexpected character {stripped[0]!r}",
                line,
                column_offset + bad_at + 1,
                expected=["number", "identifier", "operator"],
            )
        kind = match.lastgroup
        tokens.append(Token(kind, match.group(kind), line, column_offset + match.start(kind) + 1))
        pos = match.end()
    tokens.append(Token("end", "", line, column_offset + len(text) + 1))
    return tokens


class _Value:
    """Typed value during expression evaluation: scalar or form."""

    __slots__ = ("scalar", "form")

    def __init__(self, scalar: RationalFunction | None = None, form: DifferentialForm | None = None):
        self.scalar = scalar
        self.form = form

    @property
    def is_form(self) -> bool:
        return self.form is not None


class _ExpressionParser:
    def __init__(self, tokens: list[Token], chart: Chart):
        self.tokens = tokens
        self.at = 0
        self.chart = chart

    def peek(self) -> Token:
        return self.tokens[self.at]

    def advance(self) -> Token:
        token = self.tokens[self.at]
        self.at += 1
        return token

    def error(self, message: str, token: Token, expected: list[str] | None = None) -> ParseError:
        return ParseError(message, token.line, token.column, expected)

    def parse(self) -> _Value:
        value = self.expr()
        token = self.peek()
        if token.kind != "end":
            raise self.error(f"unexpected trailing {token.text!r}", token, ["end of expression"])
        return value

    def expr(self) -> _Value:
        value = self.term()
        while self.peek().kind == "op" and self.peek().text in "+-":
            op = self.advance()
            right = self.term()
            value = self.combine_additive(value, right, op)
        return value

    def term(self) -> _Value:
        value = self.unary()
        while self.peek().kind == "op" and self.peek().text in "*/":
            op = self.advance()
            right = self.unary()
            value = self.combine_multiplicative(value, right, op)
        return value

    def unary(self) -> _Value:
        negate = False
        while self.peek().kind == "op" and self.peek().text in "+-":
            if self.advance().text == "-":
                negate = not negate
        value = self.power_chain()
        if negate:
            if value.is_form:
                return _Value(form=-value.form)
            return _Value(scalar=-value.scalar)
        return value

    def power_chain(self) -> _Value:
        from .forms import wedge

        value = self.atom()
        while self.peek().kind == "op" and self.peek().text == "^":
            op = self.advance()
            right = self.unary_exponent()
            if value.is_form and right.is_form:
                value = _Value(form=wedge(value.form, right.form))
            elif not value.is_form and not right.is_form:
                exponent = right.scalar
                if not exponent.is_constant or exponent.constant_value().denominator != 1:
                    raise self.error("exponent must be an integer literal", op)
                value = _Value(scalar=value.scalar ** int(exponent.constant_value()))
            else:
                raise self.error("'^' needs two forms (wedge) or a scalar and an integer", op)
        return value

    def unary_exponent(self) -> _Value:
        negate = False
        while self.peek().kind == "op" and self.peek().text in "+-":
            if self.advance().text == "-":
                negate = not negate
        value = self.atom()
        if negate:
            if value.is_form:
                return _Value(form=-value.form)
            return _Value(scalar=-value.scalar)
        return value

    def atom(self) -> _Value:
        token = self.peek()
        if token.kind == "number":
            self.advance()
            return _Value(scalar=RationalFunction.constant(self.chart, int(token.text)))
        if token.kind == "name":
            self.advance()
            name = token.text
            if name in self.chart:
                return _Value(scalar=RationalFunction.coordinate(self.chart, self.chart.index(name)))
            if name.startswith("d") and name[1:] in self.chart:
                return _Value(
                    form=DifferentialForm.coordinate_differential(self.chart, self.chart.index(name[1:]))
                )
            missing = name[1:] if name.startswith("d") and len(name) > 1 else name
            raise self.error(f"unknown coordinate {missing}", token,
                             ["coordinate name", "d<coordinate>"])
        if token.kind == "op" and token.text == "(":
            self.advance()
            value = self.expr()
            closing = self.peek()
            if closing.kind != "op" or closing.text != ")":
                raise self.error("missing ')'", closing, [")"])
            self.advance()
            return value
        raise self.error(f"unexpected {token.text or 'end of expression'!r}", token,
                         ["number", "identifier", "("])

    def combine_additive(self, left: _Value, right: _Value, op: Token) -> _Value:
        sign = 1 if op.text == "+" else -1
        if left.is_form != right.is_form:
            raise self.error("cannot add a scalar and a form", op)
        if left.is_form:
            if left.form.degree != right.form.degree and not (left.form.is_zero or right.form.is_zero):
                raise self.error(
                    f"degree mismatch: {left.form.degree} vs {right.form.degree}", op
                )
            return _Value(form=left.form + (right.form if sign > 0 else -right.form))
        return _Value(scalar=left.scalar + (right.scalar if sign > 0 else -right.scalar))

    def combine_multiplicative(self, left: _Value, right: _Value, op: Token) -> _Value:
        if op.text == "*":
            if left.is_form and right.is_form:
                raise self.error("use '^' for the wedge of two forms", op)
            if left.is_form:
                return _Value(form=left.form.scale(right.scalar))
            if right.is_form:
                return _Value(form=right.form.scale(left.scalar))
            return _Value(scalar=left.scalar * right.scalar)
        # division
        if right.is_form:
            raise self.error("cannot divide by a form", op)
        if right.scalar.is_zero:
            raise self.error("division by zero", op)
        if left.is_form:
            one = RationalFunction.constant(self.chart, 1)
            return _Value(form=left.form.scale(one / right.scalar))
        return _Value(scalar=left.scalar / right.scalar)


def parse_expression(text: str, chart: Chart, line: int = 1, column_offset: int = 0) -> _Value:
    tokens = _tokenize(text, line, column_offset)
    return _ExpressionParser(tokens, chart).parse()


def parse_scalar(text: str, chart: Chart, line: int = 1, column_offset: int = 0) -> RationalFunction:
    value = parse_expression(text, chart, line, column_offset)
    if value.is_form:
        raise ParseError("expected a scalar expression", line, column_offset + 1)
    return value.scalar


def parse_form(text: str, chart: Chart, line: int = 1, column_offset: int = 0) -> DifferentialForm:
    value = parse_expression(text, chart, line, column_offset)
    if not value.is_form:
        raise ParseError("expected a differential form", line, column_offset + 1)
    return value.form


# -- documents -----------------------------------------------------------


@dataclass
class SystemDocument:
    """Parsed document: chart plus named systems, functions, points, PDEs."""

    chart: Chart | None = None
    systems: dict[str, list[DifferentialForm]] = field(default_factory=dict)
    functions: dict[str, RationalFunction] = field(default_factory=dict)
    points: dict[str, PointAssignment] = field(default_factory=dict)
    pdes: dict[str, PDESystem] = field(default_factory=dict)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, SystemDocument)
            and self.chart == other.chart
            and self.systems == other.systems
            and self.functions == other.functions
            and self.points == other.points
            and self.pdes == other.pdes
        )


_COORD_RE = re.compile(r"[A-Za-z][A-Za-z0-9_]*\Z")
_RATIONAL_RE = re.compile(r"(-?\d+)(?:\s*/\s*(\d+))?\Z")
_PDE_HEADER_RE = re.compile(r"pde\s+([A-Za-z][A-Za-z0-9_]*)\s+on\s+n\s*=\s*(\d+)\s*\Z")


def parse_document(text: str) -> SystemDocument:
    """Parse the text format; errors carry line and column positions."""
    doc = SystemDocument()
    lines = text.splitlines()
    seen_names: set[str] = set()

    blocks: list[tuple[str, str, int, list[tuple[int, str]]]] = []
    current: tuple[str, str, int, list[tuple[int, str]]] | None = None
    for lineno, raw in enumerate(lines, start=1):
        stripped = raw.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if raw[0] not in " \t":
            head = stripped.split()
            keyword = head[0]
            if keyword == "coords":
                if doc.chart is not None:
                    raise ParseError("duplicate coords line", lineno, 1)
                if blocks:
                    raise ParseError("coords must come before other blocks", lineno, 1)
                names = head[1:]
                if not names:
                    raise ParseError("coords needs at least one name", lineno, len(raw) + 1)
                for name in names:
                    if not _COORD_RE.match(name):
                        raise ParseError(f"invalid coordinate name {name!r}", lineno, raw.find(name) + 1)
                if len(set(names)) != len(names):
                    raise ParseError("coordinate names must be unique", lineno, 1)
                doc.chart = Chart(names)
                current = None
                continue
            if keyword in ("system", "function", "point"):
                if len(head) != 2:
                    raise ParseError(f"'{keyword}' needs exactly one name", lineno, 1,
                                     [f"{keyword} <name>"])
                name = head[1]
                if name in seen_names:
                    raise ParseError(f"duplicate name {name!r}", lineno, raw.find(name) + 1)
                seen_names.add(name)
                current = (keyword, name, lineno, [])
                blocks.append(current)
                continue
            if keyword == "pde":
                match = _PDE_HEADER_RE.match(stripped)
                if not match:
                    raise ParseError("pde header must read 'pde <name> on n=<count>'", lineno, 1)
                name = match.group(1)
                if name in seen_names:
                    raise ParseError(f"duplicate name {name!r}", lineno, raw.find(name) + 1)
                seen_names.add(name)
                current = ("pde:" + match.group(2), name, lineno, [])
                blocks.append(current)
                continue
            raise ParseError(f"unknown block keyword {keyword!r}", lineno, 1,
                             ["coords", "system", "function", "point", "pde"])
        # continuation line
        if current is None:
            raise ParseError("indented line outside any block", lineno, 1)
        indent = len(raw) - len(raw.lstrip())
        current[3].append((lineno, raw))

    for kind, name, header_line, body in blocks:
        if kind == "system":
            chart = _require_chart(doc, header_line)
            forms = []
            for lineno, raw in body:
                indent = len(raw) - len(raw.lstrip())
                value = parse_expression(raw.lstrip(), chart, lineno, indent)
                if not value.is_form or value.form.degree != 1:
                    got = "scalar" if not value.is_form else f"degree-{value.form.degree} form"
                    raise ParseError(f"system entries must be 1-forms, got a {got}", lineno, indent + 1)
                forms.append(value.form)
            doc.systems[name] = forms
        elif kind == "function":
            chart = _require_chart(doc, header_line)
            if len(body) != 1:
                raise ParseError("a function block holds exactly one expression line", header_line, 1)
            lineno, raw = body[0]
            indent = len(raw) - len(raw.lstrip())
            doc.functions[name] = parse_scalar(raw.lstrip(), chart, lineno, indent)
        elif kind == "point":
            chart = _require_chart(doc, header_line)
            assignments: dict[str, Fraction] = {}
            for lineno, raw in body:
                indent = len(raw) - len(raw.lstrip())
                if "=" not in raw:
                    raise ParseError("point lines read '<coordinate> = <rational>'", lineno, indent + 1)
                left, _, right = raw.partition("=")
                coord = left.strip()
                if coord not in chart:
                    raise ParseError(f"unknown coordinate {coord}", lineno, raw.find(coord) + 1)
                match = _RATIONAL_RE.match(right.strip())
                if not match:
                    raise ParseError("point values are integers or ratios like -3/4", lineno,
                                     raw.find("=") + 2)
                value = Fraction(int(match.group(1)), int(match.group(2) or 1))
                if coord in assignments:
                    raise ParseError(f"coordinate {coord} assigned twice", lineno, raw.find(coord) + 1)
                assignments[coord] = value
            doc.points[name] = PointAssignment.from_mapping(chart, assignments)
        else:  # pde block
            n = int(kind.split(":")[1])
            if n < 1:
                raise ParseError("pde needs n >= 1", header_line, 1)
            cc = ContactChart(n, 1)
            if doc.chart is not None and doc.chart != cc.chart:
                raise ParseError(
                    f"document chart does not match the jet chart for n={n}", header_line, 1
                )
            graph_rows: dict[int, RationalFunction] = {}
            implicit: list[Hamiltonian] = []
            for lineno, raw in body:
                indent = len(raw) - len(raw.lstrip())
                stripped = raw.strip()
                solved = _solved_p(stripped, cc)
                if solved is not None:
                    idx, rhs_text, rhs_offset = solved
                    if idx in graph_rows:
                        raise ParseError(f"p{idx} solved twice", lineno, indent + 1)
                    rhs = parse_scalar(rhs_text, cc.chart, lineno, indent + rhs_offset)
                    graph_rows[idx] = rhs
                else:
                    implicit.append(Hamiltonian(cc, parse_scalar(stripped, cc.chart, lineno, indent)))
            try:
                if graph_rows and not implicit:
                    doc.pdes[name] = PDESystem.from_graph(cc, graph_rows)
                elif implicit and not graph_rows:
                    doc.pdes[name] = PDESystem(cc, tuple(implicit))
                elif not body:
                    raise ParseError("empty pde block", header_line, 1)
                else:
                    raise ParseError("mixing solved and implicit pde lines is not supported",
                                     header_line, 1)
            except ParseError:
                raise
            except Exception as exc:
                raise ParseError(f"invalid pde block: {exc}", header_line, 1) from exc
    return doc


def _require_chart(doc: SystemDocument, lineno: int) -> Chart:
    if doc.chart is None:
        raise ParseError("this block needs a coords line first", lineno, 1)
    return doc.chart


def _solved_p(line: str, cc: ContactChart) -> tuple[int, str, int] | None:
    """Detect 'p<i> = rhs' graph rows; returns (i, rhs, rhs offset in line)."""
    if "=" not in line:
        return None
    left, _, right = line.partition("=")
    name = left.strip()
    for i in range(1, cc.n + 1):
        if name == f"p{i}":
            return i, right.strip(), line.find("=") + 1 + (len(right) - len(right.lstrip()))
    return None


# -- rendering -----------------------------------------------------------


def _monomial_text(chart: Chart, exps: tuple[int, ...]) -> str:
    parts = []
    for i, e in enumerate(exps):
        if not e:
            continue
        if e == 1:
            parts.append(chart.names[i])
        else:
            parts.append(f"{chart.names[i]}^{e}")
    return "*".join(parts)


def render_polynomial(p: Polynomial) -> str:
    if p.is_zero:
        return "0"
    pieces: list[str] = []
    for exps in sorted(p.terms, key=_grlex_key, reverse=True):
        coeff = p.terms[exps]
        mono = _monomial_text(p.chart, exps)
        magnitude = abs(coeff)
        if not mono:
            body = _fraction_text(magnitude)
        elif magnitude == 1:
            body = mono
        else:
            body = f"{_fraction_text(magnitude)}*{mono}"
        if not pieces:
            pieces.append(body if coeff > 0 else f"-{body}")
        else:
            pieces.append(f"+ {body}" if coeff > 0 else f"- {body}")
    return " ".join(pieces)


def _fraction_text(value: Fraction) -> str:
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"


def _poly_is_single_monomial(p: Polynomial) -> bool:
    return len(p.terms) == 1


def render_scalar(f: RationalFunction) -> str:
    num_text = render_polynomial(f.num)
    if f.den.is_constant and f.den.constant_value() == 1:
        return num_text
    den_text = render_polynomial(f.den)
    if not _poly_is_single_monomial(f.num) :
        num_text = f"({num_text})"
    exps, coeff = f.den.leading()
    den_simple = _poly_is_single_monomial(f.den) and coeff == 1 and sum(exps) == 1
    if not den_simple:
        den_text = f"({den_text})"
    return f"{num_text}/{den_text}"


def _coefficient_prefix(c: RationalFunction) -> tuple[bool, str | None]:
    """(negative, text) where text=None means magnitude 1."""
    if c.is_constant:
        value = c.constant_value()
        if value == 1:
            return False, None
        if value == -1:
            return True, None
        return value < 0, _fraction_text(abs(value))
    if (
        _poly_is_single_monomial(c.num)
        and (c.den.is_constant or _poly_is_single_monomial(c.den))
    ):
        _, lead = c.num.leading()
        if lead < 0:
            return True, render_scalar(-c)
        return False, render_scalar(c)
    return False, f"({render_scalar(c)})"


def render_form(form: DifferentialForm) -> str:
    if form.degree == 0:
        coeff = form.terms.get((), None)
        return render_scalar(coeff) if coeff is not None else "0"
    if form.is_zero:
        return "0"
    chart = form.chart
    pieces: list[str] = []
    for idx in sorted(form.terms):
        coeff = form.terms[idx]
        wedge_text = "^".join(f"d{chart.names[i]}" for i in idx)
        negative, text = _coefficient_prefix(coeff)
        body = wedge_text if text is None else f"{text}*{wedge_text}"
        if not pieces:
            pieces.append(f"-{body}" if negative else body)
        else:
            pieces.append(f"- {body}" if negative else f"+ {body}")
    return " ".join(pieces)


def render_vector_field(v) -> str:
    parts = []
    for name, comp in zip(v.chart.names, v.components):
        if comp.is_zero:
            continue
        negative, text = _coefficient_prefix(comp)
        body = f"d/d{name}" if text is None else f"{text}*d/d{name}"
        if not parts:
            parts.append(f"-{body}" if negative else body)
        else:
            parts.append(f"- {body}" if negative else f"+ {body}")
    return " ".join(parts) if parts else "0"


def render_document(doc: SystemDocument) -> str:
    """Deterministic rendering; parse(render(doc)) equals doc structurally."""
    lines: list[str] = []
    if doc.chart is not None:
        lines.append("coords " + " ".join(doc.chart.names))
    for name, forms in doc.systems.items():
        lines.append(f"system {name}")
        for form in forms:
            lines.append(f" {render_form(form)}")
    for name, func in doc.functions.items():
        lines.append(f"function {name}")
        lines.append(f" {render_scalar(func)}")
    for name, point in doc.points.items():
        lines.append(f"point {name}")
        for coord, value in zip(point.chart.names, point.values):
            lines.append(f" {coord} = {_fraction_text(value)}")
    for name, pde in doc.pdes.items():
        lines.append(f"pde {name} on n={pde.chart.n}")
        if pde.graph is not None:
            for i in sorted(pde.graph):
                lines.append(f" p{i} = {render_scalar(pde.graph[i])}")
        else:
            for eq in pde.equations:
                lines.append(f" {render_scalar(eq.f)}")
    return "\n".join(lines) + "\n" if lines else ""


# -- JSON reports ----------------------------------------------------------


def input_digest(text: str | bytes) -> str:
    data = text.encode("utf-8") if isinstance(text, str) else text
    return hashlib.sha256(data).hexdigest()


def make_report(command: str, source: str | bytes, result, diagnostics: list[dict] | None = None) -> dict:
    return {
        "schema": SCHEMA,
        "command": command,
        "input_digest": input_digest(source),
        "result": result,
        "diagnostics": diagnostics or [],
    }


def dump_report(report: dict) -> str:
    """Byte-stable JSON text for a report."""
    return json.dumps(report, sort_keys=True, indent=2) + "\n"

"""Command-line front end.

Reads formlang documents, runs the library computations and prints
human-readable text or machine JSON (--json).  Exit codes: 0 success,
1 mathematical error (rank deficiency, pole, regularity), 2 parse or
usage error.
"""

from __future__ import annotations

import argparse
import os
import sys
from fractions import Fraction

from . import catalog as catalog_mod
from .chart import PointAssignment
from .contact import (
    ContactChart,
    Hamiltonian,
    PDESystem,
    build_contact_system,
    cauchy_char_field,
    hamiltonian_of_field,
    integrability_check,
    jacobi_bracket,
    lagrange_bracket,
    lie_field_from_hamiltonian,
    prolong_vector_field,
    restrict_system,
    sample_points_on_graph,
)
from .errors import CartanEDSError, MathError, ParseError, UsageError
from .formlang import (
    SystemDocument,
    dump_report,
    make_report,
    parse_document,
    parse_form,
    render_form,
    render_scalar,
    render_vector_field,
)
from .pfaffian import (
    PfaffianSystem,
    cartan_class,
    cauchy_characteristic_system,
    character_chain,
    darboux_class,
    derived_flag,
    derived_system,
    gender,
    is_integrable_frobenius,
    polar_space,
    reduce_mod_system,
    singularity_scan,
    structure_congruences,
)


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code not in (0, None) else 0
    if not hasattr(args, "handler"):
        parser.print_help()
        return 2
    out = Out(getattr(args, "json", False), args.command)
    try:
        args.handler(args, out)
    except (ParseError, UsageError) as exc:
        out.fail(str(exc))
        return 2
    except CartanEDSError as exc:
        out.fail(str(exc))
        return 1
    out.finish()
    return 0


class Out:
    """Collects human lines and a JSON result side by side."""

    def __init__(self, as_json: bool, command: str):
        self.as_json = as_json
        self.command = command
        self.lines: list[str] = []
        self.result: dict = {}
        self.source: str | bytes = b""
        self.diagnostics: list[dict] = []

    def line(self, text: str = "") -> None:
        self.lines.append(text)

    def warn(self, message: str) -> None:
        self.diagnostics.append({"severity": "warning", "message": message})
        self.lines.append(f"warning: {message}")

    def fail(self, message: str) -> None:
        self.diagnostics.append({"severity": "error", "message": message})
        if self.as_json:
            report = make_report(self.command, self.source, self.result or None, self.diagnostics)
            sys.stdout.write(dump_report(report))
        else:
            for line in self.lines:
                sys.stdout.write(line + "\n")
            sys.stderr.write(f"error: {message}\n")

    def finish(self) -> None:
        if self.as_json:
            report = make_report(self.command, self.source, self.result, self.diagnostics)
            sys.stdout.write(dump_report(report))
        else:
            for line in self.lines:
                sys.stdout.write(line + "\n")


def _read_document(args) -> tuple[SystemDocument, str]:
    if args.file == "-":
        text = sys.stdin.read()
    else:
        try:
            with open(args.file, "r", encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            raise UsageError(f"cannot read {args.file}: {exc}") from exc
    return parse_document(text), text


def _pick_system(doc: SystemDocument, name: str) -> PfaffianSystem:
    if name not in doc.systems:
        raise UsageError(f"document has no system named {name!r}")
    if doc.chart is None:
        raise UsageError("document has no coords line")
    return PfaffianSystem(doc.chart, doc.systems[name])


def _pick_point(doc: SystemDocument, name: str) -> PointAssignment:
    if name not in doc.points:
        raise UsageError(f"document has no point named {name!r}")
    return doc.points[name]


def _pick_pde(doc: SystemDocument, name: str) -> PDESystem:
    if name not in doc.pdes:
        raise UsageError(f"document has no pde named {name!r}")
    return doc.pdes[name]


def _pick_function(doc: SystemDocument, name: str):
    if name not in doc.functions:
        raise UsageError(f"document has no function named {name!r}")
    return doc.functions[name]


def _seed(args) -> int | None:
    if getattr(args, "seed", None) is not None:
        return args.seed
    env = os.environ.get("CARTAN_EDS_SEED")
    if env is not None:
        try:
            return int(env)
        except ValueError:
            raise UsageError("CARTAN_EDS_SEED must be an integer") from None
    return None


# -- command handlers ------------------------------------------------------


def cmd_derived(args, out: Out) -> None:
    doc, out.source = _read_document(args)
    system = _pick_system(doc, args.system)
    result = derived_system(system)
    integrable = is_integrable_frobenius(result)
    out.result = {
        "system": args.system,
        "generators": [render_form(g) for g in result.generators],
        "rank": result.rank,
        "integrable": integrable,
    }
    out.line(f"derived system of {args.system}: rank {result.rank}")
    for g in result.generators:
        out.line(f"  {render_form(g)}")
    out.line(f"integrable: {'yes' if integrable else 'no'}")


def cmd_flag(args, out: Out) -> None:
    doc, out.source = _read_document(args)
    system = _pick_system(doc, args.system)
    flag = derived_flag(system)
    out.result = {
        "system": args.system,
        "ranks": list(flag.ranks),
        "terminal_integrable": flag.terminal_integrable,
        "stages": [[render_form(g) for g in stage.generators] for stage in flag.stages],
    }
    out.line(f"derived flag of {args.system}: ranks {tuple(flag.ranks)}")
    for depth, stage in enumerate(flag.stages):
        gens = ", ".join(render_form(g) for g in stage.generators) or "0"
        out.line(f"  P_{depth}: {gens}")
    out.line(f"terminal integrable: {'yes' if flag.terminal_integrable else 'no'}")


def cmd_characteristic(args, out: Out) -> None:
    doc, out.source = _read_document(args)
    system = _pick_system(doc, args.system)
    result = cauchy_characteristic_system(system)
    out.result = {
        "system": args.system,
        "generators": [render_form(g) for g in result.generators],
        "rank": result.rank,
    }
    out.line(f"Cauchy characteristic system of {args.system}: rank {result.rank}")
    for g in result.generators:
        out.line(f"  {render_form(g)}")


def cmd_class(args, out: Out) -> None:
    doc, out.source = _read_document(args)
    system = _pick_system(doc, args.system)
    value = cartan_class(system)
    out.result = {"system": args.system, "class": value}
    out.line(f"Cartan class of {args.system}: {value}")


def cmd_darboux_class(args, out: Out) -> None:
    doc, out.source = _read_document(args)
    system = _pick_system(doc, args.system)
    index = args.index - 1
    if not 0 <= index < len(system.generators):
        raise UsageError(f"system {args.system} has no generator #{args.index}")
    form = system.generators[index]
    point = _pick_point(doc, args.point) if args.point else None
    value = darboux_class(form, point)
    out.result = {
        "system": args.system,
        "generator": render_form(form),
        "class": value,
        "pointwise": args.point is not None,
    }
    where = f" at {args.point}" if args.point else ""
    out.line(f"Darboux class of {render_form(form)}{where}: {value}")


def cmd_gender(args, out: Out) -> None:
    doc, out.source = _read_document(args)
    system = _pick_system(doc, args.system)
    value = gender(system)
    out.result = {"system": args.system, "gender": value}
    out.line(f"gender of {args.system}: {value}")


def cmd_character(args, out: Out) -> None:
    doc, out.source = _read_document(args)
    system = _pick_system(doc, args.system)
    point = _pick_point(doc, args.point)
    seed = _seed(args)
    if args.strategy == "seeded-random" and seed is None:
        raise UsageError("seeded-random strategy needs --seed or CARTAN_EDS_SEED")
    report = character_chain(system, point, args.strategy, seed)
    out.result = {
        "system": args.system,
        "point": args.point,
        "character": report.character,
        "rho_k": report.rho_k,
        "enlarged_characters": list(report.enlarged_characters),
        "chain": [[str(x) for x in vec] for vec in report.chain],
        "strategy": report.strategy,
        "seed": report.seed,
    }
    out.line(f"character of {args.system} at {args.point}: {report.character}")
    out.line(f"chain length rho_k = {report.rho_k}; polar dimensions {tuple(report.enlarged_characters)}")
    for step, vec in enumerate(report.chain, start=1):
        out.line(f"  E_{step} adds ({', '.join(str(x) for x in vec)})")


def cmd_polar(args, out: Out) -> None:
    doc, out.source = _read_document(args)
    system = _pick_system(doc, args.system)
    point = _pick_point(doc, args.point)
    element = [_parse_vector(text, system.chart.dimension) for text in args.vector or []]
    basis = polar_space(system, point, element)
    out.result = {
        "system": args.system,
        "point": args.point,
        "element": [[str(x) for x in v] for v in element],
        "basis": [[str(x) for x in v] for v in basis],
        "dimension": len(basis),
    }
    out.line(f"polar space at {args.point}: dimension {len(basis)}")
    for vec in basis:
        out.line(f"  ({', '.join(str(x) for x in vec)})")


def _parse_vector(text: str, n: int) -> tuple[Fraction, ...]:
    parts = [p.strip() for p in text.split(",")]
    if len(parts) != n:
        raise UsageError(f"--vector needs {n} comma-separated rationals")
    try:
        return tuple(Fraction(p) for p in parts)
    except ValueError as exc:
        raise UsageError(f"bad rational in --vector: {exc}") from exc


def cmd_frobenius(args, out: Out) -> None:
    doc, out.source = _read_document(args)
    system = _pick_system(doc, args.system)
    value = is_integrable_frobenius(system)
    out.result = {"system": args.system, "integrable": value}
    out.line(f"Frobenius integrability of {args.system}: {'yes' if value else 'no'}")


def cmd_identify(args, out: Out) -> None:
    doc, out.source = _read_document(args)
    system = _pick_system(doc, args.system)
    match = catalog_mod.identify_catalog(system)
    out.result = {
        "system": args.system,
        "signature": match.signature.to_json(),
        "matches": [entry.title for entry in match.entries],
    }
    if not match.matched:
        out.line("no discrete match (continuous-moduli territory)")
    elif match.unique:
        out.line(f"{match.entries[0].title} (signature match)")
    else:
        names = "; ".join(entry.title for entry in match.entries)
        group = match.entries[0].group
        out.line(f"signature matches {len(match.entries)} models: {names}")
        if group:
            out.line(f"the invariants cannot separate the members of the '{group}' group")
    sig = match.signature
    out.line(
        f"signature: rank {sig.rank}, flag {tuple(sig.flag_ranks)}, class {sig.cartan_class}, "
        f"character {sig.character}, gender {sig.gender}"
        + (f", covariant derived: {sig.covariant}" if sig.covariant else "")
    )


def cmd_scan(args, out: Out) -> None:
    doc, out.source = _read_document(args)
    system = _pick_system(doc, args.system)
    names = args.point or list(doc.points.keys())
    points = [(name, _pick_point(doc, name)) for name in names]
    report = singularity_scan(system, points)
    out.result = {
        "system": args.system,
        "generic": {
            "rank": report.generic_rank,
            "class": report.generic_class,
            "character": report.generic_character,
        },
        "rows": [
            {
                "label": row.label,
                "rank": row.rank,
                "class": row.cartan_class,
                "character": row.character,
                "deviates": row.deviates,
                "error": row.error,
            }
            for row in report.rows
        ],
    }
    out.line(
        f"generic: rank {report.generic_rank}, class {report.generic_class}, "
        f"character {report.generic_character}"
    )
    if not report.rows:
        out.line("no points given")
    for row in report.rows:
        if row.error:
            out.line(f"  {row.label}: error: {row.error}")
        else:
            mark = "  <-- deviates" if row.deviates else ""
            out.line(f"  {row.label}: rank {row.rank}, class {row.cartan_class}, character {row.character}{mark}")


def cmd_contact_build(args, out: Out) -> None:
    system = build_contact_system(args.n, args.k)
    out.source = f"contact-build n={args.n} k={args.k}".encode()
    out.result = {
        "n": args.n,
        "k": args.k,
        "chart": list(system.chart.names),
        "generators": [render_form(g) for g in system.generators],
        "count": len(system.generators),
    }
    out.line(f"contact system on the order-{args.k} jet chart, n={args.n}")
    out.line(f"chart: {' '.join(system.chart.names)}")
    for g in system.generators:
        out.line(f"  {render_form(g)}")
    if args.with_class:
        value = cartan_class(system)
        out.result["class"] = value
        out.line(f"Cartan class: {value}")


def _contact_chart_of(doc: SystemDocument) -> ContactChart:
    if doc.chart is None:
        raise UsageError("document has no coords line")
    return ContactChart.recognize(doc.chart)


def cmd_bracket(args, out: Out) -> None:
    doc, out.source = _read_document(args)
    cc = _contact_chart_of(doc)
    f = Hamiltonian(cc, _pick_function(doc, args.f))
    g = Hamiltonian(cc, _pick_function(doc, args.g))
    if args.lagrange:
        value = lagrange_bracket(f, g)
        kind = "lagrange"
    else:
        value = jacobi_bracket(f, g)
        kind = "jacobi"
    out.result = {"bracket": kind, "f": args.f, "g": args.g, "value": render_scalar(value)}
    out.line(f"{kind} bracket [{args.f}, {args.g}] = {render_scalar(value)}")


def cmd_hamiltonian_field(args, out: Out) -> None:
    doc, out.source = _read_document(args)
    cc = _contact_chart_of(doc)
    h = Hamiltonian(cc, _pick_function(doc, args.function))
    field = lie_field_from_hamiltonian(h)
    out.result = {
        "function": args.function,
        "field": render_vector_field(field),
        "components": {name: render_scalar(c) for name, c in zip(field.chart.names, field.components)},
    }
    out.line(f"Lie vector field of {args.function}:")
    out.line(f"  {render_vector_field(field)}")


def cmd_prolong(args, out: Out) -> None:
    doc, out.source = _read_document(args)
    cc = _contact_chart_of(doc)
    if len(args.a or []) != cc.n:
        raise UsageError(f"need exactly {cc.n} --a components for n={cc.n}")
    a = [_pick_function(doc, name) for name in args.a]
    b = _pick_function(doc, args.b) if args.b else cc.scalar(0)
    field = prolong_vector_field(a, b, cc)
    h, _ = hamiltonian_of_field(field, cc)
    out.result = {
        "field": render_vector_field(field),
        "hamiltonian": render_scalar(h.f),
        "components": {name: render_scalar(c) for name, c in zip(field.chart.names, field.components)},
    }
    out.line(f"prolonged field: {render_vector_field(field)}")
    out.line(f"hamiltonian: {render_scalar(h.f)}")


def cmd_char_field(args, out: Out) -> None:
    doc, out.source = _read_document(args)
    system = _pick_pde(doc, args.pde)
    field = cauchy_char_field(system)
    out.result = {
        "pde": args.pde,
        "field": render_vector_field(field),
        "components": {name: render_scalar(c) for name, c in zip(field.chart.names, field.components)},
    }
    out.line(f"characteristic field of {args.pde}:")
    out.line(f"  {render_vector_field(field)}")


def cmd_pde_check(args, out: Out) -> None:
    doc, out.source = _read_document(args)
    system = _pick_pde(doc, args.pde)
    points = [_pick_point(doc, name) for name in args.point or []]
    if args.samples is not None:
        if system.graph is None:
            raise UsageError("--samples needs a graph-form system; name --point(s) instead")
        seed = _seed(args)
        if seed is None:
            raise UsageError("--samples needs --seed or CARTAN_EDS_SEED")
        points = sample_points_on_graph(system, args.samples, seed)
        verdict = integrability_check(
            PDESystem(system.chart, system.equations), points
        )
    else:
        verdict = integrability_check(system, points or None)
    out.result = {
        "pde": args.pde,
        "integrable": verdict.integrable,
        "exact": verdict.exact,
        "obstructions": [
            {"pair": [a + 1, b + 1], "residue": render_scalar(res)}
            for a, b, res in verdict.obstructions
        ],
        "note": verdict.note,
    }
    if verdict.integrable:
        out.line("integrable" if verdict.exact else "no obstruction found at sampled points")
    else:
        out.line("not integrable; obstructions:")
        for a, b, res in verdict.obstructions:
            out.line(f"  [F{a+1}, F{b+1}]|S = {render_scalar(res)}")


def cmd_restrict(args, out: Out) -> None:
    doc, out.source = _read_document(args)
    system = _pick_pde(doc, args.pde)
    restricted = restrict_system(system)
    value = cartan_class(restricted)
    out.result = {
        "pde": args.pde,
        "chart": list(restricted.chart.names),
        "generators": [render_form(g) for g in restricted.generators],
        "class": value,
    }
    out.line(f"restricted system on chart ({', '.join(restricted.chart.names)}):")
    for g in restricted.generators:
        out.line(f"  {render_form(g)}")
    out.line(f"Cartan class: {value}")


def cmd_congruences(args, out: Out) -> None:
    doc, out.source = _read_document(args)
    system = _pick_system(doc, args.system)
    if args.coframe:
        if args.coframe not in doc.systems:
            raise UsageError(f"document has no system named {args.coframe!r} for the coframe")
        complement = doc.systems[args.coframe]
    else:
        complement = None
    modulo = _parse_modulo(args.modulo, len(system.generators))
    table = structure_congruences(system, modulo, complement)
    rows_json = []
    for i, row in enumerate(table.rows):
        terms = []
        for term in row:
            terms.append(
                {
                    "left": list(term.left),
                    "right": list(term.right),
                    "coefficient": render_scalar(term.coefficient),
                }
            )
        rows_json.append(terms)
    out.result = {"system": args.system, "modulo": [m + 1 for m in table.modulo], "rows": rows_json}

    def label(ref: tuple[str, int]) -> str:
        kind, pos = ref
        if kind == "omega":
            return f"w{pos+1}"
        return render_form(table.complement[pos])

    for i, row in enumerate(table.rows):
        if not row:
            out.line(f"d w{i+1} == 0 (mod chosen generators)")
            continue
        text = ""
        for term in row:
            coeff = render_scalar(term.coefficient)
            negative = coeff.startswith("-")
            magnitude = coeff[1:] if negative else coeff
            prefix = "" if magnitude == "1" else f"({magnitude})*"
            body = f"{prefix}{label(term.left)}^{label(term.right)}"
            if not text:
                text = f"-{body}" if negative else body
            else:
                text += f" - {body}" if negative else f" + {body}"
        out.line(f"d w{i+1} == {text}")


def _parse_modulo(text: str, count: int) -> list[int] | None:
    if text == "all":
        return None  # default: all generators
    if text == "none":
        return []
    try:
        indices = [int(piece) - 1 for piece in text.split(",")]
    except ValueError:
        raise UsageError("--modulo must be 'all', 'none' or 1-based indices like 1,2") from None
    for i in indices:
        if not 0 <= i < count:
            raise UsageError(f"--modulo index {i+1} out of range")
    return indices


def cmd_catalog_selftest(args, out: Out) -> None:
    out.source = b"catalog-selftest"
    rows = catalog_mod.catalog_selftest()
    all_pass = all(row.ok for row in rows)
    out.result = {
        "all_pass": all_pass,
        "entries": [
            {
                "name": row.name,
                "title": row.title,
                "ok": row.ok,
                "shipped": row.shipped.to_json(),
                "recomputed": row.recomputed.to_json() if row.recomputed else None,
                "error": row.error,
            }
            for row in rows
        ],
    }
    if not rows:
        out.warn("catalog is empty; vacuous pass")
    for row in rows:
        status = "pass" if row.ok else "FAIL"
        out.line(f"{status}  {row.name}")
        if not row.ok and row.recomputed is not None:
            out.line(f"      shipped:    {row.shipped.to_json()}")
            out.line(f"      recomputed: {row.recomputed.to_json()}")
        if row.error:
            out.line(f"      error: {row.error}")
    out.line("all entries pass" if all_pass else "catalog self-test FAILED")
    if not all_pass:
        raise MathError("catalog self-test failed")


def cmd_reduce(args, out: Out) -> None:
    doc, out.source = _read_document(args)
    system = _pick_system(doc, args.system)
    if doc.chart is None:
        raise UsageError("document has no coords line")
    form = parse_form(args.form, doc.chart)
    representative, zero_flag = reduce_mod_system(form, system)
    out.result = {
        "system": args.system,
        "form": args.form,
        "zero": zero_flag,
        "representative": render_form(representative),
    }
    out.line(f"{args.form} mod {args.system}: {'== 0' if zero_flag else '!= 0'}")
    out.line(f"representative: {render_form(representative)}")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cartan-eds",
        description="Exact structural invariants of Pfaffian systems and first-order PDE systems.",
    )
    sub = parser.add_subparsers(dest="command")

    def add(name: str, handler, doc_input: bool = True):
        p = sub.add_parser(name)
        p.set_defaults(handler=handler, command=name)
        if doc_input:
            p.add_argument("file", help="formlang document (or - for stdin)")
        p.add_argument("--json", action="store_true", help="emit a JSON report")
        return p

    for name, handler in (
        ("derived", cmd_derived),
        ("flag", cmd_flag),
        ("characteristic", cmd_characteristic),
        ("class", cmd_class),
        ("gender", cmd_gender),
        ("frobenius", cmd_frobenius),
        ("identify", cmd_identify),
    ):
        p = add(name, handler)
        p.add_argument("--system", required=True)

    p = add("darboux-class", cmd_darboux_class)
    p.add_argument("--system", required=True)
    p.add_argument("--index", type=int, default=1, help="1-based generator index")
    p.add_argument("--point", help="named point for the pointwise class")

    p = add("character", cmd_character)
    p.add_argument("--system", required=True)
    p.add_argument("--point", required=True)
    p.add_argument("--strategy", choices=["deterministic", "seeded-random"], default="deterministic")
    p.add_argument("--seed", type=int)

    p = add("polar", cmd_polar)
    p.add_argument("--system", required=True)
    p.add_argument("--point", required=True)
    p.add_argument("--vector", action="append", help="tangent vector as comma-separated rationals")

    p = add("scan", cmd_scan)
    p.add_argument("--system", required=True)
    p.add_argument("--point", action="append", help="named point (default: every point in the document)")

    p = add("reduce", cmd_reduce)
    p.add_argument("--system", required=True)
    p.add_argument("--form", required=True, help="form expression to reduce")

    p = add("contact-build", cmd_contact_build, doc_input=False)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--with-class", action="store_true")

    p = add("bracket", cmd_bracket)
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--jacobi", action="store_true")
    group.add_argument("--lagrange", action="store_true")
    p.add_argument("-f", required=True, help="first hamiltonian (function name)")
    p.add_argument("-g", required=True, help="second hamiltonian (function name)")

    p = add("hamiltonian-field", cmd_hamiltonian_field)
    p.add_argument("--function", required=True)

    p = add("prolong", cmd_prolong)
    p.add_argument("--a", action="append", help="x-component function name (repeat n times)")
    p.add_argument("--b", help="y-component function name (default 0)")

    p = add("char-field", cmd_char_field)
    p.add_argument("--pde", required=True)

    p = add("pde-check", cmd_pde_check)
    p.add_argument("--pde", required=True)
    p.add_argument("--point", action="append", help="sample point name (for implicit systems)")
    p.add_argument("--samples", type=int, help="sample count for point-based refutation of graph systems")
    p.add_argument("--seed", type=int)

    p = add("restrict", cmd_restrict)
    p.add_argument("--pde", required=True)

    p = add("congruences", cmd_congruences)
    p.add_argument("--system", required=True)
    p.add_argument("--coframe", help="system holding the complement 1-forms")
    p.add_argument("--modulo", default="all", help="'all', 'none' or 1-based generator indices")

    add("catalog-selftest", cmd_catalog_selftest, doc_input=False)
    return parser


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())

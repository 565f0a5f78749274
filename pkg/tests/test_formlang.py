import random
from fractions import Fraction

import pytest

from cartan_eds.chart import Chart, PointAssignment
from cartan_eds.errors import ParseError
from cartan_eds.formlang import (
    SystemDocument,
    dump_report,
    input_digest,
    make_report,
    parse_document,
    parse_form,
    parse_scalar,
    render_document,
    render_form,
    render_scalar,
)
from cartan_eds.forms import DifferentialForm, wedge
from cartan_eds.rational import Polynomial, RationalFunction


class TestParseDocument:
    def test_identity_case(self):
        doc = parse_document("coords x1 x2\nsystem P\n dx1\n dx2\n")
        assert doc.chart == Chart(["x1", "x2"])
        assert [str(g) for g in doc.systems["P"]] == ["dx1", "dx2"]

    def test_five_chart_system(self):
        doc = parse_document("coords x1 x2 x3 x4 x5\nsystem P\n dx1 + x4*dx5\n dx2\n dx3\n")
        gens = doc.systems["P"]
        assert len(gens) == 3
        assert str(gens[0]) == "dx1 + x4*dx5"

    def test_unknown_coordinate(self):
        with pytest.raises(ParseError) as err:
            parse_document("coords x1\nsystem P\n dx9\n")
        assert "unknown coordinate x9" in str(err.value)
        assert err.value.line == 3

    def test_degree_mismatch(self):
        with pytest.raises(ParseError) as err:
            parse_document("coords x1 x2\nsystem P\n dx1^dx2\n")
        assert "1-forms" in str(err.value)

    def test_scalar_rejected_in_system(self):
        with pytest.raises(ParseError):
            parse_document("coords x1\nsystem P\n x1\n")

    def test_syntax_error_position(self):
        with pytest.raises(ParseError) as err:
            parse_document("coords x1 x2\nsystem P\n dx1 + + \n")
        assert err.value.line == 3
        assert err.value.column > 1

    def test_points_and_functions(self):
        doc = parse_document(
            "coords x1 x2\n"
            "function f\n x1^2 - 1/2\n"
            "point p\n x1 = -3/4\n"
        )
        assert doc.functions["f"].evaluate([Fraction(2), Fraction(0)]) == Fraction(7, 2)
        assert doc.points["p"].values == (Fraction(-3, 4), Fraction(0))

    def test_pde_block(self):
        doc = parse_document("pde S on n=2\n p1 = x2\n p2 = 0\n")
        system = doc.pdes["S"]
        assert system.q == 2
        assert system.graph is not None
        assert str(system.graph[1]) == "x2"

    def test_pde_implicit(self):
        doc = parse_document("pde S on n=2\n p1^2 + p2^2 - 1\n")
        assert doc.pdes["S"].graph is None
        assert doc.pdes["S"].q == 1

    def test_duplicate_names_rejected(self):
        with pytest.raises(ParseError):
            parse_document("coords x1\nsystem P\n dx1\nsystem P\n dx1\n")

    def test_coords_after_blocks_rejected(self):
        with pytest.raises(ParseError):
            parse_document("system P\n dx1\ncoords x1\n")

    def test_comments_and_blank_lines(self):
        doc = parse_document("# header\ncoords x1\n\n# another\nsystem P\n dx1\n")
        assert "P" in doc.systems

    def test_every_parse_error_carries_a_position(self):
        bad_documents = [
            "coords x1 x1\n",
            "coords 1x\n",
            "coords x1\nsystem\n",
            "coords x1\nsystem P\n dx1 +\n",
            "coords x1\nsystem P\n dx1 ) \n",
            "coords x1\nsystem P\n x1\n",
            "coords x1\nsystem P\n dx2\n",
            "coords x1\nfunction f\n",
            "coords x1\npoint p\n y = 1\n",
            "coords x1\npoint p\n x1 = one\n",
            "coords x1\nnonsense P\n",
            " dx1\n",
            "coords x1\nsystem P\n dx1 $ dx1\n",
            "pde S on n=0\n p1 = 0\n",
            "pde S on n=2\n p1 = 0\n p1 = 1\n",
            "coords x1\nsystem P\n dx1\ncoords x2\n",
        ]
        for text in bad_documents:
            with pytest.raises(ParseError) as err:
                parse_document(text)
            total_lines = text.count("\n") + 1
            assert 1 <= err.value.line <= total_lines, text
            assert err.value.column >= 1


class TestExpressions:
    CH = Chart(["x1", "x2", "x3"])

    def test_precedence(self):
        f = parse_scalar("x1 + x2*x3^2", self.CH)
        x1, x2, x3 = (RationalFunction.coordinate(self.CH, i) for i in range(3))
        assert f == x1 + x2 * x3 * x3

    def test_rational_literals(self):
        f = parse_scalar("2/3*x1 - 1/6", self.CH)
        assert f.evaluate([Fraction(1), 0, 0]) == Fraction(1, 2)

    def test_unary_minus(self):
        f = parse_scalar("-x1^2", self.CH)
        assert f.evaluate([Fraction(2), 0, 0]) == Fraction(-4)

    def test_wedge_by_type_inference(self):
        form = parse_form("dx1 ^ dx2", self.CH)
        assert form.degree == 2
        with pytest.raises(ParseError):
            parse_scalar("x1 ^ dx2", self.CH)
        with pytest.raises(ParseError):
            parse_scalar("dx1 ^ 2", self.CH)

    def test_division(self):
        f = parse_scalar("x1/x2", self.CH)
        assert f.evaluate([Fraction(3), Fraction(6), 0]) == Fraction(1, 2)
        form = parse_form("dx1/x2", self.CH)
        assert not form.is_zero
        with pytest.raises(ParseError):
            parse_scalar("x1/dx2", self.CH)

    def test_form_times_form_rejected(self):
        with pytest.raises(ParseError) as err:
            parse_form("dx1 * dx2", self.CH)
        assert "wedge" in str(err.value)


def random_document(rng: random.Random) -> SystemDocument:
    n = rng.randint(1, 5)
    chart = Chart([f"x{i}" for i in range(1, n + 1)])
    doc = SystemDocument(chart=chart)
    for s in range(rng.randint(0, 3)):
        forms = []
        for _ in range(rng.randint(1, 3)):
            terms = {}
            for j in rng.sample(range(n), rng.randint(1, n)):
                poly_terms = {}
                for _ in range(rng.randint(1, 2)):
                    exps = [0] * n
                    for _ in range(rng.randint(0, 2)):
                        exps[rng.randrange(n)] += 1
                    poly_terms[tuple(exps)] = Fraction(rng.randint(-5, 5), rng.randint(1, 4))
                coeff = RationalFunction.from_polynomial(Polynomial(chart, poly_terms))
                if not coeff.is_zero:
                    terms[(j,)] = coeff
            if terms:
                forms.append(DifferentialForm(chart, 1, terms))
        if forms:
            doc.systems[f"S{s}"] = forms
    for k in range(rng.randint(0, 2)):
        poly_terms = {}
        for _ in range(rng.randint(1, 3)):
            exps = [0] * n
            for _ in range(rng.randint(0, 3)):
                exps[rng.randrange(n)] += 1
            poly_terms[tuple(exps)] = Fraction(rng.randint(-6, 6), rng.randint(1, 3))
        value = RationalFunction.from_polynomial(Polynomial(chart, poly_terms))
        doc.functions[f"f{k}"] = value
    for m in range(rng.randint(0, 2)):
        values = [Fraction(rng.randint(-4, 4), rng.randint(1, 3)) for _ in range(n)]
        doc.points[f"pt{m}"] = PointAssignment(chart, values)
    return doc


class TestRoundTrip:
    def test_simple_render(self):
        doc = parse_document("coords x1 x2\nsystem P\n dx1\n")
        assert render_document(doc) == "coords x1 x2\nsystem P\n dx1\n"

    def test_chart_only(self):
        doc = SystemDocument(chart=Chart(["x1", "x2"]))
        assert render_document(doc) == "coords x1 x2\n"

    def test_five_chart_roundtrip(self):
        text = "coords x1 x2 x3 x4 x5\nsystem P\n dx1 + x4*dx5\n dx2\n dx3\n"
        doc = parse_document(text)
        assert parse_document(render_document(doc)) == doc

    def test_pde_roundtrip(self):
        text = "pde S on n=2\n p1 = x2\n p2 = 0\n"
        doc = parse_document(text)
        assert parse_document(render_document(doc)) == doc

    def test_quotient_coefficients_roundtrip(self):
        text = (
            "coords x1 x2 x3\n"
            "system P\n"
            " x1/x2*dx1 + (x1 + 1)/(2*x2^2)*dx3\n"
            " dx2/x3\n"
            "function g\n"
            " (x1^2 - 1/3)/(x2*x3 + 2)\n"
        )
        doc = parse_document(text)
        assert parse_document(render_document(doc)) == doc

    def test_random_documents_roundtrip(self):
        rng = random.Random(20240809)
        for _ in range(200):
            doc = random_document(rng)
            rendered = render_document(doc)
            reparsed = parse_document(rendered)
            assert reparsed == doc, rendered

    def test_render_deterministic(self):
        rng = random.Random(5)
        for _ in range(20):
            doc = random_document(rng)
            assert render_document(doc) == render_document(doc)


class TestReports:
    def test_digest_and_schema(self):
        report = make_report("class", "coords x1\n", {"class": 1})
        assert report["schema"] == "cartan-eds/1"
        assert report["input_digest"] == input_digest("coords x1\n")
        assert report["diagnostics"] == []

    def test_dump_deterministic(self):
        report = make_report("class", "x", {"b": 1, "a": 2})
        assert dump_report(report) == dump_report(report)
        assert dump_report(report).endswith("\n")

import random
from fractions import Fraction

import pytest

from cartan_eds.chart import Chart, PointAssignment
from cartan_eds.errors import ChartMismatchError, DegreeError, PoleError
from cartan_eds.forms import (
    DifferentialForm,
    VectorField,
    differential,
    exterior_derivative,
    interior_product,
    lie_derivative,
    pairing,
    substitute,
    wedge,
    wedge_all,
)
from cartan_eds.rational import Polynomial, RationalFunction


def chart(n, prefix="x"):
    return Chart([f"{prefix}{i}" for i in range(1, n + 1)])


CH5 = chart(5)


def dx(i, ch=CH5):
    return DifferentialForm.coordinate_differential(ch, i)


def coord(i, ch=CH5):
    return RationalFunction.coordinate(ch, i)


def rand_poly_scalar(rng, ch, max_degree=3):
    terms = {}
    for _ in range(rng.randint(0, 3)):
        exps = [0] * ch.dimension
        for _ in range(rng.randint(0, max_degree)):
            exps[rng.randrange(ch.dimension)] += 1
        terms[tuple(exps)] = Fraction(rng.randint(-3, 3))
    return RationalFunction.from_polynomial(Polynomial(ch, terms))


def rand_form(rng, ch, degree):
    import itertools

    indices = list(itertools.combinations(range(ch.dimension), degree))
    terms = {}
    for idx in rng.sample(indices, k=min(len(indices), rng.randint(1, 3))):
        coeff = rand_poly_scalar(rng, ch)
        if not coeff.is_zero:
            terms[idx] = coeff
    return DifferentialForm(ch, degree, terms)


def rand_field(rng, ch):
    return VectorField(ch, [rand_poly_scalar(rng, ch, 2) for _ in range(ch.dimension)])


class TestWedge:
    def test_basic(self):
        one = RationalFunction.constant(CH5, 1)
        assert wedge(dx(0), dx(1)) == DifferentialForm(CH5, 2, {(0, 1): one})

    def test_bilinearity_example(self):
        a = dx(0) + dx(4).scale(coord(3))
        result = wedge(a, dx(1))
        assert result.terms[(0, 1)] == RationalFunction.constant(CH5, 1)
        assert result.terms[(1, 4)] == -coord(3)

    def test_antisymmetry(self):
        assert wedge(dx(0), dx(0)).is_zero

    def test_graded_anticommutativity_random(self):
        rng = random.Random(31)
        for _ in range(100):
            ch = chart(rng.randint(2, 5))
            p, q = rng.randint(1, 2), rng.randint(1, 2)
            a, b = rand_form(rng, ch, p), rand_form(rng, ch, q)
            lhs = wedge(a, b)
            rhs = wedge(b, a)
            sign = (-1) ** (p * q)
            assert lhs == (rhs if sign == 1 else -rhs)

    def test_associativity_random(self):
        rng = random.Random(32)
        for _ in range(100):
            ch = chart(rng.randint(3, 6))
            forms = [rand_form(rng, ch, rng.randint(1, 2)) for _ in range(3)]
            assert wedge(wedge(forms[0], forms[1]), forms[2]) == wedge(
                forms[0], wedge(forms[1], forms[2])
            )

    def test_chart_mismatch(self):
        with pytest.raises(ChartMismatchError):
            wedge(dx(0), DifferentialForm.coordinate_differential(chart(3), 0))


class TestExteriorDerivative:
    def test_simple(self):
        # d(x2 dx1) = dx2 ∧ dx1 = -dx1 ∧ dx2
        a = dx(0).scale(coord(1))
        assert exterior_derivative(a) == DifferentialForm(
            CH5, 2, {(0, 1): RationalFunction.constant(CH5, -1)}
        )

    def test_sum_with_closed_part(self):
        a = dx(2) + dx(0).scale(coord(1))
        d = exterior_derivative(a)
        assert d == DifferentialForm(CH5, 2, {(0, 1): RationalFunction.constant(CH5, -1)})

    def test_d_squared_zero_simple(self):
        f = coord(0) * coord(1) ** 2
        assert exterior_derivative(differential(f)).is_zero

    def test_d_squared_zero_random(self):
        rng = random.Random(41)
        for _ in range(500):
            ch = chart(rng.randint(2, 6))
            a = rand_form(rng, ch, rng.randint(0, min(3, ch.dimension)))
            assert exterior_derivative(exterior_derivative(a)).is_zero

    def test_leibniz_random(self):
        rng = random.Random(42)
        for _ in range(120):
            ch = chart(rng.randint(2, 5))
            p = rng.randint(1, 2)
            a = rand_form(rng, ch, p)
            b = rand_form(rng, ch, rng.randint(1, 2))
            lhs = exterior_derivative(wedge(a, b))
            rhs = wedge(exterior_derivative(a), b) + (
                wedge(a, exterior_derivative(b)) if p % 2 == 0 else -wedge(a, exterior_derivative(b))
            )
            assert lhs == rhs


class TestInteriorProduct:
    def test_examples(self):
        d45 = wedge(dx(3), dx(4))
        v4 = VectorField.coordinate_field(CH5, 3)
        v5 = VectorField.coordinate_field(CH5, 4)
        assert interior_product(v4, d45) == dx(4)
        assert interior_product(v5, d45) == -dx(3)
        assert interior_product(VectorField.coordinate_field(CH5, 0), dx(1)).is_zero

    def test_nilpotent_and_zero_form(self):
        rng = random.Random(43)
        for _ in range(50):
            ch = chart(4)
            v = rand_field(rng, ch)
            a = rand_form(rng, ch, 3)
            assert interior_product(v, interior_product(v, a)).is_zero
        with pytest.raises(DegreeError):
            interior_product(VectorField.coordinate_field(CH5, 0), DifferentialForm.from_scalar(coord(0)))

    def test_degree_minus_one_derivation(self):
        rng = random.Random(44)
        for _ in range(100):
            ch = chart(rng.randint(2, 5))
            p = rng.randint(1, 2)
            a = rand_form(rng, ch, p)
            b = rand_form(rng, ch, 1)
            v = rand_field(rng, ch)
            lhs = interior_product(v, wedge(a, b))
            rhs = wedge(interior_product(v, a), b) + (
                wedge(a, DifferentialForm.from_scalar(pairing(v, b)))
                if p % 2 == 0
                else -wedge(a, DifferentialForm.from_scalar(pairing(v, b)))
            )
            assert lhs == rhs


class TestLieDerivative:
    def test_examples(self):
        cc = Chart(["x1", "y", "p1"])
        dy = DifferentialForm.coordinate_differential(cc, 1)
        dx1 = DifferentialForm.coordinate_differential(cc, 0)
        p1 = RationalFunction.coordinate(cc, 2)
        omega = dy - dx1.scale(p1)
        ey = VectorField.coordinate_field(cc, 1)
        assert lie_derivative(ey, omega).is_zero

        ch = CH5
        v = VectorField.coordinate_field(ch, 0).scale(coord(0))
        assert lie_derivative(v, dx(0)) == dx(0)

        w = VectorField.coordinate_field(ch, 0)
        assert lie_derivative(w, dx(1).scale(coord(0))) == dx(1)

    def test_commutator_transport_random(self):
        # i([w, v]) = i(w) theta(v) - theta(v) i(w) applied to random forms
        rng = random.Random(45)
        for _ in range(100):
            ch = chart(rng.randint(2, 4))
            v = rand_field(rng, ch)
            w = rand_field(rng, ch)
            a = rand_form(rng, ch, rng.randint(1, 2))
            lhs = interior_product(w.bracket(v), a)
            rhs = interior_product(w, lie_derivative(v, a)) - lie_derivative(
                v, interior_product(w, a)
            )
            assert lhs == rhs


class TestSubstitute:
    def test_solution_graph_annihilates_contact_form(self):
        cc = Chart(["x1", "y", "p1"])
        target = Chart(["x1"])
        dy = DifferentialForm.coordinate_differential(cc, 1)
        dx1 = DifferentialForm.coordinate_differential(cc, 0)
        p1 = RationalFunction.coordinate(cc, 2)
        omega = dy - dx1.scale(p1)
        t = RationalFunction.coordinate(target, 0)
        bindings = {"x1": t, "y": t * t, "p1": t.scale(2)}
        assert substitute(omega, bindings, target).is_zero

    def test_constant_binding(self):
        target = Chart(["u"])
        bindings = {name: RationalFunction.constant(target, i) for i, name in enumerate(CH5.names)}
        assert substitute(dx(2), bindings, target).is_zero

    def test_partial_substitution(self):
        cc = Chart(["x1", "y", "p1"])
        target = Chart(["x1", "y"])
        dy = DifferentialForm.coordinate_differential(cc, 1)
        dx1 = DifferentialForm.coordinate_differential(cc, 0)
        p1 = RationalFunction.coordinate(cc, 2)
        omega = dy - dx1.scale(p1)
        bindings = {
            "x1": RationalFunction.coordinate(target, 0),
            "y": RationalFunction.coordinate(target, 1),
            "p1": RationalFunction.constant(target, 0),
        }
        assert substitute(omega, bindings, target) == DifferentialForm.coordinate_differential(target, 1)

    def test_commutes_with_d_random(self):
        rng = random.Random(46)
        target = chart(3, "u")
        for _ in range(60):
            ch = chart(3)
            a = rand_form(rng, ch, rng.randint(0, 2))
            bindings = {name: rand_poly_scalar(rng, target, 2) for name in ch.names}
            lhs = substitute(exterior_derivative(a), bindings, target)
            rhs = exterior_derivative(substitute(a, bindings, target))
            assert lhs == rhs

    def test_zero_denominator_binding(self):
        target = Chart(["u"])
        f = RationalFunction(Polynomial.constant(CH5, 1), Polynomial.coordinate(CH5, 0))
        form = dx(1).scale(f)
        bindings = {name: RationalFunction.constant(target, 0) for name in CH5.names}
        with pytest.raises(PoleError):
            substitute(form, bindings, target)

import random
from fractions import Fraction

import pytest

from cartan_eds.chart import Chart, PointAssignment
from cartan_eds.forms import DifferentialForm, VectorField
from cartan_eds.formlang import parse_form
from cartan_eds.linalg import generic_rank, kernel_at_point, pointwise_rank
from cartan_eds.rational import RationalFunction

CH5 = Chart(["x1", "x2", "x3", "x4", "x5"])


def forms(*texts, chart=CH5):
    return [parse_form(t, chart) for t in texts]


class TestGenericRank:
    def test_full_rank(self):
        rank, cert = generic_rank(forms("dx1", "dx2", "dx3"))
        assert rank == 3
        assert len(cert.minors) == 3

    def test_proportional_rows(self):
        rank, _ = generic_rank(forms("dx1", "x1*dx1"))
        assert rank == 1

    def test_twisted_rows_full_rank(self):
        rank, cert = generic_rank(forms("dx1 + x4*dx5", "dx2", "dx3", "dx4", "dx5"))
        assert rank == 5
        assert cert.pivot_columns[0] == (0,)

    def test_empty(self):
        rank, cert = generic_rank([])
        assert rank == 0 and cert.minors == ()

    def test_certificate_bounds_pointwise_rank(self):
        rng = random.Random(55)
        rows = forms("x1*dx1 + dx2", "x2*dx1", "dx3 + x1*x2*dx4")
        rank, cert = generic_rank(rows)
        assert rank == 3
        for _ in range(25):
            point = PointAssignment(CH5, [Fraction(rng.randint(-5, 5)) for _ in range(5)])
            pw = pointwise_rank(rows, point)
            assert pw <= rank
            if cert.holds_at(point):
                assert pw == rank
        origin = PointAssignment.origin(CH5)
        assert not cert.holds_at(origin)  # x2 minor vanishes there
        assert pointwise_rank(rows, origin) == 2


class TestKernelAtPoint:
    def test_two_axis_rows(self):
        point = PointAssignment(CH5, [Fraction(1), Fraction(2), Fraction(3), Fraction(4), Fraction(5)])
        basis = kernel_at_point(forms("dx2", "dx3"), point)
        assert len(basis) == 3
        values = {tuple(f.constant_value() for f in v.components) for v in basis}
        assert (Fraction(1), 0, 0, 0, 0) in values
        assert (0, 0, 0, Fraction(1), 0) in values
        assert (0, 0, 0, 0, Fraction(1)) in values

    def test_twisted_system_kernel_at_origin(self):
        basis = kernel_at_point(
            forms("dx1 + x4*dx5", "dx2", "dx3"), PointAssignment.origin(CH5)
        )
        values = sorted(tuple(f.constant_value() for f in v.components) for v in basis)
        assert values == [
            (0, 0, 0, Fraction(0), Fraction(1)),
            (0, 0, 0, Fraction(1), Fraction(0)),
        ]

    def test_empty_rows_full_tangent_space(self):
        basis = kernel_at_point([], PointAssignment.origin(CH5))
        assert len(basis) == 5

"""Contact geometry on jet charts.

First-order machinery: the contact system, the hamiltonian <-> Lie
vector field correspondence, Lagrange/Jacobi brackets, prolongation,
characteristic fields of single equations, bracket integrability and
restriction of PDE systems in graph form.  Higher-order charts carry
contact-form generation and total derivatives only.

Bracket sign conventions follow the coherent core (the definitions
through the field of a hamiltonian and its adjoint action), under which
the Lagrange bracket is exactly the hamiltonian of the commutator; the
printed coordinate form of the Jacobi bracket elsewhere differs from
these by an overall sign, which is asserted in the tests rather than
adopted.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from math import comb
from typing import Mapping, Sequence

from .chart import Chart, PointAssignment
from .errors import ChartMismatchError, MathError, RegularityError
from .forms import (
    DifferentialForm,
    VectorField,
    differential,
    lie_derivative,
    pairing,
    substitute,
    wedge,
)
from .linalg import generic_rank
from .pfaffian import PfaffianSystem, structure_congruences  # re-exported surface
from .rational import Polynomial, RationalFunction

__all__ = [
    "ContactChart",
    "Hamiltonian",
    "PDESystem",
    "build_contact_system",
    "total_derivative",
    "lie_field_from_hamiltonian",
    "hamiltonian_of_field",
    "prolong_vector_field",
    "jacobi_bracket",
    "lagrange_bracket",
    "commutator_hamiltonian",
    "cauchy_char_field",
    "integrability_check",
    "IntegrabilityVerdict",
    "sample_points_on_graph",
    "restrict_system",
    "complete_system_check",
    "structure_congruences",
]


def _multi_indices(n: int, order: int) -> list[tuple[int, ...]]:
    """Nondecreasing index tuples of the given length, lexicographic."""
    return list(itertools.combinations_with_replacement(range(1, n + 1), order))


def _p_name(indices: tuple[int, ...]) -> str:
    if all(i <= 9 for i in indices):
        return "p" + "".join(str(i) for i in indices)
    return "p" + "_".join(str(i) for i in indices)


class ContactChart:
    """Jet coordinates x^1..x^n, y, and p-coordinates up to a given order."""

    __slots__ = ("n", "order", "chart", "p_slots")

    def __init__(self, n: int, order: int = 1):
        if n < 1 or order < 1:
            raise MathError("contact charts need n >= 1 and order >= 1")
        names = [f"x{i}" for i in range(1, n + 1)] + ["y"]
        p_slots: dict[tuple[int, ...], int] = {}
        for j in range(1, order + 1):
            for idx in _multi_indices(n, j):
                p_slots[idx] = len(names)
                names.append(_p_name(idx))
        self.n = n
        self.order = order
        self.chart = Chart(names)
        self.p_slots = p_slots

    @property
    def dimension(self) -> int:
        return self.chart.dimension

    def x_slot(self, i: int) -> int:
        if not 1 <= i <= self.n:
            raise MathError(f"x index {i} out of range")
        return i - 1

    @property
    def y_slot(self) -> int:
        return self.n

    def p_slot(self, indices: Sequence[int]) -> int:
        key = tuple(sorted(indices))
        try:
            return self.p_slots[key]
        except KeyError:
            raise MathError(f"no jet coordinate for index {key} at order {self.order}") from None

    def scalar(self, value) -> RationalFunction:
        return RationalFunction.constant(self.chart, value)

    def coordinate(self, slot: int) -> RationalFunction:
        return RationalFunction.coordinate(self.chart, slot)

    def contact_form(self) -> DifferentialForm:
        """omega = dy - sum p_i dx^i."""
        chart = self.chart
        form = DifferentialForm.coordinate_differential(chart, self.y_slot)
        for i in range(1, self.n + 1):
            p_i = RationalFunction.coordinate(chart, self.p_slot((i,)))
            form = form - DifferentialForm.coordinate_differential(chart, self.x_slot(i)).scale(p_i)
        return form

    def __eq__(self, other) -> bool:
        return isinstance(other, ContactChart) and self.n == other.n and self.order == other.order

    def __repr__(self) -> str:
        return f"ContactChart(n={self.n}, order={self.order})"

    @classmethod
    def recognize(cls, chart: Chart) -> "ContactChart":
        """Recover (n, order) from a chart whose names follow the jet scheme."""
        names = list(chart.names)
        n = 0
        while n < len(names) and names[n] == f"x{n+1}":
            n += 1
        if n == 0 or n >= len(names) or names[n] != "y":
            raise MathError("chart does not look like a jet chart (expected x1..xn then y)")
        order = 1
        while order <= 8:
            candidate = cls(n, order)
            if list(candidate.chart.names) == names:
                return candidate
            order += 1
        raise MathError("chart does not match any jet chart up to order 8")


@dataclass(frozen=True)
class Hamiltonian:
    """Scalar contact hamiltonian on an order-1 jet chart."""

    chart: ContactChart
    f: RationalFunction

    def __post_init__(self):
        if self.chart.order != 1:
            raise MathError("hamiltonians live on order-1 contact charts")
        if self.f.chart != self.chart.chart:
            raise ChartMismatchError("hamiltonian scalar lives off its contact chart")

    def diff_x(self, i: int) -> RationalFunction:
        return self.f.diff(self.chart.x_slot(i))

    def diff_y(self) -> RationalFunction:
        return self.f.diff(self.chart.y_slot)

    def diff_p(self, i: int) -> RationalFunction:
        return self.f.diff(self.chart.p_slot((i,)))


def build_contact_system(n: int, order: int) -> PfaffianSystem:
    """Canonical contact system on the jet chart of the given order.

    Generators: dy - sum p_i dx^i and dp_J - sum p_{J,m} dx^m for every
    multi-index J of length below the top order.
    """
    cc = ContactChart(n, order)
    chart = cc.chart
    generators = [cc.contact_form()]
    for j in range(1, order):
        for idx in _multi_indices(n, j):
            form = DifferentialForm.coordinate_differential(chart, cc.p_slot(idx))
            for m in range(1, n + 1):
                upper = RationalFunction.coordinate(chart, cc.p_slot(idx + (m,)))
                form = form - DifferentialForm.coordinate_differential(chart, cc.x_slot(m)).scale(upper)
            generators.append(form)
    expected = 1 + sum(comb(n + j - 1, j) for j in range(1, order))
    assert len(generators) == expected
    return PfaffianSystem(chart, generators)


def total_derivative(f: RationalFunction, i: int, chart: ContactChart) -> RationalFunction:
    """Total derivative D_i, landing on the chart one order higher."""
    if f.chart != chart.chart:
        raise ChartMismatchError("function lives off the given contact chart")
    higher = ContactChart(chart.n, chart.order + 1)
    index_map = chart.chart.embedding_into(higher.chart)
    lifted = f.map_chart(higher.chart, index_map)
    result = lifted.diff(higher.x_slot(i))
    p_i = RationalFunction.coordinate(higher.chart, higher.p_slot((i,)))
    result = result + p_i * lifted.diff(higher.y_slot)
    for idx, slot in chart.p_slots.items():
        partial = f.diff(slot)
        if partial.is_zero:
            continue
        upper = RationalFunction.coordinate(higher.chart, higher.p_slot(idx + (i,)))
        result = result + upper * partial.map_chart(higher.chart, index_map)
    return result


def lie_field_from_hamiltonian(h: Hamiltonian) -> VectorField:
    """The unique field with i(xi)omega = f and (df + i(xi)d omega) ∧ omega = 0."""
    cc = h.chart
    chart = cc.chart
    zero = RationalFunction.constant(chart, 0)
    comps = [zero] * chart.dimension
    sum_fp_p = zero
    for i in range(1, cc.n + 1):
        f_pi = h.diff_p(i)
        comps[cc.x_slot(i)] = -f_pi
        p_i = RationalFunction.coordinate(chart, cc.p_slot((i,)))
        sum_fp_p = sum_fp_p + f_pi * p_i
        comps[cc.p_slot((i,))] = h.diff_x(i) + p_i * h.diff_y()
    comps[cc.y_slot] = h.f - sum_fp_p
    return VectorField(chart, comps)


def hamiltonian_of_field(xi: VectorField, cc: ContactChart) -> tuple[Hamiltonian, bool]:
    """Contraction with the contact form, plus the Lie-field flag."""
    if xi.chart != cc.chart:
        raise ChartMismatchError("field lives off the contact chart")
    omega = cc.contact_form()
    f = pairing(xi, omega)
    is_lie = wedge(lie_derivative(xi, omega), omega).is_zero
    return Hamiltonian(cc, f), is_lie


def prolong_vector_field(
    a: Sequence[RationalFunction], b: RationalFunction, cc: ContactChart
) -> VectorField:
    """Prolongation of a base field sum a^i d/dx^i + b d/dy to the jet chart."""
    if len(a) != cc.n:
        raise MathError(f"need {cc.n} x-components")
    banned = {cc.p_slot((i,)) for i in range(1, cc.n + 1)}
    for comp in list(a) + [b]:
        if comp.chart != cc.chart:
            raise ChartMismatchError("components live off the contact chart")
        used = comp.num.variables() | comp.den.variables()
        if used & banned:
            raise MathError("base field components must not depend on the p coordinates")
    f = b
    for i in range(1, cc.n + 1):
        p_i = RationalFunction.coordinate(cc.chart, cc.p_slot((i,)))
        f = f - p_i * a[i - 1]
    return lie_field_from_hamiltonian(Hamiltonian(cc, f))


def jacobi_bracket(f: Hamiltonian, g: Hamiltonian) -> RationalFunction:
    """{f, g} = xi_f(g) - f g_y (the adjoint-action bracket)."""
    if f.chart != g.chart:
        raise ChartMismatchError("hamiltonians on different charts")
    xi = lie_field_from_hamiltonian(f)
    return xi.apply(g.f) - f.f * g.diff_y()


def lagrange_bracket(f: Hamiltonian, g: Hamiltonian) -> RationalFunction:
    """[f, g] = {f, g} + f g_y - g f_y; the hamiltonian of [xi_f, xi_g]."""
    if f.chart != g.chart:
        raise ChartMismatchError("hamiltonians on different charts")
    xi = lie_field_from_hamiltonian(f)
    return xi.apply(g.f) - g.f * f.diff_y()


def commutator_hamiltonian(f: Hamiltonian, g: Hamiltonian) -> RationalFunction:
    """<[xi_f, xi_g], omega>, computed through the actual commutator."""
    xi_f = lie_field_from_hamiltonian(f)
    xi_g = lie_field_from_hamiltonian(g)
    return pairing(xi_f.bracket(xi_g), f.chart.contact_form())


@dataclass(frozen=True)
class PDESystem:
    """First-order system F_alpha = 0 on an order-1 jet chart.

    `graph` optionally solves equations as p_i = g_i (keys are x-indices);
    graph right sides must not involve any solved p coordinate.
    """

    chart: ContactChart
    equations: tuple[Hamiltonian, ...]
    graph: Mapping[int, RationalFunction] | None = None

    def __post_init__(self):
        if self.chart.order != 1:
            raise MathError("PDE systems live on order-1 contact charts")
        q = len(self.equations)
        if q > self.chart.n + 1:
            raise MathError(f"at most n+1 = {self.chart.n + 1} independent equations make sense")
        for eq in self.equations:
            if eq.chart != self.chart:
                raise ChartMismatchError("equation lives off the system chart")
        if self.graph is not None:
            solved = set(self.graph.keys())
            if len(solved) != len(self.equations):
                raise MathError("graph form must solve exactly one p per equation")
            banned = {self.chart.p_slot((i,)) for i in solved}
            for i, rhs in self.graph.items():
                used = rhs.num.variables() | rhs.den.variables()
                if used & banned:
                    raise MathError("graph right sides must be free of the solved p coordinates")
        rank, _ = generic_rank([differential(eq.f) for eq in self.equations])
        if rank != q:
            raise MathError("the dF_alpha are generically dependent")

    @classmethod
    def from_graph(cls, chart: ContactChart, rows: Mapping[int, RationalFunction]) -> "PDESystem":
        equations = []
        for i in sorted(rows):
            p_i = RationalFunction.coordinate(chart.chart, chart.p_slot((i,)))
            equations.append(Hamiltonian(chart, p_i - rows[i]))
        return cls(chart, tuple(equations), dict(rows))

    @property
    def q(self) -> int:
        return len(self.equations)

    def graph_substitution(self) -> dict[str, RationalFunction]:
        """Coordinate bindings onto the reduced chart of the graph form."""
        if self.graph is None:
            raise MathError("system has no graph form")
        solved_names = {self.chart.chart.names[self.chart.p_slot((i,))] for i in self.graph}
        reduced = Chart([name for name in self.chart.chart.names if name not in solved_names])
        index_map = [reduced.index(name) if name in reduced else -1 for name in self.chart.chart.names]
        bindings: dict[str, RationalFunction] = {}
        for name in self.chart.chart.names:
            if name in solved_names:
                continue
            bindings[name] = RationalFunction.coordinate(reduced, reduced.index(name))
        for i, rhs in self.graph.items():
            name = self.chart.chart.names[self.chart.p_slot((i,))]
            bindings[name] = _project_scalar(rhs, reduced, index_map)
        return bindings


def _project_scalar(f: RationalFunction, target: Chart, index_map: Sequence[int]) -> RationalFunction:
    """Map a scalar onto a smaller chart; slots mapped to -1 must be unused."""
    used = f.num.variables() | f.den.variables()
    for slot in used:
        if index_map[slot] < 0:
            raise MathError("scalar depends on a removed coordinate")

    def project_poly(p):
        terms = {}
        for exps, coeff in p.terms.items():
            out = [0] * target.dimension
            for s, e in enumerate(exps):
                if e:
                    out[index_map[s]] = e
            terms[tuple(out)] = coeff
        return Polynomial(target, terms)

    return RationalFunction(project_poly(f.num), project_poly(f.den))


def cauchy_char_field(system: PDESystem) -> VectorField:
    """Characteristic ODE field of a single equation F.

    Components (F_{p_i}; sum p_i F_{p_i}; -(F_{x^i} + p_i F_y)) — equal to
    F xi_0 - xi_F, hence it annihilates omega and dF identically.
    """
    if system.q != 1:
        raise MathError("characteristic field applies to a single equation")
    F = system.equations[0]
    cc = system.chart
    omega = cc.contact_form()
    if wedge(differential(F.f), omega).is_zero:
        raise RegularityError("dF ∧ omega vanishes identically; the equation is degenerate")
    chart = cc.chart
    zero = RationalFunction.constant(chart, 0)
    comps = [zero] * chart.dimension
    y_comp = zero
    for i in range(1, cc.n + 1):
        F_pi = F.diff_p(i)
        p_i = RationalFunction.coordinate(chart, cc.p_slot((i,)))
        comps[cc.x_slot(i)] = F_pi
        comps[cc.p_slot((i,))] = -(F.diff_x(i) + p_i * F.diff_y())
        y_comp = y_comp + p_i * F_pi
    comps[cc.y_slot] = y_comp
    return VectorField(chart, comps)


@dataclass(frozen=True)
class IntegrabilityVerdict:
    integrable: bool
    exact: bool  # True for graph-form verdicts, False for sampled-only ones
    obstructions: tuple[tuple[int, int, RationalFunction], ...] = ()
    note: str = ""


def sample_points_on_graph(
    system: PDESystem, count: int = 8, seed: int = 0
) -> list[PointAssignment]:
    """Random rational points on a graph-form system.

    Free coordinates get small random rationals; the solved p's are
    evaluated from the graph right sides.  Draws that hit a pole of a
    right side are skipped.
    """
    import random as _random

    if system.graph is None:
        raise MathError("sampling needs the graph form")
    rng = _random.Random(seed)
    chart = system.chart.chart
    solved_slots = {system.chart.p_slot((i,)): i for i in system.graph}
    points: list[PointAssignment] = []
    attempts = 0
    while len(points) < count and attempts < 50 * count:
        attempts += 1
        values = [Fraction(0)] * chart.dimension
        for slot in range(chart.dimension):
            if slot not in solved_slots:
                values[slot] = Fraction(rng.randint(-6, 6), rng.randint(1, 3))
        try:
            for slot, i in solved_slots.items():
                values[slot] = system.graph[i].evaluate(values)
        except MathError:
            continue
        points.append(PointAssignment(chart, values))
    if len(points) < count:
        raise MathError("could not sample enough points off the coefficient poles")
    return points


def integrability_check(
    system: PDESystem,
    sample_points: Sequence[PointAssignment] | None = None,
) -> IntegrabilityVerdict:
    """Bracket test: integrable iff every [F_a, F_b] vanishes on the system.

    Graph form restricts brackets exactly; otherwise sample points give a
    sound refutation but only a "no obstruction found" confirmation.
    """
    obstructions: list[tuple[int, int, RationalFunction]] = []
    if system.graph is not None:
        bindings = system.graph_substitution()
        reduced_chart = next(iter(bindings.values())).chart
        images = [bindings[name] for name in system.chart.chart.names]
        for a, b in itertools.combinations(range(system.q), 2):
            bracket = lagrange_bracket(system.equations[a], system.equations[b])
            restricted = bracket.compose(images)
            if not restricted.is_zero:
                obstructions.append((a, b, restricted))
        if obstructions:
            return IntegrabilityVerdict(False, True, tuple(obstructions))
        return IntegrabilityVerdict(True, True)
    if not sample_points:
        raise MathError("need a graph form or sample points")
    chart = system.chart.chart
    for a, b in itertools.combinations(range(system.q), 2):
        bracket = lagrange_bracket(system.equations[a], system.equations[b])
        for point in sample_points:
            on_surface = all(eq.f.evaluate(point.values) == 0 for eq in system.equations)
            if not on_surface:
                raise MathError("sample point does not lie on the system")
            value = bracket.evaluate(point.values)
            if value:
                obstructions.append((a, b, RationalFunction.constant(chart, value)))
                break
    if obstructions:
        return IntegrabilityVerdict(False, True, tuple(obstructions))
    return IntegrabilityVerdict(
        True, False, note="no obstruction found at sampled points"
    )


def restrict_system(system: PDESystem) -> PfaffianSystem:
    """Contact system pulled back to the graph of the solved equations."""
    if system.graph is None:
        raise MathError("restriction needs the graph form")
    bindings = system.graph_substitution()
    reduced_chart = next(iter(bindings.values())).chart
    omega = system.chart.contact_form()
    restricted = substitute(omega, bindings, reduced_chart)
    return PfaffianSystem(reduced_chart, [restricted])


@dataclass(frozen=True)
class CompletenessVerdict:
    complete: bool
    failing_pair: tuple[int, int] | None = None
    commutator_outside: tuple[int, int] | None = None


def complete_system_check(hamiltonians: Sequence[Hamiltonian]) -> CompletenessVerdict:
    """Lie's completeness test for the reduced fields xi_f - f xi_0.

    Requires pairwise vanishing Jacobi brackets; then checks the spanned
    distribution is involutive over the function field.
    """
    if not hamiltonians:
        raise MathError("need at least one hamiltonian")
    cc = hamiltonians[0].chart
    for h in hamiltonians[1:]:
        if h.chart != cc:
            raise ChartMismatchError("hamiltonians on different charts")
    for a, b in itertools.combinations(range(len(hamiltonians)), 2):
        if not jacobi_bracket(hamiltonians[a], hamiltonians[b]).is_zero:
            return CompletenessVerdict(False, failing_pair=(a, b))
    chart = cc.chart
    xi0 = VectorField.coordinate_field(chart, cc.y_slot)
    fields = []
    for h in hamiltonians:
        fields.append(lie_field_from_hamiltonian(h) - xi0.scale(h.f))
    base_rows = [
        DifferentialForm(chart, 1, {(j,): c for j, c in enumerate(field.components) if not c.is_zero})
        for field in fields
    ]
    base_rank, _ = generic_rank(base_rows)
    for a, b in itertools.combinations(range(len(fields)), 2):
        commutator = fields[a].bracket(fields[b])
        row = DifferentialForm(chart, 1, {(j,): c for j, c in enumerate(commutator.components) if not c.is_zero})
        rank, _ = generic_rank(base_rows + [row])
        if rank != base_rank:
            return CompletenessVerdict(False, commutator_outside=(a, b))
    return CompletenessVerdict(True)

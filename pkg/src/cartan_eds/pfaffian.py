"""Structural invariants of Pfaffian systems.

Generic computations run over the rational-function field and carry
pivot-minor certificates bounding where they may fail; pointwise
variants take an explicit rational point.  Nothing here assumes
regularity silently.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .chart import Chart, PointAssignment
from .errors import (
    CancelledError,
    ChartMismatchError,
    DegreeError,
    MathError,
    RankDeficiencyError,
)
from .forms import (
    DifferentialForm,
    VectorField,
    exterior_derivative,
    interior_product,
    wedge,
    wedge_all,
    wedge_power,
)
from .linalg import (
    IncrementalSpan,
    clear_denominators,
    function_kernel,
    function_kernel_of_forms,
    generic_rank,
    kernel_at_point,
    kernel_basis,
    pointwise_rank,
    rref,
)
from .rational import Polynomial, RationalFunction


class CancelToken:
    """Cooperative cancellation for long-running computations."""

    __slots__ = ("_cancelled",)

    def __init__(self) -> None:
        self._cancelled = False

    def cancel(self) -> None:
        self._cancelled = True

    @property
    def cancelled(self) -> bool:
        return self._cancelled

    def check(self) -> None:
        if self._cancelled:
            raise CancelledError("computation cancelled")


def _check_token(token: CancelToken | None) -> None:
    if token is not None:
        token.check()


class PfaffianSystem:
    """Finite generator list of 1-forms with cached generic-rank data."""

    __slots__ = ("chart", "generators", "rank", "certificate")

    def __init__(self, chart: Chart, generators: Sequence[DifferentialForm]):
        generators = tuple(generators)
        for gen in generators:
            if gen.chart != chart:
                raise ChartMismatchError("generator lives on a different chart")
            if gen.degree != 1:
                raise DegreeError("Pfaffian generators must be 1-forms")
        self.chart = chart
        self.generators = generators
        self.rank, self.certificate = generic_rank(generators)

    @classmethod
    def from_forms(cls, generators: Sequence[DifferentialForm]) -> "PfaffianSystem":
        if not generators:
            raise DegreeError("cannot infer the chart of an empty system; pass it explicitly")
        return cls(generators[0].chart, generators)

    @property
    def is_independent(self) -> bool:
        return self.rank == len(self.generators)

    @property
    def is_zero(self) -> bool:
        return self.rank == 0

    def section(self, coefficients: Sequence[RationalFunction]) -> DifferentialForm:
        """Linear combination of the generators."""
        if len(coefficients) != len(self.generators):
            raise DegreeError("one coefficient per generator")
        acc = DifferentialForm(self.chart, 1)
        for f, gen in zip(coefficients, self.generators):
            acc = acc + gen.scale(f)
        return acc

    def top_wedge(self) -> DifferentialForm:
        return wedge_all(self.generators)

    def independent_subsystem(self) -> "PfaffianSystem":
        """A generically independent generator subset spanning the system."""
        if self.is_independent:
            return self
        span = IncrementalSpan(self.chart, self.chart.dimension)
        chosen: list[DifferentialForm] = []
        for gen in self.generators:
            if span.add_form(gen):
                chosen.append(gen)
            if span.rank == self.rank:
                break
        return PfaffianSystem(self.chart, chosen)

    def annihilator_basis(self) -> list[VectorField]:
        """Generic annihilator sections (function-field kernel basis)."""
        if not self.generators:
            return [VectorField.coordinate_field(self.chart, i) for i in range(self.chart.dimension)]
        return function_kernel_of_forms(self.generators)

    def kernel_at(self, point: PointAssignment) -> list[VectorField]:
        return kernel_at_point(self.generators, point)

    def rank_at(self, point: PointAssignment) -> int:
        return pointwise_rank(self.generators, point)

    def __repr__(self) -> str:  # pragma: no cover - debugging aid
        gens = ", ".join(str(g) for g in self.generators)
        return f"PfaffianSystem[{gens}]"


def _require_independent(system: PfaffianSystem) -> None:
    if not system.is_independent:
        raise RankDeficiencyError(
            f"generators are generically dependent (rank {system.rank} < "
            f"{len(system.generators)}); pass a reduced generator list"
        )


# -- coframe expansion --------------------------------------------------


class CoframeDecomposition:
    """Rewrites forms in the wedge basis of (generators, complement).

    The complement defaults to pivoted coordinate differentials.  The
    rewrite happens on an extended chart whose extra coordinates stand
    for the coframe elements, so dropped and retained parts are read off
    from wedge indices.
    """

    def __init__(
        self,
        system: PfaffianSystem,
        complement: Sequence[DifferentialForm] | None = None,
    ):
        _require_independent(system)
        chart = system.chart
        n = chart.dimension
        r = len(system.generators)
        if complement is None:
            zero = RationalFunction.constant(chart, 0)
            matrix = [[gen.terms.get((j,), zero) for j in range(n)] for gen in system.generators]
            _, pivots = rref(matrix, zero, RationalFunction.constant(chart, 1))
            free = [j for j in range(n) if j not in pivots]
            complement = [DifferentialForm.coordinate_differential(chart, j) for j in free]
            self.complement_coordinates: list[int] | None = free
        else:
            complement = list(complement)
            self.complement_coordinates = None
            coords = []
            for form in complement:
                if form.degree != 1:
                    raise DegreeError("coframe complement must consist of 1-forms")
                keys = list(form.terms.keys())
                if len(keys) == 1 and form.terms[keys[0]] == RationalFunction.constant(chart, 1):
                    coords.append(keys[0][0])
                else:
                    coords = None
                    break
            if coords is not None and len(coords) == len(complement):
                self.complement_coordinates = coords
        s = len(complement)
        if r + s != n:
            raise RankDeficiencyError(
                f"coframe size mismatch: {r} generators + {s} complement forms != dimension {n}"
            )
        everything = list(system.generators) + list(complement)
        total_rank, certificate = generic_rank(everything)
        if total_rank != n:
            raise RankDeficiencyError(
                f"generators and complement do not form a coframe (rank {total_rank} < {n})",
            )
        self.system = system
        self.complement = list(complement)
        self.certificate = certificate

        zero = RationalFunction.constant(chart, 0)
        rows = [[form.terms.get((j,), zero) for j in range(n)] for form in everything]
        self._theta_names = self._fresh_theta_names(chart, r, s)
        self.ext_chart = chart.extend(self._theta_names)
        self._embed = list(range(chart.dimension))
        binv = _invert_matrix(rows, chart)
        self._dx_images: list[DifferentialForm] = []
        for j in range(n):
            terms = {}
            for b in range(n):
                coeff = binv[j][b]
                if coeff.is_zero:
                    continue
                terms[(n + b,)] = coeff.map_chart(self.ext_chart, self._embed)
            self._dx_images.append(DifferentialForm(self.ext_chart, 1, terms))

    @staticmethod
    def _fresh_theta_names(chart: Chart, r: int, s: int) -> list[str]:
        wnames = chart.fresh_names("gen_", r)
        cnames = chart.extend(wnames).fresh_names("co_", s)
        return wnames + cnames

    @property
    def chart(self) -> Chart:
        return self.system.chart

    def generator_slot(self, i: int) -> int:
        return self.chart.dimension + i

    def complement_slot(self, j: int) -> int:
        return self.chart.dimension + len(self.system.generators) + j

    def expand(self, form: DifferentialForm) -> DifferentialForm:
        """Form rewritten with differentials only in coframe slots."""
        if form.chart != self.chart:
            raise ChartMismatchError("form lives on a different chart")
        result = DifferentialForm(self.ext_chart, form.degree)
        for idx, coeff in form.terms.items():
            term = DifferentialForm.from_scalar(coeff.map_chart(self.ext_chart, self._embed))
            for i in idx:
                term = wedge(term, self._dx_images[i])
            result = result + term
        return result

    def split_generator_terms(self, expanded: DifferentialForm) -> tuple[DifferentialForm, DifferentialForm]:
        """(terms containing a generator slot, pure-complement terms)."""
        n = self.chart.dimension
        r = len(self.system.generators)
        with_gen: dict = {}
        pure: dict = {}
        for idx, coeff in expanded.terms.items():
            if any(n <= i < n + r for i in idx):
                with_gen[idx] = coeff
            else:
                pure[idx] = coeff
        return (
            DifferentialForm(self.ext_chart, expanded.degree, with_gen),
            DifferentialForm(self.ext_chart, expanded.degree, pure),
        )

    def pure_part_on_chart(self, pure: DifferentialForm) -> DifferentialForm:
        """Map a pure-complement expansion back to the base chart.

        Only available when the complement consists of coordinate
        differentials (the default pivoted choice).
        """
        if self.complement_coordinates is None:
            raise MathError("complement is not made of coordinate differentials")
        n = self.chart.dimension
        r = len(self.system.generators)
        back: dict = {}
        shrink = list(range(n))  # identity on base slots
        for idx, coeff in pure.terms.items():
            mapped = []
            for i in idx:
                mapped.append(self.complement_coordinates[i - n - r])
            order = sorted(range(len(mapped)), key=lambda k: mapped[k])
            sign = _perm_sign([mapped[k] for k in order], mapped)
            new_idx = tuple(sorted(mapped))
            base_coeff = _restrict_to_base(coeff, self.chart)
            back[new_idx] = back.get(new_idx, RationalFunction.constant(self.chart, 0)) + base_coeff.scale(sign)
        return DifferentialForm(self.chart, pure.degree, {k: v for k, v in back.items() if not v.is_zero})


def _perm_sign(sorted_vals: list[int], vals: list[int]) -> int:
    sign = 1
    work = list(vals)
    for i in range(len(work)):
        if work[i] != sorted_vals[i]:
            j = work.index(sorted_vals[i], i + 1)
            work[i], work[j] = work[j], work[i]
            sign = -sign
    return sign


def _restrict_to_base(f: RationalFunction, base: Chart) -> RationalFunction:
    """Strip trailing extension slots from a scalar that does not use them."""
    n = base.dimension
    for exps in list(f.num.terms) + list(f.den.terms):
        if any(exps[i] for i in range(n, len(exps))):
            raise MathError("coefficient unexpectedly involves coframe slots")
    index_map = list(range(n))
    num = Polynomial(base, {e[:n]: c for e, c in f.num.terms.items()})
    den = Polynomial(base, {e[:n]: c for e, c in f.den.terms.items()})
    return RationalFunction(num, den)


def _invert_matrix(rows: list[list[RationalFunction]], chart: Chart) -> list[list[RationalFunction]]:
    """Inverse of a square matrix over the function field."""
    n = len(rows)
    zero = RationalFunction.constant(chart, 0)
    one = RationalFunction.constant(chart, 1)
    augmented = [list(rows[i]) + [one if k == i else zero for k in range(n)] for i in range(n)]
    reduced, pivots = rref(augmented, zero, one)
    if len(pivots) != n or pivots != list(range(n)):
        raise RankDeficiencyError("matrix is singular over the function field")
    # rref([B | I]) = [I | B^{-1}]; with theta = B dx this gives dx = B^{-1} theta
    return [[reduced[j][n + b] for b in range(n)] for j in range(n)]


# -- ideal membership and congruences -----------------------------------


def ideal_wedge_test(form: DifferentialForm, system: PfaffianSystem) -> bool:
    """True iff form ∧ ω¹ ∧ … ∧ ω^r = 0 (membership at generic points)."""
    if not system.generators:
        return form.is_zero
    return wedge(form, system.top_wedge()).is_zero


def reduce_mod_system(
    form: DifferentialForm, system: PfaffianSystem
) -> tuple[DifferentialForm, bool]:
    """Representative of `form` modulo the algebraic ideal of the system.

    Returns (representative, zero_flag); the representative is written in
    the pivoted complement coordinate differentials with all
    generator-containing terms dropped.
    """
    _require_independent(system)
    if form.chart != system.chart:
        raise ChartMismatchError("form and system on different charts")
    zero_flag = ideal_wedge_test(form, system)
    if not system.generators:
        return form, zero_flag
    decomposition = CoframeDecomposition(system)
    expanded = decomposition.expand(form)
    _, pure = decomposition.split_generator_terms(expanded)
    representative = decomposition.pure_part_on_chart(pure)
    return representative, zero_flag


@dataclass(frozen=True)
class CongruenceTerm:
    left: tuple[str, int]   # ("omega", i) or ("coframe", j), 0-based
    right: tuple[str, int]
    coefficient: RationalFunction


@dataclass(frozen=True)
class CongruenceTable:
    system: PfaffianSystem
    complement: tuple[DifferentialForm, ...]
    modulo: tuple[int, ...]
    rows: tuple[tuple[CongruenceTerm, ...], ...]


def structure_congruences(
    system: PfaffianSystem,
    modulo: Sequence[int] | None = None,
    complement: Sequence[DifferentialForm] | None = None,
) -> CongruenceTable:
    """dω^i expanded in the coframe wedge basis, modulo chosen generators.

    `modulo` lists 0-based generator indices whose wedge terms are
    dropped; the rewrite is exact before dropping.
    """
    _require_independent(system)
    decomposition = CoframeDecomposition(system, complement)
    n = system.chart.dimension
    r = len(system.generators)
    modulo = tuple(sorted(set(modulo if modulo is not None else range(r))))
    for m in modulo:
        if not 0 <= m < r:
            raise MathError(f"modulo index {m} out of range")
    rows: list[tuple[CongruenceTerm, ...]] = []

    def classify(slot: int) -> tuple[str, int]:
        if slot < n + r:
            return ("omega", slot - n)
        return ("coframe", slot - n - r)

    for gen in system.generators:
        expanded = decomposition.expand(exterior_derivative(gen))
        terms: list[CongruenceTerm] = []
        for idx, coeff in sorted(expanded.terms.items()):
            kinds = [classify(i) for i in idx]
            if any(kind == "omega" and pos in modulo for kind, pos in kinds):
                continue
            base_coeff = _restrict_to_base(coeff, system.chart)
            terms.append(CongruenceTerm(kinds[0], kinds[1], base_coeff))
        rows.append(tuple(terms))
    return CongruenceTable(system, tuple(decomposition.complement), modulo, tuple(rows))


# -- derived systems -----------------------------------------------------


def derived_system(system: PfaffianSystem, token: CancelToken | None = None) -> PfaffianSystem:
    """Subsystem of sections whose differentials vanish modulo the system."""
    _require_independent(system)
    _check_token(token)
    if not system.generators:
        return system
    chart = system.chart
    decomposition = CoframeDecomposition(system)
    residues = []
    for gen in system.generators:
        expanded = decomposition.expand(exterior_derivative(gen))
        _, pure = decomposition.split_generator_terms(expanded)
        residues.append(pure)
    columns = sorted({idx for res in residues for idx in res.terms})
    zero_ext = RationalFunction.constant(decomposition.ext_chart, 0)
    if not columns:
        return system  # every generator already closed mod the system
    matrix = [
        [_restrict_to_base(res.terms.get(col, zero_ext), chart) for col in columns]
        for res in residues
    ]
    # kernel of f -> sum f_i [d omega^i mod P]: transpose so unknowns are f_i
    transposed = [[matrix[i][c] for i in range(len(residues))] for c in range(len(columns))]
    kernel = function_kernel(transposed, chart)
    generators = []
    for vec in kernel:
        cleared = clear_denominators(vec)
        generators.append(system.section(cleared))
    return PfaffianSystem(chart, generators)


@dataclass(frozen=True)
class DerivedFlag:
    stages: tuple[PfaffianSystem, ...]
    terminal_integrable: bool

    @property
    def ranks(self) -> tuple[int, ...]:
        return tuple(stage.rank for stage in self.stages)


def derived_flag(system: PfaffianSystem, token: CancelToken | None = None) -> DerivedFlag:
    """Iterate the derived system until stabilization or the zero system."""
    _require_independent(system)
    stages = [system]
    while True:
        _check_token(token)
        current = stages[-1]
        if current.rank == 0:
            break
        nxt = derived_system(current, token)
        stages.append(nxt)
        if nxt.rank == current.rank:
            break
        if nxt.rank == 0:
            break
    terminal = stages[-1]
    terminal_integrable = terminal.rank == 0 or (
        len(stages) >= 2 and terminal.rank == stages[-2].rank
    )
    return DerivedFlag(tuple(stages), terminal_integrable)


def is_integrable_frobenius(system: PfaffianSystem) -> bool:
    """Frobenius test via the wedge ideal criterion."""
    reduced = system.independent_subsystem()
    if not reduced.generators:
        return True
    top = reduced.top_wedge()
    for gen in reduced.generators:
        if not wedge(exterior_derivative(gen), top).is_zero:
            return False
    return True


# -- characteristic systems and classes ----------------------------------


def cauchy_characteristic_system(
    system: PfaffianSystem, token: CancelToken | None = None
) -> PfaffianSystem:
    """Generators plus contractions i(w)dω over annihilator sections."""
    _require_independent(system)
    chart = system.chart
    if not system.generators:
        return system
    candidates: list[DifferentialForm] = list(system.generators)
    annihilator = system.annihilator_basis()
    for w in annihilator:
        for gen in system.generators:
            _check_token(token)
            contraction = exterior_derivative(gen)
            contracted = interior_product(w, contraction)
            if contracted.is_zero:
                continue
            coeffs = [contracted.terms.get((j,), RationalFunction.constant(chart, 0)) for j in range(chart.dimension)]
            cleared = clear_denominators(coeffs)
            candidates.append(
                DifferentialForm(chart, 1, {(j,): c for j, c in enumerate(cleared) if not c.is_zero})
            )
    ordered = _pointwise_preselection(chart, candidates)
    span = IncrementalSpan(chart, chart.dimension)
    chosen: list[DifferentialForm] = []
    for form in ordered:
        _check_token(token)
        if span.add_form(form):
            chosen.append(form)
        if span.rank == chart.dimension:
            break
    return PfaffianSystem(chart, chosen)


def _pointwise_preselection(chart: Chart, candidates: list[DifferentialForm]) -> list[DifferentialForm]:
    """Order candidates so pointwise-independent ones come first.

    A cheap exact evaluation at a sample point front-loads the forms the
    symbolic span will accept; the remainder keeps its original order so
    nothing is lost where the point is degenerate.
    """
    n = chart.dimension
    sample_values = [
        [Fraction(i + 2, 1) for i in range(n)],
        [Fraction((-1) ** i * (2 * i + 3), 2) for i in range(n)],
        [Fraction(0)] * n,
    ]
    for values in sample_values:
        point = PointAssignment(chart, values)
        try:
            rows = [
                [form.terms.get((j,), None) for j in range(n)]
                for form in candidates
            ]
            numeric = [
                [entry.evaluate(point.values) if entry is not None else Fraction(0) for entry in row]
                for row in rows
            ]
        except MathError:
            continue
        front: list[DifferentialForm] = []
        back: list[DifferentialForm] = []
        basis: list[list[Fraction]] = []
        pivots: list[int] = []
        for form, row in zip(candidates, numeric):
            vec = list(row)
            for prow, pcol in zip(basis, pivots):
                if vec[pcol]:
                    factor = vec[pcol] / prow[pcol]
                    vec = [a - factor * b for a, b in zip(vec, prow)]
            pivot = next((c for c, v in enumerate(vec) if v), None)
            if pivot is None:
                back.append(form)
            else:
                basis.append(vec)
                pivots.append(pivot)
                front.append(form)
        return front + back
    return candidates


def cartan_class(system: PfaffianSystem, token: CancelToken | None = None) -> int:
    """Generic rank of the Cauchy characteristic system."""
    return cauchy_characteristic_system(system, token).rank


def darboux_class(form: DifferentialForm, point: PointAssignment | None = None) -> int:
    """Class of a 1-form: 2p+1 when ω∧(dω)^p ≠ 0 survives, else 2p."""
    if form.degree != 1:
        raise DegreeError("Darboux class applies to 1-forms")
    if point is None:
        if form.is_zero:
            raise MathError("the zero form has no Darboux class")
        d = exterior_derivative(form)
        q = 0
        power = wedge_power(d, 1)
        while not power.is_zero:
            q += 1
            power = wedge(power, d)
        if not wedge(form, wedge_power(d, q)).is_zero:
            return 2 * q + 1
        return 2 * q
    point.check_chart(form.chart)
    omega_values = form.evaluate(point)
    if not omega_values:
        raise MathError("the form vanishes at the point")
    d_values = exterior_derivative(form).evaluate(point)
    chart = form.chart
    omega_const = DifferentialForm(chart, 1, {i: RationalFunction.constant(chart, v) for i, v in omega_values.items()})
    d_const = DifferentialForm(chart, 2, {i: RationalFunction.constant(chart, v) for i, v in d_values.items()})
    q = 0
    power = wedge_power(d_const, 1)
    while not power.is_zero:
        q += 1
        power = wedge(power, d_const)
    if not wedge(omega_const, wedge_power(d_const, q)).is_zero:
        return 2 * q + 1
    return 2 * q


def gender_of_form(form: DifferentialForm, system: PfaffianSystem) -> int:
    """Smallest h with form^(h+1) ≡ 0 mod the system (wedge powers)."""
    _require_independent(system)
    h = 0
    while True:
        if ideal_wedge_test(wedge_power(form, h + 1), system):
            return h
        h += 1


def gender(system: PfaffianSystem, token: CancelToken | None = None) -> int:
    """Gender of a generic section, via fresh formal parameters.

    The generic section Σ t_i ω^i uses fresh symbols t_i living on an
    internal extended chart; the answer is the smallest h killing
    (Σ t_i dω^i)^(h+1) ∧ ω¹ ∧ … ∧ ω^r identically in the t_i.
    """
    _require_independent(system)
    if not system.generators:
        return 0
    chart = system.chart
    r = len(system.generators)
    tnames = chart.fresh_names("t_", r)
    ext = chart.extend(tnames)
    embed = chart.embedding_into(ext)
    lifted = [gen.map_chart(ext, embed) for gen in system.generators]
    big = wedge_all(lifted)
    section_d = DifferentialForm(ext, 2)
    for i, gen in enumerate(system.generators):
        t_i = RationalFunction.coordinate(ext, chart.dimension + i)
        section_d = section_d + exterior_derivative(gen).map_chart(ext, embed).scale(t_i)
    h = 0
    while True:
        _check_token(token)
        if wedge(big, wedge_power(section_d, h + 1)).is_zero:
            return h
        h += 1


# -- integral elements, polar spaces, character ---------------------------


def _two_form_matrices(system: PfaffianSystem, point: PointAssignment) -> list[list[list[Fraction]]]:
    """dω^i at the point as antisymmetric n×n matrices."""
    n = system.chart.dimension
    matrices = []
    for gen in system.generators:
        values = exterior_derivative(gen).evaluate(point)
        m = [[Fraction(0)] * n for _ in range(n)]
        for (a, b), v in values.items():
            m[a][b] = v
            m[b][a] = -v
        matrices.append(m)
    return matrices


def _as_vector(v, n: int) -> tuple[Fraction, ...]:
    if isinstance(v, VectorField):
        comps = []
        for c in v.components:
            if not c.is_constant:
                raise MathError("tangent vectors at a point need constant components")
            comps.append(c.constant_value())
        v = comps
    vec = tuple(Fraction(x) for x in v)
    if len(vec) != n:
        raise MathError(f"tangent vector needs {n} components")
    return vec


def _matvec(m: list[list[Fraction]], v: Sequence[Fraction]) -> list[Fraction]:
    return [sum((row[j] * v[j] for j in range(len(v))), Fraction(0)) for row in m]


def _dot(a: Sequence[Fraction], b: Sequence[Fraction]) -> Fraction:
    return sum((x * y for x, y in zip(a, b)), Fraction(0))


def polar_space(
    system: PfaffianSystem,
    point: PointAssignment,
    element: Sequence,
) -> list[tuple[Fraction, ...]]:
    """Vectors of Σ_p in involution with every vector of the element."""
    point.check_chart(system.chart)
    n = system.chart.dimension
    vectors = [_as_vector(v, n) for v in element]
    gen_rows: list[list[Fraction]] = []
    for gen in system.generators:
        values = gen.evaluate(point)
        gen_rows.append([values.get((j,), Fraction(0)) for j in range(n)])
    for v in vectors:
        for row in gen_rows:
            if _dot(row, v):
                raise MathError("element is not inside the annihilator at the point")
    matrices = _two_form_matrices(system, point)
    for v, w in itertools.combinations(vectors, 2):
        for m in matrices:
            if _dot(_matvec(m, v), w):
                raise MathError("element is not an integral element")
    rows = list(gen_rows)
    for v in vectors:
        for m in matrices:
            rows.append(_matvec(m, v))
    if not rows:
        basis = [tuple(Fraction(1) if j == i else Fraction(0) for j in range(n)) for i in range(n)]
        return basis
    basis = kernel_basis(rows, Fraction(0), Fraction(1))
    return [tuple(vec) for vec in basis]


@dataclass(frozen=True)
class CharacterReport:
    point: PointAssignment
    chain: tuple[tuple[Fraction, ...], ...]
    rho_k: int
    enlarged_characters: tuple[int, ...]
    character: int
    strategy: str
    seed: int | None = None

    @property
    def sigma_dimension(self) -> int:
        return len(self.chain[0]) if self.chain else 0


def _span_contains(basis: list[tuple[Fraction, ...]], vec: tuple[Fraction, ...]) -> bool:
    if not basis:
        return all(x == 0 for x in vec)
    rows = [list(b) for b in basis]
    _, pivots_before = rref([list(r) for r in rows], Fraction(0), Fraction(1))
    _, pivots_after = rref([list(r) for r in rows] + [list(vec)], Fraction(0), Fraction(1))
    return len(pivots_after) == len(pivots_before)


def _generic_polar_rank(
    gen_rows: list[list[Fraction]],
    matrices: list[list[list[Fraction]]],
    chain: list[tuple[Fraction, ...]],
    polar_basis: list[tuple[Fraction, ...]],
) -> int:
    """Rank of the polar conditions for a generic candidate in the polar space."""
    m = len(polar_basis)
    param_chart = Chart([f"t{i+1}" for i in range(m)])
    zero = RationalFunction.constant(param_chart, 0)
    one = RationalFunction.constant(param_chart, 1)
    rows: list[list[RationalFunction]] = []
    for row in gen_rows:
        rows.append([RationalFunction.constant(param_chart, x) for x in row])
    for v in chain:
        for mat in matrices:
            rows.append([RationalFunction.constant(param_chart, x) for x in _matvec(mat, v)])
    # candidate v(t) = sum t_j b_j adds rows A_i v(t)
    for mat in matrices:
        symbolic_row = []
        for col in range(len(gen_rows[0]) if gen_rows else len(matrices[0])):
            acc = zero
            for j, b in enumerate(polar_basis):
                value = _matvec(mat, b)[col]
                if value:
                    acc = acc + RationalFunction.coordinate(param_chart, j).scale(value)
            symbolic_row.append(acc)
        rows.append(symbolic_row)
    _, pivots = rref(rows, zero, one)
    return len(pivots)


def _chain_candidates(m: int):
    yield tuple(Fraction(1) for _ in range(m))
    base = 2
    while True:
        yield tuple(Fraction(base) ** j for j in range(m))
        base += 1


def character_chain(
    system: PfaffianSystem,
    point: PointAssignment,
    strategy: str = "deterministic",
    seed: int | None = None,
    token: CancelToken | None = None,
) -> CharacterReport:
    """Greedy ascending chain of integral elements at a point.

    The deterministic strategy realizes the generic chain: at each step
    the polar drop of a formal combination of the current polar basis is
    computed symbolically and a deterministic specialization matching
    the generic drop is taken.  The seeded-random strategy draws small
    rational combinations instead.
    """
    point.check_chart(system.chart)
    if strategy not in ("deterministic", "seeded-random"):
        raise MathError(f"unknown strategy {strategy!r}")
    if strategy == "seeded-random" and seed is None:
        raise MathError("seeded-random strategy needs a seed")
    n = system.chart.dimension
    r = len(system.generators)
    if system.rank_at(point) != r:
        raise MathError("generators are dependent at the point")
    gen_rows = []
    for gen in system.generators:
        values = gen.evaluate(point)
        gen_rows.append([values.get((j,), Fraction(0)) for j in range(n)])
    matrices = _two_form_matrices(system, point)
    rng = random.Random(seed) if strategy == "seeded-random" else None

    chain: list[tuple[Fraction, ...]] = []
    s_values: list[int] = []
    polar_basis = [tuple(vec) for vec in kernel_basis(gen_rows, Fraction(0), Fraction(1))] if gen_rows else [
        tuple(Fraction(1) if j == i else Fraction(0) for j in range(n)) for i in range(n)
    ]
    while len(chain) < len(polar_basis):
        _check_token(token)
        chosen: tuple[Fraction, ...] | None = None
        if strategy == "deterministic":
            target_rank = _generic_polar_rank(gen_rows, matrices, chain, polar_basis)
            for weights in itertools.islice(_chain_candidates(len(polar_basis)), 200):
                candidate = tuple(
                    sum((w * b[j] for w, b in zip(weights, polar_basis)), Fraction(0))
                    for j in range(n)
                )
                if _span_contains(chain, candidate):
                    continue
                rows = list(gen_rows)
                for v in chain:
                    for mat in matrices:
                        rows.append(_matvec(mat, v))
                for mat in matrices:
                    rows.append(_matvec(mat, candidate))
                _, pivots = rref(rows, Fraction(0), Fraction(1))
                if len(pivots) == target_rank:
                    chosen = candidate
                    break
            if chosen is None:
                raise MathError("no generic specialization found for the chain step")
        else:
            for _ in range(200):
                weights = [Fraction(rng.randint(-9, 9), rng.randint(1, 3)) for _ in polar_basis]
                candidate = tuple(
                    sum((w * b[j] for w, b in zip(weights, polar_basis)), Fraction(0))
                    for j in range(n)
                )
                if not _span_contains(chain, candidate):
                    chosen = candidate
                    break
            if chosen is None:
                raise MathError("random strategy failed to leave the current element")
        chain.append(chosen)
        polar_basis = [tuple(v) for v in polar_space(system, point, chain)]
        s_values.append(len(polar_basis))
    rho_k = len(chain)
    return CharacterReport(
        point=point,
        chain=tuple(chain),
        rho_k=rho_k,
        enlarged_characters=tuple(s_values),
        character=n - r - rho_k,
        strategy=strategy,
        seed=seed,
    )


def generic_character(system: PfaffianSystem, token: CancelToken | None = None) -> int:
    """Character at a deterministically chosen regular point."""
    point = find_regular_point(system, token)
    return character_chain(system, point, "deterministic", token=token).character


def find_regular_point(system: PfaffianSystem, token: CancelToken | None = None) -> PointAssignment:
    """First candidate point with generic rank and class values."""
    chart = system.chart
    n = chart.dimension
    target_class = cartan_class(system, token)
    candidates = [
        [Fraction(0)] * n,
        [Fraction(i + 1) for i in range(n)],
        [Fraction(1, i + 2) for i in range(n)],
        [Fraction((-1) ** i * (i + 2), 3) for i in range(n)],
        [Fraction(i * i + 1, 2) for i in range(n)],
    ]
    for values in candidates:
        _check_token(token)
        point = PointAssignment(chart, values)
        try:
            if system.rank_at(point) != system.rank:
                continue
            if _pointwise_class(system, point) != target_class:
                continue
        except MathError:
            continue
        return point
    raise MathError("no regular sample point found among deterministic candidates")


def _pointwise_class(system: PfaffianSystem, point: PointAssignment) -> int:
    n = system.chart.dimension
    gen_rows = []
    for gen in system.generators:
        values = gen.evaluate(point)
        gen_rows.append([values.get((j,), Fraction(0)) for j in range(n)])
    if gen_rows:
        sigma = kernel_basis(gen_rows, Fraction(0), Fraction(1))
    else:
        sigma = [[Fraction(1) if j == i else Fraction(0) for j in range(n)] for i in range(n)]
    matrices = _two_form_matrices(system, point)
    rows = list(gen_rows)
    for w in sigma:
        for m in matrices:
            rows.append(_matvec(m, tuple(w)))
    if not rows:
        return 0
    _, pivots = rref(rows, Fraction(0), Fraction(1))
    return len(pivots)


# -- singularity scan ------------------------------------------------------


@dataclass(frozen=True)
class ScanRow:
    label: str
    point: PointAssignment | None
    rank: int | None
    cartan_class: int | None
    character: int | None
    deviates: bool
    error: str | None = None


@dataclass(frozen=True)
class ScanReport:
    generic_rank: int
    generic_class: int
    generic_character: int | None
    rows: tuple[ScanRow, ...]


def singularity_scan(
    system: PfaffianSystem,
    points: Sequence[tuple[str, PointAssignment]],
    token: CancelToken | None = None,
) -> ScanReport:
    """Tabulate pointwise (rank, class, character) and flag deviations."""
    generic_r = system.rank
    generic_c = cartan_class(system, token)
    try:
        generic_char = generic_character(system, token)
    except MathError:
        generic_char = None
    rows: list[ScanRow] = []
    for label, point in points:
        _check_token(token)
        try:
            rank_p = system.rank_at(point)
            class_p = _pointwise_class(system, point)
            char_p = _scan_character(system, point, rank_p)
            deviates = (
                rank_p != generic_r
                or class_p != generic_c
                or (generic_char is not None and char_p != generic_char)
            )
            rows.append(ScanRow(label, point, rank_p, class_p, char_p, deviates))
        except MathError as exc:
            rows.append(ScanRow(label, point, None, None, None, True, str(exc)))
    return ScanReport(generic_r, generic_c, generic_char, tuple(rows))


def _scan_character(system: PfaffianSystem, point: PointAssignment, rank_p: int) -> int:
    """Chain character with the pointwise rank (tolerates rank drops)."""
    if rank_p == len(system.generators):
        return character_chain(system, point, "deterministic").character
    n = system.chart.dimension
    gen_rows = []
    for gen in system.generators:
        values = gen.evaluate(point)
        gen_rows.append([values.get((j,), Fraction(0)) for j in range(n)])
    matrices = _two_form_matrices(system, point)
    chain: list[tuple[Fraction, ...]] = []
    polar = [tuple(v) for v in kernel_basis(gen_rows, Fraction(0), Fraction(1))] if gen_rows else [
        tuple(Fraction(1) if j == i else Fraction(0) for j in range(n)) for i in range(n)
    ]
    while len(chain) < len(polar):
        target = _generic_polar_rank(gen_rows, matrices, chain, polar)
        chosen = None
        for weights in itertools.islice(_chain_candidates(len(polar)), 200):
            candidate = tuple(
                sum((w * b[j] for w, b in zip(weights, polar)), Fraction(0)) for j in range(n)
            )
            if _span_contains(chain, candidate):
                continue
            rows = list(gen_rows)
            for v in chain:
                for mat in matrices:
                    rows.append(_matvec(mat, v))
            for mat in matrices:
                rows.append(_matvec(mat, candidate))
            _, pivots = rref(rows, Fraction(0), Fraction(1))
            if len(pivots) == target:
                chosen = candidate
                break
        if chosen is None:
            raise MathError("no generic chain step at the scan point")
        chain.append(chosen)
        rows = list(gen_rows)
        for v in chain:
            for mat in matrices:
                rows.append(_matvec(mat, v))
        polar = [tuple(v) for v in kernel_basis(rows, Fraction(0), Fraction(1))]
    return n - rank_p - len(chain)

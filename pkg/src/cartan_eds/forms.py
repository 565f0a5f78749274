"""Sparse exterior forms and vector fields over rational-function scalars.

Forms are graded sums of wedge monomials keyed by strictly increasing
coordinate multi-indices; all operations are exact and return new
values.  Everything here is chart-local.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from .chart import Chart, PointAssignment
from .errors import ChartMismatchError, DegreeError
from .rational import RationalFunction

Index = tuple[int, ...]


def _merge_sorted(a: Index, b: Index) -> tuple[Index, int] | None:
    """Merge two strictly increasing index tuples; None if they overlap.

    Returns the merged tuple and the sign of the sorting permutation.
    """
    if set(a) & set(b):
        return None
    merged = list(a)
    sign = 1
    for idx in b:
        pos = 0
        while pos < len(merged) and merged[pos] < idx:
            pos += 1
        sign *= (-1) ** (len(merged) - pos)
        merged.insert(pos, idx)
    return tuple(merged), sign


class DifferentialForm:
    """Exterior form of homogeneous degree with RationalFunction coefficients."""

    __slots__ = ("chart", "degree", "terms")

    def __init__(self, chart: Chart, degree: int, terms: Mapping[Index, RationalFunction] | None = None):
        if degree < 0:
            raise DegreeError("negative form degree")
        self.chart = chart
        self.degree = degree
        clean: dict[Index, RationalFunction] = {}
        if terms:
            for idx, coeff in terms.items():
                if coeff.is_zero:
                    continue
                if len(idx) != degree:
                    raise DegreeError(f"index {idx} does not match degree {degree}")
                if any(i < 0 or i >= chart.dimension for i in idx):
                    raise DegreeError(f"index {idx} outside chart of dimension {chart.dimension}")
                if any(idx[k] >= idx[k + 1] for k in range(len(idx) - 1)):
                    raise DegreeError(f"index {idx} is not strictly increasing")
                clean[idx] = coeff
        self.terms = clean

    # -- constructors -------------------------------------------------

    @classmethod
    def zero(cls, chart: Chart, degree: int = 0) -> "DifferentialForm":
        return cls(chart, degree)

    @classmethod
    def from_scalar(cls, f: RationalFunction) -> "DifferentialForm":
        return cls(f.chart, 0, {(): f})

    @classmethod
    def coordinate_differential(cls, chart: Chart, index: int) -> "DifferentialForm":
        return cls(chart, 1, {(index,): RationalFunction.constant(chart, 1)})

    # -- predicates ---------------------------------------------------

    @property
    def is_zero(self) -> bool:
        return not self.terms

    def _check(self, other: "DifferentialForm") -> None:
        if self.chart != other.chart:
            raise ChartMismatchError("forms on different charts")

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, DifferentialForm)
            and self.chart == other.chart
            and self.degree == other.degree
            and self.terms == other.terms
        )

    def __repr__(self) -> str:  # pragma: no cover - debugging aid
        return f"DifferentialForm({self!s})"

    def __str__(self) -> str:
        from .formlang import render_form

        return render_form(self)

    # -- graded algebra -----------------------------------------------

    def __add__(self, other: "DifferentialForm") -> "DifferentialForm":
        self._check(other)
        if self.is_zero:
            return other
        if other.is_zero:
            return self
        if self.degree != other.degree:
            raise DegreeError("cannot add forms of different degrees")
        terms = dict(self.terms)
        zero = RationalFunction.constant(self.chart, 0)
        for idx, coeff in other.terms.items():
            acc = terms.get(idx, zero) + coeff
            if acc.is_zero:
                terms.pop(idx, None)
            else:
                terms[idx] = acc
        return DifferentialForm(self.chart, self.degree, terms)

    def __neg__(self) -> "DifferentialForm":
        return DifferentialForm(self.chart, self.degree, {i: -c for i, c in self.terms.items()})

    def __sub__(self, other: "DifferentialForm") -> "DifferentialForm":
        return self + (-other)

    def scale(self, f: RationalFunction) -> "DifferentialForm":
        if f.is_zero:
            return DifferentialForm(self.chart, self.degree)
        return DifferentialForm(self.chart, self.degree, {i: c * f for i, c in self.terms.items()})

    def evaluate(self, point: PointAssignment) -> dict[Index, Fraction]:
        """Constant coefficients of the form at a point; poles are errors."""
        point.check_chart(self.chart)
        out: dict[Index, Fraction] = {}
        for idx, coeff in self.terms.items():
            value = coeff.evaluate(point.values)
            if value:
                out[idx] = value
        return out

    def map_chart(self, target: Chart, index_map: Sequence[int] | None = None) -> "DifferentialForm":
        """Re-express on a larger chart containing the same coordinates."""
        if index_map is None:
            index_map = self.chart.embedding_into(target)
        terms: dict[Index, RationalFunction] = {}
        for idx, coeff in self.terms.items():
            new_idx = tuple(sorted(index_map[i] for i in idx))
            # embeddings are order-preserving only if the map is monotone;
            # recover the permutation sign explicitly
            mapped = [index_map[i] for i in idx]
            sign = _permutation_sign(mapped)
            terms[new_idx] = coeff.map_chart(target, index_map).scale(sign)
        return DifferentialForm(target, self.degree, terms)


def _permutation_sign(values: list[int]) -> int:
    sign = 1
    vals = list(values)
    for i in range(len(vals)):
        for j in range(i + 1, len(vals)):
            if vals[i] > vals[j]:
                sign = -sign
    return sign


class VectorField:
    """Contravariant field with one RationalFunction component per coordinate."""

    __slots__ = ("chart", "components")

    def __init__(self, chart: Chart, components: Sequence[RationalFunction]):
        components = tuple(components)
        if len(components) != chart.dimension:
            raise DegreeError("component count must equal the chart dimension")
        self.chart = chart
        self.components = components

    @classmethod
    def zero(cls, chart: Chart) -> "VectorField":
        zero = RationalFunction.constant(chart, 0)
        return cls(chart, [zero] * chart.dimension)

    @classmethod
    def coordinate_field(cls, chart: Chart, index: int) -> "VectorField":
        comps = [RationalFunction.constant(chart, 0)] * chart.dimension
        comps[index] = RationalFunction.constant(chart, 1)
        return cls(chart, comps)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, VectorField)
            and self.chart == other.chart
            and self.components == other.components
        )

    def __add__(self, other: "VectorField") -> "VectorField":
        if self.chart != other.chart:
            raise ChartMismatchError("fields on different charts")
        return VectorField(self.chart, [a + b for a, b in zip(self.components, other.components)])

    def __neg__(self) -> "VectorField":
        return VectorField(self.chart, [-a for a in self.components])

    def __sub__(self, other: "VectorField") -> "VectorField":
        return self + (-other)

    def scale(self, f: RationalFunction) -> "VectorField":
        return VectorField(self.chart, [a * f for a in self.components])

    def apply(self, f: RationalFunction) -> RationalFunction:
        """Directional derivative v(f)."""
        total = RationalFunction.constant(self.chart, 0)
        for i, comp in enumerate(self.components):
            if not comp.is_zero:
                total = total + comp * f.diff(i)
        return total

    def bracket(self, other: "VectorField") -> "VectorField":
        """Lie bracket [self, other]."""
        if self.chart != other.chart:
            raise ChartMismatchError("fields on different charts")
        comps = [
            self.apply(other.components[k]) - other.apply(self.components[k])
            for k in range(self.chart.dimension)
        ]
        return VectorField(self.chart, comps)

    def evaluate(self, point: PointAssignment) -> tuple[Fraction, ...]:
        point.check_chart(self.chart)
        return tuple(c.evaluate(point.values) for c in self.components)

    def map_chart(self, target: Chart, index_map: Sequence[int] | None = None) -> "VectorField":
        if index_map is None:
            index_map = self.chart.embedding_into(target)
        comps = [RationalFunction.constant(target, 0)] * target.dimension
        for i, c in enumerate(self.components):
            comps[index_map[i]] = c.map_chart(target, index_map)
        return VectorField(target, comps)

    def __repr__(self) -> str:  # pragma: no cover - debugging aid
        parts = [f"({c})*d/d{n}" for c, n in zip(self.components, self.chart.names) if not c.is_zero]
        return " + ".join(parts) if parts else "0"


# -- exterior calculus -------------------------------------------------


def wedge(a: DifferentialForm, b: DifferentialForm) -> DifferentialForm:
    """Exterior product; bilinear and graded-anticommutative."""
    if a.chart != b.chart:
        raise ChartMismatchError("wedge of forms on different charts")
    degree = a.degree + b.degree
    if degree > a.chart.dimension:
        # any form of degree above the dimension is zero
        return DifferentialForm(a.chart, degree)
    terms: dict[Index, RationalFunction] = {}
    zero = RationalFunction.constant(a.chart, 0)
    for ia, ca in a.terms.items():
        for ib, cb in b.terms.items():
            merged = _merge_sorted(ia, ib)
            if merged is None:
                continue
            idx, sign = merged
            acc = terms.get(idx, zero) + ca * cb.scale(sign)
            if acc.is_zero:
                terms.pop(idx, None)
            else:
                terms[idx] = acc
    return DifferentialForm(a.chart, degree, terms)


def wedge_all(forms: Iterable[DifferentialForm]) -> DifferentialForm:
    forms = list(forms)
    if not forms:
        raise DegreeError("empty wedge product")
    acc = forms[0]
    for form in forms[1:]:
        acc = wedge(acc, form)
    return acc


def wedge_power(a: DifferentialForm, n: int) -> DifferentialForm:
    if n < 0:
        raise DegreeError("negative wedge power")
    result = DifferentialForm.from_scalar(RationalFunction.constant(a.chart, 1))
    for _ in range(n):
        result = wedge(result, a)
    return result


def exterior_derivative(a: DifferentialForm) -> DifferentialForm:
    """d: degree k -> k+1 with d(d a) = 0 and the graded Leibniz rule."""
    terms: dict[Index, RationalFunction] = {}
    zero = RationalFunction.constant(a.chart, 0)
    for idx, coeff in a.terms.items():
        for j in range(a.chart.dimension):
            if j in idx:
                continue
            partial = coeff.diff(j)
            if partial.is_zero:
                continue
            merged = _merge_sorted((j,), idx)
            if merged is None:
                continue
            new_idx, sign = merged
            acc = terms.get(new_idx, zero) + partial.scale(sign)
            if acc.is_zero:
                terms.pop(new_idx, None)
            else:
                terms[new_idx] = acc
    return DifferentialForm(a.chart, a.degree + 1, terms)


def differential(f: RationalFunction) -> DifferentialForm:
    return exterior_derivative(DifferentialForm.from_scalar(f))


def interior_product(v: VectorField, a: DifferentialForm) -> DifferentialForm:
    """Contraction i(v): degree-(-1) derivation with i(v)i(v) = 0."""
    if v.chart != a.chart:
        raise ChartMismatchError("contraction across charts")
    if a.degree < 1:
        raise DegreeError("cannot contract a 0-form")
    terms: dict[Index, RationalFunction] = {}
    zero = RationalFunction.constant(a.chart, 0)
    for idx, coeff in a.terms.items():
        for pos, i in enumerate(idx):
            comp = v.components[i]
            if comp.is_zero:
                continue
            rest = idx[:pos] + idx[pos + 1 :]
            sign = (-1) ** pos
            acc = terms.get(rest, zero) + (coeff * comp).scale(sign)
            if acc.is_zero:
                terms.pop(rest, None)
            else:
                terms[rest] = acc
    return DifferentialForm(a.chart, a.degree - 1, terms)


def lie_derivative(v: VectorField, a: DifferentialForm) -> DifferentialForm:
    """Cartan magic formula i(v)da + d(i(v)a); degree preserved."""
    if v.chart != a.chart:
        raise ChartMismatchError("Lie derivative across charts")
    # on 0-forms i(v)da is already the directional derivative
    result = interior_product(v, exterior_derivative(a))
    if a.degree >= 1:
        result = result + exterior_derivative(interior_product(v, a))
    return result


def pairing(v: VectorField, a: DifferentialForm) -> RationalFunction:
    """<v, omega> for a 1-form."""
    if a.degree != 1:
        raise DegreeError("pairing needs a 1-form")
    contracted = interior_product(v, a)
    return contracted.terms.get((), RationalFunction.constant(a.chart, 0))


def two_form_value(a: DifferentialForm, v: VectorField, w: VectorField) -> RationalFunction:
    """a(v, w) for a 2-form."""
    if a.degree != 2:
        raise DegreeError("expected a 2-form")
    return pairing(w, interior_product(v, a))


def substitute(a: DifferentialForm, bindings: Mapping[str, RationalFunction], target: Chart) -> DifferentialForm:
    """Pullback along the map defined by coordinate bindings.

    Every source coordinate must be bound to a scalar on `target`;
    differentials expand through d of the bindings, so the operation
    commutes with the exterior derivative.
    """
    images: list[RationalFunction] = []
    for name in a.chart.names:
        if name not in bindings:
            raise ChartMismatchError(f"coordinate {name!r} has no binding")
        image = bindings[name]
        if image.chart != target:
            raise ChartMismatchError(f"binding for {name!r} lives off the target chart")
        images.append(image)
    differentials = [differential(img) for img in images]
    result = DifferentialForm(target, a.degree)
    for idx, coeff in a.terms.items():
        pulled = DifferentialForm.from_scalar(coeff.compose(images))
        for i in idx:
            pulled = wedge(pulled, differentials[i])
        result = result + pulled
    return result

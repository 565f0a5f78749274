"""Exact linear algebra over Q and over the rational-function field.

Generic ranks use fraction-free Bareiss elimination on cleared
(polynomial) rows with a deterministic pivot rule; the certificate
records the pivot minors whose common nonvanishing locus is where the
generic answer is guaranteed pointwise.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .chart import Chart, PointAssignment
from .errors import DegreeError
from .forms import DifferentialForm, Index, VectorField
from .rational import Polynomial, RationalFunction, poly_exact_div


@dataclass(frozen=True)
class RankCertificate:
    """Pivot data from fraction-free elimination.

    `pivot_columns` are wedge-monomial multi-indices; `minors` are the
    successive Bareiss pivots (polynomials); `row_scales` clear row
    denominators.  Away from the vanishing locus of the last minor and
    of the row scales, the pointwise rank equals the generic rank.
    """

    rank: int
    pivot_rows: tuple[int, ...]
    pivot_columns: tuple[Index, ...]
    minors: tuple[Polynomial, ...]
    row_scales: tuple[Polynomial, ...]

    def holds_at(self, point: PointAssignment) -> bool:
        for scale in self.row_scales:
            if not scale.evaluate(point.values):
                return False
        if self.minors and not self.minors[-1].evaluate(point.values):
            return False
        return True


def form_matrix(rows: Sequence[DifferentialForm]) -> tuple[list[list[RationalFunction]], list[Index]]:
    """Coefficient matrix of equal-degree forms over their wedge monomials.

    Columns are the union of occurring multi-indices in graded-lex order.
    """
    if not rows:
        return [], []
    chart = rows[0].chart
    degree = rows[0].degree
    for row in rows[1:]:
        if row.chart != chart:
            raise DegreeError("rows live on different charts")
        if row.degree != degree:
            raise DegreeError("rows have mixed degrees")
    columns = sorted({idx for row in rows for idx in row.terms}, key=lambda i: (len(i), i))
    zero = RationalFunction.constant(chart, 0)
    matrix = [[row.terms.get(col, zero) for col in columns] for row in rows]
    return matrix, columns


def generic_rank(rows: Sequence[DifferentialForm]) -> tuple[int, RankCertificate]:
    """Rank over the function field via fraction-free Bareiss elimination.

    Pivot choice is the first column with a nonzero entry, first nonzero
    row, so certificates are reproducible.
    """
    matrix, columns = form_matrix(rows)
    if not matrix or not columns:
        cert = RankCertificate(0, (), (), (), ())
        return 0, cert
    chart = rows[0].chart
    one = Polynomial.constant(chart, 1)

    cleared: list[list[Polynomial]] = []
    scales: list[Polynomial] = []
    for row in matrix:
        lcm = one
        for entry in row:
            lcm = lcm * entry.den  # product clears every denominator
        cleared.append([poly_exact_div(entry.num * lcm, entry.den) for entry in row])
        scales.append(lcm)

    m, n = len(cleared), len(columns)
    prev_pivot = one
    pivots: list[Polynomial] = []
    pivot_rows: list[int] = []
    pivot_cols: list[int] = []
    row_at = 0
    for col in range(n):
        pivot_row = None
        for r in range(row_at, m):
            if not cleared[r][col].is_zero:
                pivot_row = r
                break
        if pivot_row is None:
            continue
        if pivot_row != row_at:
            cleared[row_at], cleared[pivot_row] = cleared[pivot_row], cleared[row_at]
            scales[row_at], scales[pivot_row] = scales[pivot_row], scales[row_at]
        pivot = cleared[row_at][col]
        for r in range(row_at + 1, m):
            for c in range(col + 1, n):
                num = cleared[r][c] * pivot - cleared[r][col] * cleared[row_at][c]
                cleared[r][c] = poly_exact_div(num, prev_pivot)
            cleared[r][col] = Polynomial(chart)
        pivots.append(pivot)
        pivot_rows.append(row_at)
        pivot_cols.append(col)
        prev_pivot = pivot
        row_at += 1
        if row_at == m:
            break
    cert = RankCertificate(
        rank=len(pivots),
        pivot_rows=tuple(pivot_rows),
        pivot_columns=tuple(columns[c] for c in pivot_cols),
        minors=tuple(pivots),
        row_scales=tuple(scales),
    )
    return len(pivots), cert


# -- dense elimination over an arbitrary exact field -------------------


def rref(matrix: list[list], zero, one) -> tuple[list[list], list[int]]:
    """Reduced row echelon form; works for Fraction or RationalFunction entries."""
    mat = [list(row) for row in matrix]
    rows = len(mat)
    cols = len(mat[0]) if rows else 0
    pivots: list[int] = []
    r = 0
    for c in range(cols):
        pivot_row = None
        for i in range(r, rows):
            if not _is_zero(mat[i][c]):
                pivot_row = i
                break
        if pivot_row is None:
            continue
        mat[r], mat[pivot_row] = mat[pivot_row], mat[r]
        inv = one / mat[r][c]
        mat[r] = [entry * inv for entry in mat[r]]
        for i in range(rows):
            if i != r and not _is_zero(mat[i][c]):
                factor = mat[i][c]
                mat[i] = [a - factor * b for a, b in zip(mat[i], mat[r])]
        pivots.append(c)
        r += 1
        if r == rows:
            break
    return mat, pivots


def _is_zero(x) -> bool:
    if isinstance(x, RationalFunction):
        return x.is_zero
    return not x


def kernel_basis(matrix: list[list], zero, one) -> list[list]:
    """Basis of the right kernel, in reduced echelon shape (deterministic)."""
    if not matrix:
        return []
    cols = len(matrix[0])
    reduced, pivots = rref(matrix, zero, one)
    free_cols = [c for c in range(cols) if c not in pivots]
    basis = []
    for fc in free_cols:
        vec = [zero] * cols
        vec[fc] = one
        for r, pc in enumerate(pivots):
            vec[pc] = zero - reduced[r][fc]
        basis.append(vec)
    return basis


def function_kernel(matrix: list[list[RationalFunction]], chart: Chart) -> list[list[RationalFunction]]:
    zero = RationalFunction.constant(chart, 0)
    one = RationalFunction.constant(chart, 1)
    if not matrix:
        return []
    return kernel_basis(matrix, zero, one)


def clear_denominators(vector: Sequence[RationalFunction]) -> list[RationalFunction]:
    """Scale a function-field vector to polynomial entries (same span)."""
    if not vector:
        return []
    chart = vector[0].chart
    lcm = Polynomial.constant(chart, 1)
    for entry in vector:
        lcm = lcm * entry.den
    scaled = [RationalFunction.from_polynomial(poly_exact_div(entry.num * lcm, entry.den)) for entry in vector]
    return scaled


class IncrementalSpan:
    """Row space over the function field with cheap membership tests.

    Rows are kept fraction-free (polynomial entries, content-stripped)
    in echelon order, so adding a candidate costs one cross-multiplied
    elimination pass instead of a full re-elimination of the family.
    """

    def __init__(self, chart: Chart, width: int):
        self.chart = chart
        self.width = width
        self._rows: dict[int, list[Polynomial]] = {}  # pivot column -> row

    @property
    def rank(self) -> int:
        return len(self._rows)

    def _strip_content(self, row: list[Polynomial]) -> list[Polynomial]:
        from .rational import poly_gcd

        content = Polynomial(self.chart)
        for entry in row:
            content = poly_gcd(content, entry)
            if content.is_constant and not content.is_zero:
                return row
        if content.is_zero or (content.is_constant and content.constant_value() == 1):
            return row
        return [poly_exact_div(entry, content) for entry in row]

    def _reduce(self, row: list[Polynomial]) -> list[Polynomial]:
        # insertion order matters: every stored row has zeros at all pivots
        # inserted before it, so one forward pass cannot reintroduce them
        for col, pivot_row in self._rows.items():
            if not row[col].is_zero:
                pivot = pivot_row[col]
                factor = row[col]
                row = [a * pivot - b * factor for a, b in zip(row, pivot_row)]
                row = self._strip_content(row)
        return row

    def contains(self, row: Sequence[RationalFunction]) -> bool:
        reduced = self._reduce(self._clear(row))
        return all(entry.is_zero for entry in reduced)

    def add(self, row: Sequence[RationalFunction]) -> bool:
        """Insert the row; False if it was already in the span."""
        reduced = self._reduce(self._clear(row))
        pivot = next((c for c, v in enumerate(reduced) if not v.is_zero), None)
        if pivot is None:
            return False
        self._rows[pivot] = reduced
        return True

    def _clear(self, row: Sequence[RationalFunction]) -> list[Polynomial]:
        cleared = clear_denominators(list(row))
        return [entry.num for entry in cleared]

    def add_form(self, form: DifferentialForm) -> bool:
        zero = RationalFunction.constant(self.chart, 0)
        return self.add([form.terms.get((j,), zero) for j in range(self.width)])


def kernel_at_point(rows: Sequence[DifferentialForm], point: PointAssignment) -> list[VectorField]:
    """Pointwise annihilator of a family of 1-forms, as constant fields."""
    if rows:
        chart = rows[0].chart
    else:
        chart = point.chart
    point.check_chart(chart)
    for row in rows:
        if row.degree != 1:
            raise DegreeError("pointwise kernel needs 1-forms")
    n = chart.dimension
    numeric: list[list[Fraction]] = []
    for row in rows:
        values = row.evaluate(point)
        numeric.append([values.get((i,), Fraction(0)) for i in range(n)])
    if not numeric:
        basis = [[Fraction(1) if j == i else Fraction(0) for j in range(n)] for i in range(n)]
    else:
        basis = kernel_basis(numeric, Fraction(0), Fraction(1))
    fields = []
    for vec in basis:
        fields.append(VectorField(chart, [RationalFunction.constant(chart, v) for v in vec]))
    return fields


def pointwise_rank(rows: Sequence[DifferentialForm], point: PointAssignment) -> int:
    matrix, columns = form_matrix(rows)
    if not matrix:
        return 0
    numeric = [[entry.evaluate(point.values) for entry in row] for row in matrix]
    _, pivots = rref(numeric, Fraction(0), Fraction(1))
    return len(pivots)


def function_kernel_of_forms(rows: Sequence[DifferentialForm]) -> list[VectorField]:
    """Generic annihilator: kernel basis of the 1-form coefficient matrix."""
    if not rows:
        raise DegreeError("need at least one 1-form")
    chart = rows[0].chart
    n = chart.dimension
    zero = RationalFunction.constant(chart, 0)
    matrix = []
    for row in rows:
        if row.degree != 1:
            raise DegreeError("generic kernel needs 1-forms")
        matrix.append([row.terms.get((i,), zero) for i in range(n)])
    basis = function_kernel(matrix, chart)
    return [VectorField(chart, clear_denominators(vec)) for vec in basis]

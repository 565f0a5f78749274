"""Exact multivariate rational-function arithmetic.

Every scalar in the library is a quotient of sparse multivariate
polynomials with arbitrary-precision rational coefficients.  Zero-tests
are exact: each value is kept in a canonical form (gcd-reduced, integer
primitive denominator with positive leading coefficient), so structural
equality decides mathematical equality.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Mapping, Sequence

from .chart import Chart
from .errors import ChartMismatchError, PoleError

Exponents = tuple[int, ...]


def _grlex_key(exps: Exponents) -> tuple:
    # graded lexicographic: total degree first, then lexicographic
    return (sum(exps), exps)


class Polynomial:
    """Sparse multivariate polynomial over Q, tied to a chart.

    Terms are stored as a mapping from exponent tuples (one slot per
    chart coordinate) to nonzero Fraction coefficients.
    """

    __slots__ = ("chart", "terms")

    def __init__(self, chart: Chart, terms: Mapping[Exponents, Fraction] | None = None):
        self.chart = chart
        clean: dict[Exponents, Fraction] = {}
        if terms:
            for exps, coeff in terms.items():
                if coeff:
                    clean[exps] = Fraction(coeff)
        self.terms = clean

    # -- constructors -------------------------------------------------

    @classmethod
    def constant(cls, chart: Chart, value) -> "Polynomial":
        value = Fraction(value)
        if not value:
            return cls(chart)
        return cls(chart, {(0,) * chart.dimension: value})

    @classmethod
    def coordinate(cls, chart: Chart, index: int) -> "Polynomial":
        exps = [0] * chart.dimension
        exps[index] = 1
        return cls(chart, {tuple(exps): Fraction(1)})

    # -- predicates ---------------------------------------------------

    @property
    def is_zero(self) -> bool:
        return not self.terms

    @property
    def is_constant(self) -> bool:
        return all(not any(e) for e in self.terms)

    def constant_value(self) -> Fraction:
        if self.is_zero:
            return Fraction(0)
        if not self.is_constant:
            raise ValueError("polynomial is not constant")
        return next(iter(self.terms.values()))

    def degree_in(self, index: int) -> int:
        if self.is_zero:
            return -1
        return max(e[index] for e in self.terms)

    def variables(self) -> set[int]:
        used: set[int] = set()
        for exps in self.terms:
            for i, e in enumerate(exps):
                if e:
                    used.add(i)
        return used

    def leading(self) -> tuple[Exponents, Fraction]:
        """Leading term under graded-lex order."""
        exps = max(self.terms, key=_grlex_key)
        return exps, self.terms[exps]

    # -- ring operations ----------------------------------------------

    def _check(self, other: "Polynomial") -> None:
        if self.chart is not other.chart and self.chart != other.chart:
            raise ChartMismatchError(
                f"polynomials on different charts: {self.chart.names} vs {other.chart.names}"
            )

    def __add__(self, other: "Polynomial") -> "Polynomial":
        self._check(other)
        terms = dict(self.terms)
        for exps, coeff in other.terms.items():
            acc = terms.get(exps, Fraction(0)) + coeff
            if acc:
                terms[exps] = acc
            else:
                terms.pop(exps, None)
        return Polynomial(self.chart, terms)

    def __neg__(self) -> "Polynomial":
        return Polynomial(self.chart, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other: "Polynomial") -> "Polynomial":
        return self + (-other)

    def __mul__(self, other: "Polynomial") -> "Polynomial":
        self._check(other)
        if self.is_zero or other.is_zero:
            return Polynomial(self.chart)
        if self.is_constant:
            return other.scale(self.constant_value())
        if other.is_constant:
            return self.scale(other.constant_value())
        terms: dict[Exponents, Fraction] = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                exps = tuple(a + b for a, b in zip(e1, e2))
                acc = terms.get(exps, Fraction(0)) + c1 * c2
                if acc:
                    terms[exps] = acc
                else:
                    terms.pop(exps, None)
        return Polynomial(self.chart, terms)

    def scale(self, value: Fraction) -> "Polynomial":
        value = Fraction(value)
        if not value:
            return Polynomial(self.chart)
        return Polynomial(self.chart, {e: c * value for e, c in self.terms.items()})

    def __pow__(self, n: int) -> "Polynomial":
        if n < 0:
            raise ValueError("negative polynomial power")
        result = Polynomial.constant(self.chart, 1)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Polynomial)
            and self.chart == other.chart
            and self.terms == other.terms
        )

    def __hash__(self) -> int:
        return hash((self.chart, frozenset(self.terms.items())))

    def __repr__(self) -> str:  # pragma: no cover - debugging aid
        return f"Polynomial({self!s})"

    def __str__(self) -> str:
        from .formlang import render_polynomial

        return render_polynomial(self)

    # -- calculus -----------------------------------------------------

    def diff(self, index: int) -> "Polynomial":
        terms: dict[Exponents, Fraction] = {}
        for exps, coeff in self.terms.items():
            e = exps[index]
            if not e:
                continue
            lowered = list(exps)
            lowered[index] = e - 1
            terms[tuple(lowered)] = coeff * e
        return Polynomial(self.chart, terms)

    def evaluate(self, values: Sequence[Fraction]) -> Fraction:
        total = Fraction(0)
        for exps, coeff in self.terms.items():
            term = coeff
            for e, v in zip(exps, values):
                if e:
                    term *= Fraction(v) ** e
            total += term
        return total

    def compose(self, images: Sequence["RationalFunction"]) -> "RationalFunction":
        """Substitute images[i] for coordinate i; images live on one target chart."""
        if not images:
            raise ValueError("empty substitution")
        target = images[0].chart
        total = RationalFunction.constant(target, 0)
        one = RationalFunction.constant(target, 1)
        for exps, coeff in self.terms.items():
            term = one.scale(coeff)
            for e, img in zip(exps, images):
                if e:
                    term = term * img**e
            total = total + term
        return total

    def map_chart(self, target: Chart, index_map: Sequence[int]) -> "Polynomial":
        """Re-express on `target`; index_map[i] = slot of coordinate i in target."""
        terms: dict[Exponents, Fraction] = {}
        for exps, coeff in self.terms.items():
            out = [0] * target.dimension
            for i, e in enumerate(exps):
                if e:
                    out[index_map[i]] = e
            terms[tuple(out)] = coeff
        return Polynomial(target, terms)


# -- integer-content helpers (gcd works over a scaled copy in Z[x]) ----


def _int_normalized(p: Polynomial) -> Polynomial:
    """Scale to integer coefficients, content 1, positive leading coefficient."""
    if p.is_zero:
        return p
    denom_lcm = 1
    for c in p.terms.values():
        denom_lcm = denom_lcm * c.denominator // math.gcd(denom_lcm, c.denominator)
    scaled = {e: c * denom_lcm for e, c in p.terms.items()}
    content = 0
    for c in scaled.values():
        content = math.gcd(content, abs(c.numerator))
    _, lead = max(scaled.items(), key=lambda item: _grlex_key(item[0]))
    sign = -1 if lead < 0 else 1
    factor = Fraction(sign, content)
    return Polynomial(p.chart, {e: c * factor for e, c in scaled.items()})


def _coeffs_in(p: Polynomial, var: int) -> dict[int, Polynomial]:
    """Split into coefficient polynomials by the power of one variable."""
    buckets: dict[int, dict[Exponents, Fraction]] = {}
    for exps, coeff in p.terms.items():
        d = exps[var]
        rest = list(exps)
        rest[var] = 0
        buckets.setdefault(d, {})[tuple(rest)] = coeff
    return {d: Polynomial(p.chart, t) for d, t in buckets.items()}


def _from_coeffs(chart: Chart, var: int, coeffs: Mapping[int, Polynomial]) -> Polynomial:
    terms: dict[Exponents, Fraction] = {}
    for d, poly in coeffs.items():
        for exps, coeff in poly.terms.items():
            out = list(exps)
            out[var] += d
            terms[tuple(out)] = coeff
    return Polynomial(chart, terms)


def _pseudo_rem(f: Polynomial, g: Polynomial, var: int) -> Polynomial:
    """Pseudo-remainder of f by g with respect to one variable."""
    dg = g.degree_in(var)
    gc = _coeffs_in(g, var)
    lc_g = gc[dg]
    r = f
    while not r.is_zero and r.degree_in(var) >= dg:
        dr = r.degree_in(var)
        rc = _coeffs_in(r, var)
        lc_r = rc[dr]
        shift = [0] * f.chart.dimension
        shift[var] = dr - dg
        mono = Polynomial(f.chart, {tuple(shift): Fraction(1)})
        r = r * lc_g - g * (lc_r * mono)
    return r


def _monomial_part(p: Polynomial) -> Exponents:
    """Exponentwise minimum over all terms (the largest common monomial)."""
    mins: list[int] | None = None
    for exps in p.terms:
        if mins is None:
            mins = list(exps)
        else:
            mins = [min(a, b) for a, b in zip(mins, exps)]
        if not any(mins):
            break
    return tuple(mins or ())


def _divide_monomial(p: Polynomial, mono: Exponents) -> Polynomial:
    if not any(mono):
        return p
    return Polynomial(p.chart, {tuple(a - b for a, b in zip(e, mono)): c for e, c in p.terms.items()})


def poly_gcd(f: Polynomial, g: Polynomial) -> Polynomial:
    """GCD in Q[x1..xn], normalized to integer-primitive positive-leading form."""
    if f.is_zero:
        return _int_normalized(g)
    if g.is_zero:
        return _int_normalized(f)
    if f.is_constant or g.is_constant:
        return Polynomial.constant(f.chart, 1)
    # split off the common monomial factor first; it settles the sparse
    # jet-coordinate entries without a remainder sequence
    mf, mg = _monomial_part(f), _monomial_part(g)
    common = tuple(min(a, b) for a, b in zip(mf, mg))
    f, g = _divide_monomial(f, mf), _divide_monomial(g, mg)
    mono = Polynomial(f.chart, {common: Fraction(1)})
    if f.is_constant or g.is_constant:
        return _int_normalized(mono)
    used = f.variables() | g.variables()
    var = max(used)
    fc, fp = _content_pp(f, var)
    gc, gp = _content_pp(g, var)
    cont = poly_gcd(fc, gc)
    a, b = fp, gp
    while not b.is_zero:
        r = _pseudo_rem(a, b, var)
        a = b
        b = r if r.is_zero else _primitive_part(r, var)
    return _int_normalized(mono * cont * a)


def _content_pp(p: Polynomial, var: int) -> tuple[Polynomial, Polynomial]:
    coeffs = _coeffs_in(p, var)
    content = Polynomial(p.chart)
    for c in coeffs.values():
        content = poly_gcd(content, c)
    pp = poly_exact_div(p, content)
    return content, pp


def _primitive_part(p: Polynomial, var: int) -> Polynomial:
    return _content_pp(p, var)[1]


def poly_exact_div(f: Polynomial, g: Polynomial) -> Polynomial:
    """Exact division; raises if g does not divide f."""
    if g.is_zero:
        raise ZeroDivisionError("polynomial division by zero")
    if f.is_zero:
        return f
    if g.is_constant:
        return f.scale(1 / g.constant_value())
    quotient_terms: dict[Exponents, Fraction] = {}
    g_lead_exps, g_lead_coeff = g.leading()
    rem = f
    while not rem.is_zero:
        r_exps, r_coeff = rem.leading()
        q_exps = tuple(a - b for a, b in zip(r_exps, g_lead_exps))
        if any(e < 0 for e in q_exps):
            raise ArithmeticError("inexact polynomial division")
        q_coeff = r_coeff / g_lead_coeff
        quotient_terms[q_exps] = quotient_terms.get(q_exps, Fraction(0)) + q_coeff
        rem = rem - g * Polynomial(f.chart, {q_exps: q_coeff})
    return Polynomial(f.chart, quotient_terms)


class RationalFunction:
    """Canonical quotient num/den of polynomials on one chart.

    Invariants: den != 0, gcd(num, den) = 1, den integer-primitive with
    positive graded-lex leading coefficient, zero is (0, 1).
    """

    __slots__ = ("chart", "num", "den")

    def __init__(self, num: Polynomial, den: Polynomial, *, _canonical: bool = False):
        if den.is_zero:
            raise ZeroDivisionError("zero denominator")
        if not _canonical:
            num, den = self._reduce(num, den)
        self.chart = num.chart
        self.num = num
        self.den = den

    @staticmethod
    def _reduce(num: Polynomial, den: Polynomial) -> tuple[Polynomial, Polynomial]:
        if num.is_zero:
            return num, Polynomial.constant(num.chart, 1)
        if den.is_constant:
            return num.scale(1 / den.constant_value()), Polynomial.constant(num.chart, 1)
        if len(num.terms) == 1 and len(den.terms) == 1:
            # monomial quotient: cancel exponents directly
            (ne, nc), (de, dc) = next(iter(num.terms.items())), next(iter(den.terms.items()))
            common = tuple(min(a, b) for a, b in zip(ne, de))
            num = Polynomial(num.chart, {tuple(a - c for a, c in zip(ne, common)): nc})
            den = Polynomial(den.chart, {tuple(a - c for a, c in zip(de, common)): dc})
            if den.is_constant:
                return num.scale(1 / den.constant_value()), Polynomial.constant(num.chart, 1)
        else:
            g = poly_gcd(num, den)
            if not (g.is_constant and g.constant_value() == 1):
                num = poly_exact_div(num, g)
                den = poly_exact_div(den, g)
        normal_den = _int_normalized(den)
        lead_exps, _ = den.leading()
        factor = normal_den.terms[lead_exps] / den.terms[lead_exps]
        return num.scale(factor), normal_den

    # -- constructors -------------------------------------------------

    @classmethod
    def constant(cls, chart: Chart, value) -> "RationalFunction":
        return cls(Polynomial.constant(chart, value), Polynomial.constant(chart, 1), _canonical=True)

    @classmethod
    def coordinate(cls, chart: Chart, index: int) -> "RationalFunction":
        return cls(Polynomial.coordinate(chart, index), Polynomial.constant(chart, 1), _canonical=True)

    @classmethod
    def from_polynomial(cls, p: Polynomial) -> "RationalFunction":
        return cls(p, Polynomial.constant(p.chart, 1), _canonical=True)

    # -- predicates ---------------------------------------------------

    @property
    def is_zero(self) -> bool:
        return self.num.is_zero

    @property
    def is_constant(self) -> bool:
        return self.num.is_constant and self.den.is_constant

    def constant_value(self) -> Fraction:
        return self.num.constant_value() / self.den.constant_value()

    # -- field operations ----------------------------------------------

    def _check(self, other: "RationalFunction") -> None:
        if self.chart != other.chart:
            raise ChartMismatchError(
                f"scalars on different charts: {self.chart.names} vs {other.chart.names}"
            )

    def __add__(self, other: "RationalFunction") -> "RationalFunction":
        self._check(other)
        return RationalFunction(self.num * other.den + other.num * self.den, self.den * other.den)

    def __neg__(self) -> "RationalFunction":
        return RationalFunction(-self.num, self.den, _canonical=True)

    def __sub__(self, other: "RationalFunction") -> "RationalFunction":
        return self + (-other)

    def __mul__(self, other: "RationalFunction") -> "RationalFunction":
        self._check(other)
        return RationalFunction(self.num * other.num, self.den * other.den)

    def __truediv__(self, other: "RationalFunction") -> "RationalFunction":
        self._check(other)
        if other.is_zero:
            raise ZeroDivisionError("division by the zero function")
        return RationalFunction(self.num * other.den, self.den * other.num)

    def scale(self, value: Fraction) -> "RationalFunction":
        return RationalFunction(self.num.scale(value), self.den, _canonical=not value == 0)

    def __pow__(self, n: int) -> "RationalFunction":
        if n < 0:
            if self.is_zero:
                raise ZeroDivisionError("inverse of the zero function")
            return RationalFunction(self.den**-n, self.num**-n)
        return RationalFunction(self.num**n, self.den**n)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, RationalFunction)
            and self.chart == other.chart
            and self.num == other.num
            and self.den == other.den
        )

    def __hash__(self) -> int:
        return hash((self.num, self.den))

    def __repr__(self) -> str:  # pragma: no cover - debugging aid
        return f"RationalFunction({self!s})"

    def __str__(self) -> str:
        from .formlang import render_scalar

        return render_scalar(self)

    # -- calculus -----------------------------------------------------

    def diff(self, index: int) -> "RationalFunction":
        # quotient rule; canonicalization reduces the square denominator
        return RationalFunction(
            self.num.diff(index) * self.den - self.num * self.den.diff(index),
            self.den * self.den,
        )

    def evaluate(self, values: Sequence[Fraction]) -> Fraction:
        den = self.den.evaluate(values)
        if not den:
            raise PoleError(f"denominator {self.den} vanishes at the point")
        return self.num.evaluate(values) / den

    def compose(self, images: Sequence["RationalFunction"]) -> "RationalFunction":
        num = self.num.compose(images)
        den = self.den.compose(images)
        if den.is_zero:
            raise PoleError("substitution sends a denominator to the zero function")
        return num / den

    def map_chart(self, target: Chart, index_map: Sequence[int]) -> "RationalFunction":
        return RationalFunction(
            self.num.map_chart(target, index_map),
            self.den.map_chart(target, index_map),
            _canonical=True,
        )

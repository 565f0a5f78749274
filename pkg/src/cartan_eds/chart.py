"""Coordinate charts and exact point assignments."""

from __future__ import annotations

import re
from fractions import Fraction
from typing import Sequence

from .errors import CartanEDSError, ChartMismatchError

_NAME_RE = re.compile(r"[A-Za-z][A-Za-z0-9_]*\Z")


class Chart:
    """Ordered coordinate names fixing an ambient manifold patch."""

    __slots__ = ("names", "_index")

    def __init__(self, names: Sequence[str]):
        names = tuple(names)
        if not names:
            raise CartanEDSError("a chart needs at least one coordinate")
        seen = set()
        for name in names:
            if not _NAME_RE.match(name):
                raise CartanEDSError(f"invalid coordinate name {name!r}")
            if name in seen:
                raise CartanEDSError(f"duplicate coordinate name {name!r}")
            seen.add(name)
        self.names = names
        self._index = {name: i for i, name in enumerate(names)}

    @property
    def dimension(self) -> int:
        return len(self.names)

    def index(self, name: str) -> int:
        try:
            return self._index[name]
        except KeyError:
            raise CartanEDSError(f"unknown coordinate {name!r}") from None

    def __contains__(self, name: str) -> bool:
        return name in self._index

    def __eq__(self, other) -> bool:
        return isinstance(other, Chart) and self.names == other.names

    def __hash__(self) -> int:
        return hash(self.names)

    def __repr__(self) -> str:
        return f"Chart({', '.join(self.names)})"

    def extend(self, extra: Sequence[str]) -> "Chart":
        """New chart with extra coordinates appended."""
        return Chart(self.names + tuple(extra))

    def embedding_into(self, target: "Chart") -> list[int]:
        """Index map sending each coordinate to its slot in `target`."""
        return [target.index(name) for name in self.names]

    def fresh_names(self, prefix: str, count: int) -> list[str]:
        """Names prefix1..prefixN avoiding collisions with existing ones."""
        out: list[str] = []
        k = 1
        while len(out) < count:
            candidate = f"{prefix}{k}"
            if candidate not in self._index:
                out.append(candidate)
            k += 1
        return out


class PointAssignment:
    """Exact rational value for every chart coordinate."""

    __slots__ = ("chart", "values")

    def __init__(self, chart: Chart, values: Sequence[Fraction]):
        values = tuple(Fraction(v) for v in values)
        if len(values) != chart.dimension:
            raise CartanEDSError(
                f"point needs {chart.dimension} values, got {len(values)}"
            )
        self.chart = chart
        self.values = values

    @classmethod
    def from_mapping(cls, chart: Chart, mapping: dict[str, Fraction]) -> "PointAssignment":
        """Missing coordinates default to 0; unknown names are errors."""
        values = [Fraction(0)] * chart.dimension
        for name, value in mapping.items():
            values[chart.index(name)] = Fraction(value)
        return cls(chart, values)

    @classmethod
    def origin(cls, chart: Chart) -> "PointAssignment":
        return cls(chart, [Fraction(0)] * chart.dimension)

    def check_chart(self, chart: Chart) -> None:
        if self.chart != chart:
            raise ChartMismatchError("point lives on a different chart")

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, PointAssignment)
            and self.chart == other.chart
            and self.values == other.values
        )

    def __repr__(self) -> str:
        pairs = ", ".join(f"{n}={v}" for n, v in zip(self.chart.names, self.values))
        return f"PointAssignment({pairs})"

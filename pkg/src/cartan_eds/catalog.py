"""Catalog of the discrete five-variable normal forms.

Each entry ships its model generators (as formlang text) together with
the invariant signature (rank, derived-flag ranks, Cartan class,
generic-point character, gender, and — for the two rank-2 models with
vanishing derived system — the behaviour of the covariant system's
derived system).  Identification is a signature match only; it never
claims a proven local equivalence.  Models that are coordinate
relabelings of one another, and model pairs indistinguishable by these
invariants, are grouped.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources
from .chart import Chart
from .errors import MathError
from .forms import DifferentialForm, exterior_derivative, wedge
from .linalg import function_kernel, clear_denominators, generic_rank
from .pfaffian import (
    CancelToken,
    PfaffianSystem,
    cartan_class,
    derived_flag,
    derived_system,
    gender,
    generic_character,
    is_integrable_frobenius,
)
from .rational import RationalFunction


@dataclass(frozen=True)
class CatalogSignature:
    rank: int
    flag_ranks: tuple[int, ...]
    cartan_class: int
    character: int
    gender: int
    covariant: str | None = None  # "integrable" | "self" | "other" for rank-2 null-derived 5-space systems

    def to_json(self) -> dict:
        return {
            "rank": self.rank,
            "flag_ranks": list(self.flag_ranks),
            "class": self.cartan_class,
            "character": self.character,
            "gender": self.gender,
            "covariant": self.covariant,
            "frobenius": [
                self.flag_ranks[i] == self.flag_ranks[i + 1]
                for i in range(len(self.flag_ranks) - 1)
            ],
        }

    @classmethod
    def from_json(cls, data: dict) -> "CatalogSignature":
        return cls(
            rank=data["rank"],
            flag_ranks=tuple(data["flag_ranks"]),
            cartan_class=data["class"],
            character=data["character"],
            gender=data["gender"],
            covariant=data.get("covariant"),
        )


@dataclass(frozen=True)
class CatalogEntry:
    name: str            # slug used as the system name in the data file
    title: str
    dimension: int
    generators: tuple[DifferentialForm, ...]
    signature: CatalogSignature
    group: str | None = None
    alias_of: str | None = None
    editor_corrected: bool = False
    note: str = ""

    def system(self) -> PfaffianSystem:
        return PfaffianSystem(self.generators[0].chart, self.generators)


def covariant_classification(system: PfaffianSystem, token: CancelToken | None = None) -> str | None:
    """For rank-2 systems with null derived system on a 5-chart, classify
    the derived system of the covariant rank-3 system.

    The covariant system is the unique rank-3 system whose derived system
    contains the given one; it is computed as the solution module of
    d omega^i ∧ omega^1 ∧ omega^2 ∧ theta = 0.
    """
    chart = system.chart
    if chart.dimension != 5 or system.rank != 2 or not system.is_independent:
        return None
    if derived_system(system, token).rank != 0:
        return None
    zero = RationalFunction.constant(chart, 0)
    top = system.top_wedge()
    rows = []
    for gen in system.generators:
        base = wedge(exterior_derivative(gen), top)  # 4-form; wedge with theta gives 5-form
        row = []
        for j in range(5):
            dxj = DifferentialForm.coordinate_differential(chart, j)
            product = wedge(base, dxj)
            row.append(product.terms.get((0, 1, 2, 3, 4), zero))
        rows.append(row)
    kernel = function_kernel(rows, chart)
    candidates = []
    for vec in kernel:
        cleared = clear_denominators(vec)
        candidates.append(
            DifferentialForm(chart, 1, {(j,): c for j, c in enumerate(cleared) if not c.is_zero})
        )
    rank, _ = generic_rank(candidates)
    if rank != 3:
        return "other"
    covariant = PfaffianSystem(chart, candidates).independent_subsystem()
    cov_derived = derived_system(covariant, token)
    if is_integrable_frobenius(cov_derived):
        return "integrable"
    merged, _ = generic_rank(list(system.generators) + list(cov_derived.generators))
    if cov_derived.rank == system.rank and merged == system.rank:
        return "self"
    return "other"


def compute_signature(system: PfaffianSystem, token: CancelToken | None = None) -> CatalogSignature:
    """Recompute the identification signature from model generators."""
    if not system.is_independent:
        system = system.independent_subsystem()
    flag = derived_flag(system, token)
    return CatalogSignature(
        rank=system.rank,
        flag_ranks=flag.ranks,
        cartan_class=cartan_class(system, token),
        character=generic_character(system, token),
        gender=gender(system, token),
        covariant=covariant_classification(system, token),
    )


def _load_raw() -> tuple[str, dict]:
    data_pkg = resources.files("cartan_eds") / "data"
    eds_text = (data_pkg / "catalog.eds").read_text(encoding="utf-8")
    meta = json.loads((data_pkg / "catalog_meta.json").read_text(encoding="utf-8"))
    return eds_text, meta


def load_catalog() -> list[CatalogEntry]:
    from .formlang import parse_document

    eds_text, meta = _load_raw()
    entries: list[CatalogEntry] = []
    charts: dict[int, Chart] = {}
    documents = {}
    doc = parse_document(eds_text)
    for item in meta["entries"]:
        slug = item["system"]
        if slug not in doc.systems:
            raise MathError(f"catalog data file misses system {slug!r}")
        generators = tuple(doc.systems[slug])
        entries.append(
            CatalogEntry(
                name=slug,
                title=item["title"],
                dimension=item["dimension"],
                generators=generators,
                signature=CatalogSignature.from_json(item["signature"]),
                group=item.get("group"),
                alias_of=item.get("alias_of"),
                editor_corrected=item.get("editor_corrected", False),
                note=item.get("note", ""),
            )
        )
    return entries


@dataclass(frozen=True)
class CatalogMatch:
    signature: CatalogSignature
    entries: tuple[CatalogEntry, ...]

    @property
    def matched(self) -> bool:
        return bool(self.entries)

    @property
    def unique(self) -> bool:
        return len(self.entries) == 1


def identify_catalog(system: PfaffianSystem, token: CancelToken | None = None) -> CatalogMatch:
    """Signature-based identification against the shipped catalog.

    The match ignores the ambient dimension (the signature is invariant
    under pulling back along projections with integrable fibres), so
    models are recognized in any chart of dimension <= 6.
    """
    if system.chart.dimension > 6:
        raise MathError("catalog identification is limited to chart dimension <= 6")
    signature = compute_signature(system, token)
    matches = [
        entry
        for entry in load_catalog()
        if entry.alias_of is None and entry.signature == signature
    ]
    return CatalogMatch(signature, tuple(matches))


@dataclass(frozen=True)
class SelfTestRow:
    name: str
    title: str
    ok: bool
    shipped: CatalogSignature
    recomputed: CatalogSignature | None
    error: str | None = None


def catalog_selftest(token: CancelToken | None = None) -> list[SelfTestRow]:
    """Recompute every entry's signature (aliases included) and compare."""
    rows: list[SelfTestRow] = []
    for entry in load_catalog():
        try:
            recomputed = compute_signature(entry.system(), token)
            rows.append(
                SelfTestRow(entry.name, entry.title, recomputed == entry.signature, entry.signature, recomputed)
            )
        except MathError as exc:
            rows.append(SelfTestRow(entry.name, entry.title, False, entry.signature, None, str(exc)))
    return rows

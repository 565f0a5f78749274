import pytest

from cartan_eds.catalog import (
    CatalogSignature,
    catalog_selftest,
    compute_signature,
    covariant_classification,
    identify_catalog,
    load_catalog,
)
from cartan_eds.chart import Chart
from cartan_eds.errors import MathError
from cartan_eds.formlang import parse_form
from cartan_eds.pfaffian import PfaffianSystem


def system_of(coords: str, *gens: str) -> PfaffianSystem:
    chart = Chart(coords.split())
    return PfaffianSystem(chart, [parse_form(g, chart) for g in gens])


class TestCatalogData:
    def test_loads(self):
        entries = load_catalog()
        assert len(entries) == 16
        names = {entry.name for entry in entries}
        assert "engel_flag" in names and "rank_3_s2_zero" in names

    def test_alias_marks_editor_correction(self):
        entries = {e.name: e for e in load_catalog()}
        corrected = entries["rank_3_second_derived_integrable_corrected"]
        assert corrected.editor_corrected
        assert corrected.alias_of == "rank_3_second_derived_integrable"

    def test_signatures_separate_canonical_entries_up_to_groups(self):
        entries = [e for e in load_catalog() if e.alias_of is None]
        by_signature: dict[CatalogSignature, list] = {}
        for entry in entries:
            by_signature.setdefault(entry.signature, []).append(entry)
        for signature, members in by_signature.items():
            if len(members) > 1:
                groups = {m.group for m in members}
                assert groups == {"length-3 flag"}


class TestSelfTest:
    def test_all_entries_pass(self):
        rows = catalog_selftest()
        assert rows and all(row.ok for row in rows)

    def test_tampered_entry_fails(self):
        entries = load_catalog()
        rows = catalog_selftest()
        # fault injection: recompute against a tampered shipped signature
        target = entries[4]
        tampered = CatalogSignature(
            rank=target.signature.rank + 1,
            flag_ranks=target.signature.flag_ranks,
            cartan_class=target.signature.cartan_class,
            character=target.signature.character,
            gender=target.signature.gender,
            covariant=target.signature.covariant,
        )
        recomputed = compute_signature(target.system())
        assert recomputed == target.signature
        assert recomputed != tampered


class TestIdentify:
    def test_engel_in_four_chart(self):
        system = system_of("x1 x2 x3 x4", "dx2 + x3*dx1", "dx3 + x4*dx1")
        match = identify_catalog(system)
        assert match.unique
        assert match.entries[0].title == "Engel flag"

    def test_vanishing_quartic_rank3(self):
        system = system_of(
            "x1 x2 x3 x4 x5",
            "dx1 + (x3 + x4*x5)*dx4",
            "dx2 + x3*dx5",
            "dx3 + x4*dx5",
        )
        match = identify_catalog(system)
        assert match.unique
        assert match.entries[0].title == "rank-3, S2=0 model"

    def test_integrable_rank_3(self):
        system = system_of("x1 x2 x3 x4 x5", "dx1", "dx2", "dx3")
        match = identify_catalog(system)
        assert match.unique
        assert match.entries[0].title == "integrable rank 3"

    def test_flag_group_is_reported_together(self):
        system = system_of(
            "x1 x2 x3 x4 x5", "dx2 + x3*dx1", "dx3 + x4*dx1", "dx4 + x5*dx1"
        )
        match = identify_catalog(system)
        assert len(match.entries) == 2
        assert {e.title for e in match.entries} == {"homogeneous flag", "inhomogeneous flag"}

    def test_no_discrete_match(self):
        # non-integrable rank 4 in six variables: the shipped rank-4 model
        # is integrable, so the flag ranks cannot match
        system = system_of(
            "x1 x2 x3 x4 x5 x6",
            "dx1 + x4*dx5",
            "dx2",
            "dx3",
            "dx6",
        )
        match = identify_catalog(system)
        assert not match.matched
        assert match.signature.rank == 4
        assert match.signature.flag_ranks == (4, 3, 3)

    def test_dimension_bound(self):
        system = system_of("x1 x2 x3 x4 x5 x6 x7", "dx1")
        with pytest.raises(MathError):
            identify_catalog(system)

    def test_self_identification_of_every_canonical_entry(self):
        for entry in load_catalog():
            match = identify_catalog(entry.system())
            names = {e.name for e in match.entries}
            target = entry.alias_of or entry.name
            assert target in names


class TestCatalogProperties:
    def test_frobenius_iff_derived_fixpoint_on_catalog(self):
        from cartan_eds.pfaffian import derived_system, is_integrable_frobenius

        for entry in load_catalog():
            system = entry.system()
            assert is_integrable_frobenius(system) == (
                derived_system(system).rank == system.rank
            )

    def test_kiss_lemma_on_null_characteristic_catalog_systems(self):
        # character 1 <=> derived rank drop 1, for catalog systems with a
        # null characteristic system and rank >= 2
        from cartan_eds.pfaffian import cartan_class, derived_system, generic_character

        checked = 0
        for entry in load_catalog():
            system = entry.system()
            if cartan_class(system) != system.chart.dimension:
                continue
            drop = system.rank - derived_system(system).rank
            character = entry.signature.character
            if system.rank >= 2:
                checked += 1
                assert (character == 1) == (drop == 1), entry.name
        assert checked >= 5
        # pinned exception: the rank-1 class-five system has drop 1 with
        # character 2, so the biconditional needs the rank >= 2 hypothesis
        entries = {e.name: e for e in load_catalog()}
        d5 = entries["darboux_class_5"].system()
        assert d5.rank - derived_system(d5).rank == 1
        assert entries["darboux_class_5"].signature.character == 2


class TestCovariantClassification:
    def test_integrable_covariant(self):
        system = system_of("x1 x2 x3 x4 x5", "dx1 + x4*dx3", "dx2 + x5*dx3")
        assert covariant_classification(system) == "integrable"

    def test_self_covariant(self):
        system = system_of(
            "x1 x2 x3 x4 x5", "dx1 + (x3 + x4*x5)*dx4", "dx2 + x3*dx5"
        )
        assert covariant_classification(system) == "self"

    def test_not_applicable(self):
        assert covariant_classification(system_of("x1 x2 x3 x4 x5", "dx1", "dx2")) is None
        assert covariant_classification(system_of("x1 x2 x3 x4", "dx2 + x3*dx1", "dx3 + x4*dx1")) is None

"""Exact symbolic invariants of Pfaffian systems and first-order PDE systems."""

from .chart import Chart, PointAssignment
from .errors import (
    CancelledError,
    CartanEDSError,
    ChartMismatchError,
    DegreeError,
    MathError,
    ParseError,
    PoleError,
    RankDeficiencyError,
    RegularityError,
    UsageError,
)
from .forms import (
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
    wedge_power,
)
from .linalg import RankCertificate, generic_rank, kernel_at_point
from .pfaffian import (
    CancelToken,
    CharacterReport,
    DerivedFlag,
    PfaffianSystem,
    cartan_class,
    cauchy_characteristic_system,
    character_chain,
    darboux_class,
    derived_flag,
    derived_system,
    gender,
    gender_of_form,
    generic_character,
    is_integrable_frobenius,
    polar_space,
    reduce_mod_system,
    singularity_scan,
    structure_congruences,
)
from .contact import (
    ContactChart,
    Hamiltonian,
    PDESystem,
    build_contact_system,
    cauchy_char_field,
    commutator_hamiltonian,
    complete_system_check,
    hamiltonian_of_field,
    integrability_check,
    jacobi_bracket,
    lagrange_bracket,
    lie_field_from_hamiltonian,
    prolong_vector_field,
    restrict_system,
    total_derivative,
)
from .catalog import (
    CatalogEntry,
    CatalogMatch,
    CatalogSignature,
    catalog_selftest,
    compute_signature,
    identify_catalog,
    load_catalog,
)
from .formlang import (
    SystemDocument,
    dump_report,
    make_report,
    parse_document,
    render_document,
)
from .rational import Polynomial, RationalFunction

__version__ = "0.1.0"

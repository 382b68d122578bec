"""Verification toolkit for deterministic hidden-variables models of qubits.

Provides Hilbert-space arithmetic, the ontological-model framework with
Born-rule / tracking / projector-rule checkers, two concrete quantum-
consistent models, and the composition pipeline that produces machine-
checkable contradiction certificates for product preparations.
"""

__version__ = "0.1.0"

from .hilbert import (
    ATOL,
    MINUS,
    ONE,
    PLUS,
    ZERO,
    Ket,
    Observable,
    PbrBasis,
    born_prob,
    build_pbr_basis,
    computational_basis_observable,
    fix_phase,
    inner,
    orthogonal_complement_2d,
    pbr_observable,
    projector_observable,
    spin_observable,
    tensor,
)
from .ontology import (
    AssumptionViolation,
    BellPoint,
    BornReport,
    HiddenState,
    OntologicalModel,
    OutcomeEstimate,
    SpherePoint,
    TrackingReport,
    check_assumption_a,
    check_born_reproduction,
    random_ket,
    random_observable,
    respond_distribution,
    tracks,
)
from .models import (
    BellModel,
    FaultyProjectorModel,
    KsModel,
    bell_sample,
    bloch_from_ket,
    get_model,
    ket_from_bloch,
    ks_sample,
    orthonormal_frame,
    tilted_axis,
)
from .nogo import (
    CompositeHiddenState,
    ContradictionCertificate,
    ForcedOutcome,
    MeasureEstimate,
    TrackingError,
    WitnessSearchError,
    compose_pi_c,
    compose_pi_ctr,
    forced_zero_outcomes,
    run_contradiction,
    tracking_set_measure,
    verify_certificate,
)

__all__ = [
    "ATOL",
    "MINUS",
    "ONE",
    "PLUS",
    "ZERO",
    "AssumptionViolation",
    "BellModel",
    "BellPoint",
    "BornReport",
    "CompositeHiddenState",
    "ContradictionCertificate",
    "FaultyProjectorModel",
    "ForcedOutcome",
    "HiddenState",
    "Ket",
    "KsModel",
    "MeasureEstimate",
    "Observable",
    "OntologicalModel",
    "OutcomeEstimate",
    "PbrBasis",
    "SpherePoint",
    "TrackingError",
    "TrackingReport",
    "WitnessSearchError",
    "bell_sample",
    "bloch_from_ket",
    "born_prob",
    "build_pbr_basis",
    "check_assumption_a",
    "check_born_reproduction",
    "compose_pi_c",
    "compose_pi_ctr",
    "computational_basis_observable",
    "fix_phase",
    "forced_zero_outcomes",
    "get_model",
    "inner",
    "ket_from_bloch",
    "ks_sample",
    "orthogonal_complement_2d",
    "orthonormal_frame",
    "pbr_observable",
    "projector_observable",
    "random_ket",
    "random_observable",
    "respond_distribution",
    "run_contradiction",
    "spin_observable",
    "tensor",
    "tilted_axis",
    "tracking_set_measure",
    "tracks",
    "verify_certificate",
]

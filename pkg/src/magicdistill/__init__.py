"""Magic state distillation for qudits of prime dimension."""

from .codes import StabilizerCode, clifford_gate, code_projector, get_code
from .distill import (
    DistillationOutcome,
    IterationTrace,
    Verdict,
    depolarize,
    distill_5qutrit_canonical,
    distill_5qutrit_closed_form,
    distill_generic,
    get_map,
    iterate_map,
    scan_hadamard_plane,
    success_probability_curve,
    suppression_coefficients,
    suppression_exponent,
    threshold_search,
)
from .protocols import (
    ParityState,
    PhaseState,
    equatorialize,
    inject,
    injection_group_closure,
    parity_prepare,
    parity_step,
    promoted_group_probe,
)
from .states import BlochVector, HadamardPlanePoint
from .weyl import PhasedPauli

__version__ = "0.1.0"

__all__ = [
    "BlochVector",
    "DistillationOutcome",
    "HadamardPlanePoint",
    "IterationTrace",
    "ParityState",
    "PhaseState",
    "PhasedPauli",
    "StabilizerCode",
    "Verdict",
    "clifford_gate",
    "code_projector",
    "depolarize",
    "distill_5qutrit_canonical",
    "distill_5qutrit_closed_form",
    "distill_generic",
    "equatorialize",
    "get_code",
    "get_map",
    "inject",
    "injection_group_closure",
    "iterate_map",
    "parity_prepare",
    "parity_step",
    "promoted_group_probe",
    "scan_hadamard_plane",
    "success_probability_curve",
    "suppression_coefficients",
    "suppression_exponent",
    "threshold_search",
]

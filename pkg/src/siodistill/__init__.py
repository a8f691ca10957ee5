"""Optimal probabilistic coherence distillation under strictly incoherent operations."""

from .distill import DistillationPlan, VerificationReport, closed_form_distribution, closed_form_value, distill, verify_plan
from .errors import DistillError, InputFormatError, InvalidStateError, MeasureError
from .lp import LinearProgram, build_distillation_lp, simplex_solve, solve_lp, to_standard_form, vertex_enumeration_oracle
from .majorization import TargetEnsemble, check_pure_to_ensemble, check_state_to_ensemble
from .measures import CoherenceMeasure, builtin_measure, l1_coherence, measure_from_table, relative_entropy_coherence
from .quantum import DensityMatrix, apply_channel, apply_instrument, is_io_kraus, is_sio_kraus, validate_density_matrix
from .subspace import PureCoherentSubspace, SubspaceDecomposition, find_maximal_subspaces, is_distillable, is_reversible

__version__ = "0.1.0"

__all__ = [
    "CoherenceMeasure", "DensityMatrix", "DistillError", "DistillationPlan", "InputFormatError",
    "InvalidStateError", "LinearProgram", "MeasureError", "PureCoherentSubspace", "SubspaceDecomposition",
    "TargetEnsemble", "VerificationReport", "apply_channel", "apply_instrument", "build_distillation_lp",
    "builtin_measure", "check_pure_to_ensemble", "check_state_to_ensemble", "closed_form_distribution",
    "closed_form_value", "distill", "find_maximal_subspaces", "is_distillable", "is_io_kraus", "is_reversible",
    "is_sio_kraus", "l1_coherence", "measure_from_table", "relative_entropy_coherence", "simplex_solve",
    "solve_lp", "to_standard_form", "validate_density_matrix", "verify_plan", "vertex_enumeration_oracle",
]

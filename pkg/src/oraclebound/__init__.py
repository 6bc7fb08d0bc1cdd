"""Adaptive-inference opportunity analysis.

Quantifies how much an ideal per-instance model selector could save over a
set of backbone classifiers: closed-form and exact bounds on its cost and
accuracy, estimation of cross-model error dependencies from correctness
records, per-instance selection labels, and state-space design tools.
"""

__version__ = "0.1.0"

from .bounds import (
    cascade_from_alpha_profile,
    gain_metrics,
    oracle_conservative,
    oracle_constant_alpha,
    oracle_from_alpha_profile,
    oracle_from_cascade,
    selection_frequencies,
)
from .core import (
    AdaptationLabel,
    AlphaProfile,
    CorrectnessMatrix,
    Envelope,
    ErrorCascade,
    ModelState,
    OracleOutcome,
    StateSpace,
    validate_state_space,
)
from .design import (
    SmallestStateCheck,
    SubsetPlan,
    continuous_bound,
    greedy_growth,
    optimal_subset,
    optimal_subsets,
    pareto_staircase,
    smallest_state_admissible,
)
from .empirical import (
    PredictionRecord,
    build_correctness,
    estimate_alpha,
    estimate_cascade,
    matrix_from_records,
    measured_accuracies,
    resolve_accuracies,
    simulate_oracle,
)
from .errors import (
    CascadeConsistencyError,
    FileFormatError,
    MatrixBuildError,
    OracleBoundError,
    SpaceValidationError,
)
from .synth import SynthSpec, SynthStats, generate

__all__ = [
    "AdaptationLabel",
    "AlphaProfile",
    "CascadeConsistencyError",
    "CorrectnessMatrix",
    "Envelope",
    "ErrorCascade",
    "FileFormatError",
    "MatrixBuildError",
    "ModelState",
    "OracleBoundError",
    "OracleOutcome",
    "PredictionRecord",
    "SmallestStateCheck",
    "SpaceValidationError",
    "StateSpace",
    "SubsetPlan",
    "SynthSpec",
    "SynthStats",
    "build_correctness",
    "cascade_from_alpha_profile",
    "continuous_bound",
    "estimate_alpha",
    "estimate_cascade",
    "gain_metrics",
    "generate",
    "greedy_growth",
    "matrix_from_records",
    "measured_accuracies",
    "optimal_subset",
    "optimal_subsets",
    "oracle_conservative",
    "oracle_constant_alpha",
    "oracle_from_alpha_profile",
    "oracle_from_cascade",
    "pareto_staircase",
    "resolve_accuracies",
    "selection_frequencies",
    "simulate_oracle",
    "smallest_state_admissible",
    "validate_state_space",
]

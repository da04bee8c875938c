"""Adaptive-filter benchmark: LMS, BNDR-LMS and regularized affine projection.

The package provides the three update rules behind one step interface, a
deterministic system-identification harness with ensemble averaging,
learning-curve metrics, and a CSV-emitting CLI (``apbench``).
"""

from .algorithms import (
    AlgorithmConfig,
    AlgorithmKind,
    ComplexityModel,
    DataMatrix,
    MuMode,
    StepOutcome,
    ap_step,
    auto_mu,
    bndr_lms_step,
    i_inv,
    lms_step,
    max_stable_mu,
    step_multiplies,
    step_multiplies_literal,
)
from .linalg import SingularMatrixError, solve_regularized
from .metrics import MseTrace, TmReport, compute_tm, misalignment_db, smooth
from .signals import (
    FrequencyResponse,
    NoiseKind,
    NoiseSpec,
    TapDelayLine,
    design_highpass_fir,
    frequency_response,
    generate_noise,
    input_variance,
)
from .sysid import (
    AdaptationError,
    EnsembleResult,
    ExperimentConfig,
    PlantModel,
    RunResult,
    run_ensemble,
    run_single,
)

__version__ = "0.1.0"

__all__ = [
    "AlgorithmConfig",
    "AlgorithmKind",
    "ComplexityModel",
    "DataMatrix",
    "MuMode",
    "StepOutcome",
    "ap_step",
    "auto_mu",
    "bndr_lms_step",
    "i_inv",
    "lms_step",
    "max_stable_mu",
    "step_multiplies",
    "step_multiplies_literal",
    "SingularMatrixError",
    "solve_regularized",
    "MseTrace",
    "TmReport",
    "compute_tm",
    "misalignment_db",
    "smooth",
    "FrequencyResponse",
    "NoiseKind",
    "NoiseSpec",
    "TapDelayLine",
    "design_highpass_fir",
    "frequency_response",
    "generate_noise",
    "input_variance",
    "AdaptationError",
    "EnsembleResult",
    "ExperimentConfig",
    "PlantModel",
    "RunResult",
    "run_ensemble",
    "run_single",
    "__version__",
]

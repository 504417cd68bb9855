"""Kicked-rotator simulator with an exact split-step backend and a
quantum-gate backend whose Fourier transforms carry per-gate random
imperfections."""

__version__ = "0.1.0"

from .classical import (
    ClassicalEnsemble,
    classical_diffusion_rate,
    initial_ensemble,
    step_classical,
    step_classical_inverse,
)
from .observables import (
    ObservableSeries,
    ProbabilityDistribution,
    TimescalePrediction,
    detect_peaks,
    detect_tp,
    detected_power_of_two_levels,
    fit_diffusion,
    ipr,
    plateau_level,
    predict_timescales,
    probabilities,
    second_moment,
)
from .qft import (
    GatePlan,
    NoiseModel,
    QftDirection,
    apply_controlled_phase,
    apply_single_qubit_gate,
    build_qft_plan,
    noisy_qft,
    sample_A_gate,
    sample_B_angle,
    step_gates,
)
from .rotor import (
    Representation,
    RotatorParams,
    StateError,
    StateVector,
    TransformDirection,
    apply_kick_phase,
    apply_rotation_phase,
    exact_transform,
    init_delta_state,
    signed_levels,
    step_exact,
)
from .runner import (
    Backend,
    ExperimentConfig,
    NormDriftError,
    RunResult,
    analyze,
    expand_grid,
    preset,
    run_experiment,
    run_sweep,
)

__all__ = [
    "__version__",
    "Backend",
    "ClassicalEnsemble",
    "ExperimentConfig",
    "GatePlan",
    "NoiseModel",
    "NormDriftError",
    "ObservableSeries",
    "ProbabilityDistribution",
    "QftDirection",
    "Representation",
    "RotatorParams",
    "RunResult",
    "StateError",
    "StateVector",
    "TimescalePrediction",
    "TransformDirection",
    "analyze",
    "apply_controlled_phase",
    "apply_kick_phase",
    "apply_rotation_phase",
    "apply_single_qubit_gate",
    "build_qft_plan",
    "classical_diffusion_rate",
    "detect_peaks",
    "detect_tp",
    "detected_power_of_two_levels",
    "exact_transform",
    "expand_grid",
    "fit_diffusion",
    "init_delta_state",
    "initial_ensemble",
    "ipr",
    "noisy_qft",
    "plateau_level",
    "predict_timescales",
    "preset",
    "probabilities",
    "run_experiment",
    "run_sweep",
    "sample_A_gate",
    "sample_B_angle",
    "second_moment",
    "signed_levels",
    "step_classical",
    "step_classical_inverse",
    "step_exact",
    "step_gates",
]

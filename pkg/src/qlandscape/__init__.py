"""Noisy density-matrix QAOA simulation and information-content landscape
analysis.

Submodules
----------
densmat   dense density-matrix engine (states, unitaries, spectra)
ansatz    Ising-chain Hamiltonians, alternating-layer circuits, timing models
noise     depolarizing / amplitude-damping / dephasing channels and schedules
sampler   shot-based cost estimation and shot-noise diagnostics
icla      information-content landscape analysis (gradient-norm estimator)
analysis  flattening fits, effective T1, spectral diagnostics
cli       experiment orchestration (sweep | icla | analyze | spectrum | noise-floor)

Hot kernels run in a compiled extension when available; `backend_name()`
reports which implementation is active.
"""

from .backend import backend_name
from .densmat import (
    DensityMatrix,
    QubitUnitary,
    StateCorruptionError,
    apply_circuit,
    apply_unitary,
    eigen_spectrum,
    maximally_mixed,
    new_basis_state,
    new_plus_state,
    purity,
)
from .ansatz import (
    IsingHamiltonian,
    ParameterVector,
    TimingModel,
    build_circuit,
    circuit_depth,
    circuit_runtime,
    exact_cost,
    gate_counts,
    sample_hamiltonian,
    timing_model,
)
from .noise import (
    CoherenceSample,
    NoiseModel,
    apply_ad_dephasing,
    apply_amplitude_damping,
    apply_depolarizing,
    apply_schedule,
    sample_coherences,
)
from .sampler import (
    CostEstimate,
    ShotBatch,
    cost_spectrum,
    estimate_cost,
    sample_bitstrings,
    shot_energy,
    shot_noise_floor,
)
from .icla import (
    IcResult,
    Landscape,
    WalkDeltas,
    information_content,
    landscape_size,
    maximize_ic,
    read_landscape,
    run_icla,
    sample_landscape,
    symbolize,
    walk_deltas,
    write_landscape,
)
from .analysis import (
    EffectiveT1Report,
    FlatteningFit,
    GradientCurve,
    analytic_decay_spectrum,
    effective_t1,
    finite_difference_gradient_stats,
    fit_flattening,
    spectral_profile,
    t1_percentile,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]

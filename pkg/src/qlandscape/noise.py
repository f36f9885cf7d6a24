"""Single-qubit noise channels and time-based noise schedules.

Channels are implemented as direct matrix-element maps on the target
qubit's 2x2 block structure rather than explicit Kraus sums (the tests
check Kraus equivalence).  Amplitude damping relaxes populations toward
|0> at rate 1/T1 and scales coherences by e^{-t/(2 T1)}; the combined
damping+dephasing channel scales coherences by e^{-t/T2} instead, with
the physicality constraint T2 <= 2 T1.
"""

import math
from dataclasses import dataclass

import numpy as np

from . import ansatz
from .backend import kernels
from .densmat import DensityMatrix, apply_unitary

NOISE_KINDS = ("none", "depolarizing", "amplitude_damping", "ad_plus_dephasing")
SCHEDULES = ("per_layer", "per_gate")

# Redraw budget for rejection sampling of coherence times.
MAX_REDRAWS = 1000


@dataclass
class CoherenceSample:
    """Per-qubit T1/T2 times in microseconds; T2 defaults to the pure
    amplitude-damping limit 2*T1."""

    t1: np.ndarray
    t2: np.ndarray | None = None

    def __post_init__(self):
        self.t1 = np.atleast_1d(np.asarray(self.t1, dtype=float))
        if self.t2 is None:
            self.t2 = 2.0 * self.t1
        self.t2 = np.atleast_1d(np.asarray(self.t2, dtype=float))
        if self.t1.shape != self.t2.shape:
            raise ValueError("t1 and t2 lists must have equal length")
        if np.any(self.t1 <= 0) or np.any(self.t2 <= 0):
            raise ValueError("coherence times must be positive")
        if np.any(self.t2 > 2.0 * self.t1 * (1 + 1e-12)):
            raise ValueError("unphysical coherences: require T2 <= 2*T1 per qubit")

    @property
    def n_qubits(self) -> int:
        return self.t1.size


@dataclass
class NoiseModel:
    """Tagged noise configuration applied by :func:`apply_schedule`.

    ``p`` is the depolarizing probability per qubit per gate slot;
    time-based kinds need a :class:`CoherenceSample`.  With the
    ``per_layer`` schedule a terminal idle covering state-prep/readout
    time is appended unless ``terminal_idle`` is false.
    """

    kind: str = "none"
    p: float = 0.0
    coherences: CoherenceSample | None = None
    schedule: str = "per_layer"
    terminal_idle: bool = True

    def __post_init__(self):
        if self.kind not in NOISE_KINDS:
            raise ValueError(f"unknown noise kind {self.kind!r}; expected {NOISE_KINDS}")
        if self.schedule not in SCHEDULES:
            raise ValueError(f"unknown schedule {self.schedule!r}; expected {SCHEDULES}")
        if self.kind == "depolarizing" and not 0.0 <= self.p <= 1.0:
            raise ValueError(f"depolarizing probability {self.p} outside [0, 1]")
        if self.kind in ("amplitude_damping", "ad_plus_dephasing") and self.coherences is None:
            raise ValueError(f"noise kind {self.kind!r} needs coherence times")

    @property
    def time_based(self) -> bool:
        return self.kind in ("amplitude_damping", "ad_plus_dephasing")


def apply_depolarizing(state: DensityMatrix, qubit: int, p: float,
                       inplace: bool = False) -> DensityMatrix:
    """Mix the target qubit with probability p split over X, Y, Z."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"depolarizing probability {p} outside [0, 1]")
    _check_qubit(state, qubit)
    out = state if inplace else state.copy()
    kernels.depolarize(out.data, qubit, p)
    return out


def apply_amplitude_damping(state: DensityMatrix, qubit: int, t: float, t1: float,
                            inplace: bool = False) -> DensityMatrix:
    """Relax the target qubit toward |0> for a duration t given T1."""
    if t < 0:
        raise ValueError("elapsed time must be non-negative")
    if t1 <= 0:
        raise ValueError("T1 must be positive")
    _check_qubit(state, qubit)
    out = state if inplace else state.copy()
    keep = math.exp(-t / t1)
    kernels.damp(out.data, qubit, keep, math.sqrt(keep))
    return out


def apply_ad_dephasing(state: DensityMatrix, qubit: int, t: float, t1: float, t2: float,
                       inplace: bool = False) -> DensityMatrix:
    """Amplitude damping on populations plus T2 decay of coherences."""
    if t < 0:
        raise ValueError("elapsed time must be non-negative")
    if t1 <= 0 or t2 <= 0:
        raise ValueError("coherence times must be positive")
    if t2 > 2.0 * t1 * (1 + 1e-12):
        raise ValueError(f"unphysical coherences: T2={t2} exceeds 2*T1={2 * t1}")
    _check_qubit(state, qubit)
    out = state if inplace else state.copy()
    kernels.damp(out.data, qubit, math.exp(-t / t1), math.exp(-t / t2))
    return out


def _check_qubit(state: DensityMatrix, qubit: int) -> None:
    if not 0 <= qubit < state.n_qubits:
        raise ValueError(f"qubit {qubit} out of range for {state.n_qubits} qubits")


def sample_coherences(n_qubits: int, mu1: float, sigma1: float, mu2: float, sigma2: float,
                      seed: int) -> CoherenceSample:
    """Per-qubit normal draws of (T1, T2), rejected until T1 >= 1 us and
    1 us <= T2 <= 2*T1.

    Rejection (not truncation) keeps the distribution shape; a qubit that
    exhausts the redraw budget raises with the offending parameters.
    """
    if mu1 <= 0 or mu2 <= 0:
        raise ValueError("mean coherence times must be positive")
    rng = np.random.default_rng(seed)
    t1 = np.empty(n_qubits)
    t2 = np.empty(n_qubits)
    for q in range(n_qubits):
        t1[q] = _rejection_draw(rng, mu1, sigma1, 1.0, math.inf, "T1")
        t2[q] = _rejection_draw(rng, mu2, sigma2, 1.0, 2.0 * t1[q], "T2")
    return CoherenceSample(t1, t2)


def _rejection_draw(rng, mu, sigma, lo, hi, label):
    for _ in range(MAX_REDRAWS):
        value = rng.normal(mu, sigma)
        if lo <= value <= hi:
            return value
    raise RuntimeError(
        f"exceeded {MAX_REDRAWS} redraws sampling {label} ~ N({mu}, {sigma}) "
        f"into [{lo:.3g}, {hi:.3g}]"
    )


def _apply_channel(state: DensityMatrix, qubit: int, model: NoiseModel, t: float) -> None:
    if model.kind == "depolarizing":
        apply_depolarizing(state, qubit, model.p, inplace=True)
    elif model.kind == "amplitude_damping":
        apply_amplitude_damping(state, qubit, t, model.coherences.t1[qubit], inplace=True)
    elif model.kind == "ad_plus_dephasing":
        apply_ad_dephasing(
            state, qubit, t, model.coherences.t1[qubit], model.coherences.t2[qubit],
            inplace=True,
        )


def apply_schedule(state: DensityMatrix, gates, model: NoiseModel,
                   timing: "ansatz.TimingModel", layers: int,
                   inplace: bool = False) -> DensityMatrix:
    """Interleave a gate list with noise-channel applications.

    per_layer: after each layer's gates, the channel acts on every qubit
    for the platform's per-layer duration; a final idle of length
    runtime(n, L) - L * layer_time covers prep/readout (time-based kinds
    only, and only when ``model.terminal_idle``).

    per_gate: each gate is followed by its channel on the participating
    qubits, with duration 2*t_2q for two-qubit gates (two native
    entangling pulses per logical coupling gate) or t_1q for single-qubit
    gates; depolarizing ignores durations and fires once per qubit per
    gate.
    """
    n = state.n_qubits
    out = state if inplace else state.copy()
    if model.kind == "none":
        for gate in gates:
            apply_unitary(out, gate, inplace=True)
        return out
    if model.time_based and model.coherences.n_qubits < n:
        raise ValueError(
            f"noise model has coherence times for {model.coherences.n_qubits} qubits, "
            f"state has {n}"
        )

    if model.schedule == "per_layer":
        if layers > 0:
            if len(gates) % layers:
                raise ValueError(
                    f"{len(gates)} gates do not divide evenly into {layers} layers"
                )
            per_layer = len(gates) // layers
            tau = timing.layer_time
            for layer in range(layers):
                for gate in gates[layer * per_layer:(layer + 1) * per_layer]:
                    apply_unitary(out, gate, inplace=True)
                for q in range(n):
                    _apply_channel(out, q, model, tau)
        if model.time_based and model.terminal_idle:
            idle = ansatz.circuit_runtime(n, layers, timing) - layers * timing.layer_time
            if idle > 0:
                for q in range(n):
                    _apply_channel(out, q, model, idle)
    else:
        for gate in gates:
            apply_unitary(out, gate, inplace=True)
            duration = 2.0 * timing.t_2q if gate.arity == 2 else timing.t_1q
            for q in gate.targets:
                _apply_channel(out, q, model, duration)
    return out

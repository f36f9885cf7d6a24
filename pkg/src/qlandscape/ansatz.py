"""Ising-chain Hamiltonians, the alternating-layer ansatz, and hardware
depth/runtime/gate-count models.

The cost Hamiltonian is a nearest-neighbour chain,

    H = sum_i (J_i / 2) S_i S_{i+1} + sum_i (h_i / 2) S_i,

with spin values S = 2z - 1 on the computational basis (bit 1 = spin +1,
matching the shot-energy convention in :mod:`qlandscape.sampler`).  The
circuit alternates cost layers (exact ZZ- and Z-phase rotations) with
transverse-field mixing layers; gates are exact unitaries of the logical
generators, while native-gate structure only enters the depth/runtime/count
models used to place simulations on a hardware time axis.
"""

import json
import math
from dataclasses import dataclass

import numpy as np

from .densmat import DensityMatrix, QubitUnitary

# Discrete value pools the chain couplings and fields are drawn from.
COUPLING_CHOICES = np.array([2.0, -2.0, 1.2, -1.2, 0.8, -0.8, 0.4, -0.4])
FIELD_CHOICES = np.array([0.8, 0.4, -0.4, 0.24, -0.24, 0.16, -0.16, -0.08])


@dataclass
class IsingHamiltonian:
    """Chain couplings, on-site fields, and the normalization sqrt(sum J^2 + sum h^2)."""

    n_qubits: int
    couplings: np.ndarray
    fields: np.ndarray
    c0: float = 0.0
    seed: int | None = None

    def __post_init__(self):
        self.couplings = np.asarray(self.couplings, dtype=float)
        self.fields = np.asarray(self.fields, dtype=float)
        if self.n_qubits < 2:
            raise ValueError("chain Hamiltonian needs at least 2 qubits")
        if self.couplings.shape != (self.n_qubits - 1,):
            raise ValueError(
                f"expected {self.n_qubits - 1} couplings, got {self.couplings.shape}"
            )
        if self.fields.shape != (self.n_qubits,):
            raise ValueError(f"expected {self.n_qubits} fields, got {self.fields.shape}")
        if not self.c0:
            self.c0 = float(
                np.sqrt(np.sum(self.couplings**2) + np.sum(self.fields**2))
            )
        if self.c0 <= 0:
            raise ValueError("normalization must be positive")
        self._energies = None

    def energy_table(self) -> np.ndarray:
        """Shot energy of every basis state, indexed by the basis integer."""
        if self._energies is None:
            idx = np.arange(1 << self.n_qubits)
            spins = 2.0 * ((idx[:, None] >> np.arange(self.n_qubits)) & 1) - 1.0
            self._energies = (
                (spins[:, :-1] * spins[:, 1:]) @ (self.couplings / 2.0)
                + spins @ (self.fields / 2.0)
            )
        return self._energies

    def to_dict(self) -> dict:
        return {
            "n": self.n_qubits,
            "J": [float(j) for j in self.couplings],
            "h": [float(h) for h in self.fields],
            "c0": self.c0,
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, payload: dict) -> "IsingHamiltonian":
        return cls(
            n_qubits=int(payload["n"]),
            couplings=np.array(payload["J"], dtype=float),
            fields=np.array(payload["h"], dtype=float),
            c0=float(payload.get("c0") or 0.0),
            seed=payload.get("seed"),
        )


def sample_hamiltonian(n_qubits: int, seed: int) -> IsingHamiltonian:
    """Draw couplings and fields i.i.d. from the fixed value pools."""
    if n_qubits < 2:
        raise ValueError("chain Hamiltonian needs at least 2 qubits")
    rng = np.random.default_rng(seed)
    couplings = rng.choice(COUPLING_CHOICES, size=n_qubits - 1)
    fields = rng.choice(FIELD_CHOICES, size=n_qubits)
    return IsingHamiltonian(n_qubits, couplings, fields, seed=seed)


def write_hamiltonian_json(path, hamiltonian: IsingHamiltonian) -> None:
    with open(path, "w") as fh:
        json.dump(hamiltonian.to_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")


def read_hamiltonian_json(path) -> IsingHamiltonian:
    with open(path) as fh:
        return IsingHamiltonian.from_dict(json.load(fh))


@dataclass
class ParameterVector:
    """2L angles ordered (mix_1, cost_1, ..., mix_L, cost_L), each in [0, 2pi)."""

    layers: int
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (2 * self.layers,):
            raise ValueError(
                f"{self.layers} layers need {2 * self.layers} angles, "
                f"got {self.values.shape}"
            )
        if self.layers and (self.values.min() < 0.0 or self.values.max() >= 2.0 * np.pi):
            raise ValueError("angles must lie in [0, 2*pi)")

    @classmethod
    def from_array(cls, values) -> "ParameterVector":
        values = np.asarray(values, dtype=float)
        if values.size % 2:
            raise ValueError("parameter vector length must be even (2 per layer)")
        return cls(values.size // 2, values)

    def mixing(self, layer: int) -> float:
        return float(self.values[2 * layer])

    def cost(self, layer: int) -> float:
        return float(self.values[2 * layer + 1])


def rx_gate(theta: float, qubit: int) -> QubitUnitary:
    """exp(-i * theta * X) on one qubit."""
    c, s = math.cos(theta), math.sin(theta)
    return QubitUnitary(1, np.array([[c, -1j * s], [-1j * s, c]]), (qubit,))


def rz_gate(alpha: float, qubit: int) -> QubitUnitary:
    """exp(-i * alpha * S) with S = diag(-1, +1) (spin convention s = 2z - 1)."""
    return QubitUnitary(
        1, np.array([[np.exp(1j * alpha), 0.0], [0.0, np.exp(-1j * alpha)]]), (qubit,)
    )


def rzz_gate(alpha: float, qubit_a: int, qubit_b: int) -> QubitUnitary:
    """exp(-i * alpha * S_a S_b); equal bits pick up e^{-i alpha}."""
    phase_eq = np.exp(-1j * alpha)
    phase_ne = np.exp(1j * alpha)
    return QubitUnitary(
        2,
        np.diag([phase_eq, phase_ne, phase_ne, phase_eq]),
        (qubit_a, qubit_b),
    )


def gates_per_layer(n_qubits: int) -> int:
    """Gate count of one layer: (n-1) ZZ + n Z + n X."""
    return 3 * n_qubits - 1


def build_circuit(hamiltonian: IsingHamiltonian, theta) -> list:
    """Ordered gate list for the alternating ansatz.

    Per layer: the cost layer first (ZZ rotations in ladder order, then
    on-site Z rotations), then the mixing layer of X rotations.  All cost
    gates commute, so the ladder order only matters for per-gate noise
    schedules.
    """
    if not isinstance(theta, ParameterVector):
        theta = ParameterVector.from_array(theta)
    n = hamiltonian.n_qubits
    gates = []
    for layer in range(theta.layers):
        mix = theta.mixing(layer)
        cost = theta.cost(layer)
        for i in range(n - 1):
            gates.append(rzz_gate(cost * hamiltonian.couplings[i] / 2.0, i, i + 1))
        for i in range(n):
            gates.append(rz_gate(cost * hamiltonian.fields[i] / 2.0, i))
        for i in range(n):
            gates.append(rx_gate(mix, i))
    return gates


def exact_cost(state: DensityMatrix, hamiltonian: IsingHamiltonian) -> float:
    """Expectation of the chain energy: diagonal of rho dotted with the
    basis-state energy table."""
    if state.n_qubits != hamiltonian.n_qubits:
        raise ValueError(
            f"state has {state.n_qubits} qubits, Hamiltonian {hamiltonian.n_qubits}"
        )
    return float(state.diagonal() @ hamiltonian.energy_table())


@dataclass
class TimingModel:
    """Per-platform circuit depth and runtime coefficients.

    depth(n, L)   = a*n + b*L + c            (dimensionless depth units)
    runtime(n, L) = rn*n + rl*L + r0         (microseconds, per shot)

    ``rl`` doubles as the per-layer idle duration used by time-based noise
    schedules.  Gate durations are in microseconds.
    """

    platform: str
    depth_coeffs: tuple
    runtime_coeffs: tuple
    t_1q: float = 0.06
    t_2q: float = 0.66

    def __post_init__(self):
        if self.t_1q <= 0 or self.t_2q <= 0:
            raise ValueError("gate durations must be positive")

    @property
    def layer_time(self) -> float:
        return float(self.runtime_coeffs[1])


_PLATFORMS = {
    "falcon_ladder": TimingModel("falcon_ladder", (11.1, 24.0, -29.6), (1.8, 3.3, 45.0)),
    "falcon_short": TimingModel("falcon_short", (0.0, 24.0, -6.0), (0.0, 2.8, 61.0)),
    "heron": TimingModel("heron", (7.3, 18.5, 1.0), (0.24, 0.61, 130.0)),
}


def timing_model(platform: str) -> TimingModel:
    """Built-in coefficients for one of the known platform tags."""
    try:
        preset = _PLATFORMS[platform]
    except KeyError:
        raise ValueError(
            f"unknown platform {platform!r}; expected one of {sorted(_PLATFORMS)}"
        ) from None
    return TimingModel(
        preset.platform, preset.depth_coeffs, preset.runtime_coeffs, preset.t_1q, preset.t_2q
    )


def load_timing_models(path) -> dict:
    """Platform tag -> TimingModel, with file entries overriding built-ins.

    The file is JSON: {"tag": {"depth": [a, b, c], "runtime": [rn, rl, r0],
    "t_1q": ..., "t_2q": ...}, ...}; missing keys keep the built-in values.
    """
    models = {tag: timing_model(tag) for tag in _PLATFORMS}
    with open(path) as fh:
        payload = json.load(fh)
    for tag, block in payload.items():
        base = models.get(tag)
        models[tag] = TimingModel(
            platform=tag,
            depth_coeffs=tuple(block.get("depth", base.depth_coeffs if base else ())),
            runtime_coeffs=tuple(block.get("runtime", base.runtime_coeffs if base else ())),
            t_1q=float(block.get("t_1q", base.t_1q if base else 0.06)),
            t_2q=float(block.get("t_2q", base.t_2q if base else 0.66)),
        )
    return models


def _check_sizes(n_qubits: int, layers: int) -> None:
    if n_qubits < 2:
        raise ValueError("need at least 2 qubits")
    if layers < 0:
        raise ValueError("layer count must be non-negative")


def circuit_depth(n_qubits: int, layers: int, timing: TimingModel) -> float:
    """Transpiled-depth estimate a*n + b*L + c, floored at 0."""
    _check_sizes(n_qubits, layers)
    a, b, c = timing.depth_coeffs
    return max(0.0, a * n_qubits + b * layers + c)


def circuit_runtime(n_qubits: int, layers: int, timing: TimingModel) -> float:
    """Per-shot circuit runtime in microseconds (gates plus measurement,
    excluding the reset time between shots)."""
    _check_sizes(n_qubits, layers)
    rn, rl, r0 = timing.runtime_coeffs
    return rn * n_qubits + rl * layers + r0


def gate_counts(n_qubits: int, layers: int):
    """(exact two-qubit gate count, approximate one-qubit gate count) after
    transpilation: 2(n-1)L and 13.5 n L."""
    _check_sizes(n_qubits, layers)
    return 2 * (n_qubits - 1) * layers, 13.5 * n_qubits * layers

"""Shot-based measurement simulation and shot-noise diagnostics.

The chain Hamiltonian is diagonal in the computational basis, so one
measurement setting suffices: bitstrings are drawn directly from the
diagonal of the density matrix and each shot contributes the energy of its
basis state.
"""

import csv
from dataclasses import dataclass, field

import numpy as np

from . import icla
from .ansatz import IsingHamiltonian
from .densmat import DensityMatrix, StateCorruptionError

DIAGONAL_ATOL = 1e-9
RENORM_DRIFT = 1e-12


@dataclass
class ShotBatch:
    """R measured bitstrings; ``bits[r, q]`` is the outcome of qubit q."""

    bits: np.ndarray
    indices: np.ndarray
    shots: int
    seed: int | None = None

    @property
    def n_qubits(self) -> int:
        return self.bits.shape[1]


@dataclass
class CostEstimate:
    """Sample mean of the per-shot energies with its standard error."""

    mean: float
    std_error: float
    shots: int

    def __post_init__(self):
        if self.std_error < 0:
            raise ValueError("standard error cannot be negative")


@dataclass
class FloorEstimate:
    """ICLA gradient produced by shot noise alone (parameter-independent
    landscapes), aggregated over synthetic landscapes."""

    mean: float
    std: float
    per_landscape: np.ndarray = field(default_factory=lambda: np.empty(0))
    shots: int = 0
    m: int = 0


def sample_bitstrings(state: DensityMatrix, r: int, seed) -> ShotBatch:
    """Draw r i.i.d. bitstrings from the diagonal of the state."""
    if r < 1:
        raise ValueError("need at least one shot")
    probs = state.diagonal().copy()
    low = probs.min()
    if low < -DIAGONAL_ATOL:
        raise StateCorruptionError(
            f"state diagonal has negative probability {low:.3e}"
        )
    np.clip(probs, 0.0, None, out=probs)
    total = probs.sum()
    if abs(total - 1.0) > RENORM_DRIFT:
        probs /= total
    rng = np.random.default_rng(seed)
    indices = rng.choice(probs.size, size=r, p=probs)
    n = state.n_qubits
    bits = ((indices[:, None] >> np.arange(n)) & 1).astype(np.uint8)
    return ShotBatch(bits=bits, indices=indices, shots=r,
                     seed=seed if isinstance(seed, int) else None)


def shot_energy(z, hamiltonian: IsingHamiltonian) -> float:
    """Energy of one measured bitstring, using spins s = 2z - 1."""
    z = np.asarray(z)
    if z.shape != (hamiltonian.n_qubits,):
        raise ValueError(
            f"bitstring length {z.shape} does not match {hamiltonian.n_qubits} qubits"
        )
    s = 2.0 * z - 1.0
    return float(
        (s[:-1] * s[1:]) @ (hamiltonian.couplings / 2.0) + s @ (hamiltonian.fields / 2.0)
    )


def batch_energies(batch: ShotBatch, hamiltonian: IsingHamiltonian) -> np.ndarray:
    """Per-shot energies via the basis-state energy table."""
    if batch.n_qubits != hamiltonian.n_qubits:
        raise ValueError("batch and Hamiltonian qubit counts differ")
    return hamiltonian.energy_table()[batch.indices]


def estimate_cost(state: DensityMatrix, hamiltonian: IsingHamiltonian, r: int,
                  seed) -> CostEstimate:
    """Unbiased shot estimate of the exact cost."""
    batch = sample_bitstrings(state, r, seed)
    energies = batch_energies(batch, hamiltonian)
    std_error = float(energies.std(ddof=1) / np.sqrt(r)) if r > 1 else 0.0
    return CostEstimate(mean=float(energies.mean()), std_error=std_error, shots=r)


@dataclass
class CostSpectrum:
    """Sorted per-shot energies plus a fixed-bin histogram over
    [-k*c0, k*c0]."""

    energies: np.ndarray
    counts: np.ndarray
    bin_edges: np.ndarray


def cost_spectrum(batch: ShotBatch, hamiltonian: IsingHamiltonian,
                  n_bins: int = 60, k: float = 3.0) -> CostSpectrum:
    """Distribution of single-shot energies in one batch.

    Energies outside the fixed window (possible only for extreme
    Hamiltonian draws) fall outside the histogram but stay in the sorted
    list.
    """
    if batch.shots < 1:
        raise ValueError("batch is empty")
    energies = np.sort(batch_energies(batch, hamiltonian))
    half_width = k * hamiltonian.c0
    counts, edges = np.histogram(energies, bins=n_bins, range=(-half_width, half_width))
    return CostSpectrum(energies=energies, counts=counts, bin_edges=edges)


def shot_noise_floor(hamiltonian: IsingHamiltonian, m: int, r: int,
                     n_landscapes: int = 20, seed: int = 0, n_walks: int = 50,
                     cap: int = 200, factor: int = 10) -> FloorEstimate:
    """Gradient estimate the ICLA pipeline produces from shot noise alone.

    Builds synthetic landscapes whose cost values are means of r energy
    draws from the maximally mixed state (uniform bitstrings, i.e. random
    sampling of the Hamiltonian spectrum) and runs the full ICLA on each.
    The result is normalized by c0 like a real gradient curve.
    """
    if m < 1:
        raise ValueError("parameter dimension must be positive")
    if r < 1:
        raise ValueError("need at least one shot")
    n_points = icla.landscape_size(m, cap=cap, factor=factor)
    table = hamiltonian.energy_table()
    dim = table.size
    floors = np.empty(n_landscapes)
    root = np.random.SeedSequence(seed)
    for j, child in enumerate(root.spawn(n_landscapes)):
        point_seq, walk_seq = child.spawn(2)
        rng = np.random.default_rng(point_seq)
        thetas = rng.uniform(0.0, 2.0 * np.pi, size=(n_points, m))
        costs = np.empty(n_points)
        for i in range(n_points):
            costs[i] = table[rng.integers(0, dim, size=r)].mean()
        landscape = icla.Landscape(
            thetas=thetas,
            costs=costs,
            cost_errors=np.zeros(n_points),
            metadata={"c0": hamiltonian.c0, "shots": r, "synthetic": True},
        )
        result = icla.run_icla(landscape, n_walks=n_walks, seed=walk_seq)
        floors[j] = result.gradient_norm
    return FloorEstimate(
        mean=float(floors.mean()),
        std=float(floors.std(ddof=1)) if n_landscapes > 1 else 0.0,
        per_landscape=floors,
        shots=r,
        m=m,
    )


def write_cost_spectrum_csv(path, spectrum: CostSpectrum) -> None:
    """Write sorted per-shot energies as (sorted_index, energy) rows."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["sorted_index", "energy"])
        for i, energy in enumerate(spectrum.energies):
            writer.writerow([i, repr(float(energy))])


def write_sorted_costs_csv(path, costs, errors) -> None:
    """Write landscape costs sorted ascending as
    (param_index, cost_mean, std_error) rows."""
    costs = np.asarray(costs, dtype=float)
    errors = np.asarray(errors, dtype=float)
    if costs.shape != errors.shape:
        raise ValueError("costs and errors must have equal length")
    order = np.argsort(costs, kind="stable")
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["param_index", "cost_mean", "std_error"])
        for idx in order:
            writer.writerow([int(idx), repr(float(costs[idx])), repr(float(errors[idx]))])

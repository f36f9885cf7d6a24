"""Dense density-matrix state engine.

States are full 2**n x 2**n complex matrices.  Qubit 0 is the least
significant bit of the computational-basis index, fixed globally.  The
basis-state spin value used by the cost modules is s = 2*z - 1, i.e. bit
value 1 maps to spin +1.
"""

import csv
import os
from dataclasses import dataclass, field

import numpy as np

from .backend import kernels

# Hard cap unless a caller raises it explicitly; keeps a stray config from
# allocating multi-GB matrices.
DEFAULT_MAX_QUBITS = 12

# When true, every state-mutating operation re-checks trace/Hermiticity/PSD.
DEBUG_CHECKS = bool(int(os.environ.get("QLANDSCAPE_DEBUG", "0")))

HERMITICITY_ATOL = 1e-10
TRACE_ATOL = 1e-9
PSD_ATOL = 1e-9
UNITARITY_ATOL = 1e-10


class StateCorruptionError(RuntimeError):
    """A density matrix violated trace/Hermiticity/positivity tolerances."""


class EigensolverError(RuntimeError):
    """The eigensolver failed to converge on a state matrix."""


@dataclass
class DensityMatrix:
    """An n-qubit mixed state: Hermitian, unit-trace, PSD complex matrix."""

    n_qubits: int
    data: np.ndarray

    def __post_init__(self):
        dim = 1 << self.n_qubits
        self.data = np.ascontiguousarray(self.data, dtype=np.complex128)
        if self.data.shape != (dim, dim):
            raise ValueError(
                f"state matrix shape {self.data.shape} does not match "
                f"{self.n_qubits} qubits (expected {(dim, dim)})"
            )

    @property
    def dim(self) -> int:
        return 1 << self.n_qubits

    def copy(self) -> "DensityMatrix":
        return DensityMatrix(self.n_qubits, self.data.copy())

    def trace(self) -> float:
        return float(np.trace(self.data).real)

    def diagonal(self) -> np.ndarray:
        return np.ascontiguousarray(self.data.diagonal().real)

    def validate(self) -> None:
        """Raise StateCorruptionError on tolerance violations."""
        herm = np.abs(self.data - self.data.conj().T).max()
        if herm > HERMITICITY_ATOL:
            raise StateCorruptionError(f"state not Hermitian: deviation {herm:.3e}")
        tr = np.trace(self.data)
        if abs(tr - 1.0) > TRACE_ATOL:
            raise StateCorruptionError(f"state trace {tr} differs from 1")
        low = np.linalg.eigvalsh(self.data).min()
        if low < -PSD_ATOL:
            raise StateCorruptionError(f"state not PSD: min eigenvalue {low:.3e}")


@dataclass
class QubitUnitary:
    """A 1- or 2-qubit unitary acting on specific target qubits.

    For arity 2 the 4x4 matrix is indexed by bit(targets[0]) +
    2*bit(targets[1]), i.e. the first listed target is the low bit of the
    gate's own basis.
    """

    arity: int
    matrix: np.ndarray
    targets: tuple = field(default_factory=tuple)

    def __post_init__(self):
        self.matrix = np.ascontiguousarray(self.matrix, dtype=np.complex128)
        self.targets = tuple(int(t) for t in self.targets)
        if self.arity not in (1, 2):
            raise ValueError(f"unsupported gate arity {self.arity}")
        size = 2 ** self.arity
        if self.matrix.shape != (size, size):
            raise ValueError(
                f"arity-{self.arity} gate needs a {size}x{size} matrix, "
                f"got {self.matrix.shape}"
            )
        if len(self.targets) != self.arity:
            raise ValueError("number of targets does not match gate arity")
        if len(set(self.targets)) != self.arity:
            raise ValueError(f"gate targets must be distinct, got {self.targets}")
        dev = np.abs(self.matrix @ self.matrix.conj().T - np.eye(size)).max()
        if dev > UNITARITY_ATOL:
            raise ValueError(f"matrix is not unitary: deviation {dev:.3e}")


def new_plus_state(n_qubits: int, max_qubits: int = DEFAULT_MAX_QUBITS) -> DensityMatrix:
    """Pure equal-superposition state; every matrix entry is 1/2**n."""
    if n_qubits < 1:
        raise ValueError("need at least one qubit")
    if n_qubits > max_qubits:
        raise ValueError(
            f"{n_qubits} qubits exceeds the configured cap of {max_qubits} "
            f"(a dense state needs {(4 ** n_qubits) * 16 / 1e9:.1f} GB)"
        )
    dim = 1 << n_qubits
    data = np.full((dim, dim), 1.0 / dim, dtype=np.complex128)
    return DensityMatrix(n_qubits, data)


def new_basis_state(n_qubits: int, index: int = 0,
                    max_qubits: int = DEFAULT_MAX_QUBITS) -> DensityMatrix:
    """Pure computational-basis state |index><index|."""
    if n_qubits < 1:
        raise ValueError("need at least one qubit")
    if n_qubits > max_qubits:
        raise ValueError(f"{n_qubits} qubits exceeds the configured cap of {max_qubits}")
    dim = 1 << n_qubits
    if not 0 <= index < dim:
        raise ValueError(f"basis index {index} out of range for {n_qubits} qubits")
    data = np.zeros((dim, dim), dtype=np.complex128)
    data[index, index] = 1.0
    return DensityMatrix(n_qubits, data)


def maximally_mixed(n_qubits: int, max_qubits: int = DEFAULT_MAX_QUBITS) -> DensityMatrix:
    """The uniform mixture I / 2**n."""
    if n_qubits > max_qubits:
        raise ValueError(f"{n_qubits} qubits exceeds the configured cap of {max_qubits}")
    dim = 1 << n_qubits
    return DensityMatrix(n_qubits, np.eye(dim, dtype=np.complex128) / dim)


def _reordered_2q_matrix(gate: QubitUnitary):
    """Return (matrix in (hi, lo) basis, q_hi, q_lo) for the kernels."""
    q_a, q_b = gate.targets
    q_hi, q_lo = max(q_a, q_b), min(q_a, q_b)
    perm = []
    for hi_bit in (0, 1):
        for lo_bit in (0, 1):
            bits = {q_hi: hi_bit, q_lo: lo_bit}
            perm.append(bits[q_a] + 2 * bits[q_b])
    u = np.ascontiguousarray(gate.matrix[np.ix_(perm, perm)])
    return u, q_hi, q_lo


def apply_unitary(state: DensityMatrix, gate: QubitUnitary,
                  inplace: bool = False) -> DensityMatrix:
    """Conjugate the state by a gate embedded on its target qubits."""
    for t in gate.targets:
        if not 0 <= t < state.n_qubits:
            raise ValueError(f"target qubit {t} out of range for {state.n_qubits} qubits")
    out = state if inplace else state.copy()
    if gate.arity == 1:
        kernels.apply_1q(out.data, gate.matrix, gate.targets[0])
    else:
        u, q_hi, q_lo = _reordered_2q_matrix(gate)
        kernels.apply_2q(out.data, u, q_hi, q_lo)
    if DEBUG_CHECKS:
        out.validate()
    return out


def apply_circuit(state: DensityMatrix, gates, inplace: bool = False) -> DensityMatrix:
    """Apply an ordered gate list (first element acts first)."""
    out = state if inplace else state.copy()
    for gate in gates:
        apply_unitary(out, gate, inplace=True)
    return out


def eigen_spectrum(state: DensityMatrix) -> np.ndarray:
    """Descending eigenvalues, clamped into [0, 1] after a PSD floor check."""
    try:
        vals = np.linalg.eigvalsh(state.data)
    except np.linalg.LinAlgError as exc:
        herm = np.abs(state.data - state.data.conj().T).max()
        raise EigensolverError(
            f"eigensolver failed: {exc} (trace={np.trace(state.data):.6g}, "
            f"hermiticity deviation={herm:.3e}, "
            f"max |entry|={np.abs(state.data).max():.3e})"
        ) from exc
    if vals.min() < -PSD_ATOL:
        raise StateCorruptionError(
            f"state not PSD: min eigenvalue {vals.min():.3e}"
        )
    return np.clip(vals, 0.0, 1.0)[::-1].copy()


def purity(state: DensityMatrix) -> float:
    """Tr(rho^2); 1 for pure states, 1/2**n for the maximally mixed state."""
    return float(np.vdot(state.data, state.data).real)


def write_spectrum_csv(path, values) -> None:
    """Write eigenvalues as (rank, eigenvalue) rows, rank 1 = largest."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["rank", "eigenvalue"])
        for rank, value in enumerate(np.asarray(values), start=1):
            writer.writerow([rank, repr(float(value))])


def read_spectrum_csv(path) -> np.ndarray:
    """Read eigenvalues written by write_spectrum_csv."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header != ["rank", "eigenvalue"]:
            raise ValueError(f"unexpected spectrum header: {header}")
        return np.array([float(row[1]) for row in reader])

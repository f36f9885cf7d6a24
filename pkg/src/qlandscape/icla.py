"""Information-content landscape analysis.

Estimates the average gradient norm of a cost landscape from M cost values
sampled at uniform random parameter vectors: a random walk over the
sampled points yields finite-difference slopes, the slopes are symbolized
against a threshold eps into {-, o, +}, and the threshold maximizing the
base-6 entropy of consecutive distinct symbol pairs gives the gradient
scale via  grad = eps_max * sqrt(m).

The walk is one uniformly random permutation of all M points; repeating
the analysis over independent permutations supplies the bootstrap error
bar.  When a Hamiltonian normalization c0 is attached (metadata or
argument), gradients and thresholds are reported in units of c0.
"""

import csv
import json
import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

EPS_GRID_POINTS = 200
LOG6 = math.log(6.0)


class LandscapeFormatError(ValueError):
    """A landscape file does not match the expected CSV layout."""


class LandscapeEvaluationError(RuntimeError):
    """The cost function failed while sampling a landscape."""


@dataclass
class Landscape:
    """M parameter vectors with their measured costs and cost errors."""

    thetas: np.ndarray
    costs: np.ndarray
    cost_errors: np.ndarray | None = None
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        self.thetas = np.atleast_2d(np.asarray(self.thetas, dtype=float))
        self.costs = np.asarray(self.costs, dtype=float)
        if self.cost_errors is None:
            self.cost_errors = np.zeros(self.costs.size)
        self.cost_errors = np.asarray(self.cost_errors, dtype=float)
        if self.thetas.shape[0] != self.costs.size:
            raise ValueError("number of points and costs differ")
        if self.cost_errors.shape != self.costs.shape:
            raise ValueError("number of costs and cost errors differ")
        if self.n_points < 3:
            raise ValueError("landscape needs at least 3 points")
        if self.thetas.min() < 0.0 or self.thetas.max() >= 2.0 * np.pi + 1e-12:
            raise ValueError("parameter coordinates must lie in [0, 2*pi)")

    @property
    def n_points(self) -> int:
        return self.thetas.shape[0]

    @property
    def m(self) -> int:
        return self.thetas.shape[1]

    def truncated(self, n_points: int) -> "Landscape":
        """First n_points of the landscape (sampling-order prefix)."""
        if n_points >= self.n_points:
            return self
        return Landscape(
            thetas=self.thetas[:n_points].copy(),
            costs=self.costs[:n_points].copy(),
            cost_errors=self.cost_errors[:n_points].copy(),
            metadata=dict(self.metadata),
        )


@dataclass
class WalkDeltas:
    """Finite-difference slopes along one random walk over the points."""

    deltas: np.ndarray
    order: np.ndarray

    def __post_init__(self):
        self.deltas = np.asarray(self.deltas, dtype=float)
        if self.deltas.size < 2:
            raise ValueError("walk needs at least 2 slopes")
        if not np.isfinite(self.deltas).all():
            raise ValueError("walk slopes must be finite")


@dataclass
class IcResult:
    """Threshold of maximal information content and the derived gradient."""

    epsilon_max: float
    ic_curve: list
    gradient_norm: float = 0.0
    bootstrap_std: float = 0.0
    degenerate: bool = False
    n_walks: int = 1
    normalization: float = 1.0

    def to_dict(self) -> dict:
        return {
            "epsilon_max": self.epsilon_max,
            "gradient_norm": self.gradient_norm,
            "bootstrap_std": self.bootstrap_std,
            "degenerate": self.degenerate,
            "n_walks": self.n_walks,
            "normalization": self.normalization,
            "ic_curve": [[float(e), float(h)] for e, h in self.ic_curve],
        }


def landscape_size(m: int, cap: int = 200, factor: int = 10) -> int:
    """Number of sample points for an m-dimensional landscape:
    min(factor*m, cap)."""
    if m < 1:
        raise ValueError("parameter dimension must be positive")
    return min(factor * m, cap)


def sample_points(m: int, n_points: int, seed) -> np.ndarray:
    """n_points uniform vectors in [0, 2*pi)^m."""
    rng = np.random.default_rng(seed)
    return rng.uniform(0.0, 2.0 * np.pi, size=(n_points, m))


def sample_landscape(cost_fn, m: int, n_points: int, seed, metadata: dict | None = None) -> Landscape:
    """Evaluate cost_fn at n_points uniform random parameter vectors.

    cost_fn maps a parameter vector to a float, a (mean, err) pair, or an
    object with mean/std_error attributes.
    """
    if n_points < 3:
        raise ValueError("landscape needs at least 3 points")
    thetas = sample_points(m, n_points, seed)
    costs = np.empty(n_points)
    errors = np.zeros(n_points)
    for i in range(n_points):
        try:
            costs[i], errors[i] = _as_cost(cost_fn(thetas[i]))
        except Exception as exc:
            raise LandscapeEvaluationError(
                f"cost function failed at point {i}: {exc}"
            ) from exc
    return Landscape(thetas=thetas, costs=costs, cost_errors=errors,
                     metadata=dict(metadata or {}))


def _as_cost(value):
    if hasattr(value, "mean") and hasattr(value, "std_error"):
        return float(value.mean), float(value.std_error)
    if isinstance(value, tuple):
        return float(value[0]), float(value[1])
    return float(value), 0.0


def walk_deltas(landscape: Landscape, walk_seed=None, order=None) -> WalkDeltas:
    """Slopes (C_next - C_prev) / ||theta_next - theta_prev|| along a
    random permutation of all points.

    Coincident consecutive points (zero step length) are skipped with a
    warning; they have probability zero under uniform sampling but can
    occur in user-supplied landscapes.
    """
    if order is None:
        rng = np.random.default_rng(walk_seed)
        order = rng.permutation(landscape.n_points)
    else:
        order = np.asarray(order, dtype=int)
    steps = landscape.thetas[order[1:]] - landscape.thetas[order[:-1]]
    dists = np.linalg.norm(steps, axis=1)
    dcost = landscape.costs[order[1:]] - landscape.costs[order[:-1]]
    good = dists > 0.0
    if not good.all():
        warnings.warn(
            f"skipped {int((~good).sum())} coincident point pair(s) in walk",
            stacklevel=2,
        )
    return WalkDeltas(deltas=dcost[good] / dists[good], order=order)


def symbolize(walk, eps: float) -> np.ndarray:
    """Map slopes to symbols coded -1/0/+1 for -, o, +.

    A slope below -eps is -, above +eps is +, and o otherwise.
    """
    if eps < 0:
        raise ValueError("threshold must be non-negative")
    deltas = walk.deltas if isinstance(walk, WalkDeltas) else np.asarray(walk, dtype=float)
    return ((deltas > eps).astype(np.int8) - (deltas < -eps).astype(np.int8))


def information_content(symbols) -> float:
    """Base-6 entropy of ordered distinct consecutive symbol pairs.

    Pair frequencies are taken over all consecutive pairs (same-symbol
    pairs count toward the total but contribute no entropy), so the value
    lies in [0, 1] with 1 at six equally frequent distinct pairs.
    """
    symbols = np.asarray(symbols)
    if symbols.size < 2:
        raise ValueError("need at least 2 symbols")
    a = symbols[:-1].astype(np.int64)
    b = symbols[1:].astype(np.int64)
    total = a.size
    codes = 3 * (a + 1) + (b + 1)
    counts = np.bincount(codes[a != b], minlength=9)
    probs = counts[counts > 0] / total
    if probs.size == 0:
        return 0.0
    return float(-(probs * np.log(probs)).sum() / LOG6)


def _ic_over_grid(deltas: np.ndarray):
    """H(eps) on eps = 0 plus log-spaced values spanning the nonzero
    |slope| range; vectorized over the grid."""
    abs_d = np.abs(deltas)
    nonzero = abs_d[abs_d > 0]
    grid = np.concatenate(
        [[0.0], np.geomspace(nonzero.min(), nonzero.max(), EPS_GRID_POINTS)]
    )
    sym = (deltas[None, :] > grid[:, None]).astype(np.int8) - (
        deltas[None, :] < -grid[:, None]
    ).astype(np.int8)
    a = sym[:, :-1].astype(np.int64)
    b = sym[:, 1:].astype(np.int64)
    total = a.shape[1]
    codes = 3 * (a + 1) + (b + 1)
    distinct = a != b
    h = np.zeros(grid.size)
    for code in (1, 2, 3, 5, 6, 7):  # the six ordered distinct pairs
        counts = ((codes == code) & distinct).sum(axis=1)
        p = counts / total
        mask = p > 0
        h[mask] -= p[mask] * np.log(p[mask])
    return grid, h / LOG6


def maximize_ic(walk: WalkDeltas) -> IcResult:
    """Grid-maximize H(eps); ties resolve to the smallest eps.

    All-zero slopes flag the result degenerate with eps = 0 and H == 0.
    """
    if not np.abs(walk.deltas).max() > 0:
        return IcResult(epsilon_max=0.0, ic_curve=[(0.0, 0.0)], degenerate=True)
    grid, h = _ic_over_grid(walk.deltas)
    best = int(np.argmax(h))
    return IcResult(
        epsilon_max=float(grid[best]),
        ic_curve=list(zip(grid.tolist(), h.tolist())),
    )


def run_icla(landscape: Landscape, n_walks: int = 50, seed=0,
             c0: float | None = None) -> IcResult:
    """Full analysis: average eps_max * sqrt(m) over independent walks.

    The reported gradient and threshold are divided by the Hamiltonian
    normalization when one is attached (argument wins over metadata); the
    bootstrap error is the sample standard deviation over walks.  The
    ic_curve of the first walk is kept for plotting.
    """
    if n_walks < 1:
        raise ValueError("need at least one walk")
    norm = c0 if c0 is not None else float(landscape.metadata.get("c0") or 1.0)
    if norm <= 0:
        raise ValueError("normalization must be positive")
    root = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    children = root.spawn(n_walks)
    sqrt_m = math.sqrt(landscape.m)
    grads = np.empty(n_walks)
    first_curve = None
    degenerate = True
    for k in range(n_walks):
        walk = walk_deltas(landscape, walk_seed=children[k])
        result = maximize_ic(walk)
        if first_curve is None:
            first_curve = result.ic_curve
        degenerate = degenerate and result.degenerate
        grads[k] = result.epsilon_max * sqrt_m / norm
    return IcResult(
        epsilon_max=float(grads.mean() / sqrt_m),
        ic_curve=first_curve,
        gradient_norm=float(grads.mean()),
        bootstrap_std=float(grads.std(ddof=1)) if n_walks > 1 else 0.0,
        degenerate=degenerate,
        n_walks=n_walks,
        normalization=norm,
    )


def _sidecar_path(path) -> Path:
    return Path(path).with_suffix(".json")


def write_landscape(path, landscape: Landscape) -> None:
    """CSV with header theta_0..theta_{m-1},cost,cost_err plus a JSON
    metadata sidecar next to it."""
    path = Path(path)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            [f"theta_{k}" for k in range(landscape.m)] + ["cost", "cost_err"]
        )
        for i in range(landscape.n_points):
            writer.writerow(
                [repr(float(v)) for v in landscape.thetas[i]]
                + [repr(float(landscape.costs[i])), repr(float(landscape.cost_errors[i]))]
            )
    with open(_sidecar_path(path), "w") as fh:
        json.dump(landscape.metadata, fh, indent=2, sort_keys=True)
        fh.write("\n")


def read_landscape(path) -> Landscape:
    """Parse a landscape CSV (plus optional sidecar), with line
    diagnostics on malformed input."""
    path = Path(path)
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise LandscapeFormatError(f"{path}: file is empty") from None
        m = len(header) - 2
        expected = [f"theta_{k}" for k in range(m)] + ["cost", "cost_err"]
        if m < 1 or header != expected:
            raise LandscapeFormatError(
                f"{path}: line 1: expected header theta_0..theta_(m-1),cost,cost_err, "
                f"got {header}"
            )
        thetas, costs, errors = [], [], []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != m + 2:
                raise LandscapeFormatError(
                    f"{path}: line {lineno}: expected {m + 2} columns, got {len(row)}"
                )
            try:
                values = [float(x) for x in row]
            except ValueError as exc:
                raise LandscapeFormatError(f"{path}: line {lineno}: {exc}") from None
            thetas.append(values[:m])
            costs.append(values[m])
            errors.append(values[m + 1])
    metadata = {}
    sidecar = _sidecar_path(path)
    if sidecar.exists():
        with open(sidecar) as fh:
            metadata = json.load(fh)
    try:
        return Landscape(
            thetas=np.array(thetas), costs=np.array(costs),
            cost_errors=np.array(errors), metadata=metadata,
        )
    except ValueError as exc:
        raise LandscapeFormatError(f"{path}: {exc}") from None

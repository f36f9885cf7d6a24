"""Post-processing of gradient-vs-runtime curves and state spectra.

Flattening detection fits the smooth crossover model

    g(t) = sqrt((A * exp(-t / tau))^2 + g_inf^2)

in log space; the flattening time is the decay/plateau crossover
t_flat = tau * ln(A / g_inf), clamped into the curve's time span, with its
error propagated from the fit covariance.  The effective relaxation time
follows from the flattening time via the non-unital dominance threshold:
T1_eff = -t_flat / ln(1 - p_threshold).
"""

import csv
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import curve_fit

from .densmat import DensityMatrix, eigen_spectrum

DEFAULT_P_THRESHOLD = 0.75
PLATEAU_SIGMA_LN_G = 0.5  # ln-space sigma above which g_inf is consistent with 0


class FitError(RuntimeError):
    """The flattening fit could not be evaluated at all."""


@dataclass
class GradientCurve:
    """Gradient-norm estimates against circuit runtime (microseconds)."""

    t_cir: np.ndarray
    gradient: np.ndarray
    err: np.ndarray | None = None
    layers: np.ndarray | None = None
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        self.t_cir = np.asarray(self.t_cir, dtype=float)
        self.gradient = np.asarray(self.gradient, dtype=float)
        if self.err is None:
            self.err = np.zeros_like(self.gradient)
        self.err = np.asarray(self.err, dtype=float)
        if self.layers is None:
            self.layers = np.zeros(self.t_cir.size, dtype=int)
        self.layers = np.asarray(self.layers, dtype=int)
        sizes = {self.t_cir.size, self.gradient.size, self.err.size, self.layers.size}
        if len(sizes) != 1:
            raise ValueError("curve columns must have equal length")
        if np.any(np.diff(self.t_cir) <= 0):
            raise ValueError("circuit runtimes must be strictly increasing")
        if np.any(self.gradient < 0):
            raise ValueError("gradient estimates must be non-negative")

    @property
    def n_points(self) -> int:
        return self.t_cir.size


@dataclass
class FlatteningFit:
    """Crossover-fit result; verdict is 'plateau' or 'no plateau'."""

    t_flat: float
    t_flat_err: float
    g_inf: float
    amplitude: float
    tau: float
    residual: float
    verdict: str
    fallback: bool = False


@dataclass
class EffectiveT1Report:
    """Relaxation time inferred from the flattening time."""

    t1_eff: float
    t1_eff_err: float
    p_threshold: float
    percentile: float | None = None
    mean_t1: float | None = None


@dataclass
class T1Stats:
    """Empirical CDF summary of a T1 sample against a reference value."""

    percentile: float
    mean: float
    std: float
    cdf: list


@dataclass
class SpectralProfile:
    """Log-binned eigenvalue histogram with concentration summaries."""

    max_eigenvalue: float
    effective_rank: float
    counts: np.ndarray
    bin_edges: np.ndarray


def finite_difference_gradient_stats(cost_fn, m: int, n_points: int, step: float,
                                     seed) -> tuple:
    """Central-difference gradient statistics at uniform random points.

    Returns (mean Euclidean gradient norm, variance of the absolute
    single-direction derivatives pooled over points and components).  This
    is the independent oracle the landscape-analysis estimate is checked
    against, and the probe for gradient-variance decay.
    """
    if step <= 0:
        raise ValueError("step must be positive")
    if n_points < 1:
        raise ValueError("need at least one probe point")
    rng = np.random.default_rng(seed)
    thetas = rng.uniform(0.0, 2.0 * np.pi, size=(n_points, m))
    partials = np.empty((n_points, m))
    for i in range(n_points):
        for k in range(m):
            plus = thetas[i].copy()
            minus = thetas[i].copy()
            plus[k] += step
            minus[k] -= step
            partials[i, k] = (cost_fn(plus) - cost_fn(minus)) / (2.0 * step)
    norms = np.linalg.norm(partials, axis=1)
    abs_partials = np.abs(partials).ravel()
    variance = float(abs_partials.var(ddof=1)) if abs_partials.size > 1 else 0.0
    return float(norms.mean()), variance


def _crossover_log_model(t, ln_a, ln_tau, ln_g):
    return 0.5 * np.logaddexp(2.0 * (ln_a - t / np.exp(ln_tau)), 2.0 * ln_g)


def fit_flattening(curve: GradientCurve) -> FlatteningFit:
    """Fit the decay-to-plateau crossover and judge whether a plateau exists.

    The verdict is 'no plateau' when the fitted plateau is consistent with
    zero at 2 sigma, or when the decay component alone explains the last
    two points within error.  If the nonlinear fit cannot run, a flagged
    fallback places t_flat at the first point already at plateau level.
    """
    if curve.n_points < 5:
        raise ValueError("flattening fit needs at least 5 points")
    t = curve.t_cir
    g = curve.gradient
    if np.any(g <= 0):
        return _fallback_fit(curve)
    y = np.log(g)
    tail = float(np.median(g[-3:]))
    span = t[-1] - t[0]
    p0 = (
        math.log(max(g[0] - tail, g.max() * 1e-6)),
        math.log(span / 3.0),
        math.log(tail),
    )
    sigma = None
    if np.all(curve.err > 0):
        sigma = curve.err / g  # log-space errors
    try:
        popt, pcov = curve_fit(
            _crossover_log_model, t, y, p0=p0, sigma=sigma,
            absolute_sigma=sigma is not None, maxfev=20000,
        )
    except (RuntimeError, ValueError):
        return _fallback_fit(curve)
    ln_a, ln_tau, ln_g = popt
    amplitude, tau, g_inf = math.exp(ln_a), math.exp(ln_tau), math.exp(ln_g)
    t_flat_raw = tau * (ln_a - ln_g)
    jac = np.array([tau, t_flat_raw, -tau])
    var = float(jac @ pcov @ jac)
    t_flat_err = math.sqrt(var) if np.isfinite(var) and var > 0 else 0.0
    t_flat = float(np.clip(t_flat_raw, t[0], t[-1]))
    resid = y - _crossover_log_model(t, *popt)
    residual = float(np.sqrt(np.mean(resid**2)))

    sigma_ln_g = float(np.sqrt(pcov[2, 2])) if np.isfinite(pcov[2, 2]) else math.inf
    decay_tail = ln_a - t[-2:] / tau
    tol = 2.0 * np.maximum(curve.err[-2:] / g[-2:], max(residual, 1e-12))
    decay_explains_tail = bool(np.all(np.abs(y[-2:] - decay_tail) <= tol))
    no_plateau = sigma_ln_g >= PLATEAU_SIGMA_LN_G or decay_explains_tail
    return FlatteningFit(
        t_flat=t_flat,
        t_flat_err=t_flat_err,
        g_inf=g_inf,
        amplitude=amplitude,
        tau=tau,
        residual=residual,
        verdict="no plateau" if no_plateau else "plateau",
    )


def _fallback_fit(curve: GradientCurve) -> FlatteningFit:
    """Plateau-level crossing heuristic used when the fit cannot run."""
    t = curve.t_cir
    g = curve.gradient
    plateau = float(np.median(g[-3:]))
    above = np.nonzero(g >= 0.8 * plateau)[0]
    t_flat = float(t[above[0]]) if above.size else float(t[0])
    # pure log-linear decay explaining the whole curve means no plateau
    verdict = "plateau"
    positive = g > 0
    if positive.sum() >= 3:
        ts, ys = t[positive], np.log(g[positive])
        slope, intercept = np.polyfit(ts, ys, 1)
        pred = slope * ts + intercept
        ss_res = float(np.sum((ys - pred) ** 2))
        ss_tot = float(np.sum((ys - ys.mean()) ** 2))
        if slope < 0 and ss_tot > 0 and 1.0 - ss_res / ss_tot >= 0.95:
            verdict = "no plateau"
    spacing = float(np.median(np.diff(t)))
    return FlatteningFit(
        t_flat=t_flat,
        t_flat_err=spacing,
        g_inf=plateau,
        amplitude=0.0,
        tau=0.0,
        residual=float("nan"),
        verdict=verdict,
        fallback=True,
    )


def effective_t1(t_flat: float, t_flat_err: float = 0.0,
                 p_threshold: float = DEFAULT_P_THRESHOLD) -> EffectiveT1Report:
    """Relaxation time at which the single-qubit decay probability reaches
    p_threshold by the flattening time: T1_eff = -t_flat / ln(1 - p)."""
    if not 0.0 < p_threshold < 1.0:
        raise ValueError(f"threshold probability {p_threshold} outside (0, 1)")
    if t_flat <= 0:
        raise ValueError("flattening time must be positive")
    factor = -1.0 / math.log(1.0 - p_threshold)
    return EffectiveT1Report(
        t1_eff=t_flat * factor,
        t1_eff_err=abs(t_flat_err) * factor,
        p_threshold=p_threshold,
    )


def t1_percentile(t1_values, t1_eff: float) -> T1Stats:
    """Fraction of qubits with T1 <= t1_eff plus the empirical CDF."""
    values = np.sort(np.asarray(t1_values, dtype=float))
    if values.size == 0:
        raise ValueError("empty T1 sample")
    percentile = float((values <= t1_eff).mean())
    cdf = [(float(v), float(k) / values.size) for k, v in enumerate(values, start=1)]
    return T1Stats(
        percentile=percentile,
        mean=float(values.mean()),
        std=float(values.std(ddof=1)) if values.size > 1 else 0.0,
        cdf=cdf,
    )


def analytic_decay_spectrum(n_qubits: int, p: float) -> list:
    """Eigenvalues and multiplicities of the all-excited product state
    after per-qubit decay with probability p: value p^k (1-p)^(n-k) with
    multiplicity C(n, k)."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"decay probability {p} outside [0, 1]")
    return [
        (p**k * (1.0 - p) ** (n_qubits - k), math.comb(n_qubits, k))
        for k in range(n_qubits + 1)
    ]


def spectral_profile(state: DensityMatrix, bins: int = 40) -> SpectralProfile:
    """Log-binned eigenvalue histogram, largest eigenvalue, and effective
    rank exp(von Neumann entropy)."""
    values = eigen_spectrum(state)
    positive = values[values > 0]
    entropy = float(-(positive * np.log(positive)).sum())
    vmin, vmax = positive.min(), positive.max()
    if vmin == vmax:
        edges = np.array([vmin / 2.0, vmax * 2.0])
    else:
        edges = np.geomspace(vmin, vmax, bins + 1)
        edges[-1] *= 1 + 1e-12  # keep the max eigenvalue inside the last bin
    counts, edges = np.histogram(positive, bins=edges)
    return SpectralProfile(
        max_eigenvalue=float(values[0]),
        effective_rank=math.exp(entropy),
        counts=counts,
        bin_edges=edges,
    )


CURVE_COLUMNS = ["t_cir_us", "grad_norm", "grad_err", "layers", "n_qubits", "noise_tag"]


def write_curve_csv(path, curve: GradientCurve) -> None:
    n_qubits = curve.metadata.get("n_qubits", 0)
    noise_tag = curve.metadata.get("noise_tag", "none")
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CURVE_COLUMNS)
        for i in range(curve.n_points):
            writer.writerow([
                repr(float(curve.t_cir[i])),
                repr(float(curve.gradient[i])),
                repr(float(curve.err[i])),
                int(curve.layers[i]),
                int(n_qubits),
                noise_tag,
            ])


def read_curve_csv(path) -> GradientCurve:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != CURVE_COLUMNS:
            raise ValueError(f"{path}: expected curve header {CURVE_COLUMNS}, got {header}")
        rows = [row for row in reader if row]
    if not rows:
        raise ValueError(f"{path}: curve file has no data rows")
    t = np.array([float(r[0]) for r in rows])
    g = np.array([float(r[1]) for r in rows])
    e = np.array([float(r[2]) for r in rows])
    layers = np.array([int(r[3]) for r in rows])
    metadata = {"n_qubits": int(rows[0][4]), "noise_tag": rows[0][5]}
    return GradientCurve(t_cir=t, gradient=g, err=e, layers=layers, metadata=metadata)

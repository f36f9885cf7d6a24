"""Batch experiment orchestration.

Subcommands: sweep | icla | analyze | spectrum | noise-floor.  A run is
configured by a single JSON file (flat keys plus a nested "noise" block);
every key can be overridden by a command-line flag.  The master seed is
mandatory and every random quantity is derived from it, so outputs are
byte-identical across reruns and worker counts.

Exit codes: 0 success, 2 configuration error, 3 numerical failure.
"""

import argparse
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import analysis, icla, noise, sampler, seeding
from .ansatz import (
    IsingHamiltonian,
    TimingModel,
    build_circuit,
    circuit_runtime,
    exact_cost,
    load_timing_models,
    sample_hamiltonian,
    timing_model,
    write_hamiltonian_json,
)
from .densmat import (
    DEFAULT_MAX_QUBITS,
    EigensolverError,
    StateCorruptionError,
    eigen_spectrum,
    new_plus_state,
    write_spectrum_csv,
)


class ConfigError(ValueError):
    """The experiment configuration is missing or inconsistent."""


_CONFIG_KEYS = {
    "n_qubits", "layers", "shots", "platform", "master_seed", "landscape_cap",
    "landscape_factor", "n_walks", "workers", "output_dir", "tag", "max_qubits",
    "timing_file", "noise", "n_floor_landscapes",
}

_NOISE_KEYS = {
    "kind", "p", "schedule", "terminal_idle", "seed",
    "t1_mean", "t1_std", "t2_mean", "t2_std", "t1_list", "t2_list",
}


@dataclass
class ExperimentConfig:
    """Validated sweep configuration; see the README for the file format."""

    n_qubits: int
    master_seed: int
    layers: list = field(default_factory=list)
    shots: int = 16384
    platform: str = "falcon_ladder"
    landscape_cap: int = 200
    landscape_factor: int = 10
    n_walks: int = 50
    workers: int = 1
    output_dir: str = "out"
    tag: str | None = None
    max_qubits: int = DEFAULT_MAX_QUBITS
    timing_file: str | None = None
    n_floor_landscapes: int = 20
    noise: dict = field(default_factory=lambda: {"kind": "none"})

    def __post_init__(self):
        if self.n_qubits < 2:
            raise ConfigError("n_qubits must be at least 2")
        if self.master_seed is None or self.master_seed < 0:
            raise ConfigError("master_seed is mandatory and must be non-negative")
        if self.shots < 0:
            raise ConfigError("shots must be non-negative (0 means exact costs)")
        self.layers = [int(v) for v in self.layers]
        if self.layers and self.layers != sorted(self.layers):
            raise ConfigError("layer list must be sorted ascending")
        if self.layers and min(self.layers) < 1:
            raise ConfigError("layer counts must be positive")
        if self.workers < 1:
            raise ConfigError("workers must be at least 1")
        unknown = set(self.noise) - _NOISE_KEYS
        if unknown:
            raise ConfigError(f"unknown noise keys: {sorted(unknown)}")
        kind = self.noise.get("kind", "none")
        if kind not in noise.NOISE_KINDS:
            raise ConfigError(
                f"unknown noise kind {kind!r}; expected one of {noise.NOISE_KINDS}"
            )
        if self.tag is None:
            self.tag = _default_tag(self.n_qubits, self.noise)

    @classmethod
    def from_file(cls, path, overrides: dict | None = None) -> "ExperimentConfig":
        try:
            with open(path) as fh:
                payload = json.load(fh)
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
        if not isinstance(payload, dict):
            raise ConfigError(f"config {path} must be a JSON object")
        unknown = set(payload) - _CONFIG_KEYS
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        merged = dict(payload)
        for key, value in (overrides or {}).items():
            if value is None:
                continue
            if key.startswith("noise_"):
                merged.setdefault("noise", {})
                merged["noise"] = dict(merged["noise"])
                merged["noise"][key[len("noise_"):]] = value
            else:
                merged[key] = value
        if "n_qubits" not in merged:
            raise ConfigError("config needs n_qubits")
        if "master_seed" not in merged:
            raise ConfigError("config needs master_seed (no silent entropy)")
        try:
            return cls(**merged)
        except TypeError as exc:
            raise ConfigError(str(exc)) from exc

    def timing(self) -> TimingModel:
        if self.timing_file:
            models = load_timing_models(self.timing_file)
            if self.platform not in models:
                raise ConfigError(
                    f"platform {self.platform!r} not in timing file {self.timing_file}"
                )
            return models[self.platform]
        try:
            return timing_model(self.platform)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc


def _default_tag(n_qubits: int, noise_spec: dict) -> str:
    kind = noise_spec.get("kind", "none")
    if kind == "depolarizing":
        return f"depolarizing_p{noise_spec.get('p', 0)}_n{n_qubits}"
    return f"{kind}_n{n_qubits}"


def _derived_int_seed(master_seed: int, *path) -> int:
    """A serializable 32-bit seed derived from the master seed."""
    return int(seeding.seed_sequence(master_seed, *path).generate_state(1)[0])


def resolve_noise_spec(config: ExperimentConfig) -> dict:
    """Normalize the config's noise block to explicit per-qubit values.

    Coherence times are sampled once here (seeded) so that worker
    processes can rebuild the exact same model from plain lists.
    """
    spec = dict(config.noise)
    kind = spec.get("kind", "none")
    resolved = {
        "kind": kind,
        "p": float(spec.get("p", 0.0) or 0.0),
        "schedule": spec.get("schedule", "per_layer"),
        "terminal_idle": bool(spec.get("terminal_idle", True)),
    }
    if kind in ("amplitude_damping", "ad_plus_dephasing"):
        if "t1_list" in spec:
            t1 = [float(v) for v in spec["t1_list"]]
            t2 = [float(v) for v in spec.get("t2_list", [2.0 * v for v in t1])]
        else:
            needed = ["t1_mean", "t1_std", "t2_mean", "t2_std"]
            missing = [k for k in needed if k not in spec]
            if missing:
                raise ConfigError(
                    f"noise kind {kind!r} needs t1_list or {needed}; missing {missing}"
                )
            seed = spec.get("seed")
            if seed is None:
                seed = _derived_int_seed(config.master_seed, "coherences")
            sample = noise.sample_coherences(
                config.n_qubits,
                float(spec["t1_mean"]), float(spec["t1_std"]),
                float(spec["t2_mean"]), float(spec["t2_std"]),
                seed=seed,
            )
            t1 = [float(v) for v in sample.t1]
            t2 = [float(v) for v in sample.t2]
        if len(t1) < config.n_qubits:
            raise ConfigError(
                f"noise lists cover {len(t1)} qubits, config has {config.n_qubits}"
            )
        resolved["t1_list"] = t1
        resolved["t2_list"] = t2
    return resolved


def _noise_model_from_spec(spec: dict) -> noise.NoiseModel:
    kind = spec["kind"]
    coherences = None
    if kind in ("amplitude_damping", "ad_plus_dephasing"):
        coherences = noise.CoherenceSample(
            np.array(spec["t1_list"]), np.array(spec["t2_list"])
        )
    return noise.NoiseModel(
        kind=kind,
        p=spec.get("p", 0.0),
        coherences=coherences,
        schedule=spec.get("schedule", "per_layer"),
        terminal_idle=spec.get("terminal_idle", True),
    )


def _timing_to_tuple(timing: TimingModel) -> tuple:
    return (timing.platform, timing.depth_coeffs, timing.runtime_coeffs,
            timing.t_1q, timing.t_2q)


def _timing_from_tuple(data: tuple) -> TimingModel:
    return TimingModel(data[0], tuple(data[1]), tuple(data[2]), data[3], data[4])


def evaluate_point(task: dict, index: int, theta: np.ndarray) -> tuple:
    """Simulate one landscape point; used directly and by worker processes."""
    hamiltonian = IsingHamiltonian.from_dict(task["hamiltonian"])
    model = _noise_model_from_spec(task["noise"])
    timing = _timing_from_tuple(task["timing"])
    gates = build_circuit(hamiltonian, theta)
    state = new_plus_state(task["n_qubits"], max_qubits=task["max_qubits"])
    noise.apply_schedule(state, gates, model, timing, task["layers"], inplace=True)
    if task["shots"] > 0:
        seed = seeding.seed_sequence(
            task["master_seed"], "shots", task["layers"], index
        )
        estimate = sampler.estimate_cost(state, hamiltonian, task["shots"], seed)
        return estimate.mean, estimate.std_error
    return exact_cost(state, hamiltonian), 0.0


def _evaluate_point_star(payload):
    return evaluate_point(*payload)


def evaluate_landscape(config: ExperimentConfig, hamiltonian: IsingHamiltonian,
                       noise_spec: dict, layers: int) -> icla.Landscape:
    """Sample and evaluate one landscape for a given layer count."""
    m = 2 * layers
    n_points = icla.landscape_size(m, cap=config.landscape_cap,
                                   factor=config.landscape_factor)
    thetas = icla.sample_points(
        m, n_points, seeding.seed_sequence(config.master_seed, "landscape", layers)
    )
    task = {
        "n_qubits": config.n_qubits,
        "max_qubits": config.max_qubits,
        "hamiltonian": hamiltonian.to_dict(),
        "noise": noise_spec,
        "timing": _timing_to_tuple(config.timing()),
        "layers": layers,
        "shots": config.shots,
        "master_seed": config.master_seed,
    }
    payloads = [(task, i, thetas[i]) for i in range(n_points)]
    if config.workers > 1:
        chunk = max(1, n_points // (4 * config.workers))
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            results = list(pool.map(_evaluate_point_star, payloads, chunksize=chunk))
    else:
        results = [evaluate_point(*p) for p in payloads]
    costs = np.array([r[0] for r in results])
    errors = np.array([r[1] for r in results])
    metadata = {
        "n_qubits": config.n_qubits,
        "layers": layers,
        "m": m,
        "noise": noise_spec["kind"],
        "shots": config.shots,
        "seed": config.master_seed,
        "c0": hamiltonian.c0,
        "platform": config.platform,
    }
    return icla.Landscape(thetas=thetas, costs=costs, cost_errors=errors,
                          metadata=metadata)


def run_sweep(config: ExperimentConfig, out_dir: Path | None = None) -> Path:
    """Evaluate every configured layer count and write the gradient curve."""
    if not config.layers:
        raise ConfigError("sweep needs a non-empty layer list")
    out = Path(out_dir) if out_dir else Path(config.output_dir) / f"sweep_{config.tag}"
    (out / "landscapes").mkdir(parents=True, exist_ok=True)
    hamiltonian = sample_hamiltonian(
        config.n_qubits, _derived_int_seed(config.master_seed, "hamiltonian", config.n_qubits)
    )
    write_hamiltonian_json(out / "hamiltonian.json", hamiltonian)
    noise_spec = resolve_noise_spec(config)
    timing = config.timing()
    rows = []
    for layers in config.layers:
        landscape = evaluate_landscape(config, hamiltonian, noise_spec, layers)
        icla.write_landscape(out / "landscapes" / f"L{layers}.csv", landscape)
        result = icla.run_icla(
            landscape, n_walks=config.n_walks,
            seed=seeding.seed_sequence(config.master_seed, "walks", layers),
            c0=hamiltonian.c0,
        )
        rows.append((
            circuit_runtime(config.n_qubits, layers, timing),
            result.gradient_norm,
            result.bootstrap_std,
            layers,
        ))
    curve = analysis.GradientCurve(
        t_cir=np.array([r[0] for r in rows]),
        gradient=np.array([r[1] for r in rows]),
        err=np.array([r[2] for r in rows]),
        layers=np.array([r[3] for r in rows]),
        metadata={"n_qubits": config.n_qubits, "noise_tag": noise_spec["kind"],
                  "platform": config.platform},
    )
    analysis.write_curve_csv(out / "curve.csv", curve)
    return out


def _cmd_sweep(args) -> int:
    config = ExperimentConfig.from_file(args.config, _overrides(args))
    out = run_sweep(config)
    print(f"sweep written to {out}")
    return 0


def _cmd_icla(args) -> int:
    landscape = icla.read_landscape(args.landscape)
    if args.truncate:
        landscape = landscape.truncated(args.truncate)
    result = icla.run_icla(landscape, n_walks=args.n_walks, seed=args.seed,
                           c0=args.c0)
    payload = result.to_dict()
    payload["n_points"] = landscape.n_points
    payload["m"] = landscape.m
    text = json.dumps(payload, indent=2, sort_keys=True)
    if args.output:
        Path(args.output).write_text(text + "\n")
    print(text)
    return 0


def _cmd_analyze(args) -> int:
    curve = analysis.read_curve_csv(args.curve)
    fit = analysis.fit_flattening(curve)
    report = {
        "t_flat": fit.t_flat,
        "t_flat_err": fit.t_flat_err,
        "g_inf": fit.g_inf,
        "verdict": fit.verdict,
        "p_threshold": args.p_threshold,
        "t1_eff": None,
        "t1_eff_err": None,
        "percentile": None,
        "mean_t1": None,
    }
    if fit.verdict == "plateau":
        t1_report = analysis.effective_t1(fit.t_flat, fit.t_flat_err, args.p_threshold)
        report["t1_eff"] = t1_report.t1_eff
        report["t1_eff_err"] = t1_report.t1_eff_err
        if args.t1_file:
            values = np.loadtxt(args.t1_file, ndmin=1)
            stats = analysis.t1_percentile(values, t1_report.t1_eff)
            report["percentile"] = stats.percentile
            report["mean_t1"] = stats.mean
    text = json.dumps(report, indent=2, sort_keys=True)
    output = args.output or (Path(args.curve).parent / "report.json")
    Path(output).write_text(text + "\n")
    print(text)
    return 0


def _spectrum_thetas(config: ExperimentConfig, layers: int, args) -> np.ndarray:
    m = 2 * layers
    if args.theta_file:
        thetas = np.loadtxt(args.theta_file, ndmin=2, delimiter=",")
        if thetas.shape[1] != m:
            raise ConfigError(
                f"theta file has {thetas.shape[1]} angles per row, expected {m}"
            )
        return thetas
    count = args.n_thetas
    return icla.sample_points(
        m, count, seeding.seed_sequence(config.master_seed, "spectrum", layers)
    )


def _cmd_spectrum(args) -> int:
    config = ExperimentConfig.from_file(args.config, _overrides(args))
    layers = args.spectrum_layers or (config.layers[-1] if config.layers else None)
    if not layers:
        raise ConfigError("spectrum needs --spectrum-layers or a configured layer list")
    if config.n_qubits > config.max_qubits:
        raise ConfigError(f"spectrum capped at {config.max_qubits} qubits")
    out = Path(config.output_dir) / f"spectrum_{config.tag}"
    out.mkdir(parents=True, exist_ok=True)
    hamiltonian = sample_hamiltonian(
        config.n_qubits, _derived_int_seed(config.master_seed, "hamiltonian", config.n_qubits)
    )
    noise_spec = resolve_noise_spec(config)
    model = _noise_model_from_spec(noise_spec)
    timing = config.timing()
    thetas = _spectrum_thetas(config, layers, args)
    summary = []
    for k, theta in enumerate(thetas):
        state = new_plus_state(config.n_qubits, max_qubits=config.max_qubits)
        gates = build_circuit(hamiltonian, theta)
        noise.apply_schedule(state, gates, model, timing, layers, inplace=True)
        values = eigen_spectrum(state)
        write_spectrum_csv(out / f"spectrum_{k}.csv", values)
        profile = analysis.spectral_profile(state)
        with open(out / f"histogram_{k}.csv", "w", newline="") as fh:
            fh.write("bin_lo,bin_hi,count\n")
            for lo, hi, count in zip(profile.bin_edges[:-1], profile.bin_edges[1:],
                                     profile.counts):
                fh.write(f"{lo!r},{hi!r},{int(count)}\n")
        summary.append({
            "theta_index": k,
            "max_eigenvalue": profile.max_eigenvalue,
            "effective_rank": profile.effective_rank,
        })
    t_cir = circuit_runtime(config.n_qubits, layers, timing)
    if model.time_based:
        decay_p = 1.0 - float(np.exp(-t_cir / np.mean(model.coherences.t1)))
    elif model.kind == "depolarizing":
        decay_p = model.p
    else:
        decay_p = 0.0
    with open(out / "analytic.csv", "w", newline="") as fh:
        fh.write("eigenvalue,multiplicity\n")
        for value, mult in analysis.analytic_decay_spectrum(config.n_qubits, decay_p):
            fh.write(f"{value!r},{mult}\n")
    payload = {"layers": layers, "t_cir_us": t_cir, "decay_probability": decay_p,
               "states": summary}
    (out / "summary.json").write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
    print(f"spectra written to {out}")
    return 0


def _cmd_noise_floor(args) -> int:
    config = ExperimentConfig.from_file(args.config, _overrides(args))
    if not config.layers:
        raise ConfigError("noise-floor needs a configured layer list")
    if config.shots < 1:
        raise ConfigError("noise-floor needs shots >= 1")
    hamiltonian = sample_hamiltonian(
        config.n_qubits, _derived_int_seed(config.master_seed, "hamiltonian", config.n_qubits)
    )
    comparison = None
    if args.curve:
        comparison = analysis.read_curve_csv(args.curve)
    entries = []
    for layers in config.layers:
        m = 2 * layers
        floor = sampler.shot_noise_floor(
            hamiltonian, m, config.shots,
            n_landscapes=config.n_floor_landscapes,
            seed=_derived_int_seed(config.master_seed, "floor", layers),
            n_walks=config.n_walks,
            cap=config.landscape_cap, factor=config.landscape_factor,
        )
        entry = {"layers": layers, "m": m, "shots": config.shots,
                 "floor_mean": floor.mean, "floor_std": floor.std}
        if comparison is not None:
            match = np.nonzero(comparison.layers == layers)[0]
            if match.size:
                gradient = float(comparison.gradient[match[0]])
                entry["gradient"] = gradient
                entry["floor_over_gradient"] = floor.mean / gradient if gradient else None
        entries.append(entry)
    payload = {"tag": config.tag, "entries": entries}
    out = Path(config.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    path = out / f"noise_floor_{config.tag}.json"
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
    print(json.dumps(payload, indent=2, sort_keys=True))
    return 0


def _overrides(args) -> dict:
    keys = [
        "n_qubits", "shots", "platform", "master_seed", "landscape_cap",
        "landscape_factor", "n_walks", "workers", "output_dir", "tag",
        "max_qubits", "timing_file", "n_floor_landscapes",
        "noise_kind", "noise_p", "noise_schedule", "noise_seed",
        "noise_t1_mean", "noise_t1_std", "noise_t2_mean", "noise_t2_std",
    ]
    overrides = {k: getattr(args, k, None) for k in keys}
    if getattr(args, "layers", None):
        overrides["layers"] = [int(v) for v in args.layers.split(",")]
    if getattr(args, "noise_terminal_idle", None) is not None:
        overrides["noise_terminal_idle"] = args.noise_terminal_idle == "true"
    return overrides


def _add_config_options(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", required=True, help="JSON experiment config")
    parser.add_argument("--n-qubits", dest="n_qubits", type=int)
    parser.add_argument("--layers", help="comma-separated layer counts")
    parser.add_argument("--shots", type=int)
    parser.add_argument("--platform")
    parser.add_argument("--master-seed", dest="master_seed", type=int)
    parser.add_argument("--landscape-cap", dest="landscape_cap", type=int)
    parser.add_argument("--landscape-factor", dest="landscape_factor", type=int)
    parser.add_argument("--n-walks", dest="n_walks", type=int)
    parser.add_argument("--workers", type=int)
    parser.add_argument("--output-dir", dest="output_dir")
    parser.add_argument("--tag")
    parser.add_argument("--max-qubits", dest="max_qubits", type=int)
    parser.add_argument("--timing-file", dest="timing_file")
    parser.add_argument("--n-floor-landscapes", dest="n_floor_landscapes", type=int)
    parser.add_argument("--noise-kind", dest="noise_kind")
    parser.add_argument("--noise-p", dest="noise_p", type=float)
    parser.add_argument("--noise-schedule", dest="noise_schedule")
    parser.add_argument("--noise-seed", dest="noise_seed", type=int)
    parser.add_argument("--noise-t1-mean", dest="noise_t1_mean", type=float)
    parser.add_argument("--noise-t1-std", dest="noise_t1_std", type=float)
    parser.add_argument("--noise-t2-mean", dest="noise_t2_mean", type=float)
    parser.add_argument("--noise-t2-std", dest="noise_t2_std", type=float)
    parser.add_argument("--noise-terminal-idle", dest="noise_terminal_idle",
                        choices=["true", "false"])


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qlandscape",
        description="Noisy density-matrix sweeps and landscape-gradient analysis",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_sweep = sub.add_parser("sweep", help="evaluate landscapes over a layer sweep")
    _add_config_options(p_sweep)
    p_sweep.set_defaults(func=_cmd_sweep)

    p_icla = sub.add_parser("icla", help="analyze a landscape file")
    p_icla.add_argument("landscape", help="landscape CSV")
    p_icla.add_argument("--n-walks", dest="n_walks", type=int, default=50)
    p_icla.add_argument("--seed", type=int, default=0)
    p_icla.add_argument("--c0", type=float, default=None,
                        help="normalization (default: metadata sidecar)")
    p_icla.add_argument("--truncate", type=int, default=None,
                        help="analyze only the first N points")
    p_icla.add_argument("-o", "--output", help="write the result JSON here")
    p_icla.set_defaults(func=_cmd_icla)

    p_an = sub.add_parser("analyze", help="flattening fit and effective T1")
    p_an.add_argument("curve", help="gradient curve CSV")
    p_an.add_argument("--p-threshold", dest="p_threshold", type=float,
                      default=analysis.DEFAULT_P_THRESHOLD)
    p_an.add_argument("--t1-file", dest="t1_file",
                      help="text file of per-qubit T1 values for the percentile")
    p_an.add_argument("-o", "--output", help="report path (default: report.json)")
    p_an.set_defaults(func=_cmd_analyze)

    p_sp = sub.add_parser("spectrum", help="eigenvalue spectra of evolved states")
    _add_config_options(p_sp)
    p_sp.add_argument("--spectrum-layers", dest="spectrum_layers", type=int,
                      help="layer count (default: last configured layer)")
    p_sp.add_argument("--theta-file", dest="theta_file",
                      help="CSV of parameter vectors, one per row")
    p_sp.add_argument("--n-thetas", dest="n_thetas", type=int, default=1)
    p_sp.set_defaults(func=_cmd_spectrum)

    p_nf = sub.add_parser("noise-floor", help="shot-noise gradient floor")
    _add_config_options(p_nf)
    p_nf.add_argument("--curve", help="curve CSV to compare the floor against")
    p_nf.set_defaults(func=_cmd_noise_floor)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, icla.LandscapeFormatError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (StateCorruptionError, EigensolverError, icla.LandscapeEvaluationError,
            analysis.FitError, np.linalg.LinAlgError, FloatingPointError,
            RuntimeError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3


def entry_point() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry_point()

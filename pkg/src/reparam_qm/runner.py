"""Scenario execution and serialization of fields, trajectories and manifests."""
from __future__ import annotations

import csv
import json
import logging
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Dict, List, Optional

import numpy as np

from . import __version__
from .config import ExperimentConfig, config_to_dict
from .equivalence import density_from_phi, phi_from_psi, psi_from_phi, verify_equivalence
from .evolution import (
    EvolutionParams,
    KleinGordonState,
    SchrodingerState,
    evolve_klein_gordon,
    evolve_schrodinger,
    evolve_sqrt_schrodinger,
    kg_energy,
    mode_frequencies,
    nonrel_frequency_residual,
    pt_reality_residual,
    snapshots,
)
from .mechanics import (
    GaugeFunction,
    exponential_gauge,
    free_particle,
    harmonic_oscillator,
    identity_gauge,
    integrate_physical,
    lift_to_ri,
    power_gauge,
    reconstruct_physical,
    relativistic_particle,
    ri_constraint,
)
from .spectral import (
    ComplexField,
    GridSpec,
    PhysicalConstants,
    RealField,
    norm,
    uncertainty_product,
)

__all__ = [
    "RunManifest",
    "ScenarioError",
    "run",
    "initial_field",
    "random_localized_state",
    "format_float",
    "write_csv",
    "read_field_csv",
    "thread_limit",
]

log = logging.getLogger(__name__)


class ScenarioError(RuntimeError):
    pass


@dataclass
class RunManifest:
    config: dict
    version: str = __version__
    duration_seconds: float = 0.0
    metrics: Dict[str, float] = field(default_factory=dict)
    series: Dict[str, List[float]] = field(default_factory=dict)
    files: List[str] = field(default_factory=list)
    error: Optional[str] = None

    @property
    def ok(self) -> bool:
        return self.error is None

    def to_dict(self) -> dict:
        return {
            "config": self.config,
            "version": self.version,
            "duration_seconds": self.duration_seconds,
            "metrics": self.metrics,
            "series": self.series,
            "files": self.files,
            "error": self.error,
        }


# --- serialization ------------------------------------------------------------

def format_float(value) -> str:
    """Shortest round-trip decimal form (at most 17 significant digits)."""
    return repr(float(value))


def write_csv(path: Path, header: List[str], columns: List[np.ndarray]) -> None:
    rows = zip(*[np.asarray(c, dtype=float).ravel() for c in columns])
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([format_float(v) for v in row])


def read_field_csv(path, grid: GridSpec) -> ComplexField:
    """Read ``x,re,im`` (complex) or ``x,value``/``x,phi,...`` (real) snapshot files."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = [h.strip().lower() for h in next(reader)]
        rows = [[float(v) for v in row] for row in reader if row]
    data = np.array(rows, dtype=float)
    if data.ndim != 2 or data.shape[0] != grid.n:
        raise ScenarioError(f"{path}: expected {grid.n} rows, found {len(rows)}")
    if header[:3] == ["x", "re", "im"]:
        return ComplexField(grid, data[:, 1] + 1j * data[:, 2])
    return ComplexField(grid, data[:, 1])


def thread_limit() -> int:
    raw = os.environ.get("REPARAM_QM_THREADS")
    if raw:
        try:
            return max(1, int(raw))
        except ValueError:
            log.warning("ignoring non-integer REPARAM_QM_THREADS=%r", raw)
    return os.cpu_count() or 1


# --- initial data -------------------------------------------------------------

def _normalized(grid: GridSpec, values: np.ndarray) -> ComplexField:
    f = ComplexField(grid, values)
    return f * (1.0 / norm(f))


def gaussian_packet(grid: GridSpec, center: float, width: float, momentum: float = 0.0,
                    chirp: float = 0.0) -> ComplexField:
    x = grid.x - center
    values = np.exp(-(x**2) / (4 * width**2) + 1j * momentum * grid.x + 1j * chirp * x**2)
    return _normalized(grid, values)


def random_band_limited(grid: GridSpec, rng: np.random.Generator, bandwidth: int) -> ComplexField:
    coeffs = np.zeros(grid.n, dtype=complex)
    j = np.r_[0 : bandwidth + 1, grid.n - bandwidth : grid.n]
    coeffs[j] = rng.normal(size=j.size) + 1j * rng.normal(size=j.size)
    return _normalized(grid, np.fft.ifft(coeffs, norm="ortho"))


def random_localized_state(grid: GridSpec, rng: np.random.Generator) -> ComplexField:
    """Superposition of 1-3 chirped, boosted Gaussians kept near ``L/2``."""
    L = grid.length
    values = np.zeros(grid.n, dtype=complex)
    for _ in range(rng.integers(1, 4)):
        center = L / 2 + rng.uniform(-L / 16, L / 16)
        width = rng.uniform(L / 48, L / 24)
        momentum = rng.uniform(-20, 20) * 2 * np.pi / L
        chirp = rng.uniform(-5, 5) / L**2 * (2 * np.pi) ** 2
        amp = rng.normal() + 1j * rng.normal()
        x = grid.x - center
        values += amp * np.exp(-(x**2) / (4 * width**2) + 1j * momentum * x + 1j * chirp * x**2)
    return _normalized(grid, values)


def initial_field(cfg: ExperimentConfig, grid: GridSpec, rng: np.random.Generator) -> ComplexField:
    init = cfg.initial
    if init.kind == "gaussian":
        center = grid.length / 2 if init.center is None else init.center
        width = grid.length / 32 if init.width is None else init.width
        return gaussian_packet(grid, center, width, init.momentum, init.chirp)
    if init.kind == "plane-wave":
        return _normalized(grid, np.exp(2j * np.pi * init.mode * grid.x / grid.length))
    if init.kind == "random":
        return random_band_limited(grid, rng, init.bandwidth)
    return read_field_csv(init.path, grid)


# --- scenarios ----------------------------------------------------------------

class _Context:
    def __init__(self, cfg: ExperimentConfig, out: Path, manifest: RunManifest):
        self.cfg = cfg
        self.out = out
        self.manifest = manifest
        self.grid = GridSpec(cfg.grid.n, cfg.grid.length)
        c = cfg.constants
        self.constants = PhysicalConstants(c.hbar, c.c, c.mass)
        self.rng = np.random.default_rng(cfg.seed)
        self.csv = "csv" in cfg.output.formats

    def snapshot(self, index: int, header, columns) -> None:
        if self.csv:
            name = f"snapshot_{index}.csv"
            write_csv(self.out / name, header, columns)
            self.manifest.files.append(name)

    def field_snapshot(self, index: int, psi: ComplexField) -> None:
        self.snapshot(index, ["x", "re", "im"], [psi.grid.x, psi.values.real, psi.values.imag])

    def kg_snapshot(self, index: int, state: KleinGordonState) -> None:
        self.snapshot(index, ["x", "phi", "phi_dot"],
                      [state.grid.x, state.phi.values, state.phi_dot.values])

    def params(self, potential: Optional[RealField] = None) -> EvolutionParams:
        t = self.cfg.time
        return EvolutionParams(t.dt, t.steps, self.constants, potential)


def _position_width(psi: ComplexField) -> float:
    rho = np.abs(psi.values) ** 2 * psi.grid.spacing
    rho = rho / rho.sum()
    x = psi.grid.x
    mean = np.sum(x * rho)
    return float(np.sqrt(np.sum((x - mean) ** 2 * rho)))


def _scenario_evolve_nonrel(ctx: _Context) -> None:
    cfg, grid = ctx.cfg, ctx.grid
    potential = None
    if cfg.potential.kind == "harmonic":
        center = grid.length / 2 if cfg.potential.center is None else cfg.potential.center
        potential = RealField(grid, 0.5 * cfg.potential.strength * (grid.x - center) ** 2)
    psi0 = initial_field(cfg, grid, ctx.rng)
    norm0 = norm(psi0)
    analytic_width = cfg.initial.kind == "gaussian" and potential is None and cfg.initial.chirp == 0
    sigma = _position_width(psi0)
    series = {"time": [], "norm": [], "width": []}
    if analytic_width:
        series["width_error"] = []
    for i, state in enumerate(snapshots(evolve_schrodinger, SchrodingerState(psi0), ctx.params(potential),
                                        cfg.time.stride)):
        series["time"].append(state.time)
        series["norm"].append(norm(state.psi))
        width = _position_width(state.psi)
        series["width"].append(width)
        if analytic_width:
            k = ctx.constants
            expected = np.sqrt(sigma**2 + (k.hbar * state.time / (2 * k.mass * sigma)) ** 2)
            series["width_error"].append(abs(width - expected) / expected)
        ctx.field_snapshot(i, state.psi)
    ctx.manifest.series = series
    m = ctx.manifest.metrics
    m["norm_drift_max"] = max(abs(n - norm0) / norm0 for n in series["norm"])
    m["final_width"] = series["width"][-1]
    if analytic_width:
        m["width_error_max"] = max(series["width_error"])


def _scenario_evolve_sqrt(ctx: _Context) -> None:
    cfg, grid = ctx.cfg, ctx.grid
    psi0 = initial_field(cfg, grid, ctx.rng)
    norm0 = norm(psi0)
    omega = mode_frequencies(grid, ctx.constants)
    coeffs0 = np.fft.fft(psi0.values, norm="ortho")
    states = list(snapshots(evolve_sqrt_schrodinger, SchrodingerState(psi0), ctx.params(), cfg.time.stride))
    series = {"time": [], "norm": [], "dispersion_error": []}
    for i, state in enumerate(states):
        exact = np.fft.ifft(coeffs0 * np.exp(-1j * omega * state.time), norm="ortho")
        series["time"].append(state.time)
        series["norm"].append(norm(state.psi))
        series["dispersion_error"].append(float(np.max(np.abs(state.psi.values - exact))))
        ctx.field_snapshot(i, state.psi)
    ctx.manifest.series = series
    m = ctx.manifest.metrics
    m["norm_drift_max"] = max(abs(n - norm0) / norm0 for n in series["norm"])
    m["dispersion_error_max"] = max(series["dispersion_error"])
    if len(states) >= 3:
        m["pt_reality_residual"] = pt_reality_residual(states, ctx.constants.hbar)


def _kg_initial(ctx: _Context) -> KleinGordonState:
    """KG datum whose mapped wave function is the configured initial field."""
    return phi_from_psi(initial_field(ctx.cfg, ctx.grid, ctx.rng), 0.0, ctx.constants)


def _scenario_evolve_kg(ctx: _Context) -> None:
    const = ctx.constants
    state0 = _kg_initial(ctx)
    e0 = kg_energy(state0, const)
    series = {"time": [], "energy": [], "psi_norm_sq": [], "density_residual": []}
    for i, state in enumerate(snapshots(evolve_klein_gordon, state0, ctx.params(), ctx.cfg.time.stride)):
        psi = psi_from_phi(state, const)
        series["time"].append(state.time)
        series["energy"].append(kg_energy(state, const))
        series["psi_norm_sq"].append(norm(psi) ** 2)
        series["density_residual"].append(
            float(np.max(np.abs(np.abs(psi.values) ** 2 - density_from_phi(state, const).values)))
        )
        ctx.kg_snapshot(i, state)
    ctx.manifest.series = series
    m = ctx.manifest.metrics
    m["energy_drift_max"] = max(abs(e - e0) / e0 for e in series["energy"])
    m["energy_probability_gap_max"] = max(
        abs(e - p) / e for e, p in zip(series["energy"], series["psi_norm_sq"])
    )
    m["density_residual_max"] = max(series["density_residual"])


def _scenario_kg_equivalence(ctx: _Context) -> None:
    t = ctx.cfg.time
    state0 = _kg_initial(ctx)
    T = t.steps * t.dt
    report = verify_equivalence(state0, T, ctx.params())
    ctx.manifest.metrics.update(report.as_dict())
    ctx.manifest.series = {k: [v] for k, v in report.as_dict().items()}
    ctx.kg_snapshot(0, state0)
    ctx.kg_snapshot(1, evolve_klein_gordon(state0, ctx.params()))


def _scenario_nonrel_scan(ctx: _Context) -> None:
    scan = ctx.cfg.scan
    k0 = ctx.constants
    k = 2 * np.pi * scan.mode / ctx.grid.length

    def point(c):
        const = PhysicalConstants(k0.hbar, c, k0.mass)
        residual = nonrel_frequency_residual(const, scan.mode, scan.t, ctx.grid)
        predicted = k0.hbar**3 * k**4 / (8 * k0.mass**3 * c**2)
        return residual, predicted

    with ThreadPoolExecutor(max_workers=min(thread_limit(), len(scan.c_values))) as pool:
        results = list(pool.map(point, scan.c_values))
    residuals = [r for r, _ in results]
    predicted = [p for _, p in results]
    slope = float(np.polyfit(np.log(scan.c_values), np.log(residuals), 1)[0])
    ctx.manifest.series = {
        "c": list(scan.c_values),
        "residual": residuals,
        "predicted": predicted,
        "ratio": [r / p for r, p in zip(residuals, predicted)],
    }
    m = ctx.manifest.metrics
    m["loglog_slope"] = slope
    for c, r, p in zip(scan.c_values, residuals, predicted):
        m[f"residual_c{c:g}"] = r
        m[f"relative_deviation_c{c:g}"] = abs(r - p) / p


def _mechanics_model(ctx: _Context):
    mech = ctx.cfg.mechanics
    if mech.model == "free":
        return free_particle(ctx.constants.mass)
    if mech.model == "harmonic":
        return harmonic_oscillator(ctx.constants.mass, mech.omega)
    return relativistic_particle(ctx.constants)


def _gauge(name: str, t0: float, t1: float) -> GaugeFunction:
    if name == "identity":
        return identity_gauge(t0, t1)
    if name == "cubic":
        return power_gauge(3, t0 ** (1 / 3), t1 ** (1 / 3))
    return exponential_gauge(np.log1p(t0), np.log1p(t1))


def _integrate(ctx: _Context):
    mech = ctx.cfg.mechanics
    model = _mechanics_model(ctx)
    traj = integrate_physical(model, [mech.q0], [mech.v0], mech.t0, mech.t1, mech.dt)
    return model, traj


def _scenario_ri_constraint(ctx: _Context) -> None:
    model, traj = _integrate(ctx)
    stride = ctx.cfg.time.stride
    idx = np.arange(0, len(traj), stride)
    if idx[-1] != len(traj) - 1:
        idx = np.append(idx, len(traj) - 1)
    constraint = np.array([ri_constraint(model, traj[i]) for i in idx])
    ctx.snapshot(0, ["t", "q", "p", "p_t", "constraint"],
                 [traj.t[idx], traj.q[idx, 0], traj.p[idx, 0], traj.p_t[idx], constraint])
    ctx.manifest.series = {"t": traj.t[idx].tolist(), "constraint": constraint.tolist()}
    m = ctx.manifest.metrics
    m["constraint_max_abs"] = float(np.max(np.abs(constraint)))
    m["p_t_drift_max"] = float(np.max(np.abs(traj.p_t - traj.p_t[0])))
    m["samples"] = float(len(traj))


def _scenario_gauge_invariance(ctx: _Context) -> None:
    mech = ctx.cfg.mechanics
    model, traj = _integrate(ctx)
    curves = []
    constraint_max = 0.0
    for i, name in enumerate(mech.gauges):
        lifted = lift_to_ri(traj, _gauge(name, mech.t0, mech.t1))
        probe = np.linspace(0, len(lifted) - 1, min(len(lifted), 200)).astype(int)
        constraint_max = max(constraint_max,
                             max(abs(ri_constraint(model, lifted[j])) for j in probe))
        curves.append(reconstruct_physical(lifted))
        ctx.snapshot(i, ["tau", "t", "q", "p", "p_t"],
                     [lifted.tau, lifted.t, lifted.q[:, 0], lifted.p[:, 0], lifted.p_t])
    t = traj.t
    qa, qb = curves[0](t)[:, 0], curves[1](t)[:, 0]
    discrepancy = np.abs(qa - qb)
    stride = ctx.cfg.time.stride
    ctx.manifest.series = {"t": t[::stride].tolist(), "discrepancy": discrepancy[::stride].tolist()}
    m = ctx.manifest.metrics
    m["gauge_discrepancy_max"] = float(np.max(discrepancy))
    m["lifted_constraint_max_abs"] = float(constraint_max)
    if mech.model == "free":
        line = mech.q0 + mech.v0 * (t - mech.t0)
        m["free_line_error_max"] = float(max(np.max(np.abs(qa - line)), np.max(np.abs(qb - line))))


def _scenario_uncertainty(ctx: _Context) -> None:
    grid, const = ctx.grid, ctx.constants
    psi = initial_field(ctx.cfg, grid, ctx.rng)
    main = uncertainty_product(psi, const)
    ratios = []
    for _ in range(ctx.cfg.uncertainty.samples):
        u = uncertainty_product(random_localized_state(grid, ctx.rng), const)
        ratios.append(u.product / u.bound)
    ctx.field_snapshot(0, psi)
    ctx.manifest.series = {"ratio": ratios}
    m = ctx.manifest.metrics
    m["delta_x"], m["delta_p"], m["bound"] = main
    m["product_over_bound"] = main.product / main.bound
    if ratios:
        m["random_ratio_min"] = min(ratios)
        m["random_all_satisfy"] = float(all(r >= 1 - 1e-6 for r in ratios))


SCENARIO_RUNNERS: Dict[str, Callable[[_Context], None]] = {
    "evolve-nonrel": _scenario_evolve_nonrel,
    "evolve-sqrt": _scenario_evolve_sqrt,
    "evolve-kg": _scenario_evolve_kg,
    "kg-equivalence": _scenario_kg_equivalence,
    "nonrel-limit-scan": _scenario_nonrel_scan,
    "ri-constraint": _scenario_ri_constraint,
    "gauge-invariance": _scenario_gauge_invariance,
    "uncertainty": _scenario_uncertainty,
}


def _write_metrics_csv(path: Path, series: Dict[str, List[float]]) -> bool:
    if not series:
        return False
    lengths = {len(v) for v in series.values()}
    if len(lengths) != 1:
        raise ScenarioError(f"metric series have unequal lengths {sorted(lengths)}")
    keys = list(series)
    write_csv(path, keys, [np.asarray(series[k], dtype=float) for k in keys])
    return True


def run(cfg: ExperimentConfig, out: Optional[Path] = None) -> RunManifest:
    """Execute ``cfg.scenario`` and write its outputs to ``out``.

    Module errors do not propagate; they are recorded in ``manifest.error``
    and ``manifest.json`` is still written.
    """
    out = Path(cfg.output.directory if out is None else out)
    out.mkdir(parents=True, exist_ok=True)
    manifest = RunManifest(config=config_to_dict(cfg))
    ctx = _Context(cfg, out, manifest)
    start = time.perf_counter()
    try:
        SCENARIO_RUNNERS[cfg.scenario](ctx)
        bad = [k for k, v in manifest.metrics.items() if not np.isfinite(v)]
        bad += [k for k, v in manifest.series.items() if not np.all(np.isfinite(v))]
        if bad:
            raise ScenarioError(f"non-finite metrics: {bad}")
        manifest.metrics = {k: float(v) for k, v in manifest.metrics.items()}
        manifest.series = {k: [float(x) for x in v] for k, v in manifest.series.items()}
        if ctx.csv and _write_metrics_csv(out / "metrics.csv", manifest.series):
            manifest.files.append("metrics.csv")
    except Exception as exc:  # recorded, not raised: the manifest must be written
        log.exception("scenario %s failed", cfg.scenario)
        manifest.error = f"{type(exc).__name__}: {exc}"
    manifest.duration_seconds = time.perf_counter() - start
    with open(out / "manifest.json", "w", encoding="utf-8") as fh:
        json.dump(manifest.to_dict(), fh, indent=2, sort_keys=True, allow_nan=False)
        fh.write("\n")
    return manifest

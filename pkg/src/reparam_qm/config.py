"""Experiment configuration: TOML files with dotted sections.

Every key has a default, so a config only lists what differs::

    scenario = "evolve-sqrt"
    grid.n = 256
    grid.length = 6.283185307179586
    initial.kind = "plane-wave"
    initial.mode = 1
    time.dt = 0.1
    time.steps = 100
    time.stride = 10

Unknown keys are rejected with their dotted name.
"""
from __future__ import annotations

import dataclasses
import math
import sys
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Any, Mapping, Optional, Sequence, Tuple

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib
import tomli_w

__all__ = [
    "SCENARIOS",
    "ConfigError",
    "ExperimentConfig",
    "parse_config",
    "config_from_dict",
    "config_to_dict",
    "serialize_config",
]

SCENARIOS = (
    "evolve-nonrel",
    "evolve-sqrt",
    "evolve-kg",
    "kg-equivalence",
    "nonrel-limit-scan",
    "ri-constraint",
    "gauge-invariance",
    "uncertainty",
)
INITIAL_KINDS = ("gaussian", "plane-wave", "custom-file", "random")
POTENTIAL_KINDS = ("none", "harmonic")
MODEL_KINDS = ("free", "harmonic", "relativistic")
GAUGE_KINDS = ("identity", "cubic", "exp")
FORMATS = ("csv", "json")


class ConfigError(ValueError):
    """Invalid configuration; the message names the offending key."""


@dataclass(frozen=True)
class GridConfig:
    n: int = 256
    length: float = 2 * math.pi


@dataclass(frozen=True)
class ConstantsConfig:
    hbar: float = 1.0
    c: float = 1.0
    mass: float = 1.0


@dataclass(frozen=True)
class InitialConfig:
    """Initial wave function or field.

    ``gaussian``: ``exp(-(x-center)^2 / (4 width^2) + i momentum x + i chirp (x-center)^2)``;
    ``plane-wave``: ``exp(2 pi i mode x / L)``; ``custom-file``: a snapshot
    CSV; ``random``: seeded band-limited data with modes ``|j| <= bandwidth``.
    Center and width default to ``L/2`` and ``L/32``.
    """

    kind: str = "gaussian"
    center: Optional[float] = None
    width: Optional[float] = None
    momentum: float = 0.0
    chirp: float = 0.0
    mode: int = 1
    bandwidth: int = 16
    path: Optional[str] = None


@dataclass(frozen=True)
class TimeConfig:
    dt: float = 0.01
    steps: int = 100
    stride: int = 10


@dataclass(frozen=True)
class OutputConfig:
    directory: str = "runs/output"
    formats: Tuple[str, ...] = ("csv", "json")


@dataclass(frozen=True)
class PotentialConfig:
    """``harmonic``: ``V = strength * (x - center)^2 / 2`` (center defaults to ``L/2``)."""

    kind: str = "none"
    strength: float = 1.0
    center: Optional[float] = None


@dataclass(frozen=True)
class ScanConfig:
    c_values: Tuple[float, ...] = (5.0, 10.0, 20.0, 40.0)
    mode: int = 1
    t: float = 1.0


@dataclass(frozen=True)
class MechanicsConfig:
    model: str = "harmonic"
    omega: float = 1.0
    q0: float = 1.0
    v0: float = 0.0
    t0: float = 0.0
    t1: float = 10.0
    dt: float = 1e-3
    gauges: Tuple[str, ...] = ("cubic", "exp")


@dataclass(frozen=True)
class UncertaintyConfig:
    samples: int = 20


@dataclass(frozen=True)
class ExperimentConfig:
    scenario: str
    seed: int = 0
    grid: GridConfig = field(default_factory=GridConfig)
    constants: ConstantsConfig = field(default_factory=ConstantsConfig)
    initial: InitialConfig = field(default_factory=InitialConfig)
    time: TimeConfig = field(default_factory=TimeConfig)
    output: OutputConfig = field(default_factory=OutputConfig)
    potential: PotentialConfig = field(default_factory=PotentialConfig)
    scan: ScanConfig = field(default_factory=ScanConfig)
    mechanics: MechanicsConfig = field(default_factory=MechanicsConfig)
    uncertainty: UncertaintyConfig = field(default_factory=UncertaintyConfig)


_SECTION_TYPES = {
    "grid": GridConfig,
    "constants": ConstantsConfig,
    "initial": InitialConfig,
    "time": TimeConfig,
    "output": OutputConfig,
    "potential": PotentialConfig,
    "scan": ScanConfig,
    "mechanics": MechanicsConfig,
    "uncertainty": UncertaintyConfig,
}


def _coerce(name: str, value: Any, default: Any, annotation: str):
    """Convert a TOML value to the type implied by the field annotation."""
    if value is None:
        return None
    if "Tuple" in annotation:
        if not isinstance(value, (list, tuple)):
            raise ConfigError(f"{name}: expected a list, got {value!r}")
        elem = "float" if "float" in annotation else "str"
        return tuple(_coerce(f"{name}[{i}]", v, None, elem) for i, v in enumerate(value))
    if "int" in annotation and "float" not in annotation:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"{name}: expected an integer, got {value!r}")
        return value
    if "float" in annotation:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"{name}: expected a number, got {value!r}")
        if not math.isfinite(value):
            raise ConfigError(f"{name}: must be finite, got {value!r}")
        return float(value)
    if "str" in annotation:
        if not isinstance(value, str):
            raise ConfigError(f"{name}: expected a string, got {value!r}")
        return value
    return value


def _build_section(section: str, data: Mapping[str, Any]):
    cls = _SECTION_TYPES[section]
    known = {f.name: f for f in fields(cls)}
    kwargs = {}
    for key, value in data.items():
        if key not in known:
            raise ConfigError(f"unknown key {section}.{key}")
        f = known[key]
        kwargs[key] = _coerce(f"{section}.{key}", value, f.default, str(f.type))
    return cls(**kwargs)


def _require(cond: bool, message: str):
    if not cond:
        raise ConfigError(message)


def _validate(cfg: ExperimentConfig) -> None:
    _require(cfg.scenario in SCENARIOS, f"scenario must be one of {SCENARIOS}, got {cfg.scenario!r}")
    g = cfg.grid
    _require(g.n >= 8 and g.n & (g.n - 1) == 0, f"grid.n must be a power of two >= 8, got {g.n}")
    _require(g.length > 0, f"grid.length must be positive, got {g.length}")
    k = cfg.constants
    _require(k.hbar > 0, f"constants.hbar must be positive, got {k.hbar}")
    _require(k.c > 0, f"constants.c must be positive, got {k.c}")
    _require(k.mass > 0, f"constants.mass must be positive, got {k.mass}")
    i = cfg.initial
    _require(i.kind in INITIAL_KINDS, f"initial.kind must be one of {INITIAL_KINDS}, got {i.kind!r}")
    _require(i.width is None or i.width > 0, f"initial.width must be positive, got {i.width}")
    _require(i.bandwidth >= 1 and i.bandwidth < g.n // 2,
             f"initial.bandwidth must be in [1, grid.n/2), got {i.bandwidth}")
    _require(i.kind != "custom-file" or i.path is not None,
             "initial.path is required when initial.kind = 'custom-file'")
    t = cfg.time
    _require(t.dt > 0, f"time.dt must be positive, got {t.dt}")
    _require(t.steps >= 0, f"time.steps must be non-negative, got {t.steps}")
    _require(t.stride >= 1, f"time.stride must be >= 1, got {t.stride}")
    _require(t.steps % t.stride == 0,
             f"time.stride ({t.stride}) must divide time.steps ({t.steps})")
    for fmt in cfg.output.formats:
        _require(fmt in FORMATS, f"output.formats entries must be in {FORMATS}, got {fmt!r}")
    p = cfg.potential
    _require(p.kind in POTENTIAL_KINDS, f"potential.kind must be one of {POTENTIAL_KINDS}, got {p.kind!r}")
    _require(p.kind == "none" or cfg.scenario == "evolve-nonrel",
             "potential.kind must be 'none' outside the evolve-nonrel scenario")
    s = cfg.scan
    _require(len(s.c_values) >= 2, "scan.c_values needs at least two entries")
    _require(all(c > 0 for c in s.c_values), "scan.c_values must be positive")
    _require(s.t > 0, f"scan.t must be positive, got {s.t}")
    m = cfg.mechanics
    _require(m.model in MODEL_KINDS, f"mechanics.model must be one of {MODEL_KINDS}, got {m.model!r}")
    _require(m.dt > 0, f"mechanics.dt must be positive, got {m.dt}")
    _require(m.t1 > m.t0, "mechanics.t1 must exceed mechanics.t0")
    _require(m.model != "relativistic" or abs(m.v0) < k.c,
             f"mechanics.v0 must be below constants.c for the relativistic model, got {m.v0}")
    for gauge in m.gauges:
        _require(gauge in GAUGE_KINDS, f"mechanics.gauges entries must be in {GAUGE_KINDS}, got {gauge!r}")
    _require(cfg.scenario != "gauge-invariance" or len(m.gauges) == 2,
             "mechanics.gauges must name exactly two gauges for gauge-invariance")
    _require(cfg.scenario != "gauge-invariance" or "cubic" not in m.gauges or m.t0 > 0,
             "mechanics.t0 must be positive for the cubic gauge (dt/dtau vanishes at tau = 0)")
    _require(cfg.uncertainty.samples >= 0, "uncertainty.samples must be non-negative")


def config_from_dict(data: Mapping[str, Any]) -> ExperimentConfig:
    data = dict(data)
    _require("scenario" in data, "missing required key scenario")
    kwargs: dict = {}
    for key, value in data.items():
        if key == "scenario":
            kwargs[key] = _coerce("scenario", value, None, "str")
        elif key == "seed":
            kwargs[key] = _coerce("seed", value, 0, "int")
        elif key in _SECTION_TYPES:
            if not isinstance(value, Mapping):
                raise ConfigError(f"{key} must be a section, got {value!r}")
            kwargs[key] = _build_section(key, value)
        else:
            raise ConfigError(f"unknown key {key}")
    cfg = ExperimentConfig(**kwargs)
    _validate(cfg)
    return cfg


def _set_dotted(data: dict, dotted: str, value: Any) -> None:
    parts = dotted.split(".")
    node = data
    for part in parts[:-1]:
        node = node.setdefault(part, {})
        if not isinstance(node, dict):
            raise ConfigError(f"{dotted}: {part} is not a section")
    node[parts[-1]] = value


def parse_override(assignment: str) -> Tuple[str, Any]:
    """Parse ``key=value`` where ``value`` is a TOML literal (bare words become strings)."""
    if "=" not in assignment:
        raise ConfigError(f"override {assignment!r} is not of the form key=value")
    key, raw = (s.strip() for s in assignment.split("=", 1))
    try:
        value = tomllib.loads(f"v = {raw}")["v"]
    except tomllib.TOMLDecodeError:
        value = raw
    return key, value


def parse_config(source=None, overrides: Sequence[str] = ()) -> ExperimentConfig:
    """Load a config from a TOML path, TOML text or mapping, then apply ``key=value`` overrides."""
    if source is None:
        data: dict = {}
    elif isinstance(source, Mapping):
        data = _deep_copy(source)
    else:
        if isinstance(source, Path) or "=" not in str(source):
            path = Path(source)
            if not path.is_file():
                raise ConfigError(f"config file {str(path)!r} does not exist")
            text = path.read_text(encoding="utf-8")
        else:
            text = str(source)
        try:
            data = tomllib.loads(text)
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError(f"malformed config: {exc}") from exc
    for assignment in overrides:
        key, value = parse_override(assignment)
        _set_dotted(data, key, value)
    return config_from_dict(data)


def _deep_copy(data: Mapping) -> dict:
    return {k: _deep_copy(v) if isinstance(v, Mapping) else v for k, v in data.items()}


def config_to_dict(cfg: ExperimentConfig, drop_none: bool = True) -> dict:
    out: dict = {"scenario": cfg.scenario, "seed": cfg.seed}
    for name in _SECTION_TYPES:
        section = dataclasses.asdict(getattr(cfg, name))
        out[name] = {
            k: list(v) if isinstance(v, tuple) else v
            for k, v in section.items()
            if not (drop_none and v is None)
        }
    return out


def serialize_config(cfg: ExperimentConfig) -> str:
    return tomli_w.dumps(config_to_dict(cfg))

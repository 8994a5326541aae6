"""Run configuration: YAML schema, strict validation, canonical emission.

An empty file (or missing sections) yields the documented defaults: the
288-turn winding with the reference tap set, the synthetic parasitics, the
30 kHz / +-10 V trapezoid and the 1 kHz - 30 MHz log sweep.  Unknown keys
are rejected anywhere in the tree, and every defaulted value is echoed
back into reports for provenance.
"""
from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping

import yaml

from .cm import (
    CMPathModel,
    FrequencyGrid,
    ImpedanceModel,
    ParallelRC,
    SeriesRLC,
    TabulatedImpedance,
)
from .dm import DEFAULT_DB_FLOOR, DEFAULT_SOURCE_STRAY_C, TrapezoidExcitation
from .errors import ConfigError
from .motor import PHASES, AsymmetrySpec, SectionParams, WindingSpec


@dataclass(frozen=True)
class WindingConfig:
    turns_per_phase: int = 288
    taps: Mapping[str, tuple[int, ...]] = field(
        default_factory=lambda: {"A": (24, 27, 34, 120, 264), "B": (120,)}
    )
    sections_per_phase: int = 48

    def to_spec(self) -> WindingSpec:
        return WindingSpec(self.turns_per_phase, dict(self.taps),
                           self.sections_per_phase)


@dataclass(frozen=True)
class ParasiticsConfig:
    r_per_turn: float = 0.02
    l_per_turn: float = 3e-6
    c_turn_frame_per_turn: float = 1.5e-12
    c_turn_turn_per_turn: float = 20e-12
    coupling_k: float = 0.0
    frame_r: float = 0.05
    frame_l: float = 50e-9

    def to_params(self) -> SectionParams:
        return SectionParams(
            self.r_per_turn, self.l_per_turn, self.c_turn_frame_per_turn,
            self.c_turn_turn_per_turn, self.coupling_k, self.frame_r, self.frame_l,
        )


@dataclass(frozen=True)
class ImpedanceConfig:
    kind: str = "series_rlc"
    r: float = 0.0
    l: float = 0.0
    c: float | None = None
    path: str | None = None

    def to_model(self, base_dir: Path) -> ImpedanceModel:
        if self.kind == "series_rlc":
            return SeriesRLC(self.r, self.l, math.inf if self.c is None else self.c)
        if self.kind == "parallel_rc":
            if self.c is None:
                raise ConfigError("parallel_rc requires a capacitance 'c'")
            return ParallelRC(self.r, self.c)
        if self.kind == "csv":
            if not self.path:
                raise ConfigError("csv impedance requires 'path'")
            from .csvio import load_impedance_csv

            return TabulatedImpedance(load_impedance_csv(base_dir / self.path))
        raise ConfigError(f"unknown impedance kind {self.kind!r}")


@dataclass(frozen=True)
class CmPathConfig:
    v_source: float = 1.0
    z_vfd: ImpedanceConfig = field(
        default_factory=lambda: ImpedanceConfig("parallel_rc", r=50.0, c=2e-9)
    )
    z_cable: ImpedanceConfig = field(
        default_factory=lambda: ImpedanceConfig("series_rlc", r=0.5, l=1e-6)
    )

    def to_path_model(self, base_dir: Path) -> CMPathModel:
        return CMPathModel(
            v_source=complex(self.v_source),
            z_vfd=self.z_vfd.to_model(base_dir),
            z_cable=self.z_cable.to_model(base_dir),
        )


@dataclass(frozen=True)
class ExcitationConfig:
    amplitude: float = 10.0
    f0: float = 30e3
    rise_time: float = 100e-9
    fall_time: float = 100e-9
    duty: float = 0.5
    n_harmonics: int = 167

    def to_excitation(self) -> TrapezoidExcitation:
        return TrapezoidExcitation(self.amplitude, self.f0, self.rise_time,
                                   self.fall_time, self.duty, self.n_harmonics)


@dataclass(frozen=True)
class SweepConfig:
    f_start: float = 1e3
    f_stop: float = 30e6
    points: int = 301
    spacing: str = "log"

    def to_grid(self) -> FrequencyGrid:
        return FrequencyGrid(self.f_start, self.f_stop, self.points, self.spacing)


@dataclass(frozen=True)
class BenchConfig:
    source_stray_c: float = DEFAULT_SOURCE_STRAY_C
    db_floor: float = DEFAULT_DB_FLOOR


@dataclass(frozen=True)
class AsymmetryConfig:
    enabled: bool = False
    magnitude: float = 0.02
    mode: str = "phase_a"
    seed: int = 0

    def to_spec(self) -> AsymmetrySpec | None:
        if not self.enabled:
            return None
        return AsymmetrySpec(self.magnitude, self.mode, self.seed)


@dataclass(frozen=True)
class OutputConfig:
    directory: str = "out"
    plots: bool = True


@dataclass(frozen=True)
class RunConfig:
    winding: WindingConfig = field(default_factory=WindingConfig)
    parasitics: ParasiticsConfig = field(default_factory=ParasiticsConfig)
    cm_path: CmPathConfig = field(default_factory=CmPathConfig)
    excitation: ExcitationConfig = field(default_factory=ExcitationConfig)
    sweep: SweepConfig = field(default_factory=SweepConfig)
    bench: BenchConfig = field(default_factory=BenchConfig)
    baseline_asymmetry: AsymmetryConfig = field(default_factory=AsymmetryConfig)
    output: OutputConfig = field(default_factory=OutputConfig)
    base_dir: Path = field(default_factory=Path.cwd, compare=False)


_INT = (int,)
_NUM = (int, float)


def _expect(mapping: Any, where: str) -> dict:
    if mapping is None:
        return {}
    if not isinstance(mapping, dict):
        raise ConfigError(f"{where}: expected a mapping, got {type(mapping).__name__}")
    return mapping


def _take(raw: dict, where: str, key: str, types, default, *, required=False):
    if key not in raw:
        if required:
            raise ConfigError(f"{where}.{key}: required field missing")
        return default
    value = raw.pop(key)
    allowed = types if isinstance(types, tuple) else (types,)
    if isinstance(value, bool) and bool not in allowed:
        raise ConfigError(f"{where}.{key}: expected {types}, got a boolean")
    if not isinstance(value, types):
        raise ConfigError(
            f"{where}.{key}: expected {getattr(types, '__name__', types)}, "
            f"got {type(value).__name__} ({value!r})"
        )
    return value


def _no_leftovers(raw: dict, where: str):
    if raw:
        raise ConfigError(f"{where}: unknown key(s) {sorted(raw)} (strict mode)")


def _positive(value, where: str):
    if not value > 0:
        raise ConfigError(f"{where}: must be > 0, got {value}")
    return value


def _parse_winding(raw: dict) -> WindingConfig:
    where = "winding"
    d = WindingConfig()
    turns = _take(raw, where, "turns_per_phase", _INT, d.turns_per_phase)
    _positive(turns, f"{where}.turns_per_phase")
    sections = _take(raw, where, "sections_per_phase", _INT, d.sections_per_phase)
    _positive(sections, f"{where}.sections_per_phase")
    taps_raw = raw.pop("taps", None)
    if taps_raw is None:
        taps = d.taps
    else:
        taps_raw = _expect(taps_raw, f"{where}.taps")
        taps = {}
        for phase, values in taps_raw.items():
            if phase not in PHASES:
                raise ConfigError(f"{where}.taps: unknown phase {phase!r}")
            if not isinstance(values, list) or not all(isinstance(v, int) for v in values):
                raise ConfigError(f"{where}.taps.{phase}: expected a list of integers")
            taps[phase] = tuple(values)
    _no_leftovers(raw, where)
    return WindingConfig(turns, taps, sections)


def _parse_simple(raw: dict, where: str, defaults, float_fields, int_fields=(),
                  str_fields=(), bool_fields=()):
    kwargs = {}
    for name in float_fields:
        value = _take(raw, where, name, _NUM, getattr(defaults, name))
        kwargs[name] = float(value)
    for name in int_fields:
        kwargs[name] = _take(raw, where, name, _INT, getattr(defaults, name))
    for name in str_fields:
        kwargs[name] = _take(raw, where, name, (str,), getattr(defaults, name))
    for name in bool_fields:
        kwargs[name] = _take(raw, where, name, (bool,), getattr(defaults, name))
    _no_leftovers(raw, where)
    return kwargs


def _parse_impedance(raw: Any, where: str, default: ImpedanceConfig) -> ImpedanceConfig:
    if raw is None:
        return default
    raw = _expect(raw, where)
    kind = _take(raw, where, "kind", (str,), default.kind)
    r = float(_take(raw, where, "r", _NUM, 0.0))
    l = float(_take(raw, where, "l", _NUM, 0.0))
    c = _take(raw, where, "c", _NUM, None)
    path = _take(raw, where, "path", (str,), None)
    _no_leftovers(raw, where)
    if kind not in ("series_rlc", "parallel_rc", "csv"):
        raise ConfigError(f"{where}.kind: unknown impedance kind {kind!r}")
    return ImpedanceConfig(kind, r, l, None if c is None else float(c), path)


def parse_config(data: Any, base_dir: Path | None = None) -> RunConfig:
    """Validate a parsed YAML tree into a RunConfig (strict)."""
    root = _expect(data, "config")
    root = dict(root)

    winding = _parse_winding(_expect(root.pop("winding", None), "winding"))

    p = _parse_simple(
        _expect(root.pop("parasitics", None), "parasitics"), "parasitics",
        ParasiticsConfig(),
        ("r_per_turn", "l_per_turn", "c_turn_frame_per_turn",
         "c_turn_turn_per_turn", "coupling_k", "frame_r", "frame_l"),
    )
    for name, value in p.items():
        if name != "coupling_k":
            _positive(value, f"parasitics.{name}")
    if not 0 <= p["coupling_k"] < 1:
        raise ConfigError("parasitics.coupling_k: must lie in [0, 1)")
    parasitics = ParasiticsConfig(**p)

    cm_raw = _expect(root.pop("cm_path", None), "cm_path")
    d = CmPathConfig()
    v_source = float(_take(cm_raw, "cm_path", "v_source", _NUM, d.v_source))
    z_vfd = _parse_impedance(cm_raw.pop("z_vfd", None), "cm_path.z_vfd", d.z_vfd)
    z_cable = _parse_impedance(cm_raw.pop("z_cable", None), "cm_path.z_cable", d.z_cable)
    _no_leftovers(cm_raw, "cm_path")
    cm_path = CmPathConfig(v_source, z_vfd, z_cable)

    e = _parse_simple(
        _expect(root.pop("excitation", None), "excitation"), "excitation",
        ExcitationConfig(),
        ("amplitude", "f0", "rise_time", "fall_time", "duty"),
        int_fields=("n_harmonics",),
    )
    excitation = ExcitationConfig(**e)

    s = _parse_simple(
        _expect(root.pop("sweep", None), "sweep"), "sweep", SweepConfig(),
        ("f_start", "f_stop"), int_fields=("points",), str_fields=("spacing",),
    )
    sweep = SweepConfig(**s)

    b = _parse_simple(
        _expect(root.pop("bench", None), "bench"), "bench", BenchConfig(),
        ("source_stray_c", "db_floor"),
    )
    for name, value in b.items():
        _positive(value, f"bench.{name}")
    bench = BenchConfig(**b)

    a = _parse_simple(
        _expect(root.pop("baseline_asymmetry", None), "baseline_asymmetry"),
        "baseline_asymmetry", AsymmetryConfig(),
        ("magnitude",), int_fields=("seed",), str_fields=("mode",),
        bool_fields=("enabled",),
    )
    asymmetry = AsymmetryConfig(**a)

    o = _parse_simple(
        _expect(root.pop("output", None), "output"), "output", OutputConfig(),
        (), str_fields=("directory",), bool_fields=("plots",),
    )
    output = OutputConfig(**o)

    _no_leftovers(root, "config")

    cfg = RunConfig(winding, parasitics, cm_path, excitation, sweep, bench,
                    asymmetry, output, base_dir or Path.cwd())
    validate_config(cfg)
    return cfg


def validate_config(cfg: RunConfig):
    """Cross-field validation: fail fast, before any computation."""
    cfg.winding.to_spec()
    cfg.parasitics.to_params()
    cfg.excitation.to_excitation()
    cfg.sweep.to_grid()
    cfg.baseline_asymmetry.to_spec()


def load_config(path: str | Path) -> RunConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        line = f" at line {mark.line + 1}" if mark else ""
        raise ConfigError(f"config parse error{line}: {exc}") from exc
    return parse_config(data, base_dir=path.parent)


def default_config(base_dir: Path | None = None) -> RunConfig:
    return RunConfig(base_dir=base_dir or Path.cwd())


def config_to_dict(cfg: RunConfig) -> dict:
    """Canonical plain-data view: every value explicit, defaults included."""

    def impedance(z: ImpedanceConfig) -> dict:
        out = {"kind": z.kind, "r": z.r, "l": z.l}
        if z.c is not None:
            out["c"] = z.c
        if z.path is not None:
            out["path"] = z.path
        return out

    return {
        "winding": {
            "turns_per_phase": cfg.winding.turns_per_phase,
            "taps": {p: list(t) for p, t in sorted(cfg.winding.taps.items())},
            "sections_per_phase": cfg.winding.sections_per_phase,
        },
        "parasitics": {
            "r_per_turn": cfg.parasitics.r_per_turn,
            "l_per_turn": cfg.parasitics.l_per_turn,
            "c_turn_frame_per_turn": cfg.parasitics.c_turn_frame_per_turn,
            "c_turn_turn_per_turn": cfg.parasitics.c_turn_turn_per_turn,
            "coupling_k": cfg.parasitics.coupling_k,
            "frame_r": cfg.parasitics.frame_r,
            "frame_l": cfg.parasitics.frame_l,
        },
        "cm_path": {
            "v_source": cfg.cm_path.v_source,
            "z_vfd": impedance(cfg.cm_path.z_vfd),
            "z_cable": impedance(cfg.cm_path.z_cable),
        },
        "excitation": {
            "amplitude": cfg.excitation.amplitude,
            "f0": cfg.excitation.f0,
            "rise_time": cfg.excitation.rise_time,
            "fall_time": cfg.excitation.fall_time,
            "duty": cfg.excitation.duty,
            "n_harmonics": cfg.excitation.n_harmonics,
        },
        "sweep": {
            "f_start": cfg.sweep.f_start,
            "f_stop": cfg.sweep.f_stop,
            "points": cfg.sweep.points,
            "spacing": cfg.sweep.spacing,
        },
        "bench": {
            "source_stray_c": cfg.bench.source_stray_c,
            "db_floor": cfg.bench.db_floor,
        },
        "baseline_asymmetry": {
            "enabled": cfg.baseline_asymmetry.enabled,
            "magnitude": cfg.baseline_asymmetry.magnitude,
            "mode": cfg.baseline_asymmetry.mode,
            "seed": cfg.baseline_asymmetry.seed,
        },
        "output": {
            "directory": cfg.output.directory,
            "plots": cfg.output.plots,
        },
    }


def emit_config(cfg: RunConfig) -> str:
    """YAML text of the fully defaulted configuration; reloads identically."""
    return yaml.safe_dump(config_to_dict(cfg), sort_keys=True,
                          default_flow_style=False)


def config_hash(cfg: RunConfig) -> str:
    """Digest of the computation-relevant fields; where files land and
    whether figures render do not change what was computed."""
    tree = config_to_dict(cfg)
    tree.pop("output")
    canonical = json.dumps(tree, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode()).hexdigest()

"""Common-mode impedance measurement emulation and CM-current analysis.

The offline measurement ties the three phase terminals together and probes
the impedance from the tied node to the reference ground, which the
current reaches through the winding-to-frame capacitance and the frame
strap.  The CM current produced by a drive follows the series loop

    I_cm(f) = V_src(f) / (Z_src(f) + Z_cable(f) + Z_motor(f))

and the fault/healthy current ratio in dB depends only on the three
impedances, so it is independent of the source amplitude.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .circuit import Short, driving_point_impedance
from .errors import DivergentCurrentError, GridError, SingularSystemError
from .motor import MotorModel

MIN_LOOP_OHMS = 1e-12


@dataclass(frozen=True)
class FrequencyGrid:
    f_start: float
    f_stop: float
    points: int
    spacing: str = "log"

    def __post_init__(self):
        if not 0 < self.f_start < self.f_stop:
            raise GridError(
                f"need 0 < f_start < f_stop, got [{self.f_start}, {self.f_stop}]"
            )
        if self.points < 2:
            raise GridError("a sweep needs at least 2 points")
        if self.spacing not in ("log", "linear"):
            raise GridError(f"spacing must be 'log' or 'linear', not {self.spacing!r}")

    def frequencies(self) -> np.ndarray:
        if self.spacing == "log":
            return np.geomspace(self.f_start, self.f_stop, self.points)
        return np.linspace(self.f_start, self.f_stop, self.points)


DEFAULT_GRID = FrequencyGrid(1e3, 30e6, 301, "log")


def _as_frequency_vector(freqs) -> np.ndarray:
    f = np.asarray(freqs, dtype=float)
    if f.ndim != 1 or len(f) < 1:
        raise GridError("frequency vector must be one-dimensional and non-empty")
    if not np.all(np.isfinite(f)) or f[0] <= 0:
        raise GridError("frequencies must be finite and positive")
    if np.any(np.diff(f) <= 0):
        raise GridError("frequencies must be strictly increasing")
    return f


@dataclass(frozen=True)
class ImpedanceSweep:
    """Complex impedance over a strictly increasing frequency vector."""

    frequencies: np.ndarray
    z: np.ndarray

    def __post_init__(self):
        f = _as_frequency_vector(self.frequencies)
        z = np.asarray(self.z, dtype=np.complex128)
        object.__setattr__(self, "frequencies", f)
        object.__setattr__(self, "z", z)
        if z.shape != f.shape:
            raise GridError(
                f"impedance vector has {z.shape}, frequency vector {f.shape}"
            )
        if not np.all(np.isfinite(z)):
            raise GridError("impedance sweep contains non-finite values")

    @classmethod
    def from_grid(cls, grid: FrequencyGrid, z: np.ndarray) -> "ImpedanceSweep":
        return cls(grid.frequencies(), z)

    def magnitude_db(self) -> np.ndarray:
        return 20.0 * np.log10(np.abs(self.z))


@dataclass(frozen=True)
class RatioCurve:
    frequencies: np.ndarray
    r_db: np.ndarray

    def __post_init__(self):
        f = _as_frequency_vector(self.frequencies)
        r = np.asarray(self.r_db, dtype=float)
        object.__setattr__(self, "frequencies", f)
        object.__setattr__(self, "r_db", r)
        if r.shape != f.shape:
            raise GridError("ratio vector length does not match the frequencies")
        if not np.all(np.isfinite(r)):
            raise GridError("ratio curve contains non-finite values")

    def max_point(self) -> tuple[float, float]:
        """(max R in dB, frequency where it occurs)."""
        i = int(np.argmax(self.r_db))
        return float(self.r_db[i]), float(self.frequencies[i])


@dataclass(frozen=True)
class SeriesRLC:
    """r + jwL + 1/(jwC); omit l/c by leaving them at 0/inf."""

    r: float = 0.0
    l: float = 0.0
    c: float = math.inf

    def at(self, freqs: np.ndarray) -> np.ndarray:
        w = 2.0 * np.pi * np.asarray(freqs, dtype=float)
        z = np.full(w.shape, self.r, dtype=np.complex128)
        if self.l:
            z += 1j * w * self.l
        if math.isfinite(self.c):
            z += 1.0 / (1j * w * self.c)
        return z


@dataclass(frozen=True)
class ParallelRC:
    r: float
    c: float

    def at(self, freqs: np.ndarray) -> np.ndarray:
        w = 2.0 * np.pi * np.asarray(freqs, dtype=float)
        return self.r / (1.0 + 1j * w * self.c * self.r)


@dataclass(frozen=True)
class TabulatedImpedance:
    """Measured sweep, interpolated linearly in log-frequency.

    Real and imaginary parts interpolate independently; asking for a
    frequency outside the tabulated range is an error, never an
    extrapolation.
    """

    sweep: ImpedanceSweep

    def at(self, freqs: np.ndarray) -> np.ndarray:
        freqs = np.asarray(freqs, dtype=float)
        table_f = self.sweep.frequencies
        if freqs.min() < table_f[0] or freqs.max() > table_f[-1]:
            raise GridError(
                f"requested {freqs.min():g}..{freqs.max():g} Hz outside the "
                f"tabulated range {table_f[0]:g}..{table_f[-1]:g} Hz"
            )
        lf, ltf = np.log(freqs), np.log(table_f)
        re = np.interp(lf, ltf, self.sweep.z.real)
        im = np.interp(lf, ltf, self.sweep.z.imag)
        return re + 1j * im


ImpedanceModel = SeriesRLC | ParallelRC | TabulatedImpedance


@dataclass(frozen=True)
class CMPathModel:
    """CM noise source and the two series impedances ahead of the motor.

    The defaults are synthetic placeholders (the in-circuit extraction of
    the drive and cable impedances is out of scope here) and are labeled
    as such in reports.
    """

    v_source: complex | np.ndarray = 1.0 + 0j
    z_vfd: ImpedanceModel = field(default_factory=lambda: ParallelRC(50.0, 2e-9))
    z_cable: ImpedanceModel = field(default_factory=lambda: SeriesRLC(0.5, 1e-6))

    def source_at(self, freqs: np.ndarray) -> np.ndarray:
        """Flat amplitude broadcast, or a per-frequency vector as given."""
        shape = np.asarray(freqs).shape
        if isinstance(self.v_source, np.ndarray):
            v = np.asarray(self.v_source, dtype=np.complex128)
            if v.shape != shape:
                raise GridError("per-frequency source vector does not match the grid")
            return v
        return np.full(shape, self.v_source, dtype=np.complex128)

    def series_at(self, freqs: np.ndarray) -> np.ndarray:
        return self.z_vfd.at(freqs) + self.z_cable.at(freqs)


def tie_terminals(model: MotorModel):
    """Shorts realizing the measurement hookup (A-B, A-C)."""
    a, b, c = (model.terminal_nodes[p] for p in ("A", "B", "C"))
    return [Short((a, b), "tie:ab"), Short((a, c), "tie:ac")]


def cm_impedance_sweep(model: MotorModel, grid: FrequencyGrid = DEFAULT_GRID) -> ImpedanceSweep:
    """Emulated impedance-analyzer sweep of the motor's CM impedance."""
    tied = model.network.with_elements(tie_terminals(model))
    port = (model.terminal_nodes["A"], 0)
    z = np.empty(grid.points, dtype=np.complex128)
    for i, f in enumerate(grid.frequencies()):
        try:
            z[i] = driving_point_impedance(tied, port, f)
        except SingularSystemError as exc:
            raise SingularSystemError(
                f"CM impedance solve failed at {f:.6g} Hz: {exc.message}",
                nodes=exc.nodes, labels=exc.labels,
            ) from exc
    return ImpedanceSweep.from_grid(grid, z)


def _require_aligned(a: ImpedanceSweep, b: ImpedanceSweep):
    if not np.array_equal(a.frequencies, b.frequencies):
        raise GridError("sweeps are on different frequency grids")


def cm_current(path: CMPathModel, z_im: ImpedanceSweep) -> np.ndarray:
    """Per-frequency CM current phasor for the given motor impedance."""
    freqs = z_im.frequencies
    total = path.series_at(freqs) + z_im.z
    too_small = np.abs(total) < MIN_LOOP_OHMS
    if np.any(too_small):
        f_bad = float(freqs[int(np.argmax(too_small))])
        raise DivergentCurrentError(
            f"total CM loop impedance below {MIN_LOOP_OHMS:g} ohm at {f_bad:.6g} Hz",
            freq_hz=f_bad,
        )
    return path.source_at(freqs) / total


def ratio_r(path: CMPathModel, z_healthy: ImpedanceSweep, z_faulty: ImpedanceSweep) -> RatioCurve:
    """Fault/healthy CM-current ratio in dB, from the path impedances."""
    _require_aligned(z_healthy, z_faulty)
    freqs = z_healthy.frequencies
    series = path.series_at(freqs)
    healthy_total = series + z_healthy.z
    faulty_total = series + z_faulty.z
    for total in (healthy_total, faulty_total):
        too_small = np.abs(total) < MIN_LOOP_OHMS
        if np.any(too_small):
            f_bad = float(freqs[int(np.argmax(too_small))])
            raise DivergentCurrentError(
                f"total CM loop impedance below {MIN_LOOP_OHMS:g} ohm at {f_bad:.6g} Hz",
                freq_hz=f_bad,
            )
    r_db = 20.0 * np.log10(np.abs(healthy_total) / np.abs(faulty_total))
    return RatioCurve(z_healthy.frequencies, r_db)


@dataclass(frozen=True)
class DeviationSummary:
    max_abs_db: float
    freq_hz: float


def deviation_db(a: ImpedanceSweep, b: ImpedanceSweep) -> tuple[np.ndarray, DeviationSummary]:
    """Pointwise 20*log10(|b|/|a|) plus the worst absolute point."""
    _require_aligned(a, b)
    curve = 20.0 * np.log10(np.abs(b.z) / np.abs(a.z))
    i = int(np.argmax(np.abs(curve)))
    return curve, DeviationSummary(
        float(abs(curve[i])), float(a.frequencies[i])
    )


def first_impedance_minimum(sweep: ImpedanceSweep) -> tuple[float, float]:
    """Frequency and magnitude of the first series resonance (|Z| local min)."""
    mag = np.abs(sweep.z)
    freqs = sweep.frequencies
    for i in range(1, len(mag) - 1):
        if mag[i] <= mag[i - 1] and mag[i] < mag[i + 1]:
            return float(freqs[i]), float(mag[i])
    i = int(np.argmin(mag))
    return float(freqs[i]), float(mag[i])

"""DM excitation bench and DM-to-CM mode conversion spectra.

The bench ties terminals A and B and drives them against terminal C with a
trapezoidal wave, emulating the two-level PWM line-to-line voltage.  The
drive is applied as a split pair of ideal sources around an explicit
reference node so that the excitation carries no common-mode component
with respect to the two rails: the tied A+B rail presents twice the
winding-to-frame capacitance of the C rail, so the zero-CM reference sits
at the 1:2 point (V_AB - V_ref = V/3, V_ref - V_C = 2V/3).  The reference
couples to the ground plane through the source's stray capacitance, and
the ground-return current - the CM current - is read off an ideal probe
short between that capacitance and the plane.

With this drive a strictly phase-symmetric motor converts nothing: the
solution obeys V_C(x) = -2 V_AB(L - x) along the windings and the
winding-to-frame displacement currents cancel exactly, at every frequency.
Any fault or constructional asymmetry breaks the cancellation and shows up
as a finite CM spectrum.

Spectra are computed in the harmonic domain: the network is linear, so
each harmonic of the excitation maps through the per-frequency transfer
function independently.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .circuit import Capacitor, Network, Short, VoltageSource, solve_ac
from .errors import NetworkError, SingularSystemError
from .motor import MotorModel

DEFAULT_SOURCE_STRAY_C = 100e-12
DEFAULT_DB_FLOOR = 1e-15
PROBE_LABEL = "bench:probe"


@dataclass(frozen=True)
class TrapezoidExcitation:
    """Periodic trapezoid swinging +-amplitude, 50%-duty by default.

    Edges are centered on the 50% crossings: the pulse width measured at
    half level equals duty/f0 regardless of the edge times.
    """

    amplitude: float = 10.0
    f0: float = 30e3
    rise_time: float = 100e-9
    fall_time: float = 100e-9
    duty: float = 0.5
    n_harmonics: int = 167

    def __post_init__(self):
        if not self.amplitude > 0:
            raise NetworkError("excitation amplitude must be > 0")
        if not self.f0 > 0:
            raise NetworkError("fundamental frequency must be > 0")
        if self.n_harmonics < 1:
            raise NetworkError("need at least one harmonic")
        if not 0 < self.duty < 1:
            raise NetworkError("duty must lie in (0, 1)")
        if self.rise_time < 0 or self.fall_time < 0:
            raise NetworkError("edge times cannot be negative")
        period = 1.0 / self.f0
        if not self.rise_time + self.fall_time < period:
            raise NetworkError("rise + fall time must be shorter than the period")
        half_edges = (self.rise_time + self.fall_time) / 2.0
        if self.duty * period < half_edges or (1.0 - self.duty) * period < half_edges:
            raise NetworkError("plateaus vanish: edges too slow for this duty cycle")

    def period(self) -> float:
        return 1.0 / self.f0

    def segments(self) -> list[tuple[float, float, float, float]]:
        """(t1, t2, value_at_t1, value_at_t2) linear pieces over one period."""
        a, t = self.amplitude, self.period()
        tr, tf, d = self.rise_time, self.fall_time, self.duty
        pieces = [
            (-tr / 2.0, tr / 2.0, -a, a),
            (tr / 2.0, d * t - tf / 2.0, a, a),
            (d * t - tf / 2.0, d * t + tf / 2.0, a, -a),
            (d * t + tf / 2.0, t - tr / 2.0, -a, -a),
        ]
        return [(t1, t2, v1, v2) for (t1, t2, v1, v2) in pieces if t2 > t1]

    def sample(self, times: np.ndarray) -> np.ndarray:
        """Waveform values at arbitrary times (for validation/plots)."""
        t = np.mod(np.asarray(times, dtype=float) + self.rise_time / 2.0,
                   self.period()) - self.rise_time / 2.0
        out = np.empty_like(t)
        for t1, t2, v1, v2 in self.segments():
            mask = (t >= t1) & (t < t2)
            if t2 > t1:
                out[mask] = v1 + (v2 - v1) * (t[mask] - t1) / (t2 - t1)
        return out


@dataclass(frozen=True)
class HarmonicSpectrum:
    """Complex peak amplitudes for harmonics n = 1..len(coefficients)."""

    f0: float
    coefficients: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coefficients, dtype=np.complex128)
        object.__setattr__(self, "coefficients", c)
        if not np.all(np.isfinite(c)):
            raise NetworkError("spectrum contains non-finite coefficients")

    def __len__(self) -> int:
        return len(self.coefficients)

    def harmonic(self, n: int) -> complex:
        return complex(self.coefficients[n - 1])

    def frequencies(self) -> np.ndarray:
        return self.f0 * np.arange(1, len(self.coefficients) + 1)

    def magnitude(self) -> np.ndarray:
        return np.abs(self.coefficients)


def trapezoid_harmonics(exc: TrapezoidExcitation) -> HarmonicSpectrum:
    """Exact Fourier series of the trapezoid (peak phasor convention).

    Each linear piece integrates in closed form, so the result is exact up
    to roundoff for any edge times, including the square-wave limit.
    """
    t_period = exc.period()
    n = np.arange(1, exc.n_harmonics + 1)
    s = -2j * np.pi * n / t_period  # exponent factor in e^{s t}
    total = np.zeros(exc.n_harmonics, dtype=np.complex128)
    for t1, t2, v1, v2 in exc.segments():
        beta = (v2 - v1) / (t2 - t1)
        alpha = v1 - beta * t1
        e2, e1 = np.exp(s * t2), np.exp(s * t1)
        total += ((alpha + beta * t2) * e2 - (alpha + beta * t1) * e1) / s
        total -= beta * (e2 - e1) / (s * s)
    return HarmonicSpectrum(exc.f0, 2.0 * total / t_period)


@dataclass(frozen=True)
class DmBench:
    """Motor plus the DM drive fixture, ready for per-frequency solves."""

    motor: MotorModel
    source_stray_c: float
    probe: str
    network: Network
    reference_node: int
    probe_junction: int


def build_dm_bench(
    motor: MotorModel, source_stray_c: float = DEFAULT_SOURCE_STRAY_C
) -> DmBench:
    """Tie A+B, insert the split DM source against C, close the CM loop."""
    if not source_stray_c > 0:
        raise NetworkError("source stray capacitance must be > 0")
    node_count = motor.network.node_count
    s_ref = node_count
    junction = node_count + 1
    term = motor.terminal_nodes
    v_hi = 1.0 / 3.0
    elements = [
        Short((term["A"], term["B"]), "bench:tie_ab"),
        VoltageSource((term["A"], s_ref), v_hi, "bench:src_hi"),
        VoltageSource((s_ref, term["C"]), 2.0 * v_hi, "bench:src_lo"),
        Capacitor((s_ref, junction), source_stray_c, "bench:stray_c"),
        Short((junction, 0), PROBE_LABEL),
    ]
    network = Network(node_count + 2, motor.network.elements + tuple(elements))
    return DmBench(motor, source_stray_c, PROBE_LABEL, network, s_ref, junction)


def dm_to_cm_transfer(bench: DmBench, freq: float) -> complex:
    """Probe current per volt of DM drive at one frequency."""
    try:
        solution = solve_ac(bench.network, freq)
    except SingularSystemError as exc:
        raise SingularSystemError(
            f"DM bench solve failed at {freq:.6g} Hz: {exc.message}",
            nodes=exc.nodes, labels=exc.labels,
        ) from exc
    return solution.source_current(bench.probe)


def cm_spectrum(bench: DmBench, exc: TrapezoidExcitation) -> HarmonicSpectrum:
    """CM current harmonics: excitation spectrum times per-harmonic transfer."""
    excitation = trapezoid_harmonics(exc)
    out = np.empty(exc.n_harmonics, dtype=np.complex128)
    for i in range(exc.n_harmonics):
        f = (i + 1) * exc.f0
        try:
            out[i] = excitation.coefficients[i] * dm_to_cm_transfer(bench, f)
        except SingularSystemError as exc_err:
            raise SingularSystemError(
                f"harmonic {i + 1} ({f:.6g} Hz): {exc_err.message}",
                nodes=exc_err.nodes, labels=exc_err.labels,
            ) from exc_err
    return HarmonicSpectrum(exc.f0, out)


@dataclass(frozen=True)
class IncrementSummary:
    max_db: float
    harmonic: int


def increment_db(
    reference: HarmonicSpectrum,
    faulted: HarmonicSpectrum,
    floor: float = DEFAULT_DB_FLOOR,
) -> tuple[np.ndarray, IncrementSummary]:
    """Per-harmonic dB increase of the faulted spectrum over the reference."""
    if reference.f0 != faulted.f0 or len(reference) != len(faulted):
        raise NetworkError("spectra have mismatched fundamental or harmonic count")
    if not floor > 0:
        raise NetworkError("dB floor must be > 0")
    ref = np.maximum(reference.magnitude(), floor)
    flt = np.maximum(faulted.magnitude(), floor)
    curve = 20.0 * np.log10(flt / ref)
    i = int(np.argmax(curve))
    return curve, IncrementSummary(float(curve[i]), i + 1)


def is_balanced(spectrum: HarmonicSpectrum, floor: float = DEFAULT_DB_FLOOR) -> bool:
    """True when every harmonic sits at or below the numerical floor."""
    return bool(np.all(spectrum.magnitude() <= floor))

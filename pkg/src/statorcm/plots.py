"""Figure rendering for the report path.

Every CSV the CLI writes gets a PNG sibling so a run is reviewable without
further tooling.  The Agg backend keeps output byte-stable and headless.
"""
from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .cm import ImpedanceSweep, RatioCurve
from .dm import HarmonicSpectrum

RC = {
    "figure.figsize": (7.0, 4.2),
    "figure.dpi": 110,
    "savefig.dpi": 150,
    "axes.grid": True,
    "grid.alpha": 0.35,
    "font.size": 9,
    "lines.linewidth": 1.2,
}


def _save(fig, path: str | Path) -> Path:
    path = Path(path)
    fig.savefig(path, bbox_inches="tight")
    plt.close(fig)
    return path


def plot_impedance_sweeps(path: str | Path, sweeps: dict[str, ImpedanceSweep],
                          title: str) -> Path:
    """Magnitude/phase overlay of one or more sweeps."""
    with plt.rc_context(RC):
        fig, (ax_mag, ax_ph) = plt.subplots(
            2, 1, sharex=True, figsize=(7.0, 5.6),
            gridspec_kw={"height_ratios": (3, 2)},
        )
        for name, sweep in sweeps.items():
            ax_mag.loglog(sweep.frequencies, np.abs(sweep.z), label=name)
            ax_ph.semilogx(sweep.frequencies, np.degrees(np.angle(sweep.z)),
                           label=name)
        ax_mag.set_ylabel("|Z| (ohm)")
        ax_mag.set_title(title)
        ax_mag.legend(loc="best", fontsize=8)
        ax_ph.set_ylabel("phase (deg)")
        ax_ph.set_xlabel("frequency (Hz)")
        ax_ph.set_yticks([-90, -45, 0, 45, 90])
        return _save(fig, path)


def plot_deviation(path: str | Path, frequencies: np.ndarray, curve: np.ndarray,
                   title: str) -> Path:
    with plt.rc_context(RC):
        fig, ax = plt.subplots()
        ax.semilogx(frequencies, curve, color="tab:red")
        ax.set_xlabel("frequency (Hz)")
        ax.set_ylabel("deviation (dB)")
        ax.set_title(title)
        return _save(fig, path)


def plot_ratio(path: str | Path, curve: RatioCurve, title: str) -> Path:
    with plt.rc_context(RC):
        fig, ax = plt.subplots()
        ax.semilogx(curve.frequencies, curve.r_db, color="tab:blue")
        ax.axhline(0.0, color="k", lw=0.8)
        ax.set_xlabel("frequency (Hz)")
        ax.set_ylabel("CM current ratio R (dB)")
        ax.set_title(title)
        return _save(fig, path)


def plot_spectra(path: str | Path, spectra: dict[str, HarmonicSpectrum],
                 title: str, unit: str = "A", floor: float = 1e-15) -> Path:
    """Harmonic magnitudes in dB relative to 1 uA (or 1 uV)."""
    with plt.rc_context(RC):
        fig, ax = plt.subplots()
        for name, spectrum in spectra.items():
            n = np.arange(1, len(spectrum) + 1)
            mag = np.maximum(spectrum.magnitude(), floor)
            ax.plot(n, 20.0 * np.log10(mag / 1e-6), marker=".", ms=3,
                    lw=0.8, label=name)
        ax.set_xlabel("harmonic number")
        ax.set_ylabel(f"|I| (dBu{unit})" if unit == "A" else f"|V| (dBu{unit})")
        ax.set_title(title)
        ax.legend(loc="best", fontsize=8)
        return _save(fig, path)


def plot_increment(path: str | Path, f0: float, curve: np.ndarray,
                   title: str) -> Path:
    with plt.rc_context(RC):
        fig, ax = plt.subplots()
        n = np.arange(1, len(curve) + 1)
        ax.bar(n, curve, width=0.8, color="tab:orange")
        ax.axhline(0.0, color="k", lw=0.8)
        ax.set_xlabel("harmonic number")
        ax.set_ylabel("increment (dB)")
        ax.set_title(title)
        return _save(fig, path)

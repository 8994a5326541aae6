"""Delimited data formats: the canonical, diff-stable CSV emitters/loaders.

All numbers are written as lowercase scientific notation with 12
significant digits and a period decimal separator, so identical runs
produce byte-identical files.
"""
from __future__ import annotations

import math
from pathlib import Path

import numpy as np

from .cm import ImpedanceSweep, RatioCurve
from .dm import HarmonicSpectrum
from .errors import CsvFormatError

IMPEDANCE_HEADER = "freq_hz,re_ohm,im_ohm"
RATIO_HEADER = "freq_hz,r_db"
SPECTRUM_HEADER = "harmonic_n,freq_hz,re_a,im_a,mag_dbua"
EXCITATION_HEADER = "harmonic_n,freq_hz,re_v,im_v,mag_dbuv"
INCREMENT_HEADER = "harmonic_n,freq_hz,increment_db"


def fmt(x: float) -> str:
    """12 significant digits, lowercase scientific."""
    return f"{x:.11e}"


def write_impedance_csv(path: str | Path, sweep: ImpedanceSweep) -> None:
    lines = [IMPEDANCE_HEADER]
    for f, z in zip(sweep.frequencies, sweep.z):
        lines.append(f"{fmt(f)},{fmt(z.real)},{fmt(z.imag)}")
    Path(path).write_text("\n".join(lines) + "\n")


def load_impedance_csv(path: str | Path) -> ImpedanceSweep:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise CsvFormatError(f"cannot read {path}: {exc}") from exc
    lines = text.splitlines()
    if not lines or lines[0].strip() != IMPEDANCE_HEADER:
        raise CsvFormatError(
            f"{path}: expected header {IMPEDANCE_HEADER!r}", line=1
        )
    freqs: list[float] = []
    zs: list[complex] = []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        parts = line.split(",")
        if len(parts) != 3:
            raise CsvFormatError(
                f"{path}: expected 3 comma-separated fields, got {len(parts)}",
                line=lineno,
            )
        try:
            f, re_z, im_z = (float(p) for p in parts)
        except ValueError:
            raise CsvFormatError(
                f"{path}: non-numeric field in {line!r}", line=lineno
            ) from None
        if not (math.isfinite(f) and math.isfinite(re_z) and math.isfinite(im_z)):
            raise CsvFormatError(f"{path}: non-finite value", line=lineno)
        if freqs and f <= freqs[-1]:
            raise CsvFormatError(
                f"{path}: frequencies must be strictly increasing "
                f"({f:g} after {freqs[-1]:g})",
                line=lineno,
            )
        freqs.append(f)
        zs.append(complex(re_z, im_z))
    if len(freqs) < 1:
        raise CsvFormatError(f"{path}: no data rows")
    return ImpedanceSweep(np.array(freqs), np.array(zs))


def write_ratio_csv(path: str | Path, curve: RatioCurve) -> None:
    lines = [RATIO_HEADER]
    for f, r in zip(curve.frequencies, curve.r_db):
        lines.append(f"{fmt(f)},{fmt(r)}")
    Path(path).write_text("\n".join(lines) + "\n")


def write_deviation_csv(path: str | Path, frequencies: np.ndarray,
                        curve: np.ndarray) -> None:
    lines = ["freq_hz,deviation_db"]
    for f, d in zip(frequencies, curve):
        lines.append(f"{fmt(f)},{fmt(d)}")
    Path(path).write_text("\n".join(lines) + "\n")


def _db_re(value: float, unit: float) -> float:
    if value == 0.0:
        return -math.inf
    return 20.0 * math.log10(value / unit)


def write_spectrum_csv(path: str | Path, spectrum: HarmonicSpectrum,
                       unit: str = "a") -> None:
    """Current spectra in dBuA; excitation spectra (unit='v') in dBuV."""
    header = SPECTRUM_HEADER if unit == "a" else EXCITATION_HEADER
    lines = [header]
    for i, c in enumerate(spectrum.coefficients):
        n = i + 1
        mag_db = _db_re(abs(c), 1e-6)
        lines.append(
            f"{n},{fmt(n * spectrum.f0)},{fmt(c.real)},{fmt(c.imag)},{fmt(mag_db)}"
        )
    Path(path).write_text("\n".join(lines) + "\n")


def write_increment_csv(path: str | Path, f0: float, curve: np.ndarray) -> None:
    lines = [INCREMENT_HEADER]
    for i, db in enumerate(curve):
        n = i + 1
        lines.append(f"{n},{fmt(n * f0)},{fmt(db)}")
    Path(path).write_text("\n".join(lines) + "\n")

"""Figure rendering: files exist, are valid PNGs, and are byte-stable."""
from __future__ import annotations

import numpy as np

from statorcm import FrequencyGrid, ImpedanceSweep, RatioCurve
from statorcm.dm import HarmonicSpectrum
from statorcm import plots


def _sweep(points=21):
    grid = FrequencyGrid(1e3, 30e6, points, "log")
    f = grid.frequencies()
    z = 1.0 / (2j * np.pi * f * 1.3e-9) + 1.0
    return ImpedanceSweep(f, z)


def test_impedance_figure(tmp_path):
    path = plots.plot_impedance_sweeps(
        tmp_path / "z.png", {"healthy": _sweep(), "faulted": _sweep()}, "test")
    data = path.read_bytes()
    assert data[:8] == b"\x89PNG\r\n\x1a\n"


def test_deviation_and_ratio_figures(tmp_path):
    s = _sweep()
    curve = np.linspace(-3, 3, len(s.frequencies))
    p1 = plots.plot_deviation(tmp_path / "d.png", s.frequencies, curve, "dev")
    p2 = plots.plot_ratio(tmp_path / "r.png",
                          RatioCurve(s.frequencies, curve), "ratio")
    assert p1.stat().st_size > 0 and p2.stat().st_size > 0


def test_spectrum_and_increment_figures(tmp_path):
    spectrum = HarmonicSpectrum(30e3, (1e-6 + 0j) / np.arange(1, 22))
    p1 = plots.plot_spectra(tmp_path / "s.png", {"ref": spectrum}, "spec")
    p2 = plots.plot_increment(tmp_path / "i.png", 30e3, np.linspace(0, 10, 21),
                              "inc")
    assert p1.stat().st_size > 0 and p2.stat().st_size > 0


def test_figures_byte_stable(tmp_path):
    s = _sweep()
    a = plots.plot_impedance_sweeps(tmp_path / "a.png", {"h": s}, "t")
    b = plots.plot_impedance_sweeps(tmp_path / "b.png", {"h": s}, "t")
    assert a.read_bytes() == b.read_bytes()

"""Command-line surface: sweep | ratio | dmconv | goldens.

Exit codes: 0 success, 2 configuration/usage error, 3 numerical/solver
error.  Outputs are deterministic: identical configs and fault strings
produce byte-identical CSVs (and figures) across runs.
"""
from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import __version__
from .cm import cm_impedance_sweep, deviation_db, first_impedance_minimum, ratio_r
from .config import RunConfig, config_hash, default_config, load_config
from .csvio import (
    fmt,
    write_deviation_csv,
    write_impedance_csv,
    write_increment_csv,
    write_ratio_csv,
    write_spectrum_csv,
)
from .dm import build_dm_bench, cm_spectrum, increment_db, is_balanced, trapezoid_harmonics
from .errors import (
    ConfigError,
    CsvFormatError,
    DivergentCurrentError,
    FaultSyntaxError,
    GridError,
    NetworkError,
    SingularSystemError,
    StatorCmError,
    UnknownLabelError,
    UnmappedTapError,
)
from .faults import apply_fault, parse_fault
from .motor import build_motor
from .report import Report

USAGE_ERRORS = (ConfigError, FaultSyntaxError, UnmappedTapError, CsvFormatError,
                NetworkError, GridError, UnknownLabelError)
SOLVER_ERRORS = (SingularSystemError, DivergentCurrentError)


def _fault_slug(text: str) -> str:
    return text.replace(":", "_").replace("@", "_r")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="statorcm",
        description="Stator-winding-fault signatures on common-mode current",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser, fault_required=False, fault=True):
        p.add_argument("--config", type=Path, default=None,
                       help="YAML config file (defaults apply when omitted)")
        p.add_argument("--out", type=Path, default=None,
                       help="output directory (default: from config)")
        if fault:
            p.add_argument("--fault", required=fault_required, default=None,
                           help="fault spec, e.g. tt:A:24-34 or pg:A:24@0.5")
        p.add_argument("--freq-start", type=float, default=None)
        p.add_argument("--freq-stop", type=float, default=None)
        p.add_argument("--points", type=int, default=None)
        p.add_argument("--seed", type=int, default=None,
                       help="baseline asymmetry seed override")
        p.add_argument("--no-plots", action="store_true",
                       help="skip figure rendering")

    common(sub.add_parser("sweep", help="CM impedance sweep (optionally faulted)"))
    common(sub.add_parser("ratio", help="fault/healthy CM current ratio"),
           fault_required=True)
    common(sub.add_parser("dmconv", help="DM-to-CM conversion spectra"))
    p_gold = sub.add_parser("goldens",
                            help="regenerate derived golden values")
    common(p_gold, fault=False)
    return parser


def _load(args) -> RunConfig:
    cfg = load_config(args.config) if args.config else default_config()
    sweep = cfg.sweep
    if args.freq_start is not None:
        sweep = replace(sweep, f_start=args.freq_start)
    if args.freq_stop is not None:
        sweep = replace(sweep, f_stop=args.freq_stop)
    if args.points is not None:
        sweep = replace(sweep, points=args.points)
    cfg = replace(cfg, sweep=sweep)
    if args.seed is not None:
        cfg = replace(cfg, baseline_asymmetry=replace(cfg.baseline_asymmetry,
                                                      seed=args.seed))
    if args.out is not None:
        cfg = replace(cfg, output=replace(cfg.output, directory=str(args.out)))
    if args.no_plots:
        cfg = replace(cfg, output=replace(cfg.output, plots=False))
    cfg.winding.to_spec()  # revalidate after overrides
    cfg.sweep.to_grid()
    return cfg


def _out_dir(cfg: RunConfig) -> Path:
    out = Path(cfg.output.directory)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _healthy_and_faulted(cfg: RunConfig, fault_text: str | None, *,
                         asymmetry=False):
    spec = cfg.winding.to_spec()
    params = cfg.parasitics.to_params()
    asym = cfg.baseline_asymmetry.to_spec() if asymmetry else None
    model = build_motor(spec, params, asymmetry=asym)
    faulted = apply_fault(model, parse_fault(fault_text)) if fault_text else None
    return model, faulted


def cmd_sweep(cfg: RunConfig, fault_text: str | None) -> int:
    out = _out_dir(cfg)
    report = Report(cfg)
    grid = cfg.sweep.to_grid()
    model, faulted = _healthy_and_faulted(cfg, fault_text)

    healthy = cm_impedance_sweep(model, grid)
    write_impedance_csv(report.add_file(out / "cm_impedance_healthy.csv", out), healthy)
    f_res, z_min = first_impedance_minimum(healthy)
    summary = {
        "analysis": "cm_impedance_sweep",
        "fault": fault_text,
        "first_series_resonance_hz": f_res,
        "min_impedance_ohm": z_min,
    }

    sweeps = {"healthy": healthy}
    if faulted is not None:
        slug = _fault_slug(fault_text)
        fsweep = cm_impedance_sweep(faulted, grid)
        write_impedance_csv(
            report.add_file(out / f"cm_impedance_{slug}.csv", out), fsweep)
        curve, dev = deviation_db(healthy, fsweep)
        write_deviation_csv(
            report.add_file(out / f"deviation_{slug}.csv", out),
            healthy.frequencies, curve)
        summary["max_deviation_db"] = dev.max_abs_db
        summary["max_deviation_freq_hz"] = dev.freq_hz
        sweeps[fault_text] = fsweep
        if cfg.output.plots:
            from . import plots

            report.add_file(plots.plot_impedance_sweeps(
                out / f"cm_impedance_{slug}.png", sweeps,
                "CM impedance: healthy vs " + fault_text), out)
            report.add_file(plots.plot_deviation(
                out / f"deviation_{slug}.png", healthy.frequencies, curve,
                f"CM impedance deviation, {fault_text}"), out)
        print(f"max deviation {dev.max_abs_db:.3f} dB at {dev.freq_hz:.6g} Hz")
    elif cfg.output.plots:
        from . import plots

        report.add_file(plots.plot_impedance_sweeps(
            out / "cm_impedance_healthy.png", sweeps, "CM impedance (healthy)"), out)

    report.add_summary(**summary)
    report.write(out)
    print(f"first series resonance {f_res:.6g} Hz (|Z| = {z_min:.6g} ohm)")
    print(f"wrote {len(report.manifest)} files to {out}")
    return 0


def cmd_ratio(cfg: RunConfig, fault_text: str) -> int:
    out = _out_dir(cfg)
    report = Report(cfg)
    grid = cfg.sweep.to_grid()
    model, faulted = _healthy_and_faulted(cfg, fault_text)
    path_model = cfg.cm_path.to_path_model(cfg.base_dir)

    healthy = cm_impedance_sweep(model, grid)
    fsweep = cm_impedance_sweep(faulted, grid)
    curve = ratio_r(path_model, healthy, fsweep)
    r_max, f_max = curve.max_point()

    slug = _fault_slug(fault_text)
    write_ratio_csv(report.add_file(out / f"ratio_{slug}.csv", out), curve)
    if cfg.output.plots:
        from . import plots

        report.add_file(plots.plot_ratio(
            out / f"ratio_{slug}.png", curve,
            f"CM current ratio, {fault_text}"), out)
    f_res, _ = first_impedance_minimum(healthy)
    report.add_summary(
        analysis="cm_current_ratio",
        fault=fault_text,
        max_r_db=r_max,
        max_r_freq_hz=f_max,
        first_series_resonance_hz=f_res,
    )
    report.write(out)
    print(f"max R {r_max:.3f} dB at {f_max:.6g} Hz")
    print(f"wrote {len(report.manifest)} files to {out}")
    return 0


def cmd_dmconv(cfg: RunConfig, fault_text: str | None) -> int:
    out = _out_dir(cfg)
    report = Report(cfg)
    exc = cfg.excitation.to_excitation()
    floor = cfg.bench.db_floor
    model, faulted = _healthy_and_faulted(cfg, fault_text, asymmetry=True)

    excitation = trapezoid_harmonics(exc)
    write_spectrum_csv(
        report.add_file(out / "excitation_spectrum.csv", out), excitation, unit="v")

    reference = cm_spectrum(build_dm_bench(model, cfg.bench.source_stray_c), exc)
    write_spectrum_csv(
        report.add_file(out / "cm_spectrum_reference.csv", out), reference)

    summary = {
        "analysis": "dm_to_cm_conversion",
        "fault": fault_text,
        "asymmetry_enabled": cfg.baseline_asymmetry.enabled,
        "balanced": is_balanced(reference, floor),
    }
    spectra = {"no fault": reference}
    if faulted is not None:
        slug = _fault_slug(fault_text)
        spectrum = cm_spectrum(build_dm_bench(faulted, cfg.bench.source_stray_c), exc)
        write_spectrum_csv(
            report.add_file(out / f"cm_spectrum_{slug}.csv", out), spectrum)
        curve, inc = increment_db(reference, spectrum, floor)
        write_increment_csv(
            report.add_file(out / f"increment_{slug}.csv", out), exc.f0, curve)
        summary["max_increment_db"] = inc.max_db
        summary["max_increment_harmonic"] = inc.harmonic
        spectra[fault_text] = spectrum
        if cfg.output.plots:
            from . import plots

            report.add_file(plots.plot_increment(
                out / f"increment_{slug}.png", exc.f0, curve,
                f"CM current increment, {fault_text}"), out)
        print(f"max increment {inc.max_db:.3f} dB at harmonic {inc.harmonic}")
    else:
        print("balanced" if summary["balanced"] else "unbalanced (asymmetry)")

    if cfg.output.plots:
        from . import plots

        report.add_file(plots.plot_spectra(
            out / "cm_spectrum.png", spectra,
            "CM current spectrum under DM excitation", floor=floor), out)
        report.add_file(plots.plot_spectra(
            out / "excitation_spectrum.png", {"excitation": excitation},
            "DM excitation spectrum", unit="V", floor=1e-12), out)

    report.add_summary(**summary)
    report.write(out)
    print(f"wrote {len(report.manifest)} files to {out}")
    return 0


GOLDEN_SWEEP_FAULTS = ("tt:A:24-27", "tt:A:24-34", "pp:A:120-B:120",
                       "pp:A:264-B:120", "pg:A:24")
GOLDEN_DM_FAULTS = ("tt:A:24-27", "pp:A:264-B:120", "pg:A:24")


def cmd_goldens(cfg: RunConfig) -> int:
    """Regenerate the derived golden values for the current config."""
    out = _out_dir(cfg)
    report = Report(cfg)
    grid = cfg.sweep.to_grid()
    spec = cfg.winding.to_spec()
    params = cfg.parasitics.to_params()
    path_model = cfg.cm_path.to_path_model(cfg.base_dir)
    exc = cfg.excitation.to_excitation()

    golden: dict = {"config_hash": config_hash(cfg)}

    model = build_motor(spec, params)
    healthy = cm_impedance_sweep(model, grid)
    write_impedance_csv(report.add_file(out / "cm_impedance_healthy.csv", out), healthy)
    f_res, z_min = first_impedance_minimum(healthy)
    golden["healthy"] = {
        "z_mag_at_start_ohm": fmt(float(np.abs(healthy.z[0]))),
        "first_series_resonance_hz": fmt(f_res),
        "min_impedance_ohm": fmt(z_min),
    }

    golden["sweep_deviations"] = {}
    golden["ratios"] = {}
    for text in GOLDEN_SWEEP_FAULTS:
        slug = _fault_slug(text)
        fsweep = cm_impedance_sweep(apply_fault(model, parse_fault(text)), grid)
        curve, dev = deviation_db(healthy, fsweep)
        write_deviation_csv(
            report.add_file(out / f"deviation_{slug}.csv", out),
            healthy.frequencies, curve)
        golden["sweep_deviations"][text] = {
            "max_abs_db": fmt(dev.max_abs_db),
            "freq_hz": fmt(dev.freq_hz),
        }
        ratio = ratio_r(path_model, healthy, fsweep)
        write_ratio_csv(report.add_file(out / f"ratio_{slug}.csv", out), ratio)
        r_max, f_max = ratio.max_point()
        golden["ratios"][text] = {"max_r_db": fmt(r_max), "freq_hz": fmt(f_max)}

    # DM increments need the documented asymmetry to give a usable reference
    asym_cfg = cfg.baseline_asymmetry
    if not asym_cfg.enabled:
        asym_cfg = replace(asym_cfg, enabled=True)
    asym_model = build_motor(spec, params, asymmetry=asym_cfg.to_spec())
    reference = cm_spectrum(build_dm_bench(asym_model, cfg.bench.source_stray_c), exc)
    write_spectrum_csv(
        report.add_file(out / "cm_spectrum_reference.csv", out), reference)
    golden["dm_increments"] = {}
    for text in GOLDEN_DM_FAULTS:
        slug = _fault_slug(text)
        bench = build_dm_bench(apply_fault(asym_model, parse_fault(text)),
                               cfg.bench.source_stray_c)
        spectrum = cm_spectrum(bench, exc)
        curve, inc = increment_db(reference, spectrum, cfg.bench.db_floor)
        write_increment_csv(
            report.add_file(out / f"increment_{slug}.csv", out), exc.f0, curve)
        golden["dm_increments"][text] = {
            "max_db": fmt(inc.max_db),
            "harmonic": inc.harmonic,
        }

    golden_path = out / "golden_summary.json"
    golden_path.write_text(json.dumps(golden, indent=2, sort_keys=True) + "\n")
    report.manifest.append("golden_summary.json")
    report.add_summary(analysis="goldens", config_hash=golden["config_hash"])
    report.write(out)
    print(f"golden summary hash {golden['config_hash'][:12]}")
    print(f"wrote {len(report.manifest)} files to {out}")
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = _load(args)
        if args.command == "sweep":
            return cmd_sweep(cfg, args.fault)
        if args.command == "ratio":
            return cmd_ratio(cfg, args.fault)
        if args.command == "dmconv":
            return cmd_dmconv(cfg, args.fault)
        if args.command == "goldens":
            return cmd_goldens(cfg)
        parser.error(f"unknown command {args.command!r}")
    except SOLVER_ERRORS as exc:
        print(f"statorcm: [{exc.code}] {exc.message}", file=sys.stderr)
        return 3
    except USAGE_ERRORS as exc:
        print(f"statorcm: [{exc.code}] {exc.message}", file=sys.stderr)
        return 2
    except StatorCmError as exc:
        print(f"statorcm: [{exc.code}] {exc.message}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())

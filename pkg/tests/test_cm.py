"""CM impedance sweep emulation, CM current and ratio analysis."""
from __future__ import annotations

import math

import numpy as np
import pytest

from statorcm import (
    CMPathModel,
    DivergentCurrentError,
    FrequencyGrid,
    GridError,
    ImpedanceSweep,
    ParallelRC,
    SeriesRLC,
    TabulatedImpedance,
    WindingSpec,
    apply_fault,
    build_motor,
    cm_current,
    cm_impedance_sweep,
    deviation_db,
    first_impedance_minimum,
    parse_fault,
    ratio_r,
)

COARSE = FrequencyGrid(1e3, 30e6, 61, "log")


@pytest.fixture(scope="module")
def healthy_sweep(default_model):
    return cm_impedance_sweep(default_model, COARSE)


def test_grid_validation():
    with pytest.raises(GridError):
        FrequencyGrid(0.0, 1e6, 10)
    with pytest.raises(GridError):
        FrequencyGrid(1e6, 1e3, 10)
    with pytest.raises(GridError):
        FrequencyGrid(1e3, 1e6, 1)
    with pytest.raises(GridError):
        FrequencyGrid(1e3, 1e6, 10, "cubic")


def test_grid_spacing():
    log = FrequencyGrid(1e3, 1e6, 4, "log").frequencies()
    np.testing.assert_allclose(log, [1e3, 1e4, 1e5, 1e6], rtol=1e-12)
    lin = FrequencyGrid(1.0, 4.0, 4, "linear").frequencies()
    np.testing.assert_allclose(lin, [1, 2, 3, 4], rtol=1e-12)


def test_low_frequency_capacitive_limit(healthy_sweep, default_spec, default_params):
    c_tot = 3 * default_spec.turns_per_phase * default_params.c_turn_frame_per_turn
    expected = 1.0 / (2.0 * math.pi * 1e3 * c_tot)
    z0 = healthy_sweep.z[0]
    assert abs(z0) == pytest.approx(expected, rel=0.02)
    assert math.degrees(np.angle(z0)) == pytest.approx(-90.0, abs=1.0)


def test_equipotential_phase_to_phase_short(default_model, healthy_sweep):
    faulted = apply_fault(default_model, parse_fault("pp:A:120-B:120"))
    sweep = cm_impedance_sweep(faulted, COARSE)
    curve, summary = deviation_db(healthy_sweep, sweep)
    assert summary.max_abs_db < 0.1


def test_ground_fault_low_frequency_collapse(default_model, healthy_sweep):
    faulted = apply_fault(default_model, parse_fault("pg:A:24"))
    sweep = cm_impedance_sweep(faulted, COARSE)
    drop_db = 20.0 * math.log10(abs(healthy_sweep.z[0]) / abs(sweep.z[0]))
    assert drop_db >= 20.0
    curve, _ = deviation_db(healthy_sweep, sweep)
    assert abs(curve[-1]) < 3.0  # effect fades once the series inductance rules


def test_turn_fault_severity_ordering(default_model, healthy_sweep):
    dev = {}
    for text in ("tt:A:24-27", "tt:A:24-34"):
        sweep = cm_impedance_sweep(apply_fault(default_model, parse_fault(text)), COARSE)
        dev[text] = deviation_db(healthy_sweep, sweep)[1].max_abs_db
    assert dev["tt:A:24-34"] > dev["tt:A:24-27"] > 0.0


def test_open_circuit_contact_limit(default_model, healthy_sweep):
    faulted = apply_fault(default_model, parse_fault("tt:A:24-34@1e12"))
    sweep = cm_impedance_sweep(faulted, COARSE)
    np.testing.assert_allclose(sweep.z, healthy_sweep.z, rtol=1e-6)


def test_ground_fault_monotone_at_low_frequency(default_model, healthy_sweep):
    # decreasing contact resistance never raises |Z| at the lowest frequency
    mags = []
    for r in (100.0, 10.0, 1.0, 0.1):
        faulted = apply_fault(default_model, parse_fault(f"pg:A:24@{r}"))
        sweep = cm_impedance_sweep(faulted, FrequencyGrid(1e3, 2e3, 2, "log"))
        mags.append(abs(sweep.z[0]))
    assert all(b <= a * (1 + 1e-9) for a, b in zip(mags, mags[1:]))


def test_double_fault_halves_contact_resistance(default_model):
    grid = FrequencyGrid(1e3, 1e6, 7, "log")
    fault = parse_fault("pg:A:24@2.0")
    twice = apply_fault(apply_fault(default_model, fault), fault)
    halved = apply_fault(default_model, parse_fault("pg:A:24@1.0"))
    z_twice = cm_impedance_sweep(twice, grid)
    z_halved = cm_impedance_sweep(halved, grid)
    np.testing.assert_allclose(z_twice.z, z_halved.z, rtol=1e-9)


def test_phase_permutation_invariance(default_spec, default_params):
    rotated_taps = {"B": default_spec.taps["A"], "C": default_spec.taps["B"]}
    rotated = build_motor(WindingSpec(288, rotated_taps, 48), default_params)
    base = build_motor(default_spec, default_params)
    grid = FrequencyGrid(1e3, 30e6, 31, "log")
    z_base = cm_impedance_sweep(base, grid)
    z_rot = cm_impedance_sweep(rotated, grid)
    np.testing.assert_allclose(z_rot.z, z_base.z, rtol=1e-12)


def test_refinement_convergence(default_spec, default_params):
    fine_spec = WindingSpec(default_spec.turns_per_phase, default_spec.taps, 96)
    coarse = build_motor(default_spec, default_params)
    fine = build_motor(fine_spec, default_params)
    grid = FrequencyGrid(1e3, 30e6, 61, "log")
    z_coarse = cm_impedance_sweep(coarse, grid)
    z_fine = cm_impedance_sweep(fine, grid)
    # first parallel resonance: first |Z| local max after the series minimum
    mag = np.abs(z_coarse.z)
    freqs = grid.frequencies()
    i_min = next(i for i in range(1, len(mag) - 1)
                 if mag[i] <= mag[i - 1] and mag[i] < mag[i + 1])
    i_max = next(i for i in range(i_min + 1, len(mag) - 1)
                 if mag[i] >= mag[i - 1] and mag[i] > mag[i + 1])
    f_parallel = freqs[i_max]
    low = freqs <= f_parallel / 2.0
    rel = np.abs(np.abs(z_fine.z[low]) - mag[low]) / mag[low]
    assert rel.max() < 0.01


def test_cm_current_equal_parts():
    grid = FrequencyGrid(1e3, 1e5, 5, "log")
    path = CMPathModel(v_source=1.0, z_vfd=SeriesRLC(r=1.0), z_cable=SeriesRLC(r=1.0))
    z_im = ImpedanceSweep.from_grid(grid, np.full(5, 1.0 + 0j))
    i = cm_current(path, z_im)
    np.testing.assert_allclose(np.abs(i), 1.0 / 3.0, rtol=1e-12)


def test_cm_current_null_source():
    grid = FrequencyGrid(1e3, 1e5, 5, "log")
    path = CMPathModel(v_source=0.0)
    z_im = ImpedanceSweep.from_grid(grid, np.full(5, 10.0 + 5j))
    np.testing.assert_allclose(cm_current(path, z_im), 0.0, atol=0.0)


def test_cm_current_matches_elementwise_oracle():
    rng = np.random.default_rng(11)
    grid = FrequencyGrid(1e3, 1e7, 41, "log")
    z_im = ImpedanceSweep.from_grid(grid, rng.normal(50, 5, 41) + 1j * rng.normal(0, 20, 41))
    path = CMPathModel(v_source=2.0 - 0.5j)
    freqs = grid.frequencies()
    expected = np.array([
        (2.0 - 0.5j) / (path.z_vfd.at(np.array([f]))[0]
                        + path.z_cable.at(np.array([f]))[0] + z)
        for f, z in zip(freqs, z_im.z)
    ])
    np.testing.assert_allclose(cm_current(path, z_im), expected, rtol=1e-12)


def test_cm_current_divergent_loop():
    grid = FrequencyGrid(1e3, 1e5, 3, "log")
    path = CMPathModel(v_source=1.0, z_vfd=SeriesRLC(), z_cable=SeriesRLC())
    z_im = ImpedanceSweep.from_grid(grid, np.zeros(3, dtype=complex))
    with pytest.raises(DivergentCurrentError) as err:
        cm_current(path, z_im)
    assert err.value.freq_hz == pytest.approx(1e3)


def test_ratio_identical_sweeps_is_zero():
    grid = FrequencyGrid(1e3, 1e6, 11, "log")
    z = ImpedanceSweep.from_grid(grid, np.full(11, 30.0 - 4j))
    r = ratio_r(CMPathModel(), z, z)
    np.testing.assert_allclose(r.r_db, 0.0, atol=0.0)


def test_ratio_flat_halved_denominator():
    grid = FrequencyGrid(1e3, 1e6, 11, "log")
    path = CMPathModel(v_source=1.0, z_vfd=SeriesRLC(r=30.0), z_cable=SeriesRLC(r=20.0))
    healthy = ImpedanceSweep.from_grid(grid, np.full(11, 50.0 + 0j))   # total 100
    faulty = ImpedanceSweep.from_grid(grid, np.full(11, 0.000001 + 0j))
    r = ratio_r(path, healthy, faulty)
    assert r.r_db[0] == pytest.approx(20.0 * math.log10(100.0 / 50.000001), rel=1e-9)
    assert r.max_point()[0] == pytest.approx(6.0206, abs=1e-3)


def test_ratio_consistent_with_current_ratio(default_model, healthy_sweep):
    faulted = apply_fault(default_model, parse_fault("tt:A:24-34"))
    z_fault = cm_impedance_sweep(faulted, COARSE)
    path = CMPathModel()
    r = ratio_r(path, healthy_sweep, z_fault)
    i_healthy = cm_current(path, healthy_sweep)
    i_fault = cm_current(path, z_fault)
    direct = 20.0 * np.log10(np.abs(i_fault) / np.abs(i_healthy))
    np.testing.assert_allclose(r.r_db, direct, atol=1e-9)


def test_ratio_source_amplitude_invariance(default_model, healthy_sweep):
    faulted = apply_fault(default_model, parse_fault("pg:A:24"))
    z_fault = cm_impedance_sweep(faulted, COARSE)
    r1 = ratio_r(CMPathModel(v_source=1.0), healthy_sweep, z_fault)
    r10 = ratio_r(CMPathModel(v_source=10.0), healthy_sweep, z_fault)
    np.testing.assert_allclose(r1.r_db, r10.r_db, atol=0.0)


def test_impedance_scaling_law():
    grid = FrequencyGrid(1e3, 1e6, 11, "log")
    rng = np.random.default_rng(3)
    z = rng.normal(100, 10, 11) + 1j * rng.normal(0, 40, 11)
    alpha = 4.0
    path1 = CMPathModel(v_source=1.0, z_vfd=SeriesRLC(r=10.0), z_cable=SeriesRLC(r=5.0))
    path2 = CMPathModel(v_source=1.0, z_vfd=SeriesRLC(r=40.0), z_cable=SeriesRLC(r=20.0))
    i1 = cm_current(path1, ImpedanceSweep.from_grid(grid, z))
    i2 = cm_current(path2, ImpedanceSweep.from_grid(grid, alpha * z))
    np.testing.assert_allclose(np.abs(i1) / alpha, np.abs(i2), rtol=1e-12)


def test_deviation_trivials():
    grid = FrequencyGrid(1e3, 1e6, 5, "log")
    a = ImpedanceSweep.from_grid(grid, np.full(5, 10.0 + 0j))
    curve, summary = deviation_db(a, a)
    assert summary.max_abs_db == 0.0
    halved = a.z.copy()
    halved[2] = 5.0
    curve, summary = deviation_db(a, ImpedanceSweep.from_grid(grid, halved))
    assert summary.max_abs_db == pytest.approx(6.0206, abs=1e-3)
    assert summary.freq_hz == pytest.approx(grid.frequencies()[2])


def test_parametric_impedance_models():
    f = np.array([1e3, 1e6])
    w = 2 * np.pi * f
    series = SeriesRLC(r=2.0, l=1e-6, c=1e-9).at(f)
    np.testing.assert_allclose(series, 2.0 + 1j * w * 1e-6 + 1.0 / (1j * w * 1e-9))
    par = ParallelRC(50.0, 2e-9).at(f)
    np.testing.assert_allclose(1.0 / par, 1.0 / 50.0 + 1j * w * 2e-9)


def test_tabulated_interpolation_and_range():
    grid = FrequencyGrid(1e3, 1e6, 4, "log")
    table = TabulatedImpedance(
        ImpedanceSweep.from_grid(grid, np.array([1, 10, 100, 1000], dtype=complex)))
    # log-linear interpolation: halfway in log-f between 1e3 and 1e4
    mid = table.at(np.array([10 ** 3.5]))
    assert mid[0] == pytest.approx(5.5, rel=1e-12)
    with pytest.raises(GridError):
        table.at(np.array([5e2]))
    with pytest.raises(GridError):
        table.at(np.array([2e6]))


def test_mismatched_grids_rejected():
    g1 = FrequencyGrid(1e3, 1e6, 5, "log")
    g2 = FrequencyGrid(1e3, 1e6, 7, "log")
    a = ImpedanceSweep.from_grid(g1, np.full(5, 1.0 + 0j))
    b = ImpedanceSweep.from_grid(g2, np.full(7, 1.0 + 0j))
    with pytest.raises(GridError):
        deviation_db(a, b)
    with pytest.raises(GridError):
        ratio_r(CMPathModel(), a, b)


def test_sweep_annotates_singular_frequency(default_model):
    from statorcm import Network, Resistor, SingularSystemError

    net = default_model.network
    broken = Network(
        net.node_count + 2,
        net.elements + (Resistor((net.node_count, net.node_count + 1), 1.0,
                                 "floating"),),
    )
    model = default_model.with_network(broken)
    with pytest.raises(SingularSystemError) as err:
        cm_impedance_sweep(model, FrequencyGrid(1e3, 2e3, 2, "log"))
    assert "Hz" in err.value.message


def test_equipotential_invariance_generalizes(default_params):
    # tap extra phases at positions already in the union layout, then short
    # same-index positions pairwise: the tied-terminal measurement cannot
    # tell the difference
    spec = WindingSpec(288, {"A": (24, 27, 34, 120, 264), "B": (120, 264),
                             "C": (27,)}, 48)
    model = build_motor(spec, default_params)
    grid = FrequencyGrid(1e3, 30e6, 31, "log")
    healthy = cm_impedance_sweep(model, grid)
    for text in ("pp:A:264-B:264", "pp:A:27-C:27"):
        faulted = apply_fault(model, parse_fault(text))
        curve, summary = deviation_db(healthy, cm_impedance_sweep(faulted, grid))
        assert summary.max_abs_db < 0.1


def test_first_impedance_minimum_on_defaults(healthy_sweep):
    f_res, z_min = first_impedance_minimum(healthy_sweep)
    assert 1e5 < f_res < 1e6  # first resonance within the stated decade
    assert z_min < 100.0

"""Winding model construction, tap bookkeeping and symmetry checks."""
from __future__ import annotations

import math

import pytest

from statorcm import (
    AsymmetrySpec,
    Capacitor,
    Inductor,
    NetworkError,
    Resistor,
    SectionParams,
    UnmappedTapError,
    WindingSpec,
    build_motor,
    tap_node,
    validate_symmetry,
)


def test_default_spec_tap_set(default_spec):
    assert default_spec.turns_per_phase == 288
    assert default_spec.taps["A"] == (24, 27, 34, 120, 264)
    assert default_spec.taps["B"] == (120,)


def test_tap_nodes_exist_for_declared_taps(default_model):
    nodes = [tap_node(default_model, "A", t) for t in (24, 27, 34, 120, 264)]
    nodes.append(tap_node(default_model, "B", 120))
    assert len(set(nodes)) == len(nodes)  # all distinct


def test_tap_node_winding_end_is_star(default_model):
    assert tap_node(default_model, "A", 288) == default_model.star_node
    assert tap_node(default_model, "B", 288) == default_model.star_node


def test_tap_node_undeclared_tap_errors(default_model):
    with pytest.raises(UnmappedTapError):
        tap_node(default_model, "B", 24)
    with pytest.raises(UnmappedTapError):
        tap_node(default_model, "Q", 24)


def test_dc_resistance_tiny_winding():
    spec = WindingSpec(turns_per_phase=4, taps={}, sections_per_phase=4)
    params = SectionParams(r_per_turn=1.0)
    model = build_motor(spec, params)
    for phase in "ABC":
        total = sum(rec.resistance for rec in model.sections[phase])
        assert total == pytest.approx(4.0, rel=1e-12)


def test_per_phase_series_totals(default_model, default_spec, default_params):
    t = default_spec.turns_per_phase
    for phase in "ABC":
        r_total = math.fsum(rec.resistance for rec in default_model.sections[phase])
        l_total = math.fsum(rec.inductance for rec in default_model.sections[phase])
        assert r_total == pytest.approx(t * default_params.r_per_turn, rel=1e-12)
        assert l_total == pytest.approx(t * default_params.l_per_turn, rel=1e-12)


def test_frame_capacitance_bookkeeping(default_model, default_spec, default_params):
    total = math.fsum(
        c for phase in "ABC" for c in default_model.boundary_caps[phase]
    )
    expected = 3 * default_spec.turns_per_phase * default_params.c_turn_frame_per_turn
    assert total == pytest.approx(expected, rel=1e-14)


def test_section_boundaries_cover_all_taps(default_model, default_spec):
    union = default_spec.union_taps()
    for phase in "ABC":
        positions = set(default_model.section_boundaries[phase])
        assert set(union) <= positions
        assert {0, default_spec.turns_per_phase} <= positions


def test_section_count_and_sizes(default_model, default_spec):
    for phase in "ABC":
        secs = default_model.sections[phase]
        assert len(secs) == default_spec.sections_per_phase
        assert sum(rec.turns for rec in secs) == default_spec.turns_per_phase
        assert all(rec.turns >= 1 for rec in secs)


def test_identical_layout_across_phases(default_model):
    layouts = {
        phase: tuple((rec.start_turn, rec.end_turn) for rec in default_model.sections[phase])
        for phase in "ABC"
    }
    assert layouts["A"] == layouts["B"] == layouts["C"]


def test_granularity_too_coarse_rejected():
    with pytest.raises(NetworkError):
        WindingSpec(turns_per_phase=288, taps={"A": (24, 27, 34, 120, 264)},
                    sections_per_phase=4)


def test_tap_outside_winding_rejected():
    with pytest.raises(NetworkError):
        WindingSpec(turns_per_phase=100, taps={"A": (120,)})


def test_validate_symmetry_clean_model(default_model):
    report = validate_symmetry(default_model)
    assert report.symmetric
    assert report.violations == ()


def test_validate_symmetry_flags_scaled_cap(default_spec, default_params):
    model = build_motor(default_spec, default_params)
    # rebuild with one phase-A frame capacitor scaled by 1.05
    caps = dict(model.boundary_caps)
    scaled = list(caps["A"])
    scaled[5] *= 1.05
    perturbed_caps = {**caps, "A": tuple(scaled)}
    perturbed = model.__class__(
        network=model.network, node_map=model.node_map,
        section_boundaries=model.section_boundaries,
        terminal_nodes=model.terminal_nodes, star_node=model.star_node,
        frame_node=model.frame_node, spec=model.spec, params=model.params,
        sections=model.sections, boundary_caps=perturbed_caps,
    )
    report = validate_symmetry(perturbed)
    assert not report.symmetric
    assert len(report.violations) == 1
    assert "A" in report.violations[0]


def test_asymmetry_phase_a_scales_caps(default_spec, default_params):
    clean = build_motor(default_spec, default_params)
    skewed = build_motor(default_spec, default_params,
                         asymmetry=AsymmetrySpec(magnitude=0.02))
    for j, (c0, c1) in enumerate(zip(clean.boundary_caps["A"],
                                     skewed.boundary_caps["A"])):
        assert c1 == pytest.approx(1.02 * c0, rel=1e-12)
    assert skewed.boundary_caps["B"] == clean.boundary_caps["B"]
    report = validate_symmetry(skewed)
    assert not report.symmetric


def test_asymmetry_jitter_is_seeded(default_spec, default_params):
    a = build_motor(default_spec, default_params,
                    asymmetry=AsymmetrySpec(magnitude=0.02, mode="jitter", seed=42))
    b = build_motor(default_spec, default_params,
                    asymmetry=AsymmetrySpec(magnitude=0.02, mode="jitter", seed=42))
    c = build_motor(default_spec, default_params,
                    asymmetry=AsymmetrySpec(magnitude=0.02, mode="jitter", seed=43))
    assert a.boundary_caps == b.boundary_caps
    assert a.boundary_caps != c.boundary_caps


def test_network_element_counts(default_model, default_spec):
    per_kind = {}
    for el in default_model.network.elements:
        per_kind[type(el).__name__] = per_kind.get(type(el).__name__, 0) + 1
    s = default_spec.sections_per_phase
    assert per_kind["Resistor"] == 3 * s + 1           # sections + strap
    assert per_kind["Inductor"] == 3 * s + 1
    # inter-turn caps + frame caps per boundary
    assert per_kind["Capacitor"] == 3 * s + 3 * (s + 1)


def test_rebuild_is_deterministic(default_spec, default_params):
    a = build_motor(default_spec, default_params)
    b = build_motor(default_spec, default_params)
    assert a.network == b.network
    assert a.node_map == b.node_map


def test_node_map_json_export(default_model, default_spec):
    tree = default_model.node_map_json()
    assert set(tree) == {"A", "B", "C"}
    for phase in "ABC":
        positions = tree[phase]
        assert positions["0"] == default_model.terminal_nodes[phase]
        assert positions[str(default_spec.turns_per_phase)] == default_model.star_node
    import json

    json.dumps(tree)  # must be JSON-serializable as-is


def test_coupling_pairs_when_enabled(default_spec):
    params = SectionParams(coupling_k=0.3)
    model = build_motor(default_spec, params)
    couplings = [el for el in model.network.elements
                 if type(el).__name__ == "MutualCoupling"]
    assert couplings, "coupling_k > 0 should declare mutual pairs"
    seen = set()
    for m in couplings:
        for label in m.inductors:
            assert label not in seen
            seen.add(label)

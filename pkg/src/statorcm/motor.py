"""Distributed equivalent-circuit model of a star-connected stator winding.

Each phase is a ladder of lumped sections between the phase terminal and
the shared star point.  A section covering n turns carries n times the
per-turn series resistance and inductance, an inter-turn capacitance of
(per-turn value)/n across it, and n times the per-turn winding-to-frame
capacitance split equally onto its two boundary nodes.  The frame node
reaches the reference ground through a series R-L strap.

All three phases share one section layout derived from the union of every
declared tap (plus the winding ends).  That keeps the phases strictly
isomorphic - a requirement for the symmetry checks and for the
mode-conversion null of the DM test bench - while still placing a node at
every tap.  Only *declared* taps (and the winding ends) are addressable
through tap_node.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .circuit import Network, NetworkBuilder
from .errors import NetworkError, UnmappedTapError

PHASES = ("A", "B", "C")

DEFAULT_TAPS: Mapping[str, tuple[int, ...]] = {"A": (24, 27, 34, 120, 264), "B": (120,)}


@dataclass(frozen=True)
class WindingSpec:
    """Winding geometry: star-connected, three phases, tapped turns."""

    turns_per_phase: int = 288
    taps: Mapping[str, tuple[int, ...]] = field(
        default_factory=lambda: dict(DEFAULT_TAPS)
    )
    sections_per_phase: int = 48

    def __post_init__(self):
        if self.turns_per_phase < 1:
            raise NetworkError("turns_per_phase must be >= 1")
        normalized: dict[str, tuple[int, ...]] = {}
        for phase, taps in self.taps.items():
            if phase not in PHASES:
                raise NetworkError(f"unknown phase {phase!r} in tap map")
            taps = tuple(taps)
            if list(taps) != sorted(set(taps)):
                raise NetworkError(f"taps for phase {phase} must be strictly sorted")
            for t in taps:
                if not 1 <= t <= self.turns_per_phase:
                    raise NetworkError(
                        f"tap {phase}{t} outside winding [1, {self.turns_per_phase}]"
                    )
            normalized[phase] = taps
        object.__setattr__(self, "taps", normalized)
        union = self.union_taps()
        if self.sections_per_phase < len(union) + 1:
            raise NetworkError(
                f"sections_per_phase={self.sections_per_phase} too coarse to honor "
                f"{len(union)} distinct tap positions"
            )
        if self.sections_per_phase > self.turns_per_phase:
            raise NetworkError("cannot have more sections than turns")

    def union_taps(self) -> tuple[int, ...]:
        """Distinct interior tap positions across all phases, sorted."""
        union = set()
        for taps in self.taps.values():
            union.update(taps)
        union.discard(self.turns_per_phase)
        return tuple(sorted(union))

    def declared(self, phase: str) -> tuple[int, ...]:
        return self.taps.get(phase, ())


@dataclass(frozen=True)
class SectionParams:
    """Per-turn lumped parameters and the frame-to-ground strap.

    The numeric defaults are a synthetic reference scenario (capacitive CM
    impedance at low frequency, first resonance in the 100 kHz - 1 MHz
    decade); they are not measurements of any physical machine.
    """

    r_per_turn: float = 0.02
    l_per_turn: float = 3e-6
    c_turn_frame_per_turn: float = 1.5e-12
    c_turn_turn_per_turn: float = 20e-12
    coupling_k: float = 0.0
    frame_r: float = 0.05
    frame_l: float = 50e-9

    def __post_init__(self):
        for name in ("r_per_turn", "l_per_turn", "c_turn_frame_per_turn",
                     "c_turn_turn_per_turn", "frame_r", "frame_l"):
            if not getattr(self, name) > 0:
                raise NetworkError(f"{name} must be > 0")
        if not 0 <= self.coupling_k < 1:
            raise NetworkError("coupling_k must lie in [0, 1)")


@dataclass(frozen=True)
class AsymmetrySpec:
    """Deliberate imbalance emulating manufacturing tolerances.

    mode "phase_a" scales every phase-A turn-frame capacitor by
    (1 + magnitude); mode "jitter" scales each turn-frame capacitor of all
    phases by (1 + magnitude * u), u drawn uniformly from [-1, 1] with the
    given seed.
    """

    magnitude: float = 0.02
    mode: str = "phase_a"
    seed: int = 0

    def __post_init__(self):
        if self.mode not in ("phase_a", "jitter"):
            raise NetworkError(f"unknown asymmetry mode {self.mode!r}")
        if not -0.5 < self.magnitude < 0.5:
            raise NetworkError("asymmetry magnitude outside sane range (-0.5, 0.5)")

    def scale_factors(self, boundary_count: int) -> dict[str, np.ndarray]:
        if self.mode == "phase_a":
            out = {p: np.ones(boundary_count) for p in PHASES}
            out["A"] = np.full(boundary_count, 1.0 + self.magnitude)
            return out
        rng = np.random.default_rng(self.seed)
        return {
            p: 1.0 + self.magnitude * rng.uniform(-1.0, 1.0, boundary_count)
            for p in PHASES
        }


@dataclass(frozen=True)
class SectionRecord:
    start_turn: int
    end_turn: int
    resistance: float
    inductance: float
    interturn_c: float

    @property
    def turns(self) -> int:
        return self.end_turn - self.start_turn


@dataclass(frozen=True)
class MotorModel:
    """Immutable network plus the winding-position bookkeeping."""

    network: Network
    node_map: Mapping[tuple[str, int], int]
    section_boundaries: Mapping[str, Mapping[int, int]]
    terminal_nodes: Mapping[str, int]
    star_node: int
    frame_node: int
    spec: WindingSpec
    params: SectionParams
    sections: Mapping[str, tuple[SectionRecord, ...]]
    boundary_caps: Mapping[str, tuple[float, ...]]

    def with_network(self, network: Network) -> "MotorModel":
        return MotorModel(
            network, self.node_map, self.section_boundaries, self.terminal_nodes,
            self.star_node, self.frame_node, self.spec, self.params,
            self.sections, self.boundary_caps,
        )

    def boundary_positions(self) -> tuple[int, ...]:
        return tuple(sorted(self.section_boundaries["A"]))

    def node_map_json(self) -> dict:
        """Exportable view of the full boundary map, for debugging."""
        return {
            phase: {str(pos): node for pos, node in sorted(bmap.items())}
            for phase, bmap in self.section_boundaries.items()
        }


def _split_gaps(turns: int, mandatory: Sequence[int], sections: int) -> list[int]:
    """Boundary positions honoring mandatory points, ~even elsewhere."""
    points = [0, *mandatory, turns]
    gaps = [(points[i], points[i + 1]) for i in range(len(points) - 1)]
    lengths = [b - a for a, b in gaps]
    extra = sections - len(gaps)
    # proportional allocation by gap length, largest remainder, capped by
    # the number of integer split points available in the gap
    alloc = [0] * len(gaps)
    if extra > 0:
        total = sum(lengths)
        quotas = [extra * ln / total for ln in lengths]
        alloc = [min(int(q), lengths[i] - 1) for i, q in enumerate(quotas)]
        remainders = sorted(
            range(len(gaps)),
            key=lambda i: (-(quotas[i] - int(quotas[i])), i),
        )
        shortfall = extra - sum(alloc)
        idx = 0
        while shortfall > 0:
            i = remainders[idx % len(gaps)]
            if alloc[i] < lengths[i] - 1:
                alloc[i] += 1
                shortfall -= 1
            idx += 1
            if idx > 10 * len(gaps) * (extra + 1):
                raise NetworkError("cannot honor section count with these taps")
    boundaries = [0]
    for (a, b), n_extra in zip(gaps, alloc):
        parts = n_extra + 1
        length = b - a
        base, rem = divmod(length, parts)
        pos = a
        for p in range(parts):
            pos += base + (1 if p < rem else 0)
            boundaries.append(pos)
    assert boundaries[-1] == turns
    return boundaries


def build_motor(
    spec: WindingSpec,
    params: SectionParams,
    asymmetry: AsymmetrySpec | None = None,
) -> MotorModel:
    """Construct the three-phase ladder network with tap-point nodes."""
    positions = _split_gaps(spec.turns_per_phase, spec.union_taps(),
                            spec.sections_per_phase)
    sizes = [positions[i + 1] - positions[i] for i in range(len(positions) - 1)]
    nb = NetworkBuilder()
    frame = nb.node()
    strap_mid = nb.node()
    star = nb.node()

    if asymmetry is None:
        cap_scale = {p: np.ones(len(positions)) for p in PHASES}
    else:
        cap_scale = asymmetry.scale_factors(len(positions))

    boundary_nodes: dict[str, dict[int, int]] = {}
    sections: dict[str, tuple[SectionRecord, ...]] = {}
    boundary_caps: dict[str, tuple[float, ...]] = {}
    for phase in PHASES:
        nodes = {0: nb.node()}
        for pos in positions[1:-1]:
            nodes[pos] = nb.node()
        nodes[spec.turns_per_phase] = star
        boundary_nodes[phase] = nodes

        records = []
        for i, n_turns in enumerate(sizes):
            a = nodes[positions[i]]
            b = nodes[positions[i + 1]]
            mid = nb.node()
            r = n_turns * params.r_per_turn
            l = n_turns * params.l_per_turn
            ct = params.c_turn_turn_per_turn / n_turns
            nb.resistor(a, mid, r, f"{phase}:s{i:02d}:r")
            nb.inductor(mid, b, l, f"{phase}:s{i:02d}:l")
            nb.capacitor(a, b, ct, f"{phase}:s{i:02d}:ct")
            records.append(SectionRecord(positions[i], positions[i + 1], r, l, ct))
        sections[phase] = tuple(records)

        caps = []
        for j, pos in enumerate(positions):
            n_adj = (sizes[j - 1] if j > 0 else 0) + (sizes[j] if j < len(sizes) else 0)
            value = n_adj * params.c_turn_frame_per_turn / 2.0
            value *= float(cap_scale[phase][j])
            nb.capacitor(nodes[pos], frame, value, f"{phase}:b{j:02d}:cf")
            caps.append(value)
        boundary_caps[phase] = tuple(caps)

        if params.coupling_k > 0.0:
            # uniform adjacent coupling over disjoint section pairs; an
            # inductor may appear in at most one declared pair
            for i in range(0, len(sizes) - 1, 2):
                nb.mutual(f"{phase}:s{i:02d}:l", f"{phase}:s{i + 1:02d}:l",
                          params.coupling_k, f"{phase}:m{i:02d}")

    nb.resistor(frame, strap_mid, params.frame_r, "frame:strap_r")
    nb.inductor(strap_mid, 0, params.frame_l, "frame:strap_l")

    node_map: dict[tuple[str, int], int] = {}
    for phase in PHASES:
        node_map[(phase, 0)] = boundary_nodes[phase][0]
        node_map[(phase, spec.turns_per_phase)] = star
        for tap in spec.declared(phase):
            node_map[(phase, tap)] = boundary_nodes[phase][tap]

    return MotorModel(
        network=nb.build(),
        node_map=node_map,
        section_boundaries=boundary_nodes,
        terminal_nodes={p: boundary_nodes[p][0] for p in PHASES},
        star_node=star,
        frame_node=frame,
        spec=spec,
        params=params,
        sections=sections,
        boundary_caps=boundary_caps,
    )


def tap_node(model: MotorModel, phase: str, turn: int) -> int:
    """Node at a declared tap (or a winding end) of the given phase."""
    if phase not in PHASES:
        raise UnmappedTapError(f"unknown phase {phase!r}")
    try:
        return model.node_map[(phase, turn)]
    except KeyError:
        declared = sorted(
            t for (p, t) in model.node_map if p == phase
        )
        raise UnmappedTapError(
            f"phase {phase} has no declared tap at turn {turn}; "
            f"available: {declared}"
        ) from None


@dataclass(frozen=True)
class SymmetryReport:
    symmetric: bool
    violations: tuple[str, ...]


def validate_symmetry(model: MotorModel) -> SymmetryReport:
    """Check phase isomorphism; list the odd-one-out elements otherwise."""
    violations: list[str] = []

    def compare(kind: str, index: int, values: dict[str, float]):
        distinct = sorted(set(values.values()))
        if len(distinct) == 1:
            return
        if len(distinct) == 2:
            minority_value = min(
                distinct, key=lambda v: sum(1 for x in values.values() if x == v)
            )
            odd = [p for p, v in values.items() if v == minority_value]
        else:
            odd = list(values)
        violations.append(
            f"{kind}[{index}] differs on phase(s) {','.join(odd)}: "
            + ", ".join(f"{p}={values[p]:.6e}" for p in PHASES)
        )

    n_sections = len(model.sections["A"])
    for i in range(n_sections):
        for attr in ("turns", "resistance", "inductance", "interturn_c"):
            compare(f"section:{attr}", i,
                    {p: float(getattr(model.sections[p][i], attr)) for p in PHASES})
    for j in range(len(model.boundary_caps["A"])):
        compare("frame_cap", j, {p: model.boundary_caps[p][j] for p in PHASES})

    return SymmetryReport(symmetric=not violations, violations=tuple(violations))

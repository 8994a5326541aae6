"""Stator winding fault emulation: short circuits attached at tap points.

A fault adds one contact resistor between two tap nodes (or a tap node and
the frame for phase-to-ground).  Models are never mutated; applying a
fault returns a new model sharing everything but the network.

Text grammar (CLI / config wire format):

    tt:<P>:<t1>-<t2>          turn-to-turn within phase P
    pp:<P>:<t>-<P>:<t>        phase-to-phase
    pg:<P>:<t>                phase-to-ground (frame)

with an optional ``@<ohms>`` suffix overriding the 1 ohm default contact
resistance, e.g. ``pp:A:264-B:120@0.5``.
"""
from __future__ import annotations

import re
from dataclasses import dataclass

from .errors import FaultSyntaxError, NetworkError
from .motor import PHASES, MotorModel, tap_node
from .circuit import Resistor

DEFAULT_CONTACT_R = 1.0


@dataclass(frozen=True)
class TurnToTurn:
    phase: str
    turn_a: int
    turn_b: int
    contact_r: float = DEFAULT_CONTACT_R

    def __post_init__(self):
        _check_common(self.phase, self.contact_r)
        if self.turn_a == self.turn_b:
            raise NetworkError("turn-to-turn fault needs two distinct turns")

    def __str__(self):
        return f"tt:{self.phase}:{self.turn_a}-{self.turn_b}" + _r_suffix(self.contact_r)


@dataclass(frozen=True)
class PhaseToPhase:
    phase_a: str
    turn_a: int
    phase_b: str
    turn_b: int
    contact_r: float = DEFAULT_CONTACT_R

    def __post_init__(self):
        _check_common(self.phase_a, self.contact_r)
        _check_common(self.phase_b, self.contact_r)
        if self.phase_a == self.phase_b:
            raise NetworkError("phase-to-phase fault needs two distinct phases")

    def __str__(self):
        return (
            f"pp:{self.phase_a}:{self.turn_a}-{self.phase_b}:{self.turn_b}"
            + _r_suffix(self.contact_r)
        )


@dataclass(frozen=True)
class PhaseToGround:
    phase: str
    turn: int
    contact_r: float = DEFAULT_CONTACT_R

    def __post_init__(self):
        _check_common(self.phase, self.contact_r)

    def __str__(self):
        return f"pg:{self.phase}:{self.turn}" + _r_suffix(self.contact_r)


FaultSpec = TurnToTurn | PhaseToPhase | PhaseToGround


def _check_common(phase: str, contact_r: float):
    if phase not in PHASES:
        raise NetworkError(f"unknown phase {phase!r}")
    if not contact_r > 0:
        raise NetworkError(f"contact resistance must be > 0, got {contact_r}")


def _r_suffix(contact_r: float) -> str:
    return "" if contact_r == DEFAULT_CONTACT_R else f"@{contact_r:g}"


def apply_fault(model: MotorModel, fault: FaultSpec) -> MotorModel:
    """Return a new model with the fault's contact resistor added."""
    if isinstance(fault, TurnToTurn):
        a = tap_node(model, fault.phase, fault.turn_a)
        b = tap_node(model, fault.phase, fault.turn_b)
    elif isinstance(fault, PhaseToPhase):
        a = tap_node(model, fault.phase_a, fault.turn_a)
        b = tap_node(model, fault.phase_b, fault.turn_b)
    elif isinstance(fault, PhaseToGround):
        a = tap_node(model, fault.phase, fault.turn)
        b = model.frame_node
    else:
        raise TypeError(f"not a fault spec: {fault!r}")
    base = f"fault:{fault}"
    label = base
    existing = {el.label for el in model.network.elements}
    ordinal = 1
    while label in existing:
        ordinal += 1
        label = f"{base}#{ordinal}"
    network = model.network.with_elements([Resistor((a, b), fault.contact_r, label)])
    return model.with_network(network)


_TT = re.compile(r"^tt:([A-Za-z]):(\d+)-(\d+)$")
_PP = re.compile(r"^pp:([A-Za-z]):(\d+)-([A-Za-z]):(\d+)$")
_PG = re.compile(r"^pg:([A-Za-z]):(\d+)$")


def parse_fault(text: str) -> FaultSpec:
    """Parse the fault grammar; round-trips with str(fault)."""
    text = text.strip()
    contact_r = DEFAULT_CONTACT_R
    body = text
    if "@" in text:
        body, _, rtext = text.partition("@")
        try:
            contact_r = float(rtext)
        except ValueError:
            raise FaultSyntaxError(
                f"bad contact resistance {rtext!r} in {text!r}",
                position=len(body) + 1,
            ) from None
    kind = body.split(":", 1)[0]
    if kind not in ("tt", "pp", "pg"):
        raise FaultSyntaxError(
            f"unknown fault kind {kind!r} in {text!r} (expected tt/pp/pg)", position=0
        )
    for pat, build in (
        (_TT, lambda m: TurnToTurn(m[1], int(m[2]), int(m[3]), contact_r)),
        (_PP, lambda m: PhaseToPhase(m[1], int(m[2]), m[3], int(m[4]), contact_r)),
        (_PG, lambda m: PhaseToGround(m[1], int(m[2]), contact_r)),
    ):
        m = pat.match(body)
        if m:
            for g, phase in enumerate(m.groups()):
                if phase.isalpha() and phase not in PHASES:
                    raise FaultSyntaxError(
                        f"unknown phase {phase!r} in {text!r}",
                        position=body.index(phase),
                    )
            try:
                return build(m)
            except NetworkError as exc:
                raise FaultSyntaxError(f"{exc.message} in {text!r}") from None
    raise FaultSyntaxError(
        f"fault {text!r} does not match tt:<P>:<t1>-<t2> | "
        "pp:<P>:<t>-<P>:<t> | pg:<P>:<t> (optional @<ohms>)",
        position=len(kind) + 1,
    )

"""Frequency-domain linear circuit engine (modified nodal analysis).

Networks are immutable element lists over integer nodes, node 0 being the
reference (ground plane / frame reference).  A solve at a frequency is a
pure function: unknowns are the node voltages 1..N-1 plus one current per
ideal voltage source or short, so the system dimension is
(node_count - 1) + number_of_sources_and_shorts.

Element stamps:
    resistor   1/R          capacitor  jwC
    inductor   1/(jwL)      mutual     inverted 2x2 inductance matrix
    source / short           extra row V_a - V_b = V with current unknown

Inductors are admittance-stamped (frequencies are strictly positive here),
which keeps the system size fixed; a coupled pair is stamped jointly from
the inverse of [[L1, M], [M, L2]] with M = k*sqrt(L1*L2), requiring k < 1.
"""
from __future__ import annotations

import cmath
import warnings
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from .errors import NetworkError, SingularSystemError, UnknownLabelError

RESIDUAL_RTOL = 1e-9


@dataclass(frozen=True)
class Resistor:
    nodes: tuple[int, int]
    ohms: float
    label: str


@dataclass(frozen=True)
class Inductor:
    nodes: tuple[int, int]
    henries: float
    label: str


@dataclass(frozen=True)
class Capacitor:
    nodes: tuple[int, int]
    farads: float
    label: str


@dataclass(frozen=True)
class MutualCoupling:
    """Coupling coefficient k between two inductors, referenced by label."""

    inductors: tuple[str, str]
    k: float
    label: str


@dataclass(frozen=True)
class VoltageSource:
    """Ideal source enforcing V(nodes[0]) - V(nodes[1]) = volts."""

    nodes: tuple[int, int]
    volts: complex
    label: str


@dataclass(frozen=True)
class Short:
    """Ideal short: a zero-volt source, giving direct access to its current."""

    nodes: tuple[int, int]
    label: str


Element = Resistor | Inductor | Capacitor | MutualCoupling | VoltageSource | Short


class PortShortedWarning(UserWarning):
    """Driving-point port is closed by ideal shorts; impedance reported as 0."""


def _two_port_nodes(el: Element) -> tuple[int, int] | None:
    if isinstance(el, MutualCoupling):
        return None
    return el.nodes


@dataclass(frozen=True)
class Network:
    """Immutable element network; node 0 is the reference."""

    node_count: int
    elements: tuple[Element, ...]

    def __post_init__(self):
        labels = set()
        inductors: dict[str, Inductor] = {}
        for el in self.elements:
            if el.label in labels:
                raise NetworkError(f"duplicate element label {el.label!r}")
            labels.add(el.label)
            if isinstance(el, Inductor):
                inductors[el.label] = el
        coupled: set[str] = set()
        for el in self.elements:
            nodes = _two_port_nodes(el)
            if nodes is not None:
                a, b = nodes
                for n in (a, b):
                    if not (0 <= n < self.node_count):
                        raise NetworkError(
                            f"element {el.label!r} endpoint {n} outside "
                            f"0..{self.node_count - 1}"
                        )
                if a == b:
                    raise NetworkError(f"element {el.label!r} connects a node to itself")
            if isinstance(el, Resistor) and not el.ohms > 0:
                raise NetworkError(f"resistor {el.label!r} must have R > 0, got {el.ohms}")
            if isinstance(el, Inductor) and not el.henries > 0:
                raise NetworkError(f"inductor {el.label!r} must have L > 0, got {el.henries}")
            if isinstance(el, Capacitor) and not el.farads > 0:
                raise NetworkError(f"capacitor {el.label!r} must have C > 0, got {el.farads}")
            if isinstance(el, VoltageSource) and not (
                abs(el.volts) < float("inf") and el.volts == el.volts
            ):
                raise NetworkError(f"source {el.label!r} amplitude must be finite")
            if isinstance(el, MutualCoupling):
                if not 0 <= el.k < 1:
                    raise NetworkError(
                        f"coupling {el.label!r} requires 0 <= k < 1, got {el.k}"
                    )
                for name in el.inductors:
                    if name not in inductors:
                        raise NetworkError(
                            f"coupling {el.label!r} references unknown inductor {name!r}"
                        )
                    if name in coupled:
                        raise NetworkError(
                            f"inductor {name!r} participates in more than one coupling"
                        )
                    coupled.add(name)

    def with_elements(self, extra: Iterable[Element]) -> "Network":
        return Network(self.node_count, self.elements + tuple(extra))

    def element(self, label: str) -> Element:
        for el in self.elements:
            if el.label == label:
                return el
        raise UnknownLabelError(f"no element labeled {label!r}")

    def sources(self) -> tuple[Element, ...]:
        return tuple(e for e in self.elements if isinstance(e, (VoltageSource, Short)))


class NetworkBuilder:
    """Incremental construction helper producing an immutable Network."""

    def __init__(self):
        self._elements: list[Element] = []
        self._node_count = 1  # ground is always present

    def node(self) -> int:
        n = self._node_count
        self._node_count += 1
        return n

    def _touch(self, *nodes: int):
        for n in nodes:
            self._node_count = max(self._node_count, n + 1)

    def resistor(self, a: int, b: int, ohms: float, label: str) -> None:
        self._touch(a, b)
        self._elements.append(Resistor((a, b), ohms, label))

    def inductor(self, a: int, b: int, henries: float, label: str) -> None:
        self._touch(a, b)
        self._elements.append(Inductor((a, b), henries, label))

    def capacitor(self, a: int, b: int, farads: float, label: str) -> None:
        self._touch(a, b)
        self._elements.append(Capacitor((a, b), farads, label))

    def mutual(self, l1: str, l2: str, k: float, label: str) -> None:
        self._elements.append(MutualCoupling((l1, l2), k, label))

    def source(self, a: int, b: int, volts: complex, label: str) -> None:
        self._touch(a, b)
        self._elements.append(VoltageSource((a, b), volts, label))

    def short(self, a: int, b: int, label: str) -> None:
        self._touch(a, b)
        self._elements.append(Short((a, b), label))

    def build(self, node_count: int | None = None) -> Network:
        return Network(node_count or self._node_count, tuple(self._elements))


@dataclass(frozen=True)
class MnaSystem:
    """Assembled complex MNA system A x = b.

    Unknown layout: x[0:node_count-1] are node voltages (node i at index
    i-1), followed by one branch current per source/short in element
    order.  Source row currents flow from nodes[0] to nodes[1] through
    the element.
    """

    matrix: np.ndarray
    rhs: np.ndarray
    node_count: int
    source_labels: tuple[str, ...]
    source_index: dict[str, int] = field(repr=False)

    def voltage_index(self, node: int) -> int:
        if not 1 <= node < self.node_count:
            raise IndexError(f"node {node} has no voltage unknown")
        return node - 1

    def current_index(self, label: str) -> int:
        if label not in self.source_index:
            raise UnknownLabelError(f"no source/short labeled {label!r}")
        return self.node_count - 1 + self.source_index[label]


@dataclass(frozen=True)
class AcSolution:
    """Node voltages (index = node, [0] is the 0V reference) and source currents."""

    node_voltages: np.ndarray
    source_currents: np.ndarray
    source_labels: tuple[str, ...]

    def voltage(self, node: int) -> complex:
        return complex(self.node_voltages[node])

    def source_current(self, label: str) -> complex:
        try:
            return complex(self.source_currents[self.source_labels.index(label)])
        except ValueError:
            raise UnknownLabelError(f"no source/short labeled {label!r}") from None


def _check_frequency(freq: float) -> float:
    if not freq > 0:
        raise NetworkError(f"frequency must be > 0 Hz, got {freq}")
    return 2.0 * cmath.pi * freq


def _coupling_pairs(network: Network):
    """Yield (coupling, inductor1, inductor2); single inductors come back alone."""
    by_label = {e.label: e for e in network.elements if isinstance(e, Inductor)}
    coupled: set[str] = set()
    pairs = []
    for el in network.elements:
        if isinstance(el, MutualCoupling):
            l1, l2 = (by_label[name] for name in el.inductors)
            coupled.update(el.inductors)
            pairs.append((el, l1, l2))
    singles = [ind for name, ind in by_label.items() if name not in coupled]
    return pairs, singles


def assemble(network: Network, freq: float) -> MnaSystem:
    """Stamp the complex admittance system for one frequency."""
    w = _check_frequency(freq)
    jw = 1j * w
    sources = network.sources()
    n = network.node_count - 1
    dim = n + len(sources)
    a = np.zeros((dim, dim), dtype=np.complex128)
    b = np.zeros(dim, dtype=np.complex128)

    def stamp(i: int, j: int, y: complex):
        """Admittance y between nodes i and j (0 = reference)."""
        if i:
            a[i - 1, i - 1] += y
        if j:
            a[j - 1, j - 1] += y
        if i and j:
            a[i - 1, j - 1] -= y
            a[j - 1, i - 1] -= y

    def stamp_cross(br_i: tuple[int, int], br_j: tuple[int, int], y: complex):
        """Current into branch i endpoints driven by branch j voltage."""
        ai, bi = br_i
        aj, bj = br_j
        for ni, si in ((ai, 1), (bi, -1)):
            if not ni:
                continue
            for nj, sj in ((aj, 1), (bj, -1)):
                if nj:
                    a[ni - 1, nj - 1] += si * sj * y

    for el in network.elements:
        if isinstance(el, Resistor):
            stamp(*el.nodes, 1.0 / el.ohms)
        elif isinstance(el, Capacitor):
            stamp(*el.nodes, jw * el.farads)

    pairs, singles = _coupling_pairs(network)
    for ind in singles:
        stamp(*ind.nodes, 1.0 / (jw * ind.henries))
    for coupling, l1, l2 in pairs:
        m = coupling.k * (l1.henries * l2.henries) ** 0.5
        det = l1.henries * l2.henries - m * m
        # branch currents [i1, i2] = Y @ [v1, v2] with Y = inv(jw [[L1 M],[M L2]])
        y11 = l2.henries / (jw * det)
        y22 = l1.henries / (jw * det)
        y12 = -m / (jw * det)
        stamp_cross(l1.nodes, l1.nodes, y11)
        stamp_cross(l2.nodes, l2.nodes, y22)
        stamp_cross(l1.nodes, l2.nodes, y12)
        stamp_cross(l2.nodes, l1.nodes, y12)

    source_index: dict[str, int] = {}
    for k, el in enumerate(sources):
        row = n + k
        source_index[el.label] = k
        pa, pb = el.nodes
        if pa:
            a[row, pa - 1] += 1.0
            a[pa - 1, row] += 1.0
        if pb:
            a[row, pb - 1] -= 1.0
            a[pb - 1, row] -= 1.0
        b[row] = el.volts if isinstance(el, VoltageSource) else 0.0

    return MnaSystem(a, b, network.node_count, tuple(e.label for e in sources), source_index)


class _UnionFind:
    def __init__(self, n: int):
        self.parent = list(range(n))

    def find(self, i: int) -> int:
        while self.parent[i] != i:
            self.parent[i] = self.parent[self.parent[i]]
            i = self.parent[i]
        return i

    def union(self, i: int, j: int) -> bool:
        """Join the sets; False if already connected."""
        ri, rj = self.find(i), self.find(j)
        if ri == rj:
            return False
        self.parent[ri] = rj
        return True


def _diagnose_topology(network: Network):
    """Raise SingularSystemError for floating subnetworks and source loops."""
    conn = _UnionFind(network.node_count)
    src_uf = _UnionFind(network.node_count)
    for el in network.elements:
        nodes = _two_port_nodes(el)
        if nodes is None:
            continue
        conn.union(*nodes)
        if isinstance(el, (VoltageSource, Short)):
            if not src_uf.union(*nodes):
                raise SingularSystemError(
                    f"loop of ideal sources/shorts closed by element {el.label!r}",
                    labels=(el.label,),
                )
    ground_root = conn.find(0)
    floating = [n for n in range(1, network.node_count) if conn.find(n) != ground_root]
    if floating:
        raise SingularSystemError(
            "floating subnetwork: node(s) "
            + ", ".join(map(str, floating[:8]))
            + (" ..." if len(floating) > 8 else "")
            + " have no path to the reference node",
            nodes=floating,
        )


def solve_ac(network: Network, freq: float) -> AcSolution:
    """Solve the network at one frequency; deterministic and pure.

    One step of iterative refinement follows the factorization; it costs a
    second solve but pushes the cancellation noise of balanced bridges well
    below the 1e-12 floors asserted elsewhere.
    """
    _diagnose_topology(network)
    system = assemble(network, freq)
    try:
        x = np.linalg.solve(system.matrix, system.rhs)
        x = x + np.linalg.solve(system.matrix, system.rhs - system.matrix @ x)
    except np.linalg.LinAlgError as exc:
        raise SingularSystemError(f"singular nodal system at {freq} Hz: {exc}") from exc
    rhs_norm = float(np.linalg.norm(system.rhs))
    if rhs_norm > 0.0:
        residual = float(np.linalg.norm(system.matrix @ x - system.rhs))
        if residual > RESIDUAL_RTOL * rhs_norm:
            raise SingularSystemError(
                f"ill-conditioned nodal system at {freq} Hz: relative residual "
                f"{residual / rhs_norm:.3e} exceeds {RESIDUAL_RTOL:.0e}"
            )
    n = network.node_count
    voltages = np.concatenate(([0.0 + 0.0j], x[: n - 1]))
    if not np.all(np.isfinite(x)):
        raise SingularSystemError(f"non-finite solution at {freq} Hz")
    return AcSolution(voltages, x[n - 1 :].copy(), system.source_labels)


def branch_current(
    solution: AcSolution, network: Network, label: str, freq: float
) -> complex:
    """Current through the labeled element, oriented nodes[0] -> nodes[1]."""
    w = _check_frequency(freq)
    jw = 1j * w
    el = network.element(label)
    if isinstance(el, (VoltageSource, Short)):
        return solution.source_current(label)
    if isinstance(el, MutualCoupling):
        raise UnknownLabelError(f"{label!r} is a coupling, not a current-carrying branch")
    va = solution.voltage(el.nodes[0])
    vb = solution.voltage(el.nodes[1])
    if isinstance(el, Resistor):
        return (va - vb) / el.ohms
    if isinstance(el, Capacitor):
        return (va - vb) * jw * el.farads
    # inductor: account for a possible coupled partner
    pairs, _ = _coupling_pairs(network)
    for coupling, l1, l2 in pairs:
        if label in (l1.label, l2.label):
            m = coupling.k * (l1.henries * l2.henries) ** 0.5
            det = l1.henries * l2.henries - m * m
            v1 = solution.voltage(l1.nodes[0]) - solution.voltage(l1.nodes[1])
            v2 = solution.voltage(l2.nodes[0]) - solution.voltage(l2.nodes[1])
            if label == l1.label:
                return (l2.henries * v1 - m * v2) / (jw * det)
            return (l1.henries * v2 - m * v1) / (jw * det)
    return (va - vb) / (jw * el.henries)


def driving_point_impedance(
    network: Network, port: tuple[int, int], freq: float, probe_label: str = "__probe__"
) -> complex:
    """Impedance seen between two nodes, measured with a 1 V probe source.

    A port already closed by ideal shorts reports 0 ohms and emits
    PortShortedWarning instead of failing on the resulting source loop.
    """
    pa, pb = port
    if pa == pb:
        raise NetworkError("port nodes must be distinct")
    uf = _UnionFind(network.node_count)
    for el in network.elements:
        if isinstance(el, (Short, VoltageSource)):
            uf.union(*el.nodes)
    if uf.find(pa) == uf.find(pb):
        warnings.warn(
            f"port ({pa}, {pb}) is closed by ideal shorts/sources; reporting 0 ohm",
            PortShortedWarning,
            stacklevel=2,
        )
        return 0j
    probed = network.with_elements([VoltageSource((pa, pb), 1.0 + 0j, probe_label)])
    solution = solve_ac(probed, freq)
    i_through = solution.source_current(probe_label)
    if i_through == 0:
        raise SingularSystemError(
            f"port ({pa}, {pb}) draws no current at {freq} Hz (open circuit)",
            nodes=(pa, pb),
        )
    # current delivered into the port from the + terminal is the negative of
    # the a->b through-element current
    return -1.0 / i_through

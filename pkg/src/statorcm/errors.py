"""Error types shared across the package.

Every error carries a short machine-readable ``code`` next to the human
readable message so callers (and the CLI) can dispatch without string
matching.
"""
from __future__ import annotations


class StatorCmError(Exception):
    """Base class; ``code`` is a stable machine-readable identifier."""

    code = "error"

    def __init__(self, message: str):
        super().__init__(message)
        self.message = message


class NetworkError(StatorCmError):
    """Invalid network construction (bad endpoints, bad element values)."""

    code = "network"


class SingularSystemError(StatorCmError):
    """The nodal system has no unique solution.

    Carries the offending node/element labels when they could be
    identified (floating subnetwork, loop of ideal sources/shorts).
    """

    code = "singular"

    def __init__(self, message: str, *, nodes=(), labels=()):
        super().__init__(message)
        self.nodes = tuple(nodes)
        self.labels = tuple(labels)


class UnknownLabelError(StatorCmError):
    code = "unknown-label"


class UnmappedTapError(StatorCmError):
    """Requested (phase, turn) is not a declared tap of the winding."""

    code = "unmapped-tap"


class FaultSyntaxError(StatorCmError):
    """Fault grammar violation; ``position`` is the 0-based offset."""

    code = "fault-syntax"

    def __init__(self, message: str, position: int | None = None):
        super().__init__(message)
        self.position = position


class DivergentCurrentError(StatorCmError):
    """Total loop impedance vanished at ``freq_hz``."""

    code = "divergent-current"

    def __init__(self, message: str, freq_hz: float):
        super().__init__(message)
        self.freq_hz = freq_hz


class GridError(StatorCmError):
    """Frequency grids absent, misaligned or out of interpolation range."""

    code = "grid"


class ConfigError(StatorCmError):
    """Configuration file parse or validation failure."""

    code = "config"


class CsvFormatError(StatorCmError):
    """Malformed CSV input; ``line`` is 1-based."""

    code = "csv-format"

    def __init__(self, message: str, line: int | None = None):
        super().__init__(message)
        self.line = line

"""Frequency-domain stator-winding-fault analysis toolkit.

Builds a distributed ladder model of a star-connected induction-motor
stator, injects emulated winding shorts, and quantifies their signature on
the common-mode impedance, the CM current ratio, and DM-to-CM mode
conversion under trapezoidal differential excitation.
"""
from .circuit import (
    AcSolution,
    Capacitor,
    Inductor,
    MutualCoupling,
    Network,
    NetworkBuilder,
    PortShortedWarning,
    Resistor,
    Short,
    VoltageSource,
    assemble,
    branch_current,
    driving_point_impedance,
    solve_ac,
)
from .cm import (
    CMPathModel,
    DEFAULT_GRID,
    FrequencyGrid,
    ImpedanceSweep,
    ParallelRC,
    RatioCurve,
    SeriesRLC,
    TabulatedImpedance,
    cm_current,
    cm_impedance_sweep,
    deviation_db,
    first_impedance_minimum,
    ratio_r,
)
from .dm import (
    DmBench,
    HarmonicSpectrum,
    IncrementSummary,
    TrapezoidExcitation,
    build_dm_bench,
    cm_spectrum,
    dm_to_cm_transfer,
    increment_db,
    is_balanced,
    trapezoid_harmonics,
)
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
from .faults import (
    FaultSpec,
    PhaseToGround,
    PhaseToPhase,
    TurnToTurn,
    apply_fault,
    parse_fault,
)
from .motor import (
    AsymmetrySpec,
    MotorModel,
    SectionParams,
    SymmetryReport,
    WindingSpec,
    build_motor,
    tap_node,
    validate_symmetry,
)

__version__ = "0.1.0"

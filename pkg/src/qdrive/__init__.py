"""Two-level quantum driving protocols: speed-limited, locally adiabatic and transitionless."""

__version__ = "0.1.0"

from .adiabatic import AdiabaticFrame, counteradiabatic_coefficient, eigensystem, ground_state
from .analysis import (
    final_fidelity,
    lz_reference_fidelity,
    min_time_at_coupling,
    quantum_speed_limit,
    robustness_scan,
    time_to_fidelity,
)
from .core import (
    KET0,
    KET1,
    ControlSample,
    ImpulseRotation,
    ProtocolSchedule,
    QDriveError,
    make_custom_schedule,
    make_state,
    overlap2,
    sample,
)
from .propagator import PropagatorConfig, Trajectory, apply_impulse, propagate
from .protocols import (
    composite_pulse,
    counterdiabatic,
    lz_linear,
    roland_cerf,
    superadiabatic_linear,
    superadiabatic_tangent,
    superadiabatic_transform,
    tangent_base,
)

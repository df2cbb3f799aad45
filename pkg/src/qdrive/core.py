"""Unit conventions, two-level states and control schedules.

Units
-----
Energies are measured in units of the recoil energy ``hbar * omega_rec`` and
times in units of ``1 / omega_rec`` with ``hbar = 1``. Every schedule is
parametrized by the dimensionless protocol time ``tau = t / T`` on ``[0, 1]``;
physical time is recovered as ``t = tau * T``.

The Hamiltonian is ``H = gamma * sz + omega * sx (+ omega_y * sy)`` in the
diabatic basis ``{|0>, |1>}``. Sign convention: ``gamma(0) = -2``,
``gamma(1) = +2`` and ``omega >= 0`` so the ground state at ``tau = 0`` is
predominantly ``|0>``.

Note on the composite pulse endpoints: the published endpoint values read
``-Gamma_0`` at ``tau = 0`` together with ``Gamma_0 = -2``, which literally
gives ``+2`` at the start. This package keeps ``gamma(0) = -2`` throughout,
consistent with the level-crossing picture.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Literal, Optional

import numpy as np

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
IDENTITY = np.eye(2, dtype=complex)

NORM_TOL = 1e-12

ScalarFn = Callable[[float], float]


class QDriveError(ValueError):
    """Base class for all errors raised by this package."""


class InvalidParameterError(QDriveError):
    pass


class DomainError(QDriveError):
    pass


class DegenerateHamiltonianError(QDriveError):
    pass


class DerivativeUnavailableError(QDriveError):
    pass


class SingularTransformError(QDriveError):
    pass


class NonConvergenceError(QDriveError):
    """Raised when doubling the step count moves a result beyond tolerance."""

    def __init__(self, message: str, coarse: float, fine: float):
        super().__init__(message)
        self.coarse = coarse
        self.fine = fine


class BracketError(QDriveError):
    pass


# --------------------------------------------------------------------------
# states


def make_state(c0: complex, c1: complex) -> np.ndarray:
    """Return the normalized state ``c0|0> + c1|1>`` as a complex 2-vector."""
    psi = np.array([c0, c1], dtype=complex)
    norm = np.linalg.norm(psi)
    if norm == 0:
        raise InvalidParameterError("zero vector is not a quantum state")
    return psi / norm


KET0 = make_state(1, 0)
KET1 = make_state(0, 1)


def as_state(psi) -> np.ndarray:
    psi = np.asarray(psi, dtype=complex).reshape(2)
    if abs(np.linalg.norm(psi) - 1.0) > 1e-9:
        raise InvalidParameterError("state is not normalized")
    return psi


def overlap2(a: np.ndarray, b: np.ndarray) -> float:
    """Phase-insensitive squared overlap ``|<a|b>|**2``."""
    return float(abs(np.vdot(a, b)) ** 2)


def orthogonal(psi: np.ndarray) -> np.ndarray:
    """A state orthogonal to ``psi`` (unique up to global phase)."""
    return np.array([-np.conj(psi[1]), np.conj(psi[0])], dtype=complex)


def z_rotation(area: float) -> np.ndarray:
    """Exact unitary ``exp(-i * area * sz)``."""
    return np.diag([np.exp(-1j * area), np.exp(1j * area)])


# --------------------------------------------------------------------------
# controls


@dataclass(frozen=True)
class ControlSample:
    gamma: float
    omega: float
    omega_y: float = 0.0

    def hamiltonian(self) -> np.ndarray:
        return self.gamma * SIGMA_Z + self.omega * SIGMA_X + self.omega_y * SIGMA_Y


@dataclass(frozen=True)
class ImpulseRotation:
    """Instantaneous z-rotation ``exp(-i * area * sz)`` at a protocol endpoint.

    ``area`` is the signed pulse area ``int gamma dt``; the Bloch vector turns
    about z by twice the area.
    """

    location: Literal["start", "end"]
    area: float
    axis: Literal["z"] = "z"

    def __post_init__(self):
        if self.location not in ("start", "end"):
            raise InvalidParameterError(f"impulse location must be start/end, got {self.location!r}")
        if self.axis != "z":
            raise InvalidParameterError("only z impulses are supported")
        if not np.isfinite(self.area):
            raise InvalidParameterError("impulse area must be finite")

    def unitary(self) -> np.ndarray:
        return z_rotation(self.area)


SCHEDULE_KINDS = (
    "lz_linear",
    "roland_cerf",
    "composite",
    "superadiabatic_linear",
    "superadiabatic_tangent",
    "tangent",
    "lz_omega_only",
    "counterdiabatic",
    "custom",
)


@dataclass(frozen=True)
class ProtocolSchedule:
    """Closed-form control schedule on ``tau in [0, 1]``.

    ``gamma`` and ``omega`` (and optionally ``omega_y``) map ``tau`` to the
    coefficients of ``sz``, ``sx`` and ``sy``. The ``*_d`` / ``*_dd`` callables
    are first and second derivatives with respect to ``tau``; when absent,
    consumers fall back to central differences.

    ``reference`` is the schedule whose instantaneous ground state defines the
    fidelity (the untransformed Hamiltonian for superadiabatic kinds), and
    ``frame_area(tau)`` is the z-area that maps the driven state back into the
    frame of that reference before measuring. ``breakpoints`` lists interior
    ``tau`` values where the controls jump; propagators align their grid to
    them.
    """

    kind: str
    T: float
    gamma: ScalarFn
    omega: ScalarFn
    omega_y: Optional[ScalarFn] = None
    impulses: tuple[ImpulseRotation, ...] = ()
    params: dict = field(default_factory=dict)
    gamma_d: Optional[ScalarFn] = None
    omega_d: Optional[ScalarFn] = None
    gamma_dd: Optional[ScalarFn] = None
    omega_dd: Optional[ScalarFn] = None
    reference: Optional["ProtocolSchedule"] = None
    frame_area: Optional[ScalarFn] = None
    breakpoints: tuple[float, ...] = ()
    warnings: tuple[str, ...] = ()

    def __post_init__(self):
        if self.kind not in SCHEDULE_KINDS:
            raise InvalidParameterError(f"unknown schedule kind {self.kind!r}")
        if not (np.isfinite(self.T) and self.T > 0):
            raise InvalidParameterError(f"duration T must be positive, got {self.T}")
        if any(not (0.0 < b < 1.0) for b in self.breakpoints):
            raise InvalidParameterError("breakpoints must lie strictly inside (0, 1)")

    @property
    def start_impulses(self) -> tuple[ImpulseRotation, ...]:
        return tuple(p for p in self.impulses if p.location == "start")

    @property
    def end_impulses(self) -> tuple[ImpulseRotation, ...]:
        return tuple(p for p in self.impulses if p.location == "end")

    @property
    def fidelity_reference(self) -> "ProtocolSchedule":
        return self.reference if self.reference is not None else self

    def sample(self, tau: float) -> ControlSample:
        return sample(self, tau)


def make_custom_schedule(
    gamma_fn: ScalarFn,
    omega_fn: ScalarFn,
    T: float,
    impulses=(),
    omega_y_fn: Optional[ScalarFn] = None,
) -> ProtocolSchedule:
    """Wrap user-supplied control functions into a schedule.

    No smoothness is assumed; derivatives are taken numerically if needed.
    """
    if not (np.isfinite(T) and T > 0):
        raise InvalidParameterError(f"duration T must be positive, got {T}")
    return ProtocolSchedule(
        kind="custom",
        T=float(T),
        gamma=gamma_fn,
        omega=omega_fn,
        omega_y=omega_y_fn,
        impulses=tuple(impulses),
    )


def sample(schedule: ProtocolSchedule, tau: float) -> ControlSample:
    """Controls at ``tau``. Impulses are not folded into the sample."""
    if not (0.0 <= tau <= 1.0):
        raise DomainError(f"tau={tau} outside [0, 1]")
    oy = schedule.omega_y(tau) if schedule.omega_y is not None else 0.0
    return ControlSample(float(schedule.gamma(tau)), float(schedule.omega(tau)), float(oy))

"""Instantaneous eigensystem of ``gamma * sz + omega * sx``."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import (
    ControlSample,
    DegenerateHamiltonianError,
    DerivativeUnavailableError,
    DomainError,
    ProtocolSchedule,
    sample,
)

FD_STEP = 1e-6  # in tau, i.e. 1e-6 * T in physical time


@dataclass(frozen=True)
class AdiabaticFrame:
    ground: np.ndarray
    excited: np.ndarray
    energy_gap: float
    phi: float

    @property
    def ground_energy(self) -> float:
        return -0.5 * self.energy_gap

    @property
    def excited_energy(self) -> float:
        return 0.5 * self.energy_gap


def mixing_angle(gamma, omega):
    """Mixing angle on the continuous branch (0, pi).

    ``phi -> pi`` for ``gamma -> -inf``, ``pi/2`` at the crossing and ``-> 0``
    for ``gamma -> +inf``. Works elementwise on arrays.
    """
    return np.arctan2(omega, gamma)


def ground_state(gamma: float, omega: float) -> np.ndarray:
    return eigensystem(ControlSample(gamma, omega)).ground


def eigensystem(s: ControlSample) -> AdiabaticFrame:
    """Eigenpair of ``gamma * sz + omega * sx``.

    Phase convention: the ``|1>`` component of the ground state is real and
    non-negative (and the ``|0>`` component is positive when it vanishes).
    """
    g, w = s.gamma, s.omega
    if g == 0.0 and w == 0.0:
        raise DegenerateHamiltonianError("gamma = omega = 0 has no unique eigenbasis")
    phi = float(mixing_angle(g, w))
    sh, ch = np.sin(phi / 2), np.cos(phi / 2)
    if ch == 0.0 or (g < 0 and w == 0.0):
        ground = np.array([1.0, 0.0], dtype=complex)
        excited = np.array([0.0, 1.0], dtype=complex)
    else:
        ground = np.array([-sh, ch], dtype=complex)
        excited = np.array([ch, sh], dtype=complex)
    return AdiabaticFrame(ground, excited, 2.0 * float(np.hypot(g, w)), phi)


def _central(fn, tau: float, h: float = FD_STEP) -> float:
    """Central difference in tau; one-sided second order at the ends.

    A kink (left and right slopes disagreeing) raises, since the derivative
    then does not exist.
    """
    if tau - h < 0.0 or tau + h > 1.0:
        s = h if tau - h < 0.0 else -h
        f0 = fn(tau)
        # differences first, so constant controls give exactly zero
        return (4 * (fn(tau + s) - f0) - (fn(tau + 2 * s) - f0)) / (2 * s)
    f0, fp, fm = fn(tau), fn(tau + h), fn(tau - h)
    right, left = (fp - f0) / h, (f0 - fm) / h
    scale = max(abs(right), abs(left), 1.0)
    if abs(right - left) > 1e-2 * scale:
        raise DerivativeUnavailableError(f"control is not differentiable at tau={tau}")
    return (fp - fm) / (2 * h)


def tau_derivatives(schedule: ProtocolSchedule, tau: float) -> tuple[float, float, float, float]:
    """``(gamma, omega, d gamma/d tau, d omega/d tau)`` at ``tau``."""
    if not (0.0 <= tau <= 1.0):
        raise DomainError(f"tau={tau} outside [0, 1]")
    g, w = float(schedule.gamma(tau)), float(schedule.omega(tau))
    gd = schedule.gamma_d(tau) if schedule.gamma_d else _central(schedule.gamma, tau)
    wd = schedule.omega_d(tau) if schedule.omega_d else _central(schedule.omega, tau)
    return g, w, float(gd), float(wd)


def counteradiabatic_coefficient(schedule: ProtocolSchedule, tau: float) -> float:
    """Coefficient of ``sy`` that makes the evolution transitionless.

    Returns ``(1/2) d phi/dt = (gamma * omega' - omega * gamma') / (2 (gamma^2 + omega^2))``
    with derivatives taken in physical time ``t = tau * T``.
    """
    g, w, gd, wd = tau_derivatives(schedule, tau)
    if w <= 0:
        raise DomainError(f"coupling must be positive, got omega={w} at tau={tau}")
    T = schedule.T
    return (g * wd - w * gd) / (2.0 * T * (g * g + w * w))

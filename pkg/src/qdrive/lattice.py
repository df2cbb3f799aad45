"""Optical-lattice control signals for a two-level protocol.

In the lattice realization the coupling is set by the lattice depth,
``omega = V0 / 4``, and the level splitting by the quasimomentum,
``gamma = 4 (q - 1/2)`` (natural units). An explicit ``sy`` term corresponds
to a second lattice shifted by a quarter period; the two add to one lattice
of amplitude ``2 sqrt((V0/2)^2 + (2 alpha)^2)`` displaced by
``beta d_L / (2 pi)`` with ``beta = arctan(4 alpha / V0)``. Moving that
displacement costs a quasimomentum correction ``q' = q - beta_dot / (8 omega_rec)``.
"""
from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .core import DomainError, ProtocolSchedule, SIGMA_X, SIGMA_Y
from .protocols import correction_angle_rate

DEFAULT_RECOIL_FREQUENCY = 2 * math.pi * 3.15e3  # rad/s
DEFAULT_SAMPLES = 100_000
CSV_COLUMNS = ("t_seconds", "V0_recoils", "q", "q_prime", "beta")


@dataclass
class LatticeControls:
    """Sampled lattice waveforms.

    Times ``t`` are in units of ``1 / omega_rec``; depths and amplitudes in
    recoil energies; quasimomenta in units of the Brillouin-zone width;
    ``displacement`` in lattice periods.
    """

    tau: np.ndarray
    t: np.ndarray
    depth: np.ndarray
    quasimomentum: np.ndarray
    quasimomentum_corrected: np.ndarray
    beta: np.ndarray
    amplitude: np.ndarray
    recoil_frequency: float = DEFAULT_RECOIL_FREQUENCY
    impulses: list = field(default_factory=list)
    descriptor: dict = field(default_factory=dict)

    @property
    def t_seconds(self) -> np.ndarray:
        return self.t / self.recoil_frequency

    @property
    def displacement(self) -> np.ndarray:
        return self.beta / (2 * math.pi)

    def gamma(self) -> np.ndarray:
        return 4.0 * (self.quasimomentum - 0.5)

    def omega(self) -> np.ndarray:
        return self.depth / 4.0

    def gamma_corrected(self) -> np.ndarray:
        return 4.0 * (self.quasimomentum_corrected - 0.5)

    def omega_corrected(self) -> np.ndarray:
        return self.amplitude / 4.0


def to_lattice_controls(
    schedule: ProtocolSchedule,
    samples: int = DEFAULT_SAMPLES,
    recoil_frequency: float = DEFAULT_RECOIL_FREQUENCY,
    slew_duration: float = 0.0,
) -> LatticeControls:
    """Sample depth, quasimomentum and displacement for ``schedule``.

    Impulses are listed in ``impulses``; with ``slew_duration > 0`` (natural
    time units) each is also folded into ``q_prime`` as a rectangular pulse of
    that length at its endpoint.
    """
    if samples < 2:
        raise DomainError("need at least two samples")
    tau = np.linspace(0.0, 1.0, samples)
    t = tau * schedule.T
    gamma = np.array([schedule.gamma(x) for x in tau])
    omega = np.array([schedule.omega(x) for x in tau])
    if np.any(omega <= 0.0):
        raise DomainError("lattice depth must stay positive (omega > 0) for the displacement to be defined")
    depth = 4.0 * omega
    q = gamma / 4.0 + 0.5

    if schedule.omega_y is not None:
        alpha = np.array([schedule.omega_y(x) for x in tau])
        amplitude = 2.0 * np.sqrt((depth / 2.0) ** 2 + (2.0 * alpha) ** 2)
        beta = np.arctan(4.0 * alpha / depth)
        base = schedule.reference
        if schedule.kind == "counterdiabatic" and base is not None:
            beta_dot = np.array([correction_angle_rate(base, x) for x in tau])
        else:
            beta_dot = np.gradient(beta, t)
        q_prime = q - beta_dot / 8.0
        jumps = [
            {"location": "start", "area": float(-0.5 * beta[0])},
            {"location": "end", "area": float(0.5 * beta[-1])},
        ]
    else:
        amplitude = depth.copy()
        beta = np.zeros_like(q)
        q_prime = q.copy()
        jumps = []

    impulses = [{"location": p.location, "area": p.area, "source": "impulse"} for p in schedule.impulses]
    impulses += [{**j, "source": "displacement_jump"} for j in jumps if j["area"] != 0.0]
    if slew_duration > 0.0:
        for imp in impulses:
            window = t <= slew_duration if imp["location"] == "start" else t >= t[-1] - slew_duration
            q_prime = q_prime + np.where(window, imp["area"] / slew_duration / 4.0, 0.0)
        for imp in impulses:
            imp["slew_duration"] = slew_duration

    descriptor = {"kind": schedule.kind, "T": schedule.T, **_jsonable(schedule.params)}
    return LatticeControls(
        tau, t, depth, q, q_prime, beta, amplitude, recoil_frequency, impulses, descriptor
    )


def _jsonable(params: dict) -> dict:
    out = {}
    for k, v in params.items():
        if isinstance(v, (bool, int, str)) or v is None:
            out[k] = v
        elif isinstance(v, float):
            out[k] = v if math.isfinite(v) else str(v)
    return out


def write_waveform(controls: LatticeControls, csv_path, json_path=None) -> tuple[Path, Path]:
    """Write the CSV waveform and its JSON metadata sidecar."""
    csv_path = Path(csv_path)
    json_path = Path(json_path) if json_path else csv_path.with_suffix(".json")
    with csv_path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_COLUMNS)
        for row in zip(
            controls.t_seconds,
            controls.depth,
            controls.quasimomentum,
            controls.quasimomentum_corrected,
            controls.beta,
        ):
            writer.writerow([repr(float(x)) for x in row])
    meta = {
        "units": {
            "t_seconds": "s",
            "V0_recoils": "E_rec",
            "q": "Brillouin-zone width",
            "q_prime": "Brillouin-zone width",
            "beta": "rad (displacement beta*d_L/2pi)",
        },
        "recoil_frequency_rad_per_s": controls.recoil_frequency,
        "samples": int(len(controls.t)),
        "protocol": controls.descriptor,
        "impulses": controls.impulses,
    }
    json_path.write_text(json.dumps(meta, indent=2, sort_keys=True))
    return csv_path, json_path


def read_waveform(csv_path) -> dict[str, np.ndarray]:
    data = np.genfromtxt(csv_path, delimiter=",", names=True)
    return {name: np.asarray(data[name]) for name in data.dtype.names}


def displacement_unitary(delta_x: float, lattice_spacing: float = 1.0) -> np.ndarray:
    """Translation by ``delta_x`` in the plane-wave pair basis.

    A quarter-period shift gives ``diag(exp(i pi/4), exp(-i pi/4))``.
    """
    theta = math.pi * delta_x / lattice_spacing
    return np.diag([np.exp(1j * theta), np.exp(-1j * theta)])


def displacement_unitary_check(tol: float = 1e-15) -> dict:
    """Self-test of the basis conventions: conjugating ``sx`` by translations."""
    cases = {
        "identity": (0.0, SIGMA_X),
        "quarter_period": (0.25, SIGMA_Y),
        "half_period": (0.5, -SIGMA_X),
    }
    errors = {}
    for name, (dx, expected) in cases.items():
        u = displacement_unitary(dx)
        errors[name] = float(np.max(np.abs(u.conj().T @ SIGMA_X @ u - expected)))
    return {"errors": errors, "tolerance": tol, "passed": all(e <= tol for e in errors.values())}

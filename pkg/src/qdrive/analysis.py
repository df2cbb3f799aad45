"""Fidelities, the speed-limit bound, time-to-fidelity searches and robustness scans."""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import NamedTuple, Sequence

import numpy as np

from . import protocols
from .adiabatic import ground_state
from .core import (
    BracketError,
    InvalidParameterError,
    ProtocolSchedule,
    as_state,
)
from .propagator import PropagatorConfig, propagate

FIDELITY_TOL = 1e-4
BRACKET_WIDTH = 1e-3
GOLDEN_RTOL = 1e-8


@dataclass(frozen=True)
class SpeedLimitResult:
    t_qs: float
    overlap: float
    omega: float


@dataclass(frozen=True)
class RobustnessScan:
    axis: str
    deviations: np.ndarray
    fidelities: np.ndarray
    skipped: np.ndarray
    model: str = "miscalibrated"


class MinTime(NamedTuple):
    T_min: float
    omega_star: float


def _initial_ground(schedule: ProtocolSchedule) -> np.ndarray:
    ref = schedule.fidelity_reference
    return ground_state(ref.gamma(0.0), ref.omega(0.0))


def final_fidelity(schedule: ProtocolSchedule, initial=None, config: PropagatorConfig | None = None) -> float:
    """Ground-state population at ``tau = 1`` after propagating ``schedule``.

    ``initial`` defaults to the ``tau = 0`` adiabatic ground state of the
    reference Hamiltonian (the untransformed one for superadiabatic kinds).
    By default the result is checked by a run at twice the step count and a
    :class:`~qdrive.core.NonConvergenceError` carries both estimates if they
    disagree.
    """
    if config is None:
        config = PropagatorConfig(record_trajectory=False, convergence_check=True, raise_on_nonconvergence=True)
    psi0 = _initial_ground(schedule) if initial is None else as_state(initial)
    return propagate(schedule, psi0, config).final_fidelity


def quantum_speed_limit(initial, final, omega: float) -> SpeedLimitResult:
    """``arccos|<final|initial>| / omega``."""
    if not omega > 0:
        raise InvalidParameterError(f"omega must be positive, got {omega}")
    ov = min(abs(np.vdot(as_state(final), as_state(initial))), 1.0)
    return SpeedLimitResult(math.acos(ov) / omega, float(ov), float(omega))


def endpoint_speed_limit(omega: float) -> SpeedLimitResult:
    """Speed limit between the adiabatic ground states at gamma = -2 and +2."""
    return quantum_speed_limit(
        ground_state(protocols.GAMMA_START, omega), ground_state(protocols.GAMMA_END, omega), omega
    )


def lz_reference_fidelity(omega: float, T: float) -> float:
    """``1 - exp(-pi T omega^2 / 4)``.

    The exponential itself is the Landau-Zener probability of staying in the
    diabatic state; the adiabatic ground-state fidelity is its complement. The
    formula assumes an infinite sweep, so at ``T -> 0`` it gives 0 rather than
    the true sudden-limit value (the overlap of the endpoint ground states).
    """
    return -math.expm1(-math.pi * T * omega * omega / 4.0)


def _family_builder(family: str, omega: float):
    if family == "lz_linear":
        return lambda T: protocols.lz_linear(omega, T)
    if family == "roland_cerf":
        return lambda T: protocols.roland_cerf(omega, protocols.roland_cerf_epsilon(omega, T))
    raise InvalidParameterError(
        f"time_to_fidelity supports lz_linear and roland_cerf, not {family!r}"
    )


def time_to_fidelity(
    family: str,
    omega: float,
    target_fidelity: float = 0.9,
    config: PropagatorConfig | None = None,
    t_max: float = 1e4,
) -> float:
    """Shortest duration at which ``final_fidelity`` first reaches ``target_fidelity``.

    A geometric scan from well below the speed limit brackets the first
    crossing, then bisection shrinks the bracket to ``BRACKET_WIDTH`` and
    ``|F - target| <= FIDELITY_TOL``. For Roland-Cerf the duration is mapped
    to epsilon through ``T(eps)``.
    """
    if not (0.0 < target_fidelity < 1.0):
        raise InvalidParameterError("target fidelity must lie in (0, 1)")
    if not omega > 0:
        raise InvalidParameterError(f"omega must be positive, got {omega}")
    make = _family_builder(family, omega)
    config = config or PropagatorConfig(record_trajectory=False)

    def fid(T):
        s = make(T)
        return propagate(s, _initial_ground(s), config).final_fidelity

    lo = 0.25 * endpoint_speed_limit(omega).t_qs
    if family == "roland_cerf":
        lo = max(lo, 1.001 * protocols.roland_cerf_duration(omega, 1.0))  # epsilon < 1
    f_lo = fid(lo)
    if f_lo >= target_fidelity:
        raise BracketError(f"target {target_fidelity} already reached at T={lo}")
    hi = lo
    while True:
        hi = lo * 1.1
        if hi > t_max:
            raise BracketError(f"target {target_fidelity} not reached below T={t_max}")
        f_hi = fid(hi)
        if f_hi >= target_fidelity:
            break
        lo, f_lo = hi, f_hi

    while hi - lo > BRACKET_WIDTH or f_hi - target_fidelity > FIDELITY_TOL:
        mid = 0.5 * (lo + hi)
        f_mid = fid(mid)
        if f_mid >= target_fidelity:
            hi, f_hi = mid, f_mid
        else:
            lo, f_lo = mid, f_mid
        if hi - lo < 1e-12 * hi:
            break
    if abs(fid(hi) - target_fidelity) > FIDELITY_TOL:
        raise BracketError("bisection did not settle within tolerance")
    return hi


def lz_time_seed(omega: float, target_fidelity: float) -> float:
    """Duration at which :func:`lz_reference_fidelity` equals the target."""
    return -4.0 * math.log1p(-target_fidelity) / (math.pi * omega * omega)


def _perturbed(kind: str, params: dict, axis: str, d: float, model: str):
    """Return ``(schedule, reference)`` for one deviation."""
    nominal = protocols.build(kind, **params)
    if model == "redesigned":
        key = "T" if axis == "duration" else "omega"
        schedule = protocols.build(kind, **{**params, key: params[key] * (1.0 + d)})
        return schedule, nominal.fidelity_reference
    if axis == "duration":
        return replace(nominal, T=nominal.T * (1.0 + d)), nominal.fidelity_reference
    scale = 1.0 + d
    oy = nominal.omega_y
    ref0 = nominal.fidelity_reference
    ref = replace(ref0, omega=lambda tau: scale * ref0.omega(tau), omega_d=None, omega_dd=None)
    schedule = replace(
        nominal,
        omega=lambda tau: scale * nominal.omega(tau),
        omega_y=None if oy is None else (lambda tau: scale * oy(tau)),
        reference=ref if nominal.reference is not None else None,
        omega_d=None,
        omega_dd=None,
    )
    return schedule, ref


def robustness_scan(
    kind: str,
    base_params: dict,
    axis: str,
    deviations: Sequence[float],
    model: str = "miscalibrated",
    config: PropagatorConfig | None = None,
    workers: int = 1,
) -> RobustnessScan:
    """Final fidelity under relative errors ``d`` in duration or coupling.

    ``model="miscalibrated"`` runs the nominal waveform with the knob off by
    ``(1 + d)``: the duration is stretched, or every transverse coupling
    (lattice depth) is scaled, in which case preparation and measurement use the
    ground states of the scaled Hamiltonian. ``model="redesigned"`` rebuilds
    the protocol, corrections included, for the perturbed parameter and
    measures against the nominal ground states.

    Deviations with ``1 + d <= 0`` are skipped and reported as NaN.
    """
    if axis not in ("duration", "coupling"):
        raise InvalidParameterError(f"axis must be duration or coupling, got {axis!r}")
    if model not in ("miscalibrated", "redesigned"):
        raise InvalidParameterError(f"unknown robustness model {model!r}")
    devs = np.asarray(deviations, dtype=float)
    if not np.all(np.isfinite(devs)):
        raise InvalidParameterError("deviations must be finite")
    config = config or PropagatorConfig(record_trajectory=False)

    def one(d):
        if 1.0 + d <= 0.0:
            return math.nan
        schedule, ref = _perturbed(kind, dict(base_params), axis, d, model)
        psi0 = ground_state(ref.gamma(0.0), ref.omega(0.0))
        traj = propagate(replace(schedule, reference=ref), psi0, config)
        return traj.final_fidelity

    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            fids = list(pool.map(one, devs))
    else:
        fids = [one(d) for d in devs]
    fids = np.array(fids)
    return RobustnessScan(axis, devs, fids, np.isnan(fids), model)


def golden_section(f, lo: float, hi: float, rtol: float = GOLDEN_RTOL, max_iter: int = 500):
    """Minimize a unimodal ``f`` on ``[lo, hi]``; returns ``(x, f(x))``."""
    inv = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c, d = b - inv * (b - a), a + inv * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(max_iter):
        if abs(b - a) <= rtol * max(abs(c), abs(d), 1e-300):
            break
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - inv * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + inv * (b - a)
            fd = f(d)
    return (c, fc) if fc < fd else (d, fd)


def min_time_at_coupling(omega_prime: float, family: str = "superadiabatic_tangent") -> MinTime:
    """Shortest tangent-protocol duration whose corrected coupling equals ``omega_prime``.

    ``T(omega) = arctan(2/omega) / sqrt(omega_prime^2 - omega^2)`` on
    ``0 < omega < omega_prime`` is minimized over the base coupling.
    """
    if family != "superadiabatic_tangent":
        raise InvalidParameterError(f"unsupported family {family!r}")
    if not (np.isfinite(omega_prime) and omega_prime > 0):
        raise InvalidParameterError(f"omega_prime must be positive, got {omega_prime}")
    # T -> pi/(2 omega') at omega -> 0+ and diverges at omega -> omega'-
    lo, hi = omega_prime * 1e-12, omega_prime * (1.0 - 1e-9)
    w, T = golden_section(lambda x: protocols.tangent_duration(x, omega_prime), lo, hi)
    return MinTime(T, w)

"""Generators for the driving protocols and the superadiabatic transformation.

All generators return :class:`~qdrive.core.ProtocolSchedule` objects whose
controls are closed-form functions of ``tau``. Derivatives for built-in kinds
are supplied analytically.

The superadiabatic transformation replaces the counter-diabatic ``sy`` term by
a modified ``(gamma', omega')`` pair. Writing ``alpha`` for the ``sy``
coefficient and ``beta = arctan(alpha / omega)``::

    omega' = sqrt(omega**2 + alpha**2)
    gamma' = gamma - (1/2) d beta / dt

plus z-impulses of area ``-beta(0+)/2`` at the start and ``+beta(1-)/2`` at the
end, which undo the frame rotation ``exp(i beta sz / 2)``.

For the linear ramp this gives::

    gamma' = gamma - 8 (tau - 1/2) / (T**2 (8 (tau - 1/2)**2 + omega**2 / 2)**2 + 1)

The frequently quoted form with numerator ``4 (tau - 1/2)`` and bracket
``(tau - 1/2)**2 + omega**2/2`` does not follow from the general rule; this
module always uses the general rule.
"""
from __future__ import annotations

import math
from dataclasses import replace

import numpy as np

from .adiabatic import ground_state, tau_derivatives
from .core import (
    DomainError,
    ImpulseRotation,
    InvalidParameterError,
    ProtocolSchedule,
    SingularTransformError,
)

GAMMA_START = -2.0
GAMMA_END = 2.0
COMPOSITE_AREA = math.pi / 4
COMPOSITE_MIN_RATIO = 10.0


def _positive(name, value):
    if not (np.isfinite(value) and value > 0):
        raise InvalidParameterError(f"{name} must be positive, got {value}")
    return float(value)


def _const(value):
    return lambda tau: value


# --------------------------------------------------------------------------
# constant-coupling families


def lz_linear(omega: float, T: float) -> ProtocolSchedule:
    """Linear Landau-Zener sweep ``gamma = 4 (tau - 1/2)`` at constant coupling."""
    omega, T = _positive("omega", omega), _positive("T", T)
    return ProtocolSchedule(
        kind="lz_linear",
        T=T,
        gamma=lambda tau: 4.0 * (tau - 0.5),
        omega=_const(omega),
        params={"omega": omega, "T": T},
        gamma_d=_const(4.0),
        omega_d=_const(0.0),
        gamma_dd=_const(0.0),
        omega_dd=_const(0.0),
    )


def roland_cerf_duration(omega: float, epsilon: float) -> float:
    """Duration of the locally adiabatic sweep, ``1 / (eps * omega * sqrt(4 + omega**2))``."""
    return 1.0 / (epsilon * omega * math.sqrt(4.0 + omega * omega))


def roland_cerf_epsilon(omega: float, T: float) -> float:
    """Inverse of :func:`roland_cerf_duration`."""
    return 1.0 / (T * omega * math.sqrt(4.0 + omega * omega))


def roland_cerf(omega: float, epsilon: float) -> ProtocolSchedule:
    """Locally adiabatic sweep of Roland and Cerf at constant coupling."""
    omega = _positive("omega", omega)
    if not (0.0 < epsilon < 1.0):
        raise InvalidParameterError(f"epsilon must lie in (0, 1), got {epsilon}")
    T = roland_cerf_duration(omega, epsilon)
    k = 4.0 * epsilon * omega**2 * T
    c = 16.0 * epsilon**2 * omega**2 * T**2
    for tau in (0.0, 1.0):
        if 1.0 - c * (tau - 0.5) ** 2 <= 0.0:
            raise DomainError(f"square-root argument non-positive at tau={tau}")

    def gamma(tau):
        x = tau - 0.5
        return k * x / math.sqrt(1.0 - c * x * x)

    def gamma_d(tau):
        x = tau - 0.5
        return k * (1.0 - c * x * x) ** -1.5

    def gamma_dd(tau):
        x = tau - 0.5
        return 3.0 * k * c * x * (1.0 - c * x * x) ** -2.5

    return ProtocolSchedule(
        kind="roland_cerf",
        T=T,
        gamma=gamma,
        omega=_const(omega),
        params={"omega": omega, "epsilon": float(epsilon), "T": T},
        gamma_d=gamma_d,
        omega_d=_const(0.0),
        gamma_dd=gamma_dd,
        omega_dd=_const(0.0),
    )


def endpoint_overlap(omega: float) -> float:
    """``|<psi_g(tau=1)|psi_g(tau=0)>|`` for the standard endpoints gamma = -2, +2."""
    g0 = ground_state(GAMMA_START, omega)
    g1 = ground_state(GAMMA_END, omega)
    return float(abs(np.vdot(g1, g0)))


def composite_pulse(
    omega: float,
    Gamma_M: float | None = None,
    overlap_ini_fin: float | None = None,
    ideal: bool = True,
) -> ProtocolSchedule:
    """Impulse, half Rabi plateau, impulse.

    The plateau lasts ``arccos(overlap_ini_fin) / omega``. In ideal mode the
    two z-rotations of area ``+pi/4`` and ``-pi/4`` are exact impulses. With
    ``ideal=False`` they are rectangular pulses of height ``+-Gamma_M`` and
    duration ``(pi/4) / Gamma_M`` (coupling stays on), which lengthens ``T``.

    ``overlap_ini_fin`` defaults to the overlap of the adiabatic ground states
    at ``gamma = -2`` and ``gamma = +2``.
    """
    omega = _positive("omega", omega)
    if overlap_ini_fin is None:
        overlap_ini_fin = endpoint_overlap(omega)
    if not (0.0 <= overlap_ini_fin < 1.0):
        raise InvalidParameterError(f"overlap must lie in [0, 1), got {overlap_ini_fin}")
    plateau = math.acos(overlap_ini_fin) / omega
    warnings = ()
    params = {"omega": omega, "overlap": float(overlap_ini_fin), "ideal": ideal}

    if ideal:
        T = plateau
        tau0 = 0.0
        impulses = (
            ImpulseRotation("start", COMPOSITE_AREA),
            ImpulseRotation("end", -COMPOSITE_AREA),
        )
        Gamma_M = math.inf if Gamma_M is None else Gamma_M

        def gamma(tau):
            if tau == 0.0:
                return GAMMA_START
            if tau == 1.0:
                return GAMMA_END
            return 0.0

        breakpoints = ()
    else:
        if Gamma_M is None:
            raise InvalidParameterError("finite emulation needs Gamma_M")
        Gamma_M = _positive("Gamma_M", Gamma_M)
        dt = COMPOSITE_AREA / Gamma_M
        T = plateau + 2.0 * dt
        tau0 = dt / T
        impulses = ()

        def gamma(tau):
            if tau == 0.0:
                return GAMMA_START
            if tau == 1.0:
                return GAMMA_END
            if tau <= tau0:
                return Gamma_M
            if tau >= 1.0 - tau0:
                return -Gamma_M
            return 0.0

        breakpoints = (tau0, 1.0 - tau0)

    if Gamma_M < COMPOSITE_MIN_RATIO * omega:
        warnings = (
            f"Gamma_M={Gamma_M} < {COMPOSITE_MIN_RATIO}*omega; exact transfer not guaranteed",
        )
    params.update(Gamma_M=Gamma_M, tau0=tau0, T=T)
    return ProtocolSchedule(
        kind="composite",
        T=T,
        gamma=gamma,
        omega=_const(omega),
        impulses=impulses,
        params=params,
        breakpoints=breakpoints,
        warnings=warnings,
    )


# --------------------------------------------------------------------------
# counter-diabatic / superadiabatic


def tangent_base(omega: float, T: float) -> ProtocolSchedule:
    """Sweep ``omega * tan(2 (tau - 1/2) arctan(2 / omega))``.

    Its mixing angle falls linearly in time, so the counter-diabatic term is
    constant and the superadiabatic transformation leaves gamma unchanged.
    """
    omega, T = _positive("omega", omega), _positive("T", T)
    a = math.atan(2.0 / omega)

    def gamma(tau):
        return omega * math.tan(2.0 * (tau - 0.5) * a)

    def gamma_d(tau):
        return omega * 2.0 * a / math.cos(2.0 * (tau - 0.5) * a) ** 2

    def gamma_dd(tau):
        u = 2.0 * (tau - 0.5) * a
        return omega * 8.0 * a * a * math.tan(u) / math.cos(u) ** 2

    return ProtocolSchedule(
        kind="tangent",
        T=T,
        gamma=gamma,
        omega=_const(omega),
        params={"omega": omega, "T": T},
        gamma_d=gamma_d,
        omega_d=_const(0.0),
        gamma_dd=gamma_dd,
        omega_dd=_const(0.0),
    )


def _beta_parts(base: ProtocolSchedule, tau: float):
    g, w, gd, wd = tau_derivatives(base, tau)
    if w <= 0.0:
        raise SingularTransformError(f"omega vanishes at tau={tau}")
    T = base.T
    num = (g * wd - w * gd) / T
    den = 2.0 * w * (g * g + w * w)
    return g, w, gd, wd, num, den


def correction_angle(base: ProtocolSchedule, tau: float) -> float:
    """``beta = arctan((gamma omega' - omega gamma') / (2 omega (gamma^2 + omega^2)))``.

    Time derivatives are in physical time. Equivalently ``arctan(alpha / omega)``
    with ``alpha`` the counter-diabatic ``sy`` coefficient.
    """
    *_, num, den = _beta_parts(base, tau)
    return math.atan(num / den)


def correction_angle_rate(base: ProtocolSchedule, tau: float) -> float:
    """``d beta / dt`` in physical time."""
    T = base.T
    if base.gamma_dd is None or base.omega_dd is None:
        h = 1e-4
        lo, hi = max(tau - h, 0.0), min(tau + h, 1.0)
        return (correction_angle(base, hi) - correction_angle(base, lo)) / ((hi - lo) * T)
    g, w, gd, wd, num, den = _beta_parts(base, tau)
    gdd, wdd = base.gamma_dd(tau), base.omega_dd(tau)
    num_d = (g * wdd - w * gdd) / T  # gd*wd cross terms cancel
    den_d = 2.0 * wd * (g * g + w * w) + 4.0 * w * (g * gd + w * wd)
    return (num_d * den - num * den_d) / (den * den + num * num) / T


def _check_coupling(base: ProtocolSchedule):
    if base.impulses:
        raise InvalidParameterError("base schedule must not carry impulses")
    if base.omega_y is not None:
        raise InvalidParameterError("base schedule already has an sy channel")
    grid = np.linspace(0.0, 1.0, 1001)
    w = np.array([base.omega(t) for t in grid])
    if np.any(w <= 0.0) or not np.all(np.isfinite(w)):
        bad = grid[np.argmax(~(w > 0))]
        raise SingularTransformError(f"omega must stay positive; fails near tau={bad}")


def counterdiabatic(base: ProtocolSchedule) -> ProtocolSchedule:
    """Base controls plus the explicit ``sy`` term ``(1/2) d phi/dt``.

    This is the direct two-field realization; it needs no impulses.
    """
    _check_coupling(base)

    return replace(
        base,
        kind="counterdiabatic",
        omega_y=lambda tau: _alpha(base, tau),
        reference=base,
        params={**base.params, "base_kind": base.kind},
        gamma_d=None,
        omega_d=None,
        gamma_dd=None,
        omega_dd=None,
    )


def _alpha(base, tau):
    g, w, gd, wd, num, den = _beta_parts(base, tau)
    return num / (2.0 * (g * g + w * w))


def superadiabatic_transform(base: ProtocolSchedule, kind: str | None = None) -> ProtocolSchedule:
    """Fold the counter-diabatic term into modified ``(gamma', omega')``.

    Endpoint jumps of ``beta`` become exact impulses; a static base yields the
    identity with no impulses.
    """
    _check_coupling(base)

    def gamma(tau):
        return base.gamma(tau) - 0.5 * correction_angle_rate(base, tau)

    def omega(tau):
        w = base.omega(tau)
        a = _alpha(base, tau)
        return math.sqrt(w * w + a * a)

    b0, b1 = correction_angle(base, 0.0), correction_angle(base, 1.0)
    impulses = tuple(
        ImpulseRotation(loc, area)
        for loc, area in (("start", -0.5 * b0), ("end", 0.5 * b1))
        if area != 0.0
    )
    return ProtocolSchedule(
        kind=kind or "custom",
        T=base.T,
        gamma=gamma,
        omega=omega,
        impulses=impulses,
        params={**base.params, "base_kind": base.kind},
        reference=base,
        frame_area=lambda tau: 0.5 * correction_angle(base, tau),
    )


def superadiabatic_linear(omega: float, T: float) -> ProtocolSchedule:
    """Transitionless version of :func:`lz_linear`."""
    return superadiabatic_transform(lz_linear(omega, T), kind="superadiabatic_linear")


def lz_omega_only(omega: float, T: float) -> ProtocolSchedule:
    """Linear sweep with the superadiabatic coupling but no gamma correction or impulses.

    Isolates the effect of the coupling boost alone.
    """
    full = superadiabatic_linear(omega, T)
    base = full.reference
    return replace(
        base,
        kind="lz_omega_only",
        omega=full.omega,
        omega_d=None,
        omega_dd=None,
        reference=base,
    )


def superadiabatic_tangent(omega: float, T: float) -> ProtocolSchedule:
    """Transitionless tangent sweep in closed form.

    ``gamma' = gamma`` and ``omega' = omega sqrt(1 + arctan(2/omega)**2 / (T omega)**2)``
    is constant; only the endpoint impulses remain.
    """
    base = tangent_base(omega, T)
    a = math.atan(2.0 / base.params["omega"])
    omega = base.params["omega"]
    omega_p = omega * math.sqrt(1.0 + a * a / (T * omega) ** 2)
    beta = -math.atan(a / (T * omega))
    return ProtocolSchedule(
        kind="superadiabatic_tangent",
        T=base.T,
        gamma=base.gamma,
        omega=_const(omega_p),
        impulses=(ImpulseRotation("start", -0.5 * beta), ImpulseRotation("end", 0.5 * beta)),
        params={**base.params, "omega_prime": omega_p},
        gamma_d=base.gamma_d,
        omega_d=_const(0.0),
        gamma_dd=base.gamma_dd,
        omega_dd=_const(0.0),
        reference=base,
        frame_area=_const(0.5 * beta),
    )


def tangent_duration(omega: float, omega_prime: float) -> float:
    """Duration of the tangent protocol with base coupling ``omega`` reaching ``omega_prime``."""
    if not (0.0 <= omega < omega_prime):
        raise DomainError("need 0 <= omega < omega_prime")
    a = math.pi / 2 if omega == 0.0 else math.atan(2.0 / omega)
    return a / math.sqrt(omega_prime**2 - omega**2)


# --------------------------------------------------------------------------
# helpers


BUILDERS = {
    "lz_linear": lambda p: lz_linear(p["omega"], p["T"]),
    "roland_cerf": lambda p: roland_cerf(p["omega"], p["epsilon"])
    if "epsilon" in p
    else roland_cerf(p["omega"], roland_cerf_epsilon(p["omega"], p["T"])),
    "composite": lambda p: _composite_from_params(p),
    "superadiabatic_linear": lambda p: superadiabatic_linear(p["omega"], p["T"]),
    "superadiabatic_tangent": lambda p: superadiabatic_tangent(p["omega"], p["T"]),
    "tangent": lambda p: tangent_base(p["omega"], p["T"]),
    "lz_omega_only": lambda p: lz_omega_only(p["omega"], p["T"]),
}


def _composite_from_params(p):
    s = composite_pulse(p["omega"], p.get("Gamma_M"), p.get("overlap"), p.get("ideal", True))
    if p.get("T") is None:
        return s
    if not s.params["ideal"]:
        raise InvalidParameterError("an explicit T is only supported for the ideal composite pulse")
    # same impulses, plateau of the requested length
    return replace(s, T=_positive("T", p["T"]), params={**s.params, "T": float(p["T"])})


def build(kind: str, **params) -> ProtocolSchedule:
    """Construct a built-in protocol by name."""
    try:
        builder = BUILDERS[kind]
    except KeyError:
        raise InvalidParameterError(f"unknown protocol kind {kind!r}") from None
    try:
        return builder(params)
    except KeyError as exc:
        raise InvalidParameterError(f"{kind} needs parameter {exc.args[0]!r}") from None


def finite_impulse_area(base: ProtocolSchedule, location: str, width: float = 1e-3) -> float:
    """Area of the gamma correction when the jump of beta is smeared over ``width``.

    The jump is emulated by ramping ``beta`` smoothly between 0 and its
    endpoint value over a window of ``width`` (physical time) and integrating
    ``-(1/2) d beta/dt`` across it numerically.
    """
    from scipy.integrate import quad

    if location == "start":
        target = correction_angle(base, 0.0)
        sign = 1.0
    elif location == "end":
        target = correction_angle(base, 1.0)
        sign = -1.0
    else:
        raise InvalidParameterError(f"location must be start/end, got {location!r}")

    # beta ramps as target * sin^2 (start) or target * cos^2 (end) over the window
    def rate(t):
        return sign * target * 0.5 * math.pi * math.sin(math.pi * t / width) / width

    area, _ = quad(lambda t: -0.5 * rate(t), 0.0, width, epsabs=1e-14, epsrel=1e-12)
    return area

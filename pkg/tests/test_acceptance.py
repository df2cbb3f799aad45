"""Acceptance criteria, one test each.

Every test prints a single ``PASS``/``FAIL`` line with the measured numbers and
the wall time; the lines are repeated in the pytest terminal summary. Run the
file directly (``python3 tests/test_acceptance.py``) to get only those lines.
"""
import math
import sys
import time
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from conftest import random_smooth_schedule  # noqa: E402
from qdrive import analysis as A  # noqa: E402
from qdrive import protocols as P  # noqa: E402
from qdrive.adiabatic import ground_state  # noqa: E402
from qdrive.core import KET0, KET1, SIGMA_X, SIGMA_Y, SIGMA_Z  # noqa: E402
from qdrive.propagator import PropagatorConfig, propagate, time_reversed  # noqa: E402

RESULTS: list[str] = []
FAST = PropagatorConfig(record_trajectory=False)


def report(number, title, ok, detail, elapsed, budget):
    within = elapsed < budget
    line = (
        f"{'PASS' if ok and within else 'FAIL'}  criterion {number}: {title}: {detail} "
        f"[{elapsed:.2f} s / {budget:g} s]"
    )
    RESULTS.append(line)
    print(line)
    assert ok, line
    assert within, line


def overlap2(a, b):
    return min(float(abs(np.vdot(a, b)) ** 2), 1.0)


def test_criterion_1_speed_limit_and_composite():
    t0 = time.perf_counter()
    t_qs = A.quantum_speed_limit(KET0, KET1, 0.5).t_qs
    s = P.composite_pulse(0.5, overlap_ini_fin=0.0)
    f_at = overlap2(KET1, propagate(s, KET0, FAST).final_state)
    f_short = overlap2(KET1, propagate(P.build("composite", omega=0.5, overlap=0.0, T=0.99 * s.T), KET0, FAST).final_state)
    elapsed = time.perf_counter() - t0
    ok = t_qs == math.pi and s.T == t_qs and f_at >= 1 - 1e-6 and f_short < 1 - 1e-4
    report(
        1,
        "speed limit and composite pulse",
        ok,
        f"T_qs={t_qs!r}, F(T_qs)={f_at:.12f}, F(0.99 T_qs)={f_short:.6f}",
        elapsed,
        1.0,
    )


def test_criterion_2_landau_zener_closed_form():
    t0 = time.perf_counter()
    worst = 0.0
    for T in np.linspace(2.0, 20.0, 10):
        f = A.final_fidelity(P.lz_linear(0.5, T), config=FAST)
        worst = max(worst, abs(f - A.lz_reference_fidelity(0.5, T)))
    elapsed = time.perf_counter() - t0
    report(2, "Landau-Zener closed form", worst <= 0.05, f"max |F - (1 - exp(-pi T w^2/4))| = {worst:.4f}", elapsed, 5.0)


def test_criterion_3_roland_cerf():
    t0 = time.perf_counter()
    exact = all(
        P.roland_cerf(w, e).T == 1.0 / (e * w * math.sqrt(4 + w * w))
        for w in (0.3, 0.5, 0.7, 1.0)
        for e in (0.1, 0.37, 0.9)
    )
    ratios = {}
    for w in (0.3, 0.5, 0.7, 1.0):
        ratios[w] = A.time_to_fidelity("roland_cerf", w, 0.9, FAST) / A.endpoint_speed_limit(w).t_qs
    elapsed = time.perf_counter() - t0
    ok = exact and all(1.1 <= r <= 1.5 for r in ratios.values())
    detail = "T(eps) exact" if exact else "T(eps) MISMATCH"
    detail += "; T_0.9/T_qs = " + ", ".join(f"w={w}: {r:.3f}" for w, r in ratios.items())
    report(3, "Roland-Cerf duration and time-to-0.9", ok, detail, elapsed, 30.0)


def test_criterion_4_transitionless_following():
    t0 = time.perf_counter()
    worst = {}
    for kind in ("superadiabatic_linear", "superadiabatic_tangent"):
        for T in (0.5, 1.0, 2.0, 5.0, 10.0):
            s = P.build(kind, omega=0.55, T=T)
            ref = s.fidelity_reference
            traj = propagate(s, ground_state(ref.gamma(0.0), ref.omega(0.0)), PropagatorConfig(steps=4096))
            assert len(traj) >= 4096
            worst[kind] = min(worst.get(kind, 1.0), float(traj.fidelities.min()))
    elapsed = time.perf_counter() - t0
    ok = all(v >= 0.9999 for v in worst.values())
    detail = ", ".join(f"min F({k}) = {v:.10f}" for k, v in worst.items())
    report(4, "transitionless following at w=0.55", ok, detail, elapsed, 10.0)


def test_criterion_5_tangent_robustness():
    t0 = time.perf_counter()
    params = {"omega": 0.5, "T": 5.9}
    nominal = A.final_fidelity(P.superadiabatic_tangent(0.5, 5.9), config=FAST)
    devs = np.linspace(0.0, 1.0, 41)
    mins, below = {}, {}
    for axis in ("duration", "coupling"):
        mins[axis] = float(A.robustness_scan("superadiabatic_tangent", params, axis, devs).fidelities.min())
        below[axis] = float(A.robustness_scan("superadiabatic_tangent", params, axis, [-0.5]).fidelities[0])
    elapsed = time.perf_counter() - t0
    ok = all(m >= 0.99 for m in mins.values()) and all(b < nominal for b in below.values())
    detail = (
        f"min F on [0, 1]: T {mins['duration']:.5f}, w {mins['coupling']:.5f}; "
        f"F(-0.5): T {below['duration']:.5f}, w {below['coupling']:.5f} vs nominal {nominal:.12f}"
    )
    report(5, "tangent robustness at (0.5, 5.9)", ok, detail, elapsed, 30.0)


def test_criterion_6_minimum_time_frontier():
    t0 = time.perf_counter()
    limit_err = {wp: A.min_time_at_coupling(wp).T_min / (math.pi / (2 * wp)) - 1 for wp in (0.1, 0.2)}
    losses = []
    for wp in np.round(np.arange(0.3, 1.01, 0.1), 2):
        t_tan = A.min_time_at_coupling(wp).T_min
        t_lz = A.time_to_fidelity("lz_linear", wp, 0.9, FAST)
        t_rc = A.time_to_fidelity("roland_cerf", wp, 0.9, FAST)
        if not (t_tan < t_lz and t_tan < t_rc):
            losses.append(f"w'={wp}: tangent {t_tan:.4f} vs LZ {t_lz:.4f}, RC {t_rc:.4f}")
    elapsed = time.perf_counter() - t0
    ok = all(abs(e) <= 0.01 for e in limit_err.values()) and not losses
    detail = "T_min/(pi/2w') - 1: " + ", ".join(f"{wp}: {e:+.2e}" for wp, e in limit_err.items())
    detail += "; " + ("below LZ and RC on [0.3, 1.0]" if not losses else "not below at " + "; ".join(losses))
    report(6, "minimum-time frontier", ok, detail, elapsed, 60.0)


def test_criterion_7_transform_self_consistency():
    t0 = time.perf_counter()
    taus = np.linspace(0.0, 1.0, 1001)
    err_w = 0.0
    for w, T in ((0.55, 0.5), (0.55, 3.0), (1.0, 10.0)):
        s = P.superadiabatic_transform(P.lz_linear(w, T))
        closed = w * np.sqrt(1 + 1 / (T**2 * (8 * (taus - 0.5) ** 2 + 0.5 * w * w) ** 2))
        err_w = max(err_w, float(np.max(np.abs([s.omega(x) for x in taus] - closed))))
    err_g = 0.0
    inner = np.linspace(0.01, 0.99, 981)
    for w, T in ((0.5, 5.9), (0.3, 2.0)):
        base = P.tangent_base(w, T)
        s = P.superadiabatic_transform(base)
        err_g = max(err_g, max(abs(s.gamma(x) - base.gamma(x)) for x in inner))
    worst_ov = 1.0
    for w, T in ((0.55, 1.0), (0.55, 5.0), (0.5, 5.9)):
        base = P.lz_linear(w, T)
        psi0 = ground_state(-2, w)
        two = propagate(P.counterdiabatic(base), psi0, FAST).final_state
        one = propagate(P.superadiabatic_transform(base), psi0, FAST).final_state
        worst_ov = min(worst_ov, overlap2(two, one))
    elapsed = time.perf_counter() - t0
    ok = err_w <= 1e-12 and err_g <= 1e-10 and worst_ov >= 1 - 1e-9
    detail = f"max |w' - closed form| = {err_w:.1e}, max |gamma' - gamma| (tangent) = {err_g:.1e}, two- vs one-lattice overlap = {worst_ov:.13f}"
    report(7, "transformation self-consistency", ok, detail, elapsed, 60.0)


def _brute_force(schedule, psi0, steps):
    """Midpoint products of exponentials from a dense eigendecomposition, multiplied as a tree."""
    mid = (np.arange(steps) + 0.5) / steps
    g = np.array([schedule.gamma(x) for x in mid])
    w = np.array([schedule.omega(x) for x in mid])
    y = np.array([schedule.omega_y(x) for x in mid]) if schedule.omega_y else np.zeros(steps)
    h = g[:, None, None] * SIGMA_Z + w[:, None, None] * SIGMA_X + y[:, None, None] * SIGMA_Y
    vals, vecs = np.linalg.eigh(h)
    phases = np.exp(-1j * schedule.T / steps * vals)
    u = np.einsum("nij,nj,nkj->nik", vecs, phases, vecs.conj())
    while len(u) > 1:
        if len(u) % 2:
            u = np.concatenate([u, np.eye(2)[None]])
        u = u[1::2] @ u[0::2]
    return u[0] @ psi0


def test_criterion_8_propagator_oracle():
    t0 = time.perf_counter()
    rng = np.random.default_rng(8)
    worst_fine, worst_norm, worst_rev = 1.0, 0.0, 1.0
    steps = 512
    for _ in range(20):
        s = random_smooth_schedule(rng)
        psi0 = ground_state(s.gamma(0.0), s.omega(0.0))
        traj = propagate(s, psi0, PropagatorConfig(steps=steps))
        ref = _brute_force(s, psi0, 64 * steps)
        worst_fine = min(worst_fine, overlap2(traj.final_state, ref))
        worst_norm = max(worst_norm, float(np.max(np.abs(np.linalg.norm(traj.states, axis=1) - 1))))
        back = propagate(time_reversed(s), traj.final_state.conj(), PropagatorConfig(steps=steps, record_trajectory=False))
        worst_rev = min(worst_rev, overlap2(back.final_state, psi0.conj()))
    elapsed = time.perf_counter() - t0
    ok = worst_fine >= 1 - 1e-9 and worst_norm <= 1e-12 and worst_rev >= 1 - 1e-9
    detail = f"min overlap vs 64x finer = {worst_fine:.13f}, max norm drift = {worst_norm:.1e}, min reversal recovery = {worst_rev:.13f}"
    report(8, "propagator oracle (20 random schedules)", ok, detail, elapsed, 60.0)


if __name__ == "__main__":
    failed = 0
    for name, fn in sorted(globals().items()):
        if name.startswith("test_criterion_"):
            try:
                fn()
            except AssertionError:
                failed += 1
    sys.exit(1 if failed else 0)

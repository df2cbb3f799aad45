"""Composite pulse at the quantum speed limit.

Two orthogonal states are connected no faster than T_qs = arccos|<f|i>| / omega.
A z-kick, half a Rabi cycle and the opposite z-kick saturate that bound.
"""
from dataclasses import replace

import numpy as np

from qdrive import KET0, KET1, analysis, composite_pulse, propagate
from qdrive.propagator import PropagatorConfig

omega = 0.5
qsl = analysis.quantum_speed_limit(KET0, KET1, omega)
print(f"speed limit for |0> -> |1> at omega={omega}: T_qs = {qsl.t_qs:.6f}  (pi = {np.pi:.6f})")

pulse = composite_pulse(omega, overlap_ini_fin=0.0)
cfg = PropagatorConfig(steps=1024)
for scale in (0.97, 0.99, 1.0, 1.01):
    traj = propagate(replace(pulse, T=scale * pulse.T), KET0, cfg)
    f = abs(np.vdot(KET1, traj.final_state)) ** 2
    print(f"  T = {scale:4.2f} T_qs   transfer probability {f:.8f}")

# between the ground states at gamma = -2 and +2 the states overlap a little,
# so the bound (and the composite pulse) is shorter than pi / omega
print()
for w in (0.2, 0.5, 1.0):
    s = composite_pulse(w)
    print(f"omega={w}: endpoint overlap {analysis.endpoint_speed_limit(w).overlap:.4f}, "
          f"T = {s.T:.4f}, F = {analysis.final_fidelity(s):.12f}")

# finite impulses: rectangles of height Gamma_M instead of delta kicks
print()
for gm in (2.0, 5.0, 20.0, 100.0):
    s = composite_pulse(0.5, Gamma_M=gm, ideal=False)
    note = "  (warning: Gamma_M < 10 omega)" if s.warnings else ""
    print(f"Gamma_M={gm:6.1f}: T = {s.T:.4f}, F = {analysis.final_fidelity(s):.8f}{note}")

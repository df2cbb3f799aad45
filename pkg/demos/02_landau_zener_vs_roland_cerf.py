"""Linear Landau-Zener sweep against the locally adiabatic Roland-Cerf sweep.

The linear sweep wastes time far from the crossing; Roland-Cerf slows down only
where the gap is small, and reaches a given fidelity much sooner.
"""
import numpy as np

from qdrive import analysis, lz_linear, roland_cerf
from qdrive.propagator import PropagatorConfig
from qdrive.protocols import roland_cerf_epsilon

omega = 0.5
cfg = PropagatorConfig(record_trajectory=False)

print(" T      F_LZ(sim)  1-exp(-pi T w^2/4)   F_RC(sim)")
for T in (2.0, 4.0, 6.0, 10.0, 20.0):
    f_lz = analysis.final_fidelity(lz_linear(omega, T), config=cfg)
    eps = roland_cerf_epsilon(omega, T)
    f_rc = analysis.final_fidelity(roland_cerf(omega, eps), config=cfg) if eps < 1 else float("nan")
    print(f"{T:5.1f}   {f_lz:.6f}   {analysis.lz_reference_fidelity(omega, T):.6f}            {f_rc:.6f}")

# time to reach F = 0.9, relative to the speed limit between the endpoint states
print()
print(" omega  T_qs    T_LZ(0.9)  T_RC(0.9)  T_RC/T_qs")
for w in (0.3, 0.5, 0.7, 1.0):
    t_qs = analysis.endpoint_speed_limit(w).t_qs
    t_lz = analysis.time_to_fidelity("lz_linear", w, 0.9, cfg)
    t_rc = analysis.time_to_fidelity("roland_cerf", w, 0.9, cfg)
    print(f" {w:4.2f}  {t_qs:6.3f}  {t_lz:8.3f}   {t_rc:7.3f}    {t_rc / t_qs:5.3f}")

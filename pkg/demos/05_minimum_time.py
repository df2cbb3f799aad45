"""Shortest superadiabatic tangent protocol at fixed corrected coupling.

For a given peak coupling omega' the base coupling omega is free; the duration
T(omega) = arctan(2/omega) / sqrt(omega'^2 - omega^2) has a minimum in between.
"""
import numpy as np

from qdrive import analysis
from qdrive.propagator import PropagatorConfig

cfg = PropagatorConfig(record_trajectory=False)
print(" omega'   T_min   omega*   pi/(2w')   T_qs    T_LZ(0.9)  T_RC(0.9)")
for wp in np.round(np.arange(0.1, 1.01, 0.1), 2):
    res = analysis.min_time_at_coupling(wp)
    t_qs = analysis.endpoint_speed_limit(wp).t_qs
    t_lz = analysis.time_to_fidelity("lz_linear", wp, 0.9, cfg)
    t_rc = analysis.time_to_fidelity("roland_cerf", wp, 0.9, cfg)
    print(f"  {wp:4.2f}  {res.T_min:7.3f}  {res.omega_star:6.4f}  {np.pi / (2 * wp):7.3f}  "
          f"{t_qs:6.3f}  {t_lz:8.3f}   {t_rc:7.3f}")

# the tangent protocol is exact (F = 1) while LZ and Roland-Cerf only need 0.9;
# at small omega' Roland-Cerf can therefore finish first

"""Transitionless driving without a sigma_y field.

The counter-diabatic term (1/2) dphi/dt sigma_y keeps the state on the
instantaneous ground state. Rotating it away gives modified (gamma', omega')
plus two z-kicks, so a single control pair does the same job.
"""
import numpy as np

from qdrive import counterdiabatic, lz_linear, propagate, superadiabatic_linear
from qdrive.adiabatic import ground_state
from qdrive.propagator import PropagatorConfig
from qdrive.protocols import lz_omega_only

omega = 0.55
cfg = PropagatorConfig(steps=4096)
psi0 = ground_state(-2.0, omega)

print(" T     min F(tau): LZ      omega' only   superadiabatic")
for T in (0.5, 1.0, 2.0, 5.0, 10.0):
    row = []
    for s in (lz_linear(omega, T), lz_omega_only(omega, T), superadiabatic_linear(omega, T)):
        row.append(propagate(s, psi0, cfg).fidelities.min())
    print(f"{T:5.1f}   {row[0]:.6f}        {row[1]:.6f}      {row[2]:.10f}")

# the explicit sigma_y realization and the transformed one end in the same state
base = lz_linear(omega, 1.0)
two = propagate(counterdiabatic(base), psi0, cfg).final_state
one = propagate(superadiabatic_linear(omega, 1.0), psi0, cfg).final_state
print(f"\n|<two-field|one-field>|^2 = {abs(np.vdot(two, one)) ** 2:.14f}")

s = superadiabatic_linear(omega, 1.0)
print("impulses:", [(p.location, round(p.area, 6)) for p in s.impulses])
for tau in (0.0, 0.25, 0.5, 0.75, 1.0):
    print(f"  tau={tau:4.2f}  gamma'={s.gamma(tau):+8.4f}  omega'={s.omega(tau):7.4f}")

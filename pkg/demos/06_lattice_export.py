"""From a protocol to lattice waveforms.

omega sets the lattice depth (V0 = 4 omega), gamma the quasimomentum
(q = gamma/4 + 1/2). A sigma_y term becomes a second lattice shifted by a
quarter period, i.e. a displaced lattice, whose motion shifts q.
"""
import tempfile
from pathlib import Path

import numpy as np

from qdrive import counterdiabatic, lz_linear, superadiabatic_tangent
from qdrive.lattice import (
    displacement_unitary_check,
    read_waveform,
    to_lattice_controls,
    write_waveform,
)

print("basis check:", displacement_unitary_check())

c = to_lattice_controls(counterdiabatic(lz_linear(0.55, 1.0)), samples=11)
print("\n tau    V0     q       q'      beta    displacement/d_L")
for row in zip(c.tau, c.depth, c.quasimomentum, c.quasimomentum_corrected, c.beta, c.displacement):
    print(" " + "  ".join(f"{x:6.3f}" for x in row))
print("jumps:", c.impulses)

out = Path(tempfile.mkdtemp()) / "tangent.csv"
controls = to_lattice_controls(superadiabatic_tangent(0.5, 5.9), samples=2000, slew_duration=0.05)
csv_path, json_path = write_waveform(controls, out)
data = read_waveform(csv_path)
print(f"\nwrote {csv_path.name} ({len(data['t_seconds'])} samples, "
      f"{data['t_seconds'][-1] * 1e3:.3f} ms) and {json_path.name}")
print("q' excursion during the start kick:", np.round(data["q_prime"][:3], 4))

"""
Pulse shapes and the shortest admissible pulse width
====================================================

Build the logistic schedule for a NOT gate, correct it with the SATD
dressing and find the smallest pulse width whose corrected drives stay
within the amplitude limit. Writes one CSV per dressing mode.
"""

import sys
from pathlib import Path

import numpy as np

from superholo import DressingConfig, correct_schedule, tau_min, vitanov_schedule
from superholo.pulses import sample_pulses

out = Path(sys.argv[1] if len(sys.argv) > 1 else "demo_out")
out.mkdir(exist_ok=True)

omega_max = 2 * np.pi * 750e6

# The correction adds a term proportional to d(theta)/dt, so shorter pulses
# need more drive. tau_min is where the corrected peak meets omega_max.
tau = tau_min(omega_max, DressingConfig.satd())
print(f"tau_min = {tau * 1e12:.1f} ps, tau_min * Omega_max = {tau * omega_max:.4f} (1/{1 / (tau * omega_max):.3f})")

schedule = vitanov_schedule(omega_max, tau, varphi=np.pi / 4)
for name, dressing in [("none", DressingConfig.none()), ("satd", DressingConfig.satd()), ("msa", DressingConfig.msa())]:
    corrected = correct_schedule(schedule, dressing)
    peak = corrected.peak_channel_amplitude() / omega_max
    path = sample_pulses(corrected, 1000).to_csv(out / f"pulses_{name}.csv")
    print(f"{name:>4}: peak channel amplitude {peak:.4f} Omega_max -> {path}")

# The corrected drives switch off at the ends, as a gate pulse must.
corrected = correct_schedule(schedule, DressingConfig.satd())
print("boundary residual:", corrected.boundary_residual() / omega_max)

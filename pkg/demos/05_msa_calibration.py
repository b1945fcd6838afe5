"""
Calibrating the modified superadiabatic factor
==============================================

Scan a constant dressing factor f0 and keep the one that minimises the
peak excited-state population while staying within the drive limit.
"""

import numpy as np

from superholo import calibrate_msa_factor

cal = calibrate_msa_factor(np.linspace(0.6, 1.4, 9))
for f, ok, pe in zip(cal.grid, cal.feasible, cal.peak_excited):
    print(f"f0 = {f:.2f}  {'ok ' if ok else 'over'}  peak |e> population {pe:.2e}")
print("chosen f0:", cal.f0)

# Without the drive limit every candidate is simulated. A larger f0 keeps
# |e> emptier but needs more drive, and at the SATD tau_min only f0 = 1 fits.
free = calibrate_msa_factor(np.linspace(0.6, 1.4, 9), enforce_amplitude=False)
for f, pe in zip(free.grid, free.peak_excited):
    print(f"f0 = {f:.2f}  peak |e> population {pe:.2e}")

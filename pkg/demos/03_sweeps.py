"""
Operation time and decay sweeps
===============================

Stretch the Hadamard gate in time and scale the atomic decay rate for the
NOT gate. Both sweeps run in parallel worker processes and are written as
CSV tables.
"""

import sys
from pathlib import Path

from superholo import GateProtocol, sweep_decay, sweep_operation_time
from superholo.gates import write_sweep_csv

out = Path(sys.argv[1] if len(sys.argv) > 1 else "demo_out")
out.mkdir(exist_ok=True)

if __name__ == "__main__":
    rows = sweep_operation_time(GateProtocol.hadamard(), (1, 1.5, 2, 3, 4), workers=2)
    write_sweep_csv(rows, out / "sweep_time_hadamard.csv")
    print("operation time (multiples of tau_min)")
    for r in rows:
        print(f"  {r.mode.value:>4} x{r.multiplier:<4} F = {r.fidelity:.4f}")

    # Longer pulses help the uncorrected gate adiabatically but cost the
    # corrected one more decay, so the two curves approach each other.
    rows = sweep_decay(GateProtocol.not_gate(), (0, 1, 2, 5, 10, 20), workers=2)
    write_sweep_csv(rows, out / "sweep_decay_not.csv")
    print("decay rate (multiples of Gamma_1)")
    for r in rows:
        print(f"  {r.mode.value:>4} x{r.multiplier:<4} F = {r.fidelity:.4f}")

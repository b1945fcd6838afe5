"""
Single-qubit holonomic gates
============================

Run the NOT and Hadamard gates with and without the superadiabatic
correction, in the closed system and under spontaneous decay and
dephasing, and compare the reconstructed gate with the ideal holonomy.
"""

import numpy as np

from superholo import (
    DressingConfig,
    GateProtocol,
    analytic_holonomy,
    gate_unitary_from_dynamics,
    run_single_qubit_gate,
)

for label, maker in [("NOT", GateProtocol.not_gate), ("Hadamard", GateProtocol.hadamard)]:
    for mode, dressing in [("none", DressingConfig.none()), ("satd", DressingConfig.satd())]:
        p = maker(dressing=dressing)
        closed = run_single_qubit_gate(p, open_system=False)
        noisy = run_single_qubit_gate(p)
        print(
            f"{label:>8} {mode:>4}: closed F = {closed.fidelity:.5f}, open F = {noisy.fidelity:.5f}, "
            f"peak |e> population {noisy.peak_intermediate_population:.2e}"
        )

# The gate acting on the {|0>, |1>} qubit, rebuilt from two basis runs.
p = GateProtocol.single_qubit(varphi=np.pi / 3, gamma=np.pi / 2)
rec = gate_unitary_from_dynamics(p)
np.set_printoptions(precision=4, suppress=True)
print("ideal holonomy:\n", analytic_holonomy(p.varphi, p.phi1 - p.phi2))
print("simulated:\n", rec.matrix)
print(f"max entry error {rec.max_entry_error:.2e}, leakage {np.max(rec.leakage):.2e}")

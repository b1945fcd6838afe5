"""Hamiltonians and collapse operators for the tripod atom and the Raman-cavity pair.

Basis orderings are fixed:

* single qubit: ``(|0>, |1>, |2>, |e>)``
* two qubits, restricted: ``(|000>, |001>, |100>, |010>, |110>)``, labels
  (atom 1, atom 2, cavity photons); the extended basis appends
  ``|011>, |101>`` to expose leakage of ``|110>``.

The adiabatic frame uses the eigenvectors ``(|+>, |d1>, |->, |d2>)`` with
``|+-> = (|b> -+ |e>)/sqrt(2)`` and ``|b> = sin(theta)|psi> + cos(theta) e^{i phi}|2>``.
With the drive written as ``sum_i Omega_i |e><i| + h.c.`` the bright pair
sits at energies ``-+Omega``. The frame Hamiltonian is therefore
``-Omega M_z + theta_dot M_y``.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.linalg import expm

from .errors import ConfigurationError, DispersiveValidityWarning
from .pulses import AdiabaticSchedule, CorrectedSchedule

KET0, KET1, KET2, KETE = range(4)
SINGLE_QUBIT_LABELS = ("0", "1", "2", "e")

# two-qubit restricted basis indices
G000, P001, A100, A010, A110 = range(5)
# extended-basis extras
P011, P101 = 5, 6
TWO_QUBIT_LABELS = ("000", "001", "100", "010", "110", "011", "101")

_S2 = np.sqrt(2.0)
MZ = np.diag([1.0, 0.0, -1.0]).astype(complex)
MX = np.array([[0, -1, 0], [-1, 0, 1], [0, 1, 0]], dtype=complex) / _S2
MY = np.array([[0, 1j, 0], [-1j, 0, -1j], [0, 1j, 0]], dtype=complex) / _S2

DISPERSIVE_RATIO_LIMIT = 0.01


def ket(index: int, dim: int) -> np.ndarray:
    v = np.zeros(dim, dtype=complex)
    v[index] = 1.0
    return v


def projector(i: int, j: int, dim: int) -> np.ndarray:
    """``|i><j|`` as a dense matrix."""
    m = np.zeros((dim, dim), dtype=complex)
    m[i, j] = 1.0
    return m


def hermiticity_error(h: np.ndarray) -> float:
    scale = max(np.linalg.norm(h, 2), 1e-300)
    return float(np.max(np.abs(h - h.conj().T)) / scale)


@dataclass(frozen=True)
class TripodModel:
    """Four-level atom with three ground states driven resonantly to ``|e>``."""

    corrected: CorrectedSchedule

    dim = 4

    def hamiltonian(self, t: float, leg: Optional[int] = None) -> np.ndarray:
        return single_qubit_hamiltonian(self, t, leg)

    def hamiltonian_batch(self, times: np.ndarray, leg: Optional[int] = None) -> np.ndarray:
        amps = self.corrected.amplitudes(np.asarray(times, dtype=float), leg).reshape(-1, 3)
        h = np.zeros((amps.shape[0], 4, 4), dtype=complex)
        h[:, KETE, :3] = amps
        h[:, :3, KETE] = amps.conj()
        return h

    def on_leg(self, leg: int) -> "LegHamiltonian":
        return LegHamiltonian(self, leg)


@dataclass(frozen=True)
class LegHamiltonian:
    """``H(t)`` of a model pinned to one leg, with a vectorised ``batch`` for the integrators."""

    model: object
    leg: int

    def __call__(self, t: float) -> np.ndarray:
        return self.model.hamiltonian(t, self.leg)

    def batch(self, times: np.ndarray) -> np.ndarray:
        return self.model.hamiltonian_batch(times, self.leg)


def single_qubit_hamiltonian(model: TripodModel, t: float, leg: Optional[int] = None) -> np.ndarray:
    """``H(t) = sum_i Omega'_i |e><i| + h.c.``, phase ``exp(-i phi)`` on the ``|2>`` channel."""
    amps = model.corrected.amplitudes(float(t), leg)
    h = np.zeros((4, 4), dtype=complex)
    h[KETE, :3] = amps
    h[:3, KETE] = amps.conj()
    return h


def tripod_hamiltonian_from_amplitudes(amps: Sequence[complex]) -> np.ndarray:
    h = np.zeros((4, 4), dtype=complex)
    h[KETE, :3] = amps
    h[:3, KETE] = np.conj(amps)
    return h


def adiabatic_basis(theta: float, varphi: float, phase: float) -> np.ndarray:
    """Columns ``|+>, |d1>, |->, |d2>`` in the bare basis (instantaneous eigenvectors)."""
    psi = np.array([np.sin(varphi), np.cos(varphi), 0, 0], dtype=complex)
    two = ket(KET2, 4)
    e = ket(KETE, 4)
    bright = np.sin(theta) * psi + np.cos(theta) * np.exp(1j * phase) * two
    d1 = np.cos(theta) * psi - np.sin(theta) * np.exp(1j * phase) * two
    d2 = np.array([np.cos(varphi), -np.sin(varphi), 0, 0], dtype=complex)
    return np.column_stack([(bright - e) / _S2, d1, (bright + e) / _S2, d2])


def dark_states(theta: float, varphi: float, phase: float) -> tuple[np.ndarray, np.ndarray]:
    w = adiabatic_basis(theta, varphi, phase)
    return w[:, 1], w[:, 3]


def adiabatic_frame_hamiltonian(schedule: AdiabaticSchedule, t: float, leg: Optional[int] = None) -> np.ndarray:
    """Uncorrected dynamics on ``(|+>, |d1>, |->)``: ``-Omega M_z + theta_dot M_y``."""
    omega = float(schedule.omega(t, leg))
    th_d = float(schedule.theta_dot(t, leg))
    return -omega * MZ + th_d * MY


def dressed_dark_state(corrected: CorrectedSchedule, t: float, leg: Optional[int] = None) -> np.ndarray:
    """Bare-basis vector that the corrected drive transports without transitions.

    The corrected drive, seen in the uncorrected adiabatic frame, adds
    ``-mu_dot M_x``. Rotating by ``exp(-i mu M_x)`` makes it diagonal. The
    dressed dark state is then ``W exp(+i mu M_x) |d1>``.
    """
    src = corrected.source
    leg = src.leg_of(t) if leg is None else leg
    w = adiabatic_basis(float(src.theta(t, leg)), src.varphi, src.phase(leg))[:, :3]
    mu = float(corrected.mu(t, leg))
    return w @ (expm(1j * mu * MX) @ np.array([0, 1, 0], dtype=complex))


def effective_coupling(lambda_c: float, omega_r: float, delta: float, coupling_divisor: int = 1) -> float:
    """Raman-eliminated atom-cavity coupling ``lambda_c * Omega_R / (divisor * Delta)``."""
    if coupling_divisor not in (1, 2):
        raise ConfigurationError("coupling_divisor must be 1 or 2")
    if delta == 0:
        raise ConfigurationError("detuning must be nonzero")
    return lambda_c * omega_r / (coupling_divisor * delta)


@dataclass(frozen=True)
class RamanCavityModel:
    """Two atoms sharing one cavity mode after adiabatic elimination of ``|e>``.

    ``corrected`` carries the mixing angle eta(t) and the amplitude G(t).
    Build it from :meth:`coupling` so the peak matches ``lambda_c``,
    ``omega_r`` and ``delta``.
    """

    lambda_c: float
    omega_r: float
    delta: float
    corrected: CorrectedSchedule
    coupling_divisor: int = 1
    extended: bool = False

    def __post_init__(self):
        g = self.coupling
        if abs(g / self.delta) >= DISPERSIVE_RATIO_LIMIT:
            warnings.warn(
                f"G/Delta = {abs(g / self.delta):.3g} is not << 1; the effective model is marginal",
                DispersiveValidityWarning,
                stacklevel=2,
            )

    @property
    def coupling(self) -> float:
        return effective_coupling(self.lambda_c, self.omega_r, self.delta, self.coupling_divisor)

    @property
    def dim(self) -> int:
        return 7 if self.extended else 5

    def hamiltonian(self, t: float, leg: Optional[int] = None) -> np.ndarray:
        return two_qubit_hamiltonian(self, t, leg)

    def hamiltonian_batch(self, times: np.ndarray, leg: Optional[int] = None) -> np.ndarray:
        times = np.asarray(times, dtype=float).reshape(-1)
        g = np.asarray(self.corrected.omega_prime(times, leg)).reshape(-1)
        eta = np.asarray(self.corrected.theta_prime(times, leg)).reshape(-1)
        legs = np.array([self.corrected.source.leg_of(t) for t in times]) if leg is None else np.full(times.size, leg)
        phases = np.asarray(self.corrected.leg_phases)[legs]
        g1 = g * np.sin(eta)
        g2 = g * np.cos(eta) * np.exp(-1j * phases)
        h = np.zeros((times.size, self.dim, self.dim), dtype=complex)
        h[:, P001, A100] = g1
        h[:, P001, A010] = g2
        if self.extended:
            h[:, P011, A110] = g1
            h[:, P101, A110] = g2
        return h + h.conj().transpose(0, 2, 1)

    def on_leg(self, leg: int) -> "LegHamiltonian":
        return LegHamiltonian(self, leg)

    def couplings(self, t: float, leg: Optional[int] = None) -> tuple[complex, complex]:
        """(G'_1, G'_2) with the leg phase on the second atom."""
        g = self.corrected.omega_prime(float(t), leg)
        eta = self.corrected.theta_prime(float(t), leg)
        leg = self.corrected.source.leg_of(t) if leg is None else leg
        phase = self.corrected.leg_phases[leg]
        return g * np.sin(eta), g * np.cos(eta) * np.exp(-1j * phase)


def two_qubit_hamiltonian(model: RamanCavityModel, t: float, leg: Optional[int] = None) -> np.ndarray:
    """``G'_1 |001><100| + G'_2 |001><010| + h.c.`` in the restricted basis.

    In the extended basis the same couplings also act on ``|110>``. It is
    coupled to ``|011>`` by atom 1 and to ``|101>`` by atom 2.
    """
    g1, g2 = model.couplings(t, leg)
    h = np.zeros((model.dim, model.dim), dtype=complex)
    h[P001, A100] = g1
    h[P001, A010] = g2
    if model.extended:
        h[P011, A110] = g1
        h[P101, A110] = g2
    return h + h.conj().T


def collapse_operators(
    kind: str,
    rates: Sequence[float],
    *,
    atomic_decay_scale: float = 1.0,
    extended: bool = False,
) -> list[tuple[np.ndarray, float]]:
    """Collapse operators paired with their rates.

    Every pair ``(A, rate)`` enters the master equation as
    ``rate * (A rho A^+ - {A^+ A, rho}/2)``.

    ``kind='single_qubit'``: ``|i><e|`` at Gamma_1 and ``|e><e| - |i><i|`` at
    Gamma_2 for i = 0, 1, 2 (kappa is unused).

    ``kind='two_qubit'``: the projected cavity annihilator at kappa, then
    one ``|0><1|`` per atom at ``Gamma_1 * atomic_decay_scale``.
    """
    kappa, gamma1, gamma2 = (float(r) for r in rates)
    if min(kappa, gamma1, gamma2) < 0 or atomic_decay_scale < 0:
        raise ConfigurationError("rates must be non-negative")
    if kind == "single_qubit":
        ops = [(projector(i, KETE, 4), gamma1) for i in range(3)]
        ops += [(projector(KETE, KETE, 4) - projector(i, i, 4), gamma2) for i in range(3)]
        return ops
    if kind == "two_qubit":
        dim = 7 if extended else 5
        a = projector(G000, P001, dim)
        lower1 = projector(G000, A100, dim) + projector(A010, A110, dim)
        lower2 = projector(G000, A010, dim) + projector(A100, A110, dim)
        if extended:
            a = a + projector(A010, P011, dim) + projector(A100, P101, dim)
            lower1 = lower1 + projector(P001, P101, dim)
            lower2 = lower2 + projector(P001, P011, dim)
        gamma_eff = gamma1 * atomic_decay_scale
        return [(a, kappa), (lower1, gamma_eff), (lower2, gamma_eff)]
    raise ConfigurationError(f"unknown collapse-operator kind {kind!r}")


@dataclass(frozen=True)
class LindbladModel:
    """Time-dependent Hamiltonian plus weighted collapse operators."""

    hamiltonian: Callable[[float], np.ndarray]
    collapses: tuple[tuple[np.ndarray, float], ...]
    dim: int

    def __post_init__(self):
        object.__setattr__(self, "collapses", tuple((np.asarray(op, dtype=complex), float(r)) for op, r in self.collapses))
        for op, rate in self.collapses:
            if rate < 0:
                raise ConfigurationError("collapse rates must be non-negative")
            if op.shape != (self.dim, self.dim):
                raise ConfigurationError(f"collapse operator shape {op.shape} does not match dim {self.dim}")

    @property
    def is_closed(self) -> bool:
        return all(rate == 0 for _, rate in self.collapses)


def operator_to_json(op: np.ndarray) -> str:
    op = np.asarray(op, dtype=complex)
    n = op.shape[0]
    entries = [[float(z.real), float(z.imag)] for z in op.reshape(-1)]
    return json.dumps({"dim": n, "entries": entries})


def operator_from_json(text: str) -> np.ndarray:
    doc = json.loads(text)
    n = int(doc["dim"])
    flat = np.array([complex(re, im) for re, im in doc["entries"]])
    if flat.size != n * n:
        raise ValueError("entry count does not match dim")
    return flat.reshape(n, n)

"""Two-leg holonomic gate protocols: simulation, reconstruction and sweeps."""

from __future__ import annotations

import csv
import enum
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import model as mdl
from .dynamics import IntegratorConfig, Trajectory, evolve_master, evolve_unitary, populations
from .errors import ConfigurationError, LeakageWarning
from .model import LindbladModel, RamanCavityModel, TripodModel, collapse_operators
from .pulses import (
    DEFAULT_MSA_F0,
    CorrectedSchedule,
    DressingConfig,
    DressingMode,
    correct_schedule,
    tau_min,
    vitanov_schedule,
)

TWO_PI = 2 * np.pi
MHZ = 1e6

# parameter set of the cesium cavity-QED proposal, all angular (rad/s)
OMEGA_MAX = TWO_PI * 750 * MHZ
GAMMA_ATOM = TWO_PI * 2.6 * MHZ
KAPPA_CAVITY = TWO_PI * 3.5 * MHZ
LAMBDA_C = TWO_PI * 750 * MHZ
DETUNING = TWO_PI * 4000 * MHZ

AMPLITUDE_RTOL = 1e-6
LEAKAGE_WARN = 0.01


class GateKind(str, enum.Enum):
    SINGLE_QUBIT = "single_qubit"
    TWO_QUBIT_CP = "cp"


def dressing_for(mode) -> DressingConfig:
    """Default dressing for a mode name (MSA gets the calibrated constant f0)."""
    mode = DressingMode(mode)
    if mode is DressingMode.MSA:
        return DressingConfig.msa(DEFAULT_MSA_F0)
    return DressingConfig(mode)


@dataclass(frozen=True)
class GateProtocol:
    """Everything needed to run one gate.

    ``tau=None`` means the shortest tau allowed by the amplitude constraint
    for SATD pulses, the same value for every dressing mode. The dark state
    picks up ``exp(i (phi1 - phi2))`` over the closed loop, exposed as
    :attr:`gamma`.
    """

    kind: GateKind = GateKind.SINGLE_QUBIT
    varphi: float = np.pi / 4
    phi1: float = 0.0
    phi2: float = np.pi
    dressing: DressingConfig = field(default_factory=DressingConfig.satd)
    tau: Optional[float] = None
    t_over_tau: float = 10.0
    omega_max: float = OMEGA_MAX
    kappa: float = 0.0
    gamma1: float = GAMMA_ATOM
    gamma2: float = GAMMA_ATOM
    lambda_c: float = LAMBDA_C
    omega_r: float = LAMBDA_C
    delta: float = DETUNING
    coupling_divisor: int = 1
    atomic_decay_scale: Optional[float] = None
    enforce_amplitude: bool = True

    def __post_init__(self):
        object.__setattr__(self, "kind", GateKind(self.kind))
        if min(self.kappa, self.gamma1, self.gamma2) < 0:
            raise ConfigurationError("rates must be non-negative")
        if self.tau is not None and self.tau <= 0:
            raise ConfigurationError("tau must be positive")
        if self.t_over_tau < 2:
            raise ConfigurationError("t_over_tau must be at least 2")

    @property
    def gamma(self) -> float:
        return self.phi1 - self.phi2

    @classmethod
    def single_qubit(cls, varphi: float, gamma: float, **kwargs) -> "GateProtocol":
        return cls(GateKind.SINGLE_QUBIT, varphi=varphi, phi1=0.0, phi2=float(np.mod(-gamma, TWO_PI)), **kwargs)

    @classmethod
    def not_gate(cls, **kwargs) -> "GateProtocol":
        return cls.single_qubit(np.pi / 4, np.pi, **kwargs)

    @classmethod
    def hadamard(cls, **kwargs) -> "GateProtocol":
        return cls.single_qubit(np.pi / 8, np.pi, **kwargs)

    @classmethod
    def controlled_phase(cls, **kwargs) -> "GateProtocol":
        params = dict(varphi=0.0, phi1=0.0, phi2=np.pi, kappa=KAPPA_CAVITY, gamma1=GAMMA_ATOM, gamma2=0.0)
        params.update(kwargs)
        return cls(GateKind.TWO_QUBIT_CP, **params)

    def with_(self, **changes) -> "GateProtocol":
        return replace(self, **changes)

    @property
    def amplitude(self) -> float:
        """Peak of the reference amplitude: Omega_max, or G_max for the CP gate."""
        if self.kind is GateKind.SINGLE_QUBIT:
            return self.omega_max
        return mdl.effective_coupling(self.lambda_c, self.omega_r, self.delta, self.coupling_divisor)

    def resolved_tau(self) -> float:
        if self.tau is not None:
            return self.tau
        return tau_min(self.amplitude, DressingConfig.satd(), self.t_over_tau)

    def decay_scale(self) -> float:
        if self.atomic_decay_scale is not None:
            return self.atomic_decay_scale
        return (self.omega_r / (2 * self.delta)) ** 2

    def corrected_schedule(self) -> CorrectedSchedule:
        sched = vitanov_schedule(
            self.amplitude,
            self.resolved_tau(),
            t_over_tau=self.t_over_tau,
            varphi=self.varphi,
            leg_phases=(self.phi1, self.phi2),
        )
        corrected = correct_schedule(sched, self.dressing)
        if self.enforce_amplitude:
            peak = corrected.peak_channel_amplitude()
            if peak > self.amplitude * (1 + AMPLITUDE_RTOL):
                raise ConfigurationError(
                    f"corrected drive peaks at {peak / self.amplitude:.6f} x the allowed maximum; "
                    "increase tau or disable enforce_amplitude"
                )
        return corrected


@dataclass
class GateResult:
    """Outcome of one gate run.

    ``peak_intermediate_population`` tracks ``|e>`` for the tripod and the
    one-photon state ``|001>`` for the cavity gate. ``leakage`` is the final
    population outside the computational states.
    """

    protocol: GateProtocol
    final_state: np.ndarray
    target: np.ndarray
    fidelity: float
    times: np.ndarray
    fidelity_trace: np.ndarray
    population_trace: np.ndarray
    peak_intermediate_population: float
    leakage: float
    labels: tuple[str, ...]
    gate_matrix: Optional[np.ndarray] = None
    gate_fidelity: Optional[float] = None
    warnings: list[str] = field(default_factory=list)

    @property
    def mode(self) -> DressingMode:
        return self.protocol.dressing.mode

    def summary(self) -> dict:
        out = {
            "kind": self.protocol.kind.value,
            "mode": self.mode.value,
            "tau": self.protocol.resolved_tau(),
            "duration": float(self.times[-1] - self.times[0]),
            "fidelity": self.fidelity,
            "peak_intermediate_population": self.peak_intermediate_population,
            "leakage": self.leakage,
            "final_state": _complex_matrix_json(self.final_state),
            "warnings": list(self.warnings),
        }
        if self.gate_matrix is not None:
            out["gate_matrix"] = _complex_matrix_json(self.gate_matrix)
            out["gate_fidelity"] = self.gate_fidelity
        return out


def _complex_matrix_json(m: np.ndarray) -> dict:
    m = np.asarray(m, dtype=complex)
    return {"dim": int(m.shape[0]), "entries": [[float(z.real), float(z.imag)] for z in m.reshape(-1)]}


def analytic_holonomy(varphi: float, gamma: float) -> np.ndarray:
    """Single-qubit holonomy on ``(|0>, |1>)``: phase ``e^{i gamma}`` on ``sin(varphi)|0> + cos(varphi)|1>``."""
    c, s = np.cos(varphi), np.sin(varphi)
    e = np.exp(1j * gamma)
    return np.array(
        [[c * c + e * s * s, c * s * (e - 1)], [c * s * (e - 1), s * s + e * c * c]],
        dtype=complex,
    )


def state_fidelity(rho: np.ndarray, target: np.ndarray) -> float:
    """``<target| rho |target>``; ``rho`` may also be a pure state vector."""
    rho = np.asarray(rho)
    target = np.asarray(target, dtype=complex)
    if abs(np.linalg.norm(target) - 1) > 1e-8:
        raise ValueError("target state is not normalised")
    if rho.ndim == 1:
        if rho.shape != target.shape:
            raise ValueError(f"dimension mismatch: {rho.shape} vs {target.shape}")
        return float(abs(np.vdot(target, rho)) ** 2)
    if rho.shape != (target.size, target.size):
        raise ValueError(f"dimension mismatch: {rho.shape} vs {target.shape}")
    return float(np.real(target.conj() @ rho @ target))


def align_global_phase(U: np.ndarray, V: np.ndarray) -> tuple[float, float]:
    """(max entrywise |U e^{-ia} - V|, |tr(V^+ U)|^2 / d^2) with a chosen to align traces."""
    overlap = np.trace(V.conj().T @ U)
    a = np.angle(overlap) if abs(overlap) > 0 else 0.0
    err = float(np.max(np.abs(U * np.exp(-1j * a) - V)))
    d = U.shape[0]
    return err, float(abs(overlap) ** 2 / d**2)


def _embed(vec2: np.ndarray, dim: int) -> np.ndarray:
    out = np.zeros(dim, dtype=complex)
    out[: len(vec2)] = vec2
    return out


def _evolve_two_legs(model, corrected: CorrectedSchedule, state0, collapses, dim, open_system, cfg) -> Trajectory:
    traj = None
    state = state0
    for leg in (0, 1):
        span = (leg * corrected.T, (leg + 1) * corrected.T)
        h_leg = model.on_leg(leg)
        if open_system:
            part = evolve_master(LindbladModel(h_leg, collapses, dim), state, span, cfg)
        else:
            part = evolve_unitary(h_leg, state, span, cfg)
        state = part.final
        traj = part if traj is None else traj.concat(part)
    return traj


def _as_density(states: np.ndarray) -> np.ndarray:
    if states.ndim == 2:
        return np.einsum("ti,tj->tij", states, states.conj())
    return states


def _finish(protocol, traj, target, dim, labels, intermediate, computational, open_system) -> GateResult:
    rhos = _as_density(traj.states)
    fid_trace = np.real(np.einsum("i,tij,j->t", target.conj(), rhos, target))
    pops = populations(rhos)
    final = rhos[-1]
    leakage = float(1.0 - sum(pops[-1][k] for k in computational))
    result = GateResult(
        protocol=protocol,
        final_state=final,
        target=target,
        fidelity=state_fidelity(final, target),
        times=traj.times,
        fidelity_trace=fid_trace,
        population_trace=pops,
        peak_intermediate_population=float(pops[:, intermediate].max()),
        leakage=leakage,
        labels=labels,
    )
    if not open_system and leakage > LEAKAGE_WARN:
        msg = f"closed-system leakage {leakage:.3g} exceeds {LEAKAGE_WARN}"
        result.warnings.append(msg)
    return result


def run_single_qubit_gate(
    protocol: GateProtocol,
    open_system: bool = True,
    *,
    initial: Optional[np.ndarray] = None,
    target: Optional[np.ndarray] = None,
    cfg: Optional[IntegratorConfig] = None,
) -> GateResult:
    """Drive the tripod through both legs and score the final state.

    ``initial`` defaults to ``|0>``. ``target`` defaults to the analytic
    holonomy applied to the initial qubit state. Closed-system runs
    integrate the Schroedinger equation. Open-system runs integrate the
    master equation.
    """
    if protocol.kind is not GateKind.SINGLE_QUBIT:
        raise ConfigurationError("protocol is not a single-qubit gate")
    corrected = protocol.corrected_schedule()
    tripod = TripodModel(corrected)
    psi0 = _embed(np.array([1.0, 0.0]), 4) if initial is None else np.asarray(initial, dtype=complex)
    if psi0.ndim == 1 and psi0.size == 2:
        psi0 = _embed(psi0, 4)
    if target is None:
        target = _embed(analytic_holonomy(protocol.varphi, protocol.gamma) @ psi0[:2], 4)
        target = target / np.linalg.norm(target)
    target = np.asarray(target, dtype=complex)
    if target.size == 2:
        target = _embed(target, 4)
    rates = (protocol.kappa, protocol.gamma1, protocol.gamma2)
    collapses = collapse_operators("single_qubit", rates) if open_system else []
    state0 = np.outer(psi0, psi0.conj()) if open_system else psi0
    traj = _evolve_two_legs(tripod, corrected, state0, collapses, 4, open_system, cfg)
    return _finish(protocol, traj, target, 4, mdl.SINGLE_QUBIT_LABELS, mdl.KETE, (mdl.KET0, mdl.KET1), open_system)


@dataclass
class GateReconstruction:
    """Closed-system gate on the qubit subspace, compared with the analytic holonomy."""

    matrix: np.ndarray
    leakage: np.ndarray
    reference: np.ndarray
    max_entry_error: float
    gate_fidelity: float
    warnings: list[str] = field(default_factory=list)


def gate_unitary_from_dynamics(protocol: GateProtocol, cfg: Optional[IntegratorConfig] = None) -> GateReconstruction:
    """Evolve |0> and |1> without dissipation, project onto the qubit and renormalise columns."""
    if protocol.kind is not GateKind.SINGLE_QUBIT:
        raise ConfigurationError("reconstruction is defined for single-qubit protocols")
    corrected = protocol.corrected_schedule()
    tripod = TripodModel(corrected)
    basis = np.zeros((4, 2), dtype=complex)
    basis[0, 0] = basis[1, 1] = 1.0
    traj = _evolve_two_legs(tripod, corrected, basis, [], 4, False, cfg)
    final = traj.final[:2, :]
    norms = np.linalg.norm(final, axis=0)
    leakage = 1.0 - norms**2
    U = final / norms
    ref = analytic_holonomy(protocol.varphi, protocol.gamma)
    err, fid = align_global_phase(U, ref)
    rec = GateReconstruction(U, leakage, ref, err, fid)
    if np.max(leakage) > LEAKAGE_WARN:
        msg = f"leakage {np.max(leakage):.3g} out of the qubit subspace"
        rec.warnings.append(msg)
        warnings.warn(msg, LeakageWarning, stacklevel=2)
    return rec


def dark_subspace_leakage(protocol: GateProtocol, cfg: Optional[IntegratorConfig] = None) -> tuple[np.ndarray, np.ndarray]:
    """Closed-system population outside the dressed dark state, starting in ``|d1(0)>``.

    Returns ``(times, leakage)``. On each leg the reference is the dressed
    dark state of that leg, times the phase picked up at the leg boundary.
    For uncorrected pulses it is the plain adiabatic dark state.
    """
    corrected = protocol.corrected_schedule()
    tripod = TripodModel(corrected)
    src = corrected.source
    d1, _ = mdl.dark_states(float(src.theta(0.0, 0)), src.varphi, src.phase(0))
    times, leak = [], []
    state = d1
    for leg in (0, 1):
        span = (leg * src.T, (leg + 1) * src.T)
        part = evolve_unitary(tripod.on_leg(leg), state, span, cfg)
        for t, psi in zip(part.times, part.states):
            dark = mdl.dressed_dark_state(corrected, t, leg)
            times.append(t)
            leak.append(1.0 - abs(np.vdot(dark, psi)) ** 2)
        state = part.final
    return np.array(times), np.array(leak)


def run_cp_gate(
    protocol: GateProtocol,
    open_system: bool = True,
    *,
    initial: Optional[np.ndarray] = None,
    target: Optional[np.ndarray] = None,
    extended: bool = False,
    cfg: Optional[IntegratorConfig] = None,
) -> GateResult:
    """Controlled-phase gate on the Raman-cavity pair.

    The default input is ``(|10> + |00>)/sqrt(2)`` with ``|00> = |000>``. The
    default target puts ``exp(i gamma)`` on ``|10>``. The reported
    ``gate_matrix`` is the closed-system action on ``(|00>, |10>, |01>, |11>)``.
    """
    if protocol.kind is not GateKind.TWO_QUBIT_CP:
        raise ConfigurationError("protocol is not a CP gate")
    corrected = protocol.corrected_schedule()
    cavity = RamanCavityModel(
        protocol.lambda_c, protocol.omega_r, protocol.delta, corrected, protocol.coupling_divisor, extended
    )
    dim = cavity.dim
    if initial is None:
        initial = (mdl.ket(mdl.A100, dim) + mdl.ket(mdl.G000, dim)) / np.sqrt(2)
    initial = np.asarray(initial, dtype=complex)
    if target is None:
        target = (np.exp(1j * protocol.gamma) * mdl.ket(mdl.A100, dim) + mdl.ket(mdl.G000, dim)) / np.sqrt(2)
    target = np.asarray(target, dtype=complex)
    rates = (protocol.kappa, protocol.gamma1, protocol.gamma2)
    collapses = (
        collapse_operators("two_qubit", rates, atomic_decay_scale=protocol.decay_scale(), extended=extended)
        if open_system
        else []
    )
    state0 = np.outer(initial, initial.conj()) if open_system else initial
    traj = _evolve_two_legs(cavity, corrected, state0, collapses, dim, open_system, cfg)
    computational = (mdl.G000, mdl.A100, mdl.A010, mdl.A110)
    result = _finish(protocol, traj, target, dim, mdl.TWO_QUBIT_LABELS[:dim], mdl.P001, computational, open_system)
    result.gate_matrix = cp_gate_matrix(protocol, cfg=cfg, cavity=cavity)
    ideal = np.diag([1.0, np.exp(1j * protocol.gamma), 1.0, 1.0])
    result.gate_fidelity = align_global_phase(result.gate_matrix, ideal)[1]
    return result


def cp_gate_matrix(
    protocol: GateProtocol, cfg: Optional[IntegratorConfig] = None, cavity: Optional[RamanCavityModel] = None
) -> np.ndarray:
    """Closed-system propagator restricted to ``(|000>, |100>, |010>, |110>)`` (not renormalised)."""
    if cavity is None:
        cavity = RamanCavityModel(
            protocol.lambda_c, protocol.omega_r, protocol.delta, protocol.corrected_schedule(), protocol.coupling_divisor
        )
    comp = [mdl.G000, mdl.A100, mdl.A010, mdl.A110]
    basis = np.zeros((cavity.dim, 4), dtype=complex)
    for col, idx in enumerate(comp):
        basis[idx, col] = 1.0
    traj = _evolve_two_legs(cavity, cavity.corrected, basis, [], cavity.dim, False, cfg)
    return traj.final[comp, :]


def cp_phase_report(matrix: np.ndarray) -> dict[str, dict[str, float]]:
    """Return-probability and phase of each computational state, relative to ``|00>``."""
    ref = np.angle(matrix[0, 0])
    out = {}
    for k, lab in enumerate(("00", "10", "01", "11")):
        amp = matrix[k, k]
        out[lab] = {
            "population": float(abs(amp) ** 2),
            "phase": float(np.angle(amp * np.exp(-1j * ref))),
        }
    return out


def run_gate(protocol: GateProtocol, open_system: bool = True, cfg: Optional[IntegratorConfig] = None) -> GateResult:
    if protocol.kind is GateKind.SINGLE_QUBIT:
        return run_single_qubit_gate(protocol, open_system, cfg=cfg)
    return run_cp_gate(protocol, open_system, cfg=cfg)


@dataclass(frozen=True)
class SweepRow:
    mode: DressingMode
    multiplier: float
    fidelity: float
    peak_e_population: float
    leakage: float


SWEEP_CSV_HEADER = ("mode", "multiplier", "fidelity", "peak_e_population", "leakage")


def _sweep_point(args) -> SweepRow:
    protocol, multiplier, cfg = args
    res = run_gate(protocol, True, cfg)
    return SweepRow(protocol.dressing.mode, multiplier, res.fidelity, res.peak_intermediate_population, res.leakage)


def _run_points(tasks, workers: int) -> list[SweepRow]:
    if workers <= 1 or len(tasks) <= 1:
        return [_sweep_point(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        # map preserves submission order, so rows come back in grid order
        return list(pool.map(_sweep_point, tasks))


def sweep_operation_time(
    protocol: GateProtocol,
    multipliers: Sequence[float],
    modes: Sequence = (DressingMode.NONE, DressingMode.SATD, DressingMode.MSA),
    *,
    workers: int = 1,
    cfg: Optional[IntegratorConfig] = None,
) -> list[SweepRow]:
    """Open-system fidelity with the whole protocol stretched by each multiplier.

    tau is scaled with T/tau held fixed. The base tau is the protocol's own
    (tau_min by default) for every mode.
    """
    if len(multipliers) == 0:
        raise ConfigurationError("empty multiplier list")
    if any(m <= 0 for m in multipliers):
        raise ConfigurationError("time multipliers must be positive")
    base_tau = protocol.resolved_tau()
    tasks = [
        (protocol.with_(dressing=dressing_for(mode), tau=base_tau * m), float(m), cfg)
        for mode in modes
        for m in multipliers
    ]
    return _run_points(tasks, workers)


def sweep_decay(
    protocol: GateProtocol,
    gamma_multipliers: Sequence[float],
    modes: Sequence = (DressingMode.SATD, DressingMode.MSA),
    *,
    workers: int = 1,
    cfg: Optional[IntegratorConfig] = None,
) -> list[SweepRow]:
    """Open-system fidelity with Gamma_1 scaled by each multiplier.

    Gamma_2 stays at its base value, except in a zero-multiplier row, where
    it is zeroed too (the no-dissipation reference).
    """
    if len(gamma_multipliers) == 0:
        raise ConfigurationError("empty multiplier list")
    if any(m < 0 for m in gamma_multipliers):
        raise ConfigurationError("decay multipliers must be non-negative")
    base_tau = protocol.resolved_tau()
    tasks = []
    for mode in modes:
        for m in gamma_multipliers:
            p = protocol.with_(dressing=dressing_for(mode), tau=base_tau, gamma1=protocol.gamma1 * m)
            if m == 0:
                p = p.with_(gamma2=0.0)
            tasks.append((p, float(m), cfg))
    return _run_points(tasks, workers)


def write_sweep_csv(rows: Sequence[SweepRow], path) -> Path:
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(SWEEP_CSV_HEADER)
        for r in rows:
            w.writerow([r.mode.value, repr(r.multiplier), repr(r.fidelity), repr(r.peak_e_population), repr(r.leakage)])
    return path


@dataclass
class MSACalibration:
    f0: float
    grid: np.ndarray
    feasible: np.ndarray
    peak_excited: np.ndarray


def calibrate_msa_factor(
    grid: Optional[Sequence[float]] = None,
    *,
    omega_max: float = OMEGA_MAX,
    t_over_tau: float = 10.0,
    enforce_amplitude: bool = True,
    cfg: Optional[IntegratorConfig] = None,
) -> MSACalibration:
    """Pick the constant MSA factor f0 that minimises the peak ``|e>`` population.

    Each candidate runs the closed-system NOT gate at the SATD tau_min.
    Candidates whose drives exceed ``omega_max`` are discarded unless
    ``enforce_amplitude`` is False.
    """
    grid = np.round(np.arange(0.3, 3.0 + 1e-9, 0.1), 10) if grid is None else np.asarray(grid, dtype=float)
    tau = tau_min(omega_max, DressingConfig.satd(), t_over_tau)
    feasible = np.zeros(grid.size, dtype=bool)
    peaks = np.full(grid.size, np.nan)
    for i, f0 in enumerate(grid):
        protocol = GateProtocol.not_gate(
            dressing=DressingConfig.msa(float(f0)),
            tau=tau,
            t_over_tau=t_over_tau,
            omega_max=omega_max,
            enforce_amplitude=enforce_amplitude,
        )
        try:
            corrected = protocol.corrected_schedule()
        except ConfigurationError:
            continue
        del corrected
        feasible[i] = True
        peaks[i] = run_single_qubit_gate(protocol, open_system=False, cfg=cfg).peak_intermediate_population
    if not feasible.any():
        raise ConfigurationError("no feasible dressing factor on the grid")
    best = int(np.nanargmin(peaks))
    return MSACalibration(float(grid[best]), grid, feasible, peaks)

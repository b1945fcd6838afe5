"""Fixed-step RK4 integration of the Schroedinger and Lindblad equations.

Both integrators work on small dense matrices. The step size is either
given or chosen so that ``max_t ||H(t)|| * dt <= max_phase`` (0.01 rad by
default). Total decay rates are also taken into account. States are kept
at a fixed number of uniformly spaced samples whatever the step count.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, NamedTuple, Optional, Sequence

import numpy as np

from .errors import IntegrationDivergedError
from .model import LindbladModel

TRACE_DIVERGENCE = 1e-4
# RK4 keeps the trace exactly for a trace-free generator, so unstable steps
# show up in tr(rho^2) > 1 rather than in the trace
PURITY_DIVERGENCE = 1e-4
NORM_DIVERGENCE = 1e-4


@dataclass(frozen=True)
class IntegratorConfig:
    """``dt=None`` selects the step automatically from the Hamiltonian norm."""

    dt: Optional[float] = None
    samples: int = 400
    max_phase: float = 0.01
    min_steps: int = 64

    def __post_init__(self):
        if self.dt is not None and self.dt <= 0:
            raise ValueError("dt must be positive")
        if self.samples < 2:
            raise ValueError("need at least two retained samples")


@dataclass
class Trajectory:
    times: np.ndarray
    states: np.ndarray
    dt: float
    steps: int

    @property
    def final(self) -> np.ndarray:
        return self.states[-1]

    def __len__(self):
        return len(self.times)

    def concat(self, other: "Trajectory") -> "Trajectory":
        """Join a trajectory that starts where this one ends (drops the duplicate point)."""
        return Trajectory(
            np.concatenate([self.times, other.times[1:]]),
            np.concatenate([self.states, other.states[1:]]),
            min(self.dt, other.dt),
            self.steps + other.steps,
        )


class StateDiagnostics(NamedTuple):
    trace_deviation: float
    hermiticity_deviation: float
    min_eigenvalue: float


def check_state(rho: np.ndarray) -> StateDiagnostics:
    """Trace deviation, Hermiticity deviation and smallest eigenvalue of ``rho``."""
    rho = np.asarray(rho)
    trace_dev = abs(np.trace(rho) - 1.0)
    herm_dev = np.max(np.abs(rho - rho.conj().T)) if rho.size else 0.0
    min_eig = np.linalg.eigvalsh(0.5 * (rho + rho.conj().T)).min()
    return StateDiagnostics(float(trace_dev), float(herm_dev), float(min_eig))


def lindblad_rhs(rho: np.ndarray, H: np.ndarray, collapses: Sequence[tuple[np.ndarray, float]]) -> np.ndarray:
    """``-i[H, rho] + sum_k rate_k (A rho A^+ - {A^+ A, rho}/2)``.

    This is the same as ``(rate/2) L(A)`` with
    ``L(A) = 2 A rho A^+ - A^+ A rho - rho A^+ A``.
    """
    rho = np.asarray(rho)
    H = np.asarray(H)
    if rho.shape != H.shape:
        raise ValueError(f"dimension mismatch: rho {rho.shape} vs H {H.shape}")
    out = -1j * (H @ rho - rho @ H)
    for op, rate in collapses:
        if op.shape != rho.shape:
            raise ValueError(f"dimension mismatch: collapse {op.shape} vs rho {rho.shape}")
        if rate == 0:
            continue
        opd = op.conj().T
        opdop = opd @ op
        out += rate * (op @ rho @ opd - 0.5 * (opdop @ rho + rho @ opdop))
    return out


class _Dissipator:
    """Precomputed jump operators so the inner loop avoids Python-level sums."""

    def __init__(self, collapses):
        active = [(np.sqrt(rate) * op) for op, rate in collapses if rate > 0]
        if active:
            self.jumps = np.array(active)
            self.jumps_dag = self.jumps.conj().transpose(0, 2, 1)
            self.k_half = 0.5 * np.einsum("kji,kjl->il", self.jumps.conj(), self.jumps)
        else:
            self.jumps = None

    def __call__(self, rho: np.ndarray) -> np.ndarray:
        if self.jumps is None:
            return 0.0
        return (self.jumps @ rho @ self.jumps_dag).sum(axis=0) - self.k_half @ rho - rho @ self.k_half


def hamiltonian_grid(hamiltonian: Callable[[float], np.ndarray], times: np.ndarray) -> np.ndarray:
    """Stack ``H(t)`` over ``times``, using ``hamiltonian.batch`` when the callable provides one."""
    batch = getattr(hamiltonian, "batch", None)
    if batch is not None:
        return np.asarray(batch(times), dtype=complex)
    return np.array([hamiltonian(float(t)) for t in times], dtype=complex)


def _spectral_scale(hamiltonian: Callable[[float], np.ndarray], t0: float, t1: float, probes: int = 257) -> float:
    hs = hamiltonian_grid(hamiltonian, np.linspace(t0, t1, probes))
    return float(np.max(np.abs(np.linalg.eigvalsh(hs))))


class _StageHamiltonians:
    """``H`` at the RK4 stage times ``t0 + j dt/2``, evaluated lazily in chunks."""

    CHUNK = 4096

    def __init__(self, hamiltonian, t0: float, dt: float, steps: int):
        self.h, self.t0, self.dt, self.steps = hamiltonian, t0, dt, steps
        self.start = -1
        self.block = None

    def __call__(self, j: int) -> np.ndarray:
        if self.block is None or not (self.start <= j < self.start + len(self.block)):
            self.start = j
            stop = min(j + 2 * self.CHUNK + 1, 2 * self.steps + 1)
            self.block = hamiltonian_grid(self.h, self.t0 + 0.5 * self.dt * np.arange(j, stop))
        return self.block[j - self.start]


def _plan_steps(span: float, dt_max: float, samples: int, min_steps: int) -> tuple[int, int]:
    """Step count (a multiple of samples-1) and the stride between retained samples."""
    intervals = samples - 1
    steps = max(math.ceil(span / dt_max - 1e-9), min_steps, 1)
    stride = math.ceil(steps / intervals)
    return stride * intervals, stride


def _auto_dt(hamiltonian, t0, t1, rate_sum, cfg: IntegratorConfig) -> float:
    if cfg.dt is not None:
        return cfg.dt
    scale = _spectral_scale(hamiltonian, t0, t1) + rate_sum
    if scale == 0:
        return (t1 - t0) / cfg.min_steps
    return cfg.max_phase / scale


def evolve_master(
    model: LindbladModel,
    rho0: np.ndarray,
    t_span: tuple[float, float],
    cfg: Optional[IntegratorConfig] = None,
) -> Trajectory:
    """Integrate the master equation from ``t_span[0]`` to ``t_span[1]`` with RK4.

    The state is re-symmetrised after every step. At every retained sample,
    a trace drift or a purity ``tr(rho^2)`` above one by more than ``1e-4``
    raises :class:`IntegrationDivergedError`.
    """
    cfg = cfg or IntegratorConfig()
    t0, t1 = map(float, t_span)
    rho = np.array(rho0, dtype=complex)
    if rho.shape != (model.dim, model.dim):
        raise ValueError(f"rho0 shape {rho.shape} does not match model dim {model.dim}")
    diss = _Dissipator(model.collapses)
    rate_sum = sum(rate * float(np.linalg.norm(op, 2)) ** 2 for op, rate in model.collapses)
    dt_max = _auto_dt(model.hamiltonian, t0, t1, rate_sum, cfg)
    steps, stride = _plan_steps(t1 - t0, dt_max, cfg.samples, 1 if cfg.dt is not None else cfg.min_steps)
    dt = (t1 - t0) / steps
    stage = _StageHamiltonians(model.hamiltonian, t0, dt, steps)

    def rhs(j, r):
        h = stage(j)
        return -1j * (h @ r - r @ h) + diss(r)

    times = [t0]
    states = [rho.copy()]
    for k in range(steps):
        k1 = rhs(2 * k, rho)
        k2 = rhs(2 * k + 1, rho + 0.5 * dt * k1)
        k3 = rhs(2 * k + 1, rho + 0.5 * dt * k2)
        k4 = rhs(2 * k + 2, rho + dt * k3)
        rho = rho + (dt / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        rho = 0.5 * (rho + rho.conj().T)
        if (k + 1) % stride == 0:
            drift = abs(np.trace(rho).real - 1.0)
            excess = np.vdot(rho, rho).real - 1.0
            if not np.isfinite(drift) or drift > TRACE_DIVERGENCE or excess > PURITY_DIVERGENCE:
                raise IntegrationDivergedError(
                    f"state left the density-matrix set (trace drift {drift:.3g}, purity excess {excess:.3g}) "
                    f"at t = {t0 + (k + 1) * dt:.6g}; reduce dt (currently {dt:.3g})"
                )
            times.append(t0 + (k + 1) * dt)
            states.append(rho.copy())
    return Trajectory(np.array(times), np.array(states), dt, steps)


def evolve_unitary(
    hamiltonian: Callable[[float], np.ndarray],
    psi0: np.ndarray,
    t_span: tuple[float, float],
    cfg: Optional[IntegratorConfig] = None,
) -> Trajectory:
    """RK4 for ``i d|psi>/dt = H(t)|psi>``; also accepts a matrix of column states."""
    cfg = cfg or IntegratorConfig()
    t0, t1 = map(float, t_span)
    psi = np.array(psi0, dtype=complex)
    norm0 = np.linalg.norm(psi, axis=0)
    dt_max = _auto_dt(hamiltonian, t0, t1, 0.0, cfg)
    steps, stride = _plan_steps(t1 - t0, dt_max, cfg.samples, 1 if cfg.dt is not None else cfg.min_steps)
    dt = (t1 - t0) / steps

    stage = _StageHamiltonians(hamiltonian, t0, dt, steps)

    def rhs(j, p):
        return -1j * (stage(j) @ p)

    times = [t0]
    states = [psi.copy()]
    for k in range(steps):
        k1 = rhs(2 * k, psi)
        k2 = rhs(2 * k + 1, psi + 0.5 * dt * k1)
        k3 = rhs(2 * k + 1, psi + 0.5 * dt * k2)
        k4 = rhs(2 * k + 2, psi + dt * k3)
        psi = psi + (dt / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        if (k + 1) % stride == 0:
            drift = float(np.max(np.abs(np.linalg.norm(psi, axis=0) - norm0)))
            if not np.isfinite(drift) or drift > NORM_DIVERGENCE:
                raise IntegrationDivergedError(f"norm drifted by {drift:.3g}; reduce dt (currently {dt:.3g})")
            times.append(t0 + (k + 1) * dt)
            states.append(psi.copy())
    return Trajectory(np.array(times), np.array(states), dt, steps)


def populations(states: np.ndarray) -> np.ndarray:
    """Diagonal populations for a stack of density matrices or state vectors."""
    states = np.asarray(states)
    if states.ndim >= 2 and states.shape[-1] == states.shape[-2]:
        return np.real(np.diagonal(states, axis1=-2, axis2=-1))
    return np.abs(states) ** 2


def write_trajectory_csv(path, times, fidelity, pops, labels: Optional[Sequence[str]] = None) -> Path:
    """CSV ``t,fidelity,trace_dev,pop_<label>...`` with one population column per basis state.

    ``pops`` has shape ``(n_times, dim)``. The trace deviation is
    ``|sum(pops) - 1|``, which is the trace of rho minus one.
    """
    path = Path(path)
    pops = np.asarray(pops, dtype=float)
    dim = pops.shape[-1]
    labels = list(labels[:dim]) if labels is not None else [str(i) for i in range(dim)]
    trace_dev = np.abs(np.sum(pops, axis=1) - 1.0)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t", "fidelity", "trace_dev", *[f"pop_{lab}" for lab in labels]])
        for i, t in enumerate(times):
            w.writerow([repr(float(t)), repr(float(fidelity[i])), repr(float(trace_dev[i])), *[repr(float(p)) for p in pops[i]]])
    return path

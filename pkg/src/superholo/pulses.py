"""Adiabatic reference schedules and their superadiabatic corrections.

A two-leg protocol drives a mixing angle theta(t) from ~0 to ~pi/2 on the
first leg, [0, T), and back on the second, [T, 2T]. Both legs share the
constant axis angle ``varphi``. Each leg has its own constant drive phase.

The corrections reshape the drive amplitudes so that the state follows a
dressed dark state exactly. SATD uses the superadiabatic dressing angle
``mu = -arctan(theta_dot / Omega)``. MSA divides ``Omega`` by a positive
dressing function ``f(t)`` and adds the ``g_z`` field that keeps the dressed
frame diagonal.

Times are in seconds and rates in rad/s throughout.
"""

from __future__ import annotations

import csv
import enum
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional, Sequence, Union

import numpy as np
from scipy.special import expit

from .errors import BoundaryResidualWarning, ConfigurationError, DomainError, SingularityError

ArrayLike = Union[float, np.ndarray]

#: Calibrated constant for the default MSA dressing function f(t) = f0; see
#: :func:`superholo.gates.calibrate_msa_factor`.
DEFAULT_MSA_F0 = 1.0

#: Default tolerance on |mu| at the protocol endpoints (rad).
DEFAULT_MU_TOL = 0.05

_FD_REL_STEP = 1e-6
PULSE_CSV_HEADER = ("t", "re_omega0", "im_omega0", "re_omega1", "im_omega1", "re_omega2", "im_omega2")


def _scalar_or_array(x: np.ndarray) -> ArrayLike:
    return float(x) if np.ndim(x) == 0 else x


def _leg_index(t: np.ndarray, T: float, leg: Optional[int]) -> np.ndarray:
    if leg is None:
        return (t >= T).astype(int)
    if leg not in (0, 1):
        raise ValueError(f"leg must be 0 or 1, got {leg!r}")
    return np.full(np.shape(t), leg, dtype=int)


def _check_domain(t: np.ndarray, T: float, leg: Optional[int] = None) -> None:
    lo, hi = (0.0, 2 * T) if leg is None else (leg * T, (leg + 1) * T)
    # tolerate roundoff from grids built as k * dt
    slack = 1e-12 * T
    if np.any(t < lo - slack) or np.any(t > hi + slack):
        raise DomainError(f"t outside [{lo:g}, {hi:g}]")


def _logistic(t: np.ndarray, T: float, tau: float, legs: np.ndarray) -> np.ndarray:
    centre = np.where(legs == 1, 1.5 * T, 0.5 * T)
    return expit((t - centre) / tau)


def vitanov_theta(t: ArrayLike, T: float, tau: float, leg: Optional[int] = None) -> ArrayLike:
    """Logistic mixing angle of the two-leg protocol.

    ``pi / (2 + 2 exp(-(t - T/2)/tau))`` on the first leg and
    ``pi/2 - pi / (2 + 2 exp(-(t - 3T/2)/tau))`` on the second.

    Parameters
    ----------
    t : float or ndarray
        Time(s) in [0, 2T].
    T, tau : float
        Leg duration and logistic width.
    leg : {0, 1}, optional
        Force the formula of one leg (useful at the shared point t = T).
        By default the leg is inferred from ``t``.
    """
    if tau <= 0:
        raise ConfigurationError("tau must be positive")
    t = np.asarray(t, dtype=float)
    _check_domain(t, T, leg)
    legs = _leg_index(t, T, leg)
    s = _logistic(t, T, tau, legs)
    theta = np.where(legs == 1, np.pi / 2 - np.pi / 2 * s, np.pi / 2 * s)
    return _scalar_or_array(theta)


def theta_dot(t: ArrayLike, T: float, tau: float, leg: Optional[int] = None) -> ArrayLike:
    """Analytic time derivative of :func:`vitanov_theta` (one-sided at t = T)."""
    if tau <= 0:
        raise ConfigurationError("tau must be positive")
    t = np.asarray(t, dtype=float)
    _check_domain(t, T, leg)
    legs = _leg_index(t, T, leg)
    s = _logistic(t, T, tau, legs)
    sign = np.where(legs == 1, -1.0, 1.0)
    return _scalar_or_array(sign * (np.pi / 2) * s * (1 - s) / tau)


def theta_ddot(t: ArrayLike, T: float, tau: float, leg: Optional[int] = None) -> ArrayLike:
    """Second derivative of :func:`vitanov_theta`."""
    t = np.asarray(t, dtype=float)
    _check_domain(t, T, leg)
    legs = _leg_index(t, T, leg)
    s = _logistic(t, T, tau, legs)
    sign = np.where(legs == 1, -1.0, 1.0)
    return _scalar_or_array(sign * (np.pi / 2) * s * (1 - s) * (1 - 2 * s) / tau**2)


def truncation_angle(t_over_tau: float) -> float:
    """Mixing angle left at t = 0 by a finite leg of length ``t_over_tau * tau``."""
    return float(np.pi / 2 * expit(-t_over_tau / 2))


def _central_difference(fn, t: np.ndarray, leg: Optional[int], T: float) -> np.ndarray:
    # the stencil is clipped to the active leg so the piecewise kink at T is never straddled
    h = _FD_REL_STEP * T
    legs = _leg_index(t, T, leg)
    lo = legs * T
    hi = lo + T
    tp = np.minimum(t + h, hi)
    tm = np.maximum(t - h, lo)
    return (fn(tp, leg) - fn(tm, leg)) / (tp - tm)


@dataclass(frozen=True)
class AdiabaticSchedule:
    """Uncorrected control parameterisation of a two-leg protocol.

    Every callable takes ``(t, leg)`` where ``leg`` is None (infer from t) or
    0/1. The derivative callables are optional. When they are missing,
    central finite differences with step ``T * 1e-6`` are used.
    """

    mixing_angle: Callable[[np.ndarray, Optional[int]], np.ndarray]
    amplitude: Callable[[np.ndarray, Optional[int]], np.ndarray]
    varphi: float
    leg_phases: tuple[float, float]
    T: float
    tau: float
    mixing_rate: Optional[Callable] = None
    mixing_accel: Optional[Callable] = None
    amplitude_rate: Optional[Callable] = None
    peak_amplitude: Optional[float] = None

    def __post_init__(self):
        if self.tau <= 0 or self.T <= 0:
            raise ConfigurationError("T and tau must be positive")
        if self.T < 2 * self.tau:
            raise ConfigurationError(f"T = {self.T:g} must be at least 2*tau = {2 * self.tau:g}")
        if len(self.leg_phases) != 2:
            raise ConfigurationError("leg_phases must be a pair")
        object.__setattr__(self, "leg_phases", (float(self.leg_phases[0]), float(self.leg_phases[1])))

    @classmethod
    def from_functions(cls, theta, omega, *, varphi, leg_phases, T, tau, **kwargs):
        """Build a schedule from plain ``f(t)`` callables (derivatives by finite differences)."""
        return cls(
            mixing_angle=lambda t, leg=None: np.asarray(theta(t), dtype=float),
            amplitude=lambda t, leg=None: np.asarray(omega(t), dtype=float),
            varphi=varphi,
            leg_phases=leg_phases,
            T=T,
            tau=tau,
            **kwargs,
        )

    @property
    def duration(self) -> float:
        return 2 * self.T

    def leg_of(self, t: float) -> int:
        return 0 if t < self.T else 1

    def phase(self, leg: int) -> float:
        return self.leg_phases[leg]

    def theta(self, t, leg=None):
        return self.mixing_angle(np.asarray(t, dtype=float), leg)

    def omega(self, t, leg=None):
        return self.amplitude(np.asarray(t, dtype=float), leg)

    def theta_dot(self, t, leg=None):
        t = np.asarray(t, dtype=float)
        if self.mixing_rate is not None:
            return self.mixing_rate(t, leg)
        return _central_difference(self.mixing_angle, t, leg, self.T)

    def theta_ddot(self, t, leg=None):
        t = np.asarray(t, dtype=float)
        if self.mixing_accel is not None:
            return self.mixing_accel(t, leg)
        return _central_difference(lambda s, lg: self.theta_dot(s, lg), t, leg, self.T)

    def omega_dot(self, t, leg=None):
        t = np.asarray(t, dtype=float)
        if self.amplitude_rate is not None:
            return self.amplitude_rate(t, leg)
        return _central_difference(self.amplitude, t, leg, self.T)

    @property
    def has_analytic_derivatives(self) -> bool:
        return self.mixing_rate is not None and self.mixing_accel is not None and self.amplitude_rate is not None


def vitanov_schedule(
    amplitude: float,
    tau: float,
    *,
    t_over_tau: float = 10.0,
    varphi: float = 0.0,
    leg_phases: Sequence[float] = (0.0, np.pi),
) -> AdiabaticSchedule:
    """Logistic mixing angle with a constant amplitude ``amplitude`` (rad/s).

    The same machinery serves the single-qubit tripod (theta, Omega_max) and
    the two-qubit Raman-cavity model (eta, G_max).
    """
    if amplitude <= 0:
        raise ConfigurationError("amplitude must be positive")
    if tau <= 0:
        raise ConfigurationError("tau must be positive")
    T = t_over_tau * tau

    def const(t, leg=None):
        return np.full(np.shape(t), amplitude, dtype=float)

    def zero(t, leg=None):
        return np.zeros(np.shape(t), dtype=float)

    return AdiabaticSchedule(
        mixing_angle=lambda t, leg=None: np.asarray(vitanov_theta(t, T, tau, leg)),
        amplitude=const,
        varphi=float(varphi),
        leg_phases=tuple(leg_phases),
        T=T,
        tau=tau,
        mixing_rate=lambda t, leg=None: np.asarray(theta_dot(t, T, tau, leg)),
        mixing_accel=lambda t, leg=None: np.asarray(theta_ddot(t, T, tau, leg)),
        amplitude_rate=zero,
        peak_amplitude=float(amplitude),
    )


class DressingMode(str, enum.Enum):
    NONE = "none"
    SATD = "satd"
    MSA = "msa"


@dataclass(frozen=True)
class DressingConfig:
    """Which correction to apply, plus the MSA dressing function f(t).

    ``dressing_function`` may be a positive constant or a callable of t. For
    a callable, ``dressing_rate`` (df/dt) may be supplied. Otherwise mu_dot
    falls back to finite differences.
    """

    mode: DressingMode = DressingMode.SATD
    dressing_function: Union[float, Callable[[np.ndarray], np.ndarray]] = 1.0
    dressing_rate: Optional[Callable[[np.ndarray], np.ndarray]] = None

    def __post_init__(self):
        object.__setattr__(self, "mode", DressingMode(self.mode))
        if not callable(self.dressing_function) and not self.dressing_function > 0:
            raise ConfigurationError("dressing function f must be positive")

    @classmethod
    def none(cls) -> "DressingConfig":
        return cls(DressingMode.NONE)

    @classmethod
    def satd(cls) -> "DressingConfig":
        return cls(DressingMode.SATD)

    @classmethod
    def msa(cls, f: Union[float, Callable] = DEFAULT_MSA_F0, f_dot: Optional[Callable] = None) -> "DressingConfig":
        return cls(DressingMode.MSA, f, f_dot)

    def f(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        if self.mode is not DressingMode.MSA:
            return np.ones_like(t)
        if callable(self.dressing_function):
            return np.asarray(self.dressing_function(t), dtype=float)
        return np.full_like(t, float(self.dressing_function))

    def f_dot(self, t) -> Optional[np.ndarray]:
        """df/dt, or None when it has to be estimated numerically."""
        t = np.asarray(t, dtype=float)
        if self.mode is not DressingMode.MSA or not callable(self.dressing_function):
            return np.zeros_like(t)
        if self.dressing_rate is not None:
            return np.asarray(self.dressing_rate(t), dtype=float)
        return None


def compute_mu(schedule: AdiabaticSchedule, dressing: DressingConfig, t, leg: Optional[int] = None) -> ArrayLike:
    """Dressing angle mu(t) = -arctan(theta_dot / (f Omega)); f = 1 for SATD."""
    if dressing.mode is DressingMode.NONE:
        raise ConfigurationError("mu is undefined for the uncorrected (NONE) mode")
    t = np.asarray(t, dtype=float)
    omega = schedule.omega(t, leg)
    if np.any(omega == 0):
        raise SingularityError("amplitude vanishes; mu = -arctan(theta_dot/Omega) is singular")
    return _scalar_or_array(-np.arctan(schedule.theta_dot(t, leg) / (dressing.f(t) * omega)))


def _mu_dot(schedule: AdiabaticSchedule, dressing: DressingConfig, t: np.ndarray, leg) -> np.ndarray:
    f_dot = dressing.f_dot(t)
    if schedule.has_analytic_derivatives and f_dot is not None:
        omega = schedule.omega(t, leg)
        f = dressing.f(t)
        w = f * omega
        w_dot = f_dot * omega + f * schedule.omega_dot(t, leg)
        th_d = schedule.theta_dot(t, leg)
        r = th_d / w
        r_dot = schedule.theta_ddot(t, leg) / w - th_d * w_dot / w**2
        return -r_dot / (1 + r**2)
    return _central_difference(lambda s, lg: np.asarray(compute_mu(schedule, dressing, s, lg)), t, leg, schedule.T)


@dataclass(frozen=True)
class CorrectedSchedule:
    """Drive fields after the SATD/MSA correction of an :class:`AdiabaticSchedule`.

    All methods accept scalar or array ``t`` and an optional ``leg``.
    """

    source: AdiabaticSchedule
    dressing: DressingConfig
    mu_tol: float = DEFAULT_MU_TOL

    @property
    def mode(self) -> DressingMode:
        return self.dressing.mode

    @property
    def varphi(self) -> float:
        return self.source.varphi

    @property
    def leg_phases(self) -> tuple[float, float]:
        return self.source.leg_phases

    @property
    def T(self) -> float:
        return self.source.T

    @property
    def tau(self) -> float:
        return self.source.tau

    def mu(self, t, leg=None):
        if self.mode is DressingMode.NONE:
            return _scalar_or_array(np.zeros(np.shape(t)))
        return compute_mu(self.source, self.dressing, t, leg)

    def mu_dot(self, t, leg=None):
        if self.mode is DressingMode.NONE:
            return _scalar_or_array(np.zeros(np.shape(t)))
        return _scalar_or_array(_mu_dot(self.source, self.dressing, np.asarray(t, dtype=float), leg))

    def g_x(self, t, leg=None):
        return self.mu_dot(t, leg)

    def g_z(self, t, leg=None):
        """Longitudinal dressed-frame field, -Omega - theta_dot / tan(mu) in MSA mode."""
        if self.mode is not DressingMode.MSA:
            return _scalar_or_array(np.zeros(np.shape(t)))
        t = np.asarray(t, dtype=float)
        omega = self.source.omega(t, leg)
        th_d = self.source.theta_dot(t, leg)
        mu = np.asarray(self.mu(t, leg))
        tan_mu = np.tan(mu)
        bad = (tan_mu == 0) & (th_d != 0)
        if np.any(bad):
            where = np.atleast_1d(t)[np.atleast_1d(bad)][0]
            raise SingularityError(f"MSA g_z singular: mu = 0 with theta_dot != 0 at t = {where:g}")
        with np.errstate(divide="ignore", invalid="ignore"):
            gz = np.where(tan_mu == 0, (self.dressing.f(t) - 1) * omega, -omega - th_d / tan_mu)
        return _scalar_or_array(gz)

    def theta_prime(self, t, leg=None):
        t = np.asarray(t, dtype=float)
        theta = self.source.theta(t, leg)
        if self.mode is DressingMode.NONE:
            return _scalar_or_array(theta)
        omega = self.source.omega(t, leg)
        if self.mode is DressingMode.SATD:
            return _scalar_or_array(theta - np.arctan(self.mu_dot(t, leg) / omega))
        return _scalar_or_array(theta - np.arctan2(self.g_x(t, leg), self.g_z(t, leg) + omega))

    def omega_prime(self, t, leg=None):
        t = np.asarray(t, dtype=float)
        omega = self.source.omega(t, leg)
        if self.mode is DressingMode.NONE:
            return _scalar_or_array(omega)
        if self.mode is DressingMode.SATD:
            return _scalar_or_array(np.sqrt(omega**2 + np.asarray(self.mu_dot(t, leg)) ** 2))
        return _scalar_or_array(np.hypot(self.g_z(t, leg) + omega, self.g_x(t, leg)))

    def amplitudes(self, t, leg=None) -> np.ndarray:
        """Complex drive amplitudes (Omega'_0, Omega'_1, Omega'_2), shape ``(..., 3)``.

        The third channel carries ``exp(-i phi)`` with the phase of the active leg.
        """
        t = np.asarray(t, dtype=float)
        om = np.asarray(self.omega_prime(t, leg))
        th = np.asarray(self.theta_prime(t, leg))
        legs = _leg_index(t, self.T, leg)
        phase = np.where(legs == 1, self.leg_phases[1], self.leg_phases[0])
        out = np.empty(np.shape(t) + (3,), dtype=complex)
        out[..., 0] = om * np.sin(th) * np.sin(self.varphi)
        out[..., 1] = om * np.sin(th) * np.cos(self.varphi)
        out[..., 2] = om * np.cos(th) * np.exp(-1j * phase)
        return out

    def channel_envelopes(self, t, leg=None) -> tuple[np.ndarray, np.ndarray]:
        """(Omega' sin theta', Omega' cos theta'): the two drives before the varphi split."""
        om = np.asarray(self.omega_prime(t, leg))
        th = np.asarray(self.theta_prime(t, leg))
        return om * np.sin(th), om * np.cos(th)

    def boundary_residual(self) -> float:
        """max(|mu(0)|, |mu(2T)|): how far the dressed basis is from the bare one at the ends."""
        if self.mode is DressingMode.NONE:
            return 0.0
        return float(max(abs(self.mu(0.0, 0)), abs(self.mu(2 * self.T, 1))))

    def peak_channel_amplitude(self, n: int = 10_000) -> float:
        """Largest single-drive amplitude |Omega' sin theta'| or |Omega' cos theta'| over [0, 2T]."""
        half = max(n // 2, 2)
        peak = 0.0
        for leg in (0, 1):
            t = np.linspace(leg * self.T, (leg + 1) * self.T, half)
            a, b = self.channel_envelopes(t, leg)
            peak = max(peak, float(np.max(np.abs(a))), float(np.max(np.abs(b))))
        return peak


def correct_schedule(
    schedule: AdiabaticSchedule, dressing: DressingConfig, *, mu_tol: float = DEFAULT_MU_TOL, check_points: int = 2001
) -> CorrectedSchedule:
    """Apply the SATD/MSA correction, validating the result on a time grid.

    Raises
    ------
    SingularityError
        If the amplitude vanishes, or if the MSA ``g_z`` field is singular.
        The message gives the offending time.
    ConfigurationError
        If the MSA dressing function is not strictly positive.
    """
    corrected = CorrectedSchedule(schedule, dressing, mu_tol)
    if dressing.mode is DressingMode.NONE:
        return corrected
    for leg in (0, 1):
        t = np.linspace(leg * schedule.T, (leg + 1) * schedule.T, check_points)
        if np.any(dressing.f(t) <= 0):
            raise ConfigurationError("dressing function f(t) must be positive on [0, 2T]")
        if np.any(schedule.omega(t, leg) <= 0):
            raise SingularityError("amplitude must be positive on the open protocol interval")
        corrected.g_z(t, leg)
    residual = corrected.boundary_residual()
    if residual > mu_tol:
        warnings.warn(
            f"|mu| at the protocol endpoints is {residual:.3g} rad (tolerance {mu_tol:g})",
            BoundaryResidualWarning,
            stacklevel=2,
        )
    return corrected


def tau_min(
    omega_max: float,
    dressing: Optional[DressingConfig] = None,
    t_over_tau: float = 10.0,
    *,
    rtol: float = 1e-6,
    n_grid: int = 10_000,
) -> float:
    """Shortest logistic width whose corrected drives never exceed ``omega_max``.

    The reference schedule has constant amplitude ``omega_max``, so the
    uncorrected drives peak at ``omega_max`` (reached by the pump at the end
    of leg 1 and by the Stokes drive at its start). The correction raises
    each individual drive ``Omega' sin theta'`` and ``Omega' cos theta'``
    by an amount that grows as tau shrinks. This function bisects on tau
    for the point where the larger of the two just reaches ``omega_max``.
    Returns 0 for the uncorrected mode.
    """
    if omega_max <= 0:
        raise ConfigurationError("omega_max must be positive")
    dressing = DressingConfig.satd() if dressing is None else dressing
    if dressing.mode is DressingMode.NONE:
        return 0.0

    def excess(x: float) -> float:
        # x = tau * omega_max; the constraint depends on tau only through x
        sched = vitanov_schedule(omega_max, x / omega_max, t_over_tau=t_over_tau)
        corr = CorrectedSchedule(sched, dressing)
        return corr.peak_channel_amplitude(n_grid) / omega_max - 1.0

    lo, hi = 1e-3, 1.0
    if excess(lo) <= 0:
        raise ConfigurationError("amplitude constraint satisfied at every tau; no minimum exists")
    while excess(hi) > 0:
        lo, hi = hi, 2 * hi
        if hi > 1e4:
            raise ConfigurationError("corrected drives exceed omega_max at every tau (is f > 1?)")
    while (hi - lo) > rtol * hi:
        mid = 0.5 * (lo + hi)
        if excess(mid) > 0:
            lo = mid
        else:
            hi = mid
    return hi / omega_max


@dataclass(frozen=True)
class PulseTable:
    """Uniformly sampled complex drive amplitudes; ``omega`` has shape ``(n, 3)``."""

    t: np.ndarray
    omega: np.ndarray
    mode: DressingMode = field(default=DressingMode.SATD)

    def rows(self):
        for ti, row in zip(self.t, self.omega):
            yield [ti, row[0].real, row[0].imag, row[1].real, row[1].imag, row[2].real, row[2].imag]

    def to_csv(self, path) -> Path:
        path = Path(path)
        with path.open("w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(PULSE_CSV_HEADER)
            for row in self.rows():
                w.writerow([repr(float(v)) for v in row])
        return path


def read_pulse_csv(path) -> PulseTable:
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    omega = data[:, 1::2] + 1j * data[:, 2::2]
    return PulseTable(data[:, 0], omega)


def sample_pulses(corrected: CorrectedSchedule, n: int) -> PulseTable:
    """``n`` uniform samples of the three complex drives over [0, 2T]."""
    if n < 2:
        raise ValueError("need at least two samples")
    t = np.linspace(0.0, 2 * corrected.T, n)
    return PulseTable(t, corrected.amplitudes(t), corrected.mode)

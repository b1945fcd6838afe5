import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.special import expit

from superholo.errors import BoundaryResidualWarning, ConfigurationError, DomainError, SingularityError
from superholo.pulses import (
    PULSE_CSV_HEADER,
    AdiabaticSchedule,
    DressingConfig,
    DressingMode,
    compute_mu,
    correct_schedule,
    read_pulse_csv,
    sample_pulses,
    tau_min,
    theta_ddot,
    theta_dot,
    truncation_angle,
    vitanov_schedule,
    vitanov_theta,
)

OMEGA = 2 * np.pi * 750e6
TAU = 1.0 / (2.63 * OMEGA)


def quiet_correct(schedule, dressing, **kw):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", BoundaryResidualWarning)
        return correct_schedule(schedule, dressing, **kw)


# ---- mixing angle -----------------------------------------------------------


def test_theta_endpoints_match_closed_form():
    T = 10 * TAU
    expected = 0.5 * np.pi * expit(-5.0)
    assert vitanov_theta(0.0, T, TAU) == pytest.approx(expected, rel=1e-14)
    assert vitanov_theta(2 * T, T, TAU) == pytest.approx(expected, rel=1e-14)
    assert expected == pytest.approx(0.010513, abs=1e-6)


def test_truncation_within_ten_percent_for_default_ratio():
    assert truncation_angle(10.0) <= 0.1 * np.pi / 2
    assert truncation_angle(2.0) > 0.1 * np.pi / 2


def test_theta_continuous_at_leg_boundary():
    T = 10 * TAU
    left = vitanov_theta(T, T, TAU, leg=0)
    right = vitanov_theta(T, T, TAU, leg=1)
    assert left == pytest.approx(right, abs=1e-15)
    assert left == pytest.approx(np.pi / 2 * expit(5.0), rel=1e-14)


def test_theta_domain_checked():
    T = 10 * TAU
    with pytest.raises(DomainError):
        vitanov_theta(-1e-12, T, TAU)
    with pytest.raises(DomainError):
        vitanov_theta(2 * T * (1 + 1e-9), T, TAU)


@settings(max_examples=60, deadline=None)
@given(u=st.floats(0.01, 0.99), leg=st.sampled_from([0, 1]))
def test_theta_derivatives_match_finite_differences(u, leg):
    T = 10 * TAU
    t = (leg + u) * T
    h = 1e-5 * TAU
    fd1 = (vitanov_theta(t + h, T, TAU, leg) - vitanov_theta(t - h, T, TAU, leg)) / (2 * h)
    fd2 = (theta_dot(t + h, T, TAU, leg) - theta_dot(t - h, T, TAU, leg)) / (2 * h)
    scale = 1 / TAU
    assert theta_dot(t, T, TAU, leg) == pytest.approx(fd1, abs=1e-7 * scale)
    assert theta_ddot(t, T, TAU, leg) == pytest.approx(fd2, abs=1e-6 * scale**2)


def test_schedule_rejects_short_legs():
    with pytest.raises(ConfigurationError):
        vitanov_schedule(OMEGA, TAU, t_over_tau=1.5)


# ---- correction -------------------------------------------------------------


def test_none_mode_is_bit_identical():
    sched = vitanov_schedule(OMEGA, TAU, varphi=0.3, leg_phases=(0.0, 1.0))
    corr = correct_schedule(sched, DressingConfig.none())
    t = np.linspace(0, 2 * sched.T, 501)
    legs = (t >= sched.T).astype(int)
    assert np.array_equal(corr.theta_prime(t), sched.theta(t))
    assert np.array_equal(corr.omega_prime(t), np.full_like(t, OMEGA))
    assert np.array_equal(corr.mu(t), np.zeros_like(t))
    th = vitanov_theta(t, sched.T, TAU)
    amps = corr.amplitudes(t)
    assert np.array_equal(amps[:, 2], OMEGA * np.cos(th) * np.exp(-1j * np.where(legs == 1, 1.0, 0.0)))


def test_constant_theta_gives_no_correction():
    T = 10 * TAU
    sched = AdiabaticSchedule.from_functions(
        lambda t, leg=None: np.full(np.shape(t), 0.7),
        lambda t, leg=None: np.full(np.shape(t), OMEGA),
        varphi=0.0,
        leg_phases=(0.0, 0.0),
        T=T,
        tau=TAU,
    )
    corr = correct_schedule(sched, DressingConfig.satd())
    t = np.linspace(0.0, 2 * T, 101)
    assert np.allclose(corr.mu(t), 0.0)
    assert np.allclose(corr.theta_prime(t), 0.7)
    assert np.allclose(corr.omega_prime(t), OMEGA)


def test_satd_formulas_against_independent_evaluation():
    sched = vitanov_schedule(OMEGA, TAU)
    corr = quiet_correct(sched, DressingConfig.satd())
    T = sched.T
    t = np.linspace(0.05 * T, 0.95 * T, 7)
    th_d = theta_dot(t, T, TAU, 0)
    th_dd = theta_ddot(t, T, TAU, 0)
    mu = -np.arctan(th_d / OMEGA)
    # d/dt arctan(x) with x = theta_dot / Omega at constant Omega
    mu_dot = -(th_dd / OMEGA) / (1 + (th_d / OMEGA) ** 2)
    assert np.allclose(corr.mu(t, 0), mu, rtol=0, atol=1e-13)
    assert np.allclose(corr.mu_dot(t, 0), mu_dot, rtol=1e-9)
    assert np.allclose(corr.theta_prime(t, 0), vitanov_theta(t, T, TAU, 0) - np.arctan(mu_dot / OMEGA), atol=1e-12)
    assert np.allclose(corr.omega_prime(t, 0), np.sqrt(OMEGA**2 + mu_dot**2), rtol=1e-12)


@settings(max_examples=40, deadline=None)
@given(x=st.floats(0.2, 5.0), u=st.floats(0.0, 1.0))
def test_satd_invariants(x, u):
    tau = x / OMEGA
    sched = vitanov_schedule(OMEGA, tau)
    corr = quiet_correct(sched, DressingConfig.satd())
    t = u * 2 * sched.T
    assert abs(corr.mu(t)) < np.pi / 2
    assert corr.omega_prime(t) >= OMEGA * (1 - 1e-15)


def test_satd_equals_msa_with_unit_dressing():
    sched = vitanov_schedule(OMEGA, TAU, varphi=np.pi / 8)
    satd = quiet_correct(sched, DressingConfig.satd())
    msa = quiet_correct(sched, DressingConfig.msa(1.0))
    t = np.linspace(0, 2 * sched.T, 4001)
    assert np.max(np.abs(satd.amplitudes(t) - msa.amplitudes(t))) < 1e-10 * OMEGA


def test_msa_gz_reduces_to_constant_offset():
    sched = vitanov_schedule(OMEGA, 2 * TAU)
    f0 = 1.7
    corr = quiet_correct(sched, DressingConfig.msa(f0))
    t = np.linspace(0.1, 0.9, 9) * sched.T
    assert np.allclose(corr.g_z(t, 0), (f0 - 1) * OMEGA, rtol=1e-9)
    mu = compute_mu(sched, DressingConfig.msa(f0), t, 0)
    assert np.allclose(mu, -np.arctan(theta_dot(t, sched.T, 2 * TAU, 0) / (f0 * OMEGA)))


def test_msa_with_time_dependent_dressing_matches_finite_difference_rate():
    sched = vitanov_schedule(OMEGA, 2 * TAU)
    T = sched.T
    f = lambda t: 1.5 + 0.2 * np.sin(np.pi * np.asarray(t) / T)
    f_dot = lambda t: 0.2 * np.pi / T * np.cos(np.pi * np.asarray(t) / T)
    analytic = quiet_correct(sched, DressingConfig.msa(f, f_dot))
    numeric = quiet_correct(sched, DressingConfig.msa(f))
    t = np.linspace(0.1, 0.9, 9) * T
    a, b = analytic.mu_dot(t, 0), numeric.mu_dot(t, 0)
    assert np.max(np.abs(a - b)) < 1e-5 * np.max(np.abs(a))


def test_adiabatic_limit_deviation_shrinks_monotonically():
    devs = []
    for k in range(4):
        sched = vitanov_schedule(OMEGA, TAU * 2**k)
        corr = quiet_correct(sched, DressingConfig.satd())
        base = correct_schedule(sched, DressingConfig.none())
        t = np.linspace(0, 2 * sched.T, 4001)
        devs.append(np.max(np.abs(corr.amplitudes(t) - base.amplitudes(t))))
    assert all(b < a for a, b in zip(devs, devs[1:]))


def test_invalid_dressing_rejected():
    with pytest.raises(ConfigurationError):
        DressingConfig.msa(0.0)
    sched = vitanov_schedule(OMEGA, TAU)
    with pytest.raises(ConfigurationError):
        correct_schedule(sched, DressingConfig.msa(lambda t: np.full(np.shape(t), -1.0)))


def test_vanishing_amplitude_is_singular():
    T = 10 * TAU
    sched = AdiabaticSchedule.from_functions(
        lambda t, leg=None: vitanov_theta(t, T, TAU, leg),
        lambda t, leg=None: OMEGA * np.abs(np.asarray(t) - T / 2) / T,
        varphi=0.0,
        leg_phases=(0.0, 0.0),
        T=T,
        tau=TAU,
    )
    with pytest.raises(SingularityError):
        correct_schedule(sched, DressingConfig.satd(), check_points=2001)


def test_boundary_residual_warning():
    sched = vitanov_schedule(OMEGA, TAU)
    with pytest.warns(BoundaryResidualWarning):
        correct_schedule(sched, DressingConfig.satd(), mu_tol=0.01)
    with warnings.catch_warnings():
        warnings.simplefilter("error", BoundaryResidualWarning)
        correct_schedule(sched, DressingConfig.satd())


# ---- tau_min -----------------------------------------------------------------


def test_tau_min_matches_reference_ratio():
    x = tau_min(OMEGA, DressingConfig.satd()) * OMEGA
    assert x == pytest.approx(1 / 2.63, rel=0.05)


def test_tau_min_scales_inversely_with_amplitude():
    a = tau_min(OMEGA)
    b = tau_min(2 * OMEGA)
    assert b / a == pytest.approx(0.5, rel=1e-5)


def test_tau_min_constraint_is_binding():
    tmin = tau_min(OMEGA)
    corr = quiet_correct(vitanov_schedule(OMEGA, tmin), DressingConfig.satd())
    assert corr.peak_channel_amplitude() == pytest.approx(OMEGA, rel=1e-5)
    assert corr.peak_channel_amplitude() <= OMEGA * (1 + 1e-9)
    faster = quiet_correct(vitanov_schedule(OMEGA, 0.98 * tmin), DressingConfig.satd())
    assert faster.peak_channel_amplitude() > OMEGA


def test_tau_min_trivial_cases():
    assert tau_min(OMEGA, DressingConfig.none()) == 0.0
    with pytest.raises(ConfigurationError):
        tau_min(-1.0)
    with pytest.raises(ConfigurationError):
        tau_min(OMEGA, DressingConfig.msa(3.0))


# ---- sampling and export -----------------------------------------------------


def test_equal_axis_gives_equal_channels():
    corr = quiet_correct(vitanov_schedule(OMEGA, TAU, varphi=np.pi / 4), DressingConfig.satd())
    table = sample_pulses(corr, 257)
    assert np.allclose(table.omega[:, 0], table.omega[:, 1], rtol=1e-15, atol=0)


def test_pulse_csv_roundtrip(tmp_path):
    corr = quiet_correct(vitanov_schedule(OMEGA, TAU, leg_phases=(0.0, np.pi / 3)), DressingConfig.satd())
    table = sample_pulses(corr, 64)
    path = table.to_csv(tmp_path / "p.csv")
    header = path.read_text().splitlines()[0].split(",")
    assert tuple(header) == PULSE_CSV_HEADER
    back = read_pulse_csv(path)
    assert np.array_equal(back.t, table.t)
    assert np.array_equal(back.omega, table.omega)
    assert back.omega.shape == (64, 3)


def test_sample_count_validated():
    corr = correct_schedule(vitanov_schedule(OMEGA, TAU), DressingConfig.none())
    with pytest.raises(ValueError):
        sample_pulses(corr, 1)
    assert corr.mode is DressingMode.NONE

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from deformed_llg.errors import DomainError, PoleError, StepError
from deformed_llg.llg import (
    CSV_HEADER,
    FieldConfig,
    LambdaMode,
    SimConfigAlpha,
    SimConfigQ,
    Trajectory,
    alpha_cos_sin,
    closed_form_alpha,
    closed_form_q,
    diagnostics,
    envelope_q,
    gl_weights,
    integrate_caputo_oscillator,
    integrate_q_llg,
    read_csv,
    trajectory_csv,
    write_csv,
)
from deformed_llg.specfun import DeformationQ, q_cos, q_sin


def q_cfg(q, **kw):
    return SimConfigQ(deformation=DeformationQ(q), **kw)


# --- configs and trajectories -------------------------------------------------


def test_default_horizon_is_twenty_periods():
    cfg = q_cfg(1.0, field=FieldConfig(h0=2.0))
    assert cfg.t_max == pytest.approx(20 * 2 * math.pi / 2.0)
    assert cfg.times().size == cfg.n_steps + 1


def test_config_validation():
    with pytest.raises(DomainError):
        q_cfg(1.0, n_steps=1)
    with pytest.raises(DomainError):
        q_cfg(1.0, t_max=-1.0)
    with pytest.raises(DomainError):
        FieldConfig(h0=-1.0)
    with pytest.raises(DomainError):
        SimConfigQ(deformation=DeformationQ(1.1, lam=1j), lambda_mode=LambdaMode.EXPLICIT_REAL)
    with pytest.raises(DomainError):
        SimConfigAlpha(alpha=1.3)
    assert FieldConfig().axis == (0.0, 0.0, 1.0)


def test_trajectory_invariants():
    with pytest.raises(DomainError):
        Trajectory(times=[0.0, 0.0], m=np.zeros((2, 3)))
    with pytest.raises(DomainError):
        Trajectory(times=[0.0, 1.0], m=np.zeros((3, 3)))
    tr = Trajectory(times=[0.0, 1.0], m=np.zeros((2, 3)))
    with pytest.raises(ValueError):
        tr.m[0, 0] = 1.0


# --- scale-q closed form --------------------------------------------------------


def test_closed_form_q_initial_point():
    tr = closed_form_q(q_cfg(1.3, rho=2.0))
    assert tr.mx[0] == 2.0 and tr.my[0] == 0.0


def test_closed_form_q_classical():
    cfg = q_cfg(1.0, theta0=0.4, rho=1.5, mz0=0.2)
    tr = closed_form_q(cfg)
    w = cfg.omega
    assert np.max(np.abs(tr.mx - 1.5 * np.cos(w * tr.times - 0.4))) <= 1e-12
    assert np.ptp(tr.in_plane) <= 1e-12
    assert np.all(tr.mz == 0.2)


@given(st.floats(0.5, 1.5), st.floats(-3, 3))
def test_closed_form_q_matches_trig_expression(q, theta0):
    cfg = q_cfg(q, theta0=theta0, field=FieldConfig(h0=1.0), t_max=30.0, n_steps=300)
    tr = closed_form_q(cfg)
    t = tr.times
    ref = q_cos(q, theta0) * q_cos(q, t) + q_sin(q, theta0) * q_sin(q, t)
    assert np.max(np.abs(tr.mx - ref)) <= 1e-10 * max(1.0, np.max(np.abs(ref)))


def test_closed_form_q_envelope_example():
    cfg = q_cfg(1.2, field=FieldConfig(h0=1.0), t_max=30.0)
    tr = closed_form_q(cfg)
    env = (1 + 0.04 * tr.times**2) ** (1 / (2 * (1 - 1.2)))
    assert np.max(np.abs(tr.in_plane / env - 1)) <= 1e-12
    assert np.all(np.diff(tr.modulus) < 0)


# --- RK4 -------------------------------------------------------------------------


def test_rk4_classical_example():
    cfg = q_cfg(1.0, t_max=20.0)
    tr = integrate_q_llg(cfg)
    assert np.max(np.abs(tr.mx - np.cos(cfg.omega * tr.times))) <= 1e-8


def test_rk4_q11_against_closed_form_and_halving():
    errs = []
    for n in (10_000, 20_000):
        cfg = q_cfg(1.1, n_steps=n)
        errs.append(np.max(np.abs(integrate_q_llg(cfg).m - closed_form_q(cfg).m)))
    assert errs[0] <= 1e-6
    assert 14 <= errs[0] / errs[1] <= 18


def test_rk4_initial_condition_exact():
    cfg = q_cfg(1.3, theta0=0.7, rho=1.2)
    assert np.array_equal(integrate_q_llg(cfg).m[0], closed_form_q(cfg).m[0])


def test_rk4_step_error():
    with pytest.raises(StepError):
        integrate_q_llg(q_cfg(1.0, n_steps=100))


def test_explicit_real_pole():
    cfg = SimConfigQ(deformation=DeformationQ(1.1, lam=1.0), lambda_mode=LambdaMode.EXPLICIT_REAL, t_max=20.0)
    with pytest.raises(PoleError):
        integrate_q_llg(cfg)


def test_explicit_real_preserves_modulus():
    cfg = SimConfigQ(
        deformation=DeformationQ(1.1, lam=-1.0), lambda_mode=LambdaMode.EXPLICIT_REAL, t_max=20.0, mz0=0.3
    )
    tr = integrate_q_llg(cfg)
    assert np.ptp(tr.modulus) <= 1e-9
    assert np.all(tr.mz == 0.3)


# --- envelope and diagnostics -----------------------------------------------------


def test_envelope_limits():
    t = np.linspace(0, 50, 11)
    assert np.all(envelope_q(1.0, 3.0, t) == 1.0)
    assert envelope_q(1.7, 2.0, 0.0) == 1.0
    assert np.all(np.diff(envelope_q(1.5, 1.0, t)) < 0)
    assert np.all(np.diff(envelope_q(0.7, 1.0, t)) > 0)


def test_diagnostics_classical_constants():
    tr = closed_form_q(q_cfg(1.0, mz0=0.5))
    assert np.ptp(tr.modulus) <= 1e-9
    assert np.ptp(tr.angle_to_field) <= 1e-9


def test_diagnostics_single_sample_along_field():
    tr = diagnostics(Trajectory(times=[0.0], m=[[0.0, 0.0, 1.0]]))
    assert tr.angle_to_field[0] == 0.0 and tr.angle_defined[0]


def test_diagnostics_flags_undefined_angle():
    tr = diagnostics(Trajectory(times=[0.0, 1.0], m=[[0.0, 0.0, 0.0], [1e-15, 0, 0]]))
    assert not tr.angle_defined.any()
    assert np.all(np.isnan(tr.angle_to_field))
    with pytest.raises(DomainError):
        diagnostics(Trajectory(times=[], m=np.zeros((0, 3))))


def test_summary_reports_drifts():
    s = closed_form_q(q_cfg(1.5)).summary()
    assert s["in_plane_final"] < s["in_plane_initial"]
    assert s["angle_drift"] <= 1e-12


# --- alpha family -------------------------------------------------------------------


def test_closed_form_alpha_classical_with_phase():
    cfg = SimConfigAlpha(alpha=1.0, omega0=1.3, amplitude=0.8, theta0=0.6, t_max=20.0, n_steps=2000)
    tr = closed_form_alpha(cfg)
    assert np.max(np.abs(tr.mx - 0.8 * np.cos(1.3 * tr.times - 0.6))) <= 1e-12
    assert np.max(np.abs(tr.my - 0.8 * np.sin(1.3 * tr.times - 0.6))) <= 1e-12


def test_closed_form_alpha_initial_point():
    tr = closed_form_alpha(SimConfigAlpha(alpha=0.8, theta0=0.9, amplitude=2.0, t_max=5.0, n_steps=10))
    assert tr.mx[0] == pytest.approx(2.0 * math.cos(0.9), rel=1e-15)


def test_alpha_cos_sin_reference_values():
    from conftest import ml_oracle

    t = np.array([0.5, 3.0, 17.0])
    c, s = alpha_cos_sin(0.9, 1.0, t)
    for ti, ci, si in zip(t, c, s):
        z = -(ti ** (2 * 0.9))
        assert ci == pytest.approx(ml_oracle(1.8, 1.0, z), abs=1e-13)
        assert si == pytest.approx(ti**0.9 * ml_oracle(1.8, 1.9, z), abs=1e-13)
    with pytest.raises(DomainError):
        alpha_cos_sin(0.9, 1.0, [-1.0])


def test_gl_weights():
    w = gl_weights(1.0, 4)
    assert np.allclose(w, [1, -1, 0, 0, 0])
    w2 = gl_weights(2.0, 3)
    assert np.allclose(w2, [1, -2, 1, 0])


def test_caputo_classical_example():
    tr = integrate_caputo_oscillator(1.0, 1.0, 1.0, 100_000, 20.0)
    assert np.max(np.abs(tr.mx - np.cos(tr.times))) <= 1e-3


def test_caputo_zero_initial_condition():
    tr = integrate_caputo_oscillator(0.9, 1.0, 0.0, 1000, 20.0)
    assert np.all(tr.mx == 0.0)


def test_caputo_is_first_order():
    ref = closed_form_alpha(SimConfigAlpha(alpha=0.9, omega0=1.0, t_max=10.0, n_steps=100)).mx
    errs = []
    for n in (2000, 4000, 8000):
        tr = integrate_caputo_oscillator(0.9, 1.0, 1.0, n, 10.0)
        errs.append(np.max(np.abs(tr.mx[:: n // 100] - ref)))
    assert errs[0] > errs[1] > errs[2]


def test_caputo_validation():
    with pytest.raises(StepError):
        integrate_caputo_oscillator(0.9, 1.0, 1.0, 999, 20.0)
    with pytest.raises(DomainError):
        integrate_caputo_oscillator(0.4, 1.0, 1.0, 1000, 20.0)
    with pytest.raises(StepError):
        integrate_caputo_oscillator(0.9, 1000.0, 1.0, 1000, 20.0)


# --- CSV --------------------------------------------------------------------------


def test_csv_format_and_round_trip(tmp_path):
    tr = closed_form_q(q_cfg(1.2, n_steps=50, theta0=0.3))
    text = trajectory_csv(tr)
    lines = text.split("\n")
    assert lines[0] == CSV_HEADER
    assert len(lines) == 53 and lines[-1] == ""
    assert "\r" not in text and "-0," not in text
    path = tmp_path / "t.csv"
    write_csv(tr, str(path))
    back = read_csv(str(path))
    assert np.array_equal(back.m, tr.m)
    assert np.array_equal(back.times, tr.times)


def test_csv_is_deterministic():
    a = trajectory_csv(closed_form_alpha(SimConfigAlpha(alpha=0.9, t_max=10.0, n_steps=200)))
    b = trajectory_csv(closed_form_alpha(SimConfigAlpha(alpha=0.9, t_max=10.0, n_steps=200)))
    assert a == b

"""Smoke tests for the python bindings: one end-to-end touch per submodule."""

import math

import numpy as np
import pytest

import quadsim as q


def test_rotation_algebra_round_trip():
    v = np.array([0.3, -1.2, 2.0])
    m = q.so3.hat(v)
    assert np.allclose(m @ np.array([1.0, 0.5, -2.0]),
                       np.cross(v, [1.0, 0.5, -2.0]))
    assert np.array_equal(q.so3.vee(m), v)

    R = q.so3.euler_to_rotation(0.1, -0.2, 0.7)
    assert q.so3.is_rotation(R, 1e-12)
    assert q.so3.attitude_error_value(R, R) == pytest.approx(0.0, abs=1e-14)

    with pytest.raises(ValueError):
        q.so3.vee(np.eye(3))


def test_actuator_chain_and_allocation():
    p = q.model.VehicleParams()
    assert q.model.pwm_to_angvel(1.0, p) == pytest.approx(4178.632)
    hover = q.model.BodyWrench(thrust=p.mass * q.GRAVITY,
                               torque=np.zeros(3))
    alloc = q.model.allocate(hover, p)
    assert not alloc.saturated
    back = q.model.motors_to_wrench(alloc.command, p)
    assert back.thrust == pytest.approx(p.mass * q.GRAVITY, abs=1e-9)
    assert np.allclose(back.torque, 0.0, atol=1e-12)


def test_controller_hover_fixed_point():
    p = q.model.VehicleParams()
    g = q.control.ControlGains(10.0, 5.0, 0.6, 0.15)
    state = q.RigidBodyState()
    state.r = np.array([0.0, 0.0, 1.0])
    ref = q.control.StateReference()
    ref.r_d = np.array([0.0, 0.0, 1.0])
    out = q.control.control_step(state, ref, p, g)
    assert out.wrench.thrust == pytest.approx(p.mass * q.GRAVITY, abs=1e-12)
    assert np.allclose(out.wrench.torque, 0.0)


def test_closed_loop_hover_run():
    p = q.model.VehicleParams()
    g = q.control.ControlGains(10.0, 5.0, 0.6, 0.15)
    flat = q.trajectory.hover(np.array([0.0, 0.0, 1.0]), 0.0)
    cfg = q.sim.SimConfig()
    cfg.duration = 1.0
    cfg.initial.r = np.array([0.0, 0.0, 1.0])
    log = q.harness.run_tracking(cfg, p, g, flat)
    assert len(log) == 500
    assert log.position.shape == (500, 3)
    assert np.max(np.linalg.norm(log.pos_error, axis=1)) < 1e-6
    assert log.t[1] - log.t[0] == pytest.approx(cfg.control_period)


def test_trajectory_expansion():
    p = q.model.VehicleParams()
    g = q.control.ControlGains(10.0, 5.0, 0.6, 0.15)
    flat = q.trajectory.helix(0.5, 4.0, 0.1, 1.0, 2.0, 14.0)
    ref = q.trajectory.expand_feedforward(flat, 5.0, p, g)
    assert q.so3.is_rotation(ref.R_d, 1e-9)
    f = flat.eval(7.3)
    assert np.hypot(f.r[0], f.r[1]) == pytest.approx(0.5)


def test_identification_round_trip():
    p = q.model.VehicleParams()
    samples = [q.ident.ThrustSample(w, p.thrust_coeff * w * w)
               for w in (900.0, 1100.0, 1300.0)]
    fit = q.ident.fit_thrust_coeff(samples)
    assert fit.thrust_coeff == pytest.approx(p.thrust_coeff, rel=1e-12)

    line = q.ident.actuator_line_from_kv(2450.0, 16.8, 0.0305)
    assert line.theta2 == pytest.approx(2450.0 * 2.0 * math.pi / 60.0 * 16.8)


def test_rms_matches_numpy():
    series = [0.1, -0.4, 0.25, 0.0]
    assert q.harness.rms(series) == pytest.approx(
        float(np.sqrt(np.mean(np.square(series)))))

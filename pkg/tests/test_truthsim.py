import numpy as np
import pytest
from numpy.testing import assert_allclose

from se3est.errors import ConfigError
from se3est.harness import reference_config
from se3est.liegroups import Pose, Twist, exp_se3, log_so3
from se3est.truthsim import (BodyParams, SimConfig, TrueState, WrenchProfile,
                             generate_trajectory, make_wrench, step_truth)

BODY = BodyParams(mass=0.420, inertia=np.diag([51.2e-3, 60.2e-3, 59.6e-3]))


def state_distance(a: TrueState, b: TrueState) -> float:
    dg = a.pose.inverse().compose(b.pose)
    return (np.linalg.norm(log_so3(dg.rotation)) + np.linalg.norm(dg.position)
            + np.linalg.norm(a.twist.as_array() - b.twist.as_array()))


def test_zero_wrench_zero_twist_is_equilibrium():
    state = TrueState(Pose(np.eye(3), np.array([1.0, 2.0, 3.0])), Twist.zero())
    out = step_truth(state, BODY, make_wrench("zero"), 0.0, 0.02)
    assert_allclose(out.pose.rotation, state.pose.rotation, atol=1e-15)
    assert_allclose(out.pose.position, state.pose.position, atol=1e-15)
    assert_allclose(out.twist.as_array(), np.zeros(6), atol=1e-15)


def test_free_body_conserves_momentum_and_energy():
    J = BODY.inertia
    state = TrueState(Pose.identity(),
                      Twist(np.array([0.2, -0.05, 0.1]), np.zeros(3)))
    h0 = np.linalg.norm(J @ state.twist.omega)
    e0 = 0.5 * state.twist.omega @ J @ state.twist.omega
    wrench = make_wrench("zero")
    for i in range(10_000):
        state = step_truth(state, BODY, wrench, i * 0.02, 0.02)
    h = np.linalg.norm(J @ state.twist.omega)
    e = 0.5 * state.twist.omega @ J @ state.twist.omega
    assert abs(h - h0) / h0 < 1e-6
    assert abs(e - e0) / e0 < 1e-6


def test_step_rejects_nonpositive_dt():
    state = TrueState(Pose.identity(), Twist.zero())
    with pytest.raises(ConfigError):
        step_truth(state, BODY, make_wrench("zero"), 0.0, 0.0)


def test_config_validation():
    init = TrueState(Pose.identity(), Twist.zero())
    with pytest.raises(ConfigError):
        SimConfig(dt=-0.02, duration=1.0, body=BODY, wrench=make_wrench("zero"),
                  initial=init)
    with pytest.raises(ConfigError):
        SimConfig(dt=0.02, duration=0.0, body=BODY, wrench=make_wrench("zero"),
                  initial=init)
    with pytest.raises(ConfigError):
        BodyParams(mass=-1.0, inertia=np.eye(3))
    with pytest.raises(ConfigError):
        BodyParams(mass=1.0, inertia=-np.eye(3))
    with pytest.raises(ConfigError):
        make_wrench("nosuch")


def test_short_duration_gives_single_state():
    init = TrueState(Pose.identity(), Twist.zero())
    cfg = SimConfig(dt=0.02, duration=0.001, body=BODY,
                    wrench=make_wrench("zero"), initial=init)
    assert cfg.n_steps == 0
    assert len(generate_trajectory(cfg)) == 1


def test_reference_initial_conditions_at_index_zero():
    cfg = reference_config().sim
    traj = generate_trajectory(cfg)
    assert_allclose(traj[0].pose.position, [2.5, 0.5, -3.0])
    assert_allclose(traj[0].twist.omega, [0.2, -0.05, 0.1])
    assert_allclose(traj[0].twist.nu, [-0.05, 0.15, 0.03])
    v = log_so3(traj[0].pose.rotation)
    assert_allclose(v, (np.pi / 4) * np.array([3, -6, 2]) / 7.0, atol=1e-12)


def test_constant_twist_screw_is_exact():
    # Spin and climb along the same principal axis: the twist is constant and
    # the integrator must reproduce the closed-form screw exactly.
    xi = Twist(np.array([0.0, 0.0, 0.3]), np.array([0.0, 0.0, 0.02]))
    state = TrueState(Pose.identity(), xi)
    wrench = make_wrench("zero")
    for i in range(500):
        state = step_truth(state, BODY, wrench, i * 0.02, 0.02)
    exact = exp_se3(xi, 500 * 0.02)
    assert_allclose(state.pose.rotation, exact.rotation, atol=1e-12)
    assert_allclose(state.pose.position, exact.position, atol=1e-12)
    assert_allclose(state.twist.as_array(), xi.as_array(), atol=1e-13)


def test_self_convergence_is_fourth_order():
    base = reference_config().sim

    def endpoint(dt):
        cfg = SimConfig(dt=dt, duration=4.0, body=base.body, wrench=base.wrench,
                        initial=base.initial)
        return generate_trajectory(cfg)[-1]

    ref = endpoint(0.00125)
    errs = np.array([state_distance(endpoint(dt), ref) for dt in (0.08, 0.04, 0.02)])
    slopes = np.log2(errs[:-1] / errs[1:])
    assert np.all(slopes > 3.5), f"observed convergence orders {slopes}"


@pytest.fixture(scope="module")
def long_trajectory():
    base = reference_config().sim
    cfg = SimConfig(dt=0.02, duration=150.0, body=base.body, wrench=base.wrench,
                    initial=base.initial)
    return generate_trajectory(cfg)


def test_pose_orthogonality_over_full_run(long_trajectory):
    worst = max(
        np.max(np.abs(st.pose.rotation.T @ st.pose.rotation - np.eye(3)))
        for st in long_trajectory)
    assert worst < 1e-9


def test_trajectory_bounded(long_trajectory):
    # The initial-speed drift (|nu_0| * 150 s ~ 24 m) carries the vehicle out
    # of the 10 m room; over the 20 s estimation horizon it stays inside.
    pos = np.array([st.pose.position for st in long_trajectory])
    assert np.max(np.abs(pos)) < 30.0
    assert np.max(np.abs(pos[:1001])) < 5.0

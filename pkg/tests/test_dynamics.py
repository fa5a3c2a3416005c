"""Integrator accuracy, node policy, outcome detection, time scales."""

import numpy as np
import pytest

from bohm_measure.dynamics import (
    DegenerateValuesError,
    IntegratorConfig,
    InvalidStartError,
    Trajectory,
    decoherence_time,
    default_config,
    detect_outcome,
    integrate_ensemble,
    integrate_trajectory,
    momentum_gap,
    projective_validity,
)
from bohm_measure.guidance import (
    NodeError,
    VelocityPair,
    coordinate_field,
    momentum_field,
    velocity_coordinate,
)
from bohm_measure.wavefield import (
    ConfigPoint,
    GaussianDevicePacket,
    MomentumSuperposition,
    PhysicalParams,
)


def make_model(momenta, weights, mass=1.0, coupling=1.0, sigma=1.0):
    return MomentumSuperposition(momenta, np.sqrt(weights),
                                 PhysicalParams(mass, coupling),
                                 GaussianDevicePacket(sigma))


# ------------------------------------------------------------ exact motion


def test_constant_field_exact_and_reversible():
    field = lambda point: VelocityPair(0.75, -0.4)
    cfg = IntegratorConfig(dt=0.1, t_end=2.0)
    traj = integrate_trajectory(field, ConfigPoint(1.0, -1.0, 0.0), cfg)
    assert traj.times[-1] == pytest.approx(2.0, abs=1e-14)
    assert traj.q[-1] == pytest.approx(1.0 + 0.75 * 2.0, rel=1e-13)
    assert traj.r[-1] == pytest.approx(-1.0 - 0.4 * 2.0, rel=1e-13)
    assert not traj.node_excluded
    # negated field brings the endpoint back to the start
    back = integrate_trajectory(lambda p: VelocityPair(-0.75, 0.4),
                                ConfigPoint(float(traj.q[-1]), float(traj.r[-1]), 0.0),
                                cfg)
    assert back.q[-1] == pytest.approx(1.0, abs=1e-10)
    assert back.r[-1] == pytest.approx(-1.0, abs=1e-10)


def test_single_branch_drifts_exactly():
    model = make_model([2.0], [1.0], mass=4.0, coupling=0.5)
    cfg = default_config(model, t_end=3.0, dt=0.05)
    traj = integrate_trajectory(momentum_field(model), ConfigPoint(0.3, -0.2, 0.0), cfg)
    # v_q = p/m = 0.5, v_r = lam p = 1.0, both constant
    assert traj.q[-1] == pytest.approx(0.3 + 0.5 * 3.0, rel=1e-12)
    assert traj.r[-1] == pytest.approx(-0.2 + 1.0 * 3.0, rel=1e-12)


def test_coordinate_flow_linear_needle_law():
    params = PhysicalParams(mass=1.0, coupling=0.01)
    cfg = IntegratorConfig(dt=0.01, t_end=1.0)
    q0, r0 = 1.7, 0.25
    traj = integrate_trajectory(coordinate_field(params), ConfigPoint(q0, r0, 0.0), cfg)
    assert np.all(traj.q == q0)
    assert traj.r[-1] == pytest.approx(r0 + 0.01 * q0 * 1.0, abs=1e-10)
    # scalar form agrees
    traj2 = integrate_trajectory(
        lambda p: velocity_coordinate(params, p), ConfigPoint(q0, r0, 0.0), cfg)
    assert traj2.r[-1] == pytest.approx(traj.r[-1], abs=1e-14)


# ------------------------------------------------------------ convergence


def test_rk4_convergence_order():
    # Richardson on a smooth interfering trajectory: order ~ 4, demand >= 3.5
    model = make_model([-1.0, 1.0], [0.1, 0.9])
    start = ConfigPoint(0.3, 0.2, 0.0)
    finals = []
    for dt in (0.04, 0.02, 0.01):
        cfg = IntegratorConfig(dt=dt, t_end=2.0, store_every=10**9)
        traj = integrate_trajectory(momentum_field(model), start, cfg)
        finals.append(np.array([traj.q[-1], traj.r[-1]]))
    e1 = np.linalg.norm(finals[0] - finals[1])
    e2 = np.linalg.norm(finals[1] - finals[2])
    order = np.log2(e1 / e2)
    assert order >= 3.5


def test_integration_is_deterministic():
    model = make_model([-1.0, 1.0], [0.1, 0.9])
    cfg = default_config(model, t_end=2.0)
    a = integrate_trajectory(momentum_field(model), ConfigPoint(0.3, 0.2, 0.0), cfg)
    b = integrate_trajectory(momentum_field(model), ConfigPoint(0.3, 0.2, 0.0), cfg)
    assert np.array_equal(a.q, b.q) and np.array_equal(a.r, b.r)
    assert np.array_equal(a.v_q, b.v_q) and np.array_equal(a.v_r, b.v_r)


# ------------------------------------------------------------ node policy


def test_invalid_start_raises():
    model = make_model([-1.0, 1.0], [0.5, 0.5])
    cfg = default_config(model)
    with pytest.raises(InvalidStartError):
        integrate_trajectory(momentum_field(model),
                             ConfigPoint(np.pi / 2.0, 0.0, 0.0), cfg)


def test_batch_start_on_node_is_excluded_not_fatal():
    model = make_model([-1.0, 1.0], [0.5, 0.5])
    cfg = default_config(model, t_end=1.0)
    trajs = integrate_ensemble(momentum_field(model),
                               [0.3, np.pi / 2.0], [0.1, 0.0], cfg)
    assert not trajs[0].node_excluded and len(trajs[0]) > 0
    assert trajs[1].node_excluded and len(trajs[1]) == 0


def test_wall_field_truncates_and_flags():
    # velocity +1 toward a hard validity wall at r = 1: the step halving
    # closes in on the wall, then the trajectory is excluded and truncated
    def wall(t, q, r):
        q = np.asarray(q, float)
        r = np.asarray(r, float)
        return np.zeros_like(q), np.ones_like(r), r < 1.0

    cfg = IntegratorConfig(dt=0.1, t_end=2.0, max_substep_halvings=6)
    trajs = integrate_ensemble(wall, [0.0], [0.0], cfg)
    traj = trajs[0]
    assert traj.node_excluded
    assert traj.times[-1] < 2.0
    assert np.max(traj.r) <= 1.0
    assert traj.r[-1] > 0.8  # got close to the wall before giving up


def test_excluded_sample_does_not_disturb_others():
    model = make_model([-1.0, 1.0], [0.5, 0.5])
    cfg = default_config(model, t_end=1.5)
    solo = integrate_trajectory(momentum_field(model), ConfigPoint(0.4, -0.3, 0.0), cfg)
    pair = integrate_ensemble(momentum_field(model),
                              [0.4, np.pi / 2.0], [-0.3, 0.0], cfg)
    assert np.array_equal(solo.q, pair[0].q)
    assert np.array_equal(solo.r, pair[0].r)


# ------------------------------------------------------------ outcomes


def synthetic_traj(times, v_r, v_q=None):
    times = np.asarray(times, float)
    v_r = np.asarray(v_r, float)
    if v_q is None:
        v_q = np.zeros_like(v_r)
    return Trajectory(times=times, q=np.zeros_like(times), r=np.zeros_like(times),
                      v_q=v_q, v_r=v_r)


def test_detect_outcome_locks_to_branch():
    model = make_model([-1.0, 1.0], [0.5, 0.5])
    cfg = IntegratorConfig(dt=0.01, t_end=6.0, stationary_window=0.6)
    times = np.linspace(0.0, 6.0, 601)
    v_r = np.where(times < 3.0, np.tanh(times), 1.0 - 1e-4)
    assert detect_outcome(synthetic_traj(times, v_r), model, cfg) == 1
    assert detect_outcome(synthetic_traj(times, -v_r), model, cfg) == 0


def test_detect_outcome_unresolved_between_branches():
    model = make_model([-1.0, 1.0], [0.5, 0.5])
    cfg = IntegratorConfig(dt=0.01, t_end=6.0, stationary_window=0.6)
    times = np.linspace(0.0, 6.0, 601)
    # trailing average sits at 0.5: residual 0.5 > 0.05 * lam * gap = 0.1
    traj = synthetic_traj(times, np.full_like(times, 0.5))
    assert detect_outcome(traj, model, cfg) is None


def test_detect_outcome_guards():
    model = make_model([-1.0, 1.0], [0.5, 0.5])
    cfg = IntegratorConfig(dt=0.01, t_end=6.0, stationary_window=0.6)
    bad = synthetic_traj(np.linspace(0, 0.3, 31), np.ones(31))
    with pytest.raises(ValueError):
        detect_outcome(bad, model, cfg)
    dead = synthetic_traj(np.linspace(0, 6.0, 601), np.ones(601))
    dead.node_excluded = True
    with pytest.raises(ValueError):
        detect_outcome(dead, model, cfg)


def test_momentum_gap():
    assert momentum_gap(make_model([-1.0, 1.0], [0.5, 0.5])) == 2.0
    assert momentum_gap(make_model([0.0, 0.5, 3.0], [1, 1, 1])) == 0.5
    assert momentum_gap(make_model([2.0], [1.0])) == 1.0


# ------------------------------------------------------------ time scales


def test_decoherence_time_reference_case():
    assert decoherence_time(1.0, 1.0, -1.0, 1.0) == pytest.approx(3.0, rel=1e-15)


def test_decoherence_time_scalings():
    T = decoherence_time(1.0, 1.0, -1.0, 1.0)
    assert decoherence_time(2.0, 1.0, -1.0, 1.0) == pytest.approx(2 * T)
    assert decoherence_time(1.0, 2.0, -1.0, 1.0) == pytest.approx(T / 2)
    assert decoherence_time(1.0, 1.0, 0.0, 4.0) == pytest.approx(1.5)
    with pytest.raises(DegenerateValuesError):
        decoherence_time(1.0, 1.0, 0.7, 0.7)


def test_projective_validity_bound():
    ok = projective_validity(1.0, 0.01)
    assert ok.valid and ok.ratio == pytest.approx(0.01)
    bad = projective_validity(3.0, 1.0)
    assert not bad.valid and bad.ratio == pytest.approx(3.0)


def test_default_config_scales_to_separation_time():
    model = make_model([-1.0, 1.0], [0.5, 0.5])
    cfg = default_config(model)
    assert cfg.t_end == pytest.approx(6.0)
    assert cfg.dt == pytest.approx(0.01)
    assert cfg.stationary_window == pytest.approx(0.6)
    slow = make_model([-0.05, 0.05], [0.5, 0.5])  # T = 60 -> dt capped at 0.01
    assert default_config(slow).dt == pytest.approx(0.01)
    fast = make_model([-40.0, 40.0], [0.5, 0.5])  # T = 0.075 -> dt = T/300
    assert default_config(fast).dt == pytest.approx(0.075 / 300.0)


def test_config_validation():
    with pytest.raises(ValueError):
        IntegratorConfig(dt=0.0, t_end=1.0)
    with pytest.raises(ValueError):
        IntegratorConfig(dt=0.5, t_end=0.1)
    with pytest.raises(ValueError):
        IntegratorConfig(dt=0.01, t_end=1.0, stationary_window=2.0)
    with pytest.raises(ValueError):
        IntegratorConfig(dt=0.01, t_end=1.0, store_every=0)

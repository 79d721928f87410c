import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from sfmnet.errors import DegenerateGeometryError
from sfmnet.forces import (
    GoalSpec,
    PedState,
    SfmParams,
    WallSegment,
    attractive_force,
    contact_gate,
    read_trajectory_csv,
    simulate,
    step,
    total_force,
    wall_context,
    wall_force,
    write_trajectory_csv,
)

PARAMS = SfmParams(mass=70.0, tau=0.7, desired_speed=1.2)


def rot(theta):
    c, s = math.cos(theta), math.sin(theta)
    return np.array([[c, -s], [s, c]])


# --- attractive force -------------------------------------------------------


def test_attractive_closed_form():
    state = PedState(position=(0, 0), velocity=(0, 0))
    f = attractive_force(state, PARAMS, GoalSpec((5, 0)))
    # m * v_des / tau = 70 * 1.2 / 0.7
    assert_allclose(f, [120.0, 0.0], rtol=1e-12)


def test_attractive_vanishes_at_desired_velocity():
    state = PedState(position=(0, 0), velocity=(1.2, 0))
    f = attractive_force(state, PARAMS, GoalSpec((5, 0)))
    assert_allclose(f, [0.0, 0.0], atol=1e-12)


def test_attractive_rotation_equivariance():
    rng = np.random.default_rng(0)
    for _ in range(50):
        p = rng.normal(0, 3, 2)
        v = rng.normal(0, 1, 2)
        g = rng.normal(0, 3, 2)
        theta = rng.uniform(0, 2 * math.pi)
        R = rot(theta)
        f = attractive_force(PedState(position=p, velocity=v), PARAMS, GoalSpec(g))
        f_rot = attractive_force(
            PedState(position=R @ p, velocity=R @ v), PARAMS, GoalSpec(R @ g)
        )
        assert_allclose(f_rot, R @ f, atol=1e-12 * (1 + np.abs(f).max()))


def test_attractive_degenerate_goal_raises():
    state = PedState(position=(1, 1), velocity=(0, 0))
    with pytest.raises(DegenerateGeometryError):
        attractive_force(state, PARAMS, GoalSpec((1, 1)))


# --- wall force --------------------------------------------------------------


def wall_at_x(x, lo=-5.0, hi=5.0):
    return WallSegment((x, lo), (x, hi))


def test_wall_force_at_contact_distance():
    # d_w equals the radius: exponent is zero, magnitude exactly the amplitude
    state = PedState(position=(0, 0), velocity=(0, 0))
    f = wall_force(state, PARAMS, [wall_at_x(0.3)])
    assert_allclose(f, [-1000.0, 0.0])


def test_wall_force_empty_list():
    state = PedState(position=(0, 0), velocity=(1, 1))
    assert_allclose(wall_force(state, PARAMS, []), [0.0, 0.0])


def test_wall_force_one_decay_length():
    state = PedState(position=(0, 0), velocity=(0, 0))
    f = wall_force(state, PARAMS, [wall_at_x(0.3 + 0.08)])
    assert np.hypot(*f) == pytest.approx(1000.0 / math.e, rel=1e-12)


def test_wall_force_decreasing_in_distance():
    state = PedState(position=(0, 0), velocity=(0, 0))
    dists = np.linspace(0.15, 10.0, 80)
    mags = [
        np.hypot(*wall_force(state, PARAMS, [wall_at_x(d)])) for d in dists
    ]
    assert all(a > b for a, b in zip(mags, mags[1:]))


def test_wall_force_parallel_to_normal_without_contact_terms():
    rng = np.random.default_rng(1)
    for _ in range(50):
        x = rng.uniform(0.2, 2.0)
        v = rng.normal(0, 2, 2)
        f = wall_force(PedState(position=(0, 0), velocity=v), PARAMS, [wall_at_x(x)])
        n = np.array([-1.0, 0.0])
        cross = f[0] * n[1] - f[1] * n[0]
        assert abs(cross) <= 1e-12 * np.hypot(*f)


def test_contact_gate():
    assert contact_gate(-1.0) == 0.0
    assert contact_gate(0.0) == 0.0
    assert contact_gate(0.25) == 0.25
    rng = np.random.default_rng(2)
    for x in rng.normal(0, 3, 100):
        g = contact_gate(x)
        assert g == max(0.0, x)
        assert contact_gate(g) == g  # idempotent on its range


def test_contact_terms_add_compression_and_friction():
    params = SfmParams(
        mass=70, tau=0.7, desired_speed=1.2, radius=0.3,
        contact_k1=1.2e5, contact_k2=2.4e5,
    )
    # overlap 0.1 m, moving tangentially (+y along the wall plane)
    state = PedState(position=(0.2, 0.0), velocity=(0.0, 1.0))
    wall = wall_at_x(0.0)
    f_plain = wall_force(state, params, [wall], contact_terms=False)
    f_full = wall_force(state, params, [wall], contact_terms=True)
    n_w = np.array([1.0, 0.0])
    t_w = np.array([-n_w[1], n_w[0]])
    overlap = 0.3 - 0.2
    expected = (
        f_plain
        + params.contact_k1 * overlap * n_w
        - params.contact_k2 * overlap * float(state.velocity @ t_w) * t_w
    )
    assert_allclose(f_full, expected, rtol=1e-12)
    # no contact, no extra terms
    state_far = PedState(position=(1.0, 0.0), velocity=(0.0, 1.0))
    assert_allclose(
        wall_force(state_far, params, [wall], contact_terms=True),
        wall_force(state_far, params, [wall], contact_terms=False),
    )


def test_wall_force_coincident_point_raises():
    state = PedState(position=(0.0, 0.0), velocity=(0, 0))
    with pytest.raises(DegenerateGeometryError):
        wall_force(state, PARAMS, [wall_at_x(0.0)])


# --- total force and invariances ---------------------------------------------


def test_total_force_is_sum_of_parts():
    rng = np.random.default_rng(3)
    walls = [wall_at_x(1.5), WallSegment((-2, -1), (2, -1))]
    for _ in range(50):
        state = PedState(position=rng.normal(0, 0.3, 2), velocity=rng.normal(0, 1, 2))
        goal = GoalSpec(rng.normal(3, 1, 2))
        expected = attractive_force(state, PARAMS, goal) + wall_force(state, PARAMS, walls)
        assert_allclose(total_force(state, PARAMS, goal, walls), expected, rtol=1e-15)


def test_total_force_without_walls_is_attractive():
    state = PedState(position=(0, 0), velocity=(0.4, -0.2))
    goal = GoalSpec((3, 4))
    assert_allclose(
        total_force(state, PARAMS, goal, []),
        attractive_force(state, PARAMS, goal),
    )


def test_translation_invariance():
    rng = np.random.default_rng(4)
    walls = [WallSegment((1, -3), (1, 3))]
    for _ in range(20):
        shift = rng.normal(0, 10, 2)
        state = PedState(position=(0, 0), velocity=(0.5, 0.1))
        goal = GoalSpec((4, 1))
        f = total_force(state, PARAMS, goal, walls)
        walls_shifted = [WallSegment(w.a + shift, w.b + shift) for w in walls]
        f_shifted = total_force(
            PedState(position=shift, velocity=(0.5, 0.1)),
            PARAMS,
            GoalSpec(np.array([4, 1]) + shift),
            walls_shifted,
        )
        assert_allclose(f_shifted, f, atol=1e-9)


# --- integrator ---------------------------------------------------------------


def test_step_hand_arithmetic():
    state = PedState(position=(0, 0), velocity=(0, 0))
    new = step(state, PARAMS, GoalSpec((5, 0)), [], dt=0.1)
    # v' = 120/70 * 0.1, p' = v' * 0.1
    assert_allclose(new.velocity, [0.17142857142857143, 0.0], rtol=1e-12)
    assert_allclose(new.position, [0.017142857142857144, 0.0], rtol=1e-12)
    assert new.time == pytest.approx(0.1)


def test_step_zero_force_uniform_motion():
    # at the desired velocity the force vanishes and motion is uniform
    state = PedState(position=(0, 0), velocity=(1.2, 0))
    new = step(state, PARAMS, GoalSpec((100, 0)), [], dt=0.1)
    assert_allclose(new.position, [0.12, 0.0], rtol=1e-12)
    assert_allclose(new.velocity, [1.2, 0.0], rtol=1e-12)


def test_free_space_matches_exponential_relaxation():
    params = PARAMS
    goal = GoalSpec((1e6, 0))  # effectively constant goal direction
    traj = simulate(
        PedState((0, 0), (0, 0)), params, goal, [],
        duration=5.0, dt=0.01, stop_radius=0.0,
    )
    speeds = np.hypot(*traj.velocities.T)
    exact = params.desired_speed * (1 - np.exp(-traj.times / params.tau))
    assert np.max(np.abs(speeds - exact)) < 4e-3


def test_integrator_first_order_convergence():
    params = PARAMS
    goal = GoalSpec((1e6, 0))

    def max_err(dt):
        traj = simulate(
            PedState((0, 0), (0, 0)), params, goal, [],
            duration=5.0, dt=dt, stop_radius=0.0,
        )
        speeds = np.hypot(*traj.velocities.T)
        exact = params.desired_speed * (1 - np.exp(-traj.times / params.tau))
        return np.max(np.abs(speeds - exact))

    e1 = max_err(0.01)
    e2 = max_err(0.005)
    assert e1 / e2 == pytest.approx(2.0, rel=0.1)


# --- simulate ------------------------------------------------------------------


def test_simulate_state_count_without_early_stop():
    traj = simulate(
        PedState((0, 0), (0, 0)), PARAMS, GoalSpec((100, 0)), [],
        duration=20.0, dt=0.1, stop_radius=0.0,
    )
    assert len(traj) == 201
    assert not traj.goal_reached


def test_simulate_stops_near_goal():
    traj = simulate(
        PedState((0, 0), (1.2, 0)), PARAMS, GoalSpec((5, 0)), [],
        duration=20.0, dt=0.1,
    )
    assert traj.goal_reached
    assert len(traj) < 201
    assert np.hypot(*(np.array([5.0, 0.0]) - traj.positions[-1])) <= 0.2


def test_simulate_logged_forces_are_recomputable():
    walls = [WallSegment((2, -4), (2, 4))]
    traj = simulate(
        PedState((0, 0), (0.3, 0.8)), PARAMS, GoalSpec((1.5, 6)), walls,
        duration=3.0, dt=0.1, stop_radius=0.0,
    )
    for k in range(len(traj)):
        state = PedState(position=traj.positions[k], velocity=traj.velocities[k])
        expected = total_force(state, PARAMS, GoalSpec((1.5, 6)), walls)
        assert_allclose(traj.force_total[k], expected, rtol=1e-12)
        assert_allclose(
            traj.force_total[k],
            traj.force_attractive[k] + traj.force_wall[k],
            rtol=1e-12,
        )


def test_simulate_rotation_equivariance():
    theta = 0.7
    R = rot(theta)
    goal = np.array([4.0, 2.0])
    walls = [WallSegment((2, -3), (2, 3))]
    t1 = simulate(PedState((0, 0), (0.5, 0)), PARAMS, GoalSpec(goal), walls,
                  duration=2.0, dt=0.1, stop_radius=0.0)
    t2 = simulate(
        PedState((0, 0), R @ np.array([0.5, 0.0])), PARAMS, GoalSpec(R @ goal),
        [WallSegment(R @ w.a, R @ w.b) for w in walls],
        duration=2.0, dt=0.1, stop_radius=0.0,
    )
    assert_allclose(t2.positions, t1.positions @ R.T, atol=1e-9)


# --- wall context feature ------------------------------------------------------


def test_wall_context_matches_single_wall():
    rng = np.random.default_rng(5)
    for _ in range(100):
        x = rng.uniform(0.35, 3.0)
        wall = wall_at_x(x)
        d, n = wall_context((0.0, 0.0), [wall], PARAMS)
        assert d == pytest.approx(x, rel=1e-9)
        assert_allclose(n, [-1.0, 0.0], atol=1e-12)


def test_wall_context_collapses_shared_corner():
    # two segments meeting at a corner: the equivalent distance reproduces
    # the doubled force through the exponential law
    a = WallSegment((1.0, 1.0), (1.0, 5.0))
    b = WallSegment((1.0, 1.0), (5.0, 1.0))
    p = np.array([0.5, 0.5])
    d, n = wall_context(p, [a, b], PARAMS)
    f = wall_force(PedState(position=p, velocity=(0, 0)), PARAMS, [a, b])
    expected_mag = PARAMS.wall_a * math.exp((PARAMS.radius - d) / PARAMS.wall_b)
    assert np.hypot(*f) == pytest.approx(expected_mag, rel=1e-9)
    assert_allclose(n, f / np.hypot(*f), rtol=1e-12)


def test_wall_context_far_from_walls_saturates():
    d, n = wall_context((0.0, 0.0), [wall_at_x(200.0)], PARAMS)
    assert d == 30.0
    assert np.hypot(*n) == pytest.approx(1.0)
    d_empty, _ = wall_context((0.0, 0.0), [], PARAMS)
    assert d_empty == 30.0


# --- trajectory csv -------------------------------------------------------------


def test_trajectory_csv_round_trip(tmp_path):
    traj = simulate(
        PedState((0, 0), (0.2, 0.1)), PARAMS, GoalSpec((4, 3)), [wall_at_x(2.0)],
        duration=2.0, dt=0.1, stop_radius=0.0,
    )
    path = tmp_path / "traj.csv"
    write_trajectory_csv(traj, path)
    back = read_trajectory_csv(path)
    # 9 significant digits in the file
    assert_allclose(back.positions, traj.positions, rtol=1e-8)
    assert_allclose(back.force_total, traj.force_total, rtol=1e-8, atol=1e-8)
    assert len(back) == len(traj)
    header = path.read_text().splitlines()[0]
    assert header == "t,x,y,vx,vy,fx,fy,fox,foy,fwx,fwy"

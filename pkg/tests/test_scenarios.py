"""Scenario construction and closed-loop episode behavior."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from teamfuse.errors import InvalidArgumentError, PlacementError
from teamfuse.scenarios import (
    DT,
    ROBOT_V_MAX,
    Scenario,
    ScenarioSpec,
    _clamp_step,
    _pedestrian_guard,
    _place_points,
    build_scenario,
    crowd_step,
    simulate_episode,
    simulated_operator,
)


def test_spec_validation_rejects_bad_fields():
    with pytest.raises(InvalidArgumentError):
        ScenarioSpec(kind="warehouse")
    with pytest.raises(InvalidArgumentError):
        ScenarioSpec(kind="bimodal_corridor", crowd_density=-0.1)
    with pytest.raises(InvalidArgumentError):
        ScenarioSpec(kind="bimodal_corridor", crowd_cooperation=1.5)
    with pytest.raises(InvalidArgumentError):
        ScenarioSpec(kind="bimodal_corridor", autonomy_reliability=-0.2)
    with pytest.raises(InvalidArgumentError):
        ScenarioSpec(kind="bimodal_corridor", max_steps=0)


def test_spec_round_trips_through_dict():
    spec = ScenarioSpec.elevator(operator_fidelity_sigma=0.5)
    again = ScenarioSpec.from_dict(spec.to_dict())
    assert again == spec


def test_build_scenario_is_deterministic():
    spec = ScenarioSpec.crowd(crowd_density=0.5)
    a = build_scenario(spec, seed=7)
    b = build_scenario(spec, seed=7)
    assert np.array_equal(a.crowd_init, b.crowd_init)
    assert np.array_equal(a.crowd_goals_init, b.crowd_goals_init)
    c = build_scenario(spec, seed=8)
    assert not np.array_equal(a.crowd_init, c.crowd_init)


def test_corridor_layout_has_wall_between_two_routes():
    sc = build_scenario(ScenarioSpec.corridor(), seed=0)
    assert sc.obstacles.shape[0] > 0
    assert np.allclose(sc.obstacles[:, 1], 0.0)
    # operator's route passes left of the wall, machine carries both sides
    assert sc.human_routes[0][0][0] < sc.obstacles[:, 0].min()
    sides = sorted(route[0][0] for route in sc.machine_routes)
    assert sides[0] < sc.obstacles[:, 0].min()
    assert sides[-1] > sc.obstacles[:, 0].max()


def test_zero_density_crowd_scenario_is_empty():
    sc = build_scenario(ScenarioSpec.crowd(crowd_density=0.0), seed=3)
    assert sc.crowd_init.shape == (0, 2)
    tr = simulate_episode(ScenarioSpec.crowd(crowd_density=0.0), "human_only", seed=3)
    assert tr.termination == "reached_goal"


def test_crowd_respawn_slots_cover_population():
    sc = build_scenario(ScenarioSpec.crowd(crowd_density=0.6), seed=1)
    assert sc.respawn_slots is not None
    assert sc.respawn_slots.shape == sc.crowd_init.shape


def test_place_points_respects_separation_or_raises():
    rng = np.random.default_rng(0)
    pts = _place_points(rng, (0.0, 0.0, 4.0, 4.0), 20, min_sep=0.5)
    d = np.linalg.norm(pts[:, None, :] - pts[None, :, :], axis=-1)
    np.fill_diagonal(d, np.inf)
    assert d.min() >= 0.5
    with pytest.raises(PlacementError):
        _place_points(rng, (0.0, 0.0, 1.0, 1.0), 200, min_sep=0.5)


def test_episode_trace_shape_invariants():
    tr = simulate_episode(ScenarioSpec.corridor(), "human_only", seed=5)
    assert len(tr.states) == len(tr.decisions) + 1
    steps = [s.step for s in tr.states]
    assert steps == list(range(len(tr.states)))
    assert np.allclose(tr.states[0].robot_pos, build_scenario(tr.spec, 5).start)


def test_episode_is_bitwise_deterministic():
    spec = ScenarioSpec.crowd(crowd_density=0.5)
    a = simulate_episode(spec, "irt", seed=11)
    b = simulate_episode(spec, "irt", seed=11)
    assert a.termination == b.termination
    assert np.array_equal(a.robot_path(), b.robot_path())
    for sa, sb in zip(a.states, b.states):
        assert np.array_equal(sa.crowd_positions, sb.crowd_positions)


def test_robot_never_exceeds_speed_cap():
    tr = simulate_episode(ScenarioSpec.corridor(), "irt", seed=2)
    steps = np.diff(tr.robot_path(), axis=0)
    assert np.linalg.norm(steps, axis=1).max() <= ROBOT_V_MAX * DT + 1e-9


def test_robot_stays_inside_arena():
    spec = ScenarioSpec.crowd(crowd_density=0.7)
    sc = build_scenario(spec, seed=4)
    xmin, ymin, xmax, ymax = sc.arena
    for arch in ("irt", "irt_decoupled"):
        path = simulate_episode(spec, arch, seed=4).robot_path()
        assert path[:, 0].min() >= xmin and path[:, 0].max() <= xmax
        assert path[:, 1].min() >= ymin and path[:, 1].max() <= ymax


def test_corridor_outcomes_by_architecture():
    spec = ScenarioSpec.corridor()
    assert simulate_episode(spec, "human_only", seed=0).termination == "reached_goal"
    assert simulate_episode(spec, "autonomy_only", seed=0).termination == "reached_goal"
    assert simulate_episode(spec, "linear", seed=0).termination == "collision"
    irt = simulate_episode(spec, "irt", seed=0)
    assert irt.termination == "reached_goal"
    # fused run follows the operator through the left gap
    assert irt.robot_path()[:, 0].min() < -0.8


def test_unknown_architecture_rejected():
    with pytest.raises(InvalidArgumentError):
        simulate_episode(ScenarioSpec.corridor(), "oracle", seed=0)


def test_operator_flips_route_at_semantic_event():
    spec = ScenarioSpec.elevator()
    sc = build_scenario(spec, seed=0)
    rng = np.random.default_rng(0)
    pos = sc.start
    before = simulated_operator(sc, pos, False, rng, noise_std=0.0)
    after = simulated_operator(sc, pos, True, rng, noise_std=0.0)
    assert before.observation[0] > 0 > after.observation[0]


def test_event_fired_flag_follows_schedule():
    spec = ScenarioSpec.elevator()
    tr = simulate_episode(spec, "human_only", seed=1)
    fired = [s.event_fired for s in tr.states]
    k = spec.semantic_event_step
    assert not any(fired[: k + 1])
    assert all(fired[k + 1 :])


def test_dense_crowd_stalls_decoupled_fusion():
    tr = simulate_episode(ScenarioSpec.crowd(crowd_density=0.8), "irt_decoupled", seed=1)
    assert tr.termination in ("frozen", "timeout")


def test_crowd_step_deterministic_and_bounded():
    pos = np.array([[0.0, 0.0], [1.0, 0.0]])
    vel = np.zeros_like(pos)
    goals = np.array([[3.0, 0.0], [-3.0, 0.0]])
    robot = np.array([0.0, 5.0])
    arena = (-4.0, -6.0, 4.0, 6.0)
    p1, v1 = crowd_step(pos, vel, goals, robot, 0.6, arena)
    p2, v2 = crowd_step(pos, vel, goals, robot, 0.6, arena)
    assert np.array_equal(p1, p2) and np.array_equal(v1, v2)
    assert np.all(np.isfinite(p1))
    # head-on walkers sidestep rather than pass through each other
    assert abs(p1[0, 1]) > 0 and abs(p1[1, 1]) > 0


def test_crowd_step_keeps_agents_in_arena():
    rng = np.random.default_rng(9)
    arena = (-4.0, -6.0, 4.0, 6.0)
    pos = rng.uniform([-3.5, -5.5], [3.5, 5.5], size=(12, 2))
    vel = np.zeros_like(pos)
    goals = rng.uniform([-3.5, -5.5], [3.5, 5.5], size=(12, 2))
    robot = np.zeros(2)
    for _ in range(60):
        pos, vel = crowd_step(pos, vel, goals, robot, 0.6, arena)
    assert pos[:, 0].min() >= arena[0] and pos[:, 0].max() <= arena[2]
    assert pos[:, 1].min() >= arena[1] and pos[:, 1].max() <= arena[3]


def test_guard_holds_rather_than_entering_occupied_space():
    robot = np.zeros(2)
    proposed = np.array([0.4, 0.0])
    crowd = np.array([[0.6, 0.0]])
    executed = _pedestrian_guard(robot, proposed, crowd)
    assert np.array_equal(executed, robot)
    # and anticipates a walker about to cross the landing spot
    clear_now = np.array([[1.6, 0.0]])
    vel = np.array([[-4.0, 0.0]])
    executed = _pedestrian_guard(robot, proposed, clear_now, vel)
    assert np.linalg.norm(executed) < np.linalg.norm(proposed)


@given(
    st.tuples(
        st.floats(-5, 5, allow_nan=False),
        st.floats(-5, 5, allow_nan=False),
    )
)
@settings(max_examples=50, deadline=None)
def test_clamp_step_never_exceeds_cap(target):
    start = np.zeros(2)
    out = _clamp_step(start, np.asarray(target, dtype=float))
    assert np.linalg.norm(out - start) <= ROBOT_V_MAX * DT + 1e-12


def test_scenario_kinds_all_buildable():
    for spec in (ScenarioSpec.corridor(), ScenarioSpec.crowd(), ScenarioSpec.elevator()):
        sc = build_scenario(spec, seed=0)
        assert isinstance(sc, Scenario)
        assert sc.arena[0] < sc.arena[2] and sc.arena[1] < sc.arena[3]

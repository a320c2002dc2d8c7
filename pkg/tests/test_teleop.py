"""Live teleoperation service: protocol, stale input, replay equivalence."""

import asyncio
import json
import math

import numpy as np
import pytest
from websockets.asyncio.client import connect

from teamfuse.config import parse_config
from teamfuse.errors import InvalidArgumentError
from teamfuse.metrics import score_episode
from teamfuse.scenarios import (
    DT,
    ROBOT_V_MAX,
    Episode,
    OperatorSample,
    ScenarioSpec,
    simulate_episode,
)
from teamfuse.teleop import (
    TeleopSession,
    _jsonable,
    open_server,
    operator_from_direction,
    replay_transcript,
)

RECV_TIMEOUT = 20.0


def _config(**scenario):
    scenario.setdefault("kind", "crowd_navigation")
    scenario.setdefault("crowd_density", 0.0)
    return parse_config({
        "scenario": scenario,
        "architectures": [scenario.pop("architecture", "human_only")],
        "output_dir": "unused",
    }, base_dir="/tmp")


def _with_client(config, script, tick_rate=60.0):
    async def main():
        async with open_server(config, tick_rate=tick_rate) as port:
            async with connect(f"ws://127.0.0.1:{port}") as ws:
                return await script(ws)
    return asyncio.run(main())


async def _recv(ws):
    return json.loads(await asyncio.wait_for(ws.recv(), RECV_TIMEOUT))


def _fresh_episode(architecture="human_only", seed=0, **kw):
    kw.setdefault("crowd_density", 0.0)
    return Episode(ScenarioSpec.crowd(**kw), architecture, seed)


# ---------------------------------------------------------------------------
# session mechanics, no socket involved


def test_tick_rate_bounds():
    TeleopSession("s", _fresh_episode(), 5.0)
    TeleopSession("s", _fresh_episode(), 60.0)
    for bad in (4.9, 60.1, 0.0):
        with pytest.raises(InvalidArgumentError):
            TeleopSession("s", _fresh_episode(), bad)


def test_stale_input_decays_to_zero():
    session = TeleopSession("s", _fresh_episode(), 30.0)
    session.register_input(1.0, 0.0, now=10.0)
    assert np.allclose(session.effective_input(10.5), [1.0, 0.0])
    assert np.allclose(session.effective_input(11.0 + 1e-6), [0.0, 0.0])


def test_input_clamped_to_unit_disc():
    session = TeleopSession("s", _fresh_episode(), 30.0)
    session.register_input(3.0, 4.0, now=0.0)
    assert np.allclose(session.effective_input(0.1), [0.6, 0.8])
    with pytest.raises(InvalidArgumentError):
        session.register_input(float("nan"), 0.0, now=0.0)


def test_human_only_tracks_the_stick_at_speed_cap():
    ep = _fresh_episode()
    for _ in range(5):
        ep.advance(operator_from_direction(ep, np.array([0.0, 1.0])))
    path = np.stack([s.robot_pos for s in ep.states])
    steps = np.diff(path, axis=0)
    assert np.allclose(steps[:, 0], 0.0, atol=1e-12)
    assert np.allclose(steps[:, 1], ROBOT_V_MAX * DT, atol=1e-12)
    # half deflection moves at half speed
    ep2 = _fresh_episode()
    ep2.advance(operator_from_direction(ep2, np.array([0.0, 0.5])))
    dy = ep2.states[-1].robot_pos[1] - ep2.states[0].robot_pos[1]
    assert dy == pytest.approx(0.5 * ROBOT_V_MAX * DT, abs=1e-12)


def test_zero_deflection_is_a_silent_hold():
    ep = _fresh_episode()
    op = operator_from_direction(ep, np.zeros(2))
    assert op.observation is None
    assert np.allclose(op.action, ep.robot)


def test_silent_irt_behaves_like_autonomy_on_the_empty_arena():
    spec = ScenarioSpec.crowd(crowd_density=0.0)
    ep = Episode(spec, "irt", 3)
    while ep.termination is None:
        ep.advance(OperatorSample(None, ep.robot.copy()))
    silent = ep.trace()
    auto = simulate_episode(spec, "autonomy_only", 3)
    assert silent.termination == "reached_goal"
    assert auto.termination == "reached_goal"
    assert abs(len(silent.decisions) - len(auto.decisions)) <= 3
    # stays on the direct lane; the alternate route swings out to x = -3.5
    assert float(np.abs(silent.robot_path()[:, 0]).max()) < 1.3


def test_architecture_hot_switch_swaps_default_schedule():
    ep = _fresh_episode("switching")
    assert ep.schedule.kind == "switching"
    ep.set_architecture("linear")
    assert ep.schedule.kind == "constant"
    with pytest.raises(InvalidArgumentError):
        ep.set_architecture("psychic")


# ---------------------------------------------------------------------------
# scripted socket sessions


def _corridor_steer(robot):
    """Steer for the left gap, then the goal, like a sensible human."""
    x, y = robot
    target = (-2.7, 0.8) if y < 0.5 else (0.0, 5.0)
    d = np.array([target[0] - x, target[1] - y])
    n = np.linalg.norm(d)
    return d / n if n > 1.0 else d


def test_corridor_round_trip_matches_offline_replay():
    config = _config(kind="bimodal_corridor", architecture="human_only")

    async def script(ws):
        while True:
            msg = await _recv(ws)
            if msg["type"] == "end":
                return msg
            assert msg["type"] == "state"
            d = _corridor_steer(msg["robot"])
            await ws.send(json.dumps(
                {"type": "input", "dx": float(d[0]), "dy": float(d[1])}
            ))

    end = _with_client(config, script)
    assert end["termination"] == "reached_goal"
    assert end["report"]["collision"] is False
    replayed = score_episode(replay_transcript(end["transcript"]))
    assert _jsonable(replayed.to_dict()) == end["report"]
    assert set(end["baselines"]) == {"human_only", "autonomy_only"}
    assert set(end["verdict"]) >= {"passed", "path_ratio_ok", "time_ok", "collision_ok"}


def test_state_frames_carry_scene_and_running_metrics():
    config = _config(kind="bimodal_corridor")

    async def script(ws):
        first = await _recv(ws)
        await ws.send(json.dumps({"type": "input", "dx": 0.0, "dy": 1.0}))
        second = await _recv(ws)
        return first, second

    first, second = _with_client(config, script)
    assert first["step"] == 0
    assert first["scene"]["kind"] == "bimodal_corridor"
    assert len(first["scene"]["obstacles"]) > 0
    assert first["metrics"]["elapsed"] == 0.0
    assert second["step"] >= 1
    assert second["metrics"]["path_length"] >= 0.0
    # corridor wall is finitely far away, so min separation is a number
    assert isinstance(second["metrics"]["min_separation"], float)


def test_malformed_messages_draw_error_frames_and_session_survives():
    config = _config(max_steps=400)

    async def script(ws):
        await _recv(ws)
        errors = 0
        for junk in ("not json", json.dumps({"type": "bogus"}),
                     json.dumps({"type": "input", "dx": "a", "dy": 1}),
                     json.dumps({"type": "mode", "architecture": "psychic"}),
                     json.dumps([1, 2, 3])):
            await ws.send(junk)
        seen_step = 0
        while errors < 5:
            msg = await _recv(ws)
            if msg["type"] == "error":
                errors += 1
            elif msg["type"] == "state":
                seen_step = msg["step"]
        # the session is still ticking after all that abuse
        while True:
            msg = await _recv(ws)
            if msg["type"] == "state" and msg["step"] > seen_step + 2:
                return errors

    assert _with_client(config, script) == 5


def test_input_flood_never_stalls_the_tick_loop():
    config = _config(max_steps=120)

    async def script(ws):
        await _recv(ws)
        frame = json.dumps({"type": "input", "dx": 0.0, "dy": 1.0})
        for _ in range(400):
            await ws.send(frame)
        while True:
            msg = await _recv(ws)
            if msg["type"] == "end":
                return msg

    end = _with_client(config, script)
    assert end["termination"] == "reached_goal"


def test_mode_switch_is_recorded_and_replayable():
    config = _config(architecture="linear", max_steps=80)

    async def script(ws):
        switched = False
        while True:
            msg = await _recv(ws)
            if msg["type"] == "end":
                return msg
            if msg["type"] != "state":
                continue
            if msg["step"] >= 4 and not switched:
                await ws.send(json.dumps({"type": "mode", "architecture": "irt"}))
                switched = True
            await ws.send(json.dumps({"type": "input", "dx": 0.0, "dy": 1.0}))

    end = _with_client(config, script, tick_rate=30.0)
    archs = {row["architecture"] for row in end["transcript"]["ticks"]}
    assert archs == {"linear", "irt"}
    assert end["report"]["architecture"] == "irt"
    replayed = score_episode(replay_transcript(end["transcript"]))
    assert _jsonable(replayed.to_dict()) == end["report"]


def test_totally_silent_session_times_out_and_replays():
    config = _config(max_steps=12)

    async def script(ws):
        while True:
            msg = await _recv(ws)
            if msg["type"] == "end":
                return msg

    end = _with_client(config, script)
    assert end["termination"] == "timeout"
    assert all(row["dx"] == 0.0 and row["dy"] == 0.0
               for row in end["transcript"]["ticks"])
    replayed = replay_transcript(end["transcript"])
    assert replayed.termination == "timeout"
    assert _jsonable(score_episode(replayed).to_dict()) == end["report"]


def test_concurrent_sessions_are_isolated():
    config = _config(max_steps=300)

    async def main():
        async with open_server(config, tick_rate=60.0) as port:
            uri = f"ws://127.0.0.1:{port}"

            async def driven():
                async with connect(uri) as ws:
                    while True:
                        msg = await _recv(ws)
                        if msg["type"] != "state":
                            continue
                        if msg["step"] >= 10:
                            return msg["robot"]
                        await ws.send(json.dumps(
                            {"type": "input", "dx": 0.0, "dy": 1.0}
                        ))

            async def idle():
                async with connect(uri) as ws:
                    while True:
                        msg = await _recv(ws)
                        if msg["type"] == "state" and msg["step"] >= 10:
                            return msg["robot"]

            return await asyncio.gather(driven(), idle())

    moved, parked = asyncio.run(main())
    assert moved[1] > parked[1] + 1.0
    assert math.isclose(parked[1], -5.0, abs_tol=1e-9)

"""Live teleoperation service: JSON messages over a websocket, one
session per connection.

The server owns the clock.  A fixed-rate tick loop advances the episode
whether or not the operator has said anything; the latest stick
deflection is sampled at each tick, so the wire protocol adds no
nondeterminism beyond which tick an input landed on.  Every session
records that quantization as a transcript, and ``replay_transcript``
turns a transcript back into the identical episode offline.

Wire protocol (see docs/PROTOCOL.md for the field-by-field layout):

* ``state``  server -> client, once per tick: step, robot, crowd, scene.
* ``input``  client -> server: unit-clamped stick deflection dx, dy.
* ``mode``   client -> server: fusion architecture to switch to.
* ``end``    server -> client: metric report, solo baselines, verdict.
* ``error``  server -> client: a malformed message was ignored.
"""

from __future__ import annotations

import asyncio
import contextlib
import json
import logging
import math
import time
import uuid
from dataclasses import dataclass, field

import numpy as np
from websockets.asyncio.server import serve
from websockets.exceptions import ConnectionClosed

from .config import RunConfig
from .errors import InvalidArgumentError
from .metrics import MetricReport, lower_bound_verdict, score_episode
from .scenarios import (
    DT,
    EPISODE_ARCHITECTURES,
    PLAN_SPEED,
    ROBOT_V_MAX,
    Z_LOOKAHEAD,
    Episode,
    EpisodeTrace,
    FusionSettings,
    OperatorSample,
    ScenarioSpec,
    simulate_episode,
)

log = logging.getLogger(__name__)

STALE_AFTER = 1.0        # seconds of stick silence before it reads as zero
DEFAULT_TICK_RATE = 8.0  # Hz
SEND_QUEUE_FRAMES = 8    # state frames buffered per client before dropping


# ---------------------------------------------------------------------------
# operator input -> one episode tick


def operator_from_direction(episode: Episode, direction) -> OperatorSample:
    """Turn a stick deflection into one operator sample.

    The action moves the platform along the deflection, full deflection
    meaning the speed cap.  The intent observation points down the same
    bearing at the scripted operator's lookahead distance.  A zero
    deflection is a silent tick: hold action, no intent observation.
    """
    d = np.asarray(direction, dtype=float)
    n = float(np.linalg.norm(d))
    if n > 1.0:
        d = d / n
        n = 1.0
    robot = episode.robot
    if n < 1e-9:
        return OperatorSample(None, robot.copy())
    action = robot + d * ROBOT_V_MAX * DT
    obs = robot + (d / n) * PLAN_SPEED * Z_LOOKAHEAD
    return OperatorSample(obs, action)


@dataclass
class TeleopSession:
    """One live operator episode plus its input bookkeeping.

    ``tick`` is the only place the episode mutates, so everything the
    receive side does is leave notes: the latest stick deflection and an
    optional architecture switch, both picked up at the next tick.
    """

    session_id: str
    episode: Episode
    tick_rate: float
    last_input: np.ndarray = field(default_factory=lambda: np.zeros(2))
    last_input_time: float = -math.inf
    pending_architecture: str | None = None
    min_separation: float = math.inf
    ticks: list[dict] = field(default_factory=list)

    def __post_init__(self):
        if not 5.0 <= self.tick_rate <= 60.0:
            raise InvalidArgumentError("tick_rate must lie in [5, 60] Hz")
        self.min_separation = self.episode.min_body_distance()

    @property
    def spec(self) -> ScenarioSpec:
        return self.episode.spec

    @property
    def architecture(self) -> str:
        return self.episode.architecture

    @property
    def state(self):
        return self.episode.states[-1]

    def register_input(self, dx, dy, now: float) -> None:
        v = np.array([dx, dy], dtype=float)
        if not np.all(np.isfinite(v)):
            raise InvalidArgumentError("input deflection must be finite")
        n = float(np.linalg.norm(v))
        if n > 1.0:
            v = v / n
        self.last_input = v
        self.last_input_time = now

    def request_architecture(self, name: str) -> None:
        if name not in EPISODE_ARCHITECTURES:
            raise InvalidArgumentError(f"unknown architecture {name!r}")
        self.pending_architecture = name

    def effective_input(self, now: float) -> np.ndarray:
        if now - self.last_input_time > STALE_AFTER:
            return np.zeros(2)
        return self.last_input

    def tick(self, now: float) -> str | None:
        """Advance one step with the stick state as of ``now``."""
        if self.pending_architecture is not None:
            if self.pending_architecture != self.episode.architecture:
                self.episode.set_architecture(self.pending_architecture)
            self.pending_architecture = None
        direction = self.effective_input(now)
        self.ticks.append({
            "step": self.episode.step_index,
            "dx": float(direction[0]),
            "dy": float(direction[1]),
            "architecture": self.episode.architecture,
        })
        outcome = self.episode.advance(operator_from_direction(self.episode, direction))
        self.min_separation = min(
            self.min_separation, self.episode.min_body_distance()
        )
        return outcome

    def transcript(self) -> dict:
        return {
            "session_id": self.session_id,
            "spec": self.spec.to_dict(),
            "seed": int(self.episode.seed),
            "architecture": self.ticks[0]["architecture"] if self.ticks
            else self.episode.architecture,
            "ticks": [dict(row) for row in self.ticks],
        }


def replay_transcript(
    transcript: dict,
    settings: FusionSettings = FusionSettings(),
    schedule=None,
) -> EpisodeTrace:
    """Re-run a recorded session's inputs in-process.

    Input timestamps are already quantized to ticks in the transcript, so
    the replay reproduces the live trace bit for bit.  Sessions served
    with non-default fusion settings or a configured blend schedule need
    the same ones passed here.
    """
    spec = ScenarioSpec.from_dict(transcript["spec"])
    episode = Episode(
        spec, transcript["architecture"], int(transcript["seed"]),
        schedule, settings,
    )
    for row in transcript["ticks"]:
        if row["architecture"] != episode.architecture:
            episode.set_architecture(row["architecture"])
        op = operator_from_direction(
            episode, np.array([row["dx"], row["dy"]])
        )
        if episode.advance(op) is not None:
            break
    return episode.trace()


# ---------------------------------------------------------------------------
# wire frames


def _jsonable(value):
    """Strict-JSON form of a payload: non-finite floats become null."""
    if isinstance(value, dict):
        return {k: _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, float) and not math.isfinite(value):
        return None
    return value


def _dump_frame(payload: dict) -> str:
    return json.dumps(_jsonable(payload), sort_keys=True, separators=(",", ":"))


def _scene(episode: Episode) -> dict:
    sc = episode.scenario
    return {
        "kind": sc.spec.kind,
        "arena": [float(v) for v in sc.arena],
        "start": [float(v) for v in sc.start],
        "goal": [float(v) for v in sc.goal],
        "obstacles": [[float(x), float(y)] for x, y in sc.obstacles],
    }


def state_frame(session: TeleopSession) -> str:
    ep = session.episode
    st = ep.states[-1]
    return _dump_frame({
        "type": "state",
        "session_id": session.session_id,
        "step": int(st.step),
        "robot": [float(st.robot_pos[0]), float(st.robot_pos[1])],
        "crowd": [[float(x), float(y)] for x, y in st.crowd_positions],
        "event_fired": bool(st.event_fired),
        "architecture": ep.architecture,
        "metrics": {
            "elapsed": float(st.step * DT),
            "path_length": float(sum(ep.path_increments)),
            "min_separation": float(session.min_separation),
        },
        "scene": _scene(ep),
    })


def error_frame(session_id: str, message: str) -> str:
    return _dump_frame({
        "type": "error",
        "session_id": session_id,
        "message": message,
    })


def end_frame(session: TeleopSession, config: RunConfig) -> str:
    """Score the finished episode against same-seed solo replays."""
    trace = session.episode.trace()
    report = score_episode(trace)
    baselines: dict[str, MetricReport] = {}
    for solo in ("human_only", "autonomy_only"):
        solo_trace = simulate_episode(
            trace.spec, solo, trace.seed,
            schedule=config.schedule, settings=config.settings,
        )
        baselines[solo] = score_episode(solo_trace)
    verdict = lower_bound_verdict(
        report, baselines["human_only"], baselines["autonomy_only"],
        config.sweep_tolerance,
    )
    return _dump_frame({
        "type": "end",
        "session_id": session.session_id,
        "termination": trace.termination,
        "report": report.to_dict(),
        "baselines": {k: v.to_dict() for k, v in baselines.items()},
        "verdict": verdict.to_dict(),
        "transcript": session.transcript(),
    })


def handle_client_message(session: TeleopSession, raw, now: float) -> None:
    """Apply one client message; raises InvalidArgumentError when malformed."""
    if isinstance(raw, bytes):
        try:
            raw = raw.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise InvalidArgumentError("message is not valid UTF-8") from exc
    try:
        msg = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise InvalidArgumentError(f"message is not valid JSON: {exc}") from exc
    if not isinstance(msg, dict):
        raise InvalidArgumentError("message must be a JSON object")
    kind = msg.get("type")
    if kind == "input":
        dx, dy = msg.get("dx"), msg.get("dy")
        if not all(isinstance(v, (int, float)) and not isinstance(v, bool)
                   for v in (dx, dy)):
            raise InvalidArgumentError("input dx and dy must be numbers")
        session.register_input(dx, dy, now)
    elif kind == "mode":
        name = msg.get("architecture")
        if not isinstance(name, str):
            raise InvalidArgumentError("mode architecture must be a string")
        session.request_architecture(name)
    else:
        raise InvalidArgumentError(f"unknown message type {kind!r}")


# ---------------------------------------------------------------------------
# the service


def _new_session(config: RunConfig, tick_rate: float) -> TeleopSession:
    episode = Episode(
        config.scenario, config.architectures[0], config.seeds.start,
        config.schedule, config.settings,
    )
    return TeleopSession(uuid.uuid4().hex[:12], episode, tick_rate)


async def _session_handler(websocket, config: RunConfig, tick_rate: float) -> None:
    session = _new_session(config, tick_rate)
    queue: asyncio.Queue[str | None] = asyncio.Queue(maxsize=SEND_QUEUE_FRAMES)

    def enqueue(frame: str | None) -> None:
        # drop the oldest buffered frame rather than stall the tick loop
        while True:
            try:
                queue.put_nowait(frame)
                return
            except asyncio.QueueFull:
                with contextlib.suppress(asyncio.QueueEmpty):
                    queue.get_nowait()

    async def sender() -> None:
        while True:
            frame = await queue.get()
            if frame is None:
                return
            await websocket.send(frame)

    async def receiver() -> None:
        async for raw in websocket:
            try:
                handle_client_message(session, raw, time.monotonic())
            except InvalidArgumentError as exc:
                enqueue(error_frame(session.session_id, str(exc)))

    async def ticker() -> None:
        loop = asyncio.get_running_loop()
        period = 1.0 / session.tick_rate
        enqueue(state_frame(session))
        next_due = loop.time() + period
        while session.episode.termination is None:
            await asyncio.sleep(max(0.0, next_due - loop.time()))
            # late ticks run immediately instead of bursting to catch up
            next_due = max(next_due + period, loop.time())
            await asyncio.to_thread(session.tick, time.monotonic())
            enqueue(state_frame(session))
        enqueue(await asyncio.to_thread(end_frame, session, config))
        enqueue(None)

    log.info("teleop session %s opened (%s, seed %d)",
             session.session_id, session.spec.kind, session.episode.seed)
    send_task = asyncio.create_task(sender())
    recv_task = asyncio.create_task(receiver())
    tick_task = asyncio.create_task(ticker())
    try:
        done, _ = await asyncio.wait(
            (send_task, recv_task, tick_task),
            return_when=asyncio.FIRST_COMPLETED,
        )
        if send_task in done:
            await send_task           # surfaces send errors as a disconnect
        elif recv_task in done and session.episode.termination is None:
            log.warning("teleop session %s aborted at step %d",
                        session.session_id, session.episode.step_index)
        else:
            await tick_task           # surfaces tick errors
            await asyncio.wait_for(send_task, timeout=60.0)
    except ConnectionClosed:
        log.warning("teleop session %s aborted at step %d",
                    session.session_id, session.episode.step_index)
    except asyncio.TimeoutError:
        log.warning("teleop session %s: client never drained the end frame",
                    session.session_id)
    finally:
        for task in (send_task, recv_task, tick_task):
            task.cancel()
            with contextlib.suppress(asyncio.CancelledError, ConnectionClosed):
                await task
    log.info("teleop session %s closed", session.session_id)


@contextlib.asynccontextmanager
async def open_server(
    config: RunConfig,
    port: int = 0,
    tick_rate: float = DEFAULT_TICK_RATE,
    host: str = "127.0.0.1",
):
    """Run the service on ``port`` (0 picks a free one); yields the bound port."""

    async def handler(websocket):
        await _session_handler(websocket, config, tick_rate)

    async with serve(handler, host, port) as server:
        yield server.sockets[0].getsockname()[1]


def serve_forever(
    config: RunConfig,
    port: int,
    tick_rate: float = DEFAULT_TICK_RATE,
    host: str = "127.0.0.1",
) -> None:
    """Serve live sessions until interrupted."""

    async def _main() -> None:
        async with open_server(config, port, tick_rate, host) as bound:
            log.info("teleop service listening on %s:%d", host, bound)
            await asyncio.Event().wait()

    try:
        asyncio.run(_main())
    except KeyboardInterrupt:
        pass

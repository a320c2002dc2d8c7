"""Stressor scenarios and closed-loop episode simulation.

A holonomic platform crosses a planar arena from a start to a goal while
a scripted operator steers through a noisy observation channel and other
agents (a static obstacle wall, a walking crowd) get in the way.  Each
scenario is built to break a specific fusion failure mode:

- ``bimodal_corridor``: a wall with two gaps; the operator prefers one
  side, the machine plan the other, and averaging the two channels aims
  the platform straight at the wall between them.
- ``crowd_navigation``: a sustained crossing stream; planners that treat
  crowd predictions as an immovable occupancy field stop finding safe
  headings as density rises and stall, while coupled fusion threads gaps.
- ``elevator_semantic``: a standing crowd surges toward an elevator door
  when it chimes.  The operator reacts at once; the machine plan does not
  know about doors.  Whoever listens to the operator early takes the lane
  that is about to clear.

The per-step loop is: observe the operator, refresh beliefs, fuse an
action, move the platform (through a pedestrian safety stop), advance the
crowd, then check termination.  Every random draw comes from streams
derived from the episode seed, so traces are bit-reproducible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .beliefs import (
    AgentSet,
    GaussianTrajectoryBelief,
    KernelSpec,
    MixtureTrajectoryBelief,
    ObservationSet,
    TimeGrid,
    Trajectory,
    mixture_posterior,
    static_belief,
)
from .errors import InvalidArgumentError, PlacementError
from .fusion import (
    BlendSchedule,
    FusionDecision,
    InteractionParams,
    irt_fuse,
    irt_joint_posterior,
    linear_blend,
)

# platform and world constants
ROBOT_V_MAX = 1.5          # m/s, holonomic
DT = 0.25                  # s per step
Z_LOOKAHEAD = 3.5 * DT     # s; how far ahead the operator channel points
PLAN_SPEED = 1.2 * ROBOT_V_MAX  # optimistic planning pace; execution clamps
COLLISION_RADIUS = 0.4     # m, platform vs any other body
GOAL_RADIUS = 0.5          # m
FREEZE_EPSILON = 0.2       # m of path over the freeze window
FREEZE_WINDOW = 28         # steps; 7 seconds without net motion counts as frozen
CROWD_V_MAX = 1.2          # m/s, walking agents
CRUISE_FRACTION = 0.9      # channels plan below the hard speed cap
GUARD_RADIUS = 0.72        # m, pedestrian safety stop standoff

SCENARIO_KINDS = ("bimodal_corridor", "crowd_navigation", "elevator_semantic")
EPISODE_ARCHITECTURES = (
    "human_only", "autonomy_only", "linear", "switching", "irt", "irt_decoupled",
)
TERMINATIONS = ("reached_goal", "collision", "frozen", "timeout")

# crowd dynamics coefficients (social-force style)
_SOC_STRENGTH = 1.8
_SOC_RANGE = 0.35
_SOC_PERSONAL = 0.6
_SOC_BIAS = 0.25           # right-hand bias breaking head-on symmetry
_ROBOT_STRENGTH = 2.2
_ROBOT_STANDOFF = 0.7


@dataclass(frozen=True)
class ScenarioSpec:
    """Scenario kind plus its stressor dials."""

    kind: str
    crowd_density: float = 0.0
    crowd_cooperation: float = 0.6
    operator_fidelity_sigma: float = 0.1
    operator_noise_std: float = 0.05
    autonomy_reliability: float = 1.0
    semantic_event_step: int | None = None
    max_steps: int = 120

    def __post_init__(self):
        if self.kind not in SCENARIO_KINDS:
            raise InvalidArgumentError(f"unknown scenario kind {self.kind!r}")
        if self.crowd_density < 0:
            raise InvalidArgumentError("crowd_density must be nonnegative")
        if not (0.0 <= self.crowd_cooperation <= 1.0):
            raise InvalidArgumentError("crowd_cooperation must lie in [0, 1]")
        if self.operator_fidelity_sigma < 0 or self.operator_noise_std < 0:
            raise InvalidArgumentError("operator noise scales must be nonnegative")
        if not (0.0 <= self.autonomy_reliability <= 1.0):
            raise InvalidArgumentError("autonomy_reliability must lie in [0, 1]")
        if self.semantic_event_step is not None and self.semantic_event_step < 0:
            raise InvalidArgumentError("semantic_event_step must be nonnegative")
        if self.max_steps < 1:
            raise InvalidArgumentError("max_steps must be positive")

    @staticmethod
    def corridor(**overrides) -> "ScenarioSpec":
        return ScenarioSpec(kind="bimodal_corridor", **overrides)

    @staticmethod
    def crowd(**overrides) -> "ScenarioSpec":
        overrides.setdefault("crowd_density", 0.5)
        overrides.setdefault("crowd_cooperation", 0.45)
        overrides.setdefault("max_steps", 150)
        return ScenarioSpec(kind="crowd_navigation", **overrides)

    @staticmethod
    def elevator(**overrides) -> "ScenarioSpec":
        overrides.setdefault("crowd_density", 0.5)
        overrides.setdefault("semantic_event_step", 12)
        overrides.setdefault("max_steps", 170)
        return ScenarioSpec(kind="elevator_semantic", **overrides)

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "crowd_density": self.crowd_density,
            "crowd_cooperation": self.crowd_cooperation,
            "operator_fidelity_sigma": self.operator_fidelity_sigma,
            "operator_noise_std": self.operator_noise_std,
            "autonomy_reliability": self.autonomy_reliability,
            "semantic_event_step": self.semantic_event_step,
            "max_steps": self.max_steps,
        }

    @staticmethod
    def from_dict(d: dict) -> "ScenarioSpec":
        return ScenarioSpec(**d)


@dataclass(frozen=True)
class FusionSettings:
    """Knobs for the joint-posterior fusers inside episodes."""

    ensemble_count: int = 600
    horizon_steps: int = 16
    safety_radius: float = 0.9
    repulsion_strength: float = 0.96
    cohesion_strength: float = 0.5
    machine_length_scale: float = 3.0
    machine_signal_variance: float = 1.0
    machine_anchor_noise: float | None = None  # per-kind default when None
    crowd_length_scale: float = 1.2
    crowd_signal_variance: float = 0.6
    include_radius: float = 5.0
    max_env_agents: int = 8

    def __post_init__(self):
        if self.ensemble_count < 1 or self.horizon_steps < 2:
            raise InvalidArgumentError("ensemble_count and horizon_steps must be positive")

    def params(self, decoupled: bool) -> InteractionParams:
        if decoupled:
            return InteractionParams(
                safety_radius=self.safety_radius,
                repulsion_strength=0.0,
                cohesion_strength=0.0,
            )
        return InteractionParams(
            safety_radius=self.safety_radius,
            repulsion_strength=self.repulsion_strength,
            cohesion_strength=self.cohesion_strength,
        )


@dataclass(frozen=True)
class WorldState:
    """Observable world snapshot after a step (or the initial one)."""

    step: int
    robot_pos: np.ndarray
    crowd_positions: np.ndarray
    event_fired: bool = False
    human_obs: np.ndarray | None = None

    def __post_init__(self):
        r = np.asarray(self.robot_pos, dtype=float)
        if r.shape != (2,) or not np.all(np.isfinite(r)):
            raise InvalidArgumentError("robot_pos must be a finite 2-vector")
        c = np.asarray(self.crowd_positions, dtype=float).reshape(-1, 2)
        if c.size and not np.all(np.isfinite(c)):
            raise InvalidArgumentError("crowd_positions must be finite")
        if self.step < 0:
            raise InvalidArgumentError("step must be nonnegative")
        for name, arr in (("robot_pos", r), ("crowd_positions", c)):
            arr = arr.copy()
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        if self.human_obs is not None:
            h = np.asarray(self.human_obs, dtype=float)
            h = h.copy()
            h.setflags(write=False)
            object.__setattr__(self, "human_obs", h)


@dataclass(frozen=True)
class Scenario:
    """Built scenario geometry plus the seed-dependent initial crowd."""

    spec: ScenarioSpec
    start: np.ndarray
    goal: np.ndarray
    arena: tuple[float, float, float, float]
    obstacles: np.ndarray
    human_routes: tuple[tuple[np.ndarray, ...], ...]
    machine_routes: tuple[tuple[np.ndarray, ...], ...]
    crowd_init: np.ndarray
    crowd_goals_init: np.ndarray
    door: np.ndarray | None = None
    respawn_slots: np.ndarray | None = None


@dataclass(frozen=True)
class EpisodeTrace:
    """Everything one episode produced, in decision order."""

    spec: ScenarioSpec
    architecture: str
    seed: int
    states: tuple[WorldState, ...]
    decisions: tuple[FusionDecision, ...]
    termination: str

    def __post_init__(self):
        if self.architecture not in EPISODE_ARCHITECTURES:
            raise InvalidArgumentError(f"unknown architecture {self.architecture!r}")
        if self.termination not in TERMINATIONS:
            raise InvalidArgumentError(f"unknown termination {self.termination!r}")
        if len(self.states) != len(self.decisions) + 1:
            raise InvalidArgumentError("states must outnumber decisions by one")

    def robot_path(self) -> np.ndarray:
        return np.stack([s.robot_pos for s in self.states])


# ---------------------------------------------------------------------------
# scenario construction


def _place_points(rng, box, count, min_sep=0.55):
    """Dart-throwing placement with a minimum separation."""
    xmin, ymin, xmax, ymax = box
    pts: list[np.ndarray] = []
    tries = 0
    limit = max(400, 400 * count)
    while len(pts) < count and tries < limit:
        cand = rng.uniform((xmin, ymin), (xmax, ymax))
        if all(np.linalg.norm(cand - p) >= min_sep for p in pts):
            pts.append(cand)
        tries += 1
    if len(pts) < count:
        raise PlacementError(
            f"could not place {count} agents at separation {min_sep} in {box}"
        )
    return np.array(pts).reshape(count, 2)


def _corridor_wall() -> np.ndarray:
    xs = np.arange(-1.75, 1.75 + 1e-9, 0.35)
    return np.column_stack([xs, np.zeros_like(xs)])


def build_scenario(spec: ScenarioSpec, seed: int) -> Scenario:
    """Instantiate geometry, routes, and the initial crowd for a seed.

    The crowd layout is the only seed-dependent part; routes and obstacles
    are fixed per kind.
    """
    rng = np.random.default_rng(np.random.SeedSequence((seed, 11)))
    arena = (-4.0, -6.0, 4.0, 6.0)
    start = np.array([0.0, -5.0])
    goal = np.array([0.0, 5.0])

    if spec.kind == "bimodal_corridor":
        left = (np.array([-2.7, 0.0]), goal)
        right = (np.array([2.7, 0.0]), goal)
        obstacles = _corridor_wall()
        crowd_count = round(spec.crowd_density * 23.8)
        if crowd_count:
            crowd = _place_points(rng, (-3.4, 1.0, 3.4, 4.4), crowd_count)
            goals = _crossing_goals(crowd, arena)
        else:
            crowd = np.empty((0, 2))
            goals = np.empty((0, 2))
        return Scenario(
            spec, start, goal, arena, obstacles,
            human_routes=(left, right), machine_routes=(left, right),
            crowd_init=crowd, crowd_goals_init=goals,
        )

    if spec.kind == "crowd_navigation":
        direct = (goal,)
        # the hook dips under the stream's evaporation line and climbs the
        # open left field; only a planner that understands the crowd as
        # moving bodies can tell this is the clear option
        hook = (np.array([-3.5, -2.9]), np.array([-3.5, 2.8]), goal)
        crowd_count = round(spec.crowd_density * 40.0)
        if crowd_count:
            # a diagonal stream from the upper-right spawn zone, flowing
            # down-left across the direct lane; agents leave the floor at
            # the evaporation line and teleport back to their own slot, so
            # the crossing never drains and the left field stays open
            slots = _place_points(rng, (2.0, 3.3, 3.9, 5.7), crowd_count, min_sep=0.32)
            flow = np.array([-4.6, -9.0])
            goals = slots + flow
            # the exit fan stays right of the hook's vertical leg, and every
            # goal sits below the evaporation line so nobody decelerates
            # into a lingering cluster before vanishing
            goals[:, 0] = np.clip(goals[:, 0], -2.6, 3.7)
            goals[:, 1] = np.clip(goals[:, 1], -5.6, -3.4)
            # stagger starting progress along the flow so the band is
            # already established at episode start
            frac = rng.uniform(0.0, 1.0, size=crowd_count)
            crowd = slots + frac[:, None] * (goals - slots)
        else:
            slots = np.empty((0, 2))
            crowd = np.empty((0, 2))
            goals = np.empty((0, 2))
        return Scenario(
            spec, start, goal, arena, np.empty((0, 2)),
            human_routes=(hook,), machine_routes=(direct, hook),
            crowd_init=crowd, crowd_goals_init=goals,
            respawn_slots=slots,
        )

    # elevator_semantic
    door = np.array([3.1, 4.3])
    left = (np.array([-2.3, 0.8]), np.array([-2.0, 3.6]), goal)
    right = (np.array([2.3, 0.5]), np.array([2.3, 3.0]), goal)
    crowd_count = max(4, round(spec.crowd_density * 16.0))
    crowd = _place_points(rng, (-2.2, 0.2, 0.6, 2.8), crowd_count)
    return Scenario(
        spec, start, goal, arena, np.empty((0, 2)),
        human_routes=(left, right), machine_routes=(left, right),
        crowd_init=crowd, crowd_goals_init=crowd.copy(),  # standing until the chime
        door=door,
    )


def _crossing_goals(crowd: np.ndarray, arena) -> np.ndarray:
    """Send each agent to the opposite side of the arena at its own height."""
    xmin, _, xmax, _ = arena
    goals = crowd.copy()
    going_right = crowd[:, 0] < 0
    goals[going_right, 0] = xmax - 0.4
    goals[~going_right, 0] = xmin + 0.4
    return goals


def _door_queue_goal(door: np.ndarray, index: int) -> np.ndarray:
    """Deterministic bunching point near the door for agent ``index``."""
    angle = 2.399963 * index  # golden angle keeps offsets spread out
    radius = 0.25 + 0.11 * math.sqrt(index)
    return door + radius * np.array([math.cos(angle), math.sin(angle)])


# ---------------------------------------------------------------------------
# crowd dynamics


def crowd_step(
    positions: np.ndarray,
    velocities: np.ndarray,
    goals: np.ndarray,
    robot_pos: np.ndarray,
    cooperation: float = 0.6,
    arena=( -4.0, -6.0, 4.0, 6.0),
) -> tuple[np.ndarray, np.ndarray]:
    """One deterministic step of goal-seeking agents with social repulsion.

    Head-on pairs break symmetry through a fixed right-hand bias rather
    than through randomness.  ``cooperation`` scales how strongly agents
    yield to the platform; zero makes them ignore it entirely.
    """
    k = positions.shape[0]
    if k == 0:
        return positions.copy(), velocities.copy()
    to_goal = goals - positions
    dist_goal = np.linalg.norm(to_goal, axis=1, keepdims=True)
    desired = np.where(
        dist_goal > 1e-9,
        CROWD_V_MAX * to_goal / np.maximum(dist_goal, 1e-9),
        0.0,
    )
    # slow smoothly into the goal
    desired *= np.minimum(1.0, dist_goal / 0.8)

    force = np.zeros_like(positions)
    if k > 1:
        diff = positions[:, None, :] - positions[None, :, :]
        d = np.linalg.norm(diff, axis=2)
        np.fill_diagonal(d, np.inf)
        mag = _SOC_STRENGTH * np.exp((_SOC_PERSONAL - d) / _SOC_RANGE)
        mag[d > 2.5] = 0.0
        unit = diff / np.maximum(d, 1e-9)[:, :, None]
        push = mag[:, :, None] * unit
        # right-hand bias: rotate a fraction of each push clockwise
        perp = np.stack([push[:, :, 1], -push[:, :, 0]], axis=2)
        force += (push + _SOC_BIAS * perp).sum(axis=1)

    rdiff = positions - robot_pos[None, :]
    rd = np.linalg.norm(rdiff, axis=1)
    rmag = cooperation * _ROBOT_STRENGTH * np.exp((_ROBOT_STANDOFF - rd) / _SOC_RANGE)
    rmag[rd > 2.5] = 0.0
    # hard core: uncooperative agents refuse to yield early, but nobody
    # walks straight through a platform at arm's length
    core = 2.5 * np.exp((0.42 - rd) / 0.12)
    core[rd > 0.9] = 0.0
    force += (rmag + core)[:, None] * rdiff / np.maximum(rd, 1e-9)[:, None]

    vel = desired + force
    speed = np.linalg.norm(vel, axis=1, keepdims=True)
    vel = np.where(speed > CROWD_V_MAX, vel * (CROWD_V_MAX / np.maximum(speed, 1e-9)), vel)
    new_pos = positions + vel * DT
    xmin, ymin, xmax, ymax = arena
    new_pos[:, 0] = np.clip(new_pos[:, 0], xmin + 0.2, xmax - 0.2)
    new_pos[:, 1] = np.clip(new_pos[:, 1], ymin + 0.2, ymax - 0.2)
    return new_pos, (new_pos - positions) / DT


# ---------------------------------------------------------------------------
# routes and channel actions


def _route_target(route: tuple[np.ndarray, ...], pos: np.ndarray) -> np.ndarray:
    """First waypoint still ahead (routes are monotone in y), else the last."""
    for wp in route:
        if wp[1] > pos[1] + 0.2:
            return wp
    return route[-1]


def _advance(pos: np.ndarray, target: np.ndarray, speed: float) -> np.ndarray:
    step = speed * DT
    d = np.linalg.norm(target - pos)
    if d <= step:
        return target.copy()
    return pos + (target - pos) * (step / d)


def _route_polyline(route, pos) -> np.ndarray:
    """Remaining route as a polyline starting at the current position."""
    pts = [np.asarray(pos, dtype=float)]
    started = False
    for wp in route:
        if started or wp[1] > pos[1] + 0.2:
            pts.append(np.asarray(wp, dtype=float))
            started = True
    if len(pts) == 1:
        pts.append(np.asarray(route[-1], dtype=float))
    return np.stack(pts)


def _point_along(polyline: np.ndarray, distance: float) -> np.ndarray:
    """Point at arc-length ``distance`` along the polyline (clamped to end)."""
    remaining = distance
    for a, b in zip(polyline[:-1], polyline[1:]):
        seg = np.linalg.norm(b - a)
        if seg >= remaining:
            if seg < 1e-12:
                return b.copy()
            return a + (b - a) * (remaining / seg)
        remaining -= seg
    return polyline[-1].copy()


# ---------------------------------------------------------------------------
# the scripted operator


@dataclass(frozen=True)
class OperatorSample:
    """One tick of operator behavior: a noisy observation plus an action."""

    observation: np.ndarray | None
    action: np.ndarray


def simulated_operator(
    scenario: Scenario,
    robot_pos: np.ndarray,
    event_fired: bool,
    rng: np.random.Generator,
    noise_std: float | None = None,
) -> OperatorSample:
    """Scripted operator: follow the privileged route, report it noisily.

    In the corridor the operator always takes the left gap.  In the
    elevator lobby the operator mirrors the machine's right-lane plan until
    the chime, then switches to the left lane.  In the crowd crossing the
    operator can see that the stream never reaches the lower-left field,
    so the route swings wide around the band instead of wading in.

    The action is the next-step steering command.  The observation points
    ``Z_LOOKAHEAD`` seconds down the intended route, the way a joystick
    deflection shows where the operator wants the platform rather than the
    millimeters of the next step; that keeps the candidate-intent modes
    well separated at the observation time.  Noise of scale
    ``operator_noise_std`` corrupts it (zero noise puts it exactly on the
    intent path).
    """
    spec = scenario.spec
    if spec.kind == "bimodal_corridor":
        route = scenario.human_routes[0]       # left gap
    elif spec.kind == "elevator_semantic":
        route = scenario.human_routes[0] if event_fired else scenario.human_routes[1]
    else:
        route = scenario.human_routes[0]       # straight for the goal
    target = _route_target(route, robot_pos)
    action = _advance(robot_pos, target, CRUISE_FRACTION * ROBOT_V_MAX)
    poly = _route_polyline(route, robot_pos)
    intent = _point_along(poly, PLAN_SPEED * Z_LOOKAHEAD)
    std = spec.operator_noise_std if noise_std is None else noise_std
    obs = intent + std * rng.standard_normal(2) if std > 0 else intent
    return OperatorSample(obs, action)


# ---------------------------------------------------------------------------
# the autonomy channel


def _autonomy_route(scenario: Scenario, unreliable: bool) -> tuple[np.ndarray, ...]:
    if unreliable:
        return (np.array([3.4, -4.6]),)        # confidently wrong goal estimate
    if scenario.spec.kind == "bimodal_corridor":
        return scenario.machine_routes[1]      # right gap
    if scenario.spec.kind == "elevator_semantic":
        return scenario.machine_routes[1]      # right lane
    return scenario.machine_routes[0]


_HEADING_OFFSETS = (0.0, 0.44, -0.44, 0.87, -0.87, 1.4, -1.4)
_PLAN_LOOKAHEAD = 8
_PLAN_MARGIN = 0.7
_PLAN_GROWTH = 0.35        # m/s of predicted position uncertainty


def autonomy_planner(
    scenario: Scenario,
    robot_pos: np.ndarray,
    crowd_positions: np.ndarray,
    crowd_velocities: np.ndarray,
    unreliable: bool = False,
) -> np.ndarray:
    """Standalone machine action: route following with predict-then-avoid.

    Static geometry is handled by the route itself (the planned lanes keep
    clear of the wall), so the reactive layer only reasons about moving
    agents: each is extrapolated at constant velocity with a growing
    uncertainty radius, and a candidate heading is safe only if the whole
    lookahead stays clear of every inflated disc.  When nothing is safe
    the planner holds position, which is exactly the behavior that turns
    into a stall as density rises.
    """
    route = _autonomy_route(scenario, unreliable)
    target = _route_target(route, robot_pos)
    to_target = target - robot_pos
    dist = np.linalg.norm(to_target)
    if dist < 1e-9:
        return robot_pos.copy()
    base = math.atan2(to_target[1], to_target[0])
    speed = CRUISE_FRACTION * ROBOT_V_MAX

    for off in _HEADING_OFFSETS:
        heading = np.array([math.cos(base + off), math.sin(base + off)])
        if _heading_clear(robot_pos, heading, speed, crowd_positions, crowd_velocities):
            step = min(speed * DT, dist if off == 0.0 else speed * DT)
            return robot_pos + heading * step
    return robot_pos.copy()


def _heading_clear(pos, heading, speed, crowd_pos, crowd_vel) -> bool:
    if crowd_pos.shape[0] == 0:
        return True
    for tau in range(1, _PLAN_LOOKAHEAD + 1):
        p = pos + heading * speed * DT * tau
        pred = crowd_pos + crowd_vel * (DT * tau)
        inflate = _PLAN_MARGIN + _PLAN_GROWTH * DT * tau
        d = np.linalg.norm(pred - p[None, :], axis=1)
        if d.min() < inflate:
            return False
    return True


# ---------------------------------------------------------------------------
# belief construction for the joint fusers


def _machine_component(
    route, robot_pos, grid: TimeGrid, settings: FusionSettings,
    anchor_noise: float = 0.18,
) -> GaussianTrajectoryBelief:
    """Route-following plan as a GP pinned to dense ETA anchors.

    A zero-mean prior sags toward the origin between sparse anchors, which
    reads as a phantom detour at position scales of several meters, so the
    anchors sit every other grid step with slowly growing noise.  The
    anchor noise doubles as the lateral freedom the sampler gets when the
    fusers look for a way through traffic.
    """
    kernel = KernelSpec(settings.machine_length_scale, settings.machine_signal_variance)
    poly = _route_polyline(route, robot_pos)
    speed = PLAN_SPEED
    steps = np.arange(2, grid.horizon_steps, 2)
    times = np.concatenate([[grid.t0], grid.t0 + steps * grid.dt])
    points = [robot_pos] + [
        _point_along(poly, speed * (t - grid.t0)) for t in times[1:]
    ]
    noises = np.concatenate([[0.05], anchor_noise + 0.02 * np.arange(len(steps))])
    end = _point_along(poly, speed * (grid.t_end - grid.t0))
    obs = ObservationSet(times, np.stack(points), noises)
    from .beliefs import gp_posterior

    return gp_posterior(kernel, obs, grid, goal=end, goal_noise_std=max(0.25, anchor_noise))


def _human_component(
    route, robot_pos, window: ObservationSet, grid: TimeGrid,
    settings: FusionSettings,
) -> GaussianTrajectoryBelief:
    """Candidate intent path: route anchors plus the observation window."""
    kernel = KernelSpec(settings.machine_length_scale, settings.machine_signal_variance)
    poly = _route_polyline(route, robot_pos)
    speed = PLAN_SPEED
    steps = np.arange(2, grid.horizon_steps, 2)
    times = grid.t0 + steps * grid.dt
    points = np.stack([_point_along(poly, speed * (t - grid.t0)) for t in times])
    anchors = ObservationSet(times, points, np.full(len(steps), 0.5))
    obs = window.merged_with(anchors) if len(window) else anchors
    end = _point_along(poly, speed * (grid.t_end - grid.t0))
    from .beliefs import gp_posterior

    return gp_posterior(kernel, obs, grid, goal=end, goal_noise_std=0.5)


def _crowd_belief(
    history: list[np.ndarray], grid: TimeGrid, settings: FusionSettings, arena
) -> GaussianTrajectoryBelief:
    """Short-window GP on an agent's track with constant-velocity anchors."""
    kernel = KernelSpec(settings.crowd_length_scale, settings.crowd_signal_variance)
    pts = history[-5:]
    n = len(pts)
    t_now = grid.t0
    past_times = t_now - DT * np.arange(n - 1, -1, -1)
    vel = (pts[-1] - pts[-2]) / DT if n > 1 else np.zeros(2)
    xmin, ymin, xmax, ymax = arena

    def clamped(p):
        return np.array([
            min(max(p[0], xmin + 0.2), xmax - 0.2),
            min(max(p[1], ymin + 0.2), ymax - 0.2),
        ])

    steps = np.arange(2, grid.horizon_steps, 2)
    ahead_times = t_now + steps * grid.dt
    ahead = np.stack([clamped(pts[-1] + vel * (t - t_now)) for t in ahead_times])
    ahead_noise = 0.3 + 0.4 * (ahead_times - t_now)
    obs = ObservationSet(
        np.concatenate([past_times, ahead_times]),
        np.concatenate([np.stack(pts), ahead]),
        np.concatenate([np.full(n, 0.05), ahead_noise]),
    )
    anchor = clamped(pts[-1] + vel * (grid.t_end - t_now))
    from .beliefs import gp_posterior

    return gp_posterior(kernel, obs, grid, goal=anchor, goal_noise_std=1.0)


# ---------------------------------------------------------------------------
# episode engine


def _pedestrian_guard(robot_pos, proposed, crowd_positions, crowd_velocities=None) -> np.ndarray:
    """Shrink the commanded step so it ends outside the standoff radius.

    Clearance is checked against both the current crowd and a one-step
    velocity extrapolation, so the platform will not lunge into a spot a
    walker is about to occupy.  The guard only ever shortens the commanded
    motion; when someone is transiting the standoff disc the platform
    holds position and lets the hard-core term in the crowd dynamics carry
    people around it.  A controller whose commands keep pointing into
    occupied space therefore parks until the stream happens to clear.
    """
    if crowd_positions.shape[0] == 0:
        return proposed
    blockers = crowd_positions
    if crowd_velocities is not None and crowd_velocities.size:
        blockers = np.vstack([
            crowd_positions,
            crowd_positions + DT * crowd_velocities,
            crowd_positions + 2.0 * DT * crowd_velocities,
        ])
    for lam in (1.0, 0.75, 0.5, 0.25):
        cand = robot_pos + lam * (proposed - robot_pos)
        d = np.linalg.norm(blockers - cand[None, :], axis=1)
        if d.min() >= GUARD_RADIUS:
            return cand
    return robot_pos.copy()


def _clamp_step(robot_pos, proposed) -> np.ndarray:
    move = proposed - robot_pos
    norm = np.linalg.norm(move)
    cap = ROBOT_V_MAX * DT
    if norm > cap:
        return robot_pos + move * (cap / norm)
    return proposed


class Episode:
    """Mutable episode state, played one tick at a time.

    ``run`` drives it to termination with the scripted operator;  a live
    session can call ``advance`` directly with its own operator samples
    and read the partial ``trace`` whenever it likes.
    """

    def __init__(self, spec, architecture, seed, schedule=None, settings=None):
        if architecture not in EPISODE_ARCHITECTURES:
            raise InvalidArgumentError(f"unknown architecture {architecture!r}")
        self.spec = spec
        self.architecture = architecture
        self.seed = seed
        self.settings = FusionSettings() if settings is None else settings
        self._default_schedule = schedule is None
        if schedule is None:
            schedule = (
                BlendSchedule.handoff()
                if architecture == "switching"
                else BlendSchedule.constant(0.5)
            )
        self.schedule = schedule

        self.scenario = build_scenario(spec, seed)
        self.rng_op = np.random.default_rng(np.random.SeedSequence((seed, 2)))
        self.rng_fusion = np.random.default_rng(np.random.SeedSequence((seed, 3)))
        rng_rel = np.random.default_rng(np.random.SeedSequence((seed, 4)))
        self.unreliable = rng_rel.random() > spec.autonomy_reliability

        self.robot = self.scenario.start.copy()
        self.crowd = self.scenario.crowd_init.copy()
        self.crowd_goals = self.scenario.crowd_goals_init.copy()
        self.crowd_vel = np.zeros_like(self.crowd)
        self.crowd_history: list[list[np.ndarray]] = [
            [p.copy()] for p in self.crowd
        ]
        self.event_fired = False
        self.obs_window: list[tuple[float, np.ndarray]] = []
        self.path_increments: list[float] = []

        self.sigma_eff = max(
            0.02,
            math.hypot(spec.operator_noise_std, spec.operator_fidelity_sigma),
        )

        self.states: list[WorldState] = [
            WorldState(0, self.robot, self.crowd, False, None)
        ]
        self.decisions: list[FusionDecision] = []
        self.termination: str | None = None
        self.step_index = 0

    def set_architecture(self, architecture: str) -> None:
        """Hot-switch the fusion architecture between ticks."""
        if architecture not in EPISODE_ARCHITECTURES:
            raise InvalidArgumentError(f"unknown architecture {architecture!r}")
        self.architecture = architecture
        if self._default_schedule:
            self.schedule = (
                BlendSchedule.handoff()
                if architecture == "switching"
                else BlendSchedule.constant(0.5)
            )

    # -- belief plumbing ---------------------------------------------------

    def _window_set(self, upto_time: float) -> ObservationSet:
        kept = [(t, z) for t, z in self.obs_window if t < upto_time][-6:]
        if not kept:
            return ObservationSet.empty()
        return ObservationSet(
            np.array([t for t, _ in kept]),
            np.stack([z for _, z in kept]),
            np.full(len(kept), self.sigma_eff),
        )

    def _human_mixture(self, grid: TimeGrid, z_time: float, z: np.ndarray):
        """Score candidate intents over a short window of recent reports.

        Weights are rebuilt from scratch each step from the last few intent
        observations, so the belief has bounded memory: when the operator
        changes their mind mid-episode the stale consensus ages out of the
        window within a couple of seconds instead of having to be outvoted
        observation by observation.
        """
        comps = tuple(
            _human_component(route, self.robot, ObservationSet.empty(), grid, self.settings)
            for route in self.scenario.human_routes
        )
        prior = MixtureTrajectoryBelief(
            np.full(len(comps), 1.0 / len(comps)), comps
        )
        window = self._window_set(upto_time=z_time)
        times = np.append(window.times, z_time)
        values = np.vstack([window.values, z[None, :]]) if len(window) else z[None, :]
        increment = ObservationSet(times, values, np.full(times.shape[0], self.sigma_eff))
        return mixture_posterior(prior, increment)

    def _prior_mixture(self, grid: TimeGrid):
        """Human belief for ticks with no operator report at all.

        Without any report the intent hypotheses fall back to the map's
        own candidate routes under a uniform prior, so the fused decision
        leans on the machine and environment channels alone.
        """
        comps = tuple(
            _human_component(route, self.robot, ObservationSet.empty(), grid, self.settings)
            for route in self.scenario.machine_routes
        )
        return MixtureTrajectoryBelief(
            np.full(len(comps), 1.0 / len(comps)), comps
        )

    def _machine_mixture(self, grid: TimeGrid):
        if self.unreliable:
            routes = (_autonomy_route(self.scenario, True),)
        else:
            routes = self.scenario.machine_routes
        base = self.settings.machine_anchor_noise
        if base is None:
            base = 0.18
        noises = [base] * len(routes)
        if self.spec.kind == "crowd_navigation" and len(routes) > 1:
            # the planner trusts its nominal straight-line plan; the wide
            # detour rides along as a loose alternate, so picking it takes
            # evidence from the coupling terms rather than raw density
            noises = [0.15] + [0.45] * (len(routes) - 1)
        comps = tuple(
            _machine_component(route, self.robot, grid, self.settings, nz)
            for route, nz in zip(routes, noises)
        )
        w = np.full(len(comps), 1.0 / len(comps))
        return MixtureTrajectoryBelief(w, comps)

    def _environment_beliefs(self, grid: TimeGrid):
        beliefs = []
        if self.scenario.obstacles.size:
            d = np.linalg.norm(self.scenario.obstacles - self.robot[None, :], axis=1)
            for idx in np.flatnonzero(d < 3.5):
                beliefs.append(static_belief(grid, self.scenario.obstacles[idx]))
        if self.crowd.shape[0]:
            d = np.linalg.norm(self.crowd - self.robot[None, :], axis=1)
            order = np.argsort(d, kind="stable")
            near = [i for i in order if d[i] < self.settings.include_radius]
            for idx in near[: self.settings.max_env_agents]:
                beliefs.append(
                    _crowd_belief(
                        self.crowd_history[idx], grid, self.settings,
                        self.scenario.arena,
                    )
                )
        return tuple(beliefs)

    # -- per-step action selection ------------------------------------------

    def _fused_action(self, step: int, op: OperatorSample) -> FusionDecision:
        arch = self.architecture
        if arch == "human_only":
            return FusionDecision(op.action, "human_only")
        if arch == "autonomy_only":
            action = autonomy_planner(
                self.scenario, self.robot, self.crowd, self.crowd_vel,
                unreliable=self.unreliable,
            )
            return FusionDecision(action, "autonomy_only")
        if arch in ("linear", "switching"):
            u_r = autonomy_planner(
                self.scenario, self.robot, self.crowd, self.crowd_vel,
                unreliable=self.unreliable,
            )
            return linear_blend(op.action, u_r, self.schedule, step)

        # joint-posterior architectures
        grid = TimeGrid(step * DT, DT, self.settings.horizon_steps)
        z_time = step * DT + Z_LOOKAHEAD
        if op.observation is None:
            human = self._prior_mixture(grid)
        else:
            human = self._human_mixture(grid, z_time, op.observation)
        machines = self._machine_mixture(grid)
        agents = AgentSet((machines,), self._environment_beliefs(grid))
        params = self.settings.params(decoupled=(arch == "irt_decoupled"))
        fusion_seed = int(self.rng_fusion.integers(2**63))
        ensemble = irt_joint_posterior(
            human, agents, params, count=self.settings.ensemble_count,
            seed=fusion_seed,
        )
        decision = irt_fuse(ensemble, human, agents)
        if op.observation is not None:
            self.obs_window.append((z_time, op.observation))
        return decision

    # -- world stepping ------------------------------------------------------

    def _fire_event_if_due(self, step: int):
        ev = self.spec.semantic_event_step
        if ev is not None and not self.event_fired and step >= ev:
            self.event_fired = True
            if self.spec.kind == "elevator_semantic" and self.scenario.door is not None:
                self.crowd_goals = np.stack([
                    _door_queue_goal(self.scenario.door, i)
                    for i in range(self.crowd.shape[0])
                ]) if self.crowd.shape[0] else self.crowd_goals

    def _recycle_crowd_goals(self):
        """Keep the stream flowing; queued elevator agents stand."""
        if self.crowd.shape[0] == 0:
            return
        if self.spec.kind == "elevator_semantic":
            return
        arrived = np.linalg.norm(self.crowd - self.crowd_goals, axis=1) < 0.6
        if self.spec.kind == "crowd_navigation":
            # agents also leave the floor at the evaporation line, which
            # keeps the stream's tail out of the lower-left field
            arrived |= self.crowd[:, 1] < -2.5
        if not arrived.any():
            return
        if self.scenario.respawn_slots is not None and self.scenario.respawn_slots.size:
            # teleport finished agents back to their own spawn slot (far
            # from both start and goal) and restart their track history
            for i in np.flatnonzero(arrived):
                self.crowd[i] = self.scenario.respawn_slots[i]
                self.crowd_vel[i] = 0.0
                self.crowd_history[i] = [self.crowd[i].copy()]
        else:
            flipped = self.crowd_goals.copy()
            xmin, _, xmax, _ = self.scenario.arena
            left_side = self.crowd_goals[:, 0] < 0
            flipped[arrived & left_side, 0] = xmax - 0.4
            flipped[arrived & ~left_side, 0] = xmin + 0.4
            flipped[arrived, 1] = self.crowd[arrived, 1]
            self.crowd_goals = flipped

    def min_body_distance(self) -> float:
        d = math.inf
        if self.scenario.obstacles.size:
            d = min(d, float(np.linalg.norm(
                self.scenario.obstacles - self.robot[None, :], axis=1
            ).min()))
        if self.crowd.shape[0]:
            d = min(d, float(np.linalg.norm(
                self.crowd - self.robot[None, :], axis=1
            ).min()))
        return d

    def _termination(self, step: int) -> str | None:
        if self.min_body_distance() < COLLISION_RADIUS:
            return "collision"
        if np.linalg.norm(self.robot - self.scenario.goal) <= GOAL_RADIUS:
            return "reached_goal"
        if (
            len(self.path_increments) >= FREEZE_WINDOW
            and sum(self.path_increments[-FREEZE_WINDOW:]) < FREEZE_EPSILON
        ):
            return "frozen"
        if step + 1 >= self.spec.max_steps:
            return "timeout"
        return None

    def advance(self, op: OperatorSample) -> str | None:
        """Play one tick driven by ``op``; returns the termination, if any."""
        if self.termination is not None:
            raise InvalidArgumentError("episode already finished")
        step = self.step_index
        self._fire_event_if_due(step)
        decision = self._fused_action(step, op)
        proposed = _clamp_step(self.robot, decision.action)
        executed = _pedestrian_guard(self.robot, proposed, self.crowd, self.crowd_vel)
        xmin, ymin, xmax, ymax = self.scenario.arena
        executed = np.array([
            min(max(executed[0], xmin + 0.1), xmax - 0.1),
            min(max(executed[1], ymin + 0.1), ymax - 0.1),
        ])
        self.path_increments.append(float(np.linalg.norm(executed - self.robot)))
        self.robot = executed

        if self.crowd.shape[0]:
            self.crowd, self.crowd_vel = crowd_step(
                self.crowd, self.crowd_vel, self.crowd_goals, self.robot,
                self.spec.crowd_cooperation, self.scenario.arena,
            )
            self._recycle_crowd_goals()
            for i in range(self.crowd.shape[0]):
                self.crowd_history[i].append(self.crowd[i].copy())
                if len(self.crowd_history[i]) > 8:
                    self.crowd_history[i] = self.crowd_history[i][-8:]

        self.decisions.append(decision)
        self.states.append(WorldState(
            step + 1, self.robot, self.crowd, self.event_fired, op.observation
        ))
        self.step_index = step + 1
        outcome = self._termination(step)
        if outcome is not None:
            self.termination = outcome
        return outcome

    def trace(self) -> EpisodeTrace:
        return EpisodeTrace(
            self.spec, self.architecture, self.seed,
            tuple(self.states), tuple(self.decisions),
            self.termination or "timeout",
        )

    def run(self) -> EpisodeTrace:
        for _ in range(self.spec.max_steps):
            # fire before sampling so the scripted operator reacts on the
            # same tick the world changes
            self._fire_event_if_due(self.step_index)
            op = simulated_operator(
                self.scenario, self.robot, self.event_fired, self.rng_op
            )
            if self.advance(op) is not None:
                break
        return self.trace()


def simulate_episode(
    spec: ScenarioSpec,
    architecture: str,
    seed: int,
    schedule: BlendSchedule | None = None,
    settings: FusionSettings | None = None,
) -> EpisodeTrace:
    """Play one episode of ``spec`` under an architecture, deterministically.

    The same (spec, architecture, seed, schedule, settings) tuple always
    produces a bit-identical trace.  Crowd layout, operator noise, and
    fusion sampling run on independent seed streams, so solo baselines and
    fused runs of the same seed face the same world.
    """
    return Episode(spec, architecture, seed, schedule, settings).run()

"""Fusing a human input channel with machine plans into one platform action.

Three families of fusion are provided:

- linear blending of the two action channels under a blend schedule,
  with pure switching as the k in {0, 1} special case;
- joint-posterior fusion: sample full trajectories for the human intent,
  the machines, and the environment agents, weight each joint draw by an
  interaction potential coupling all bodies, and act on the machine
  trajectory of the highest-scoring draw;
- a particle variant of the same thing where the human intent arrives as
  a weighted particle set instead of a closed-form belief.

The interaction potential multiplies, over agent pairs and grid steps, a
repulsion term ``1 - alpha * exp(-d^2 / (2 r^2))`` that vanishes as the
pair separates, and adds a quadratic cohesion term tying the human intent
to the platform.  All of it is computed in log space.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np
from scipy.special import logsumexp

from .beliefs import (
    AgentSet,
    GaussianTrajectoryBelief,
    TimeGrid,
    Trajectory,
    TrajectoryBelief,
    _BeliefDensity,
    _sample_paths,
)
from .errors import InvalidArgumentError, WeightUnderflowError

if TYPE_CHECKING:  # pragma: no cover
    from .completion import SampleComplexityReport

ARCHITECTURES = ("linear", "switching", "irt", "human_only", "autonomy_only")


# ---------------------------------------------------------------------------
# blend schedules


@dataclass(frozen=True)
class BlendSchedule:
    """Per-step human weight k in [0, 1]; the machine gets 1 - k.

    ``kind`` is ``constant``, ``switching`` (values restricted to 0 or 1),
    or ``time_indexed``.  For the scheduled kinds the last listed value
    persists beyond the end of the list.
    """

    kind: str
    values: tuple[float, ...]

    def __post_init__(self):
        if self.kind not in ("constant", "switching", "time_indexed"):
            raise InvalidArgumentError(f"unknown schedule kind {self.kind!r}")
        vals = tuple(float(v) for v in self.values)
        if not vals:
            raise InvalidArgumentError("schedule needs at least one value")
        if self.kind == "constant" and len(vals) != 1:
            raise InvalidArgumentError("constant schedule takes exactly one value")
        for v in vals:
            if not (0.0 <= v <= 1.0) or not math.isfinite(v):
                raise InvalidArgumentError("schedule values must lie in [0, 1]")
            if self.kind == "switching" and v not in (0.0, 1.0):
                raise InvalidArgumentError("switching schedule values must be 0 or 1")
        object.__setattr__(self, "values", vals)

    @staticmethod
    def constant(k: float) -> "BlendSchedule":
        return BlendSchedule("constant", (k,))

    @staticmethod
    def switching(values) -> "BlendSchedule":
        return BlendSchedule("switching", tuple(values))

    @staticmethod
    def handoff() -> "BlendSchedule":
        """Full human authority on step 0, full machine authority after."""
        return BlendSchedule("switching", (1.0, 0.0))

    def k_h(self, step: int) -> float:
        if step < 0:
            raise InvalidArgumentError("step must be nonnegative")
        if self.kind == "constant":
            return self.values[0]
        return self.values[min(step, len(self.values) - 1)]


# ---------------------------------------------------------------------------
# decisions


@dataclass(frozen=True)
class FusionDecision:
    """One fused platform action: the commanded next position."""

    action: np.ndarray
    architecture: str
    chosen_joint: int | None = None

    def __post_init__(self):
        a = np.asarray(self.action, dtype=float)
        if a.shape != (2,) or not np.all(np.isfinite(a)):
            raise InvalidArgumentError("action must be a finite 2-vector")
        a = a.copy()
        a.setflags(write=False)
        object.__setattr__(self, "action", a)
        if self.architecture not in ARCHITECTURES:
            raise InvalidArgumentError(f"unknown architecture {self.architecture!r}")
        if self.chosen_joint is not None and self.chosen_joint < 0:
            raise InvalidArgumentError("chosen_joint must be a nonnegative index")


def linear_blend(
    u_h: np.ndarray, u_r: np.ndarray, schedule: BlendSchedule, step: int
) -> FusionDecision:
    """Convex combination k * u_h + (1 - k) * u_r of the two action channels.

    The endpoints are returned as exact copies of the winning channel, so a
    switching schedule reproduces the selected input bit for bit.
    """
    u_h = np.asarray(u_h, dtype=float)
    u_r = np.asarray(u_r, dtype=float)
    if u_h.shape != (2,) or u_r.shape != (2,):
        raise InvalidArgumentError("channel actions must be 2-vectors")
    k = schedule.k_h(step)
    if k == 1.0:
        action = u_h.copy()
    elif k == 0.0:
        action = u_r.copy()
    else:
        action = k * u_h + (1.0 - k) * u_r
    arch = "switching" if schedule.kind == "switching" else "linear"
    return FusionDecision(action, arch)


# ---------------------------------------------------------------------------
# interaction potential


@dataclass(frozen=True)
class InteractionParams:
    """Coupling constants for the joint potential.

    ``repulsion_strength`` (alpha) in [0, 1] scales how strongly nearby
    bodies suppress a joint draw, ``safety_radius`` (r) sets the distance
    scale, and ``cohesion_strength`` penalizes squared distance between the
    human intent and the platform trajectory.
    """

    safety_radius: float = 1.0
    repulsion_strength: float = 0.99
    cohesion_strength: float = 0.5

    def __post_init__(self):
        if not (self.safety_radius > 0):
            raise InvalidArgumentError("safety_radius must be positive")
        if not (0.0 <= self.repulsion_strength <= 1.0):
            raise InvalidArgumentError("repulsion_strength must lie in [0, 1]")
        if self.cohesion_strength < 0:
            raise InvalidArgumentError("cohesion_strength must be nonnegative")


def _log_potential_batch(
    human: np.ndarray,
    machines: np.ndarray,
    environment: np.ndarray,
    params: InteractionParams,
    static_env: np.ndarray | None = None,
) -> np.ndarray:
    """Log interaction potential for a batch of joint draws.

    Shapes: human (b, n, 2), machines (b, m, n, 2), environment (b, e, n, 2).
    Repulsion runs over unordered pairs of bodies among machines and
    environment agents; the human channel only enters through cohesion with
    the platform (machines[..., 0, :, :]).  ``static_env`` marks environment
    columns that are identical across the batch, whose mutual pairs
    contribute a constant and are skipped.
    """
    b = human.shape[0]
    bodies = np.concatenate([machines, environment], axis=1)
    n_mach = machines.shape[1]
    n_bodies = bodies.shape[1]
    if static_env is None:
        static = np.zeros(n_bodies, dtype=bool)
    else:
        static = np.concatenate([np.zeros(n_mach, dtype=bool), static_env])

    alpha = params.repulsion_strength
    inv_two_r2 = 1.0 / (2.0 * params.safety_radius**2)
    out = np.zeros(b)
    with np.errstate(divide="ignore"):
        for i in range(n_bodies):
            for j in range(i + 1, n_bodies):
                if static[i] and static[j]:
                    continue
                diff = bodies[:, i] - bodies[:, j]
                d2 = np.einsum("bnc,bnc->bn", diff, diff)
                out += np.log1p(-alpha * np.exp(-d2 * inv_two_r2)).sum(axis=1)

    coh = human - machines[:, 0]
    out -= params.cohesion_strength * np.einsum("bnc,bnc->b", coh, coh)
    return out


def interaction_potential(
    human: Trajectory,
    machines: list[Trajectory] | tuple[Trajectory, ...],
    environment: list[Trajectory] | tuple[Trajectory, ...] = (),
    params: InteractionParams = InteractionParams(),
) -> float:
    """Log potential of one joint trajectory configuration.

    Zero when repulsion is off (alpha = 0) and cohesion is off or the human
    matches the platform; -inf when alpha = 1 and two bodies touch.
    """
    if not machines:
        raise InvalidArgumentError("at least one machine trajectory is required")
    grid = human.grid
    for t in list(machines) + list(environment):
        if t.grid != grid:
            raise InvalidArgumentError("all trajectories must share one grid")
    h = human.points[None, :, :]
    m = np.stack([t.points for t in machines])[None, :, :, :]
    if environment:
        e = np.stack([t.points for t in environment])[None, :, :, :]
    else:
        e = np.empty((1, 0, grid.n_points, 2))
    return float(_log_potential_batch(h, m, e, params)[0])


# ---------------------------------------------------------------------------
# joint-posterior fusion


@dataclass(frozen=True)
class JointSampleEnsemble:
    """Joint trajectory draws with normalized log interaction weights.

    ``human_paths`` has shape (count, n, 2); ``machine_paths`` and
    ``environment_paths`` add a leading agent axis per draw, shapes
    (count, m, n, 2) and (count, e, n, 2).  ``log_weights`` are normalized
    so that logsumexp over the batch is 0.
    """

    grid: TimeGrid
    human_paths: np.ndarray
    machine_paths: np.ndarray
    environment_paths: np.ndarray
    log_weights: np.ndarray

    def __post_init__(self):
        c = self.human_paths.shape[0]
        n = self.grid.n_points
        if self.human_paths.shape != (c, n, 2) or c < 1:
            raise InvalidArgumentError("human_paths must have shape (count, n, 2)")
        if self.machine_paths.shape[0] != c or self.machine_paths.shape[2:] != (n, 2):
            raise InvalidArgumentError("machine_paths must have shape (count, m, n, 2)")
        if self.machine_paths.shape[1] < 1:
            raise InvalidArgumentError("at least one machine path per draw is required")
        if self.environment_paths.shape[0] != c or self.environment_paths.shape[2:] != (n, 2):
            raise InvalidArgumentError("environment_paths must have shape (count, e, n, 2)")
        if self.log_weights.shape != (c,):
            raise InvalidArgumentError("log_weights must have shape (count,)")
        if abs(logsumexp(self.log_weights)) > 1e-6:
            raise InvalidArgumentError("log_weights must be normalized")

    @property
    def count(self) -> int:
        return self.human_paths.shape[0]

    def human_samples(self) -> list[Trajectory]:
        return [Trajectory(self.grid, p) for p in self.human_paths]

    def machine_samples(self) -> list[list[Trajectory]]:
        return [
            [Trajectory(self.grid, p) for p in draw] for draw in self.machine_paths
        ]

    def environment_samples(self) -> list[list[Trajectory]]:
        return [
            [Trajectory(self.grid, p) for p in draw] for draw in self.environment_paths
        ]


def _sample_agent_paths(
    agents: AgentSet, count: int, rng_machines: np.random.Generator,
    rng_env: np.random.Generator,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Independent draws for all machine and environment beliefs.

    Returns (machine_paths, environment_paths, static_mask); the mask marks
    environment agents whose belief is a point mass, so their pairwise terms
    can be skipped.
    """
    n = agents.grid.n_points
    machine_paths = np.empty((count, len(agents.machines), n, 2))
    for j, belief in enumerate(agents.machines):
        machine_paths[:, j] = _sample_paths(belief, count, rng_machines)
    env_paths = np.empty((count, len(agents.environment), n, 2))
    static = np.zeros(len(agents.environment), dtype=bool)
    for j, belief in enumerate(agents.environment):
        env_paths[:, j] = _sample_paths(belief, count, rng_env)
        if isinstance(belief, GaussianTrajectoryBelief):
            static[j] = not belief.covariance.any()
    return machine_paths, env_paths, static


def _normalized_log_weights(raw: np.ndarray) -> np.ndarray:
    if np.any(np.isnan(raw)):
        raise InvalidArgumentError("interaction potential produced NaN")
    total = logsumexp(raw)
    if not np.isfinite(total):
        raise WeightUnderflowError(float(raw.max()))
    return raw - total


def irt_joint_posterior(
    human: TrajectoryBelief,
    agents: AgentSet,
    params: InteractionParams,
    count: int = 1000,
    seed: int = 0,
) -> JointSampleEnsemble:
    """Draw a weighted ensemble from the coupled joint over all trajectories.

    Draws ``count`` independent joint samples from the product of the
    individual beliefs, then weights each draw by the interaction
    potential.  Three decoupled seed streams (human, machines, environment)
    are spawned from ``seed`` so swapping the human channel leaves the
    machine and environment draws untouched.
    """
    if count < 1:
        raise InvalidArgumentError("count must be >= 1")
    if human.grid != agents.grid:
        raise InvalidArgumentError("human belief and agents must share one grid")
    rng_h, rng_m, rng_e = (
        np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(3)
    )
    human_paths = _sample_paths(human, count, rng_h)
    machine_paths, env_paths, static = _sample_agent_paths(agents, count, rng_m, rng_e)
    raw = _log_potential_batch(human_paths, machine_paths, env_paths, params, static)
    return JointSampleEnsemble(
        agents.grid, human_paths, machine_paths, env_paths, _normalized_log_weights(raw)
    )


def _joint_scores(
    ensemble: JointSampleEnsemble,
    human_log_density: np.ndarray,
    agent_beliefs: AgentSet,
) -> np.ndarray:
    """Log joint-posterior score of every draw, up to one common constant."""
    scores = human_log_density + ensemble.log_weights
    for j, belief in enumerate(agent_beliefs.machines):
        scores = scores + _BeliefDensity(belief).logpdf(ensemble.machine_paths[:, j])
    for j, belief in enumerate(agent_beliefs.environment):
        scores = scores + _BeliefDensity(belief).logpdf(ensemble.environment_paths[:, j])
    return scores


def _decision_from_scores(
    ensemble: JointSampleEnsemble, scores: np.ndarray
) -> FusionDecision:
    if not np.any(scores > -np.inf):
        raise WeightUnderflowError(float(np.max(ensemble.log_weights)))
    best = int(np.argmax(scores))
    action = ensemble.machine_paths[best, 0, 1, :]
    return FusionDecision(action, "irt", chosen_joint=best)


def irt_fuse(
    ensemble: JointSampleEnsemble,
    human: TrajectoryBelief,
    agents: AgentSet,
) -> FusionDecision:
    """Pick the joint draw maximizing the weighted joint density; the action
    is the platform trajectory's next grid point in that draw.

    Ties resolve to the lowest draw index (the argmax of the score array).
    """
    if human.grid != ensemble.grid or agents.grid != ensemble.grid:
        raise InvalidArgumentError("ensemble, human belief, and agents must share one grid")
    if ensemble.machine_paths.shape[1] != len(agents.machines):
        raise InvalidArgumentError("ensemble and agents disagree on machine count")
    if ensemble.environment_paths.shape[1] != len(agents.environment):
        raise InvalidArgumentError("ensemble and agents disagree on environment count")
    human_ld = _BeliefDensity(human).logpdf(ensemble.human_paths)
    return _decision_from_scores(ensemble, _joint_scores(ensemble, human_ld, agents))


# ---------------------------------------------------------------------------
# particle-set human intent


@dataclass(frozen=True)
class ParticleIntent:
    """Human intent as weighted trajectory particles (a sum of point masses).

    ``feasible`` is cleared by producers that could not support the particle
    set with enough data; ``sample_report`` then carries their accounting.
    """

    particles: tuple[Trajectory, ...]
    weights: np.ndarray
    feasible: bool = True
    sample_report: "SampleComplexityReport | None" = None

    def __post_init__(self):
        parts = tuple(self.particles)
        if not parts:
            raise InvalidArgumentError("at least one particle is required")
        w = np.asarray(self.weights, dtype=float)
        if w.shape != (len(parts),) or np.any(w < 0) or not np.all(np.isfinite(w)):
            raise InvalidArgumentError("weights must be nonnegative, one per particle")
        if abs(w.sum() - 1.0) > 1e-9:
            raise InvalidArgumentError("particle weights must sum to 1")
        g = parts[0].grid
        if any(p.grid != g for p in parts[1:]):
            raise InvalidArgumentError("particles must share one grid")
        w = w.copy()
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "particles", parts)

    @property
    def grid(self) -> TimeGrid:
        return self.particles[0].grid


def particle_fuse(
    intent: ParticleIntent,
    agents: AgentSet,
    params: InteractionParams,
    count: int = 1000,
    seed: int = 0,
) -> FusionDecision:
    """Joint-posterior fusion with the human belief replaced by particles.

    The human marginal is a weighted set of point masses, so each sampled
    machine/environment draw is paired with one positive-weight particle,
    cycling through the set in order, and the human density term reduces
    to that particle's log-weight.  The pairing is deterministic: there is
    no resampling noise on the human channel, and zero-weight particles
    are skipped outright, never consuming a draw.  Machine and environment
    draws consume the same seed streams as :func:`irt_joint_posterior`, so
    a particle cloud sampled from the human belief on the matched seed
    stream reproduces the closed-form fuser draw for draw once the cloud
    is as large as ``count``.
    """
    if count < 1:
        raise InvalidArgumentError("count must be >= 1")
    if intent.grid != agents.grid:
        raise InvalidArgumentError("intent and agents must share one grid")
    _, rng_m, rng_e = (
        np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(3)
    )
    machine_paths, env_paths, static = _sample_agent_paths(agents, count, rng_m, rng_e)

    support = np.flatnonzero(intent.weights > 0.0)
    slots = support[np.arange(count) % len(support)]
    human_paths = np.stack([intent.particles[i].points for i in slots])

    raw = _log_potential_batch(human_paths, machine_paths, env_paths, params, static)
    ensemble = JointSampleEnsemble(
        agents.grid, human_paths, machine_paths, env_paths, _normalized_log_weights(raw)
    )
    return _decision_from_scores(
        ensemble, _joint_scores(ensemble, np.log(intent.weights[slots]), agents)
    )

"""Episode scoring, the lower-bound verdict, sweeps, and gap estimates.

Performance is kept as a vector of safety and efficiency numbers rather
than a scalar score.  The verdict compares a fused run against the better
of the two solo runs metric by metric; an unreached goal scores infinite
time and path ratio, and infinities compare ordinally, so no penalty
constant ever has to be invented.
"""

from __future__ import annotations

import itertools
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .errors import InvalidArgumentError, InvalidComparisonError
from .scenarios import (
    COLLISION_RADIUS,
    DT,
    EPISODE_ARCHITECTURES,
    EpisodeTrace,
    ScenarioSpec,
    build_scenario,
    simulate_episode,
)

STRESSOR_FIELDS = (
    "crowd_density",
    "operator_fidelity_sigma",
    "operator_noise_std",
    "autonomy_reliability",
)

METRIC_NAMES = ("min_separation", "path_ratio", "time_to_goal")

DEFAULT_TOLERANCE = 0.05
DEFAULT_SWEEP_BUDGET = 6000


@dataclass(frozen=True)
class MetricReport:
    """Safety and efficiency numbers for one episode.

    ``path_ratio`` counts the distance actually traversed plus the leg
    still remaining at termination, over the straight start-to-goal line;
    by the triangle inequality it is >= 1 whenever the goal was reached.
    ``time_to_goal`` is in seconds, infinite when the goal was not reached.
    """

    spec: ScenarioSpec
    architecture: str
    seed: int
    min_separation: float
    collision: bool
    path_ratio: float
    time_to_goal: float
    frozen: bool
    termination: str

    def __post_init__(self):
        if self.architecture not in EPISODE_ARCHITECTURES:
            raise InvalidArgumentError(f"unknown architecture {self.architecture!r}")
        if self.min_separation < 0:
            raise InvalidArgumentError("min_separation must be nonnegative")
        if self.collision != (self.min_separation < COLLISION_RADIUS):
            raise InvalidArgumentError(
                "collision flag must match the collision-radius test"
            )
        if math.isfinite(self.time_to_goal) and self.path_ratio < 1.0 - 1e-9:
            raise InvalidArgumentError("path ratio below 1 on a reached goal")

    def to_dict(self) -> dict:
        return {
            "spec": self.spec.to_dict(),
            "architecture": self.architecture,
            "seed": int(self.seed),
            "min_separation": float(self.min_separation),
            "collision": bool(self.collision),
            "path_ratio": float(self.path_ratio),
            "time_to_goal": float(self.time_to_goal),
            "frozen": bool(self.frozen),
            "termination": self.termination,
        }


def score_episode(trace: EpisodeTrace) -> MetricReport:
    """Extract the metric vector from one finished episode."""
    scenario = build_scenario(trace.spec, trace.seed)
    path = trace.robot_path()

    min_sep = math.inf
    for state in trace.states:
        pos = state.robot_pos
        if scenario.obstacles.size:
            min_sep = min(min_sep, float(
                np.linalg.norm(scenario.obstacles - pos[None, :], axis=1).min()
            ))
        if state.crowd_positions.size:
            min_sep = min(min_sep, float(
                np.linalg.norm(state.crowd_positions - pos[None, :], axis=1).min()
            ))

    reached = trace.termination == "reached_goal"
    traversed = float(np.linalg.norm(np.diff(path, axis=0), axis=1).sum())
    remaining = float(np.linalg.norm(scenario.goal - path[-1]))
    straight = float(np.linalg.norm(scenario.goal - scenario.start))
    if reached:
        path_ratio = (traversed + remaining) / straight
        time_to_goal = len(trace.decisions) * DT
    else:
        path_ratio = math.inf
        time_to_goal = math.inf

    return MetricReport(
        spec=trace.spec,
        architecture=trace.architecture,
        seed=trace.seed,
        min_separation=min_sep,
        collision=trace.termination == "collision",
        path_ratio=path_ratio,
        time_to_goal=time_to_goal,
        frozen=trace.termination == "frozen",
        termination=trace.termination,
    )


@dataclass(frozen=True)
class LowerBoundVerdict:
    """Per-metric pass flags for team-versus-better-solo, plus the conjunction."""

    path_ratio_ok: bool
    time_ok: bool
    collision_ok: bool
    passed: bool

    def to_dict(self) -> dict:
        return {
            "path_ratio_ok": self.path_ratio_ok,
            "time_ok": self.time_ok,
            "collision_ok": self.collision_ok,
            "passed": self.passed,
        }


def _no_worse(team: float, best_solo: float, tolerance: float) -> bool:
    # ordinal handling of unreached goals: any finite value beats infinity,
    # and two infinities tie
    if math.isinf(best_solo):
        return True
    if math.isinf(team):
        return False
    return team <= best_solo * (1.0 + tolerance)


def lower_bound_verdict(
    team: MetricReport,
    human_alone: MetricReport,
    autonomy_alone: MetricReport,
    tolerance: float = DEFAULT_TOLERANCE,
) -> LowerBoundVerdict:
    """Check that the fused run is no worse than the better solo run.

    Larger-is-worse metrics (path ratio, time to goal) must not exceed the
    better solo by more than ``tolerance``; collisions compare as booleans,
    where fusing two safe inputs into a collision is the failure mode.
    """
    if tolerance < 0:
        raise InvalidArgumentError("tolerance must be nonnegative")
    for solo in (human_alone, autonomy_alone):
        if solo.spec != team.spec or solo.seed != team.seed:
            raise InvalidComparisonError(
                "verdict inputs must come from the same scenario and seed"
            )

    path_ok = _no_worse(
        team.path_ratio, min(human_alone.path_ratio, autonomy_alone.path_ratio), tolerance
    )
    time_ok = _no_worse(
        team.time_to_goal,
        min(human_alone.time_to_goal, autonomy_alone.time_to_goal),
        tolerance,
    )
    collision_ok = not (
        team.collision and not human_alone.collision and not autonomy_alone.collision
    )
    return LowerBoundVerdict(
        path_ratio_ok=path_ok,
        time_ok=time_ok,
        collision_ok=collision_ok,
        passed=path_ok and time_ok and collision_ok,
    )


# ---------------------------------------------------------------------------
# stressor sweeps


@dataclass(frozen=True)
class StressorGrid:
    """Named stressor axes crossed into a full factorial of cells."""

    axes: dict[str, tuple[float, ...]]
    seeds_per_cell: int = 10

    def __post_init__(self):
        if not self.axes:
            raise InvalidArgumentError("grid needs at least one axis")
        clean = {}
        for name, values in self.axes.items():
            if name not in STRESSOR_FIELDS:
                raise InvalidArgumentError(f"unknown stressor axis {name!r}")
            vals = tuple(float(v) for v in values)
            if not vals:
                raise InvalidArgumentError(f"axis {name!r} is empty")
            clean[name] = vals
        object.__setattr__(self, "axes", clean)
        if self.seeds_per_cell < 1:
            raise InvalidArgumentError("seeds_per_cell must be at least 1")

    def cells(self) -> list[dict[str, float]]:
        names = list(self.axes)
        combos = itertools.product(*(self.axes[n] for n in names))
        return [dict(zip(names, combo)) for combo in combos]


@dataclass(frozen=True)
class CellAggregate:
    """Mean/stddev per metric for one architecture in one grid cell."""

    architecture: str
    mean: dict[str, float]
    stddev: dict[str, float]
    violation_rate: float
    termination_counts: dict[str, int]
    failures: int = 0

    def to_dict(self) -> dict:
        return {
            "architecture": self.architecture,
            "mean": {k: float(v) for k, v in self.mean.items()},
            "stddev": {k: float(v) for k, v in self.stddev.items()},
            "violation_rate": float(self.violation_rate),
            "termination_counts": dict(self.termination_counts),
            "failures": int(self.failures),
        }


@dataclass(frozen=True)
class PerformanceSurface:
    """Aggregates over a stressor grid, one row per (cell, architecture)."""

    grid: StressorGrid
    kind: str
    cell_values: tuple[dict[str, float], ...]
    aggregates: tuple[tuple[CellAggregate, ...], ...]
    tolerance: float

    def cell(self, index: int, architecture: str) -> CellAggregate:
        for agg in self.aggregates[index]:
            if agg.architecture == architecture:
                return agg
        raise InvalidArgumentError(f"architecture {architecture!r} not in surface")

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "axes": {k: list(v) for k, v in self.grid.axes.items()},
            "seeds_per_cell": self.grid.seeds_per_cell,
            "tolerance": float(self.tolerance),
            "cells": [
                {
                    "values": {k: float(v) for k, v in values.items()},
                    "aggregates": [a.to_dict() for a in aggs],
                }
                for values, aggs in zip(self.cell_values, self.aggregates)
            ],
        }


def _aggregate(arch, reports, verdicts, failures):
    mean, std = {}, {}
    for name in METRIC_NAMES:
        vals = np.array([getattr(r, name) for r in reports]) if reports else np.array([])
        if vals.size:
            mean[name] = float(vals.mean())
            std[name] = float(vals.std()) if np.all(np.isfinite(vals)) else math.inf
        else:
            mean[name] = math.nan
            std[name] = math.nan
    counts: dict[str, int] = {}
    for r in reports:
        counts[r.termination] = counts.get(r.termination, 0) + 1
    rate = (
        sum(1 for v in verdicts if not v.passed) / len(verdicts) if verdicts else 0.0
    )
    return CellAggregate(arch, mean, std, rate, counts, failures)


def _run_cell(base_spec, overrides, architectures, seeds, tolerance, settings, schedule):
    spec = replace(base_spec, **overrides)
    solo_reports: dict[str, dict[int, MetricReport]] = {"human_only": {}, "autonomy_only": {}}
    team_reports: dict[str, list[MetricReport]] = {a: [] for a in architectures}
    verdicts: dict[str, list] = {a: [] for a in architectures}
    failures: dict[str, int] = {a: 0 for a in architectures}

    for seed in seeds:
        for solo in ("human_only", "autonomy_only"):
            try:
                trace = simulate_episode(spec, solo, seed, settings=settings)
                solo_reports[solo][seed] = score_episode(trace)
            except Exception:
                if solo in failures:
                    failures[solo] += 1
        for arch in architectures:
            if arch in ("human_only", "autonomy_only"):
                report = solo_reports[arch].get(seed)
                if report is not None:
                    team_reports[arch].append(report)
                continue
            try:
                trace = simulate_episode(
                    spec, arch, seed, schedule=schedule, settings=settings
                )
                report = score_episode(trace)
            except Exception:
                failures[arch] += 1
                continue
            team_reports[arch].append(report)
            human = solo_reports["human_only"].get(seed)
            auto = solo_reports["autonomy_only"].get(seed)
            if human is not None and auto is not None:
                verdicts[arch].append(
                    lower_bound_verdict(report, human, auto, tolerance)
                )
    for solo in ("human_only", "autonomy_only"):
        if solo in verdicts:
            # the solos define the bound; comparing one against the pair
            # still flags when it is far behind the other
            for seed in seeds:
                mine = solo_reports[solo].get(seed)
                human = solo_reports["human_only"].get(seed)
                auto = solo_reports["autonomy_only"].get(seed)
                if mine is not None and human is not None and auto is not None:
                    verdicts[solo].append(lower_bound_verdict(mine, human, auto, tolerance))
    return tuple(
        _aggregate(arch, team_reports[arch], verdicts[arch], failures[arch])
        for arch in architectures
    )


def stressor_sweep(
    grid: StressorGrid,
    architectures: tuple[str, ...],
    kind: str,
    base_spec: ScenarioSpec | None = None,
    tolerance: float = DEFAULT_TOLERANCE,
    seed_start: int = 0,
    budget: int = DEFAULT_SWEEP_BUDGET,
    settings=None,
    schedule=None,
    workers: int | None = None,
) -> PerformanceSurface:
    """Run every (cell, seed, architecture) episode and aggregate per cell.

    Solo baselines run for every seed regardless of the requested
    architecture list so each fused report gets its verdict.  Episode
    failures are counted per cell and never abort the sweep.
    """
    if not architectures:
        raise InvalidArgumentError("need at least one architecture")
    for arch in architectures:
        if arch not in EPISODE_ARCHITECTURES:
            raise InvalidArgumentError(f"unknown architecture {arch!r}")
    if base_spec is None:
        base_spec = _default_spec(kind)
    elif base_spec.kind != kind:
        raise InvalidArgumentError("base_spec kind must match the sweep kind")

    cells = grid.cells()
    episodes = len(cells) * grid.seeds_per_cell * (len(architectures) + 2)
    if episodes > budget:
        raise InvalidArgumentError(
            f"sweep would run {episodes} episodes, over the budget of {budget}"
        )
    seeds = range(seed_start, seed_start + grid.seeds_per_cell)

    if workers and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            futures = [
                pool.submit(
                    _run_cell, base_spec, overrides, architectures, seeds, tolerance,
                    settings, schedule,
                )
                for overrides in cells
            ]
            aggregates = tuple(f.result() for f in futures)
    else:
        aggregates = tuple(
            _run_cell(base_spec, overrides, architectures, seeds, tolerance, settings, schedule)
            for overrides in cells
        )
    return PerformanceSurface(grid, kind, tuple(cells), aggregates, tolerance)


def _default_spec(kind: str) -> ScenarioSpec:
    if kind == "bimodal_corridor":
        return ScenarioSpec.corridor()
    if kind == "crowd_navigation":
        return ScenarioSpec.crowd()
    if kind == "elevator_semantic":
        return ScenarioSpec.elevator()
    raise InvalidArgumentError(f"unknown scenario kind {kind!r}")


# ---------------------------------------------------------------------------
# empirical story of Fig-style epsilon/delta gaps


@dataclass(frozen=True)
class EpsilonDeltaEstimate:
    """Empirical exceedance probability for one gap threshold."""

    epsilon: float
    delta: float
    sample_count: int

    def __post_init__(self):
        if self.epsilon < 0:
            raise InvalidArgumentError("epsilon must be nonnegative")
        if not (0.0 <= self.delta <= 1.0):
            raise InvalidArgumentError("delta must lie in [0, 1]")

    def to_dict(self) -> dict:
        return {
            "epsilon": float(self.epsilon),
            "delta": float(self.delta),
            "sample_count": int(self.sample_count),
        }


def _episode_gap(candidate: EpisodeTrace, reference: EpisodeTrace, mode: str) -> float:
    if mode == "action":
        n = min(len(candidate.decisions), len(reference.decisions))
        if n == 0:
            return 0.0
        gaps = [
            float(np.linalg.norm(candidate.decisions[i].action - reference.decisions[i].action))
            for i in range(n)
        ]
        return float(np.mean(gaps))
    cand = getattr(score_episode(candidate), mode)
    ref = getattr(score_episode(reference), mode)
    if math.isinf(cand) and math.isinf(ref):
        return 0.0
    return abs(cand - ref)


def epsilon_delta(
    candidate_traces: list[EpisodeTrace],
    reference_traces: list[EpisodeTrace],
    epsilons: tuple[float, ...],
    mode: str = "action",
) -> list[EpsilonDeltaEstimate]:
    """Fraction of episodes whose gap from the reference exceeds each epsilon.

    ``mode`` selects the gap: ``action`` measures mean per-step action
    distance; any metric name measures the absolute difference of that
    episode metric.
    """
    if not candidate_traces or not reference_traces:
        raise InvalidArgumentError("episode sets must be nonempty")
    if len(candidate_traces) != len(reference_traces):
        raise InvalidArgumentError("episode sets must pair up one-to-one")
    if mode != "action" and mode not in METRIC_NAMES:
        raise InvalidArgumentError(f"unknown gap mode {mode!r}")
    for cand, ref in zip(candidate_traces, reference_traces):
        if cand.spec != ref.spec or cand.seed != ref.seed:
            raise InvalidComparisonError(
                "paired traces must share scenario spec and seed"
            )
    gaps = np.array([
        _episode_gap(c, r, mode) for c, r in zip(candidate_traces, reference_traces)
    ])
    out = []
    for eps in epsilons:
        count = int((gaps > eps).sum())
        out.append(EpsilonDeltaEstimate(float(eps), count / gaps.size, gaps.size))
    return out

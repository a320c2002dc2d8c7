"""Batch experiment execution and flat-file persistence.

Result files are byte-stable: records are written in a fixed order with
sorted keys and no timestamps, so re-running the same configuration
overwrites every file with identical bytes.
"""

from __future__ import annotations

import io
import json
from dataclasses import dataclass
from pathlib import Path

from .config import RunConfig
from .errors import InvalidArgumentError
from .metrics import (
    MetricReport,
    PerformanceSurface,
    epsilon_delta,
    lower_bound_verdict,
    score_episode,
    stressor_sweep,
)
from .scenarios import EpisodeTrace, simulate_episode

PLOT_KINDS = ("trajectory_overlay", "performance_surface", "epsilon_delta_curve")

_SOLO_ARCHS = ("human_only", "autonomy_only")


@dataclass(frozen=True)
class RunResult:
    """What a batch run produced and where it put things."""

    successes: int
    failures: tuple[dict, ...]
    files: tuple[Path, ...]

    @property
    def ok(self) -> bool:
        return self.successes > 0


def _dump(record: dict) -> str:
    return json.dumps(record, sort_keys=True, separators=(",", ":"))


def _trace_record(trace: EpisodeTrace) -> dict:
    return {
        "architecture": trace.architecture,
        "seed": int(trace.seed),
        "spec": trace.spec.to_dict(),
        "termination": trace.termination,
        "steps": len(trace.decisions),
        "robot_path": [[float(x), float(y)] for x, y in trace.robot_path()],
        "actions": [[float(a.action[0]), float(a.action[1])] for a in trace.decisions],
    }


def _write(path: Path, text: str) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)
    return path


def run_experiment(config: RunConfig) -> RunResult:
    """Run every (architecture, seed) episode and persist traces and metrics.

    Solo baselines run for every seed so each fused record carries its
    lower-bound verdict.  A failing episode is recorded and skipped, never
    fatal; the result only reports overall failure when nothing succeeded.
    """
    seeds = range(config.seeds.start, config.seeds.start + config.seeds.count)
    traces: list[EpisodeTrace] = []
    reports: list[tuple[MetricReport, dict | None]] = []
    failures: list[dict] = []
    solo_cache: dict[tuple[str, int], MetricReport] = {}

    def _run_one(arch: str, seed: int) -> EpisodeTrace | None:
        try:
            return simulate_episode(
                config.scenario, arch, seed,
                schedule=config.schedule, settings=config.settings,
            )
        except Exception as exc:
            failures.append({"architecture": arch, "seed": seed, "error": str(exc)})
            return None

    for seed in seeds:
        for solo in _SOLO_ARCHS:
            trace = _run_one(solo, seed)
            if trace is not None:
                solo_cache[(solo, seed)] = score_episode(trace)
                if solo in config.architectures:
                    traces.append(trace)
        for arch in config.architectures:
            if arch in _SOLO_ARCHS:
                report = solo_cache.get((arch, seed))
                if report is not None:
                    reports.append((report, None))
                continue
            trace = _run_one(arch, seed)
            if trace is None:
                continue
            traces.append(trace)
            report = score_episode(trace)
            human = solo_cache.get(("human_only", seed))
            auto = solo_cache.get(("autonomy_only", seed))
            verdict = None
            if human is not None and auto is not None:
                verdict = lower_bound_verdict(
                    report, human, auto, config.sweep_tolerance
                ).to_dict()
            reports.append((report, verdict))

    files = [
        _write(
            config.output_dir / "episodes.jsonl",
            "".join(_dump(_trace_record(t)) + "\n" for t in traces),
        ),
        _write(
            config.output_dir / "metrics.jsonl",
            "".join(
                _dump({**r.to_dict(), "verdict": v}) + "\n" for r, v in reports
            ),
        ),
        _write(
            config.output_dir / "summary.json",
            _dump({
                "successes": len(traces),
                "failures": failures,
                "seeds": [int(s) for s in seeds],
                "architectures": list(config.architectures),
            }) + "\n",
        ),
    ]
    return RunResult(len(traces), tuple(failures), tuple(files))


def run_sweep(config: RunConfig) -> tuple[PerformanceSurface, RunResult]:
    """Run the configured stressor sweep and persist the surface."""
    if config.sweep is None:
        raise InvalidArgumentError("configuration has no sweep section")
    surface = stressor_sweep(
        config.sweep,
        config.architectures,
        config.scenario.kind,
        base_spec=config.scenario,
        tolerance=config.sweep_tolerance,
        settings=config.settings,
        schedule=config.schedule,
    )
    path = _write(
        config.output_dir / "surface.json",
        json.dumps(surface.to_dict(), sort_keys=True, indent=1) + "\n",
    )
    episodes = (
        len(surface.cell_values)
        * config.sweep.seeds_per_cell
        * (len(config.architectures) + 2)
    )
    return surface, RunResult(episodes, (), (path,))


# ---------------------------------------------------------------------------
# plot-ready tabular series


def _csv(rows: list[list], header: list[str]) -> str:
    out = io.StringIO()
    out.write(",".join(header) + "\n")
    for row in rows:
        out.write(",".join(str(v) for v in row) + "\n")
    return out.getvalue()


def trajectory_overlay_table(trace: EpisodeTrace) -> str:
    """Long-form step,x,y,agent_id series for one episode."""
    rows: list[list] = []
    for state in trace.states:
        rows.append([state.step, float(state.robot_pos[0]), float(state.robot_pos[1]), "robot"])
        for k, pos in enumerate(state.crowd_positions):
            rows.append([state.step, float(pos[0]), float(pos[1]), f"crowd_{k}"])
    return _csv(rows, ["step", "x", "y", "agent_id"])


def performance_surface_table(surface: PerformanceSurface) -> str:
    """One row per (cell, architecture) with means and the violation rate."""
    axis_names = list(surface.grid.axes)
    rows = []
    for values, aggs in zip(surface.cell_values, surface.aggregates):
        for agg in aggs:
            rows.append(
                [values[n] for n in axis_names]
                + [
                    agg.architecture,
                    agg.mean["time_to_goal"],
                    agg.mean["path_ratio"],
                    agg.mean["min_separation"],
                    agg.violation_rate,
                ]
            )
    header = axis_names + [
        "architecture", "mean_time_to_goal", "mean_path_ratio",
        "mean_min_separation", "violation_rate",
    ]
    return _csv(rows, header)


def epsilon_delta_table(estimates) -> str:
    rows = [[e.epsilon, e.delta, e.sample_count] for e in estimates]
    return _csv(rows, ["epsilon", "delta", "sample_count"])


def emit_plot_data(config: RunConfig, kind: str, out_dir: Path | None = None) -> list[Path]:
    """Produce the tabular series behind one plot kind.

    Episodes are re-simulated from the configuration rather than read back
    from result files; determinism makes both routes identical and this one
    also works before any run has been persisted.
    """
    if kind not in PLOT_KINDS:
        raise InvalidArgumentError(f"unknown plot kind {kind!r}")
    out = Path(out_dir) if out_dir is not None else config.output_dir / "plots"
    written: list[Path] = []

    if kind == "trajectory_overlay":
        seed = config.seeds.start
        for arch in config.architectures:
            trace = simulate_episode(
                config.scenario, arch, seed,
                schedule=config.schedule, settings=config.settings,
            )
            written.append(_write(
                out / f"overlay_{arch}_seed{seed}.csv",
                trajectory_overlay_table(trace),
            ))
    elif kind == "performance_surface":
        surface, _ = run_sweep(config)
        written.append(_write(out / "surface.csv", performance_surface_table(surface)))
    else:
        seeds = range(config.seeds.start, config.seeds.start + config.seeds.count)
        reference = [
            simulate_episode(config.scenario, "irt", s, settings=config.settings)
            for s in seeds
        ]
        epsilons = (0.0, 0.05, 0.1, 0.25, 0.5, 1.0, 2.0)
        for arch in config.architectures:
            if arch == "irt":
                continue
            candidate = [
                simulate_episode(
                    config.scenario, arch, s,
                    schedule=config.schedule, settings=config.settings,
                )
                for s in seeds
            ]
            estimates = epsilon_delta(candidate, reference, epsilons)
            written.append(_write(
                out / f"epsilon_delta_{arch}_vs_irt.csv",
                epsilon_delta_table(estimates),
            ))
    if not written:
        written.append(_write(out / f"{kind}.csv", _csv([], ["empty"])))
    return written

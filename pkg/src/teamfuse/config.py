"""Run configuration: YAML schema, validation, and the RunConfig record.

Every field of the scenario, fusion settings, blend schedule, and sweep
grid is addressable from the file.  Validation errors carry a dotted path
to the offending entry so a typo in a nested section is easy to find.
"""

from __future__ import annotations

from dataclasses import dataclass, fields
from pathlib import Path

import yaml

from .errors import ConfigError
from .fusion import BlendSchedule
from .metrics import DEFAULT_TOLERANCE, STRESSOR_FIELDS, StressorGrid
from .scenarios import (
    EPISODE_ARCHITECTURES,
    SCENARIO_KINDS,
    FusionSettings,
    ScenarioSpec,
)

_SCENARIO_KEYS = {f.name for f in fields(ScenarioSpec)}
_FUSION_KEYS = {f.name for f in fields(FusionSettings)}
_TOP_KEYS = {
    "scenario", "architectures", "seeds", "fusion", "blend", "sweep", "output_dir",
}


@dataclass(frozen=True)
class SeedPolicy:
    count: int = 1
    start: int = 0


@dataclass(frozen=True)
class RunConfig:
    """Everything one `run` or `sweep` invocation needs."""

    scenario: ScenarioSpec
    architectures: tuple[str, ...]
    seeds: SeedPolicy
    settings: FusionSettings
    schedule: BlendSchedule | None
    sweep: StressorGrid | None
    sweep_tolerance: float
    output_dir: Path


def _expect_mapping(node, path):
    if not isinstance(node, dict):
        raise ConfigError("expected a mapping", field=path)
    return node


def _expect_number(value, path):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError("expected a number", field=path)
    return float(value)


def _expect_int(value, path):
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError("expected an integer", field=path)
    return value


def _reject_unknown(node: dict, allowed, path):
    for key in node:
        if key not in allowed:
            raise ConfigError(
                f"unknown key {key!r}", field=f"{path}.{key}" if path else str(key)
            )


def _parse_scenario(node) -> ScenarioSpec:
    node = _expect_mapping(node, "scenario")
    _reject_unknown(node, _SCENARIO_KEYS, "scenario")
    if "kind" not in node:
        raise ConfigError("scenario needs a kind", field="scenario.kind")
    kind = node["kind"]
    if kind not in SCENARIO_KINDS:
        raise ConfigError(f"unknown scenario kind {kind!r}", field="scenario.kind")
    defaults = {
        "bimodal_corridor": ScenarioSpec.corridor,
        "crowd_navigation": ScenarioSpec.crowd,
        "elevator_semantic": ScenarioSpec.elevator,
    }[kind]
    overrides = {}
    for key, value in node.items():
        if key == "kind":
            continue
        if key == "semantic_event_step":
            overrides[key] = None if value is None else _expect_int(value, f"scenario.{key}")
        elif key == "max_steps":
            overrides[key] = _expect_int(value, f"scenario.{key}")
        else:
            overrides[key] = _expect_number(value, f"scenario.{key}")
    try:
        return defaults(**overrides)
    except Exception as exc:
        raise ConfigError(str(exc), field="scenario") from exc


def _parse_architectures(node) -> tuple[str, ...]:
    if not isinstance(node, list) or not node:
        raise ConfigError("need a nonempty list", field="architectures")
    for i, arch in enumerate(node):
        if arch not in EPISODE_ARCHITECTURES:
            raise ConfigError(
                f"unknown architecture {arch!r}", field=f"architectures[{i}]"
            )
    return tuple(node)


def _parse_seeds(node) -> SeedPolicy:
    if node is None:
        return SeedPolicy()
    node = _expect_mapping(node, "seeds")
    _reject_unknown(node, {"count", "start"}, "seeds")
    count = _expect_int(node.get("count", 1), "seeds.count")
    start = _expect_int(node.get("start", 0), "seeds.start")
    if count < 1:
        raise ConfigError("must be at least 1", field="seeds.count")
    return SeedPolicy(count=count, start=start)


def _parse_fusion(node) -> FusionSettings:
    if node is None:
        return FusionSettings()
    node = _expect_mapping(node, "fusion")
    _reject_unknown(node, _FUSION_KEYS, "fusion")
    overrides = {}
    for key, value in node.items():
        path = f"fusion.{key}"
        if key in ("ensemble_count", "horizon_steps", "max_env_agents"):
            overrides[key] = _expect_int(value, path)
        elif key == "machine_anchor_noise":
            overrides[key] = None if value is None else _expect_number(value, path)
        else:
            overrides[key] = _expect_number(value, path)
    try:
        return FusionSettings(**overrides)
    except Exception as exc:
        raise ConfigError(str(exc), field="fusion") from exc


def _parse_blend(node) -> BlendSchedule | None:
    if node is None:
        return None
    node = _expect_mapping(node, "blend")
    _reject_unknown(node, {"kind", "k", "values"}, "blend")
    kind = node.get("kind", "constant")
    try:
        if kind == "constant":
            return BlendSchedule.constant(_expect_number(node.get("k", 0.5), "blend.k"))
        if kind == "handoff":
            return BlendSchedule.handoff()
        if kind in ("switching", "time_indexed"):
            values = node.get("values")
            if not isinstance(values, list) or not values:
                raise ConfigError("need a nonempty values list", field="blend.values")
            return BlendSchedule(kind, tuple(
                _expect_number(v, f"blend.values[{i}]") for i, v in enumerate(values)
            ))
    except ConfigError:
        raise
    except Exception as exc:
        raise ConfigError(str(exc), field="blend") from exc
    raise ConfigError(f"unknown blend kind {kind!r}", field="blend.kind")


def _parse_sweep(node) -> tuple[StressorGrid | None, float]:
    if node is None:
        return None, DEFAULT_TOLERANCE
    node = _expect_mapping(node, "sweep")
    _reject_unknown(node, {"axes", "seeds_per_cell", "tolerance"}, "sweep")
    axes_node = _expect_mapping(node.get("axes"), "sweep.axes")
    axes = {}
    for name, values in axes_node.items():
        path = f"sweep.axes.{name}"
        if name not in STRESSOR_FIELDS:
            raise ConfigError(f"unknown stressor axis {name!r}", field=path)
        if not isinstance(values, list) or not values:
            raise ConfigError("need a nonempty list of values", field=path)
        axes[name] = tuple(_expect_number(v, f"{path}[{i}]") for i, v in enumerate(values))
    seeds = _expect_int(node.get("seeds_per_cell", 10), "sweep.seeds_per_cell")
    tolerance = _expect_number(node.get("tolerance", DEFAULT_TOLERANCE), "sweep.tolerance")
    if tolerance < 0:
        raise ConfigError("must be nonnegative", field="sweep.tolerance")
    try:
        grid = StressorGrid(axes=axes, seeds_per_cell=seeds)
    except Exception as exc:
        raise ConfigError(str(exc), field="sweep") from exc
    return grid, tolerance


def parse_config(data: dict, base_dir: Path | None = None) -> RunConfig:
    """Validate an already-loaded mapping into a RunConfig."""
    data = _expect_mapping(data, "")
    _reject_unknown(data, _TOP_KEYS, "")
    if "scenario" not in data:
        raise ConfigError("missing section", field="scenario")
    if "architectures" not in data:
        raise ConfigError("missing section", field="architectures")
    scenario = _parse_scenario(data["scenario"])
    architectures = _parse_architectures(data["architectures"])
    seeds = _parse_seeds(data.get("seeds"))
    settings = _parse_fusion(data.get("fusion"))
    schedule = _parse_blend(data.get("blend"))
    sweep, tolerance = _parse_sweep(data.get("sweep"))
    out = data.get("output_dir", "results")
    if not isinstance(out, str) or not out:
        raise ConfigError("expected a nonempty path string", field="output_dir")
    output_dir = Path(out)
    if base_dir is not None and not output_dir.is_absolute():
        output_dir = base_dir / output_dir
    return RunConfig(
        scenario=scenario,
        architectures=architectures,
        seeds=seeds,
        settings=settings,
        schedule=schedule,
        sweep=sweep,
        sweep_tolerance=tolerance,
        output_dir=output_dir,
    )


def load_config(path: str | Path) -> RunConfig:
    """Read and validate a YAML run configuration file."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config file: {exc}") from exc
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"not valid YAML: {exc}") from exc
    if data is None:
        raise ConfigError("config file is empty")
    return parse_config(data, base_dir=path.parent)

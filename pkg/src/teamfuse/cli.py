"""Command-line entry points for runs, sweeps, plots, teleop, and completion.

Exit codes: 0 success, 1 when a batch produced zero successful episodes,
2 for configuration problems.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .config import load_config
from .errors import ConfigError, TeamfuseError
from .runner import PLOT_KINDS, emit_plot_data, run_experiment, run_sweep


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="teamfuse",
        description="decision-fusion experiments for human-machine teams",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run the configured episodes")
    run_p.add_argument("--config", required=True, help="YAML run configuration")
    run_p.add_argument("--out", help="override the configured output directory")
    run_p.add_argument("--seed", type=int, help="override the starting seed")

    sweep_p = sub.add_parser("sweep", help="run the configured stressor sweep")
    sweep_p.add_argument("--config", required=True)
    sweep_p.add_argument("--out", help="override the configured output directory")

    plot_p = sub.add_parser("plot", help="emit plot-ready tabular series")
    plot_p.add_argument("kind", choices=PLOT_KINDS)
    plot_p.add_argument("--config", required=True)
    plot_p.add_argument("--out", help="directory for the tabular files")

    tele_p = sub.add_parser("teleop", help="serve a live teleoperation session")
    tele_p.add_argument("--config", required=True)
    tele_p.add_argument("--port", type=int, default=8571)

    comp_p = sub.add_parser("complete", help="complete a preference matrix file")
    comp_p.add_argument(
        "matrix",
        help="text file: 'n1 n_cols rank_hint' header, then 'row col value' entries",
    )
    comp_p.add_argument("--out", help="write the completed matrix here instead of stdout")

    return parser


def _apply_overrides(config, args):
    from dataclasses import replace

    if getattr(args, "out", None):
        config = replace(config, output_dir=Path(args.out))
    if getattr(args, "seed", None) is not None:
        config = replace(config, seeds=replace(config.seeds, start=args.seed))
    return config


def _cmd_run(args) -> int:
    config = _apply_overrides(load_config(args.config), args)
    result = run_experiment(config)
    for failure in result.failures:
        print(
            f"episode failed: {failure['architecture']} seed {failure['seed']}: "
            f"{failure['error']}",
            file=sys.stderr,
        )
    for path in result.files:
        print(path)
    return 0 if result.ok else 1


def _cmd_sweep(args) -> int:
    config = _apply_overrides(load_config(args.config), args)
    if config.sweep is None:
        raise ConfigError("missing section", field="sweep")
    surface, result = run_sweep(config)
    for path in result.files:
        print(path)
    return 0


def _cmd_plot(args) -> int:
    config = _apply_overrides(load_config(args.config), args)
    out = Path(args.out) if args.out else None
    for path in emit_plot_data(config, args.kind, out):
        print(path)
    return 0


def _cmd_teleop(args) -> int:
    from .teleop import serve_forever

    config = load_config(args.config)
    serve_forever(config, port=args.port)
    return 0


def _cmd_complete(args) -> int:
    from .completion import complete_matrix, parse_preference_matrix

    try:
        text = Path(args.matrix).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read matrix file: {exc}") from exc
    matrix = parse_preference_matrix(text)
    completed = complete_matrix(matrix)
    out_text = "\n".join(
        " ".join(repr(float(v)) for v in row) for row in completed
    ) + "\n"
    if args.out:
        Path(args.out).write_text(out_text)
        print(args.out)
    else:
        print(out_text, end="")
    return 0


_COMMANDS = {
    "run": _cmd_run,
    "sweep": _cmd_sweep,
    "plot": _cmd_plot,
    "teleop": _cmd_teleop,
    "complete": _cmd_complete,
}


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except TeamfuseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

"""
cli/main.py

Command-line entry point:

    modalshift run      [--config F] [--seed N] --out F [--trace F]
    modalshift sweep    [--config F] --sweep F [--parallelism N] --out F
    modalshift optimize [--config F] --opt F [--parallelism N] --out F
    modalshift plot     --input F --kind sweep|front --out F [--indicator NAME]

Exit status 0 when every requested file was written, 1 on any error, 2 on
usage errors. Outputs are written to <out>.partial and renamed into place.
"""

import argparse
import logging
import sys
from pathlib import Path
from typing import List, Literal, Optional, Union

from pydantic import BaseModel, Field, ValidationError

from engine.config import configure_logging, get_default_parallelism
from engine.indicators import format_csv, result_row, results_frame, traces_frame
from engine.optimizer import convergence_path, nsga2, write_convergence_csv, write_front_csv
from engine.output import write_text_atomic
from engine.simulation import InvariantViolation, run
from engine.sweep import SweepRunError, run_sweep, write_sweep_csv
from engine.models import ConfigValidationError
from cli.config_io import ConfigParseError, load_config, parse_optimize, parse_sweep
from cli.plots import DEFAULT_INDICATOR, plot_csv

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILURE = 1


# ============================================================================
# Commands
# ============================================================================

class RunCommand(BaseModel):
    command: Literal["run"] = "run"
    config_path: Optional[str] = Field(None, min_length=1)
    seed: Optional[int] = Field(None, ge=0)
    out: str = Field(..., min_length=1)
    trace: Optional[str] = Field(None, min_length=1)


class SweepCommand(BaseModel):
    command: Literal["sweep"] = "sweep"
    config_path: Optional[str] = Field(None, min_length=1)
    sweep_path: str = Field(..., min_length=1)
    parallelism: int = Field(1, ge=1)
    out: str = Field(..., min_length=1)


class OptimizeCommand(BaseModel):
    command: Literal["optimize"] = "optimize"
    config_path: Optional[str] = Field(None, min_length=1)
    opt_path: str = Field(..., min_length=1)
    parallelism: int = Field(1, ge=1)
    out: str = Field(..., min_length=1)


class PlotCommand(BaseModel):
    command: Literal["plot"] = "plot"
    input_csv: str = Field(..., min_length=1)
    kind: Literal["sweep", "front"]
    out: str = Field(..., min_length=1)
    indicator: str = DEFAULT_INDICATOR


CliCommand = Union[RunCommand, SweepCommand, OptimizeCommand, PlotCommand]


# ============================================================================
# Dispatch
# ============================================================================

def _dispatch_run(command: RunCommand) -> None:
    config = load_config(command.config_path)
    if command.seed is not None:
        config = config.model_copy(update={"seed": command.seed})
    result, state = run(config)
    write_text_atomic(command.out, format_csv(results_frame([result_row(result, config)])))
    if command.trace:
        try:
            write_text_atomic(command.trace, format_csv(traces_frame(state)))
        except OSError:
            # a failed command leaves neither file behind
            Path(command.out).unlink(missing_ok=True)
            raise
    logger.info("[CLI] run seed=%d completed=%d -> %s", config.seed, result.completed, command.out)


def _dispatch_sweep(command: SweepCommand) -> None:
    base = load_config(command.config_path)
    spec = parse_sweep(Path(command.sweep_path).read_text(encoding="utf-8"), base)
    rows = run_sweep(spec, command.parallelism)
    write_sweep_csv(rows, command.out)


def _dispatch_optimize(command: OptimizeCommand) -> None:
    base = load_config(command.config_path) if command.config_path else None
    spec = parse_optimize(Path(command.opt_path).read_text(encoding="utf-8"), base)
    front = nsga2(spec, parallelism=command.parallelism)
    write_front_csv(front, command.out)
    if spec.convergence_log:
        write_convergence_csv(front, convergence_path(command.out))


def _dispatch_plot(command: PlotCommand) -> None:
    plot_csv(command.input_csv, command.kind, command.out, command.indicator)


HANDLERS = {
    "run": _dispatch_run,
    "sweep": _dispatch_sweep,
    "optimize": _dispatch_optimize,
    "plot": _dispatch_plot,
}

REPORTED_ERRORS = (
    ConfigParseError,
    ConfigValidationError,
    SweepRunError,
    InvariantViolation,
    OSError,
    ValueError,
)


def dispatch(command: CliCommand) -> int:
    """Execute one command; failures become a one-line stderr message and exit 1."""
    try:
        HANDLERS[command.command](command)
    except REPORTED_ERRORS as exc:
        logger.error("[CLI] %s failed: %s", command.command, exc)
        print(f"modalshift {command.command}: error: {exc}", file=sys.stderr)
        return EXIT_FAILURE
    return EXIT_OK


# ============================================================================
# Argument parsing
# ============================================================================

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="modalshift",
        description="Modal shift simulation on a disrupted transit segment",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="One simulation run, one CSV row")
    p_run.add_argument("--config", help="Flat simulation config file")
    p_run.add_argument("--seed", type=int, help="Override run.seed")
    p_run.add_argument("--out", required=True, help="Result CSV")
    p_run.add_argument("--trace", help="Per-step occupancy CSV")

    p_sweep = sub.add_parser("sweep", help="Grid exploration with replications")
    p_sweep.add_argument("--config", help="Flat simulation config file (base of every run)")
    p_sweep.add_argument("--sweep", required=True, help="Sweep spec file (sweep.* keys)")
    p_sweep.add_argument("--parallelism", type=int, help="Workers (default MODALSHIFT_THREADS or 1)")
    p_sweep.add_argument("--out", required=True, help="Sweep CSV")

    p_opt = sub.add_parser("optimize", help="NSGA-II over (beta_c, beta_tau)")
    p_opt.add_argument("--config", help="Flat simulation config file (default: congested scenario)")
    p_opt.add_argument("--opt", required=True, help="Optimizer spec file (optimize.* keys)")
    p_opt.add_argument("--parallelism", type=int, help="Workers (default MODALSHIFT_THREADS or 1)")
    p_opt.add_argument("--out", required=True, help="Front CSV")

    p_plot = sub.add_parser("plot", help="SVG of a sweep or front CSV")
    p_plot.add_argument("--input", required=True, help="Sweep or front CSV")
    p_plot.add_argument("--kind", required=True, choices=["sweep", "front"])
    p_plot.add_argument("--indicator", default=DEFAULT_INDICATOR, help="Sweep indicator to draw")
    p_plot.add_argument("--out", required=True, help="SVG file")
    return parser


def to_command(args: argparse.Namespace) -> CliCommand:
    parallelism = getattr(args, "parallelism", None)
    if parallelism is None:
        parallelism = get_default_parallelism()
    if args.command == "run":
        return RunCommand(config_path=args.config, seed=args.seed, out=args.out, trace=args.trace)
    if args.command == "sweep":
        return SweepCommand(config_path=args.config, sweep_path=args.sweep,
                            parallelism=parallelism, out=args.out)
    if args.command == "optimize":
        return OptimizeCommand(config_path=args.config, opt_path=args.opt,
                               parallelism=parallelism, out=args.out)
    return PlotCommand(input_csv=args.input, kind=args.kind, out=args.out, indicator=args.indicator)


def main(argv: Optional[List[str]] = None) -> int:
    configure_logging()
    args = build_parser().parse_args(argv)
    try:
        command = to_command(args)
    except ValidationError as exc:
        first = exc.errors()[0]
        field = ".".join(str(p) for p in first["loc"])
        print(f"modalshift {args.command}: error: {field}: {first['msg']}", file=sys.stderr)
        return EXIT_FAILURE
    return dispatch(command)


if __name__ == "__main__":
    sys.exit(main())

"""Command-line entry point (``tropical-collapse`` / ``tropi``)."""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, List, Optional

from . import __version__
from .errors import BadParameter, TropicalError
from .reporting import FORMATS, ReportBuilder
from .runner import Runner

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_USAGE = 64
EXIT_INTERRUPTED = 130


class _Parser(argparse.ArgumentParser):
    """Argument parser reporting usage errors with exit code 64."""

    def error(self, message: str) -> None:  # type: ignore[override]
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _indices(text: str) -> List[float]:
    try:
        values = [float(item) for item in text.split(",") if item.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"invalid index list {text!r}") from exc
    if not values:
        raise argparse.ArgumentTypeError("index list is empty")
    return values


def _common_options() -> argparse.ArgumentParser:
    # SUPPRESS lets the flags appear before or after the subcommand
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=FORMATS, default=argparse.SUPPRESS, help="output format")
    common.add_argument("--output", type=Path, default=argparse.SUPPRESS, help="write output to a file")
    common.add_argument("--log-level", default=argparse.SUPPRESS, help="logging level (stderr)")
    common.add_argument("--tolerance", type=float, default=argparse.SUPPRESS, help="numeric tolerance")
    common.add_argument("--u", type=float, default=argparse.SUPPRESS, help="Siegel set parameter")
    common.add_argument("--workers", type=int, default=argparse.SUPPRESS, help="threads for GH restarts")
    return common


def _search_options() -> argparse.ArgumentParser:
    search = argparse.ArgumentParser(add_help=False)
    search.add_argument("--mesh", "--spacing", dest="spacing", type=float, help="net spacing")
    search.add_argument("--budget", type=int, help="correspondence search budget")
    search.add_argument("--seed", type=int, help="random seed (default 0)")
    return search


def build_parser() -> argparse.ArgumentParser:
    common = _common_options()
    search = _search_options()
    parser = _Parser(
        prog="tropical-collapse",
        description="Tropical compactifications of curve and abelian variety moduli",
        formatter_class=argparse.ArgumentDefaultsHelpFormatter,
        parents=[common],
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    commands = parser.add_subparsers(dest="command", metavar="COMMAND", required=True)

    census = commands.add_parser("census", parents=[common], help="combinatorial types of S_g")
    census.add_argument("--genus", type=int, required=True)

    homology = commands.add_parser("homology", parents=[common], help="cellular rational homology of S_g")
    homology.add_argument("--genus", type=int, required=True)
    homology.add_argument("--max-degree", type=int)

    curve = commands.add_parser("collapse-curve", parents=[common], help="GH limit of a pinching curve family")
    curve.add_argument("--input", type=Path, required=True, help="dual graph and rates")

    av = commands.add_parser("collapse-av", parents=[common], help="limit of a degenerating family of tori")
    av.add_argument("--input", type=Path, required=True, help="family document")
    av.add_argument("--rescale", choices=("diameter", "volume", "injrad"), default="diameter")

    for name, text in (("jacobian", "tropical Jacobian"), ("torelli", "diameter-1 tropical Torelli image")):
        sub = commands.add_parser(name, parents=[common], help=text)
        sub.add_argument("--input", type=Path, required=True, help="graph document")

    gh = commands.add_parser("ghdist", parents=[common, search], help="certified GH interval")
    gh.add_argument("--a", type=Path, required=True, help="first space")
    gh.add_argument("--b", type=Path, required=True, help="second space")

    reduce = commands.add_parser("reduce", parents=[common], help="reduce a period point")
    source = reduce.add_mutually_exclusive_group(required=True)
    source.add_argument("--input", type=Path, help="period point document")
    source.add_argument("--tau", help="genus 1 period, e.g. 0.3+2j")

    homotopy = commands.add_parser("homotopy", parents=[common], help="sample the contraction homotopy")
    homotopy.add_argument("--input", type=Path, required=True, help="graph or torus document")
    homotopy.add_argument("--steps", type=int, default=10)

    plot = commands.add_parser("plot-convergence", parents=[common, search], help="GH intervals along a family")
    plot.add_argument("--input", type=Path, required=True, help="family document")
    plot.add_argument("--indices", type=_indices, default=[10.0, 100.0, 1000.0])

    return parser


@dataclass(frozen=True)
class RunConfig:
    subcommand: str
    output: Optional[Path] = None
    spacing: Optional[float] = None
    budget: Optional[int] = None
    seed: int = 0
    tolerance: Optional[float] = None
    u: Optional[float] = None
    workers: Optional[int] = None
    format: str = "json"
    log_level: Optional[str] = None

    def __post_init__(self) -> None:
        for name in ("spacing", "budget", "tolerance", "u", "workers"):
            value = getattr(self, name)
            if value is not None and value <= 0:
                raise BadParameter(f"--{name} must be positive, got {value}")

    @classmethod
    def from_args(cls, args: argparse.Namespace) -> "RunConfig":
        default_format = "csv" if args.command == "plot-convergence" else "json"
        seed = getattr(args, "seed", None)
        return cls(
            subcommand=args.command,
            output=getattr(args, "output", None),
            spacing=getattr(args, "spacing", None),
            budget=getattr(args, "budget", None),
            seed=0 if seed is None else seed,
            tolerance=getattr(args, "tolerance", None),
            u=getattr(args, "u", None),
            workers=getattr(args, "workers", None),
            format=getattr(args, "format", default_format),
            log_level=getattr(args, "log_level", None),
        )

    def overrides(self) -> Dict[str, Any]:
        return {
            "spacing": self.spacing,
            "budget": self.budget,
            "seed": self.seed,
            "tolerance": self.tolerance,
            "u": self.u,
            "workers": self.workers,
            "log_level": self.log_level,
        }


def run(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE

    try:
        run_config = RunConfig.from_args(args)
        runner = Runner(run_config.overrides())
        report = runner.execute(run_config.subcommand, vars(args))
        builder = ReportBuilder(run_config.format)
        content = builder.build(report)
        if run_config.output is not None:
            runner.logger.output_saved(builder.persist(content, run_config.output))
        else:
            sys.stdout.write(content + "\n")
    except KeyboardInterrupt:
        print("interrupted", file=sys.stderr)
        return EXIT_INTERRUPTED
    except TropicalError as exc:
        print(f"error: {exc.describe()}", file=sys.stderr)
        return EXIT_INVALID
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    return EXIT_OK


def main(argv: Optional[List[str]] = None) -> None:
    raise SystemExit(run(argv))


if __name__ == "__main__":  # pragma: no cover
    main()

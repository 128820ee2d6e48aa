"""Command-line front end"""

# Copyright (C) 2026 nested_cubes contributors
#
# This program is free software; you can redistribute it and/or
# modify it under the terms of the GNU General Public License
# as published by the Free Software Foundation; either version 2
# of the License, or (at your option) any later version.
#
# This program is distributed in the hope that it will be useful,
# but WITHOUT ANY WARRANTY; without even the implied warranty of
# MERCHANTABILITY or FITNESS FOR A PARTICULAR PURPOSE.  See the
# GNU General Public License for more details.
#
# You should have received a copy of the GNU General Public License
# along with this program; if not, write to the Free Software
# Foundation, Inc., 51 Franklin Street, Fifth Floor, Boston, MA  02110-1301, USA.

import argparse
import logging
import sys
from pathlib import Path
from typing import IO, Any, Optional, Sequence

from . import __version__, classFactory
from .algorithms.utils.errors import CheckFailed, InvalidParams, NestedCubesError
from .algorithms.utils.formats import dump_json
from .processing import (
    FORMATS,
    OUTPUT,
    PASSED,
    TABLE,
    TEXT,
    ProcessingContext,
    ProcessingFeedback,
    ProcessingRegistry,
    RunConfig,
)

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_USAGE = 2

_FAMILIES = {
    "tree": "Build and validate cube trees",
    "measure": "Distribute mass over cube trees",
    "dim": "Dimension estimates and exact values",
    "check": "Property checks (exit status 1 on failure)",
}

_LOG_FORMAT = "%(levelname)s %(name)s: %(message)s"


def _add_global_options(parser: argparse.ArgumentParser, suppress: bool):
    def default(value):
        return argparse.SUPPRESS if suppress else value

    parser.add_argument("--seed", type=int, default=default(0), help="Random seed")
    parser.add_argument(
        "--threads", type=int, default=default(0), help="Worker threads, 0 for one per CPU"
    )
    parser.add_argument("--format", choices=FORMATS, default=default("text"), help="Output format")
    parser.add_argument(
        "--emit-evidence", action="store_true", default=default(False),
        help="Include all evidence rows in reports",
    )
    parser.add_argument(
        "-v", "--verbose", action="store_true", default=default(False), help="Debug logging"
    )
    parser.add_argument("-o", "--output", type=Path, default=default(None), help="Output file")


def build_parser(registry: ProcessingRegistry) -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nested-cubes",
        description="Nested cube systems, homogeneous measures and their dimensions",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    _add_global_options(parser, suppress=False)
    commands = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    families: dict[str, Any] = {}
    for provider in registry.providers():
        for alg in provider.algorithms():
            words = alg.command()
            if len(words) == 1:
                target = commands
            else:
                if words[0] not in families:
                    family = commands.add_parser(words[0], help=_FAMILIES.get(words[0]))
                    families[words[0]] = family.add_subparsers(
                        dest="subcommand", required=True, metavar="SUBCOMMAND"
                    )
                target = families[words[0]]
            sub = target.add_parser(
                words[-1],
                help=alg.displayName(),
                description=alg.shortHelpString(),
                formatter_class=argparse.RawDescriptionHelpFormatter,
            )
            for definition in alg.parameterDefinitions():
                definition.addToParser(sub)
            _add_global_options(sub, suppress=True)
            sub.set_defaults(algorithm_id=f"{provider.id()}:{alg.name()}", words=words)
    return parser


def run_config(args: argparse.Namespace) -> RunConfig:
    output: Optional[Path] = args.output.resolve() if args.output is not None else None
    if args.threads < 0:
        raise InvalidParams("--threads must be non-negative")
    return RunConfig(
        command=tuple(args.words),
        seed=args.seed,
        threads=args.threads,
        format=args.format,
        emit_evidence=args.emit_evidence,
        verbose=args.verbose,
        output=output,
    )


def write_result(result: dict[str, Any], config: RunConfig, stream: IO[str]):
    if config.format == "csv":
        if TABLE not in result:
            raise InvalidParams(f"{' '.join(config.command)} has no CSV output")
        stream.write(result[TABLE])
    elif config.format == "text" and TEXT in result:
        text = result[TEXT]
        stream.write(text if text.endswith("\n") else text + "\n")
    else:
        dump_json(result[OUTPUT], stream, version=__version__)


def _configure_logging(verbose: bool) -> logging.Handler:
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter(_LOG_FORMAT))
    log = logging.getLogger("nested_cubes")
    log.addHandler(handler)
    log.setLevel(logging.DEBUG if verbose else logging.INFO)
    return handler


def _error(message: str):
    sys.stderr.write(f"nested-cubes: error: {message}\n")


def main(
    argv: Optional[Sequence[str]] = None,
    stdin: Optional[IO[str]] = None,
    stdout: Optional[IO[str]] = None,
) -> int:
    registry = ProcessingRegistry()
    plugin = classFactory(registry)
    plugin.initGui()
    handler = None
    try:
        try:
            args = build_parser(registry).parse_args(argv)
        except SystemExit as e:
            return EXIT_OK if e.code in (0, None) else EXIT_USAGE

        try:
            config = run_config(args)
        except NestedCubesError as e:
            _error(str(e))
            return EXIT_USAGE
        handler = _configure_logging(config.verbose)

        algorithm = registry.algorithmById(args.algorithm_id)
        parameters = {
            definition.name(): getattr(args, definition.name(), None)
            for definition in algorithm.parameterDefinitions()
        }
        context = ProcessingContext(config, stdin if stdin is not None else sys.stdin)
        try:
            result = algorithm.run(parameters, context, ProcessingFeedback())
            if config.output is not None:
                with config.output.open("w", encoding="utf-8", newline="") as f:
                    write_result(result, config, f)
            else:
                write_result(result, config, stdout if stdout is not None else sys.stdout)
            if result.get(PASSED) is False:
                raise CheckFailed(f"{' '.join(config.command)} failed")
        except CheckFailed as e:
            _error(str(e))
            return EXIT_CHECK_FAILED
        except NestedCubesError as e:
            _error(str(e))
            return EXIT_USAGE
        return EXIT_OK
    finally:
        if handler is not None:
            logging.getLogger("nested_cubes").removeHandler(handler)
        plugin.unload()


if __name__ == "__main__":
    sys.exit(main())

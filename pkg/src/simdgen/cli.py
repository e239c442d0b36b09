"""Command-line driver: `simdgen generate` plus deterministic diagnostics.

Exit codes: 0 success, 1 validation/model error, 2 generation/render error,
3 I/O error, 4 bad arguments (including failed host detection).
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path

import yaml

from . import __version__
from . import pipeline as pipeline_mod
from . import render, schema, selection
from .diagnostics import INFO, WARNING, DiagnosticLog
from .errors import (
    ArgumentsError,
    DetectionError,
    GenerationError,
    InternalError,
    ModelError,
    RenderError,
    SchemaError,
    SimdgenError,
)

DATA_DIR_ENV = "SIMDGEN_DATA_DIR"

EXIT_OK = 0
EXIT_MODEL = 1
EXIT_GENERATION = 2
EXIT_IO = 3
EXIT_ARGUMENTS = 4


@dataclass
class CliConfig:
    data_dir: Path
    out_dir: Path
    template_dir: Path | None = None
    schema_path: Path | None = None
    targets: list[str] = field(default_factory=list)
    detect_host: bool = False
    requested_extensions: list[str] = field(default_factory=list)
    sizes_bits: list[int] = field(default_factory=list)
    type_filter: list[str] | None = None
    primitive_filter: list[str] | None = None
    no_tests: bool = False
    no_cmake: bool = False
    emit_plan: bool = False
    skip_validation: bool = False
    cmake_driver: bool = False
    library_name: str = "tsl"
    verbosity: int = 0
    tool_version: str = __version__


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # noqa: A003 - argparse API
        raise ArgumentsError(message)


def _split_csv(text: str) -> list[str]:
    return [part.strip() for part in text.split(",") if part.strip()]


def _split_int_csv(text: str) -> list[int]:
    out = []
    for part in _split_csv(text):
        try:
            out.append(int(part))
        except ValueError:
            raise ArgumentsError(f"expected an integer register width, got {part!r}")
    return out


def build_parser() -> _Parser:
    parser = _Parser(prog="simdgen", description=__doc__)
    parser.add_argument("--version", action="store_true", help="print tool and schema version")
    sub = parser.add_subparsers(dest="command")

    gen = sub.add_parser("generate", help="generate the library for a hardware target")
    gen.add_argument("--data", help=f"data-model directory (default: ${DATA_DIR_ENV})")
    gen.add_argument("--templates", help="structural template directory (default: built-in)")
    gen.add_argument("--schema", help="schema meta-document path (default: built-in)")
    gen.add_argument("--out", required=True, help="output directory for the generated tree")
    gen.add_argument("--targets", default="", help="comma-separated capability flags")
    gen.add_argument("--detect-host", action="store_true", help="query the host OS for flags")
    gen.add_argument(
        "--extensions",
        default="",
        help="comma-separated size-polymorphic extensions to enable by name",
    )
    gen.add_argument("--sizes", default="", help="comma-separated register widths in bits")
    gen.add_argument("--types", default=None, help="restrict generation to these base types")
    gen.add_argument(
        "--primitives",
        default=None,
        help="restrict generation to these primitives (plus their test dependencies)",
    )
    gen.add_argument("--no-tests", action="store_true", help="skip unit-test generation")
    gen.add_argument("--no-cmake", action="store_true", help="skip build-file generation")
    gen.add_argument("--emit-plan", action="store_true", help="write generation_plan.yaml")
    gen.add_argument("--skip-validation", action="store_true", help="skip schema validation")
    gen.add_argument("--cmake-driver", action="store_true", help="emit the optional CMake driver")
    gen.add_argument("--library-name", default="tsl", help="CMake target name")
    gen.add_argument("-v", "--verbose", action="count", default=0)
    gen.add_argument("-q", "--quiet", action="count", default=0)
    return parser


def config_from_args(args) -> CliConfig:
    data = args.data or os.environ.get(DATA_DIR_ENV)
    if not data:
        raise ArgumentsError(f"no data directory: pass --data or set ${DATA_DIR_ENV}")
    targets = _split_csv(args.targets)
    if targets and args.detect_host:
        raise ArgumentsError("--targets and --detect-host are mutually exclusive")
    return CliConfig(
        data_dir=Path(data),
        out_dir=Path(args.out),
        template_dir=Path(args.templates) if args.templates else None,
        schema_path=Path(args.schema) if args.schema else None,
        targets=targets,
        detect_host=args.detect_host,
        requested_extensions=_split_csv(args.extensions),
        sizes_bits=_split_int_csv(args.sizes),
        type_filter=_split_csv(args.types) if args.types is not None else None,
        primitive_filter=_split_csv(args.primitives) if args.primitives is not None else None,
        no_tests=args.no_tests,
        no_cmake=args.no_cmake,
        emit_plan=args.emit_plan,
        skip_validation=args.skip_validation,
        cmake_driver=args.cmake_driver,
        library_name=args.library_name,
        verbosity=args.verbose - args.quiet,
    )


def _exit_code_for(failure: SimdgenError) -> int:
    if isinstance(failure, (RenderError, GenerationError, InternalError)):
        return EXIT_GENERATION
    if isinstance(failure, (ArgumentsError, DetectionError)):
        return EXIT_ARGUMENTS
    if isinstance(failure, (ModelError, SchemaError)):
        return EXIT_MODEL
    return EXIT_MODEL


def _print_diagnostics(diagnostics: DiagnosticLog, verbosity: int, stream=None) -> None:
    stream = stream if stream is not None else sys.stderr
    min_level = INFO if verbosity >= 0 else WARNING
    for line in diagnostics.format_lines(min_level):
        print(line, file=stream)


def run(config: CliConfig, stderr=None) -> int:
    """Execute the full generation pipeline for one configuration."""
    state = pipeline_mod.PipelineState(config=config)
    try:
        stages = pipeline_mod.default_stages(config)
        pipeline_mod.run_pipeline(stages, state)
        if state.failure is None and not state.diagnostics.has_errors():
            written = render.write_manifest(state.manifest, config.out_dir)
            if config.emit_plan:
                plan_doc = selection.plan_to_document(state.plan, state.target)
                plan_path = config.out_dir / "generation_plan.yaml"
                with open(plan_path, "w", encoding="utf-8", newline="\n") as handle:
                    yaml.safe_dump(plan_doc, handle, sort_keys=False)
                written.append(plan_path)
            state.diagnostics.info(
                "cli", f"wrote {len(written)} files below {config.out_dir}"
            )
    except SimdgenError as exc:
        state.failure = exc
        state.diagnostics.error("cli", str(exc))
    except OSError as exc:
        state.diagnostics.error("cli", f"i/o error: {exc}")
        _print_diagnostics(state.diagnostics, config.verbosity, stderr)
        return EXIT_IO

    _print_diagnostics(state.diagnostics, config.verbosity, stderr)
    if state.failure is not None:
        return _exit_code_for(state.failure)
    if state.diagnostics.has_errors():
        return EXIT_MODEL
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.version:
            schema_version = schema.load_default_schema().version
            print(f"simdgen {__version__} (schema version {schema_version})")
            return EXIT_OK
        if args.command != "generate":
            parser.print_help(sys.stderr)
            return EXIT_ARGUMENTS
        config = config_from_args(args)
    except ArgumentsError as exc:
        print(f"ERROR cli: {exc}", file=sys.stderr)
        return EXIT_ARGUMENTS
    return run(config)


if __name__ == "__main__":
    sys.exit(main())

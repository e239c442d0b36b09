"""Pipeline composition: exchangeable generator stages over a shared state.

Each stage consumes the artifact kind the previous one produced; the chain is
type-checked before anything runs. A stage error stops the run and leaves the
diagnostics explaining why. Extension stages (test generation, build-file
generation, and the benchmark seam) register after the core chain and can be
dropped without affecting earlier stages.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

from . import buildgen, datamodel, render, schema, selection, target, testgen
from .diagnostics import DiagnosticLog
from .errors import ArgumentsError, SimdgenError


@dataclass
class PipelineState:
    config: object
    diagnostics: DiagnosticLog = field(default_factory=DiagnosticLog)
    schema: schema.Schema | None = None
    model: datamodel.DataModel | None = None
    target: target.HardwareTarget | None = None
    plan: selection.GenerationPlan | None = None
    manifest: render.FileManifest | None = None
    ordered_tests: list[testgen.TestNode] | None = None
    failure: SimdgenError | None = None


@dataclass(frozen=True)
class PipelineStage:
    name: str
    consumes: str
    produces: str
    run: Callable[[PipelineState], None]


def run_pipeline(stages: list[PipelineStage], state: PipelineState) -> PipelineState:
    """Execute the stages in order; skip the rest after the first error."""
    for previous, current in zip(stages, stages[1:]):
        if previous.produces != current.consumes:
            raise ArgumentsError(
                f"ill-typed stage chain: {previous.name!r} produces {previous.produces!r} "
                f"but {current.name!r} consumes {current.consumes!r}"
            )
    for stage in stages:
        if state.failure is not None or state.diagnostics.has_errors():
            state.diagnostics.info("pipeline", f"skipping stage {stage.name!r} after earlier error")
            continue
        try:
            stage.run(state)
        except SimdgenError as exc:
            state.failure = exc
            state.diagnostics.error(stage.name, str(exc))
    return state


def _stage_validate(state: PipelineState) -> None:
    config = state.config
    state.schema = (
        schema.load_schema_file(config.schema_path)
        if config.schema_path
        else schema.load_default_schema()
    )
    state.model = datamodel.load_data_model(
        config.data_dir, state.schema, state.diagnostics, validate=True
    )
    state.diagnostics.info(
        "validate",
        f"loaded {len(state.model.extensions)} extensions and "
        f"{sum(1 for _ in state.model.iter_primitives())} primitives",
    )


def _stage_load_unvalidated(state: PipelineState) -> None:
    config = state.config
    state.diagnostics.warning(
        "load", "schema validation skipped on request; malformed input may fail late"
    )
    state.schema = (
        schema.load_schema_file(config.schema_path)
        if config.schema_path
        else schema.load_default_schema()
    )
    state.model = datamodel.load_data_model(
        config.data_dir, state.schema, state.diagnostics, validate=False
    )


def _stage_select(state: PipelineState) -> None:
    config = state.config
    if config.detect_host:
        state.target = target.detect_host(sizes=config.sizes_bits)
        state.diagnostics.info(
            "select",
            f"host capability flags: {','.join(state.target.flag_list())}",
        )
    else:
        state.target = target.parse_target(config.targets, config.sizes_bits)
        if not config.targets:
            state.diagnostics.warning(
                "select", "no target flags given; generating the scalar baseline only"
            )
    state.plan = selection.build_plan(
        state.model,
        state.target,
        requested_extensions=config.requested_extensions,
        type_filter=config.type_filter,
        primitive_filter=config.primitive_filter,
        diagnostics=state.diagnostics,
    )
    state.diagnostics.info(
        "select",
        f"plan holds {len(state.plan.entries)} entries over "
        f"{len(state.plan.enabled_extensions)} extensions "
        f"({len(state.plan.omitted)} omissions)",
    )


def _stage_render(state: PipelineState) -> None:
    config = state.config
    templates = render.load_templates(config.template_dir)
    state.manifest = render.render_library(
        state.plan,
        templates,
        state.model,
        state.target,
        state.diagnostics,
        tool_version=config.tool_version,
    )
    state.diagnostics.info("render", f"rendered {len(state.manifest.files)} library files")


def _stage_testgen(state: PipelineState) -> None:
    config = state.config
    templates = render.load_templates(config.template_dir)
    nodes = testgen.collect_tests(state.plan, state.model, state.diagnostics)
    graph = testgen.build_dependency_graph(nodes)
    state.ordered_tests = testgen.order_tests(graph)
    addition = testgen.render_tests(
        state.ordered_tests,
        templates,
        state.model,
        state.target,
        state.diagnostics,
        tool_version=config.tool_version,
    )
    for f in addition.files:
        state.manifest.add(f.path, f.content, f.role)
    state.diagnostics.info(
        "testgen", f"generated {len(state.ordered_tests)} test cases in dependency order"
    )


def _stage_buildgen(state: PipelineState) -> None:
    config = state.config
    templates = render.load_templates(config.template_dir)
    build_config = buildgen.BuildConfig(
        library_name=config.library_name,
        test_target_enabled=not config.no_tests,
        emit_cmake_driver=config.cmake_driver,
    )
    addition = buildgen.render_build_files(
        state.manifest,
        state.plan,
        build_config,
        templates,
        state.model,
        state.diagnostics,
        tool_version=config.tool_version,
    )
    for f in addition.files:
        state.manifest.add(f.path, f.content, f.role)


def _stage_benchmark_seam(state: PipelineState) -> None:
    # Registration seam for benchmark-driven variant assessment; intentionally
    # a no-op in the core generator.
    state.diagnostics.info("benchgen", "benchmark generation seam: nothing to do")


def default_stages(config) -> list[PipelineStage]:
    """The core chain plus the extension stages the config asks for."""
    stages = [
        PipelineStage(
            name="load" if config.skip_validation else "validate",
            consumes="documents",
            produces="model",
            run=_stage_load_unvalidated if config.skip_validation else _stage_validate,
        ),
        PipelineStage(name="select", consumes="model", produces="plan", run=_stage_select),
        PipelineStage(name="render", consumes="plan", produces="manifest", run=_stage_render),
    ]
    if not config.no_tests:
        stages.append(
            PipelineStage(name="testgen", consumes="manifest", produces="manifest", run=_stage_testgen)
        )
    if not config.no_cmake:
        stages.append(
            PipelineStage(name="buildgen", consumes="manifest", produces="manifest", run=_stage_buildgen)
        )
    if getattr(config, "benchmark_seam", False):
        stages.append(
            PipelineStage(name="benchgen", consumes="manifest", produces="manifest", run=_stage_benchmark_seam)
        )
    return stages

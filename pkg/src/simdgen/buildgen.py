"""Build-environment file generation for the emitted library tree.

Emits a CMake file that declares a header-only interface library over exactly
the files of the manifest (no globbing) plus, when enabled, a test executable
over the generated test sources. Architecture switches are the union of the
mapped capability flags of all enabled extensions and their chosen
definitions.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

from .datamodel import DataModel, model_fingerprint
from .diagnostics import DiagnosticLog
from .errors import InternalError
from .render import (
    ROLE_BUILD,
    ROLE_TEST,
    FileManifest,
    TemplateSet,
    make_banner,
    render_text,
    write_manifest,
)
from .selection import GenerationPlan

STAGE = "buildgen"


@dataclass
class BuildConfig:
    library_name: str = "tsl"
    cxx_standard: int = 17
    test_target_enabled: bool = True
    emit_cmake_driver: bool = False
    extension_options: dict[str, list[str]] | None = None


def arch_options_by_extension(
    plan: GenerationPlan, diagnostics: DiagnosticLog | None = None
) -> dict[str, list[str]]:
    """Compiler options per enabled extension, from its arch_flag_map.

    Covers the extension's base flags plus every flag required by a chosen
    definition; flags without a mapping are skipped with a warning.
    """
    options: dict[str, list[str]] = {}
    for extension in plan.enabled_extensions:
        needed = set(extension.lscpu_flags)
        for entry in plan.entries:
            if entry.extension is extension:
                needed |= entry.definition.lscpu_flags
        mapped: list[str] = []
        for flag in sorted(needed):
            option = extension.arch_flag_map.get(flag)
            if option is None:
                if diagnostics is not None:
                    diagnostics.warning(
                        STAGE,
                        f"extension {extension.extension_name!r}: no compiler option "
                        f"mapping for required flag {flag!r}; ignoring it",
                    )
                continue
            if option not in mapped:
                mapped.append(option)
        options[extension.extension_name] = mapped
    return options


def _merged_options(per_extension: dict[str, list[str]]) -> list[str]:
    merged: list[str] = []
    for name in sorted(per_extension):
        for option in per_extension[name]:
            if option not in merged:
                merged.append(option)
    return merged


def render_build_files(
    manifest: FileManifest,
    plan: GenerationPlan,
    config: BuildConfig,
    templates: TemplateSet,
    model: DataModel | None = None,
    diagnostics: DiagnosticLog | None = None,
    tool_version: str = "0",
) -> FileManifest:
    """Render the CMake files for an already-rendered library manifest."""
    per_extension = (
        config.extension_options
        if config.extension_options is not None
        else arch_options_by_extension(plan, diagnostics)
    )
    header_files = [
        f.path
        for f in manifest.files
        if f.role in ("extension-header", "declaration", "definition", "umbrella")
    ]
    test_sources = [f.path for f in manifest.by_role(ROLE_TEST) if f.path.endswith(".cpp")]
    if not header_files:
        raise InternalError("emit_build_files requires the library manifest to be rendered first")

    banner = make_banner(
        model_fingerprint(model) if model is not None else "unknown", tool_version, comment="#"
    )
    context = {
        "banner": banner,
        "library_name": config.library_name,
        "cxx_standard": config.cxx_standard,
        "arch_options": " ".join(_merged_options(per_extension)),
        "header_files": sorted(header_files),
        "test_sources": sorted(test_sources),
        "test_target_enabled": config.test_target_enabled and bool(test_sources),
    }
    addition = FileManifest()
    content = render_text(templates.aux_template("cmakelists.txt.j2"), context, "CMakeLists.txt")
    addition.add("CMakeLists.txt", content, ROLE_BUILD)
    if config.emit_cmake_driver:
        driver = render_text(
            templates.aux_template("cmake_driver.cmake.j2"), {"banner": banner}, "cmake driver"
        )
        addition.add("tsl_generate.cmake", driver, ROLE_BUILD)
    return addition


def emit_build_files(
    manifest: FileManifest,
    plan: GenerationPlan,
    config: BuildConfig,
    outdir: Path | str,
    templates: TemplateSet,
    model: DataModel | None = None,
    diagnostics: DiagnosticLog | None = None,
    tool_version: str = "0",
) -> FileManifest:
    addition = render_build_files(manifest, plan, config, templates, model, diagnostics, tool_version)
    write_manifest(addition, outdir)
    return addition

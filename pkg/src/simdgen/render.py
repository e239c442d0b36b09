"""Two-stage template rendering of the SIMD library headers.

Stage one turns every chosen definition's implementation snippet into
concrete source text for one (base type, register width) pair. Stage two
inserts those texts into the structural templates that lay out extension
headers, primitive declarations, definition headers, and the umbrella header.
The structural templates carry no extension-specific source; everything
hardware-specific originates from the data model.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from pathlib import Path, PurePosixPath

import jinja2

from .datamodel import (
    BASE_TYPE_BYTE_WIDTH,
    BASE_TYPE_UNIVERSE,
    DataModel,
    DefinitionSpec,
    ExtensionSpec,
    PrimitiveSpec,
    model_fingerprint,
)
from .diagnostics import DiagnosticLog
from .errors import InternalError, RenderError
from .selection import GenerationPlan, PlanEntry
from .target import HardwareTarget

STAGE = "render"

ROLE_EXTENSION = "extension-header"
ROLE_DECLARATION = "declaration"
ROLE_DEFINITION = "definition"
ROLE_UMBRELLA = "umbrella"
ROLE_TEST = "test"
ROLE_BUILD = "build"

ROLES = (ROLE_EXTENSION, ROLE_DECLARATION, ROLE_DEFINITION, ROLE_UMBRELLA, ROLE_TEST, ROLE_BUILD)

UMBRELLA_PATH = "include/tsl/tsl.hpp"

# Semantic parameter/return type tokens, resolved against the SRU at render
# time. Unknown tokens pass through as raw C++ scalar types.
TYPE_TOKEN_MAP = {
    "register_t": "typename Vec::register_type",
    "mask_t": "typename Vec::mask_type",
    "imask_t": "typename Vec::imask_type",
    "base_t": "typename Vec::base_type",
    "const base_t*": "const typename Vec::base_type*",
    "base_t*": "typename Vec::base_type*",
    "size_t": "std::size_t",
}

_environment = jinja2.Environment(
    undefined=jinja2.StrictUndefined,
    keep_trailing_newline=True,
    autoescape=False,
)


def resolve_ctype_token(token: str) -> str:
    return TYPE_TOKEN_MAP.get(token, token)


def render_text(source: str, context: dict, where: str) -> str:
    """Render one template string, mapping engine errors to RenderError."""
    try:
        template = _environment.from_string(source)
        return template.render(context)
    except jinja2.UndefinedError as exc:
        raise RenderError(f"{where}: unresolved name: {exc.message}") from exc
    except jinja2.TemplateSyntaxError as exc:
        raise RenderError(f"{where}: template syntax error at line {exc.lineno}: {exc.message}") from exc


def check_template_parses(source: str, where: str) -> None:
    try:
        _environment.parse(source)
    except jinja2.TemplateSyntaxError as exc:
        raise RenderError(f"{where}: template syntax error at line {exc.lineno}: {exc.message}") from exc


@dataclass(frozen=True)
class TemplateSet:
    extension_template: str
    primitive_declaration_template: str
    primitive_definition_template: str
    umbrella_header_template: str
    license_header: str
    directory: Path

    def aux_template(self, name: str) -> str:
        path = self.directory / name
        if not path.is_file():
            raise RenderError(f"template {name!r} not found in {self.directory}")
        source = path.read_text(encoding="utf-8")
        check_template_parses(source, str(path))
        return source


def default_template_dir() -> Path:
    return Path(__file__).parent / "resources" / "templates"


def load_templates(template_dir: Path | str | None = None) -> TemplateSet:
    directory = Path(template_dir) if template_dir is not None else default_template_dir()
    if not directory.is_dir():
        raise RenderError(f"template directory {directory} does not exist")

    def read(name: str) -> str:
        path = directory / name
        if not path.is_file():
            raise RenderError(f"required template {name!r} missing from {directory}")
        source = path.read_text(encoding="utf-8")
        check_template_parses(source, str(path))
        return source

    license_path = directory / "license_header.txt"
    license_header = license_path.read_text(encoding="utf-8") if license_path.is_file() else ""
    return TemplateSet(
        extension_template=read("extension.hpp.j2"),
        primitive_declaration_template=read("declarations.hpp.j2"),
        primitive_definition_template=read("definitions.hpp.j2"),
        umbrella_header_template=read("umbrella.hpp.j2"),
        license_header=license_header,
        directory=directory,
    )


@dataclass(frozen=True)
class ManifestFile:
    path: str
    content: str
    role: str


@dataclass
class FileManifest:
    files: list[ManifestFile] = field(default_factory=list)

    def add(self, path: str, content: str, role: str) -> None:
        if role not in ROLES:
            raise InternalError(f"unknown manifest role {role!r}")
        posix = PurePosixPath(path)
        if posix.is_absolute() or ".." in posix.parts:
            raise InternalError(f"manifest paths must be relative: {path!r}")
        if any(f.path == str(posix) for f in self.files):
            raise InternalError(f"duplicate manifest path {path!r}")
        if "{{" in content or "{%" in content:
            raise RenderError(f"{path}: template delimiters survived rendering")
        self.files.append(ManifestFile(path=str(posix), content=content, role=role))

    def paths(self) -> list[str]:
        return [f.path for f in self.files]

    def by_role(self, role: str) -> list[ManifestFile]:
        return [f for f in self.files if f.role == role]

    def get(self, path: str) -> ManifestFile:
        for f in self.files:
            if f.path == path:
                return f
        raise KeyError(path)


def write_manifest(manifest: FileManifest, outdir: Path | str) -> list[Path]:
    """Write all manifest files below outdir (UTF-8, LF, trailing newline)."""
    outdir = Path(outdir)
    written = []
    for f in manifest.files:
        full = outdir / f.path
        full.parent.mkdir(parents=True, exist_ok=True)
        content = f.content if f.content.endswith("\n") else f.content + "\n"
        with open(full, "w", encoding="utf-8", newline="\n") as handle:
            handle.write(content)
        written.append(full)
    return written


def _sanitize_identifier(text: str) -> str:
    return re.sub(r"[^0-9A-Za-z]", "_", text)


def include_guard(relative_path: str) -> str:
    return "TSL_" + _sanitize_identifier(relative_path).upper()


def make_banner(fingerprint: str, tool_version: str, comment: str = "//") -> str:
    return (
        f"{comment} Auto-generated file; do not edit.\n"
        f"{comment} Generator: simdgen {tool_version}, data-model fingerprint {fingerprint}."
    )


def elements_per_register(ctype: str, size_bits: int) -> int:
    lane_bits = 8 * BASE_TYPE_BYTE_WIDTH[ctype]
    if size_bits % lane_bits != 0 or size_bits < lane_bits:
        raise InternalError(f"register width {size_bits} incompatible with {ctype}")
    return size_bits // lane_bits


def build_render_context(
    extension: ExtensionSpec,
    primitive: PrimitiveSpec | None = None,
    ctype: str | None = None,
    size_bits: int | None = None,
    target: HardwareTarget | None = None,
) -> dict:
    """Assemble the stage-one data model for one (extension, type, width).

    Custom extension fields are flattened in first so user data (e.g.
    intrinsic suffix tables) is addressable by name; the well-known fields
    always win on collision. Passing ``size_bits=None`` produces a symbolic
    context that deliberately lacks width-derived values.
    """
    context: dict = dict(extension.custom_fields)
    context.update(
        vendor=extension.vendor,
        extension_name=extension.extension_name,
        lscpu_flags=sorted(extension.lscpu_flags),
        includes=list(extension.includes),
        default_size_bits=extension.default_size_bits,
        arch_flag_map=dict(extension.arch_flag_map),
    )
    if primitive is not None:
        context.update(
            primitive_name=primitive.primitive_name,
            functor_name=primitive.functor_name,
            category=primitive.category,
            brief_description=primitive.brief_description,
            return_ctype=primitive.return_ctype_token,
            parameters=[
                {
                    "name": p.name,
                    "ctype": p.ctype_token,
                    "attributes": p.attributes,
                    "declaration_attributes": p.declaration_attributes,
                    "description": p.description,
                }
                for p in primitive.parameters
            ],
            parameter_names=[p.name for p in primitive.parameters],
        )
    if ctype is not None:
        context["ctype"] = ctype
        if size_bits is not None:
            context["register_size_bits"] = size_bits
            context["vec_elem_count"] = elements_per_register(ctype, size_bits)
    if target is not None:
        context["target_flags"] = target.flag_list()
    return context


def resolve_extension_types(extension: ExtensionSpec, ctype: str, size_bits: int | None) -> dict:
    """Render register/mask/integral-mask type expressions for one base type.

    Expressions are rendered in sequence so later ones can reference the
    earlier results (e.g. a mask type equal to the register type).
    """
    where = f"extension {extension.extension_name}, ctype {ctype}"
    context = build_render_context(extension, ctype=ctype, size_bits=size_bits)
    register_type = render_text(extension.register_type_expr, context, where + " (register type)")
    context["register_type"] = register_type
    mask_type = render_text(extension.mask_type_expr, context, where + " (mask type)")
    context["mask_type"] = mask_type
    imask_type = render_text(extension.imask_type_expr, context, where + " (integral mask type)")
    return {"register_type": register_type, "mask_type": mask_type, "imask_type": imask_type}


def render_inner(definition: DefinitionSpec, context: dict, where: str = "") -> str:
    """Stage one: render a definition's implementation snippet to source text."""
    where = where or (
        f"definition for {context.get('primitive_name', '?')} on "
        f"{definition.target_extension}, ctype {context.get('ctype', '?')}"
    )
    body = render_text(definition.implementation, context, where)
    lines = [line.rstrip() for line in body.splitlines()]
    while lines and not lines[0]:
        lines.pop(0)
    while lines and not lines[-1]:
        lines.pop()
    return "\n".join(lines)


def indent_block(text: str, prefix: str) -> str:
    return "\n".join(prefix + line if line else "" for line in text.splitlines())


def _default_size_expr(extension: ExtensionSpec) -> str:
    if extension.size_per_lane:
        return "sizeof(BaseType) * 8"
    if extension.is_size_polymorphic:
        return ""
    return str(extension.default_size_bits)


def _size_constraint(extension: ExtensionSpec) -> tuple[str, str]:
    if extension.size_per_lane:
        return (
            "VectorSizeBits == sizeof(BaseType) * 8",
            f"{extension.extension_name} registers hold exactly one element",
        )
    if extension.is_size_polymorphic:
        return (
            "(VectorSizeBits >= sizeof(BaseType) * 8) && (VectorSizeBits % (sizeof(BaseType) * 8) == 0)",
            f"{extension.extension_name} register width must be a multiple of the element width",
        )
    return (
        f"VectorSizeBits == {extension.default_size_bits}",
        f"{extension.extension_name} is generated for {extension.default_size_bits}-bit registers",
    )


def extension_header_path(extension: ExtensionSpec) -> str:
    vendor = _sanitize_identifier(extension.vendor.lower())
    return f"include/tsl/generated/extensions/{vendor}/{extension.extension_name}.hpp"


def declaration_header_path(category: str) -> str:
    return f"include/tsl/generated/declarations/{category}.hpp"


def definition_header_path(category: str, extension_name: str) -> str:
    return f"include/tsl/generated/definitions/{category}/{category}_{extension_name}.hpp"


def render_extension(
    extension: ExtensionSpec,
    sizes: list[int],
    templates: TemplateSet,
    banner: str = "",
) -> str:
    """Stage two: the SRU header defining one extension's class template."""
    specializations = []
    for ctype in BASE_TYPE_UNIVERSE:
        if extension.is_size_polymorphic:
            size: int | None = None
        elif extension.size_per_lane:
            size = 8 * BASE_TYPE_BYTE_WIDTH[ctype]
        else:
            size = extension.default_size_bits
        types = resolve_extension_types(extension, ctype, size)
        specializations.append({"ctype": ctype, **types})

    constraint_expr, constraint_message = _size_constraint(extension)
    path = extension_header_path(extension)
    context = {
        "license_header": templates.license_header,
        "banner": banner,
        "include_guard": include_guard(path),
        "includes": list(extension.includes),
        "preamble": str(extension.custom_fields.get("preamble", "")).rstrip(),
        "extension_name": extension.extension_name,
        "extension_name_upper": _sanitize_identifier(extension.extension_name).upper(),
        "type_specializations": specializations,
        "default_size_expr": _default_size_expr(extension),
        "is_size_polymorphic_str": "true" if extension.is_size_polymorphic else "false",
        "flags_joined": ",".join(sorted(extension.lscpu_flags)),
        "generated_widths": ", ".join(str(s) for s in sorted(set(sizes))),
        "size_constraint_expr": constraint_expr,
        "size_constraint_message": constraint_message,
    }
    return render_text(
        templates.extension_template, context, f"extension header {extension.extension_name}"
    )


def _parameter_declaration(param: dict, for_dispatch: bool) -> str:
    pieces = []
    if param["attributes"]:
        pieces.append(param["attributes"])
    pieces.append(resolve_ctype_token(param["ctype"]))
    pieces.append(param["name"])
    text = " ".join(pieces)
    if for_dispatch and param["declaration_attributes"]:
        text += f" {param['declaration_attributes']}"
    return text


def _primitive_view(primitive: PrimitiveSpec) -> dict:
    params = [
        {
            "name": p.name,
            "ctype": p.ctype_token,
            "attributes": p.attributes,
            "declaration_attributes": p.declaration_attributes,
        }
        for p in primitive.parameters
    ]
    return_type = resolve_ctype_token(primitive.return_ctype_token)
    return {
        "primitive_name": primitive.primitive_name,
        "functor_name": primitive.functor_name,
        "helper_name": f"{primitive.functor_name}_impl",
        "brief_description": primitive.brief_description,
        "return_type": return_type,
        "nodiscard": return_type != "void",
        "dispatch_params": ", ".join(_parameter_declaration(p, True) for p in params),
        "definition_params": ", ".join(_parameter_declaration(p, False) for p in params),
        "call_args": ", ".join(p["name"] for p in params),
    }


def _render_declaration_file(
    category: str,
    primitives: list[PrimitiveSpec],
    templates: TemplateSet,
    banner: str,
) -> str:
    path = declaration_header_path(category)
    context = {
        "license_header": templates.license_header,
        "banner": banner,
        "include_guard": include_guard(path),
        "category": category,
        "primitives": [_primitive_view(p) for p in primitives],
    }
    return render_text(
        templates.primitive_declaration_template, context, f"declarations for category {category}"
    )


def _entry_view(entry: PlanEntry, target: HardwareTarget | None) -> dict:
    primitive = entry.primitive
    view = _primitive_view(primitive)
    vec_type = f"{entry.extension.extension_name}<{entry.ctype}, {entry.size_bits}>"
    context = build_render_context(
        entry.extension, primitive, entry.ctype, entry.size_bits, target
    )
    where = (
        f"primitive {primitive.primitive_name}, extension {entry.extension.extension_name}, "
        f"ctype {entry.ctype}, width {entry.size_bits}"
    )
    body = indent_block(render_inner(entry.definition, context, where), " " * 8)
    return {
        "primitive_name": primitive.primitive_name,
        "helper_name": view["helper_name"],
        "vec_type": vec_type,
        "return_type": view["return_type"],
        "params": view["definition_params"],
        "call_args": view["call_args"],
        "ctype": entry.ctype,
        "size_bits": entry.size_bits,
        "extension_name": entry.extension.extension_name,
        "flags_joined": ",".join(sorted(entry.definition.lscpu_flags)),
        "is_native": entry.is_native,
        "is_native_str": "true" if entry.is_native else "false",
        "body": body,
    }


def _render_definition_file(
    category: str,
    extension_name: str,
    entries: list[PlanEntry],
    templates: TemplateSet,
    target: HardwareTarget | None,
    banner: str,
) -> str:
    path = definition_header_path(category, extension_name)
    context = {
        "license_header": templates.license_header,
        "banner": banner,
        "include_guard": include_guard(path),
        "category": category,
        "extension_name": extension_name,
        "entries": [_entry_view(e, target) for e in entries],
    }
    return render_text(
        templates.primitive_definition_template,
        context,
        f"definitions for category {category}, extension {extension_name}",
    )


def render_primitive(
    primitive: PrimitiveSpec,
    entries: list[PlanEntry],
    templates: TemplateSet,
    target: HardwareTarget | None = None,
    diagnostics: DiagnosticLog | None = None,
) -> tuple[str, dict[str, str]]:
    """Render one primitive's declaration block and per-extension definitions."""
    foreign = [e for e in entries if e.primitive is not primitive]
    if foreign:
        raise InternalError("render_primitive received entries of a different primitive")
    if not entries and diagnostics is not None:
        diagnostics.warning(
            STAGE,
            f"primitive {primitive.primitive_name!r} has no admissible definition "
            "for the target; emitting declaration only",
        )
    declaration = _render_declaration_file(primitive.category, [primitive], templates, "")
    definitions: dict[str, str] = {}
    by_extension: dict[str, list[PlanEntry]] = {}
    for entry in entries:
        by_extension.setdefault(entry.extension.extension_name, []).append(entry)
    for extension_name in sorted(by_extension):
        definitions[extension_name] = _render_definition_file(
            primitive.category, extension_name, by_extension[extension_name], templates, target, ""
        )
    return declaration, definitions


def render_library(
    plan: GenerationPlan,
    templates: TemplateSet,
    model: DataModel,
    target: HardwareTarget | None = None,
    diagnostics: DiagnosticLog | None = None,
    tool_version: str = "0",
) -> FileManifest:
    """Assemble the full library manifest (pure; no filesystem access)."""
    banner = make_banner(model_fingerprint(model), tool_version)
    manifest = FileManifest()

    considered = {e.primitive.primitive_name for e in plan.entries}
    considered.update(o.primitive_name for o in plan.omitted)

    extension_order = sorted(plan.enabled_extensions, key=lambda e: e.extension_name)
    extension_paths = []
    for extension in extension_order:
        sizes = sorted(
            {e.size_bits for e in plan.entries if e.extension is extension}
        )
        content = render_extension(extension, sizes, templates, banner)
        path = extension_header_path(extension)
        manifest.add(path, content, ROLE_EXTENSION)
        extension_paths.append(path)

    by_category: dict[str, list[PrimitiveSpec]] = {}
    for primitive in model.iter_primitives():
        if primitive.primitive_name in considered:
            by_category.setdefault(primitive.category, []).append(primitive)
    declaration_paths = []
    for category in sorted(by_category):
        primitives = sorted(by_category[category], key=lambda p: p.primitive_name)
        for primitive in primitives:
            if not any(e.primitive is primitive for e in plan.entries) and diagnostics is not None:
                diagnostics.warning(
                    STAGE,
                    f"primitive {primitive.primitive_name!r} has no admissible definition "
                    "for the target; emitting declaration only",
                )
        content = _render_declaration_file(category, primitives, templates, banner)
        path = declaration_header_path(category)
        manifest.add(path, content, ROLE_DECLARATION)
        declaration_paths.append(path)

    grouped: dict[tuple[str, str], list[PlanEntry]] = {}
    for entry in plan.entries:
        key = (entry.primitive.category, entry.extension.extension_name)
        grouped.setdefault(key, []).append(entry)
    definition_paths = []
    for category, extension_name in sorted(grouped):
        content = _render_definition_file(
            category, extension_name, grouped[(category, extension_name)], templates, target, banner
        )
        path = definition_header_path(category, extension_name)
        manifest.add(path, content, ROLE_DEFINITION)
        definition_paths.append(path)

    umbrella_context = {
        "license_header": templates.license_header,
        "banner": banner,
        "extension_includes": [_relative_to_umbrella(p) for p in extension_paths],
        "declaration_includes": [_relative_to_umbrella(p) for p in declaration_paths],
        "definition_includes": [_relative_to_umbrella(p) for p in definition_paths],
    }
    umbrella = render_text(templates.umbrella_header_template, umbrella_context, "umbrella header")
    manifest.add(UMBRELLA_PATH, umbrella, ROLE_UMBRELLA)
    return manifest


def _relative_to_umbrella(path: str) -> str:
    prefix = "include/tsl/"
    if not path.startswith(prefix):
        raise InternalError(f"unexpected header path {path!r}")
    return path[len(prefix):]


def emit_library(
    plan: GenerationPlan,
    templates: TemplateSet,
    outdir: Path | str,
    model: DataModel,
    target: HardwareTarget | None = None,
    diagnostics: DiagnosticLog | None = None,
    tool_version: str = "0",
) -> FileManifest:
    """Render the library and write it below outdir.

    Rendering happens fully in memory first, so a render error never leaves a
    partially written tree behind.
    """
    manifest = render_library(plan, templates, model, target, diagnostics, tool_version)
    write_manifest(manifest, outdir)
    return manifest

"""Relevance filtering and variant selection.

Decides which extensions, primitives, and implementation variants enter the
generated library for a given hardware target. Among admissible definitions
the one requiring the most capability flags wins; ties are broken by the
shortest implementation, then by input order (with a warning).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .datamodel import (
    BASE_TYPE_UNIVERSE,
    BASE_TYPE_BYTE_WIDTH,
    DataModel,
    DefinitionSpec,
    ExtensionSpec,
    PrimitiveSpec,
)
from .diagnostics import DiagnosticLog
from .errors import ArgumentsError, InternalError, ModelError
from .target import HardwareTarget

STAGE = "selection"


@dataclass(frozen=True)
class PlanEntry:
    primitive: PrimitiveSpec
    extension: ExtensionSpec
    ctype: str
    size_bits: int
    definition: DefinitionSpec
    score: int
    is_native: bool

    def key(self) -> tuple[str, str, str, int]:
        return (
            self.primitive.primitive_name,
            self.extension.extension_name,
            self.ctype,
            self.size_bits,
        )

    def sort_key(self) -> tuple:
        return (
            self.primitive.category,
            self.primitive.primitive_name,
            self.extension.extension_name,
            self.ctype,
            self.size_bits,
        )


@dataclass(frozen=True)
class OmittedEntry:
    category: str
    primitive_name: str
    extension_name: str
    ctype: str
    reason: str


@dataclass
class GenerationPlan:
    entries: list[PlanEntry] = field(default_factory=list)
    omitted: list[OmittedEntry] = field(default_factory=list)
    enabled_extensions: list[ExtensionSpec] = field(default_factory=list)

    def entries_for(self, extension_name: str | None = None, primitive_name: str | None = None) -> list[PlanEntry]:
        out = self.entries
        if extension_name is not None:
            out = [e for e in out if e.extension.extension_name == extension_name]
        if primitive_name is not None:
            out = [e for e in out if e.primitive.primitive_name == primitive_name]
        return out


def filter_extensions(
    model: DataModel,
    target: HardwareTarget,
    requested_extensions: Iterable[str] = (),
    diagnostics: DiagnosticLog | None = None,
) -> list[ExtensionSpec]:
    """Return the extensions enabled for the target.

    A fixed-size extension is enabled when its base flag requirements are a
    subset of the target flags (the flag-free scalar baseline is therefore
    always enabled). Size-polymorphic extensions are enabled only when
    requested explicitly by name.
    """
    requested = {name.strip().lower() for name in requested_extensions}
    known = {e.extension_name for e in model.extensions}
    for name in sorted(requested - known):
        if diagnostics is not None:
            diagnostics.warning(STAGE, f"requested extension {name!r} is not part of the data model")
    enabled = []
    for ext in model.extensions:
        if ext.is_size_polymorphic:
            if ext.extension_name in requested:
                enabled.append(ext)
        elif ext.lscpu_flags <= target.flags:
            enabled.append(ext)
    return enabled


def admissible_definitions(
    primitive: PrimitiveSpec,
    extension: ExtensionSpec,
    ctype: str,
    target: HardwareTarget,
) -> list[DefinitionSpec]:
    """All definitions usable for (primitive, extension, ctype), in input order."""
    return [
        d
        for d in primitive.definitions
        if d.target_extension == extension.extension_name
        and ctype in d.ctypes
        and d.lscpu_flags <= target.flags
    ]


def effective_line_count(implementation: str) -> int:
    """Number of non-blank lines after trimming per-line whitespace."""
    return sum(1 for line in implementation.splitlines() if line.strip())


def select_variant(
    candidates: Sequence[DefinitionSpec],
    diagnostics: DiagnosticLog | None = None,
    context: str = "",
) -> DefinitionSpec:
    """Pick the most specialized definition from non-empty admissible candidates."""
    if not candidates:
        raise InternalError("select_variant called without candidates")
    best_score = max(len(d.lscpu_flags) for d in candidates)
    scored = [d for d in candidates if len(d.lscpu_flags) == best_score]
    if len(scored) == 1:
        return scored[0]
    shortest = min(effective_line_count(d.implementation) for d in scored)
    shortest_candidates = [d for d in scored if effective_line_count(d.implementation) == shortest]
    if len(shortest_candidates) > 1 and diagnostics is not None:
        diagnostics.warning(
            STAGE,
            f"{context}: {len(shortest_candidates)} definitions tie on score and line count; "
            "keeping the first in input order",
        )
    return shortest_candidates[0]


def _check_known_extensions(model: DataModel, diagnostics: DiagnosticLog | None) -> None:
    known = {e.extension_name for e in model.extensions}
    problems = []
    for primitive in model.iter_primitives():
        for i, definition in enumerate(primitive.definitions):
            if definition.target_extension not in known:
                msg = (
                    f"primitive {primitive.primitive_name!r}: definitions[{i}] targets "
                    f"unknown extension {definition.target_extension!r}"
                )
                problems.append(msg)
                if diagnostics is not None:
                    diagnostics.error(STAGE, msg)
    if problems:
        raise ModelError("\n".join(problems))


def expand_primitive_filter(model: DataModel, names: Iterable[str]) -> set[str]:
    """Close a primitive name set over the test `requires` edges.

    Keeps generated tests self-contained: whatever a selected primitive's
    tests depend on is pulled into the generated set as well.
    """
    all_names = {p.primitive_name for p in model.iter_primitives()}
    requested = set(names)
    unknown = sorted(requested - all_names)
    if unknown:
        raise ArgumentsError(f"unknown primitive names in filter: {unknown}")
    closed: set[str] = set()
    frontier = list(requested)
    while frontier:
        name = frontier.pop()
        if name in closed:
            continue
        closed.add(name)
        primitive = model.primitive_by_name(name)
        for test in primitive.tests:
            for dep in test.requires:
                if dep in all_names and dep not in closed:
                    frontier.append(dep)
    return closed


def build_plan(
    model: DataModel,
    target: HardwareTarget,
    requested_extensions: Iterable[str] = (),
    type_filter: Iterable[str] | None = None,
    primitive_filter: Iterable[str] | None = None,
    diagnostics: DiagnosticLog | None = None,
) -> GenerationPlan:
    """Resolve every (primitive, extension, ctype, size) to a chosen definition."""
    _check_known_extensions(model, diagnostics)
    enabled = filter_extensions(model, target, requested_extensions, diagnostics)

    allowed_types: set[str] | None = None
    if type_filter is not None:
        allowed_types = set(type_filter)
        unknown_types = sorted(allowed_types - set(BASE_TYPE_UNIVERSE))
        if unknown_types:
            raise ArgumentsError(f"unknown base types in filter: {unknown_types}")

    allowed_primitives: set[str] | None = None
    if primitive_filter is not None:
        allowed_primitives = expand_primitive_filter(model, primitive_filter)

    plan = GenerationPlan(enabled_extensions=enabled)
    primitives = sorted(
        model.iter_primitives(), key=lambda p: (p.category, p.primitive_name)
    )
    for primitive in primitives:
        if allowed_primitives is not None and primitive.primitive_name not in allowed_primitives:
            continue
        ctypes = primitive.supported_ctypes()
        if allowed_types is not None:
            ctypes = tuple(c for c in ctypes if c in allowed_types)
        for extension in enabled:
            for ctype in ctypes:
                candidates = admissible_definitions(primitive, extension, ctype, target)
                if not candidates:
                    plan.omitted.append(
                        OmittedEntry(
                            category=primitive.category,
                            primitive_name=primitive.primitive_name,
                            extension_name=extension.extension_name,
                            ctype=ctype,
                            reason="no admissible definition",
                        )
                    )
                    continue
                sizes = extension.sizes_for(ctype, target.requested_sizes_bits)
                produced = False
                for size in sizes:
                    sized = [
                        d
                        for d in candidates
                        if not d.vector_length_bits or size in d.vector_length_bits
                    ]
                    if not sized:
                        continue
                    context = f"{primitive.primitive_name}/{extension.extension_name}/{ctype}/{size}"
                    chosen = select_variant(sized, diagnostics, context)
                    plan.entries.append(
                        PlanEntry(
                            primitive=primitive,
                            extension=extension,
                            ctype=ctype,
                            size_bits=size,
                            definition=chosen,
                            score=len(chosen.lscpu_flags),
                            is_native=chosen.is_native,
                        )
                    )
                    produced = True
                if not produced:
                    plan.omitted.append(
                        OmittedEntry(
                            category=primitive.category,
                            primitive_name=primitive.primitive_name,
                            extension_name=extension.extension_name,
                            ctype=ctype,
                            reason="no compatible register width",
                        )
                    )
    plan.entries.sort(key=PlanEntry.sort_key)
    plan.omitted.sort(
        key=lambda o: (o.category, o.primitive_name, o.extension_name, o.ctype)
    )
    return plan


def plan_to_document(plan: GenerationPlan, target: HardwareTarget) -> dict:
    """Plain-data view of a plan for the YAML report behind ``--emit-plan``."""
    return {
        "target": {
            "flags": sorted(target.flags),
            "requested_sizes_bits": list(target.requested_sizes_bits),
            "source": target.source,
        },
        "enabled_extensions": [e.extension_name for e in plan.enabled_extensions],
        "entries": [
            {
                "category": e.primitive.category,
                "primitive": e.primitive.primitive_name,
                "extension": e.extension.extension_name,
                "ctype": e.ctype,
                "size_bits": e.size_bits,
                "score": e.score,
                "is_native": e.is_native,
                "definition_flags": sorted(e.definition.lscpu_flags),
                "definition_index": e.primitive.definitions.index(e.definition),
            }
            for e in plan.entries
        ],
        "omitted": [
            {
                "category": o.category,
                "primitive": o.primitive_name,
                "extension": o.extension_name,
                "ctype": o.ctype,
                "reason": o.reason,
            }
            for o in plan.omitted
        ],
    }

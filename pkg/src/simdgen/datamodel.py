"""Typed data model for user-provided extension and primitive documents.

Extensions live in ``<data>/extensions/**/*.yaml`` with one document per file
section; primitives live in ``<data>/primitives/*.yaml`` as multi-document
streams (one document per primitive, optionally preceded by a category
header). Loading is deterministic regardless of filesystem enumeration order.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from types import MappingProxyType
from typing import Iterator, Mapping

import yaml

from . import schema as schema_mod
from .diagnostics import DiagnosticLog
from .errors import ModelError, ModelValidationError
from .target import normalize_flag

# All base types the generator knows how to reason about.
BASE_TYPE_UNIVERSE = (
    "uint8_t",
    "uint16_t",
    "uint32_t",
    "uint64_t",
    "int8_t",
    "int16_t",
    "int32_t",
    "int64_t",
    "float",
    "double",
)

BASE_TYPE_BYTE_WIDTH = {
    "uint8_t": 1,
    "uint16_t": 2,
    "uint32_t": 4,
    "uint64_t": 8,
    "int8_t": 1,
    "int16_t": 2,
    "int32_t": 4,
    "int64_t": 8,
    "float": 4,
    "double": 8,
}

_EXTENSION_FIELDS = {
    "vendor",
    "extension_name",
    "lscpu_flags",
    "includes",
    "register_type_expr",
    "mask_type_expr",
    "default_size_bits",
    "arch_flag_map",
}

_PRIMITIVE_FIELDS = {
    "primitive_name",
    "functor_name",
    "brief_description",
    "parameters",
    "return_ctype",
    "definitions",
    "tests",
}

_DEFINITION_FIELDS = {
    "target_extension",
    "ctypes",
    "lscpu_flags",
    "is_native",
    "implementation",
    "note",
    "vector_length_bits",
}


@dataclass(frozen=True)
class ParameterSpec:
    name: str
    ctype_token: str
    attributes: str = ""
    declaration_attributes: str = ""
    description: str = ""


@dataclass(frozen=True)
class DefinitionSpec:
    target_extension: str
    ctypes: tuple[str, ...]
    lscpu_flags: frozenset[str]
    is_native: bool
    implementation: str
    vector_length_bits: tuple[int, ...] = ()
    note: str = ""


@dataclass(frozen=True)
class TestSpec:
    implementation: str
    test_name: str = "default"
    requires: tuple[str, ...] = ()


@dataclass(frozen=True)
class PrimitiveSpec:
    primitive_name: str
    functor_name: str
    category: str
    parameters: tuple[ParameterSpec, ...]
    return_ctype_token: str
    definitions: tuple[DefinitionSpec, ...]
    tests: tuple[TestSpec, ...] = ()
    brief_description: str = ""

    def supported_ctypes(self) -> tuple[str, ...]:
        """Union of base types across all definitions, in universe order."""
        seen = {c for d in self.definitions for c in d.ctypes}
        return tuple(c for c in BASE_TYPE_UNIVERSE if c in seen)


@dataclass(frozen=True)
class ExtensionSpec:
    vendor: str
    extension_name: str
    lscpu_flags: frozenset[str]
    includes: tuple[str, ...]
    register_type_expr: str
    mask_type_expr: str
    default_size_bits: int
    arch_flag_map: Mapping[str, str]
    custom_fields: Mapping[str, object] = field(default_factory=dict)

    @property
    def size_per_lane(self) -> bool:
        """True when one register holds exactly one element of the base type."""
        return bool(self.custom_fields.get("size_per_lane", False))

    @property
    def is_size_polymorphic(self) -> bool:
        """True when register widths are supplied at generation time."""
        return self.default_size_bits == 0 and not self.size_per_lane

    @property
    def imask_type_expr(self) -> str:
        return str(self.custom_fields.get("imask_type_expr", "uint64_t"))

    def sizes_for(self, ctype: str, requested_sizes: tuple[int, ...]) -> tuple[int, ...]:
        """Register widths this extension is generated for, per base type."""
        if self.size_per_lane:
            return (8 * BASE_TYPE_BYTE_WIDTH[ctype],)
        if self.is_size_polymorphic:
            from .target import DEFAULT_POLYMORPHIC_SIZES

            widths = requested_sizes or DEFAULT_POLYMORPHIC_SIZES
            lane_bits = 8 * BASE_TYPE_BYTE_WIDTH[ctype]
            return tuple(w for w in widths if w % lane_bits == 0 and w >= lane_bits)
        return (self.default_size_bits,)


@dataclass
class DataModel:
    extensions: list[ExtensionSpec] = field(default_factory=list)
    primitive_categories: dict[str, list[PrimitiveSpec]] = field(default_factory=dict)

    def extension_by_name(self, name: str) -> ExtensionSpec | None:
        for ext in self.extensions:
            if ext.extension_name == name:
                return ext
        return None

    def iter_primitives(self) -> Iterator[PrimitiveSpec]:
        for category in self.primitive_categories:
            yield from self.primitive_categories[category]

    def primitive_by_name(self, name: str) -> PrimitiveSpec | None:
        for p in self.iter_primitives():
            if p.primitive_name == name:
                return p
        return None


def _load_yaml_documents(path: Path) -> list:
    text = path.read_text(encoding="utf-8")
    try:
        return list(yaml.safe_load_all(text))
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        location = str(path) if mark is None else f"{path}:{mark.line + 1}"
        hint = ""
        if "\\t" in str(exc) or "\t" in str(exc):
            hint = " (hint: YAML forbids tab indentation, use spaces)"
        raise ModelError(f"{location}: cannot parse YAML: {exc}{hint}") from exc


def _extension_from_document(doc: dict) -> ExtensionSpec:
    name = doc["extension_name"]
    size = doc["default_size_bits"]
    if size < 0 or size % 8 != 0:
        raise ModelError(
            f"extension {name!r}: default_size_bits must be 0 or a positive multiple of 8 (got {size})"
        )
    arch_map = doc["arch_flag_map"]
    for k, v in arch_map.items():
        if not isinstance(k, str) or not isinstance(v, str):
            raise ModelError(f"extension {name!r}: arch_flag_map must map flag text to option text")
    custom = {k: v for k, v in doc.items() if k not in _EXTENSION_FIELDS}
    return ExtensionSpec(
        vendor=doc["vendor"],
        extension_name=name,
        lscpu_flags=frozenset(normalize_flag(f) for f in doc["lscpu_flags"]),
        includes=tuple(doc["includes"]),
        register_type_expr=doc["register_type_expr"],
        mask_type_expr=doc["mask_type_expr"],
        default_size_bits=size,
        arch_flag_map=MappingProxyType({normalize_flag(k): v for k, v in arch_map.items()}),
        custom_fields=MappingProxyType(custom),
    )


def _definition_from_document(doc: dict, primitive_name: str) -> DefinitionSpec:
    ctypes = tuple(doc["ctypes"])
    if not ctypes:
        raise ModelError(f"primitive {primitive_name!r}: a definition has an empty ctypes list")
    unknown = [c for c in ctypes if c not in BASE_TYPE_UNIVERSE]
    if unknown:
        raise ModelError(
            f"primitive {primitive_name!r}: unsupported base types {unknown} "
            f"(supported: {', '.join(BASE_TYPE_UNIVERSE)})"
        )
    if not doc["implementation"].strip():
        raise ModelError(f"primitive {primitive_name!r}: a definition has an empty implementation")
    raw_lengths = doc.get("vector_length_bits", [])
    if not isinstance(raw_lengths, list) or not all(
        isinstance(v, int) and not isinstance(v, bool) for v in raw_lengths
    ):
        raise ModelError(f"primitive {primitive_name!r}: vector_length_bits must be a list of integers")
    return DefinitionSpec(
        target_extension=doc["target_extension"],
        ctypes=ctypes,
        lscpu_flags=frozenset(normalize_flag(f) for f in doc["lscpu_flags"]),
        is_native=doc["is_native"],
        implementation=doc["implementation"],
        vector_length_bits=tuple(sorted(set(raw_lengths))),
        note=doc["note"],
    )


def _primitive_from_document(doc: dict, category: str) -> PrimitiveSpec:
    name = doc["primitive_name"]
    params = []
    seen: set[str] = set()
    for p in doc["parameters"]:
        if p["name"] in seen:
            raise ModelError(f"primitive {name!r}: duplicate parameter name {p['name']!r}")
        seen.add(p["name"])
        params.append(
            ParameterSpec(
                name=p["name"],
                ctype_token=p["ctype"],
                attributes=p["attributes"],
                declaration_attributes=p["declaration_attributes"],
                description=p["description"],
            )
        )
    tests = []
    for t in doc["tests"]:
        if not t["implementation"].strip():
            raise ModelError(f"primitive {name!r}: test {t['test_name']!r} has an empty implementation")
        tests.append(
            TestSpec(
                implementation=t["implementation"],
                test_name=t["test_name"],
                requires=tuple(t["requires"]),
            )
        )
    return PrimitiveSpec(
        primitive_name=name,
        functor_name=doc["functor_name"] or name,
        category=category,
        parameters=tuple(params),
        return_ctype_token=doc["return_ctype"],
        definitions=tuple(_definition_from_document(d, name) for d in doc["definitions"]),
        tests=tuple(tests),
        brief_description=doc["brief_description"],
    )


def load_extensions(
    directory: Path | str,
    model_schema: schema_mod.Schema,
    diagnostics: DiagnosticLog | None = None,
    validate: bool = True,
) -> list[ExtensionSpec]:
    """Load every extension document below the directory, sorted by name."""
    directory = Path(directory)
    if not directory.is_dir():
        raise ModelError(f"extension directory {directory} does not exist")
    issues: list[schema_mod.ValidationIssue] = []
    extensions: list[ExtensionSpec] = []
    for path in sorted(directory.rglob("*.yaml")):
        for i, doc in enumerate(_load_yaml_documents(path)):
            if doc is None:
                continue
            origin = f"{path}#{i}"
            if validate:
                report = schema_mod.validate(doc, model_schema.extension_rules, origin)
                if report.errors:
                    issues.extend(report.errors)
                    continue
            extensions.append(
                _extension_from_document(schema_mod.enrich(doc, model_schema.extension_rules))
            )
    if issues:
        raise ModelValidationError(issues)
    names = [e.extension_name for e in extensions]
    duplicates = sorted({n for n in names if names.count(n) > 1})
    if duplicates:
        raise ModelError(f"duplicate extension names: {duplicates}")
    return sorted(extensions, key=lambda e: e.extension_name)


def _is_category_header(doc: dict) -> bool:
    return isinstance(doc, dict) and "category_name" in doc and "primitive_name" not in doc


def load_primitives(
    directory: Path | str,
    model_schema: schema_mod.Schema,
    diagnostics: DiagnosticLog | None = None,
    validate: bool = True,
) -> dict[str, list[PrimitiveSpec]]:
    """Load primitive documents grouped by category.

    The category defaults to the file stem; a leading document carrying only
    ``category_name`` overrides it.
    """
    directory = Path(directory)
    if not directory.is_dir():
        raise ModelError(f"primitive directory {directory} does not exist")
    issues: list[schema_mod.ValidationIssue] = []
    categories: dict[str, list[PrimitiveSpec]] = {}
    seen_keys: set[tuple[str, str]] = set()
    for path in sorted(directory.glob("*.yaml")):
        docs = [d for d in _load_yaml_documents(path) if d is not None]
        category = path.stem
        if docs and _is_category_header(docs[0]):
            category = docs[0]["category_name"]
            docs = docs[1:]
        if not docs and diagnostics is not None:
            diagnostics.warning("datamodel", f"{path}: primitive file contains no documents")
        bucket = categories.setdefault(category, [])
        for i, doc in enumerate(docs):
            origin = f"{path}#{i}"
            if validate:
                report = schema_mod.validate(doc, model_schema.primitive_rules, origin)
                if report.errors:
                    issues.extend(report.errors)
                    continue
            primitive = _primitive_from_document(
                schema_mod.enrich(doc, model_schema.primitive_rules), category
            )
            key = (category, primitive.primitive_name)
            if key in seen_keys:
                raise ModelError(
                    f"{origin}: duplicate primitive {primitive.primitive_name!r} in category {category!r}"
                )
            seen_keys.add(key)
            bucket.append(primitive)
    if issues:
        raise ModelValidationError(issues)
    return categories


def load_data_model(
    data_dir: Path | str,
    model_schema: schema_mod.Schema,
    diagnostics: DiagnosticLog | None = None,
    validate: bool = True,
) -> DataModel:
    data_dir = Path(data_dir)
    return DataModel(
        extensions=load_extensions(data_dir / "extensions", model_schema, diagnostics, validate),
        primitive_categories=load_primitives(data_dir / "primitives", model_schema, diagnostics, validate),
    )


def extension_to_document(ext: ExtensionSpec) -> dict:
    doc = {
        "extension_name": ext.extension_name,
        "vendor": ext.vendor,
        "lscpu_flags": sorted(ext.lscpu_flags),
        "includes": list(ext.includes),
        "register_type_expr": ext.register_type_expr,
        "mask_type_expr": ext.mask_type_expr,
        "default_size_bits": ext.default_size_bits,
        "arch_flag_map": dict(sorted(ext.arch_flag_map.items())),
    }
    doc.update({k: ext.custom_fields[k] for k in sorted(ext.custom_fields)})
    return doc


def primitive_to_document(p: PrimitiveSpec) -> dict:
    return {
        "primitive_name": p.primitive_name,
        "functor_name": p.functor_name,
        "brief_description": p.brief_description,
        "parameters": [
            {
                "name": param.name,
                "ctype": param.ctype_token,
                "attributes": param.attributes,
                "declaration_attributes": param.declaration_attributes,
                "description": param.description,
            }
            for param in p.parameters
        ],
        "return_ctype": p.return_ctype_token,
        "definitions": [
            {
                "target_extension": d.target_extension,
                "ctypes": list(d.ctypes),
                "lscpu_flags": sorted(d.lscpu_flags),
                "is_native": d.is_native,
                "implementation": d.implementation,
                "note": d.note,
                **({"vector_length_bits": list(d.vector_length_bits)} if d.vector_length_bits else {}),
            }
            for d in p.definitions
        ],
        "tests": [
            {
                "test_name": t.test_name,
                "requires": list(t.requires),
                "implementation": t.implementation,
            }
            for t in p.tests
        ],
    }


def model_fingerprint(model: DataModel) -> str:
    """Stable content hash of the loaded model, for generated-file banners."""
    import hashlib
    import json

    payload = {
        "extensions": [extension_to_document(e) for e in model.extensions],
        "primitives": {
            cat: [primitive_to_document(p) for p in prims]
            for cat, prims in sorted(model.primitive_categories.items())
        },
    }
    digest = hashlib.sha256(json.dumps(payload, sort_keys=True).encode("utf-8"))
    return digest.hexdigest()[:16]

"""Data-model schema: field rules, document validation, and enrichment.

The schema is shipped as a versioned YAML meta-document with two top-level
keys, ``extension`` and ``primitive``, each holding a list of field rules.
Validation is total: all problems of a document are collected instead of
failing on the first one. Unknown fields are always allowed and pass through
untouched.
"""

from __future__ import annotations

import copy
from dataclasses import dataclass, field
from pathlib import Path

import yaml

from .errors import InternalError, SchemaError

KINDS = (
    "text",
    "integer",
    "boolean",
    "flag-list",
    "text-list",
    "mapping",
    "record",
    "record-list",
)

_RULE_KEYS = {"name", "kind", "required", "default", "children"}


@dataclass(frozen=True)
class FieldRule:
    """One named field of a document, with its expected kind.

    Optional rules carry a type-correct default; record kinds carry the rules
    of their child fields.
    """

    name: str
    kind: str
    required: bool
    default: object = None
    children: tuple["FieldRule", ...] = ()


@dataclass(frozen=True)
class Schema:
    extension_rules: tuple[FieldRule, ...]
    primitive_rules: tuple[FieldRule, ...]
    allow_unknown_fields: bool = True
    version: int = 1


@dataclass(frozen=True)
class ValidationIssue:
    document: str
    field_path: str
    message: str


@dataclass
class ValidationReport:
    errors: list[ValidationIssue] = field(default_factory=list)
    warnings: list[ValidationIssue] = field(default_factory=list)
    enriched_documents: list = field(default_factory=list)

    def extend(self, other: "ValidationReport") -> None:
        self.errors.extend(other.errors)
        self.warnings.extend(other.warnings)
        self.enriched_documents.extend(other.enriched_documents)


def _kind_matches(value, kind: str) -> bool:
    if kind == "text":
        return isinstance(value, str)
    if kind == "integer":
        return isinstance(value, int) and not isinstance(value, bool)
    if kind == "boolean":
        return isinstance(value, bool)
    if kind in ("flag-list", "text-list"):
        return isinstance(value, list) and all(isinstance(v, str) for v in value)
    if kind == "mapping":
        return isinstance(value, dict)
    if kind == "record":
        return isinstance(value, dict)
    if kind == "record-list":
        return isinstance(value, list) and all(isinstance(v, dict) for v in value)
    raise InternalError(f"unknown field kind {kind!r}")


def _check_default(rule_path: str, kind: str, default, children, problems: list[str]) -> None:
    if not _kind_matches(default, kind):
        problems.append(f"rule {rule_path}: default value does not match kind {kind!r}")
        return
    if kind == "record":
        for child in children:
            if not child.required and child.name not in default:
                continue
    if kind == "record-list":
        for i, entry in enumerate(default):
            for child in children:
                if child.required and child.name not in entry:
                    problems.append(
                        f"rule {rule_path}: default entry [{i}] misses mandatory child {child.name!r}"
                    )


def _parse_rule(raw, rule_path: str, problems: list[str]) -> FieldRule | None:
    if not isinstance(raw, dict):
        problems.append(f"rule {rule_path}: expected a mapping, found {type(raw).__name__}")
        return None
    unknown = set(raw) - _RULE_KEYS
    if unknown:
        problems.append(f"rule {rule_path}: unexpected keys {sorted(unknown)}")
    name = raw.get("name")
    if not isinstance(name, str) or not name:
        problems.append(f"rule {rule_path}: missing or invalid 'name'")
        return None
    kind = raw.get("kind")
    if kind not in KINDS:
        problems.append(f"rule {rule_path} ({name}): invalid kind {kind!r}")
        return None
    required = raw.get("required")
    if not isinstance(required, bool):
        problems.append(f"rule {rule_path} ({name}): 'required' must be a boolean")
        return None

    children: tuple[FieldRule, ...] = ()
    if kind in ("record", "record-list"):
        raw_children = raw.get("children")
        if not isinstance(raw_children, list) or not raw_children:
            problems.append(f"rule {rule_path} ({name}): kind {kind!r} needs non-empty 'children'")
            return None
        children = _parse_rules(raw_children, f"{rule_path}.children", problems)
    elif "children" in raw:
        problems.append(f"rule {rule_path} ({name}): 'children' only allowed for record kinds")

    default = None
    if not required:
        if "default" not in raw:
            problems.append(f"rule {rule_path} ({name}): optional rule needs a 'default'")
            return None
        default = raw["default"]
        _check_default(f"{rule_path} ({name})", kind, default, children, problems)
    elif "default" in raw:
        problems.append(f"rule {rule_path} ({name}): mandatory rule must not carry a 'default'")

    return FieldRule(name=name, kind=kind, required=required, default=default, children=children)


def _parse_rules(raw_list, path: str, problems: list[str]) -> tuple[FieldRule, ...]:
    rules = []
    seen: set[str] = set()
    for i, raw in enumerate(raw_list):
        rule = _parse_rule(raw, f"{path}[{i}]", problems)
        if rule is None:
            continue
        if rule.name in seen:
            problems.append(f"rule {path}[{i}]: duplicate rule name {rule.name!r}")
            continue
        seen.add(rule.name)
        rules.append(rule)
    return tuple(rules)


def load_schema(text: str, origin: str = "<schema>") -> Schema:
    """Parse and check a schema meta-document. Raises SchemaError on problems."""
    try:
        raw = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise SchemaError([f"{origin}: not valid YAML: {exc}"]) from exc
    if raw is None:
        raw = {}
    if not isinstance(raw, dict):
        raise SchemaError([f"{origin}: top level must be a mapping"])

    problems: list[str] = []
    version = raw.get("version", 1)
    if not isinstance(version, int) or isinstance(version, bool):
        problems.append(f"{origin}: 'version' must be an integer")
        version = 1
    for key in ("extension", "primitive"):
        if key not in raw:
            problems.append(f"{origin}: missing top-level key {key!r}")
        elif not isinstance(raw[key], list):
            problems.append(f"{origin}: {key!r} must be a list of rules")
    unknown = set(raw) - {"extension", "primitive", "version"}
    if unknown:
        problems.append(f"{origin}: unexpected top-level keys {sorted(unknown)}")
    if problems:
        raise SchemaError(problems)

    extension_rules = _parse_rules(raw["extension"], "extension", problems)
    primitive_rules = _parse_rules(raw["primitive"], "primitive", problems)
    if problems:
        raise SchemaError(problems)
    return Schema(
        extension_rules=extension_rules,
        primitive_rules=primitive_rules,
        version=version,
    )


def load_schema_file(path: Path | str) -> Schema:
    path = Path(path)
    return load_schema(path.read_text(encoding="utf-8"), origin=str(path))


def default_schema_path() -> Path:
    return Path(__file__).parent / "resources" / "schema.yaml"


def load_default_schema() -> Schema:
    return load_schema_file(default_schema_path())


def _join(prefix: str, name: str) -> str:
    return f"{prefix}.{name}" if prefix else name


def _validate_into(document, rules, document_path: str, prefix: str, report: ValidationReport) -> None:
    if not isinstance(document, dict):
        report.errors.append(
            ValidationIssue(document_path, prefix or "", "document is not a mapping")
        )
        return
    for rule in rules:
        path = _join(prefix, rule.name)
        if rule.name not in document:
            if rule.required:
                report.errors.append(
                    ValidationIssue(document_path, path, "missing mandatory field")
                )
            continue
        value = document[rule.name]
        if not _kind_matches(value, rule.kind):
            report.errors.append(
                ValidationIssue(
                    document_path,
                    path,
                    f"expected {rule.kind}, found {type(value).__name__}",
                )
            )
            continue
        if rule.kind == "record":
            _validate_into(value, rule.children, document_path, path, report)
        elif rule.kind == "record-list":
            for i, entry in enumerate(value):
                _validate_into(entry, rule.children, document_path, f"{path}[{i}]", report)


def validate(document, rules, document_path: str = "<document>") -> ValidationReport:
    """Check one parsed document against a rule list, collecting all problems."""
    report = ValidationReport()
    _validate_into(document, rules, document_path, "", report)
    return report


def enrich(document, rules):
    """Return a copy of the document with defaults filled in for absent optional fields.

    The document must already have passed validation; present fields are never
    modified and unknown fields are preserved verbatim.
    """
    if not isinstance(document, dict):
        raise InternalError("enrich: document is not a mapping")
    result = copy.deepcopy(document)
    for rule in rules:
        if rule.name not in result:
            if rule.required:
                raise InternalError(f"enrich: mandatory field {rule.name!r} absent")
            result[rule.name] = copy.deepcopy(rule.default)
        value = result[rule.name]
        if rule.kind == "record" and isinstance(value, dict):
            result[rule.name] = enrich(value, rule.children)
        elif rule.kind == "record-list" and isinstance(value, list):
            result[rule.name] = [enrich(entry, rule.children) for entry in value]
    return result


def process_documents(documents, rules, document_paths) -> ValidationReport:
    """Validate and enrich a batch of documents, aggregating one report."""
    report = ValidationReport()
    for doc, path in zip(documents, document_paths):
        single = validate(doc, rules, path)
        report.errors.extend(single.errors)
        report.warnings.extend(single.warnings)
        if not single.errors:
            report.enriched_documents.append(enrich(doc, rules))
    return report

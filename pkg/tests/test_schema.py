"""Schema loading, document validation, and enrichment."""

from __future__ import annotations

import copy

import pytest

from simdgen import schema as schema_mod
from simdgen.errors import SchemaError

SINGLE_RULE = """
extension: []
primitive:
  - name: primitive_name
    kind: text
    required: true
"""


def test_load_schema_single_mandatory_text_rule():
    loaded = schema_mod.load_schema(SINGLE_RULE)
    assert len(loaded.primitive_rules) == 1
    rule = loaded.primitive_rules[0]
    assert rule.name == "primitive_name"
    assert rule.kind == "text"
    assert rule.required is True
    assert loaded.extension_rules == ()


def test_load_schema_empty_rule_lists_is_valid():
    loaded = schema_mod.load_schema("extension: []\nprimitive: []\n")
    assert loaded.extension_rules == ()
    assert loaded.primitive_rules == ()
    assert loaded.allow_unknown_fields is True


def test_load_schema_record_without_children_fails():
    text = """
extension: []
primitive:
  - name: parameters
    kind: record
    required: true
"""
    with pytest.raises(SchemaError, match="children"):
        schema_mod.load_schema(text)


def test_load_schema_duplicate_rule_name_fails():
    text = """
extension:
  - {name: vendor, kind: text, required: true}
  - {name: vendor, kind: text, required: true}
primitive: []
"""
    with pytest.raises(SchemaError, match="duplicate"):
        schema_mod.load_schema(text)


def test_load_schema_optional_rule_needs_type_correct_default():
    text = """
extension:
  - {name: width, kind: integer, required: false, default: "wide"}
primitive: []
"""
    with pytest.raises(SchemaError, match="default"):
        schema_mod.load_schema(text)


def test_default_schema_loads():
    loaded = schema_mod.load_default_schema()
    assert loaded.version == 1
    names = {r.name for r in loaded.primitive_rules}
    assert {"primitive_name", "parameters", "return_ctype", "definitions"} <= names


@pytest.fixture()
def primitive_rules():
    return schema_mod.load_default_schema().primitive_rules


@pytest.fixture()
def extension_rules():
    return schema_mod.load_default_schema().extension_rules


def _document(**overrides):
    doc = {
        "primitive_name": "to_integral",
        "parameters": [{"name": "mask", "ctype": "mask_t"}],
        "return_ctype": "imask_t",
        "definitions": [
            {
                "target_extension": "sse",
                "ctypes": ["uint16_t"],
                "lscpu_flags": ["bmi2"],
                "implementation": "return _pext_u64(...);",
            }
        ],
    }
    doc.update(overrides)
    return doc


def test_validate_reports_missing_definitions(primitive_rules):
    doc = _document()
    del doc["definitions"]
    report = schema_mod.validate(doc, primitive_rules, "mask.yaml#0")
    assert any(e.field_path == "definitions" for e in report.errors)
    assert all(e.document == "mask.yaml#0" for e in report.errors)


def test_validate_accepts_unknown_fields(primitive_rules):
    doc = _document(intrin_tp={"uint8_t": "u8"})
    report = schema_mod.validate(doc, primitive_rules)
    assert report.errors == []


def test_validate_kind_mismatch_for_flag_list(primitive_rules):
    doc = _document()
    doc["definitions"][0]["lscpu_flags"] = 7
    report = schema_mod.validate(doc, primitive_rules)
    assert any(
        e.field_path == "definitions[0].lscpu_flags" and "flag-list" in e.message
        for e in report.errors
    )


def test_validate_collects_all_errors_not_just_first(primitive_rules):
    report = schema_mod.validate({"definitions": 3}, primitive_rules)
    paths = {e.field_path for e in report.errors}
    assert {"primitive_name", "parameters", "return_ctype", "definitions"} <= paths


def test_validate_boolean_is_not_integer(extension_rules):
    doc = {
        "extension_name": "x",
        "lscpu_flags": [],
        "register_type_expr": "t",
        "default_size_bits": True,
    }
    report = schema_mod.validate(doc, extension_rules)
    assert any(e.field_path == "default_size_bits" for e in report.errors)


def test_enrich_inserts_is_native_default(primitive_rules):
    enriched = schema_mod.enrich(_document(), primitive_rules)
    assert enriched["definitions"][0]["is_native"] is True


def test_enrich_keeps_explicit_is_native_false(primitive_rules):
    doc = _document()
    doc["definitions"][0]["is_native"] = False
    enriched = schema_mod.enrich(doc, primitive_rules)
    assert enriched["definitions"][0]["is_native"] is False


def test_enrich_is_identity_on_fully_specified_document(primitive_rules):
    doc = schema_mod.enrich(_document(), primitive_rules)
    assert schema_mod.enrich(doc, primitive_rules) == doc


def test_enrich_idempotent(primitive_rules):
    once = schema_mod.enrich(_document(), primitive_rules)
    twice = schema_mod.enrich(copy.deepcopy(once), primitive_rules)
    assert once == twice


def test_enrich_fills_every_optional_field(primitive_rules):
    enriched = schema_mod.enrich(_document(), primitive_rules)
    for rule in primitive_rules:
        assert rule.name in enriched
    for rule in primitive_rules:
        if rule.name == "parameters":
            for child in rule.children:
                assert child.name in enriched["parameters"][0]


def test_unknown_fields_survive_validate_and_enrich(primitive_rules):
    payload = {"weird": [1, {"deep": "value"}]}
    doc = _document(custom_block=copy.deepcopy(payload))
    report = schema_mod.validate(doc, primitive_rules)
    assert report.errors == []
    enriched = schema_mod.enrich(doc, primitive_rules)
    assert enriched["custom_block"] == payload


def test_enrich_does_not_alias_defaults(primitive_rules):
    first = schema_mod.enrich(_document(), primitive_rules)
    second = schema_mod.enrich(_document(), primitive_rules)
    first["tests"].append({"x": 1})
    assert second["tests"] == []


def test_process_documents_aggregates(primitive_rules):
    good = _document()
    bad = _document()
    del bad["return_ctype"]
    report = schema_mod.process_documents([good, bad], primitive_rules, ["a#0", "a#1"])
    assert len(report.enriched_documents) == 1
    assert any(e.document == "a#1" and e.field_path == "return_ctype" for e in report.errors)

"""Two-stage rendering: inner snippets, SRU headers, primitive files, manifests."""

from __future__ import annotations

import hashlib
from pathlib import Path

import pytest

from conftest import minimal_extension, minimal_primitive, write_model_dir
from simdgen.datamodel import DefinitionSpec, load_data_model
from simdgen.diagnostics import DiagnosticLog
from simdgen.errors import RenderError
from simdgen.render import (
    FileManifest,
    build_render_context,
    emit_library,
    load_templates,
    render_extension,
    render_inner,
    render_library,
    render_primitive,
    resolve_ctype_token,
    write_manifest,
)
from simdgen.selection import build_plan
from simdgen.target import parse_target


@pytest.fixture(scope="module")
def templates():
    return load_templates()


def _tree_digest(root: Path) -> str:
    digest = hashlib.sha256()
    for path in sorted(p for p in root.rglob("*") if p.is_file()):
        digest.update(str(path.relative_to(root)).encode())
        digest.update(path.read_bytes())
    return digest.hexdigest()


def test_resolve_ctype_tokens():
    assert resolve_ctype_token("register_t") == "typename Vec::register_type"
    assert resolve_ctype_token("const base_t*") == "const typename Vec::base_type*"
    assert resolve_ctype_token("size_t") == "std::size_t"
    assert resolve_ctype_token("uint64_t") == "uint64_t"


def test_render_inner_neon_suffix_lookup(corpus_model):
    neon = corpus_model.extension_by_name("neon")
    hadd = corpus_model.primitive_by_name("hadd")
    definition = next(d for d in hadd.definitions if d.target_extension == "neon")
    context = build_render_context(neon, hadd, "uint8_t", 128)
    body = render_inner(definition, context)
    assert body == "return vaddvq_u8(value);"


def test_render_inner_verbatim_passthrough(corpus_model):
    scalar = corpus_model.extension_by_name("scalar")
    loadu = corpus_model.primitive_by_name("loadu")
    definition = next(d for d in loadu.definitions if d.target_extension == "scalar")
    context = build_render_context(scalar, loadu, "uint32_t", 32)
    assert render_inner(definition, context) == "return *ptr;"


def test_render_inner_loop_iteration_count(corpus_model):
    # 128-bit register of uint32_t lanes: 128 / 32 = 4 repetitions expected
    ext = corpus_model.extension_by_name("fpga_generic")
    set1 = corpus_model.primitive_by_name("set1")
    definition = next(d for d in set1.definitions if d.target_extension == "fpga_generic")
    context = build_render_context(ext, set1, "uint32_t", 128)
    assert context["vec_elem_count"] == 128 // 32
    body = render_inner(definition, context)
    assert body.count("result[") == 4
    for i in range(4):
        assert f"result[{i}] = value;" in body


def test_render_inner_unresolved_name(corpus_model):
    scalar = corpus_model.extension_by_name("scalar")
    loadu = corpus_model.primitive_by_name("loadu")
    definition = DefinitionSpec(
        target_extension="scalar",
        ctypes=("uint32_t",),
        lscpu_flags=frozenset(),
        is_native=True,
        implementation="return {{ not_a_context_name }};",
    )
    context = build_render_context(scalar, loadu, "uint32_t", 32)
    with pytest.raises(RenderError, match="not_a_context_name"):
        render_inner(definition, context)


def test_render_extension_sse_header(corpus_model, templates):
    sse = corpus_model.extension_by_name("sse")
    header = render_extension(sse, [128], templates)
    assert "std::size_t VectorSizeBits = 128" in header
    assert "using register_type = __m128i;" in header
    assert "using register_type = __m128;" in header
    assert "using mask_type = __m128d;" in header
    assert 'required_capability_flags = "sse,sse2"' in header
    assert "#define TSL_HAS_SSE 1" in header


def test_render_extension_scalar_degenerate(corpus_model, templates):
    scalar = corpus_model.extension_by_name("scalar")
    header = render_extension(scalar, [32], templates)
    assert "std::size_t VectorSizeBits = sizeof(BaseType) * 8" in header
    assert "using register_type = uint32_t;" in header
    assert "using mask_type = bool;" in header
    assert "VectorSizeBits == sizeof(BaseType) * 8" in header


def test_render_extension_fpga_keeps_size_parameter_open(corpus_model, templates):
    fpga = corpus_model.extension_by_name("fpga_generic")
    header = render_extension(fpga, [128, 2048], templates)
    assert "typename BaseType, std::size_t VectorSizeBits>" in header
    assert "VectorSizeBits = " not in header
    assert "std::array<uint8_t, VectorSizeBits / (sizeof(uint8_t) * 8)>" in header
    assert "std::bitset<VectorSizeBits / (sizeof(double) * 8)>" in header


def test_render_primitive_pext_specialization(corpus_model, templates):
    target = parse_target(["sse", "sse2", "bmi2"])
    plan = build_plan(corpus_model, target)
    to_integral = corpus_model.primitive_by_name("to_integral")
    entries = [
        e
        for e in plan.entries_for("sse", "to_integral")
        if e.ctype == "uint16_t"
    ]
    declaration, definitions = render_primitive(to_integral, entries, templates, target)
    assert "struct to_integral_impl;" in declaration
    assert "inline typename Vec::imask_type to_integral(" in declaration
    assert "_pext_u64" in definitions["sse"]
    assert "to_integral_impl<sse<uint16_t, 128>, Idof>" in definitions["sse"]


def test_render_primitive_zero_entries_warns(corpus_model, templates):
    to_integral = corpus_model.primitive_by_name("to_integral")
    diagnostics = DiagnosticLog()
    declaration, definitions = render_primitive(
        to_integral, [], templates, diagnostics=diagnostics
    )
    assert "to_integral" in declaration
    assert definitions == {}
    assert any("declaration only" in d.message for d in diagnostics.warnings())


def test_render_primitive_workaround_mechanism(corpus_model, templates):
    target = parse_target(["sse", "sse2"])
    plan = build_plan(corpus_model, target)
    to_integral = corpus_model.primitive_by_name("to_integral")
    entries = [
        e for e in plan.entries_for("sse", "to_integral") if e.ctype == "uint16_t"
    ]
    assert entries and not entries[0].is_native
    _, definitions = render_primitive(to_integral, entries, templates, target)
    text = definitions["sse"]
    assert '[[deprecated("workaround")]]' in text
    assert "_mm_packs_epi16" in text
    assert "native_implementation = false" in text


def test_emit_library_writes_deterministic_tree(corpus_model, templates, tmp_path):
    target = parse_target(["sse", "sse2", "bmi2"])
    plan = build_plan(corpus_model, target)
    first = tmp_path / "first"
    second = tmp_path / "second"
    emit_library(plan, templates, first, corpus_model, target)
    emit_library(plan, templates, second, corpus_model, target)
    assert _tree_digest(first) == _tree_digest(second)


def test_emit_library_layout(corpus_model, templates, tmp_path):
    target = parse_target([])
    plan = build_plan(corpus_model, target)
    manifest = emit_library(plan, templates, tmp_path, corpus_model, target)
    paths = set(manifest.paths())
    assert "include/tsl/tsl.hpp" in paths
    assert "include/tsl/generated/extensions/generic/scalar.hpp" in paths
    assert "include/tsl/generated/declarations/mask.hpp" in paths
    assert "include/tsl/generated/definitions/mask/mask_scalar.hpp" in paths
    for path in paths:
        assert (tmp_path / path).is_file()
    umbrella = (tmp_path / "include/tsl/tsl.hpp").read_text()
    extension_pos = umbrella.index("generated/extensions/generic/scalar.hpp")
    declaration_pos = umbrella.index("generated/declarations/calc.hpp")
    definition_pos = umbrella.index("generated/definitions/calc/calc_scalar.hpp")
    assert extension_pos < declaration_pos < definition_pos


def test_no_template_delimiters_survive(corpus_model, templates):
    target = parse_target(["sse", "sse2", "avx", "avx2", "avx512f", "avx512bw", "bmi2"])
    plan = build_plan(corpus_model, target)
    manifest = render_library(plan, templates, corpus_model, target)
    for f in manifest.files:
        assert "{{" not in f.content, f.path
        assert "{%" not in f.content, f.path


def test_manifest_rejects_surviving_delimiters():
    manifest = FileManifest()
    with pytest.raises(RenderError, match="delimiters"):
        manifest.add("a.hpp", "int x; {{ oops }}", "definition")


def test_manifest_rejects_duplicates_and_absolute_paths():
    manifest = FileManifest()
    manifest.add("a.hpp", "x", "definition")
    with pytest.raises(Exception):
        manifest.add("a.hpp", "y", "definition")
    with pytest.raises(Exception):
        manifest.add("/abs.hpp", "y", "definition")


def test_write_manifest_lf_and_trailing_newline(tmp_path):
    manifest = FileManifest()
    manifest.add("dir/file.hpp", "line1\nline2", "definition")
    write_manifest(manifest, tmp_path)
    data = (tmp_path / "dir/file.hpp").read_bytes()
    assert data == b"line1\nline2\n"


def test_every_plan_entry_has_exactly_one_specialization(corpus_model, templates):
    target = parse_target(["sse", "sse2", "bmi2"])
    plan = build_plan(corpus_model, target)
    manifest = render_library(plan, templates, corpus_model, target)
    text = "\n".join(f.content for f in manifest.by_role("definition"))
    for entry in plan.entries:
        marker = (
            f"struct {entry.primitive.functor_name}_impl<"
            f"{entry.extension.extension_name}<{entry.ctype}, {entry.size_bits}>, Idof>"
        )
        assert text.count(marker) == 1, marker


def test_custom_fields_reach_render_context(tmp_path, default_schema, templates):
    extension = minimal_extension("ext", greeting_text="hello from custom data")
    primitive = minimal_primitive("op")
    primitive["definitions"][0]["implementation"] = "return {{ greeting_text }};"
    write_model_dir(tmp_path, [extension], {"cat": [primitive]})
    model = load_data_model(tmp_path, default_schema)
    target = parse_target([])
    plan = build_plan(model, target)
    manifest = render_library(plan, templates, model, target)
    text = "\n".join(f.content for f in manifest.by_role("definition"))
    assert "hello from custom data" in text

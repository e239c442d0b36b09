"""Unit-test generation: dependency graph, topological order, test sources.

Every test case of a primitive is instantiated once per plan entry of that
primitive. A test depends on another when it names the other's primitive in
its ``requires`` list and both run on the same extension, base type, and
register width. Tests whose requirements have no test for that configuration
are marked unsafe and emit a runtime warning banner.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field, replace
from pathlib import Path

from .datamodel import DataModel, ExtensionSpec, PrimitiveSpec, model_fingerprint
from .diagnostics import DiagnosticLog
from .errors import GenerationError, InternalError
from .render import (
    ROLE_TEST,
    FileManifest,
    TemplateSet,
    build_render_context,
    indent_block,
    make_banner,
    render_text,
    write_manifest,
)
from .selection import GenerationPlan
from .target import HardwareTarget

STAGE = "testgen"

TEST_ASSETS = ("tsl_test.hpp", "test_support.hpp", "test_main.cpp")


@dataclass(frozen=True)
class TestNode:
    category: str
    primitive_name: str
    test_name: str
    extension_name: str
    ctype: str
    size_bits: int
    implementation: str
    requires: tuple[str, ...]
    unsafe: bool = False
    missing_requirements: tuple[str, ...] = ()
    primitive: PrimitiveSpec | None = field(default=None, compare=False, repr=False)
    extension: ExtensionSpec | None = field(default=None, compare=False, repr=False)

    def key(self) -> tuple[str, str, str, str, int]:
        return (self.primitive_name, self.test_name, self.extension_name, self.ctype, self.size_bits)

    def sort_key(self) -> tuple:
        return (
            self.category,
            self.primitive_name,
            self.test_name,
            self.extension_name,
            self.ctype,
            self.size_bits,
        )

    def case_name(self) -> str:
        name = (
            f"{self.category}::{self.primitive_name}::{self.test_name}"
            f"/{self.extension_name}/{self.ctype}"
        )
        if self.extension is not None and self.extension.is_size_polymorphic:
            name += f"/{self.size_bits}"
        return name


@dataclass
class TestGraph:
    nodes: list[TestNode] = field(default_factory=list)
    edges: list[tuple[TestNode, TestNode]] = field(default_factory=list)


def collect_tests(
    plan: GenerationPlan,
    model: DataModel,
    diagnostics: DiagnosticLog | None = None,
) -> list[TestNode]:
    """One node per (test case x plan entry of its primitive).

    A test whose required primitive is not generated at all for the entry's
    (extension, ctype, size) cannot even compile and is skipped with a
    warning; requirements that are generated but untested merely mark the
    node unsafe later on.
    """
    planned = {e.key() for e in plan.entries}
    nodes: list[TestNode] = []
    warned: set[str] = set()
    for entry in plan.entries:
        primitive = entry.primitive
        if not primitive.tests:
            if diagnostics is not None and primitive.primitive_name not in warned:
                diagnostics.warning(
                    STAGE, f"primitive {primitive.primitive_name!r} has no test cases"
                )
                warned.add(primitive.primitive_name)
            continue
        for test in primitive.tests:
            unavailable = sorted(
                dep
                for dep in set(test.requires)
                if (dep, entry.extension.extension_name, entry.ctype, entry.size_bits)
                not in planned
            )
            if unavailable:
                if diagnostics is not None:
                    diagnostics.warning(
                        STAGE,
                        f"skipping test {primitive.primitive_name}::{test.test_name} for "
                        f"{entry.extension.extension_name}/{entry.ctype}/{entry.size_bits}: "
                        f"required primitives not generated: {', '.join(unavailable)}",
                    )
                continue
            nodes.append(
                TestNode(
                    category=primitive.category,
                    primitive_name=primitive.primitive_name,
                    test_name=test.test_name,
                    extension_name=entry.extension.extension_name,
                    ctype=entry.ctype,
                    size_bits=entry.size_bits,
                    implementation=test.implementation,
                    requires=test.requires,
                    primitive=primitive,
                    extension=entry.extension,
                )
            )
    seen: set[tuple] = set()
    for node in nodes:
        if node.key() in seen:
            raise InternalError(f"duplicate test node {node.key()}")
        seen.add(node.key())
    return nodes


def _find_cycle(nodes: list[TestNode], successors: dict[int, list[int]]) -> list[TestNode]:
    color = {i: 0 for i in range(len(nodes))}
    stack: list[int] = []

    def visit(i: int) -> list[int] | None:
        color[i] = 1
        stack.append(i)
        for j in successors.get(i, ()):
            if color[j] == 1:
                return stack[stack.index(j):] + [j]
            if color[j] == 0:
                found = visit(j)
                if found is not None:
                    return found
        stack.pop()
        color[i] = 2
        return None

    for i in range(len(nodes)):
        if color[i] == 0:
            found = visit(i)
            if found is not None:
                return [nodes[j] for j in found]
    return []


def build_dependency_graph(nodes: list[TestNode]) -> TestGraph:
    """Create edges along `requires`, mark unsafe nodes, reject cycles."""
    by_config: dict[tuple[str, str, str, int], list[int]] = {}
    for i, node in enumerate(nodes):
        by_config.setdefault(
            (node.primitive_name, node.extension_name, node.ctype, node.size_bits), []
        ).append(i)

    final_nodes: list[TestNode] = []
    for node in nodes:
        missing = tuple(
            sorted(
                dep
                for dep in set(node.requires)
                if (dep, node.extension_name, node.ctype, node.size_bits) not in by_config
            )
        )
        if missing:
            final_nodes.append(replace(node, unsafe=True, missing_requirements=missing))
        else:
            final_nodes.append(node)

    edge_indices: list[tuple[int, int]] = []
    successors: dict[int, list[int]] = {}
    for b_index, node in enumerate(final_nodes):
        for dep in node.requires:
            for a_index in by_config.get(
                (dep, node.extension_name, node.ctype, node.size_bits), ()
            ):
                if a_index == b_index:
                    continue
                edge_indices.append((a_index, b_index))
                successors.setdefault(a_index, []).append(b_index)

    indegree = [0] * len(final_nodes)
    for _, b in edge_indices:
        indegree[b] += 1
    ready = [i for i, d in enumerate(indegree) if d == 0]
    visited = 0
    queue = list(ready)
    while queue:
        i = queue.pop()
        visited += 1
        for j in successors.get(i, ()):
            indegree[j] -= 1
            if indegree[j] == 0:
                queue.append(j)
    if visited != len(final_nodes):
        cycle = _find_cycle(final_nodes, successors)
        names = " -> ".join(n.case_name() for n in cycle)
        raise GenerationError(f"test dependency cycle detected: {names}")

    return TestGraph(
        nodes=final_nodes,
        edges=[(final_nodes[a], final_nodes[b]) for a, b in edge_indices],
    )


def order_tests(graph: TestGraph) -> list[TestNode]:
    """Topological order; among ready nodes the canonical sort key decides."""
    index_of = {id(node): i for i, node in enumerate(graph.nodes)}
    successors: dict[int, list[int]] = {}
    indegree = [0] * len(graph.nodes)
    for a, b in graph.edges:
        ai, bi = index_of[id(a)], index_of[id(b)]
        successors.setdefault(ai, []).append(bi)
        indegree[bi] += 1

    heap: list[tuple[tuple, int]] = []
    for i, node in enumerate(graph.nodes):
        if indegree[i] == 0:
            heapq.heappush(heap, (node.sort_key(), i))
    ordered: list[TestNode] = []
    while heap:
        _, i = heapq.heappop(heap)
        ordered.append(graph.nodes[i])
        for j in successors.get(i, ()):
            indegree[j] -= 1
            if indegree[j] == 0:
                heapq.heappush(heap, (graph.nodes[j].sort_key(), j))
    if len(ordered) != len(graph.nodes):
        raise InternalError("order_tests called on a cyclic graph")
    return ordered


def _asset_dir() -> Path:
    return Path(__file__).parent / "resources" / "assets"


def render_tests(
    ordered: list[TestNode],
    templates: TemplateSet,
    model: DataModel,
    target: HardwareTarget | None = None,
    diagnostics: DiagnosticLog | None = None,
    tool_version: str = "0",
) -> FileManifest:
    """Render one test translation unit per extension plus static support files."""
    manifest = FileManifest()
    if not ordered:
        if diagnostics is not None:
            diagnostics.info(STAGE, "no test cases collected; skipping test emission")
        return manifest

    banner = make_banner(model_fingerprint(model), tool_version)
    template_source = templates.aux_template("test_file.cpp.j2")

    by_extension: dict[str, list[TestNode]] = {}
    for node in ordered:
        by_extension.setdefault(node.extension_name, []).append(node)

    for extension_name in sorted(by_extension):
        cases = []
        for node in by_extension[extension_name]:
            context = build_render_context(
                node.extension, node.primitive, node.ctype, node.size_bits, target
            )
            where = f"test {node.case_name()}"
            body = render_text(node.implementation, context, where)
            lines = [line.rstrip() for line in body.splitlines()]
            while lines and not lines[0]:
                lines.pop(0)
            while lines and not lines[-1]:
                lines.pop()
            cases.append(
                {
                    "name": node.case_name(),
                    "primitive_name": node.primitive_name,
                    "extension_name": node.extension_name,
                    "vec_type": f"{node.extension_name}<{node.ctype}, {node.size_bits}>",
                    "unsafe": node.unsafe,
                    "missing_joined": ", ".join(node.missing_requirements),
                    "body": indent_block("\n".join(lines), " " * 4),
                }
            )
        content = render_text(
            template_source,
            {
                "license_header": templates.license_header,
                "banner": banner,
                "extension_name": extension_name,
                "cases": cases,
            },
            f"test file for extension {extension_name}",
        )
        manifest.add(f"tests/test_{extension_name}.cpp", content, ROLE_TEST)

    for asset in TEST_ASSETS:
        content = (_asset_dir() / asset).read_text(encoding="utf-8")
        manifest.add(f"tests/{asset}", content, ROLE_TEST)
    return manifest


def emit_tests(
    ordered: list[TestNode],
    templates: TemplateSet,
    model: DataModel,
    outdir: Path | str,
    target: HardwareTarget | None = None,
    diagnostics: DiagnosticLog | None = None,
    tool_version: str = "0",
) -> FileManifest:
    manifest = render_tests(ordered, templates, model, target, diagnostics, tool_version)
    write_manifest(manifest, outdir)
    return manifest

"""Shared fixtures: corpus access and synthetic data-model factories."""

from __future__ import annotations

from pathlib import Path

import pytest
import yaml

from simdgen import schema as schema_mod
from simdgen.datamodel import load_data_model

REPO_ROOT = Path(__file__).resolve().parent.parent
CORPUS_DIR = REPO_ROOT / "corpus"


@pytest.fixture(scope="session")
def corpus_dir() -> Path:
    return CORPUS_DIR


@pytest.fixture(scope="session")
def default_schema():
    return schema_mod.load_default_schema()


@pytest.fixture(scope="session")
def corpus_model(default_schema):
    return load_data_model(CORPUS_DIR, default_schema)


def minimal_extension(name: str = "ext", **overrides) -> dict:
    doc = {
        "extension_name": name,
        "vendor": "acme",
        "lscpu_flags": [],
        "includes": ["<cstdint>", "<cstddef>"],
        "register_type_expr": "{{ ctype }}",
        "mask_type_expr": "bool",
        "default_size_bits": 64,
        "arch_flag_map": {},
    }
    doc.update(overrides)
    return doc


def minimal_primitive(name: str = "op", **overrides) -> dict:
    doc = {
        "primitive_name": name,
        "parameters": [{"name": "value", "ctype": "register_t"}],
        "return_ctype": "register_t",
        "definitions": [
            {
                "target_extension": "ext",
                "ctypes": ["uint32_t"],
                "implementation": "return value;",
            }
        ],
    }
    doc.update(overrides)
    return doc


def write_model_dir(root: Path, extensions: list[dict], primitive_files: dict[str, list[dict]]) -> Path:
    """Write a synthetic UPD tree: extensions/*.yaml and primitives/*.yaml."""
    ext_dir = root / "extensions"
    prim_dir = root / "primitives"
    ext_dir.mkdir(parents=True, exist_ok=True)
    prim_dir.mkdir(parents=True, exist_ok=True)
    for ext in extensions:
        path = ext_dir / f"{ext['extension_name']}.yaml"
        path.write_text(yaml.safe_dump(ext, sort_keys=False), encoding="utf-8")
    for stem, docs in primitive_files.items():
        chunks = []
        for doc in docs:
            chunks.append("---\n" + yaml.safe_dump(doc, sort_keys=False) + "...\n")
        (prim_dir / f"{stem}.yaml").write_text("".join(chunks), encoding="utf-8")
    return root

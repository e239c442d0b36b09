"""Exception hierarchy shared by all generator stages."""

from __future__ import annotations


class SimdgenError(Exception):
    """Base class for all errors raised by the generator."""


class SchemaError(SimdgenError):
    """The schema meta-document itself is malformed."""

    def __init__(self, problems: list[str]):
        self.problems = list(problems)
        super().__init__("; ".join(problems))


class ModelError(SimdgenError):
    """The user-provided data model violates a structural constraint."""


class ModelValidationError(ModelError):
    """Schema validation of user documents produced errors."""

    def __init__(self, issues):
        self.issues = list(issues)
        lines = [f"{i.document}: {i.field_path}: {i.message}" for i in self.issues]
        super().__init__("\n".join(lines))


class DetectionError(SimdgenError):
    """Host hardware capabilities could not be determined."""


class RenderError(SimdgenError):
    """A template could not be rendered to concrete source text."""


class GenerationError(SimdgenError):
    """A post-selection generation step failed (e.g. a dependency cycle)."""


class ArgumentsError(SimdgenError):
    """Invalid command-line or API arguments."""


class InternalError(SimdgenError):
    """A precondition that callers must uphold was violated."""

"""Ordered, append-only diagnostic log shared across pipeline stages.

Messages are formatted as ``LEVEL <stage>: message`` so runs with identical
inputs produce identical diagnostic text.
"""

from __future__ import annotations

from dataclasses import dataclass, field

ERROR = "ERROR"
WARNING = "WARNING"
INFO = "INFO"


@dataclass(frozen=True)
class Diagnostic:
    level: str
    stage: str
    message: str

    def format(self) -> str:
        return f"{self.level} {self.stage}: {self.message}"


@dataclass
class DiagnosticLog:
    entries: list[Diagnostic] = field(default_factory=list)

    def error(self, stage: str, message: str) -> None:
        self.entries.append(Diagnostic(ERROR, stage, message))

    def warning(self, stage: str, message: str) -> None:
        self.entries.append(Diagnostic(WARNING, stage, message))

    def info(self, stage: str, message: str) -> None:
        self.entries.append(Diagnostic(INFO, stage, message))

    def has_errors(self) -> bool:
        return any(d.level == ERROR for d in self.entries)

    def warnings(self) -> list[Diagnostic]:
        return [d for d in self.entries if d.level == WARNING]

    def format_lines(self, min_level: str = INFO) -> list[str]:
        order = {ERROR: 0, WARNING: 1, INFO: 2}
        threshold = order[min_level]
        return [d.format() for d in self.entries if order[d.level] <= threshold]

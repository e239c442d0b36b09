"""Hardware target description: explicit flag sets or host CPU detection."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Iterable

from .errors import ArgumentsError, DetectionError

SOURCE_EXPLICIT = "explicit"
SOURCE_HOST = "host-detected"

# Register widths used for size-polymorphic extensions when the user does not
# request specific ones.
DEFAULT_POLYMORPHIC_SIZES = (128, 256, 512, 1024, 2048)

CPUINFO_PATH = Path("/proc/cpuinfo")


@dataclass(frozen=True)
class HardwareTarget:
    """Normalized capability flags plus requested register widths."""

    flags: frozenset[str]
    requested_sizes_bits: tuple[int, ...] = ()
    source: str = SOURCE_EXPLICIT

    def flag_list(self) -> list[str]:
        return sorted(self.flags)


def normalize_flag(raw: str) -> str:
    """Lowercase a capability flag and strip surrounding whitespace."""
    token = raw.strip().lower()
    if not token:
        raise ArgumentsError(f"capability flag must not be empty (got {raw!r})")
    return token


def _normalize_sizes(sizes: Iterable[int]) -> tuple[int, ...]:
    out: set[int] = set()
    for size in sizes:
        if not isinstance(size, int) or isinstance(size, bool):
            raise ArgumentsError(f"register width must be an integer (got {size!r})")
        if size <= 0 or size % 8 != 0:
            raise ArgumentsError(f"register width must be a positive multiple of 8 (got {size})")
        out.add(size)
    return tuple(sorted(out))


def parse_target(flag_texts: Iterable[str], sizes: Iterable[int] = ()) -> HardwareTarget:
    """Build an explicit target from user-given flag texts and register widths."""
    flags = frozenset(normalize_flag(f) for f in flag_texts)
    return HardwareTarget(flags=flags, requested_sizes_bits=_normalize_sizes(sizes), source=SOURCE_EXPLICIT)


def read_capability_flags(cpuinfo_path: Path | str = CPUINFO_PATH) -> frozenset[str]:
    """Extract the capability token set from an OS cpuinfo pseudo-file.

    The first line starting with ``flags`` (x86) or ``Features`` (ARM) is
    split on whitespace after the colon.
    """
    path = Path(cpuinfo_path)
    try:
        text = path.read_text(encoding="utf-8", errors="replace")
    except OSError as exc:
        raise DetectionError(
            f"cannot read CPU capability source {path}: {exc}; "
            "pass explicit --targets flags instead"
        ) from exc
    for line in text.splitlines():
        if line.startswith(("flags", "Features")):
            _, _, rest = line.partition(":")
            tokens = [normalize_flag(t) for t in rest.split()]
            return frozenset(tokens)
    raise DetectionError(
        f"no capability line ('flags' or 'Features') found in {path}; "
        "pass explicit --targets flags instead"
    )


def detect_host(sizes: Iterable[int] = (), cpuinfo_path: Path | str = CPUINFO_PATH) -> HardwareTarget:
    """Query the host operating system for the CPU capability flag set."""
    flags = read_capability_flags(cpuinfo_path)
    return HardwareTarget(flags=flags, requested_sizes_bits=_normalize_sizes(sizes), source=SOURCE_HOST)

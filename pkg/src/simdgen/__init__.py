"""simdgen: generate a hardware-tailored C++ SIMD abstraction library."""

__version__ = "0.1.0"

from .datamodel import (  # noqa: F401
    BASE_TYPE_UNIVERSE,
    DataModel,
    DefinitionSpec,
    ExtensionSpec,
    ParameterSpec,
    PrimitiveSpec,
    TestSpec,
    load_data_model,
)
from .diagnostics import DiagnosticLog  # noqa: F401
from .schema import FieldRule, Schema, ValidationReport, load_schema, validate, enrich  # noqa: F401
from .selection import GenerationPlan, PlanEntry, build_plan  # noqa: F401
from .target import HardwareTarget, detect_host, normalize_flag, parse_target  # noqa: F401

from typing import Any, Dict, Type, TypeVar
from pydantic import BaseModel, ValidationError
from slstream.core.exceptions import ConfigurationError
from slstream.schemas.process import (
    GaussianInnovation,
    StudentTInnovation,
    InnovationSpec,
    ArProcessSpec,
)
from slstream.schemas.sampler import SamplerConfig
from slstream.schemas.experiment import GridCell, ExperimentSpec, GridConfig, SweepConfig
from slstream.schemas.stream import StreamSource
from slstream.schemas.records import (
    SCHEMA_VERSION,
    ReportRecord,
    PilotRecord,
    BlockRecord,
    VerdictRecord,
    LeveragePointRecord,
    ExperimentRowRecord,
    SafeguardRecord,
)

M = TypeVar("M", bound=BaseModel)


def validate(model: Type[M], data: Dict[str, Any] = None, **kwargs: Any) -> M:
    """Build a schema instance, converting validation failures to ConfigurationError."""
    payload = dict(data or {}, **kwargs)
    try:
        return model.model_validate(payload)
    except ValidationError as e:
        raise ConfigurationError(f"Invalid {model.__name__}: {e.errors()[0]['msg']}") from e


__all__ = [
    "validate",
    "GaussianInnovation",
    "StudentTInnovation",
    "InnovationSpec",
    "ArProcessSpec",
    "SamplerConfig",
    "GridCell",
    "ExperimentSpec",
    "GridConfig",
    "SweepConfig",
    "StreamSource",
    "SCHEMA_VERSION",
    "ReportRecord",
    "PilotRecord",
    "BlockRecord",
    "VerdictRecord",
    "LeveragePointRecord",
    "ExperimentRowRecord",
    "SafeguardRecord",
]

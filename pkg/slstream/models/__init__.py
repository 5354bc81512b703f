from slstream.models.timeseries import Sample, LagVector, StabilityTag, StabilityClass
from slstream.models.pilot import PilotModel
from slstream.models.block import (
    Method,
    SlsBlock,
    EventTag,
    SamplerEvent,
    BlockEstimate,
    ConfidenceRegion,
)
from slstream.models.monitor import MonitorVerdict

__all__ = [
    "Sample",
    "LagVector",
    "StabilityTag",
    "StabilityClass",
    "PilotModel",
    "Method",
    "SlsBlock",
    "EventTag",
    "SamplerEvent",
    "BlockEstimate",
    "ConfidenceRegion",
    "MonitorVerdict",
]

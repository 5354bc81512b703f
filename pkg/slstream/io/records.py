"""
JSONL report records: one pydantic model per line, stamped with the run's
config hash and seed.
"""

import hashlib
import json
import sys
from pydantic import ValidationError
from typing import Any, Dict, IO, Optional
from slstream.core.exceptions import ConfigurationError
from slstream.models.block import BlockEstimate, SlsBlock
from slstream.models.monitor import MonitorVerdict
from slstream.models.pilot import PilotModel
from slstream.schemas.records import (
    BlockRecord,
    LeveragePointRecord,
    PilotRecord,
    ReportRecord,
    SafeguardRecord,
    VerdictRecord,
)


def config_hash(config: Dict[str, Any]) -> str:
    """SHA-256 of the canonical JSON form, truncated to 16 hex characters."""
    canonical = json.dumps(config, sort_keys=True, separators=(",", ":"), default=str)
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()[:16]


class RecordWriter:
    """Single writer for a JSONL record stream."""

    def __init__(self, handle: IO = None, config_hash: str = "", seed: int = 0, channel: Optional[str] = None):
        self.handle = handle or sys.stdout
        self.envelope = {"config_hash": config_hash, "seed": seed, "channel": channel}
        self.written = 0

    def write(self, record: ReportRecord) -> None:
        self.handle.write(record.model_dump_json())
        self.handle.write("\n")
        self.written += 1

    def pilot(self, pilot: PilotModel) -> None:
        self.write(PilotRecord(**self.envelope, **pilot.to_dict()))

    def block(self, block: SlsBlock, est: BlockEstimate) -> None:
        self.write(BlockRecord(
            **self.envelope,
            method=block.method.value,
            start=block.start,
            stop=block.stop,
            length=block.length,
            acc_info=block.acc_info,
            beta_hat=est.beta_hat.tolist(),
            sigma_hat_sq=est.sigma_hat_sq,
            degenerate=est.degenerate,
        ))

    def verdict(self, verdict: MonitorVerdict) -> None:
        self.write(VerdictRecord(**self.envelope, **verdict.to_dict()))

    def leverage_point(self, index: int, leverage: float) -> None:
        self.write(LeveragePointRecord(**self.envelope, index=index, leverage=leverage))

    def safeguard(self, start: int, index: int) -> None:
        self.write(SafeguardRecord(**self.envelope, start=start, index=index))

    def flush(self) -> None:
        self.handle.flush()


def read_pilot_record(path: str) -> PilotModel:
    """Load the first pilot record from a JSONL file."""
    try:
        with open(path, "r") as f:
            lines = [line.strip() for line in f if line.strip()]
    except OSError as e:
        raise ConfigurationError(f"Cannot read pilot file {path}: {e.strerror}") from e

    for line in lines:
        try:
            data = json.loads(line)
            if data.get("kind") == "pilot":
                record = PilotRecord.model_validate(data)
                return PilotModel.from_dict(record.model_dump())
        except (json.JSONDecodeError, ValidationError) as e:
            raise ConfigurationError(f"Malformed pilot file {path}: {e}") from e
    raise ConfigurationError(f"No pilot record in {path}")

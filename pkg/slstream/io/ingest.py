"""
Pull-based stream ingestion and export.

CSV input is either a single ``value`` column or ``index,value``; a header row
is detected when its first field is not numeric. An index column must rise by
exactly one per row. Raw inputs are contiguous little-endian float32 / float64.
Samples are renumbered consecutively over the accepted values, so a rejected
non-finite value never leaves an index gap.
"""

import csv
import io
import math
import sys
from dataclasses import dataclass
from typing import IO, Iterator, Optional
import numpy as np
from slstream.core.exceptions import DataError
from slstream.models.timeseries import Sample
from slstream.schemas.stream import StreamSource
from slstream.logging_config import get_logger

logger = get_logger(__name__)

_RAW_DTYPES = {"raw_f32le": np.dtype("<f4"), "raw_f64le": np.dtype("<f8")}
_RAW_CHUNK = 65536


@dataclass
class IngestStats:
    rows_read: int = 0
    accepted: int = 0
    rejected_non_finite: int = 0

    def to_dict(self):
        return {
            "rows_read": self.rows_read,
            "accepted": self.accepted,
            "rejected_non_finite": self.rejected_non_finite,
        }


def _is_number(text: str) -> bool:
    try:
        float(text)
    except ValueError:
        return False
    return True


def _parse_index(text: str, line_no: int) -> int:
    try:
        return int(text)
    except ValueError:
        raise DataError(f"Line {line_no}: cannot parse index {text!r}") from None


class StreamReader:
    """Iterate Samples from a StreamSource with constant memory."""

    def __init__(self, source: StreamSource, handle: Optional[IO] = None):
        self.source = source
        self._handle = handle
        self.stats = IngestStats()

    def _open(self) -> IO:
        if self._handle is not None:
            return self._handle
        if self.source.is_stdin:
            return sys.stdin.buffer if self.source.is_binary else sys.stdin
        try:
            if self.source.is_binary:
                return open(self.source.path, "rb")
            return open(self.source.path, "r", newline="")
        except OSError as e:
            raise DataError(f"Cannot read {self.source.path}: {e.strerror}") from e

    def __iter__(self) -> Iterator[Sample]:
        handle = self._open()
        try:
            values = self._raw_values(handle) if self.source.is_binary else self._csv_values(handle)
            for value in values:
                self.stats.rows_read += 1
                if not math.isfinite(value):
                    self.stats.rejected_non_finite += 1
                    continue
                yield Sample(index=self.stats.accepted, value=value)
                self.stats.accepted += 1
        finally:
            if self._handle is None and not self.source.is_stdin:
                handle.close()
            if self.stats.rejected_non_finite:
                logger.warning("sample_rejected", channel=self.source.channel, **self.stats.to_dict())

    def _csv_values(self, handle: IO) -> Iterator[float]:
        column = None
        last_index = None
        for line_no, row in enumerate(csv.reader(handle), start=1):
            if not row or all(not cell.strip() for cell in row):
                continue
            if column is None:
                column = len(row) - 1
                if column > 1:
                    raise DataError(f"Line {line_no}: expected 'value' or 'index,value', got {len(row)} columns")
                if not _is_number(row[0].strip()):
                    continue
            if len(row) != column + 1:
                raise DataError(f"Line {line_no}: expected {column + 1} columns, got {len(row)}")
            if column == 1:
                index = _parse_index(row[0].strip(), line_no)
                if last_index is not None and index != last_index + 1:
                    raise DataError(f"Line {line_no}: index jumped from {last_index} to {index}")
                last_index = index
            text = row[column].strip()
            try:
                value = float(text)
            except ValueError:
                raise DataError(f"Line {line_no}: cannot parse value {text!r}") from None
            yield value

    def _raw_values(self, handle: IO) -> Iterator[float]:
        dtype = _RAW_DTYPES[self.source.format]
        chunk_bytes = _RAW_CHUNK * dtype.itemsize
        leftover = b""
        while True:
            data = handle.read(chunk_bytes)
            if not data:
                break
            data = leftover + data
            usable = len(data) - len(data) % dtype.itemsize
            leftover = data[usable:]
            for value in np.frombuffer(data[:usable], dtype=dtype):
                yield float(value)
        if leftover:
            raise DataError(
                f"Trailing {len(leftover)} bytes do not form a whole {dtype.itemsize}-byte float"
            )


def ingest(source: StreamSource) -> StreamReader:
    """Samples from ``source`` in order; iterate the returned reader."""
    return StreamReader(source)


def write_stream(values, path: str, fmt: str = "csv") -> None:
    """Write a series in one of the ingestible formats; path '-' is stdout."""
    x = np.asarray(values, dtype=float)
    if fmt in _RAW_DTYPES:
        payload = x.astype(_RAW_DTYPES[fmt]).tobytes()
        if path == "-":
            sys.stdout.buffer.write(payload)
            sys.stdout.buffer.flush()
        else:
            with open(path, "wb") as f:
                f.write(payload)
        return

    if fmt != "csv":
        raise DataError(f"Unknown stream format {fmt!r}")
    buffer = io.StringIO()
    buffer.write("value\n")
    for value in x:
        buffer.write(repr(float(value)))
        buffer.write("\n")
    if path == "-":
        sys.stdout.write(buffer.getvalue())
        sys.stdout.flush()
    else:
        with open(path, "w", newline="") as f:
            f.write(buffer.getvalue())


def read_values(source: StreamSource) -> np.ndarray:
    """Whole stream as an array (for pilots and tests; not for unbounded input)."""
    return np.fromiter((s.value for s in ingest(source)), dtype=float)

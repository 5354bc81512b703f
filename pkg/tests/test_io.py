import json
import numpy as np
import pytest
from slstream.core.exceptions import ConfigurationError, DataError
from slstream.io.ingest import StreamReader, ingest, read_values, write_stream
from slstream.io.records import RecordWriter, config_hash, read_pilot_record
from slstream.schemas import validate
from slstream.schemas.process import ArProcessSpec
from slstream.schemas.stream import StreamSource
from slstream.services.estimation import block_ls
from slstream.services.sampler import fixed_length_block


def _csv(tmp_path, text, name="in.csv"):
    path = tmp_path / name
    path.write_text(text)
    return StreamSource(format="csv", path=str(path))


def test_csv_single_column_with_header(tmp_path):
    reader = StreamReader(_csv(tmp_path, "value\n1.5\n-2\n3e-1\n"))
    samples = list(reader)
    assert [s.index for s in samples] == [0, 1, 2]
    assert [s.value for s in samples] == [1.5, -2.0, 0.3]


def test_csv_index_value_without_header(tmp_path):
    samples = list(StreamReader(_csv(tmp_path, "10,1.0\n11,2.0\n\n12,3.0\n")))
    assert [s.value for s in samples] == [1.0, 2.0, 3.0]
    assert [s.index for s in samples] == [0, 1, 2]


def test_non_finite_values_are_skipped(tmp_path):
    """Test rejected values are counted and indices stay consecutive."""
    reader = StreamReader(_csv(tmp_path, "value\n1.0\nnan\n2.0\ninf\n3.0\n"))
    samples = list(reader)
    assert [s.value for s in samples] == [1.0, 2.0, 3.0]
    assert [s.index for s in samples] == [0, 1, 2]
    assert reader.stats.to_dict() == {"rows_read": 5, "accepted": 3, "rejected_non_finite": 2}


def test_csv_errors_name_the_line(tmp_path):
    with pytest.raises(DataError, match="Line 3"):
        list(StreamReader(_csv(tmp_path, "value\n1.0\nabc\n")))
    with pytest.raises(DataError, match="Line 3"):
        list(StreamReader(_csv(tmp_path, "1,1.0\n2,2.0\n3\n", name="cols.csv")))
    with pytest.raises(DataError):
        list(StreamReader(_csv(tmp_path, "1,2,3\n", name="wide.csv")))


def test_missing_file_is_a_data_error(tmp_path):
    source = StreamSource(path=str(tmp_path / "nope.csv"))
    with pytest.raises(DataError):
        list(StreamReader(source))


@pytest.mark.parametrize("fmt, dtype", [("raw_f32le", "<f4"), ("raw_f64le", "<f8")])
def test_raw_formats(tmp_path, fmt, dtype):
    values = np.array([0.1, -2.5, 1e3, 7.0])
    path = tmp_path / "stream.bin"
    write_stream(values, str(path), fmt)
    assert path.stat().st_size == values.shape[0] * np.dtype(dtype).itemsize
    read = read_values(StreamSource(format=fmt, path=str(path)))
    assert np.array_equal(read, values.astype(dtype).astype(float))


def test_raw_trailing_bytes(tmp_path):
    path = tmp_path / "broken.bin"
    path.write_bytes(np.array([1.0, 2.0], dtype="<f8").tobytes() + b"\x00\x01\x02")
    with pytest.raises(DataError):
        list(StreamReader(StreamSource(format="raw_f64le", path=str(path))))


def test_csv_export_is_exact(tmp_path, ar1_series):
    path = tmp_path / "exact.csv"
    write_stream(ar1_series[:500], str(path))
    assert path.read_text().splitlines()[0] == "value"
    assert np.array_equal(read_values(StreamSource(path=str(path))), ar1_series[:500])


def test_stream_source_validation():
    with pytest.raises(ConfigurationError):
        validate(StreamSource, format="wav")
    with pytest.raises(ConfigurationError):
        validate(StreamSource, sample_rate_hz=-1.0)
    assert StreamSource().is_stdin


def test_process_spec_validation():
    with pytest.raises(ConfigurationError):
        validate(ArProcessSpec, coeffs=[])
    with pytest.raises(ConfigurationError):
        validate(ArProcessSpec, coeffs=[0.5], innovation={"kind": "student_t", "df": 2.0})
    spec = validate(ArProcessSpec, coeffs=[0.5], innovation={"kind": "student_t", "df": 4.0})
    assert spec.innovation.variance == 1.0


def test_config_hash_is_canonical():
    a = config_hash({"c": 500, "seed": 1, "method": "leverage"})
    b = config_hash({"method": "leverage", "seed": 1, "c": 500})
    assert a == b
    assert len(a) == 16
    assert a != config_hash({"c": 501, "seed": 1, "method": "leverage"})


def test_record_envelope(tmp_path, ar1_series, ar1_pilot):
    """Test every line carries schema version, kind, hash and seed."""
    path = tmp_path / "records.jsonl"
    block = fixed_length_block(ar1_series, 200, 300, 1)
    with open(path, "w") as f:
        writer = RecordWriter(f, "abc123", 7, "ch1")
        writer.pilot(ar1_pilot)
        writer.block(block, block_ls(block))
        writer.leverage_point(250, 0.01)
        writer.safeguard(300, 400)
    lines = [json.loads(line) for line in path.read_text().splitlines()]
    assert [line["kind"] for line in lines] == ["pilot", "block", "leverage_point", "safeguard_abort"]
    for line in lines:
        assert line["schema_version"] == "1.0"
        assert line["config_hash"] == "abc123"
        assert line["seed"] == 7
        assert line["channel"] == "ch1"
    assert lines[1]["method"] == "fixed_length"
    assert lines[1]["length"] == 300


def test_read_pilot_record(tmp_path, ar1_pilot):
    path = tmp_path / "pilot.jsonl"
    with open(path, "w") as f:
        RecordWriter(f, "h", 1).pilot(ar1_pilot)
    pilot = read_pilot_record(str(path))
    assert pilot.order == ar1_pilot.order
    assert np.allclose(pilot.beta0, ar1_pilot.beta0)
    assert pilot.start_rate == pytest.approx(ar1_pilot.start_rate)


def test_read_pilot_record_errors(tmp_path):
    empty = tmp_path / "empty.jsonl"
    empty.write_text('{"kind": "block"}\n')
    with pytest.raises(ConfigurationError):
        read_pilot_record(str(empty))
    broken = tmp_path / "broken.jsonl"
    broken.write_text("{not json\n")
    with pytest.raises(ConfigurationError):
        read_pilot_record(str(broken))
    with pytest.raises(ConfigurationError):
        read_pilot_record(str(tmp_path / "missing.jsonl"))


def test_raw_single_zero(tmp_path):
    path = tmp_path / "zero.bin"
    path.write_bytes(bytes(8))
    assert read_values(StreamSource(format="raw_f64le", path=str(path))).tolist() == [0.0]


def test_headerless_csv(tmp_path):
    assert read_values(_csv(tmp_path, "1.0\n2.0\n3.0\n")).tolist() == [1.0, 2.0, 3.0]


def test_index_gap_is_rejected(tmp_path):
    """Test a jump in the index column fails instead of joining the segments."""
    source = _csv(tmp_path, "index,value\n0,1.0\n1,2.0\n7,3.0\n8,4.0\n")
    with pytest.raises(DataError, match="Line 4: index jumped from 1 to 7"):
        list(ingest(source))


def test_index_must_be_integer(tmp_path):
    with pytest.raises(DataError, match="cannot parse index"):
        list(ingest(_csv(tmp_path, "0,1.0\n1.5,2.0\n")))


def test_ingest_yields_ordered_samples(tmp_path):
    reader = ingest(_csv(tmp_path, "index,value\n5,0.5\n6,-1.0\n7,2.0\n"))
    samples = list(reader)
    assert [(s.index, s.value) for s in samples] == [(0, 0.5), (1, -1.0), (2, 2.0)]
    assert reader.stats.accepted == 3

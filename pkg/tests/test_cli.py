import json
import numpy as np
import pandas as pd
import pytest
from slstream.cli import main

pytestmark = pytest.mark.integration


def _records(out):
    return [json.loads(line) for line in out.splitlines() if line.strip()]


def test_quantile(capsys):
    assert main(["quantile", "--dist", "chi2", "--dof", "2", "--p", "0.95"]) == 0
    assert float(capsys.readouterr().out) == pytest.approx(5.991464547107979, abs=1e-9)

    assert main(["quantile", "--dist", "normal", "--p", "0.975"]) == 0
    assert float(capsys.readouterr().out) == pytest.approx(1.959963984540054, abs=1e-12)


def test_quantile_bad_probability(capsys):
    assert main(["quantile", "--dist", "normal", "--p", "1.5"]) == 2
    assert "error=ConfigurationError exit_code=2" in capsys.readouterr().err


def test_classify(capsys):
    assert main(["classify", "--beta", "1.0"]) == 0
    assert json.loads(capsys.readouterr().out)["tag"] == "unit_root"


def test_unknown_arguments_exit_2(capsys):
    assert main(["sample", "--bogus"]) == 2
    assert "exit_code=2" in capsys.readouterr().err


def test_simulate_writes_stream(tmp_path):
    path = tmp_path / "sim.csv"
    assert main(["simulate", "--beta", "0.5", "--n", "300", "--seed", "7", "--out", str(path)]) == 0
    lines = path.read_text().splitlines()
    assert lines[0] == "value"
    assert len(lines) == 301


def test_simulate_is_reproducible(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    for path in (a, b):
        main(["simulate", "--beta", "0.3", "-0.2", "--innovation", "student_t", "--n", "200",
              "--seed", "3", "--out", str(path)])
    assert a.read_bytes() == b.read_bytes()


def test_pilot_command(capsys, stream_csv):
    assert main(["pilot", "--in", str(stream_csv), "--n0", "200", "--order", "1"]) == 0
    records = _records(capsys.readouterr().out)
    assert len(records) == 1
    assert records[0]["kind"] == "pilot"
    assert records[0]["order"] == 1
    assert records[0]["n0"] == 200


def test_sample_emits_blocks(capsys, stream_csv):
    """Test block records start after the pilot and reach the threshold."""
    code = main(["sample", "--in", str(stream_csv), "--n0", "200", "--order", "1",
                 "--c", "400", "--seed", "5", "--max-blocks", "3"])
    assert code == 0
    blocks = _records(capsys.readouterr().out)
    assert [b["kind"] for b in blocks] == ["block"] * 3
    assert all(b["start"] >= 200 and b["acc_info"] >= 400 for b in blocks)
    assert len({b["config_hash"] for b in blocks}) == 1


def test_sample_output_is_deterministic(capsys, stream_csv):
    argv = ["sample", "--in", str(stream_csv), "--n0", "200", "--c", "300", "--max-blocks", "4"]
    main(argv)
    first = capsys.readouterr().out
    main(argv)
    assert capsys.readouterr().out == first


def test_sample_with_saved_pilot(capsys, tmp_path, stream_csv):
    main(["pilot", "--in", str(stream_csv), "--n0", "200", "--order", "1"])
    pilot_path = tmp_path / "pilot.jsonl"
    pilot_path.write_text(capsys.readouterr().out)

    code = main(["sample", "--in", str(stream_csv), "--pilot", str(pilot_path), "--start-index", "200",
                 "--c", "400", "--method", "uniform", "--max-blocks", "2"])
    assert code == 0
    blocks = _records(capsys.readouterr().out)
    assert len(blocks) == 2
    assert all(b["method"] == "uniform" and b["start"] >= 200 for b in blocks)


def test_sample_without_pilot_exits_2(capsys, stream_csv):
    assert main(["sample", "--in", str(stream_csv), "--c", "400"]) == 2


def test_missing_input_exits_3(capsys, tmp_path):
    code = main(["sample", "--in", str(tmp_path / "missing.csv"), "--n0", "200", "--c", "400"])
    assert code == 3
    assert "error=DataError exit_code=3" in capsys.readouterr().err


def test_short_stream_exits_3(capsys, tmp_path):
    path = tmp_path / "short.csv"
    path.write_text("value\n1.0\n2.0\n")
    assert main(["pilot", "--in", str(path), "--n0", "200"]) == 3


def test_safeguard_exits_4(capsys, stream_csv):
    code = main(["sample", "--in", str(stream_csv), "--n0", "200", "--order", "1", "--c", "1e12",
                 "--method", "uniform", "--q", "1", "--max-block-len", "50"])
    assert code == 4
    captured = capsys.readouterr()
    assert "error=SafeguardAbort exit_code=4" in captured.err
    records = _records(captured.out)
    assert records
    assert all(r["kind"] == "safeguard_abort" for r in records)
    assert records[0]["start"] == 200


def test_monitor_flags_coefficient_change(capsys, shifted_csv):
    code = main(["monitor", "--in", str(shifted_csv), "--n0", "2000", "--order", "1",
                 "--c", "500", "--alpha", "0.001", "--emit-pilot"])
    assert code == 0
    records = _records(capsys.readouterr().out)
    assert records[0]["kind"] == "pilot"
    verdicts = [r for r in records if r["kind"] == "verdict"]
    assert verdicts
    assert all(v["alarm"] for v in verdicts)


def test_monitor_trace(capsys, stream_csv):
    code = main(["monitor", "--in", str(stream_csv), "--n0", "200", "--order", "1", "--c", "400", "--trace"])
    assert code == 0
    kinds = [r["kind"] for r in _records(capsys.readouterr().out)]
    assert kinds.count("leverage_point") == 19_999
    assert "verdict" in kinds


def test_bench_writes_reports(tmp_path):
    """Test bench writes records, CSV and summaries for a small grid."""
    config = {
        "process": {"coeffs": [0.0], "innovation": {"kind": "student_t", "df": 4}},
        "cells": [{"coeffs": [-0.5], "threshold_c": 300}],
        "methods": ["leverage", "fixed_length"],
        "n0": 200,
        "n_rep": 2,
        "fixed_length": 100,
        "seed_base": 9,
    }
    config_path = tmp_path / "grid.json"
    config_path.write_text(json.dumps(config))
    out = tmp_path / "results"

    assert main(["bench", "--config", str(config_path), "--out", str(out)]) == 0
    for name in ("records.jsonl", "report.csv", "timings.csv", "summary.json", "timing.json"):
        assert (out / name).exists()

    report = pd.read_csv(out / "report.csv")
    assert len(report) == 4
    assert "seconds" not in report.columns
    summary = json.loads((out / "summary.json").read_text())
    assert summary["cells"][0]["methods"]["fixed_length"]["block_len"]["median"] == 100


def test_bench_rejects_invalid_config(capsys, tmp_path):
    config_path = tmp_path / "grid.json"
    config_path.write_text(json.dumps({"process": {"coeffs": [0.5]}, "cells": []}))
    assert main(["bench", "--config", str(config_path), "--out", str(tmp_path / "out")]) == 2


def test_bench_outputs_repeat_except_timings(tmp_path):
    """Test two identical bench runs agree byte for byte outside the timing files."""
    config = {
        "process": {"coeffs": [0.0]},
        "cells": [{"coeffs": [0.5], "threshold_c": 200}],
        "methods": ["leverage", "uniform"],
        "n0": 200,
        "n_rep": 2,
        "seed_base": 5,
    }
    config_path = tmp_path / "grid.json"
    config_path.write_text(json.dumps(config))
    first, second = tmp_path / "a", tmp_path / "b"
    assert main(["bench", "--config", str(config_path), "--out", str(first)]) == 0
    assert main(["bench", "--config", str(config_path), "--out", str(second)]) == 0
    for name in ("records.jsonl", "report.csv", "summary.json"):
        assert (first / name).read_bytes() == (second / name).read_bytes()


def test_sample_rejects_index_gap(capsys, tmp_path):
    path = tmp_path / "gap.csv"
    rows = [f"{i},{v!r}" for i, v in enumerate(np.random.default_rng(0).standard_normal(300).tolist())]
    rows[250] = "400," + rows[250].split(",")[1]
    path.write_text("index,value\n" + "\n".join(rows) + "\n")
    assert main(["sample", "--in", str(path), "--n0", "200", "--order", "1", "--c", "50"]) == 3
    assert "index jumped" in capsys.readouterr().err

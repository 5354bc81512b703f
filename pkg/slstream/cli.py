#!/usr/bin/env python3
"""
Command-line surface for sequential leverage sampling.

Usage:
    slstream simulate --beta 0.99 --n 100000 --seed 7 --out stream.csv
    slstream pilot --in stream.csv --n0 200 --pmax 6
    slstream sample --in stream.csv --n0 200 --c 5000 --method leverage
    slstream monitor --in stream.csv --n0 200 --c 5000 --alpha 0.001 --trace
    slstream bench --config data/ar1_grid.json --out results/
    slstream quantile --dist chi2 --dof 2 --p 0.95

Records go to stdout as JSONL; logs and errors go to stderr.
Exit codes: 0 success, 2 configuration error, 3 data error, 4 safeguard abort.
"""

import argparse
import itertools
import json
import sys
from pathlib import Path
from typing import Any, Dict, Iterator, Tuple
import pandas as pd
from slstream.config import settings
from slstream.core.exceptions import (
    ConfigurationError,
    InsufficientDataError,
    SafeguardAbort,
    SlsException,
)
from slstream.evaluation.harness import run_grid, threshold_sweep
from slstream.io.ingest import StreamReader, ingest, write_stream
from slstream.io.records import RecordWriter, config_hash, read_pilot_record
from slstream.models.block import EventTag, Method
from slstream.models.pilot import PilotModel
from slstream.models.timeseries import Sample
from slstream.schemas import (
    ArProcessSpec,
    ExperimentRowRecord,
    GridConfig,
    SamplerConfig,
    StreamSource,
    SweepConfig,
    validate,
)
from slstream.services.estimation import block_ls, chi2_quantile, normal_quantile
from slstream.services.monitor import ChannelMonitor
from slstream.services.pilot import build_pilot
from slstream.services.sampler import SequentialSampler
from slstream.services.timeseries import classify_stability, simulate_ar
from slstream.logging_config import get_logger, setup_logging

logger = get_logger(__name__)


class CliParser(argparse.ArgumentParser):
    """Argument errors surface as ConfigurationError instead of argparse's own exit."""

    def error(self, message: str):
        raise ConfigurationError(message)


def _run_config(args: argparse.Namespace) -> Dict[str, Any]:
    config = {k: v for k, v in vars(args).items() if k not in ("handler", "out", "log_level")}
    config["command"] = args.command
    return config


def _source(args: argparse.Namespace) -> StreamSource:
    return validate(
        StreamSource,
        format=args.format,
        path=args.input,
        sample_rate_hz=args.sample_rate,
        channel=args.channel,
    )


def _pilot_and_stream(args: argparse.Namespace, reader: StreamReader) -> Tuple[PilotModel, Iterator[Sample], int]:
    """
    Resolve the pilot either from ``--pilot`` or from the first ``--n0`` samples.

    Returns:
        Tuple of (pilot, samples to run the sampler over, first eligible start index)
    """
    samples = iter(reader)
    if args.pilot:
        return read_pilot_record(args.pilot), samples, args.start_index

    if args.n0 is None:
        raise ConfigurationError("Missing pilot: pass --pilot FILE or --n0 N")
    head = list(itertools.islice(samples, args.n0))
    if len(head) < args.n0:
        raise InsufficientDataError(f"Stream has {len(head)} samples, pilot needs {args.n0}")
    pilot = build_pilot([s.value for s in head], p_max=args.pmax, order=args.order, rescale=args.rescale)
    return pilot, itertools.chain(head, samples), max(args.n0, args.start_index)


def _check_aborts(aborts: int, max_block_len: int) -> None:
    """Fail with exit code 4 once any block was dropped by the safeguard."""
    if aborts:
        raise SafeguardAbort(f"{aborts} block(s) exceeded max_block_len={max_block_len} and were dropped")


def cmd_simulate(args: argparse.Namespace) -> int:
    innovation = (
        {"kind": "gaussian", "sigma": args.sigma}
        if args.innovation == "gaussian"
        else {"kind": "student_t", "df": args.df, "scale": args.sigma}
    )
    spec = validate(
        ArProcessSpec,
        coeffs=args.beta,
        innovation=innovation,
        burn_in=args.burn_in,
        seed=args.seed,
    )
    write_stream(simulate_ar(spec, args.n), args.out, args.format)
    logger.info("stream_written", n=args.n, path=args.out, format=args.format)
    return 0


def cmd_classify(args: argparse.Namespace) -> int:
    stability = classify_stability(args.beta)
    print(json.dumps({"tag": stability.tag.value, "max_root_modulus": stability.max_root_modulus}))
    return 0


def cmd_pilot(args: argparse.Namespace) -> int:
    reader = ingest(_source(args))
    head = [s.value for s in itertools.islice(iter(reader), args.n0)]
    if len(head) < args.n0:
        raise InsufficientDataError(f"Stream has {len(head)} samples, pilot needs {args.n0}")
    pilot = build_pilot(head, p_max=args.pmax, order=args.order, rescale=args.rescale)
    writer = RecordWriter(sys.stdout, config_hash(_run_config(args)), args.seed, args.channel)
    writer.pilot(pilot)
    writer.flush()
    return 0


def cmd_sample(args: argparse.Namespace) -> int:
    reader = ingest(_source(args))
    pilot, samples, start_index = _pilot_and_stream(args, reader)
    config = validate(
        SamplerConfig,
        threshold_c=args.c,
        pilot=pilot,
        seed=args.seed,
        max_block_len=args.max_block_len,
        uniform_q=args.q,
    )
    writer = RecordWriter(sys.stdout, config_hash(_run_config(args)), args.seed, args.channel)
    if args.emit_pilot:
        writer.pilot(pilot)

    sampler = SequentialSampler(config, Method(args.method), start_index)
    for event in sampler.run(samples, stop_after=args.max_blocks):
        if event.tag is EventTag.BLOCK_COMPLETED:
            writer.block(event.block, block_ls(event.block))
        elif event.tag is EventTag.SAFEGUARD_ABORT:
            writer.safeguard(event.block_start, event.index)
    writer.flush()

    logger.info(
        "sampling_finished",
        blocks=sampler.blocks_completed,
        aborts=sampler.aborts,
        **reader.stats.to_dict(),
    )
    _check_aborts(sampler.aborts, config.max_block_len)
    return 0


def cmd_monitor(args: argparse.Namespace) -> int:
    reader = ingest(_source(args))
    pilot, samples, start_index = _pilot_and_stream(args, reader)
    config = validate(
        SamplerConfig,
        threshold_c=args.c,
        pilot=pilot,
        seed=args.seed,
        max_block_len=args.max_block_len,
    )
    writer = RecordWriter(sys.stdout, config_hash(_run_config(args)), args.seed, args.channel)
    if args.emit_pilot:
        writer.pilot(pilot)

    def on_event(event):
        if args.trace:
            writer.leverage_point(event.index, event.leverage_score)
        if event.tag is EventTag.SAFEGUARD_ABORT:
            writer.safeguard(event.block_start, event.index)

    monitor = ChannelMonitor(config, args.alpha, start_index, on_event)
    for verdict in monitor.process(samples):
        writer.verdict(verdict)
    writer.flush()

    logger.info(
        "monitoring_finished",
        verdicts=monitor.verdicts,
        alarms=monitor.alarms,
        aborts=monitor.aborts,
        **reader.stats.to_dict(),
    )
    _check_aborts(monitor.aborts, config.max_block_len)
    return 0


def _load_json(path: str) -> Dict[str, Any]:
    try:
        with open(path, "r") as f:
            return json.load(f)
    except OSError as e:
        raise ConfigurationError(f"Cannot read config {path}: {e.strerror}") from e
    except json.JSONDecodeError as e:
        raise ConfigurationError(f"Config {path} is not valid JSON: {e.msg}") from e


def _write_json(path: Path, payload: Any) -> None:
    with open(path, "w") as f:
        json.dump(payload, f, indent=2, sort_keys=True)
        f.write("\n")


def cmd_bench(args: argparse.Namespace) -> int:
    grid = validate(GridConfig, _load_json(args.config))
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    digest = config_hash(grid.model_dump(mode="json"))

    rows, timing_rows, summaries, timing = [], [], [], []
    with open(out / "records.jsonl", "w") as jsonl:
        writer = RecordWriter(jsonl, digest, grid.seed_base)
        for spec in grid.experiments():
            report = run_grid(spec, args.workers)
            for record in report.records:
                writer.write(ExperimentRowRecord(
                    **writer.envelope,
                    cell=record.cell,
                    replicate=record.replicate,
                    method=record.method.value,
                    ok=record.ok,
                    mse=record.mse,
                    coord_errors=record.coord_errors,
                    block_len=record.block_len,
                    acc_info=record.acc_info,
                    failure=record.failure,
                ))
            rows.extend(report.rows(include_timing=False))
            timing_rows.extend(
                {"cell": r.cell, "replicate": r.replicate, "method": r.method.value, "seconds": r.seconds}
                for r in report.records
            )
            summaries.append(report.summary(include_timing=False))
            timing.append({
                "cell": report.cell,
                "seconds": {m.value: report.distribution(m, "seconds").to_dict() for m in spec.methods},
            })

    pd.DataFrame(rows).to_csv(out / "report.csv", index=False)
    pd.DataFrame(timing_rows).to_csv(out / "timings.csv", index=False)
    _write_json(out / "summary.json", {"config_hash": digest, "cells": summaries})
    _write_json(out / "timing.json", {"config_hash": digest, "cells": timing})
    logger.info("bench_written", out=str(out), rows=len(rows))
    return 0


def cmd_sweep(args: argparse.Namespace) -> int:
    config = validate(SweepConfig, _load_json(args.config))
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    digest = config_hash(config.model_dump(mode="json"))

    report = threshold_sweep(config, args.workers)
    _write_json(out / "sweep_summary.json", {"config_hash": digest, **report.summary(include_timing=False)})
    _write_json(out / "sweep_timing.json", {"config_hash": digest, **report.summary(include_timing=True)})
    return 0


def cmd_quantile(args: argparse.Namespace) -> int:
    if args.dist == "chi2":
        if args.dof is None:
            raise ConfigurationError("--dof is required for the chi2 distribution")
        value = chi2_quantile(args.dof, args.p)
    else:
        value = normal_quantile(args.p)
    print(repr(value))
    return 0


def _add_stream_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--in", dest="input", default="-", help="Input stream path ('-' = stdin)")
    parser.add_argument("--format", choices=["csv", "raw_f32le", "raw_f64le"], default="csv")
    parser.add_argument("--sample-rate", type=float, default=None, help="Sampling rate in Hz (metadata)")
    parser.add_argument("--channel", default="ch0", help="Channel label stamped on records")


def _add_pilot_args(parser: argparse.ArgumentParser, n0_default=None) -> None:
    parser.add_argument("--n0", type=int, default=n0_default, help="Pilot size taken from the stream head")
    parser.add_argument("--pmax", type=int, default=settings.P_MAX, help="Largest order tried by BIC")
    parser.add_argument("--order", type=int, default=None, help="Fix the order instead of using BIC")
    parser.add_argument("--rescale", type=float, default=1.0, help="Leverage score multiplier")


def _add_sampler_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--pilot", default=None, help="JSONL file holding a pilot record")
    parser.add_argument("--c", type=float, required=True, help="Information threshold")
    parser.add_argument("--seed", type=int, default=settings.DEFAULT_SEED)
    parser.add_argument("--start-index", type=int, default=0, help="First index allowed to start a block")
    parser.add_argument("--max-block-len", type=int, default=settings.MAX_BLOCK_LEN)
    parser.add_argument("--emit-pilot", action="store_true", help="Write the pilot record first")


def build_parser() -> argparse.ArgumentParser:
    parser = CliParser(prog="slstream", description="Sequential leverage sampling for AR(p) streams")
    parser.add_argument("--log-level", default=None, help="Override SLS_LOG_LEVEL")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=CliParser)

    p = sub.add_parser("simulate", help="Write a simulated AR(p) stream")
    p.add_argument("--beta", type=float, nargs="+", required=True, help="AR coefficients b1 .. bp")
    p.add_argument("--innovation", choices=["gaussian", "student_t"], default="gaussian")
    p.add_argument("--sigma", type=float, default=1.0, help="Innovation standard deviation")
    p.add_argument("--df", type=float, default=4.0, help="Student-t degrees of freedom")
    p.add_argument("--burn-in", type=int, default=None)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, default=settings.DEFAULT_SEED)
    p.add_argument("--format", choices=["csv", "raw_f32le", "raw_f64le"], default="csv")
    p.add_argument("--out", default="-")
    p.set_defaults(handler=cmd_simulate)

    p = sub.add_parser("classify", help="Stability class of a coefficient vector")
    p.add_argument("--beta", type=float, nargs="+", required=True)
    p.set_defaults(handler=cmd_classify)

    p = sub.add_parser("pilot", help="Emit a pilot record from the stream head")
    _add_stream_args(p)
    _add_pilot_args(p, n0_default=200)
    p.add_argument("--seed", type=int, default=settings.DEFAULT_SEED)
    p.set_defaults(handler=cmd_pilot)

    p = sub.add_parser("sample", help="Emit block records as they complete")
    _add_stream_args(p)
    _add_pilot_args(p)
    _add_sampler_args(p)
    p.add_argument("--method", choices=["leverage", "uniform"], default="leverage")
    p.add_argument("--q", type=float, default=None, help="Uniform start probability (default: rate-matched)")
    p.add_argument("--max-blocks", type=int, default=None, help="Stop after this many blocks")
    p.set_defaults(handler=cmd_sample)

    p = sub.add_parser("monitor", help="Emit chi-square verdicts per block")
    _add_stream_args(p)
    _add_pilot_args(p)
    _add_sampler_args(p)
    p.add_argument("--alpha", type=float, default=settings.ALARM_ALPHA)
    p.add_argument("--trace", action="store_true", help="Also emit leverage_point records")
    p.set_defaults(handler=cmd_monitor)

    p = sub.add_parser("bench", help="Run a simulation grid")
    p.add_argument("--config", required=True, help="Grid JSON file")
    p.add_argument("--out", required=True, help="Output directory")
    p.add_argument("--workers", type=int, default=None)
    p.set_defaults(handler=cmd_bench)

    p = sub.add_parser("sweep", help="Score several thresholds by held-out prediction error")
    p.add_argument("--config", required=True, help="Sweep JSON file")
    p.add_argument("--out", required=True, help="Output directory")
    p.add_argument("--workers", type=int, default=None)
    p.set_defaults(handler=cmd_sweep)

    p = sub.add_parser("quantile", help="Print a chi-square or normal quantile")
    p.add_argument("--dist", choices=["chi2", "normal"], required=True)
    p.add_argument("--dof", type=int, default=None)
    p.add_argument("--p", type=float, required=True)
    p.set_defaults(handler=cmd_quantile)

    return parser


def main(argv=None) -> int:
    setup_logging()
    try:
        args = build_parser().parse_args(argv)
        if args.log_level:
            setup_logging(args.log_level)
        return args.handler(args) or 0
    except SlsException as e:
        logger.error("command_failed", error=type(e).__name__, exit_code=e.exit_code, message=e.message)
        print(
            f"error={type(e).__name__} exit_code={e.exit_code} message={json.dumps(e.message)}",
            file=sys.stderr,
        )
        return e.exit_code


def run() -> None:
    sys.exit(main())


if __name__ == "__main__":
    run()

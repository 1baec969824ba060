# SEPARABLE-RCA\main.py

import argparse
import datetime as dt
import logging
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional

from src import synth
from src.exceptions import (
    DomainError,
    FormatError,
    InsufficientDataError,
    NoRecordsError,
    SnapshotError,
)
from src.io_managers.configuration_validator import RunConfig
from src.io_managers.file_manager import FileManager
from src.io_managers.ingest import records_to_frame, rejected_to_frame
from src.io_managers.io_manager import IoManager, require
from src.rca_runner import RcaRunner
from src.results_processing.results_processor import ResultsProcessor

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FORMAT = 2
EXIT_INSUFFICIENT_DATA = 3
EXIT_SNAPSHOT = 4
EXIT_NO_RECORDS = 5

MODEL_FILENAME = "model.json"
SYNTH_FILENAME = "synthetic_log.csv"
MANIFEST_FILENAME = "manifest.json"


def _date(value: str) -> dt.date:
    try:
        return dt.date.fromisoformat(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an ISO date: {value!r}")


def _run_overrides(args: argparse.Namespace) -> Dict[str, Any]:
    return {
        "input": args.input,
        "output_dir": args.output_dir,
        "model": getattr(args, "model", None),
        "warmup_days": args.warmup_days,
        "sensitivity": args.sensitivity,
        "top_k_projects": args.top_k_projects,
        "top_k_words": args.top_k_words,
        "min_doc_frequency": args.min_doc_frequency,
        "prior_scale": args.prior_scale,
        "reference_days": args.reference_days,
        "use_stop_words": args.use_stop_words,
    }


def _load_days(io_manager: IoManager, runner: RcaRunner, config: RunConfig):
    result = io_manager.load_records(require(config.input, "input"))
    if result.rejected:
        FileManager.save_results_csv(
            rejected_to_frame(result.rejected), config.output_dir / "rejected_rows.csv"
        )
    return runner.prepare_days(result.records)


def cmd_fit(args: argparse.Namespace, io_manager: IoManager) -> int:
    """Train on the warm-up window (or through --until) and write the model snapshot."""
    config = io_manager.load_run_config(args.config, _run_overrides(args))
    runner = RcaRunner(config)
    days = _load_days(io_manager, runner, config)
    model = runner.fit(days, until=args.until)
    io_manager.save_model(model, config.model or config.output_dir / MODEL_FILENAME)
    return EXIT_OK


def cmd_score(args: argparse.Namespace, io_manager: IoManager) -> int:
    """Score every day after the model horizon with the rolling protocol."""
    config = io_manager.load_run_config(args.config, _run_overrides(args))
    runner = RcaRunner(config)
    model = io_manager.load_model(config.model or config.output_dir / MODEL_FILENAME)
    days = _load_days(io_manager, runner, config)
    _, series = runner.score(model, days)

    processor = ResultsProcessor()
    for (zone, kind), values in series.items():
        FileManager.save_results_csv(
            processor.series_frame([values]), config.output_dir / f"scores_{zone}_{kind}.csv"
        )
    FileManager.save_results_csv(processor.series_frame(series.values()), config.output_dir / "scores.csv")
    anomalies = processor.anomalies_frame(runner.flag(series))
    FileManager.save_results_csv(anomalies, config.output_dir / "anomalies.csv")
    logger.info("%d anomalous (zone, kind, day) entries flagged.", len(anomalies))
    return EXIT_OK


def cmd_rca(args: argparse.Namespace, io_manager: IoManager) -> int:
    """Write project and procedure RCA reports for one (date, zone)."""
    config = io_manager.load_run_config(args.config, _run_overrides(args))
    runner = RcaRunner(config)
    model = io_manager.load_model(config.model or config.output_dir / MODEL_FILENAME)
    days = _load_days(io_manager, runner, config)
    reports = runner.rca(model, days, args.date, args.zone)

    processor = ResultsProcessor()
    stem = f"rca_{args.zone}_{args.date.isoformat()}"
    FileManager.save_text_file(
        "\n".join(report.to_text() for report in reports), config.output_dir / f"{stem}.txt"
    )
    FileManager.write_json_file(
        {"reports": processor.report_documents(reports)}, config.output_dir / f"{stem}.json"
    )
    FileManager.save_results_csv(processor.ranking_frame(reports), config.output_dir / f"{stem}_ranking.csv")
    FileManager.save_results_csv(
        processor.crosstab_frame(reports[1]), config.output_dir / f"{stem}_crosstab.csv"
    )
    print(reports[0].to_text())
    print(reports[1].to_text())
    return EXIT_OK


def _injection(kind: str, value: str) -> synth.InjectionSpec:
    """
    Parses ZONE:PROJECT:DAY:FACTOR (rate_spike), ZONE:PROC_A:PROC_B:DAY:FRACTION
    (message_swap) or ZONE:PROC:DAY:PROBABILITY[:TOKEN] (new_keyword).
    """
    parts = value.split(":")
    try:
        if kind == synth.MESSAGE_SWAP:
            zone, first, second, day, magnitude = parts
            return synth.InjectionSpec(kind, zone, (first, second), int(day), float(magnitude))
        if kind == synth.NEW_KEYWORD and len(parts) == 5:
            zone, procedure, day, magnitude, token = parts
            return synth.InjectionSpec(kind, zone, (procedure,), int(day), float(magnitude), token)
        zone, target, day, magnitude = parts
        return synth.InjectionSpec(kind, zone, (target,), int(day), float(magnitude))
    except (ValueError, DomainError) as error:
        raise FormatError(f"Invalid {kind} injection {value!r}: {error}")


def cmd_synth(args: argparse.Namespace, io_manager: IoManager) -> int:
    """Generate a synthetic log in the ingest schema plus its ground-truth manifest."""
    overrides = {
        "days": args.days,
        "zones": args.zones,
        "projects_per_zone": args.projects_per_zone,
        "procedures_per_project": args.procedures_per_project,
        "vocabulary_size": args.vocabulary_size,
        "daily_volume": args.daily_volume,
        "seed": args.seed,
    }
    config = io_manager.load_generator_config(args.config, overrides)
    injections = (
        [_injection(synth.RATE_SPIKE, v) for v in args.spike]
        + [_injection(synth.MESSAGE_SWAP, v) for v in args.swap]
        + [_injection(synth.NEW_KEYWORD, v) for v in args.new_keyword]
    )
    records, truth = synth.generate(config)
    manifests = []
    for spec in injections:
        records, manifest = synth.inject(records, spec, truth)
        manifests.append(manifest.to_dict())

    output_dir = args.output_dir or Path("results")
    FileManager.save_results_csv(records_to_frame(records), output_dir / SYNTH_FILENAME)
    FileManager.write_json_file(
        {"ground_truth": truth.to_dict(), "injections": manifests}, output_dir / MANIFEST_FILENAME
    )
    logger.info("Wrote %d records to %s.", len(records), output_dir / SYNTH_FILENAME)
    return EXIT_OK


def _add_run_options(parser: argparse.ArgumentParser, needs_model: bool) -> None:
    parser.add_argument("--input", type=Path, help="Error log CSV.")
    if needs_model:
        parser.add_argument("--model", type=Path, help="Model snapshot (default OUTPUT_DIR/model.json).")
    parser.add_argument("--warmup-days", type=int)
    parser.add_argument("--sensitivity", type=float)
    parser.add_argument("--top-k-projects", type=int)
    parser.add_argument("--top-k-words", type=int)
    parser.add_argument("--min-doc-frequency", type=int)
    parser.add_argument("--prior-scale", type=float)
    parser.add_argument("--reference-days", type=int)
    parser.add_argument("--use-stop-words", action="store_const", const=True, default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="separable-rca",
        description="Anomaly detection and root-cause analysis of error logs with separable likelihoods.",
    )
    parser.add_argument("--verbose", action="store_true", help="Log at DEBUG level.")
    subparsers = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="Flat key=value configuration file.")
    common.add_argument("--output-dir", type=Path)

    fit = subparsers.add_parser("fit", parents=[common], help="Train the warm-up model.")
    _add_run_options(fit, needs_model=True)
    fit.add_argument("--until", type=_date, help="Train through this date instead of the warm-up window.")
    fit.set_defaults(handler=cmd_fit)

    score = subparsers.add_parser("score", parents=[common], help="Rolling daily scores and anomalies.")
    _add_run_options(score, needs_model=True)
    score.set_defaults(handler=cmd_score)

    rca = subparsers.add_parser("rca", parents=[common], help="Explain one day of one zone.")
    _add_run_options(rca, needs_model=True)
    rca.add_argument("--date", type=_date, required=True)
    rca.add_argument("--zone", required=True)
    rca.set_defaults(handler=cmd_rca)

    generate = subparsers.add_parser("synth", parents=[common], help="Generate a synthetic error log.")
    generate.add_argument("--days", type=int)
    generate.add_argument("--zones", type=int)
    generate.add_argument("--projects-per-zone", type=int)
    generate.add_argument("--procedures-per-project", type=int)
    generate.add_argument("--vocabulary-size", type=int)
    generate.add_argument("--daily-volume", type=float)
    generate.add_argument("--seed", type=int)
    generate.add_argument("--spike", action="append", default=[], metavar="ZONE:PROJECT:DAY:FACTOR")
    generate.add_argument("--swap", action="append", default=[],
                          metavar="ZONE:PROC_A:PROC_B:DAY:FRACTION")
    generate.add_argument("--new-keyword", action="append", default=[],
                          metavar="ZONE:PROC:DAY:PROBABILITY[:TOKEN]")
    generate.set_defaults(handler=cmd_synth)
    return parser


def main(argv: Optional[List[str]] = None, io_manager: Optional[IoManager] = None) -> int:
    """
    Command-line entry point.

    Returns:
        int: 0 on success, 2 on format or domain errors, 3 on insufficient data,
        4 on an unusable model snapshot, 5 when the requested day has no records.
    """
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO)
    io_manager = io_manager or IoManager()
    try:
        return args.handler(args, io_manager)
    except FormatError as error:
        logger.error("Format error: %s", error)
        return EXIT_FORMAT
    except InsufficientDataError as error:
        logger.error("Insufficient data: %s", error)
        return EXIT_INSUFFICIENT_DATA
    except SnapshotError as error:
        logger.error("Model snapshot error: %s", error)
        return EXIT_SNAPSHOT
    except NoRecordsError as error:
        logger.error("%s", error)
        return EXIT_NO_RECORDS
    except (DomainError, FileNotFoundError) as error:
        logger.error("%s", error)
        return EXIT_FORMAT


if __name__ == "__main__":
    sys.exit(main())

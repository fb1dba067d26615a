# Copyright 2020-     Robot Framework Foundation
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
import argparse
import logging
import os
import re
import sys
import traceback
from dataclasses import replace
from pathlib import Path
from typing import List, Optional, Tuple

from .errors import ConfigurationError
from .simulation.experiment_config import (
    OUTPUT_DIR_ENV,
    ExperimentConfig,
    check_budget,
    estimated_particle_steps,
    load_config,
    serialize,
    with_overrides,
)
from .simulation.noise_model import covariance_table
from .simulation.run_record import ArtifactWriter, failed_fraction
from .simulation.scaling_experiment import ROW_HEADER, SweepPlan, martingale_trend, noise_floor, run_sweep
from .simulation.trajectory import run_replicas
from .simulation.verification import run_verification
from .utils import SteppingMode

LOG_FILE = "stochvlasov.log"
EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_CONFIG_ERROR = 2
COMMANDS = ("run", "sweep", "verify")


def _configure_logging(out: Path):
    out.mkdir(parents=True, exist_ok=True)
    logging.basicConfig(
        level=logging.DEBUG,
        format="%(asctime)s [%(levelname)-8s] %(message)s",
        handlers=[
            logging.FileHandler(out / LOG_FILE, mode="w"),
            logging.StreamHandler(sys.stdout),
        ],
        force=True,
    )


def _write_marker():
    logging.info("=" * 110)


def parse_replicas(text: Optional[str]) -> Optional[Tuple[int, int]]:
    """``A..B`` as an inclusive range, a single ``A`` as ``A..A``."""
    if text is None:
        return None
    match = re.fullmatch(r"\s*(\d+)\s*(?:\.\.\s*(\d+)\s*)?", text)
    if not match:
        raise ConfigurationError(f"--replicas expects A..B with non-negative integers, got '{text}'")
    first = int(match.group(1))
    last = int(match.group(2)) if match.group(2) is not None else first
    if last < first:
        raise ConfigurationError(f"--replicas range {text} is empty")
    return first, last


def _resolve_config(args) -> ExperimentConfig:
    config = load_config(args.config)
    return with_overrides(config, seed=args.seed, output_dir=args.out)


def _with_replica_count(config: ExperimentConfig, replicas: Optional[Tuple[int, int]]) -> ExperimentConfig:
    if replicas is None:
        return config
    first, last = replicas
    if first != 0:
        logging.info(f"Replica ids of sweep and verify start at 0; running {last - first + 1} replicas")
    provenance = {**config.provenance, "statistics.replicas": "override"}
    return replace(config, statistics=replace(config.statistics, replicas=last - first + 1), provenance=provenance)


def cmd_run(config: ExperimentConfig, writer: ArtifactWriter, mode: SteppingMode, replicas, workers) -> int:
    first, last = replicas if replicas is not None else (0, config.statistics.replicas - 1)
    ids = list(range(first, last + 1))
    check_budget(config, estimated_particle_steps(config) * len(ids) / config.statistics.replicas)
    records = run_replicas(config, mode, ids, workers)
    for record in records:
        writer.write_record(record)
    summary = {
        "command": "run",
        "mode": mode.name,
        "replicas": ids,
        "failed": [record.replica_id for record in records if record.failed],
        "failed_fraction": failed_fraction(records),
        "passed": not any(record.failed for record in records),
    }
    writer.write_json("run_summary.json", summary)
    logging.info(f"{len(records)} {mode.name} replicas written, {len(summary['failed'])} failed")
    return EXIT_OK if summary["passed"] else EXIT_CHECK_FAILED


def cmd_sweep(config: ExperimentConfig, writer: ArtifactWriter, workers) -> int:
    def write_records(label, records):
        for record in records:
            writer.write_record(record, f"runs/{label}")

    plan = SweepPlan.from_config(config)
    table = run_sweep(plan, workers, on_records=write_records)
    table.noise_floor = noise_floor(config, workers)
    writer.write_csv("convergence_table.csv", ROW_HEADER, table.csv_rows())
    writer.write_json("convergence_table.json", table.to_dict())
    trend = martingale_trend(table)
    writer.write_json("martingale_trend.json", trend.to_dict())
    passed = table.headline() and table.non_increasing() and trend.passed
    logging.info(
        f"Sweep: non-increasing {table.non_increasing()}, headline {table.headline()}, "
        f"trend slope {trend.slope:.4g} ± {trend.ci:.3g}"
    )
    return EXIT_OK if passed else EXIT_CHECK_FAILED


def cmd_verify(config: ExperimentConfig, writer: ArtifactWriter, workers) -> int:
    spec = config.noise_spec()
    if spec is not None:
        rows = covariance_table(spec)
        writer.write_csv("covariance_table.csv", list(rows[0]), [list(row.values()) for row in rows])
    report = run_verification(config, workers)
    writer.write_json("verification_report.json", report.to_dict())
    for check in report.checks:
        logging.info(f"{check.status.name:<5} {check.name} {check.message}")
    return EXIT_OK if report.passed else EXIT_CHECK_FAILED


def write_error_report(out: Path, command: str, error: BaseException):
    writer = ArtifactWriter(out, ("json",))
    writer.write_json(
        "error.json",
        {
            "command": command,
            "error": type(error).__name__,
            "message": str(error),
            "traceback": traceback.format_exception(type(error), error, error.__traceback__),
        },
    )


def runner(args) -> int:
    command = args.command.lower()
    if command not in COMMANDS:
        raise ConfigurationError(f"Command should be run, sweep or verify, but it was {command}")
    config = _resolve_config(args)
    replicas = parse_replicas(args.replicas)
    writer = ArtifactWriter(config.output.directory, config.output.formats)
    writer.directory.mkdir(parents=True, exist_ok=True)
    writer.path("config.json").write_text(serialize(config), encoding="utf-8")
    if command == "run":
        return cmd_run(config, writer, SteppingMode[args.mode], replicas, args.workers)
    config = _with_replica_count(config, replicas)
    if command == "sweep":
        return cmd_sweep(config, writer, args.workers)
    return cmd_verify(config, writer, args.workers)


# Based on: https://stackoverflow.com/questions/3853722/how-to-insert-newlines-on-argparse-help-text
class SmartFormatter(argparse.HelpFormatter):
    def _split_lines(self, text, width):
        if text.startswith("Possible commands are:"):
            parts: List[str] = []
            for part in text.splitlines():
                part = argparse.HelpFormatter._split_lines(self, part, width)
                parts.extend(part if part else "\n")
            return parts
        return argparse.HelpFormatter._split_lines(self, text, width)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="stochvlasov",
        description="Stochastic Vlasov experiment runner. The log of every command is saved to "
        f"<out>/{LOG_FILE}; a failing command also writes <out>/error.json.",
        formatter_class=SmartFormatter,
    )
    parser.add_argument(
        "command",
        help=(
            "Possible commands are:\nrun\nsweep\nverify\n\nrun integrates the replicas given by --replicas "
            "in the stepping mode given by --mode and writes one CSV and one JSON record per replica.\n\n"
            "sweep runs every member of noise.family_indices against the independent-noise limit and writes "
            "convergence_table.csv and martingale_trend.json.\n\nverify runs the invariant suite and writes "
            "verification_report.json and covariance_table.csv.\n\nExit status is 0 when everything passes, "
            "1 when a check fails and 2 for configuration errors."
        ),
        type=str,
    )
    parser.add_argument("--config", "-c", help="Experiment config JSON file. Argument is mandatory.", required=True)
    parser.add_argument("--seed", help="Overrides seeds.master.", type=int, default=None)
    parser.add_argument("--replicas", help="Inclusive replica id range A..B.", default=None)
    parser.add_argument(
        "--out",
        help=f"Output directory. Overrides output.directory and the {OUTPUT_DIR_ENV} environment variable.",
        default=None,
    )
    parser.add_argument(
        "--mode",
        help="Stepping mode of run: common or independent. Defaults to common.",
        choices=[mode.name for mode in SteppingMode],
        default=SteppingMode.common.name,
    )
    parser.add_argument("--workers", help="Worker pool size. Defaults to the number of CPUs.", type=int, default=None)
    return parser


def _output_directory(args) -> Path:
    if args.out:
        return Path(args.out)
    try:
        return Path(_resolve_config(args).output.directory)
    except ConfigurationError:
        return Path(os.environ.get(OUTPUT_DIR_ENV) or "results")


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    args.workers = args.workers or os.cpu_count()
    out = _output_directory(args)
    _configure_logging(out)
    _write_marker()
    try:
        status = runner(args)
    except ConfigurationError as error:
        logging.error(f"Configuration error: {error}")
        logging.info(traceback.format_exc())
        write_error_report(out, args.command, error)
        status = EXIT_CONFIG_ERROR
    except Exception as error:
        logging.info(traceback.format_exc())
        write_error_report(out, args.command, error)
        status = EXIT_CHECK_FAILED
    _write_marker()
    return status


if __name__ == "__main__":
    sys.exit(main())

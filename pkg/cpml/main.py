"""Main entry point for CPML.

This module provides the command-line interface for the tool.
"""

import argparse
import logging
import os
import sys
from typing import Callable, Dict, List, Optional

from cpml import __version__
from cpml.classifiers import MODEL_TYPES
from cpml.config import ALL_CLASSIFIERS, PipelineConfig, apply_overrides, load_config
from cpml.errors import CpmlError, StageError
from cpml.evaluation import EvalReport
from cpml.pipeline import Pipeline
from cpml.report_writer import ReportWriter
from cpml.utils import read_json

STAGE_COMMANDS = ("synth", "featurize", "split", "train", "eval", "run")


def _add_run_options(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--config",
        required=True,
        help="JSON or YAML pipeline configuration"
    )

    parser.add_argument(
        "--seed",
        type=int,
        default=None,
        help="Use this single seed instead of the configured seeds"
    )

    parser.add_argument(
        "--out",
        default=None,
        help="Output directory (overrides output_dir)"
    )

    parser.add_argument(
        "--classifier",
        choices=list(MODEL_TYPES) + [ALL_CLASSIFIERS],
        default=None,
        help="Classifier to train and evaluate (overrides classifier)"
    )


def parse_args(args: List[str]) -> argparse.Namespace:
    """Parse command line arguments.

    Args:
        args: Command line arguments

    Returns:
        Parsed arguments
    """
    parser = argparse.ArgumentParser(
        prog="cpml",
        description="Predict COPD from clinical notes or vital signs",
        formatter_class=argparse.ArgumentDefaultsHelpFormatter
    )

    parser.add_argument(
        "--version",
        action="version",
        version=f"%(prog)s {__version__}"
    )

    parser.add_argument(
        "--verbose",
        action="store_true",
        help="Log debug output"
    )

    subparsers = parser.add_subparsers(dest="command", required=True)

    descriptions = {
        "synth": "Generate a synthetic dataset at the configured input_path",
        "featurize": "Extract features from the input dataset",
        "split": "Split and balance the featurized records for each seed",
        "train": "Fit PLS and the classifiers on each training set",
        "eval": "Evaluate trained classifiers on each validation set",
        "run": "Run featurize, split, train and eval in order",
    }
    for command in STAGE_COMMANDS:
        subparser = subparsers.add_parser(
            command,
            help=descriptions[command],
            formatter_class=argparse.ArgumentDefaultsHelpFormatter
        )
        _add_run_options(subparser)

    compare = subparsers.add_parser("compare", help="Show the results tables of several runs side by side")
    compare.add_argument(
        "summaries",
        nargs="+",
        help="summary.json files or output directories"
    )

    return parser.parse_args(args)


def configure_logging(verbose: bool) -> None:
    """Send log records to stderr; DEBUG when verbose, otherwise WARNING."""
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )


def build_config(parsed_args: argparse.Namespace) -> PipelineConfig:
    """Load the configuration file and apply command-line overrides.

    Args:
        parsed_args: Parsed stage command arguments

    Returns:
        The effective configuration
    """
    config = load_config(parsed_args.config)
    return apply_overrides(
        config,
        seed=parsed_args.seed,
        output_dir=parsed_args.out,
        classifier=parsed_args.classifier,
    )


def print_reports(reports: List[EvalReport]) -> None:
    """Print one line per classifier and seed."""
    for report in reports:
        print(f"  seed {report.seed} {report.model_type}: "
              f"accuracy {report.accuracy * 100:.1f}%, AUC {report.auc:.3f} "
              f"({report.n_pos} positive / {report.n_neg} negative)")


def run_stage(command: str, config: PipelineConfig) -> None:
    """Run one stage command against a configuration."""
    pipeline = Pipeline(config)
    print(f"Output directory: {os.path.abspath(config.output_dir)} (config {pipeline.digest})")

    if command == "synth":
        print(f"Generating synthetic {config.model_kind} data...")
        path = pipeline.synth()
        print(f"Dataset written to: {path}")
        return

    steps: Dict[str, Callable[[], object]] = {
        "featurize": pipeline.featurize,
        "split": pipeline.split,
        "train": pipeline.train,
    }
    if command in steps:
        print(f"Running {command}...")
        steps[command]()
    else:
        if command == "run":
            for name in ("featurize", "split", "train"):
                print(f"Running {name}...")
                steps[name]()
        print("Running eval...")
        reports = pipeline.evaluate()
        print_reports(reports)
        summary = read_json(os.path.join(config.output_dir, "summary.json"))
        print()
        print(ReportWriter().generate_results_table(summary, title=f"Model: {config.model_kind}"), end="")
    print(f"{command} complete.")


def compare_summaries(paths: List[str]) -> int:
    """Print results tables of several runs side by side."""
    summaries = []
    for path in paths:
        if os.path.isdir(path):
            path = os.path.join(path, "summary.json")
        if not os.path.exists(path):
            print(f"Error: summary not found: {path}")
            return 1
        summaries.append(read_json(path))
    print(ReportWriter().compare_tables(summaries), end="")
    return 0


def main(args: Optional[List[str]] = None) -> int:
    """Main entry point for the application.

    Args:
        args: Command line arguments

    Returns:
        Exit code
    """
    if args is None:
        args = sys.argv[1:]

    parsed_args = parse_args(args)
    configure_logging(parsed_args.verbose)

    if parsed_args.command == "compare":
        return compare_summaries(parsed_args.summaries)

    try:
        config = build_config(parsed_args)
        run_stage(parsed_args.command, config)
    except StageError as e:
        print(f"Error: {e}")
        print(f"Outputs in {parsed_args.out or 'the output directory'} are incomplete (see status.json)")
        return 1
    except CpmlError as e:
        print(f"Error: {e}")
        return 1

    return 0


if __name__ == "__main__":
    sys.exit(main())

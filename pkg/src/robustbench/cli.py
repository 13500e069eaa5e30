"""``robustbench`` command line interface.

Exit codes: 0 success, 1 config or parse error, 2 internal error.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys

from . import __version__
from .benchmark import BenchmarkConfig, emit_report, load_config, run_benchmark
from .errors import ConfigError, ParseError, RobustBenchError

log = logging.getLogger("robustbench")


def _json_or_name(text):
    text = text.strip()
    if text.startswith("{"):
        try:
            return json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"invalid JSON argument: {exc.msg}") from None
    return text


def build_parser():
    parser = argparse.ArgumentParser(prog="robustbench", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a benchmark described by a JSON config")
    run.add_argument("--config", required=True)
    run.add_argument("--output", required=True)
    run.add_argument("--seed", type=int, help="override the config's seed")
    run.add_argument("--parallelism", type=int, help="worker threads (default from config)")

    att = sub.add_parser("attack", help="run a single attack over a dataset")
    att.add_argument("--model", required=True)
    att.add_argument("--format", choices=("csv", "idx"), required=True)
    att.add_argument("--dataset", required=True)
    att.add_argument("--labels", help="IDX label file when it cannot be inferred")
    att.add_argument("--attack", required=True)
    att.add_argument("--params", default="{}", help="JSON object of attack parameters")
    att.add_argument("--criterion", default="misclassification",
                     help="criterion name or JSON object such as '{\"name\": \"top_k\", \"k\": 2}'")
    att.add_argument("--distance", default="mse")
    att.add_argument("--output", required=True)
    att.add_argument("--seed", type=int, default=0)
    att.add_argument("--sample-limit", type=int)
    att.add_argument("--parallelism", type=int, default=1)
    return parser


def _config_for(args):
    if args.command == "run":
        cfg = load_config(args.config)
        if args.seed is not None:
            cfg.global_seed = args.seed
        if args.parallelism is not None:
            if args.parallelism < 1:
                raise ConfigError("--parallelism must be at least 1")
            cfg.parallelism = args.parallelism
        return cfg, False
    params = _json_or_name(args.params)
    if not isinstance(params, dict):
        raise ConfigError("--params must be a JSON object")
    cfg = BenchmarkConfig(
        model_path=args.model,
        dataset_path=args.dataset,
        dataset_format=args.format,
        labels_path=args.labels,
        attacks=[{"name": args.attack, "params": params}],
        criterion=_json_or_name(args.criterion),
        distance=args.distance,
        global_seed=args.seed,
        sample_limit=args.sample_limit,
        parallelism=args.parallelism,
    )
    return cfg, True


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        cfg, keep_inputs = _config_for(args)
        report = run_benchmark(cfg, keep_inputs=keep_inputs)
        emit_report(report, args.output)
    except (ConfigError, ParseError, FileNotFoundError, IsADirectoryError) as exc:
        print(f"robustbench: error: {exc}", file=sys.stderr)
        return 1
    except RobustBenchError as exc:
        print(f"robustbench: error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # pragma: no cover - reported as an internal error
        log.exception("internal error")
        print(f"robustbench: internal error: {exc}", file=sys.stderr)
        return 2
    summary = report["summary"]
    log.info("robustness %s over %d/%d samples", summary["robustness"],
             summary["num_finite"], summary["num_samples"])
    return 0


if __name__ == "__main__":
    sys.exit(main())

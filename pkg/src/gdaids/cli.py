"""Command-line entry point: ``gdaids {ingest,reduce,train-eval,run,report}``."""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys

from . import pipeline
from .config import PipelineConfig, load_config
from .errors import ConfigError, GdaidsError

OUT_ENV = "GDAIDS_OUT"
log = logging.getLogger("gdaids")


def _config(args) -> PipelineConfig:
    cfg = load_config(args.config) if args.config else PipelineConfig()
    for item in args.set or ():
        if "=" not in item:
            raise ConfigError(f"--set expects key=value, got {item!r}")
        key, value = item.split("=", 1)
        cfg.set(key.strip(), value)
    # command-line and environment paths are relative to the working directory
    if os.environ.get(OUT_ENV):
        cfg.set("out.dir", os.path.abspath(os.environ[OUT_ENV]))
    if args.out:
        cfg.set("out.dir", os.path.abspath(args.out))
    if args.seed is not None:
        cfg.set("run.seed", args.seed)
    return cfg


def _print_histograms(summary):
    for split in ("train", "test"):
        hist = summary[split]["histogram"]
        print(f"{split}: {summary[split]['rows']} rows, width {summary[split]['width']}: "
              + ", ".join(f"{k} {v}" for k, v in hist.items()))


def _print_report(report):
    print(f"variant {report['variant']}  accuracy {report['accuracy']:.4f}")
    print(f"{'class':8s} {'DR':>8s} {'FAR':>8s} {'FAR(1vR)':>9s}")

    def fmt(v):
        return "-" if v is None else f"{v:.2f}"

    for c in report["classes"]:
        print(f"{c['name']:8s} {fmt(c['detection_rate']):>8s} {fmt(c['far_tabular']):>8s} "
              f"{fmt(c['far_textual']):>9s}")
    t = report["timings"]
    print(f"reduce fit {t['reduce_fit_s']:.3f}s  train {t['train_s']:.3f}s  "
          f"test {t['test_s']:.3f}s")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="flat key=value config file")
    common.add_argument("--seed", type=int, help="overrides run.seed")
    common.add_argument("--out", help=f"output directory (overrides out.dir and ${OUT_ENV})")
    common.add_argument("--set", action="append", metavar="KEY=VALUE",
                        help="override one config key; repeatable")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="gdaids", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("ingest", parents=[common], help="parse and encode train/test files")
    sub.add_parser("reduce", parents=[common], help="fit LDA/GDA and project the datasets")
    sub.add_parser("train-eval", parents=[common], help="train a classifier and evaluate it")
    sub.add_parser("run", parents=[common], help="ingest, reduce and train-eval in one go")
    rep = sub.add_parser("report", parents=[common], help="compare run reports")
    rep.add_argument("reports", nargs="+", help="report.json files")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "report":
            out = args.out or os.environ.get(OUT_ENV) or "."
            paths = pipeline.cmd_report(args.reports, out)
            for name, path in paths.items():
                print(f"{name}: {path}")
            return 0
        cfg = _config(args)
        if args.command == "ingest":
            _print_histograms(pipeline.cmd_ingest(cfg))
        elif args.command == "reduce":
            s = pipeline.cmd_reduce(cfg)
            print(json.dumps({k: s[k] for k in ("tag", "components", "output_width",
                                                "eigenvalues")}))
        elif args.command == "train-eval":
            _print_report(pipeline.cmd_train_eval(cfg))
        elif args.command == "run":
            _print_report(pipeline.cmd_run(cfg))
    except GdaidsError as e:
        print(f"gdaids {args.command}: {e}", file=sys.stderr)
        return e.exit_code
    return 0


if __name__ == "__main__":
    sys.exit(main())

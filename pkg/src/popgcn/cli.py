"""Command-line front end.

    popgcn build-graph --config exp.ini --data DIR --out graph.csv
    popgcn run         --config exp.ini --data DIR --out report.json [--graph graph.csv]
    popgcn baseline    --config exp.ini --data DIR [--out ridge.json]
    popgcn synth       --preset abide-like --seed 0 --out DIR

Exit codes: 0 success, 2 configuration error, 3 data validation error,
4 numerical failure.
"""

import argparse
import sys

import numpy as np

from . import __version__
from .errors import (
    ConfigError,
    DataValidationError,
    DegenerateFeatureError,
    DivergenceError,
    IllPosedError,
    PhenotypeError,
)
from .evaluation import prepare_fold, run_experiment
from .io import ingest, read_config, read_edges, report_json, write_edges, write_report
from .synth import PRESETS, write_preset

EXIT_OK, EXIT_CONFIG, EXIT_DATA, EXIT_NUMERIC = 0, 2, 3, 4


def _load(args):
    config = read_config(args.config)
    return config, ingest(args.data, config)


def cmd_build_graph(args):
    config, dataset = _load(args)
    labelled = np.flatnonzero(dataset.labelled)
    if labelled.size == 0:
        raise DataValidationError("labels.csv: no labelled samples to fit feature preprocessing on")
    # preprocessing is fitted on every labelled row; there is no held-out fold here
    fd = prepare_fold(dataset, labelled, np.flatnonzero(~dataset.labelled), config)
    write_edges(fd.graph, args.out)
    print(f"wrote {fd.graph.nnz // 2} edges over {len(dataset)} nodes to {args.out}")
    return EXIT_OK


def _progress(quiet):
    if quiet:
        return None
    return lambda msg: print(msg, file=sys.stderr)


def cmd_run(args):
    config, dataset = _load(args)
    graph = read_edges(args.graph, len(dataset)) if args.graph else None
    report = run_experiment(dataset, config, fixed_graph=graph, progress=_progress(args.quiet))
    write_report(report, args.out)
    summary = report.summary()
    for arm in summary:
        print(f"{arm:15s} accuracy {summary[arm]['accuracy']['mean']}")
    if report.failures:
        for f in report.failures:
            print(f"failed: {f['arm']} fold {f['fold']} seed {f['seed']}: {f['error']}", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


def cmd_baseline(args):
    config, dataset = _load(args)
    report = run_experiment(dataset, config, arms=("ridge",), progress=_progress(args.quiet))
    if args.out:
        write_report(report, args.out)
    sys.stdout.write(report_json({"arms": report.entries, "summary": report.summary()}))
    return EXIT_OK


def cmd_synth(args):
    paths = write_preset(args.preset, args.seed, args.out)
    for p in paths:
        print(p)
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(prog="popgcn", description="Population-graph GCN experiments.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", required=True, help="flat key = value experiment config")
        p.add_argument("--data", required=True, help="directory holding features/phenotypes/labels CSVs")

    p = sub.add_parser("build-graph", help="write the population graph as an edge list")
    common(p)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_build_graph)

    p = sub.add_parser("run", help="cross-validated GCN, random-support and ridge comparison")
    common(p)
    p.add_argument("--out", required=True)
    p.add_argument("--graph", help="use this edge list instead of building the population graph")
    p.add_argument("--quiet", action="store_true")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("baseline", help="ridge-only cross-validated metrics")
    common(p)
    p.add_argument("--out")
    p.add_argument("--quiet", action="store_true")
    p.set_defaults(func=cmd_baseline)

    p = sub.add_parser("synth", help="write a synthetic dataset")
    p.add_argument("--preset", required=True, choices=sorted(PRESETS))
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_synth)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (DataValidationError, PhenotypeError, DegenerateFeatureError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (DivergenceError, IllPosedError, FloatingPointError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as exc:
        # remaining value errors come from the data, e.g. too few subjects for the folds
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())

"""Command-line front end.

Subcommands orchestrate the library pipelines directly (everything runs
in-process; no network involved):

* ``detect``       flag outlying curves in a long CSV, write result CSV + SVG
* ``simulate``     draw one labeled sample from a benchmark model
* ``bench``        detection rates over seeded replications
* ``array``        magnitude-shape plot array for multivariate curves
* ``outliergram``  total-vs-magnitude outlyingness plot

Every run writes a ``*.manifest.json`` next to its primary output echoing
all resolved options, so any output can be reproduced from its manifest.
Exit codes: 0 success, 2 input error, 3 numerical degeneracy, 1 unexpected.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import __version__
from .dataio import format_long_csv, format_result_csv, format_truth_csv, parse_long_csv
from .errors import InputError, NumericalError
from .evalbench import run_benchmark
from .functional import array_summaries, summarize_sample
from .plotout import emit_msplot, emit_msplot_array, emit_outliergram
from .robustdet import DetectorConfig, detect_outliers
from .simulate import ModelSpec, model_sample

EXIT_OK = 0
EXIT_UNEXPECTED = 1
EXIT_INPUT = 2
EXIT_NUMERICAL = 3


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="msplot",
        description="Magnitude-shape outlyingness analytics for functional data.",
        formatter_class=argparse.ArgumentDefaultsHelpFormatter,
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    detect = sub.add_parser(
        "detect",
        help="flag outlying curves in a long CSV",
        formatter_class=argparse.ArgumentDefaultsHelpFormatter,
    )
    detect.add_argument("--input", required=True, help="long CSV: curve_id,t,dim_1..dim_p")
    detect.add_argument(
        "--method", choices=["srmd-f", "boxplot"], default="srmd-f", help="detection rule"
    )
    detect.add_argument("--quantile", type=float, default=0.993, help="detection quantile")
    detect.add_argument(
        "--inflation", type=float, default=1.5, help="IQR inflation factor (boxplot method)"
    )
    detect.add_argument(
        "--directions", type=int, default=200, help="random projection directions (p >= 2)"
    )
    detect.add_argument("--seed", type=int, default=0, help="random seed")
    detect.add_argument("--out", required=True, help="result CSV path")
    detect.add_argument("--svg", default=None, help="optional magnitude-shape plot path")

    simulate = sub.add_parser(
        "simulate",
        help="draw one labeled sample from a benchmark model",
        formatter_class=argparse.ArgumentDefaultsHelpFormatter,
    )
    simulate.add_argument("--model", type=int, required=True, help="model id 1..5")
    simulate.add_argument("--n", type=int, default=100, help="sample size")
    simulate.add_argument("--c", type=float, default=0.1, help="contamination level")
    simulate.add_argument("--m", type=int, default=50, help="grid points on [0, 1]")
    simulate.add_argument("--seed", type=int, default=0, help="random seed")
    simulate.add_argument("--out", required=True, help="sample CSV path")
    simulate.add_argument("--truth", required=True, help="ground-truth CSV path")

    bench = sub.add_parser(
        "bench",
        help="detection rates over seeded replications",
        formatter_class=argparse.ArgumentDefaultsHelpFormatter,
    )
    bench.add_argument("--model", type=int, required=True, help="model id 1..5")
    bench.add_argument("--n", type=int, default=100, help="sample size")
    bench.add_argument("--c", type=float, default=0.1, help="contamination level")
    bench.add_argument("--m", type=int, default=50, help="grid points on [0, 1]")
    bench.add_argument("--reps", type=int, default=200, help="replications")
    bench.add_argument("--seed", type=int, default=0, help="base seed for substreams")
    bench.add_argument("--workers", type=int, default=1, help="thread cap; results unaffected")
    bench.add_argument("--out", required=True, help="per-replication rates CSV path")
    bench.add_argument("--summary", required=True, help="aggregate statistics CSV path")

    array = sub.add_parser(
        "array",
        help="magnitude-shape plot array for multivariate curves",
        formatter_class=argparse.ArgumentDefaultsHelpFormatter,
    )
    array.add_argument("--input", required=True, help="long CSV with p >= 2 dimensions")
    array.add_argument("--out", required=True, help="SVG path")

    og = sub.add_parser(
        "outliergram",
        help="total-vs-magnitude outlyingness plot",
        formatter_class=argparse.ArgumentDefaultsHelpFormatter,
    )
    og.add_argument("--input", required=True, help="long CSV")
    og.add_argument("--out", required=True, help="SVG path")

    return parser


def _write_manifest(primary_out: str, args: argparse.Namespace) -> None:
    payload = {"tool": "msplot", "version": __version__}
    payload.update({k: v for k, v in vars(args).items() if k != "func"})
    path = Path(primary_out).with_suffix(".manifest.json")
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def _read_input(path: str) -> str:
    p = Path(path)
    if not p.exists():
        raise InputError(f"input file not found: {path}")
    return p.read_text(encoding="utf-8")


def _cmd_detect(args: argparse.Namespace) -> None:
    sample = parse_long_csv(_read_input(args.input))
    config = DetectorConfig(
        method=args.method,
        quantile=args.quantile,
        inflation=args.inflation,
        n_directions=args.directions,
        seed=args.seed,
    )
    summary, detection = detect_outliers(sample, config)
    Path(args.out).write_text(
        format_result_csv(sample.ids, summary, detection), encoding="utf-8"
    )
    if args.svg:
        mode = "full" if sample.p == 1 else "norm"
        doc = emit_msplot(summary, detection, mode=mode, fmt="svg", ids=sample.ids)
        Path(args.svg).write_bytes(doc.payload)
    _write_manifest(args.out, args)


def _cmd_simulate(args: argparse.Namespace) -> None:
    spec = ModelSpec(model_id=args.model, n=args.n, c=args.c, m=args.m, seed=args.seed)
    labeled = model_sample(spec)
    Path(args.out).write_text(format_long_csv(labeled.sample), encoding="utf-8")
    Path(args.truth).write_text(
        format_truth_csv(labeled.sample.ids, labeled.truth), encoding="utf-8"
    )
    _write_manifest(args.out, args)


def _cmd_bench(args: argparse.Namespace) -> None:
    spec = ModelSpec(model_id=args.model, n=args.n, c=args.c, m=args.m, seed=args.seed)
    rates = run_benchmark(spec, DetectorConfig(), reps=args.reps, seed=args.seed, workers=args.workers)
    Path(args.out).write_text(rates.rates_csv(), encoding="utf-8")
    Path(args.summary).write_text(rates.summary_csv(), encoding="utf-8")
    _write_manifest(args.out, args)


def _cmd_array(args: argparse.Namespace) -> None:
    sample = parse_long_csv(_read_input(args.input))
    marginals, joints = array_summaries(sample)
    doc = emit_msplot_array(marginals, joints)
    Path(args.out).write_bytes(doc.payload)
    _write_manifest(args.out, args)


def _cmd_outliergram(args: argparse.Namespace) -> None:
    sample = parse_long_csv(_read_input(args.input))
    summary = summarize_sample(sample)
    doc = emit_outliergram(summary, ids=sample.ids)
    Path(args.out).write_bytes(doc.payload)
    _write_manifest(args.out, args)


_COMMANDS = {
    "detect": _cmd_detect,
    "simulate": _cmd_simulate,
    "bench": _cmd_bench,
    "array": _cmd_array,
    "outliergram": _cmd_outliergram,
}


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        _COMMANDS[args.subcommand](args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except NumericalError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())

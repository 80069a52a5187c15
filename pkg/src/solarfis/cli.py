"""Command-line benchmark runner.

Subcommands:

* ``ingest <file> --cadence ...``  normalize a raw record into CSV
* ``run <config>``                 run one experiment, write artifacts
* ``suite <dir>``                  run every config, write one table
* ``plotdata <csv> --style ...``   reshape outputs for plotting
* ``validate <config>``            dry-run a config without training

``--seed`` overrides the seed in a config; the data directory can be
overridden with the environment variable named by
:data:`solarfis.experiments.DATA_DIR_ENV`.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .dataset import format_timestamp, load_silso, save_timeseries_csv
from .errors import SolarfisError
from .experiments import (
    DATA_DIR_ENV,
    emit_plot_data,
    load_config,
    run_experiment,
    run_suite,
    validate_experiment,
)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="solarfis",
        description="Train and evaluate fuzzy-network forecasters on sunspot records.",
        epilog=f"Set {DATA_DIR_ENV} to override where data files are looked up.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_ingest = sub.add_parser("ingest", help="parse a raw record and write a normalized CSV")
    p_ingest.add_argument("file", help="raw semicolon- or space-delimited record")
    p_ingest.add_argument("--cadence", required=True, choices=("yearly", "monthly"))
    p_ingest.add_argument("--out", default=None, help="output CSV path (default: input with .csv)")

    p_run = sub.add_parser("run", help="run one experiment config")
    p_run.add_argument("config", help="path to a key = value config file")
    p_run.add_argument("--seed", type=int, default=None, help="override the config's seed")
    p_run.add_argument("--out", default="runs", help="artifact directory (default: runs)")
    p_run.add_argument("--data-dir", default=None, help="directory holding data files")

    p_suite = sub.add_parser("suite", help="run every *.cfg in a directory")
    p_suite.add_argument("dir", help="directory of config files")
    p_suite.add_argument("--seed", type=int, default=None, help="override every config's seed")
    p_suite.add_argument("--out", default="runs", help="artifact directory (default: runs)")
    p_suite.add_argument("--data-dir", default=None, help="directory holding data files")

    p_plot = sub.add_parser("plotdata", help="reshape run outputs into plot-ready CSV")
    p_plot.add_argument("csv", help="forecast CSV (overlay) or suite CSV (error-curve)")
    p_plot.add_argument("--style", required=True, choices=("overlay", "error-curve"))
    p_plot.add_argument("--out", default=None, help="output CSV path")

    p_validate = sub.add_parser("validate", help="check a config and its data without training")
    p_validate.add_argument("config", help="path to a key = value config file")
    p_validate.add_argument("--data-dir", default=None, help="directory holding data files")
    return parser


def _cmd_ingest(args) -> int:
    series = load_silso(args.file, cadence=args.cadence)
    out = Path(args.out) if args.out else Path(args.file).with_suffix(".csv")
    save_timeseries_csv(series, out)
    first = format_timestamp(series.cadence, series.start)
    last = format_timestamp(series.cadence, series.end)
    n_missing = int(series.missing.sum())
    print(f"ingested {series.values.shape[0]} {series.cadence} rows ({first}..{last}), "
          f"{n_missing} missing -> {out}")
    return 0


def _cmd_run(args) -> int:
    cfg = load_config(args.config)
    report, manifest, _ = run_experiment(
        cfg,
        out_dir=args.out,
        config_dir=Path(args.config).parent,
        data_dir=args.data_dir,
        seed_override=args.seed,
    )
    print(f"{report.experiment_id}: {report.model_id} h={report.horizon} "
          f"nmse={report.nmse:.6g} rmse={report.rmse:.6g}")
    print(f"  predicted peak {report.predicted_peak_value:.6g} @ {report.predicted_peak_time}, "
          f"observed {report.observed_peak_value:.6g} @ {report.observed_peak_time} "
          f"(abs error {report.peak_abs_error:.6g})")
    if cfg.reference_nmse:
        print(f"  reference nmse {cfg.reference_nmse} vs achieved {report.nmse:.6g}")
    if cfg.reference_peak_value:
        when = f" @ {cfg.reference_peak_time}" if cfg.reference_peak_time else ""
        print(f"  reference peak {cfg.reference_peak_value}{when} "
              f"vs achieved {report.predicted_peak_value:.6g}")
    if cfg.note:
        print(f"  note: {cfg.note}")
    print(f"  artifacts: {Path(args.out) / report.experiment_id} "
          f"(seed {manifest.seed}, {manifest.wall_clock_seconds:.2f}s)")
    return 0


def _cmd_suite(args) -> int:
    result = run_suite(args.dir, out_dir=args.out, data_dir=args.data_dir, seed_override=args.seed)
    for row in result.rows:
        if row["status"] == "ok":
            print(f"{row['experiment_id']}: nmse={float(row['nmse']):.6g} "
                  f"peak_abs_error={float(row['peak_abs_error']):.6g}")
        else:
            print(f"{row['experiment_id']}: FAILED ({row['error']})")
    wins = 0
    for stem, cmp in result.comparisons.items():
        verdict = "PASS" if cmp["belfis_leq_anfis"] else "FAIL"
        wins += cmp["belfis_leq_anfis"]
        print(f"comparison {stem}: belfis {cmp['belfis_nmse']:.6g} vs "
              f"anfis {cmp['anfis_nmse']:.6g} -> {verdict}")
    if result.comparisons:
        print(f"composed model at or below plain on {wins} of {len(result.comparisons)} comparisons")
    print(f"table: {result.csv_path} ({len(result.rows)} rows, {result.failures} failed)")
    return 1 if result.failures else 0


def _cmd_plotdata(args) -> int:
    src = Path(args.csv)
    if args.out:
        out = Path(args.out)
    else:
        suffix = "_overlay" if args.style == "overlay" else "_error_curve"
        out = src.with_name(src.stem + suffix + ".csv")
    emit_plot_data(src, style=args.style, out_path=out)
    print(f"wrote {out}")
    return 0


def _cmd_validate(args) -> int:
    summary = validate_experiment(args.config, data_dir=args.data_dir)
    print(f"ok: {summary['experiment_id']} ({summary['model_id']}) "
          f"data={summary['data_path']} window={summary['window']} "
          f"train={summary['train_rows']} test={summary['test_rows']}")
    return 0


_COMMANDS = {
    "ingest": _cmd_ingest,
    "run": _cmd_run,
    "suite": _cmd_suite,
    "plotdata": _cmd_plotdata,
    "validate": _cmd_validate,
}


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except SolarfisError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

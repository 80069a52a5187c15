"""Declarative experiment runner.

A benchmark run is described by a flat ``key = value`` text file naming
the data file, the evaluation window, the embedding, the model, and its
training settings.  :func:`run_experiment` turns one such config into
three artifacts written atomically next to each other:

* ``report.json``  - the evaluation summary with a full config echo,
* ``forecast.csv`` - aligned observed/predicted rows,
* ``manifest.json`` - provenance (tool version, hashes, seed, timing).

Reports are byte-identical across reruns of the same config and data;
only the manifest's wall-clock field varies.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import os
import time
from dataclasses import dataclass, fields
from functools import partial
from pathlib import Path

import numpy as np

from . import __version__
from .anfis import TrainConfig
from .dataset import (
    embed,
    format_timestamp,
    load_silso,
    parse_timestamp,
    smooth_13_month,
    split_by_count,
    split_by_date,
)
from .errors import ConfigError, ParseError, RangeError
from .forecast import (
    ForecastResult,
    ModelSpec,
    predict_open_loop,
    predict_recursive,
    train_on_dataset,
    write_forecast_csv,
)
from .metrics import EvalReport, build_report, find_peak, nmse, rmse

DATA_DIR_ENV = "SOLARFIS_DATA_DIR"
MODELS = ("anfis", "belfis", "persistence")
STRATEGIES = ("open_loop", "recursive")
SMOOTHINGS = ("none", "sidc", "plain")
SPLIT_MODES = ("date", "count")

# Free-text footer keys are carried through to the report untouched so a
# run can cite published numbers next to its own.
REFERENCE_KEYS = (
    "reference_nmse",
    "reference_rmse",
    "reference_peak_value",
    "reference_peak_time",
    "note",
)


def _parse_bool(raw: str, key: str) -> bool:
    low = raw.strip().lower()
    if low in ("true", "yes", "1"):
        return True
    if low in ("false", "no", "0"):
        return False
    raise ConfigError(f"{key} must be a boolean, got {raw!r}")


def _parse_int(raw: str, key: str) -> int:
    try:
        return int(str(raw).strip())
    except ValueError:
        raise ConfigError(f"{key} must be an integer, got {raw!r}") from None


def _parse_float(raw: str, key: str) -> float:
    try:
        return float(str(raw).strip())
    except ValueError:
        raise ConfigError(f"{key} must be a number, got {raw!r}") from None


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything needed to rerun one benchmark experiment."""

    experiment_id: str
    data_file: str
    cadence: str
    model: str
    smoothing: str = "none"
    window_start: str | None = None
    window_end: str | None = None
    d: int = 4
    horizon: int = 1
    split_mode: str = "date"
    split_boundary: str | None = None
    train_count: int | None = None
    rules: int = 4
    rules_bl: int | None = None
    rules_mo: int | None = None
    rules_cm: int | None = None
    epochs: int = 50
    learning_rate: float = 1e-5
    seed: int = 0
    normalize: bool = False
    mo_residual: bool = False
    strategy: str = "open_loop"
    steps: int | None = None
    reference_nmse: str | None = None
    reference_rmse: str | None = None
    reference_peak_value: str | None = None
    reference_peak_time: str | None = None
    note: str | None = None

    def __post_init__(self):
        if not self.experiment_id:
            raise ConfigError("experiment_id must be non-empty")
        if self.cadence not in ("yearly", "monthly"):
            raise ConfigError(f"cadence must be yearly or monthly, got {self.cadence!r}")
        if self.model not in MODELS:
            raise ConfigError(f"model must be one of {MODELS}, got {self.model!r}")
        if self.smoothing not in SMOOTHINGS:
            raise ConfigError(f"smoothing must be one of {SMOOTHINGS}, got {self.smoothing!r}")
        if self.strategy not in STRATEGIES:
            raise ConfigError(f"strategy must be one of {STRATEGIES}, got {self.strategy!r}")
        if self.split_mode not in SPLIT_MODES:
            raise ConfigError(f"split_mode must be one of {SPLIT_MODES}, got {self.split_mode!r}")
        if self.split_mode == "date" and self.split_boundary is None:
            raise ConfigError("split_mode=date needs split_boundary")
        if self.split_mode == "count" and self.train_count is None:
            raise ConfigError("split_mode=count needs train_count")
        if self.d < 1:
            raise ConfigError(f"d must be positive, got {self.d}")
        if self.horizon < 1:
            raise ConfigError(f"horizon must be positive, got {self.horizon}")
        alloc = (self.rules_bl, self.rules_mo, self.rules_cm)
        given = [v is not None for v in alloc]
        if any(given) and not all(given):
            raise ConfigError("rules_bl, rules_mo and rules_cm must be given together")
        if all(given) and self.model != "belfis":
            raise ConfigError("per-stage rule counts only apply to model=belfis")
        if self.strategy == "recursive":
            if self.steps is None or self.steps < 1:
                raise ConfigError("strategy=recursive needs a positive steps count")
            if self.horizon != 1:
                raise ConfigError("recursive forecasting needs horizon=1")

    @property
    def allocation(self) -> tuple[int, int, int] | None:
        if self.rules_bl is None:
            return None
        return (self.rules_bl, self.rules_mo, self.rules_cm)

    @property
    def model_id(self) -> str:
        if self.model == "anfis":
            return f"anfis[{self.rules}]"
        if self.model == "belfis":
            alloc = self.allocation
            if alloc is None:
                return f"belfis[{self.rules}]"
            return f"belfis[{alloc[0]}+{alloc[1]}+{alloc[2]}]"
        return "persistence"

    def with_seed(self, seed: int) -> "ExperimentConfig":
        mapping = self.to_mapping()
        mapping["seed"] = str(int(seed))
        return ExperimentConfig.from_mapping(mapping)

    def to_mapping(self) -> dict[str, str]:
        """Canonical key/value form; parsing it back reproduces the config."""
        out: dict[str, str] = {}
        for f in fields(self):
            v = getattr(self, f.name)
            if v is None:
                continue
            if isinstance(v, bool):
                out[f.name] = "true" if v else "false"
            elif isinstance(v, float):
                out[f.name] = repr(v)
            else:
                out[f.name] = str(v)
        return out

    @classmethod
    def from_mapping(cls, mapping: dict[str, str]) -> "ExperimentConfig":
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(mapping) - known)
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
        missing = [k for k in ("experiment_id", "data_file", "cadence", "model") if k not in mapping]
        if missing:
            raise ConfigError(f"missing required config keys: {', '.join(missing)}")
        kwargs: dict = {}
        for key, raw in mapping.items():
            if key in ("d", "horizon", "rules", "epochs", "seed"):
                kwargs[key] = _parse_int(raw, key)
            elif key in ("rules_bl", "rules_mo", "rules_cm", "train_count", "steps"):
                kwargs[key] = _parse_int(raw, key)
            elif key == "learning_rate":
                kwargs[key] = _parse_float(raw, key)
            elif key in ("normalize", "mo_residual"):
                kwargs[key] = _parse_bool(raw, key)
            else:
                kwargs[key] = str(raw)
        return cls(**kwargs)


def parse_config_text(text: str, source: str = "<config>") -> dict[str, str]:
    """Parse flat ``key = value`` lines; ``#`` starts a comment line."""
    mapping: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ParseError(f"{source}: expected 'key = value'", line=lineno)
        key, _, value = line.partition("=")
        key = key.strip().lower()
        value = value.strip()
        if not key:
            raise ParseError(f"{source}: empty key", line=lineno)
        if key in mapping:
            raise ParseError(f"{source}: duplicate key {key!r}", line=lineno)
        mapping[key] = value
    return mapping


def config_to_text(cfg: ExperimentConfig) -> str:
    """Render a config as canonical ``key = value`` lines."""
    lines = [f"{k} = {v}" for k, v in cfg.to_mapping().items()]
    return "\n".join(lines) + "\n"


def load_config(path) -> ExperimentConfig:
    p = Path(path)
    try:
        text = p.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {p}: {exc}") from None
    mapping = parse_config_text(text, source=str(p))
    return ExperimentConfig.from_mapping(mapping)


def resolve_data_path(data_file: str, config_dir=None, data_dir=None) -> Path:
    """Locate the data file: explicit directory, then the environment
    override, then next to the config, then the working directory."""
    p = Path(data_file)
    if p.is_absolute():
        if not p.is_file():
            raise ConfigError(f"data file not found: {p}")
        return p
    candidates = []
    if data_dir is not None:
        candidates.append(Path(data_dir) / p)
    env = os.environ.get(DATA_DIR_ENV)
    if env:
        candidates.append(Path(env) / p)
    if config_dir is not None:
        cd = Path(config_dir)
        candidates.append(cd / p)
        candidates.append(cd.parent / "data" / p)
    candidates.append(Path.cwd() / p)
    candidates.append(Path.cwd() / "data" / p)
    for cand in candidates:
        if cand.is_file():
            return cand
    tried = ", ".join(str(c) for c in candidates)
    raise ConfigError(f"data file {data_file!r} not found (tried: {tried})")


@dataclass(frozen=True)
class RunManifest:
    """Provenance for one run; the data checksum is taken before any
    training so the manifest proves what the model actually saw."""

    tool_version: str
    config_hash: str
    data_checksum: str
    seed: int
    wall_clock_seconds: float
    artifacts: dict

    def to_json(self) -> str:
        payload = {
            "tool_version": self.tool_version,
            "config_hash": self.config_hash,
            "data_checksum": self.data_checksum,
            "seed": self.seed,
            "wall_clock_seconds": self.wall_clock_seconds,
            "artifacts": dict(self.artifacts),
        }
        return json.dumps(payload, sort_keys=True, indent=2) + "\n"


def _sha256_text(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def _sha256_file(path: Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            digest.update(chunk)
    return digest.hexdigest()


def _atomic_write(path: Path, text: str) -> None:
    tmp = path.with_suffix(path.suffix + ".tmp")
    tmp.write_text(text, encoding="utf-8")
    os.replace(tmp, path)


def prepare_experiment(cfg: ExperimentConfig, data_path):
    """Load, smooth, window, embed and split per the config.

    Returns ``(series, train, test)`` where ``series`` is the windowed
    time series and ``train``/``test`` are embedded splits.
    """
    series = load_silso(data_path, cadence=cfg.cadence)
    if cfg.smoothing != "none":
        series = smooth_13_month(series, weights=cfg.smoothing)
    start = None
    if cfg.window_start is not None:
        start = parse_timestamp(cfg.cadence, cfg.window_start, role="start")
    end = None
    if cfg.window_end is not None:
        end = parse_timestamp(cfg.cadence, cfg.window_end, role="end")
    series = series.window(start, end)
    ds = embed(series, d=cfg.d, h=cfg.horizon)
    if cfg.split_mode == "date":
        boundary = parse_timestamp(cfg.cadence, cfg.split_boundary, role="end")
        train, test = split_by_date(ds, boundary)
    else:
        train, test = split_by_count(ds, cfg.train_count)
    if len(train) == 0 or len(test) == 0:
        raise RangeError(
            f"split leaves {len(train)} train and {len(test)} test rows; both must be non-empty"
        )
    return series, train, test


def _model_spec(cfg: ExperimentConfig, seed: int) -> ModelSpec:
    train_cfg = TrainConfig(epochs=cfg.epochs, learning_rate=cfg.learning_rate, rng_seed=seed)
    return ModelSpec(
        kind=cfg.model,
        rules=cfg.rules,
        train=train_cfg,
        normalize=cfg.normalize,
        mo_residual=cfg.mo_residual,
        allocation=cfg.allocation,
    )


def _config_echo(cfg: ExperimentConfig, seed: int) -> dict[str, str]:
    echo = cfg.to_mapping()
    echo["seed"] = str(int(seed))
    return echo


def _recursive_result(cfg: ExperimentConfig, series, test, predictor):
    """Closed-loop evaluation: seed with the last true lags before the
    first test target, roll forward cfg.steps times, and align with
    observations wherever the record still has them (NaN past its end)."""
    t0 = int(test.target_times[0])
    stamps = series.timestamps
    pos = int(np.searchsorted(stamps, t0))
    if pos < cfg.d or pos >= len(stamps) or stamps[pos] != t0:
        raise RangeError("not enough history before the test window to seed a closed loop")
    window = series.values[pos - cfg.d : pos]
    rollout = predict_recursive(predictor, window, steps=cfg.steps)
    times = t0 + np.arange(cfg.steps, dtype=np.int64)
    observed = np.full(cfg.steps, np.nan)
    in_range = times <= int(stamps[-1])
    observed[in_range] = series.values[pos : pos + int(in_range.sum())]
    if not np.any(np.isfinite(observed)):
        raise RangeError("closed-loop window has no overlap with observed data")
    return ForecastResult(timestamps=times, observed=observed, predicted=rollout.clamped)


def _report_from_result(cfg: ExperimentConfig, result: ForecastResult, echo: dict) -> EvalReport:
    fmt = partial(format_timestamp, cfg.cadence)
    known = np.isfinite(np.asarray(result.observed))
    if bool(known.all()):
        return build_report(
            experiment_id=cfg.experiment_id,
            model_id=cfg.model_id,
            horizon=cfg.horizon,
            timestamps=result.timestamps,
            observed=result.observed,
            predicted=result.predicted,
            config_echo=echo,
            time_formatter=fmt,
        )
    # Closed-loop runs may extend past the record: error measures and the
    # observed peak use only the overlap, the predicted peak uses all steps.
    obs_t, obs_v = find_peak(result.timestamps[known], result.observed[known])
    pred_t, pred_v = find_peak(result.timestamps, result.predicted)
    return EvalReport(
        experiment_id=cfg.experiment_id,
        model_id=cfg.model_id,
        horizon=cfg.horizon,
        nmse=nmse(result.observed[known], result.predicted[known]),
        rmse=rmse(result.observed[known], result.predicted[known]),
        predicted_peak_value=pred_v,
        predicted_peak_time=fmt(pred_t),
        observed_peak_value=obs_v,
        observed_peak_time=fmt(obs_t),
        peak_abs_error=abs(obs_v - pred_v),
        config_echo=echo,
    )


def run_experiment(
    cfg: ExperimentConfig,
    out_dir,
    config_dir=None,
    data_dir=None,
    seed_override: int | None = None,
) -> tuple[EvalReport, RunManifest, Path]:
    """Run one experiment and write report, forecast CSV and manifest.

    Artifacts land in ``out_dir/<experiment_id>/``; each file is written
    to a temp name then renamed, and any files already written are
    removed if a later stage fails.
    """
    seed = int(seed_override) if seed_override is not None else cfg.seed
    data_path = resolve_data_path(cfg.data_file, config_dir=config_dir, data_dir=data_dir)
    config_hash = _sha256_text(config_to_text(cfg))
    data_checksum = _sha256_file(data_path)  # taken before any training

    exp_dir = Path(out_dir) / cfg.experiment_id
    exp_dir.mkdir(parents=True, exist_ok=True)
    report_path = exp_dir / "report.json"
    forecast_path = exp_dir / "forecast.csv"
    manifest_path = exp_dir / "manifest.json"
    written: list[Path] = []
    t_start = time.perf_counter()
    try:
        series, train, test = prepare_experiment(cfg, data_path)
        spec = _model_spec(cfg, seed)
        predictor, _ = train_on_dataset(train, spec)
        if cfg.strategy == "open_loop":
            result = predict_open_loop(predictor, test)
        else:
            result = _recursive_result(cfg, series, test, predictor)
        echo = _config_echo(cfg, seed)
        report = _report_from_result(cfg, result, echo)

        write_forecast_csv(result, forecast_path, time_formatter=partial(format_timestamp, cfg.cadence))
        written.append(forecast_path)
        _atomic_write(report_path, report.to_json())
        written.append(report_path)
        manifest = RunManifest(
            tool_version=__version__,
            config_hash=config_hash,
            data_checksum=data_checksum,
            seed=seed,
            wall_clock_seconds=time.perf_counter() - t_start,
            artifacts={
                "forecast": forecast_path.name,
                "manifest": manifest_path.name,
                "report": report_path.name,
            },
        )
        _atomic_write(manifest_path, manifest.to_json())
        written.append(manifest_path)
    except Exception:
        for path in written:
            path.unlink(missing_ok=True)
        for leftover in exp_dir.glob("*.tmp"):
            leftover.unlink(missing_ok=True)
        try:
            exp_dir.rmdir()  # only removes it when nothing else is inside
        except OSError:
            pass
        raise
    return report, manifest, forecast_path


SUITE_CSV_FIELDS = (
    "experiment_id",
    "model_id",
    "status",
    "cadence",
    "strategy",
    "horizon",
    "nmse",
    "rmse",
    "predicted_peak_time",
    "predicted_peak_value",
    "observed_peak_time",
    "observed_peak_value",
    "peak_abs_error",
    "reference_nmse",
    "reference_peak_value",
    "belfis_minus_anfis_nmse",
    "error",
)


def _comparison_stem(experiment_id: str) -> str | None:
    for suffix in ("_anfis", "_belfis"):
        if experiment_id.endswith(suffix):
            return experiment_id[: -len(suffix)]
    return None


@dataclass(frozen=True)
class SuiteResult:
    rows: tuple
    comparisons: dict
    csv_path: Path
    json_path: Path

    @property
    def failures(self) -> int:
        return sum(1 for row in self.rows if row["status"] != "ok")


def run_suite(
    config_dir,
    out_dir,
    data_dir=None,
    seed_override: int | None = None,
) -> SuiteResult:
    """Run every ``*.cfg`` in a directory and merge reports into one
    table (CSV and JSON) with a composed-vs-plain delta column."""
    cdir = Path(config_dir)
    config_paths = sorted(cdir.glob("*.cfg"))
    if not config_paths:
        raise ConfigError(f"no *.cfg files in {cdir}")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)

    rows: list[dict] = []
    seen_ids: dict[str, Path] = {}
    for path in config_paths:
        row = {key: "" for key in SUITE_CSV_FIELDS}
        try:
            cfg = load_config(path)
            if cfg.experiment_id in seen_ids:
                raise ConfigError(
                    f"duplicate experiment_id {cfg.experiment_id!r} "
                    f"(also in {seen_ids[cfg.experiment_id].name})"
                )
            seen_ids[cfg.experiment_id] = path
            row["experiment_id"] = cfg.experiment_id
            row["model_id"] = cfg.model_id
            row["cadence"] = cfg.cadence
            row["strategy"] = cfg.strategy
            row["horizon"] = str(cfg.horizon)
            row["reference_nmse"] = cfg.reference_nmse or ""
            row["reference_peak_value"] = cfg.reference_peak_value or ""
            report, _, _ = run_experiment(
                cfg, out_dir=out, config_dir=cdir, data_dir=data_dir, seed_override=seed_override
            )
            row["status"] = "ok"
            row["nmse"] = repr(report.nmse)
            row["rmse"] = repr(report.rmse)
            row["predicted_peak_time"] = report.predicted_peak_time
            row["predicted_peak_value"] = repr(report.predicted_peak_value)
            row["observed_peak_time"] = report.observed_peak_time
            row["observed_peak_value"] = repr(report.observed_peak_value)
            row["peak_abs_error"] = repr(report.peak_abs_error)
        except Exception as exc:
            if not row["experiment_id"]:
                row["experiment_id"] = path.stem
            row["status"] = "error"
            row["error"] = f"{type(exc).__name__}: {exc}"
        rows.append(row)

    comparisons: dict[str, dict] = {}
    by_stem: dict[str, dict[str, float]] = {}
    for row in rows:
        stem = _comparison_stem(row["experiment_id"])
        if stem is None or row["status"] != "ok":
            continue
        kind = row["experiment_id"].rsplit("_", 1)[1]
        by_stem.setdefault(stem, {})[kind] = float(row["nmse"])
    for stem, pair in sorted(by_stem.items()):
        if "anfis" not in pair or "belfis" not in pair:
            continue
        delta = pair["belfis"] - pair["anfis"]
        comparisons[stem] = {
            "anfis_nmse": pair["anfis"],
            "belfis_nmse": pair["belfis"],
            "belfis_minus_anfis_nmse": delta,
            "belfis_leq_anfis": bool(pair["belfis"] <= pair["anfis"]),
        }
        for row in rows:
            if row["experiment_id"] == f"{stem}_belfis":
                row["belfis_minus_anfis_nmse"] = repr(delta)

    csv_path = out / "suite.csv"
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=SUITE_CSV_FIELDS, lineterminator="\n")
    writer.writeheader()
    writer.writerows(rows)
    _atomic_write(csv_path, buf.getvalue())

    json_path = out / "suite.json"
    payload = {
        "row_count": len(rows),
        "failures": sum(1 for r in rows if r["status"] != "ok"),
        "comparisons": comparisons,
        "rows": rows,
    }
    _atomic_write(json_path, json.dumps(payload, sort_keys=True, indent=2) + "\n")
    return SuiteResult(rows=tuple(rows), comparisons=comparisons, csv_path=csv_path, json_path=json_path)


PLOT_STYLES = ("overlay", "error-curve")


def emit_plot_data(input_csv, style: str, out_path) -> Path:
    """Reshape run outputs into plot-ready CSVs.

    ``overlay`` takes a forecast CSV and keeps observed and predicted
    aligned on timestamp.  ``error-curve`` takes a suite table and emits
    one (horizon, nmse) row per model, sorted, for horizon sweeps.
    """
    if style not in PLOT_STYLES:
        raise ConfigError(f"style must be one of {PLOT_STYLES}, got {style!r}")
    src = Path(input_csv)
    if not src.is_file():
        raise ConfigError(f"input CSV not found: {src}")
    out = Path(out_path)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    if style == "overlay":
        from .forecast import read_forecast_csv

        labels, observed, predicted = read_forecast_csv(src)
        writer.writerow(("timestamp", "observed", "predicted"))
        for label, obs, pred in zip(labels, observed, predicted):
            obs_text = "" if np.isnan(obs) else repr(float(obs))
            writer.writerow((label, obs_text, repr(float(pred))))
    else:
        with open(src, "r", encoding="utf-8", newline="") as fh:
            reader = csv.DictReader(fh)
            if reader.fieldnames is None or not {"model_id", "horizon", "nmse"} <= set(reader.fieldnames):
                raise ParseError("error-curve input needs model_id, horizon and nmse columns")
            points = []
            for record in reader:
                if record.get("status", "ok") != "ok" or not record["nmse"]:
                    continue
                points.append(
                    (record["model_id"], int(record["horizon"]), float(record["nmse"]))
                )
        if not points:
            raise ParseError("error-curve input has no usable rows")
        points.sort()
        writer.writerow(("model_id", "horizon", "nmse"))
        for model_id, horizon, value in points:
            writer.writerow((model_id, str(horizon), repr(value)))
    _atomic_write(out, buf.getvalue())
    return out


def validate_experiment(config_path, data_dir=None) -> dict:
    """Dry-run a config: parse it, find its data, build the splits, but
    train nothing.  Returns a summary of what a run would see."""
    path = Path(config_path)
    cfg = load_config(path)
    data_path = resolve_data_path(cfg.data_file, config_dir=path.parent, data_dir=data_dir)
    series, train, test = prepare_experiment(cfg, data_path)
    return {
        "experiment_id": cfg.experiment_id,
        "model_id": cfg.model_id,
        "data_path": str(data_path),
        "series_rows": int(series.values.shape[0]),
        "train_rows": len(train),
        "test_rows": len(test),
        "window": f"{format_timestamp(cfg.cadence, series.start)}..{format_timestamp(cfg.cadence, series.end)}",
    }

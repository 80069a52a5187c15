"""Prediction strategies over trained models.

Three modes: open-loop (every input row holds true lagged values),
recursive closed-loop (each prediction is fed back as the newest lag),
and direct multi-horizon (one model per horizon, trained on targets
shifted h steps ahead).
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y

from .anfis import AnfisModel, LossTrace, TrainConfig, anfis_predict, fit_anfis
from .belfis import (
    BelfisConfig,
    BelfisModel,
    belfis_predict,
    default_belfis_config,
    train_belfis,
)
from .dataset import EmbeddedDataset, TimeSeries, embed
from .errors import ConfigError, ParseError, ShapeError
from .validation import as_matrix, as_vector, readonly

MODEL_KINDS = ("anfis", "belfis", "persistence")


@dataclass(frozen=True)
class ModelSpec:
    """What to train: model kind, rule budget, and training settings.

    ``allocation`` pins the per-stage rule split of a composed model
    explicitly; when ``None`` the budget in ``rules`` is divided by the
    default allocation table.
    """

    kind: str
    rules: int = 4
    train: TrainConfig = field(default_factory=TrainConfig)
    normalize: bool = False
    mo_residual: bool = False
    allocation: tuple[int, int, int] | None = None

    def __post_init__(self):
        if self.kind not in MODEL_KINDS:
            raise ConfigError(f"unknown model kind {self.kind!r}; choose from {MODEL_KINDS}")
        if self.allocation is not None:
            alloc = tuple(int(v) for v in self.allocation)
            if len(alloc) != 3 or any(v < 1 for v in alloc):
                raise ConfigError(f"allocation must be three positive rule counts, got {self.allocation!r}")
            if self.kind != "belfis":
                raise ConfigError("allocation only applies to composed models")
            object.__setattr__(self, "allocation", alloc)


@dataclass(frozen=True)
class Predictor:
    """A trained model bound to its embedding dimension and horizon."""

    model: AnfisModel | BelfisModel | None
    d: int
    h: int
    kind: str

    def __post_init__(self):
        if self.kind not in MODEL_KINDS:
            raise ConfigError(f"unknown model kind {self.kind!r}")
        if self.d < 1 or self.h < 1:
            raise ConfigError("d and h must be positive")

    def predict_batch(self, X) -> np.ndarray:
        Xm = as_matrix(X, "X")
        if Xm.shape[1] != self.d:
            raise ShapeError(f"inputs have {Xm.shape[1]} columns, predictor expects {self.d}")
        if self.kind == "anfis":
            return anfis_predict(self.model, Xm)
        if self.kind == "belfis":
            return belfis_predict(self.model, Xm)
        return Xm[:, -1].copy()

    def predict_one(self, x) -> float:
        return float(self.predict_batch(np.asarray(x, dtype=np.float64)[None, :])[0])


@dataclass(frozen=True)
class ForecastResult:
    """Aligned forecast arrays ready for metrics and plotting."""

    timestamps: np.ndarray
    observed: np.ndarray
    predicted: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.timestamps, dtype=np.int64)
        obs = as_vector(self.observed, "observed")
        pred = as_vector(self.predicted, "predicted")
        if t.shape != obs.shape or obs.shape != pred.shape:
            raise ShapeError("timestamps, observed and predicted must align")
        t_ro = t.copy()
        t_ro.flags.writeable = False
        object.__setattr__(self, "timestamps", t_ro)
        object.__setattr__(self, "observed", readonly(obs))
        object.__setattr__(self, "predicted", readonly(pred))

    def __len__(self) -> int:
        return int(self.timestamps.shape[0])


def predict_open_loop(p: Predictor, test: EmbeddedDataset) -> ForecastResult:
    """Evaluate every test row from true lagged values."""
    if test.d != p.d or test.h != p.h:
        raise ConfigError(
            f"predictor trained with d={p.d}, h={p.h}; test set built with "
            f"d={test.d}, h={test.h}"
        )
    if len(test) == 0:
        raise ShapeError("test set is empty")
    return ForecastResult(
        timestamps=test.target_times,
        observed=test.targets,
        predicted=p.predict_batch(test.inputs),
    )


@dataclass(frozen=True)
class RecursiveForecast:
    """Closed-loop forecast: ``raw`` is what the model emitted and fed
    back; ``clamped`` floors negatives at zero for reporting, since the
    observed quantity cannot go below zero."""

    raw: np.ndarray
    clamped: np.ndarray

    def __len__(self) -> int:
        return int(self.raw.shape[0])


def predict_recursive(p: Predictor, seed_window, steps: int) -> RecursiveForecast:
    """Iterate one-step predictions ``steps`` times, feeding each raw
    prediction back as the newest lag."""
    if p.h != 1:
        raise ConfigError(f"recursive forecasting needs a one-step model, got h={p.h}")
    if steps < 1:
        raise ConfigError(f"steps must be positive, got {steps}")
    window = as_vector(seed_window, "seed_window").copy()
    if window.shape[0] != p.d:
        raise ShapeError(f"seed window has length {window.shape[0]}, predictor expects {p.d}")
    raw = np.empty(steps)
    for k in range(steps):
        yhat = p.predict_one(window)
        raw[k] = yhat
        window[:-1] = window[1:]
        window[-1] = yhat
    return RecursiveForecast(raw=readonly(raw), clamped=readonly(np.maximum(raw, 0.0)))


def _belfis_config(spec: ModelSpec) -> BelfisConfig:
    if spec.allocation is not None:
        bl, mo, cm = spec.allocation
        return BelfisConfig(
            rules_bl=bl,
            rules_mo=mo,
            rules_cm=cm,
            bl_train=spec.train,
            mo_train=spec.train,
            cm_train=spec.train,
            normalize=spec.normalize,
            mo_residual=spec.mo_residual,
        )
    return default_belfis_config(
        spec.rules, train=spec.train, normalize=spec.normalize, mo_residual=spec.mo_residual
    )


def train_for_horizon(
    series: TimeSeries, d: int, h: int, spec: ModelSpec
) -> tuple[Predictor, dict[str, LossTrace]]:
    """Embed the series at horizon ``h`` and train the requested model."""
    if spec.kind == "persistence":
        return Predictor(model=None, d=d, h=h, kind="persistence"), {}
    return train_on_dataset(embed(series, d=d, h=h), spec)


def train_on_dataset(ds: EmbeddedDataset, spec: ModelSpec) -> tuple[Predictor, dict]:
    """Train directly on an already-embedded dataset."""
    if spec.kind == "persistence":
        return Predictor(model=None, d=ds.d, h=ds.h, kind="persistence"), {}
    if spec.kind == "anfis":
        model, trace = fit_anfis((ds.inputs, ds.targets), R=spec.rules, cfg=spec.train)
        return Predictor(model=model, d=ds.d, h=ds.h, kind="anfis"), {"anfis": trace}
    cfg = _belfis_config(spec)
    model, traces = train_belfis(cfg, (ds.inputs, ds.targets), seed=spec.train.rng_seed)
    return Predictor(model=model, d=ds.d, h=ds.h, kind="belfis"), traces


FORECAST_CSV_HEADER = ("timestamp", "observed", "predicted")


def write_forecast_csv(result: ForecastResult, path, time_formatter=str) -> None:
    """Write aligned forecast rows; floats use repr for exact reloads.

    An observed value of NaN marks a step with no ground truth yet
    (closed-loop forecasts can run past the end of the record); it is
    written as an empty field.
    """
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(FORECAST_CSV_HEADER)
        for t, obs, pred in zip(result.timestamps, result.observed, result.predicted):
            obs_text = "" if np.isnan(obs) else repr(float(obs))
            writer.writerow([time_formatter(int(t)), obs_text, repr(float(pred))])


def read_forecast_csv(path) -> tuple[list[str], np.ndarray, np.ndarray]:
    """Read a forecast CSV back as (labels, observed, predicted)."""
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ParseError("forecast CSV is empty") from None
        if tuple(header) != FORECAST_CSV_HEADER:
            raise ParseError(f"unexpected forecast CSV header {header!r}")
        labels, observed, predicted = [], [], []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 3:
                raise ParseError(f"expected 3 columns, got {len(row)}", line=lineno)
            try:
                obs = float("nan") if row[1] == "" else float(row[1])
                pred = float(row[2])
            except ValueError:
                raise ParseError(f"bad numeric value in {row!r}", line=lineno) from None
            labels.append(row[0])
            observed.append(obs)
            predicted.append(pred)
    if not labels:
        raise ParseError("forecast CSV has no data rows")
    return labels, np.array(observed), np.array(predicted)


class PersistenceRegressor(RegressorMixin, BaseEstimator):
    """Baseline estimator predicting the last lag value unchanged.

    Attributes
    ----------
    n_features_in_ : int
        Input dimension seen during fit.
    """

    def fit(self, X, y):
        X, y = check_X_y(X, y, y_numeric=True)
        self.n_features_in_ = X.shape[1]
        self.fitted_ = True
        return self

    def predict(self, X):
        check_is_fitted(self, "fitted_")
        X = check_array(X).astype(np.float64, copy=False)
        return X[:, -1].copy()

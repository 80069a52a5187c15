"""Error measures and peak extraction used by every experiment report."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass

import numpy as np

from .errors import DegenerateError, ShapeError
from .validation import as_vector, require_same_length


def nmse(y, y_pred) -> float:
    """Sum of squared errors over the sum of squared deviations of the
    observations from their own mean.  1.0 means "no better than the
    mean of the evaluation window"."""
    yv = as_vector(y, "y")
    pv = as_vector(y_pred, "y_pred")
    require_same_length(yv, pv)
    if yv.size == 0:
        raise ShapeError("nmse needs non-empty inputs")
    centered = yv - yv.mean()
    denom = float(centered @ centered)
    if denom == 0.0:
        raise DegenerateError("observations have zero variance; nmse undefined")
    resid = yv - pv
    return float(resid @ resid) / denom


def rmse(y, y_pred) -> float:
    """Root mean squared error."""
    yv = as_vector(y, "y")
    pv = as_vector(y_pred, "y_pred")
    require_same_length(yv, pv)
    if yv.size == 0:
        raise ShapeError("rmse needs non-empty inputs")
    resid = yv - pv
    return float(np.sqrt(resid @ resid / yv.size))


def find_peak(timestamps, values) -> tuple[int, float]:
    """Timestamp and value of the maximum; ties break to the earliest
    timestamp."""
    vv = as_vector(values, "values")
    tt = np.asarray(timestamps)
    if vv.size == 0:
        raise ShapeError("find_peak needs a non-empty series")
    if tt.shape != vv.shape:
        raise ShapeError("timestamps and values must align")
    idx = int(np.argmax(vv))  # argmax returns the first maximum
    return tt[idx].item(), float(vv[idx])


@dataclass(frozen=True)
class EvalReport:
    """One experiment's evaluation summary plus the config echo needed to
    rerun it."""

    experiment_id: str
    model_id: str
    horizon: int
    nmse: float
    rmse: float
    predicted_peak_value: float
    predicted_peak_time: str
    observed_peak_value: float
    observed_peak_time: str
    peak_abs_error: float
    config_echo: dict

    def __post_init__(self):
        if self.nmse < 0 or self.rmse < 0:
            raise DegenerateError("error measures must be non-negative")
        expected = abs(self.observed_peak_value - self.predicted_peak_value)
        if abs(self.peak_abs_error - expected) > 1e-9:
            raise DegenerateError("peak_abs_error must equal |observed - predicted|")

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True, indent=2) + "\n"

    CSV_FIELDS = (
        "experiment_id",
        "model_id",
        "horizon",
        "nmse",
        "rmse",
        "predicted_peak_value",
        "predicted_peak_time",
        "observed_peak_value",
        "observed_peak_time",
        "peak_abs_error",
    )

    def to_csv_row(self) -> list[str]:
        row = []
        for name in self.CSV_FIELDS:
            v = getattr(self, name)
            row.append(repr(v) if isinstance(v, float) else str(v))
        return row


def build_report(
    experiment_id: str,
    model_id: str,
    horizon: int,
    timestamps,
    observed,
    predicted,
    config_echo: dict,
    time_formatter=str,
) -> EvalReport:
    """Assemble an :class:`EvalReport` from aligned forecast arrays."""
    obs_t, obs_v = find_peak(timestamps, observed)
    pred_t, pred_v = find_peak(timestamps, predicted)
    return EvalReport(
        experiment_id=experiment_id,
        model_id=model_id,
        horizon=horizon,
        nmse=nmse(observed, predicted),
        rmse=rmse(observed, predicted),
        predicted_peak_value=pred_v,
        predicted_peak_time=time_formatter(pred_t),
        observed_peak_value=obs_v,
        observed_peak_time=time_formatter(obs_t),
        peak_abs_error=abs(obs_v - pred_v),
        config_echo=dict(config_echo),
    )

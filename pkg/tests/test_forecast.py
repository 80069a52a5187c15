"""Tests for open-loop, recursive, and direct multi-horizon prediction."""

import numpy as np
import pytest

from solarfis.anfis import AnfisModel, TrainConfig
from solarfis.dataset import TimeSeries, embed
from solarfis.errors import ConfigError, ParseError, ShapeError
from solarfis.forecast import (
    ForecastResult,
    ModelSpec,
    PersistenceRegressor,
    Predictor,
    predict_open_loop,
    predict_recursive,
    read_forecast_csv,
    train_for_horizon,
    train_on_dataset,
    write_forecast_csv,
)
from solarfis.metrics import nmse


def yearly(values, start=1900):
    values = np.asarray(values, dtype=float)
    return TimeSeries(
        cadence="yearly",
        start=start,
        values=values,
        missing=np.zeros(len(values), dtype=bool),
    )


def constant_predictor(c, d=3):
    # single wide rule, zero coefficients: output is the bias everywhere
    # (widths are huge so the firing never underflows the divisor floor)
    model = AnfisModel(
        centers=np.zeros((1, d)),
        sigmas=np.full((1, d), 1e6),
        coefficients=np.zeros((1, d)),
        biases=np.array([c], dtype=float),
    )
    return Predictor(model=model, d=d, h=1, kind="anfis")


class TestOpenLoop:
    def test_persistence_equals_lagged_series(self):
        vals = np.arange(10, dtype=float) ** 1.5
        ds = embed(yearly(vals), d=3, h=1)
        p = Predictor(model=None, d=3, h=1, kind="persistence")
        result = predict_open_loop(p, ds)
        # at h=1 persistence emits the previous value
        np.testing.assert_array_equal(result.predicted, vals[2:-1])
        np.testing.assert_array_equal(result.observed, vals[3:])

    def test_dh_mismatch_rejected(self):
        ds = embed(yearly(np.arange(10.0)), d=3, h=2)
        p = Predictor(model=None, d=3, h=1, kind="persistence")
        with pytest.raises(ConfigError):
            predict_open_loop(p, ds)

    def test_empty_test_rejected(self):
        ds = embed(yearly(np.arange(10.0)), d=3, h=1)
        p = Predictor(model=None, d=3, h=1, kind="persistence")
        with pytest.raises(ShapeError):
            predict_open_loop(p, ds.take(slice(0, 0)))

    def test_result_alignment(self):
        ds = embed(yearly(np.arange(12.0), start=2000), d=2, h=1)
        p = Predictor(model=None, d=2, h=1, kind="persistence")
        result = predict_open_loop(p, ds)
        assert result.timestamps[0] == 2002
        assert len(result) == len(ds)


class TestRecursive:
    def test_constant_model_emits_constant(self):
        p = constant_predictor(7.5)
        out = predict_recursive(p, [1.0, 2.0, 3.0], steps=5)
        np.testing.assert_array_equal(out.raw, np.full(5, 7.5))
        np.testing.assert_array_equal(out.clamped, np.full(5, 7.5))

    def test_persistence_fixed_point(self):
        p = Predictor(model=None, d=3, h=1, kind="persistence")
        out = predict_recursive(p, [1.0, 2.0, 9.0], steps=4)
        np.testing.assert_array_equal(out.raw, np.full(4, 9.0))

    def test_negative_predictions_clamped_for_reporting(self):
        p = constant_predictor(-3.0)
        out = predict_recursive(p, [0.0, 0.0, 0.0], steps=3)
        np.testing.assert_array_equal(out.raw, np.full(3, -3.0))
        np.testing.assert_array_equal(out.clamped, np.zeros(3))

    def test_feedback_uses_raw_not_clamped(self):
        # model output = last lag - 5: raw forecasts keep sinking, which
        # is only possible if the unclamped value is fed back
        model = AnfisModel(
            centers=np.zeros((1, 2)),
            sigmas=np.full((1, 2), 1e6),
            coefficients=np.array([[0.0, 1.0]]),
            biases=np.array([-5.0]),
        )
        p = Predictor(model=model, d=2, h=1, kind="anfis")
        out = predict_recursive(p, [0.0, 0.0], steps=3)
        np.testing.assert_allclose(out.raw, [-5.0, -10.0, -15.0])
        np.testing.assert_array_equal(out.clamped, np.zeros(3))

    def test_requires_h1(self):
        p = Predictor(model=None, d=3, h=2, kind="persistence")
        with pytest.raises(ConfigError):
            predict_recursive(p, [1.0, 2.0, 3.0], steps=2)

    def test_wrong_window_length(self):
        p = constant_predictor(1.0)
        with pytest.raises(ShapeError):
            predict_recursive(p, [1.0], steps=2)

    def test_leakage_first_steps_agree_with_open_loop(self):
        # the very first recursive step consumes only true values, so it
        # must match the first open-loop prediction exactly
        rng = np.random.default_rng(0)
        vals = rng.uniform(0, 100, size=40)
        ts = yearly(vals)
        ds = embed(ts, d=4, h=1)
        spec = ModelSpec(kind="anfis", rules=2, train=TrainConfig(epochs=3, learning_rate=1e-6))
        train = ds.take(slice(0, 30))
        test = ds.take(slice(30, len(ds)))
        p, _ = train_on_dataset(train, spec)
        open_loop = predict_open_loop(p, test)
        out = predict_recursive(p, test.inputs[0], steps=3)
        assert out.raw[0] == open_loop.predicted[0]

    def test_leakage_output_ignores_post_seed_values(self):
        rng = np.random.default_rng(1)
        vals = rng.uniform(0, 100, size=40)
        ts = yearly(vals)
        ds = embed(ts, d=4, h=1)
        spec = ModelSpec(kind="anfis", rules=2, train=TrainConfig(epochs=3, learning_rate=1e-6))
        p, _ = train_on_dataset(ds.take(slice(0, 30)), spec)
        seed_window = vals[26:30]
        baseline = predict_recursive(p, seed_window, steps=6)
        corrupted = vals.copy()
        corrupted[30:] = 1e9  # corrupt everything after the seed window
        again = predict_recursive(p, corrupted[26:30], steps=6)
        np.testing.assert_array_equal(baseline.raw, again.raw)


class TestTrainForHorizon:
    def test_linear_series_near_zero_error(self):
        vals = np.linspace(0, 30, 40)
        ts = yearly(vals)
        spec = ModelSpec(kind="anfis", rules=1, train=TrainConfig(epochs=1, learning_rate=1e-8))
        p, traces = train_for_horizon(ts, d=3, h=1, spec=spec)
        ds = embed(ts, d=3, h=1)
        pred = p.predict_batch(ds.inputs)
        assert nmse(ds.targets, pred) < 1e-12
        assert "anfis" in traces

    def test_horizon_recorded(self):
        ts = yearly(np.arange(30.0))
        spec = ModelSpec(kind="persistence")
        p, _ = train_for_horizon(ts, d=2, h=5, spec=spec)
        assert p.h == 5
        assert p.d == 2

    def test_deterministic(self):
        rng = np.random.default_rng(2)
        ts = yearly(rng.uniform(0, 50, size=50))
        spec = ModelSpec(kind="belfis", rules=6, train=TrainConfig(epochs=2, learning_rate=1e-6))
        p1, _ = train_for_horizon(ts, d=3, h=2, spec=spec)
        p2, _ = train_for_horizon(ts, d=3, h=2, spec=spec)
        ds = embed(ts, d=3, h=2)
        np.testing.assert_array_equal(p1.predict_batch(ds.inputs), p2.predict_batch(ds.inputs))

    def test_unknown_kind_rejected(self):
        with pytest.raises(ConfigError):
            ModelSpec(kind="oracle")


class TestForecastCsv:
    def test_round_trip(self, tmp_path):
        result = ForecastResult(
            timestamps=np.array([2000, 2001, 2002]),
            observed=np.array([1.5, 2.5, 3.5]),
            predicted=np.array([1.0, 2.0, 3.0]),
        )
        path = tmp_path / "fc.csv"
        write_forecast_csv(result, path)
        labels, obs, pred = read_forecast_csv(path)
        assert labels == ["2000", "2001", "2002"]
        np.testing.assert_array_equal(obs, result.observed)
        np.testing.assert_array_equal(pred, result.predicted)

    def test_empty_rejected(self, tmp_path):
        path = tmp_path / "empty.csv"
        path.write_text("timestamp,observed,predicted\n")
        with pytest.raises(ParseError):
            read_forecast_csv(path)

    def test_bad_header_rejected(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("a,b,c\n1,2,3\n")
        with pytest.raises(ParseError):
            read_forecast_csv(path)


class TestPersistenceRegressor:
    def test_predicts_last_column(self):
        X = np.array([[1.0, 2.0], [5.0, 7.0]])
        est = PersistenceRegressor().fit(X, np.zeros(2))
        np.testing.assert_array_equal(est.predict(X), [2.0, 7.0])

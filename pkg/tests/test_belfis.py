"""Tests for the composite model: wiring, pass-through behaviour, staged
training contracts, and input-scaling invariance."""

import numpy as np
import pytest

from solarfis.anfis import AnfisModel, TrainConfig, anfis_forward, anfis_predict
from solarfis.belfis import (
    BelfisConfig,
    BelfisModel,
    BelfisRegressor,
    allocate_rules,
    belfis_forward,
    belfis_from_json,
    belfis_predict,
    belfis_to_json,
    default_belfis_config,
    train_belfis,
)
from solarfis.errors import ConfigError, ShapeError
from solarfis.metrics import nmse


def single_rule(d, coefficients, bias, centers=None, sigmas=None):
    return AnfisModel(
        centers=np.zeros((1, d)) if centers is None else np.asarray(centers, dtype=float),
        sigmas=np.ones((1, d)) if sigmas is None else np.asarray(sigmas, dtype=float),
        coefficients=np.asarray(coefficients, dtype=float).reshape(1, d),
        biases=np.array([bias], dtype=float),
    )


def make_passthrough_belfis(bl, mo, which="eta2"):
    coeff = [1.0, 0.0] if which == "eta2" else [0.0, 1.0]
    cm = single_rule(2, coeff, 0.0)
    return BelfisModel(bl=bl, mo=mo, cm=cm)


class TestAllocation:
    def test_documented_totals(self):
        assert allocate_rules(16) == (8, 4, 4)
        assert allocate_rules(28) == (16, 6, 6)
        assert allocate_rules(38) == (24, 7, 7)

    def test_fallback_sums_to_total(self):
        for total in (3, 5, 10, 21):
            a, b, c = allocate_rules(total)
            assert a + b + c == total
            assert min(a, b, c) >= 1

    def test_too_small_rejected(self):
        with pytest.raises(ConfigError):
            allocate_rules(2)

    def test_config_requires_positive_allocations(self):
        with pytest.raises(ConfigError):
            BelfisConfig(rules_bl=0, rules_mo=1, rules_cm=1)


class TestForwardWiring:
    def setup_method(self):
        rng = np.random.default_rng(0)
        self.d = 2
        self.bl = single_rule(
            4,
            rng.uniform(-1, 1, 4),
            rng.uniform(-1, 1),
            centers=rng.uniform(-1, 1, (1, 4)),
            sigmas=rng.uniform(0.5, 1.5, (1, 4)),
        )
        self.mo = single_rule(
            2,
            rng.uniform(-1, 1, 2),
            rng.uniform(-1, 1),
            centers=rng.uniform(-1, 1, (1, 2)),
            sigmas=rng.uniform(0.5, 1.5, (1, 2)),
        )

    def test_hand_chain_single_rule(self):
        # Single-rule networks are exactly linear, so the whole chain
        # reduces to nested affine maps; evaluate them by hand.
        m = BelfisModel(bl=self.bl, mo=self.mo, cm=single_rule(2, [0.5, -2.0], 0.25))
        x = np.array([0.3, -1.2])
        mx, mn = max(x), min(x)
        eta2 = float(self.bl.coefficients[0] @ np.array([x[0], x[1], mx, mn]) + self.bl.biases[0])
        r_o = float(self.mo.coefficients[0] @ x + self.mo.biases[0])
        expected = 0.5 * eta2 - 2.0 * r_o + 0.25
        assert belfis_forward(m, x) == pytest.approx(expected, rel=1e-12)

    def test_chain_matches_stagewise_evaluation(self):
        rng = np.random.default_rng(1)
        bl = AnfisModel(
            centers=rng.uniform(-1, 1, (3, 4)),
            sigmas=rng.uniform(0.5, 2, (3, 4)),
            coefficients=rng.uniform(-1, 1, (3, 4)),
            biases=rng.uniform(-1, 1, 3),
        )
        mo = AnfisModel(
            centers=rng.uniform(-1, 1, (2, 2)),
            sigmas=rng.uniform(0.5, 2, (2, 2)),
            coefficients=rng.uniform(-1, 1, (2, 2)),
            biases=rng.uniform(-1, 1, 2),
        )
        cm = AnfisModel(
            centers=rng.uniform(-1, 1, (2, 2)),
            sigmas=rng.uniform(0.5, 2, (2, 2)),
            coefficients=rng.uniform(-1, 1, (2, 2)),
            biases=rng.uniform(-1, 1, 2),
        )
        m = BelfisModel(bl=bl, mo=mo, cm=cm)
        for _ in range(10):
            x = rng.uniform(-2, 2, 2)
            eta2, _ = anfis_forward(bl, np.array([x[0], x[1], x.max(), x.min()]))
            r_o, _ = anfis_forward(mo, x)
            eta, _ = anfis_forward(cm, np.array([eta2, r_o]))
            assert belfis_forward(m, x) == pytest.approx(eta, rel=1e-12)

    def test_passthrough_eta2(self):
        m = make_passthrough_belfis(self.bl, self.mo, "eta2")
        rng = np.random.default_rng(2)
        for _ in range(5):
            x = rng.uniform(-2, 2, 2)
            eta2, _ = anfis_forward(self.bl, np.array([x[0], x[1], x.max(), x.min()]))
            assert belfis_forward(m, x) == eta2

    def test_passthrough_ro(self):
        m = make_passthrough_belfis(self.bl, self.mo, "ro")
        rng = np.random.default_rng(3)
        for _ in range(5):
            x = rng.uniform(-2, 2, 2)
            r_o, _ = anfis_forward(self.mo, x)
            assert belfis_forward(m, x) == r_o

    def test_repeated_calls_bitwise_equal(self):
        m = make_passthrough_belfis(self.bl, self.mo)
        x = np.array([0.7, -0.4])
        assert belfis_forward(m, x) == belfis_forward(m, x)

    def test_dimension_mismatch(self):
        m = make_passthrough_belfis(self.bl, self.mo)
        with pytest.raises(ShapeError):
            belfis_forward(m, [1.0, 2.0, 3.0])

    def test_wiring_shape_invariants(self):
        with pytest.raises(ShapeError):
            BelfisModel(bl=self.mo, mo=self.mo, cm=single_rule(2, [1, 0], 0.0))
        with pytest.raises(ShapeError):
            BelfisModel(bl=self.bl, mo=self.mo, cm=single_rule(3, [1, 0, 0], 0.0))

    def test_passthrough_nmse_equals_bl_only(self):
        # Disabling the mixer must reproduce the first network's metric
        # exactly, composition adds nothing by construction.
        rng = np.random.default_rng(4)
        X = rng.uniform(-1, 1, size=(40, 2))
        y = np.sin(X[:, 0]) + 0.5 * X[:, 1]
        m = make_passthrough_belfis(self.bl, self.mo, "eta2")
        bl_inputs = np.column_stack([X, X.max(axis=1), X.min(axis=1)])
        direct = anfis_predict(self.bl, bl_inputs)
        composed = belfis_predict(m, X)
        assert nmse(y, composed) == nmse(y, direct)


class TestTraining:
    def test_linear_target_reaches_near_zero(self):
        rng = np.random.default_rng(5)
        X = rng.uniform(-1, 1, size=(60, 3))
        Y = 2.0 * X[:, 0] - 1.5 * X[:, 2] + 0.3
        cfg = default_belfis_config(
            3, train=TrainConfig(epochs=2, learning_rate=1e-7)
        )
        model, traces = train_belfis(cfg, (X, Y), seed=0)
        pred = belfis_predict(model, X)
        assert nmse(Y, pred) < 1e-9
        assert traces["bl"].sse[-1] / float(((Y - Y.mean()) ** 2).sum()) < 1e-10

    def test_deterministic_given_seed(self):
        rng = np.random.default_rng(6)
        X = rng.uniform(0, 1, size=(50, 2))
        Y = rng.uniform(0, 1, size=50)
        cfg = default_belfis_config(16, train=TrainConfig(epochs=3, learning_rate=1e-4))
        m1, _ = train_belfis(cfg, (X, Y), seed=9)
        m2, _ = train_belfis(cfg, (X, Y), seed=9)
        for a, b in ((m1.bl, m2.bl), (m1.mo, m2.mo), (m1.cm, m2.cm)):
            np.testing.assert_array_equal(a.centers, b.centers)
            np.testing.assert_array_equal(a.sigmas, b.sigmas)
            np.testing.assert_array_equal(a.coefficients, b.coefficients)
            np.testing.assert_array_equal(a.biases, b.biases)

    def test_stage_seeds_differ(self):
        rng = np.random.default_rng(7)
        X = rng.uniform(0, 1, size=(50, 2))
        Y = rng.uniform(0, 1, size=50)
        cfg = default_belfis_config(16, train=TrainConfig(epochs=1, learning_rate=0.0))
        model, _ = train_belfis(cfg, (X, Y), seed=3)
        assert model.bl.seed == 3
        assert model.mo.seed == 4
        assert model.cm.seed == 5

    def test_mixer_beats_both_passthroughs_on_train(self):
        # The mixer's least-squares stage can always represent either
        # pass-through, so its training SSE cannot exceed the better one.
        rng = np.random.default_rng(8)
        X = rng.uniform(-1, 1, size=(80, 2))
        Y = np.sin(2 * X[:, 0]) * np.cos(X[:, 1])
        cfg = BelfisConfig(
            rules_bl=3,
            rules_mo=2,
            rules_cm=2,
            bl_train=TrainConfig(epochs=10, learning_rate=1e-6),
            mo_train=TrainConfig(epochs=10, learning_rate=1e-6),
            cm_train=TrainConfig(epochs=10, learning_rate=1e-6),
        )
        model, _ = train_belfis(cfg, (X, Y), seed=1)
        bl_inputs = np.column_stack([X, X.max(axis=1), X.min(axis=1)])
        sse_eta2 = float(((Y - anfis_predict(model.bl, bl_inputs)) ** 2).sum())
        sse_ro = float(((Y - anfis_predict(model.mo, X)) ** 2).sum())
        sse_final = float(((Y - belfis_predict(model, X)) ** 2).sum())
        assert sse_final <= min(sse_eta2, sse_ro) * (1 + 1e-6) + 1e-9

    def test_stage_errors_are_tagged(self):
        X = np.zeros((3, 2))
        Y = np.zeros(3)
        cfg = BelfisConfig(rules_bl=5, rules_mo=1, rules_cm=1)
        with pytest.raises(ConfigError, match="stage bl"):
            train_belfis(cfg, (X, Y), seed=0)

    def test_empty_training_set_rejected(self):
        cfg = default_belfis_config(3)
        with pytest.raises(ShapeError):
            train_belfis(cfg, (np.zeros((0, 2)), np.zeros(0)), seed=0)

    def test_residual_mode_runs(self):
        rng = np.random.default_rng(9)
        X = rng.uniform(-1, 1, size=(40, 2))
        Y = X[:, 0] ** 2
        cfg = default_belfis_config(
            6, train=TrainConfig(epochs=3, learning_rate=1e-6), mo_residual=True
        )
        model, _ = train_belfis(cfg, (X, Y), seed=0)
        assert model.mo_residual
        assert np.all(np.isfinite(belfis_predict(model, X)))

    def test_constant_input_column_is_handled(self):
        rng = np.random.default_rng(10)
        X = np.column_stack([rng.uniform(0, 1, 30), np.full(30, 2.0)])
        Y = rng.uniform(0, 1, 30)
        cfg = default_belfis_config(3, normalize=True)
        model, _ = train_belfis(cfg, (X, Y), seed=0)
        assert np.all(np.isfinite(belfis_predict(model, X)))


class TestScaleInvariance:
    def build(self, seed=13):
        rng = np.random.default_rng(seed)
        X = rng.uniform(10, 200, size=(60, 3))
        Y = rng.uniform(0, 100, size=60)
        return X, Y

    def test_power_of_two_rescale_bitwise_identical(self):
        # Doubling every raw input is exact in binary floating point, so
        # the min-max normalized inputs, and hence the trained models,
        # must match bit for bit.
        X, Y = self.build()
        cfg = default_belfis_config(
            6, train=TrainConfig(epochs=3, learning_rate=1e-5), normalize=True
        )
        m1, _ = train_belfis(cfg, (X, Y), seed=2)
        m2, _ = train_belfis(cfg, (4.0 * X, Y), seed=2)
        for a, b in ((m1.bl, m2.bl), (m1.mo, m2.mo), (m1.cm, m2.cm)):
            np.testing.assert_array_equal(a.centers, b.centers)
            np.testing.assert_array_equal(a.coefficients, b.coefficients)
        x_new = X[:5]
        np.testing.assert_array_equal(
            belfis_predict(m1, x_new), belfis_predict(m2, 4.0 * x_new)
        )

    def test_general_affine_rescale_matches_closely(self):
        # General affine maps round differently, so equality is only up
        # to float rounding of the normalized inputs.
        from solarfis.belfis import _apply_minmax, _fit_minmax

        X, _ = self.build()
        a, b = 1.37, -11.0
        X2 = a * X + b
        lo1, hi1 = _fit_minmax(X)
        lo2, hi2 = _fit_minmax(X2)
        np.testing.assert_allclose(
            _apply_minmax(X, lo1, hi1), _apply_minmax(X2, lo2, hi2), atol=1e-12
        )


class TestSerialization:
    def test_round_trip(self):
        rng = np.random.default_rng(14)
        X = rng.uniform(0, 1, size=(40, 2))
        Y = rng.uniform(0, 1, size=40)
        cfg = default_belfis_config(
            6, train=TrainConfig(epochs=2, learning_rate=1e-5), normalize=True
        )
        m, _ = train_belfis(cfg, (X, Y), seed=0)
        back = belfis_from_json(belfis_to_json(m))
        np.testing.assert_array_equal(back.norm_lo, m.norm_lo)
        np.testing.assert_array_equal(back.bl.centers, m.bl.centers)
        np.testing.assert_array_equal(back.cm.biases, m.cm.biases)
        x = X[:3]
        np.testing.assert_array_equal(belfis_predict(back, x), belfis_predict(m, x))

    def test_total_rules_reported_as_sum(self):
        rng = np.random.default_rng(15)
        X = rng.uniform(0, 1, size=(40, 2))
        Y = rng.uniform(0, 1, size=40)
        cfg = default_belfis_config(16, train=TrainConfig(epochs=1, learning_rate=0.0))
        m, _ = train_belfis(cfg, (X, Y), seed=0)
        assert m.total_rules == 16


class TestRegressor:
    def test_fit_predict_smoke(self):
        rng = np.random.default_rng(16)
        X = rng.uniform(-1, 1, size=(100, 3))
        y = np.sin(X[:, 0]) + X[:, 1] * X[:, 2]
        est = BelfisRegressor(total_rules=8, epochs=8, learning_rate=1e-5, seed=0)
        est.fit(X, y)
        pred = est.predict(X)
        assert pred.shape == (100,)
        assert nmse(y, pred) < 0.2

    def test_params_round_trip(self):
        est = BelfisRegressor(total_rules=28, normalize=True)
        params = est.get_params()
        assert params["total_rules"] == 28
        assert params["normalize"] is True

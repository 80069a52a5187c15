"""Composite model wiring three fuzzy-inference sub-networks.

The input lag vector feeds two parallel paths whose outputs a third
network combines:

* ``bl`` sees the (optionally normalized) input together with its
  component-wise maximum and minimum, and emits a primary output.
* ``mo`` sees the (optionally normalized) input alone and emits a second
  primary output.
* ``cm`` maps the pair of primary outputs to the final prediction.

Training is staged: ``bl`` and ``mo`` are each fit against the target,
then frozen while ``cm`` learns to combine their outputs.  Each stage
derives its own seed from the run seed, so a run is reproducible from a
single integer.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y

from .anfis import (
    DEFAULT_FIRING_FLOOR,
    AnfisModel,
    LossTrace,
    TrainConfig,
    anfis_predict,
    fit_anfis,
    model_from_dict,
    model_to_dict,
)
from .errors import ConfigError, ShapeError, SolarfisError
from .validation import as_matrix, as_vector, readonly, require_finite

# Rule splits (combiner-path, input-path, mixer) for the benchmark totals;
# other totals fall back to a quarter each for the two small networks.
RULE_ALLOCATIONS = {16: (8, 4, 4), 28: (16, 6, 6), 38: (24, 7, 7)}


def allocate_rules(total: int) -> tuple[int, int, int]:
    """Split a total rule budget across the three sub-networks."""
    if total in RULE_ALLOCATIONS:
        return RULE_ALLOCATIONS[total]
    if total < 3:
        raise ConfigError(f"need at least 3 rules total, got {total}")
    small = max(1, total // 4)
    return total - 2 * small, small, small


@dataclass(frozen=True)
class BelfisConfig:
    """Rule allocation plus per-stage training settings."""

    rules_bl: int
    rules_mo: int
    rules_cm: int
    bl_train: TrainConfig = field(default_factory=TrainConfig)
    mo_train: TrainConfig = field(default_factory=TrainConfig)
    cm_train: TrainConfig = field(default_factory=TrainConfig)
    normalize: bool = False
    mo_residual: bool = False

    def __post_init__(self):
        for name, r in (
            ("rules_bl", self.rules_bl),
            ("rules_mo", self.rules_mo),
            ("rules_cm", self.rules_cm),
        ):
            if int(r) != r or r < 1:
                raise ConfigError(f"{name} must be a positive integer, got {r!r}")

    @property
    def total_rules(self) -> int:
        return self.rules_bl + self.rules_mo + self.rules_cm


def default_belfis_config(
    total_rules: int,
    train: TrainConfig | None = None,
    normalize: bool = False,
    mo_residual: bool = False,
) -> BelfisConfig:
    """Config with the documented allocation for a total rule budget and
    one shared per-stage training setting."""
    rules_bl, rules_mo, rules_cm = allocate_rules(total_rules)
    train = train or TrainConfig()
    return BelfisConfig(
        rules_bl=rules_bl,
        rules_mo=rules_mo,
        rules_cm=rules_cm,
        bl_train=train,
        mo_train=train,
        cm_train=train,
        normalize=normalize,
        mo_residual=mo_residual,
    )


@dataclass(frozen=True)
class BelfisModel:
    """Immutable composite of three sub-networks plus optional min-max
    input scaling fitted on the training rows."""

    bl: AnfisModel
    mo: AnfisModel
    cm: AnfisModel
    norm_lo: np.ndarray | None = None
    norm_hi: np.ndarray | None = None
    mo_residual: bool = False

    def __post_init__(self):
        if self.bl.d != self.mo.d + 2:
            raise ShapeError(
                f"bl expects dimension {self.mo.d + 2} (input plus max and min), got {self.bl.d}"
            )
        if self.cm.d != 2:
            raise ShapeError(f"cm must take the two primary outputs, got d={self.cm.d}")
        if (self.norm_lo is None) != (self.norm_hi is None):
            raise ConfigError("norm_lo and norm_hi must be set together")
        if self.norm_lo is not None:
            lo = as_vector(self.norm_lo, "norm_lo")
            hi = as_vector(self.norm_hi, "norm_hi")
            if lo.shape != (self.mo.d,) or hi.shape != (self.mo.d,):
                raise ShapeError("normalization parameters must have one entry per input")
            if np.any(hi < lo):
                raise ConfigError("norm_hi must be >= norm_lo")
            object.__setattr__(self, "norm_lo", readonly(lo))
            object.__setattr__(self, "norm_hi", readonly(hi))

    @property
    def d(self) -> int:
        return self.mo.d

    @property
    def total_rules(self) -> int:
        return self.bl.R + self.mo.R + self.cm.R


def _fit_minmax(X: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    return X.min(axis=0), X.max(axis=0)


def _apply_minmax(X: np.ndarray, lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
    span = hi - lo
    span = np.where(span > 0, span, 1.0)
    return (X - lo) / span


def _stage_inputs(m_or_norm, X: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Normalized inputs plus the two wired views: (s, bl input, mo input).

    The max/min channel reads the normalized values, so the whole
    architecture depends on the raw input only through the scaler; this is
    what makes retraining invariant to affine rescaling of the raw data.
    """
    lo, hi = m_or_norm
    S = X if lo is None else _apply_minmax(X, lo, hi)
    th = np.column_stack([S.max(axis=1), S.min(axis=1)])
    return S, np.concatenate([S, th], axis=1), S


def belfis_forward(m: BelfisModel, x) -> float:
    """Evaluate one lag vector through the composite."""
    xv = as_vector(x, "x")
    if xv.shape[0] != m.d:
        raise ShapeError(f"input has length {xv.shape[0]}, model expects {m.d}")
    require_finite(xv, "x")
    return float(belfis_predict(m, xv[None, :])[0])


def belfis_predict(m: BelfisModel, X) -> np.ndarray:
    """Batch forward pass over rows of ``X``."""
    Xm = as_matrix(X, "X")
    if Xm.shape[1] != m.d:
        raise ShapeError(f"inputs have {Xm.shape[1]} columns, model expects {m.d}")
    require_finite(Xm, "X")
    _, bl_in, mo_in = _stage_inputs((m.norm_lo, m.norm_hi), Xm)
    eta2 = anfis_predict(m.bl, bl_in)
    r_o = anfis_predict(m.mo, mo_in)
    return anfis_predict(m.cm, np.column_stack([eta2, r_o]))


def _run_stage(name: str, fn):
    try:
        return fn()
    except SolarfisError as exc:
        raise type(exc)(f"stage {name}: {exc}") from exc


def train_belfis(
    cfg: BelfisConfig, train, seed: int
) -> tuple[BelfisModel, dict[str, LossTrace]]:
    """Staged training: fit the two primary networks against the target,
    freeze them, then fit the mixer on their outputs."""
    if isinstance(train, tuple):
        X, Y = train
    else:
        X, Y = train.inputs, train.targets
    X = as_matrix(X, "inputs")
    Y = as_vector(Y, "targets")
    if X.shape[0] == 0:
        raise ShapeError("training set is empty")
    if X.shape[0] != Y.shape[0]:
        raise ShapeError(f"{X.shape[0]} input rows vs {Y.shape[0]} targets")
    require_finite(X, "inputs")
    require_finite(Y, "targets")

    norm = _fit_minmax(X) if cfg.normalize else (None, None)
    _, bl_in, mo_in = _stage_inputs(norm, X)

    bl_cfg = replace(cfg.bl_train, rng_seed=seed)
    mo_cfg = replace(cfg.mo_train, rng_seed=seed + 1)
    cm_cfg = replace(cfg.cm_train, rng_seed=seed + 2)

    bl, bl_trace = _run_stage("bl", lambda: fit_anfis((bl_in, Y), cfg.rules_bl, bl_cfg))
    eta2 = anfis_predict(bl, bl_in)
    mo_target = Y - eta2 if cfg.mo_residual else Y
    mo, mo_trace = _run_stage("mo", lambda: fit_anfis((mo_in, mo_target), cfg.rules_mo, mo_cfg))
    r_o = anfis_predict(mo, mo_in)
    cm, cm_trace = _run_stage(
        "cm", lambda: fit_anfis((np.column_stack([eta2, r_o]), Y), cfg.rules_cm, cm_cfg)
    )

    model = BelfisModel(
        bl=bl,
        mo=mo,
        cm=cm,
        norm_lo=norm[0],
        norm_hi=norm[1],
        mo_residual=cfg.mo_residual,
    )
    return model, {"bl": bl_trace, "mo": mo_trace, "cm": cm_trace}


def belfis_to_dict(m: BelfisModel) -> dict:
    return {
        "d": m.d,
        "allocation": [m.bl.R, m.mo.R, m.cm.R],
        "bl": model_to_dict(m.bl),
        "mo": model_to_dict(m.mo),
        "cm": model_to_dict(m.cm),
        "normalize": None
        if m.norm_lo is None
        else {"lo": m.norm_lo.tolist(), "hi": m.norm_hi.tolist()},
        "mo_residual": m.mo_residual,
    }


def belfis_to_json(m: BelfisModel) -> str:
    return json.dumps(belfis_to_dict(m), sort_keys=True)


def belfis_from_dict(doc: dict) -> BelfisModel:
    norm = doc.get("normalize")
    return BelfisModel(
        bl=model_from_dict(doc["bl"]),
        mo=model_from_dict(doc["mo"]),
        cm=model_from_dict(doc["cm"]),
        norm_lo=None if norm is None else np.array(norm["lo"], dtype=np.float64),
        norm_hi=None if norm is None else np.array(norm["hi"], dtype=np.float64),
        mo_residual=bool(doc.get("mo_residual", False)),
    )


def belfis_from_json(text: str) -> BelfisModel:
    return belfis_from_dict(json.loads(text))


class BelfisRegressor(RegressorMixin, BaseEstimator):
    """Scikit-learn estimator wrapping the composite model.

    Parameters
    ----------
    total_rules : int, default=16
        Total rule budget split across the three sub-networks.
    epochs : int, default=50
        Hybrid-training epochs per stage.
    learning_rate : float, default=1e-5
        Premise step size per stage; 0 disables descent.
    seed : int, default=0
        Run seed; stage seeds derive from it.
    normalize : bool, default=False
        Fit min-max input scaling on the training rows.
    mo_residual : bool, default=False
        Train the second primary network on the first network's residual
        instead of the raw target.
    sigma_floor : float or None, default=None
        Lower bound on membership widths (None: derive from input range).
    firing_floor : float, default=1e-12
        Lower bound on firing-sum divisors.

    Attributes
    ----------
    model_ : BelfisModel
    loss_traces_ : dict of stage name to LossTrace
    n_features_in_ : int
    """

    def __init__(
        self,
        total_rules: int = 16,
        epochs: int = 50,
        learning_rate: float = 1e-5,
        seed: int = 0,
        normalize: bool = False,
        mo_residual: bool = False,
        sigma_floor: float | None = None,
        firing_floor: float = DEFAULT_FIRING_FLOOR,
    ):
        self.total_rules = total_rules
        self.epochs = epochs
        self.learning_rate = learning_rate
        self.seed = seed
        self.normalize = normalize
        self.mo_residual = mo_residual
        self.sigma_floor = sigma_floor
        self.firing_floor = firing_floor

    def _config(self) -> BelfisConfig:
        train = TrainConfig(
            epochs=self.epochs,
            learning_rate=self.learning_rate,
            rng_seed=self.seed,
            sigma_floor=self.sigma_floor,
            firing_floor=self.firing_floor,
        )
        return default_belfis_config(
            self.total_rules,
            train=train,
            normalize=self.normalize,
            mo_residual=self.mo_residual,
        )

    def fit(self, X, y):
        X, y = check_X_y(X, y, y_numeric=True)
        X = X.astype(np.float64, copy=False)
        y = y.astype(np.float64, copy=False)
        self.model_, self.loss_traces_ = train_belfis(self._config(), (X, y), seed=self.seed)
        self.n_features_in_ = X.shape[1]
        return self

    def predict(self, X):
        check_is_fitted(self, "model_")
        X = check_array(X).astype(np.float64, copy=False)
        return belfis_predict(self.model_, X)

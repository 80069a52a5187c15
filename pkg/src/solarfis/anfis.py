"""First-order Sugeno fuzzy inference network with hybrid training.

The model evaluates four layers: Gaussian memberships per (rule, input),
rule firing strengths by product, normalization by the firing sum, and a
weighted sum of per-rule linear functions.  Training alternates a
least-squares solve for the linear (consequent) parameters with a
full-batch steepest-descent step on the membership (premise) parameters.

Rule premises are initialized by scatter partition: seeded k-means over
the training rows, one rule per cluster.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field, replace

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y

from .errors import ConfigError, NumericError, ShapeError
from .validation import as_matrix, as_vector, readonly, require_finite

DEFAULT_FIRING_FLOOR = 1e-12
SIGMA_FLOOR_SCALE = 1e-6


@dataclass(frozen=True)
class TrainConfig:
    """Hybrid-training settings.

    ``learning_rate`` may be 0 (descent becomes a no-op, leaving pure
    least squares); it must not be negative.  ``sigma_floor`` of None
    means "derive from the input range at initialization".
    """

    epochs: int = 50
    learning_rate: float = 1e-5
    rng_seed: int = 0
    sigma_floor: float | None = None
    firing_floor: float = DEFAULT_FIRING_FLOOR

    def __post_init__(self):
        if int(self.epochs) != self.epochs or self.epochs < 1:
            raise ConfigError(f"epochs must be a positive integer, got {self.epochs!r}")
        if self.learning_rate < 0:
            raise ConfigError(f"learning_rate must be >= 0, got {self.learning_rate!r}")
        if self.sigma_floor is not None and not self.sigma_floor > 0:
            raise ConfigError(f"sigma_floor must be positive, got {self.sigma_floor!r}")
        if not self.firing_floor > 0:
            raise ConfigError(f"firing_floor must be positive, got {self.firing_floor!r}")
        if int(self.rng_seed) != self.rng_seed:
            raise ConfigError(f"rng_seed must be an integer, got {self.rng_seed!r}")


@dataclass(frozen=True)
class LossTrace:
    """Per-epoch training sum of squared errors, measured after the
    least-squares step of each epoch."""

    sse: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.sse, dtype=np.float64)
        if arr.ndim != 1:
            raise ShapeError("loss trace must be 1-d")
        if arr.size and (not np.all(np.isfinite(arr)) or np.any(arr < 0)):
            raise NumericError("loss trace entries must be finite and non-negative")
        object.__setattr__(self, "sse", readonly(arr))

    def __len__(self) -> int:
        return int(self.sse.shape[0])


@dataclass(frozen=True)
class AnfisModel:
    """Immutable rule base: Gaussian premises plus linear consequents.

    ``centers`` and ``sigmas`` are (R, d); ``coefficients`` is (R, d) and
    ``biases`` is (R,).  Operations return new models rather than mutating.
    """

    centers: np.ndarray
    sigmas: np.ndarray
    coefficients: np.ndarray
    biases: np.ndarray
    sigma_floor: float = 1e-9
    firing_floor: float = DEFAULT_FIRING_FLOOR
    seed: int = field(default=0)

    def __post_init__(self):
        centers = as_matrix(self.centers, "centers")
        R, d = centers.shape
        if R < 1 or d < 1:
            raise ConfigError(f"need R >= 1 and d >= 1, got R={R}, d={d}")
        sigmas = as_matrix(self.sigmas, "sigmas")
        coefficients = as_matrix(self.coefficients, "coefficients")
        biases = as_vector(self.biases, "biases")
        if sigmas.shape != (R, d) or coefficients.shape != (R, d) or biases.shape != (R,):
            raise ShapeError(
                f"inconsistent parameter shapes for R={R}, d={d}: sigmas {sigmas.shape}, "
                f"coefficients {coefficients.shape}, biases {biases.shape}"
            )
        if not self.sigma_floor > 0 or not self.firing_floor > 0:
            raise ConfigError("sigma_floor and firing_floor must be positive")
        if np.any(sigmas < self.sigma_floor):
            raise ConfigError("all widths must be >= sigma_floor")
        for arr, name in (
            (centers, "centers"),
            (sigmas, "sigmas"),
            (coefficients, "coefficients"),
            (biases, "biases"),
        ):
            require_finite(arr, name)
            object.__setattr__(self, name, readonly(arr))

    @property
    def R(self) -> int:
        return int(self.centers.shape[0])

    @property
    def d(self) -> int:
        return int(self.centers.shape[1])


def max_min(x) -> tuple[float, float]:
    """Exact (maximum, minimum) of a non-empty vector."""
    arr = as_vector(x, "input")
    if arr.size == 0:
        raise ShapeError("max_min needs a non-empty vector")
    return float(arr.max()), float(arr.min())


def _kmeans(X: np.ndarray, k: int, rng: np.random.Generator, n_iter: int = 300) -> np.ndarray:
    """Deterministic Lloyd k-means with k-means++ seeding.

    Hand-rolled so that identical seeds give bit-identical centers across
    library versions and thread counts.  Centers come back sorted
    lexicographically, which fixes the rule order.
    """
    n = X.shape[0]
    centers = np.empty((k, X.shape[1]))
    centers[0] = X[int(rng.integers(n))]
    d2 = ((X - centers[0]) ** 2).sum(axis=1)
    for i in range(1, k):
        total = d2.sum()
        if total > 0:
            idx = int(rng.choice(n, p=d2 / total))
        else:
            idx = int(rng.integers(n))
        centers[i] = X[idx]
        d2 = np.minimum(d2, ((X - centers[i]) ** 2).sum(axis=1))
    for _ in range(n_iter):
        dist = ((X[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
        labels = dist.argmin(axis=1)
        new = np.empty_like(centers)
        for j in range(k):
            members = labels == j
            if members.any():
                new[j] = X[members].mean(axis=0)
            else:
                # empty cluster: grab the point farthest from its center
                new[j] = X[int(np.argmax(dist[np.arange(n), labels]))]
        if np.array_equal(new, centers):
            break
        centers = new
    order = np.lexsort(centers.T[::-1])
    return centers[order]


def init_anfis(
    train_inputs,
    R: int,
    seed: int,
    sigma_floor: float | None = None,
    firing_floor: float = DEFAULT_FIRING_FLOOR,
) -> AnfisModel:
    """Place ``R`` rules over the training rows by seeded k-means.

    Each rule's width per input dimension is the distance from its center
    to the nearest other center in that dimension (per-dimension input
    standard deviation when R=1 or when two centers coincide in a
    dimension).  Consequents start at zero.
    """
    X = as_matrix(train_inputs, "train_inputs")
    require_finite(X, "train_inputs")
    n, d = X.shape
    if R < 1:
        raise ConfigError(f"R must be >= 1, got {R}")
    if n < R:
        raise ConfigError(f"{n} training rows cannot support {R} rules")
    data_range = float(X.max() - X.min())
    if sigma_floor is None:
        sigma_floor = SIGMA_FLOOR_SCALE * data_range if data_range > 0 else SIGMA_FLOOR_SCALE
    if not sigma_floor > 0:
        raise ConfigError(f"sigma_floor must be positive, got {sigma_floor!r}")

    std = X.std(axis=0)
    std = np.where(std > sigma_floor, std, sigma_floor)
    rng = np.random.default_rng(seed)
    if R == 1:
        centers = X.mean(axis=0, keepdims=True)
        sigmas = std.reshape(1, d).copy()
    else:
        centers = _kmeans(X, R, rng)
        gaps = centers[:, None, :] - centers[None, :, :]
        dist2 = (gaps**2).sum(axis=2)
        np.fill_diagonal(dist2, np.inf)
        nearest = dist2.argmin(axis=1)
        sigmas = np.abs(centers - centers[nearest])
        sigmas = np.where(sigmas < sigma_floor, np.broadcast_to(std, sigmas.shape), sigmas)
    sigmas = np.maximum(sigmas, sigma_floor)
    return AnfisModel(
        centers=centers,
        sigmas=sigmas,
        coefficients=np.zeros((R, d)),
        biases=np.zeros(R),
        sigma_floor=float(sigma_floor),
        firing_floor=float(firing_floor),
        seed=int(seed),
    )


def _forward_parts(m: AnfisModel, X: np.ndarray):
    """All layer outputs for a batch: (y, wbar, w, S, D, f)."""
    z = (X[:, None, :] - m.centers[None, :, :]) / m.sigmas[None, :, :]
    w = np.exp(-0.5 * (z**2).sum(axis=2))
    S = w.sum(axis=1)
    D = np.maximum(S, m.firing_floor)
    wbar = w / D[:, None]
    f = X @ m.coefficients.T + m.biases[None, :]
    y = (wbar * f).sum(axis=1)
    return y, wbar, w, S, D, f


def anfis_forward(m: AnfisModel, x) -> tuple[float, np.ndarray]:
    """Evaluate one lag vector; returns the output and the normalized
    firing strengths."""
    xv = as_vector(x, "x")
    if xv.shape[0] != m.d:
        raise ShapeError(f"input has length {xv.shape[0]}, model expects {m.d}")
    require_finite(xv, "x")
    y, wbar, *_ = _forward_parts(m, xv[None, :])
    return float(y[0]), wbar[0]


def anfis_predict(m: AnfisModel, X) -> np.ndarray:
    """Batch forward pass over rows of ``X``."""
    Xm = as_matrix(X, "X")
    if Xm.shape[1] != m.d:
        raise ShapeError(f"inputs have {Xm.shape[1]} columns, model expects {m.d}")
    require_finite(Xm, "X")
    return _forward_parts(m, Xm)[0]


def _as_xy(batch) -> tuple[np.ndarray, np.ndarray]:
    """Accept an embedded dataset or a plain (inputs, targets) pair."""
    if isinstance(batch, tuple):
        X, Y = batch
    else:
        X, Y = batch.inputs, batch.targets
    X = as_matrix(X, "inputs")
    Y = as_vector(Y, "targets")
    if X.shape[0] != Y.shape[0]:
        raise ShapeError(f"{X.shape[0]} input rows vs {Y.shape[0]} targets")
    if X.shape[0] == 0:
        raise ShapeError("batch is empty")
    return X, Y


def design_matrix(m: AnfisModel, X: np.ndarray) -> np.ndarray:
    """Least-squares design: one row per sample with per-rule blocks
    [wbar_r * x_1, ..., wbar_r * x_d, wbar_r]."""
    _, wbar, *_ = _forward_parts(m, X)
    ones = np.ones((X.shape[0], 1))
    Xaug = np.concatenate([X, ones], axis=1)
    A = (wbar[:, :, None] * Xaug[:, None, :]).reshape(X.shape[0], m.R * (m.d + 1))
    return A


def lse_consequents(m: AnfisModel, batch) -> AnfisModel:
    """Replace all consequents with the minimum-norm least-squares optimum
    for the current premises (SVD solve)."""
    X, Y = _as_xy(batch)
    if X.shape[1] != m.d:
        raise ShapeError(f"inputs have {X.shape[1]} columns, model expects {m.d}")
    if not np.all(np.isfinite(X)):
        raise NumericError("design matrix contains non-finite entries")
    if not np.all(np.isfinite(Y)):
        raise NumericError("targets contain non-finite entries")
    A = design_matrix(m, X)
    p = m.R * (m.d + 1)
    if X.shape[0] < p:
        warnings.warn(
            f"least-squares system is underdetermined: {X.shape[0]} rows for {p} "
            f"consequent parameters; using the minimum-norm solution",
            stacklevel=2,
        )
    theta, *_ = np.linalg.lstsq(A, Y, rcond=None)
    theta = theta.reshape(m.R, m.d + 1)
    return replace(m, coefficients=theta[:, : m.d], biases=theta[:, m.d])


def premise_gradients(m: AnfisModel, batch) -> tuple[np.ndarray, np.ndarray]:
    """Exact gradients of SSE = sum (y - y_hat)^2 with respect to every
    center and width, by the chain rule through the forward layers."""
    X, Y = _as_xy(batch)
    if X.shape[1] != m.d:
        raise ShapeError(f"inputs have {X.shape[1]} columns, model expects {m.d}")
    if not np.all(np.isfinite(X)) or not np.all(np.isfinite(Y)):
        raise NumericError("training batch contains non-finite values")
    y, wbar, w, S, D, f = _forward_parts(m, X)
    resid = Y - y
    # d y / d w_r = (f_r - [S > floor] * y) / D;  when the floor is active
    # the divisor is a constant, so the second term drops out
    active = (S > m.firing_floor).astype(np.float64)
    dy_dw = (f - (active * y)[:, None]) / D[:, None]
    dE_dw = (-2.0 * resid)[:, None] * dy_dw
    diff = X[:, None, :] - m.centers[None, :, :]
    inv_s2 = 1.0 / m.sigmas[None, :, :] ** 2
    dw_dc = w[:, :, None] * diff * inv_s2
    dw_ds = w[:, :, None] * diff**2 * inv_s2 / m.sigmas[None, :, :]
    grad_c = np.einsum("nr,nrj->rj", dE_dw, dw_dc)
    grad_s = np.einsum("nr,nrj->rj", dE_dw, dw_ds)
    return grad_c, grad_s


def sd_premises(m: AnfisModel, batch, lr: float) -> AnfisModel:
    """One full-batch steepest-descent step on the premise parameters.
    Widths are clamped to the model's floor after the step."""
    if lr < 0:
        raise ConfigError(f"learning rate must be >= 0, got {lr!r}")
    if lr == 0:
        return m
    grad_c, grad_s = premise_gradients(m, batch)
    for name, g in (("center", grad_c), ("width", grad_s)):
        if not np.all(np.isfinite(g)):
            r, j = np.argwhere(~np.isfinite(g))[0]
            raise NumericError(f"non-finite gradient for {name}[{r},{j}]")
    centers = m.centers - lr * grad_c
    sigmas = np.maximum(m.sigmas - lr * grad_s, m.sigma_floor)
    return replace(m, centers=centers, sigmas=sigmas)


def training_sse(m: AnfisModel, batch) -> float:
    X, Y = _as_xy(batch)
    resid = Y - _forward_parts(m, X)[0]
    return float(resid @ resid)


def train_hybrid(m: AnfisModel, train, cfg: TrainConfig) -> tuple[AnfisModel, LossTrace]:
    """Hybrid learning: per epoch, solve consequents by least squares,
    record the post-solve SSE, then take one descent step on premises."""
    losses = np.empty(cfg.epochs)
    for epoch in range(cfg.epochs):
        try:
            m = lse_consequents(m, train)
            losses[epoch] = training_sse(m, train)
            m = sd_premises(m, train, cfg.learning_rate)
        except NumericError as exc:
            raise NumericError(f"epoch {epoch + 1}: {exc}") from exc
    return m, LossTrace(losses)


def fit_anfis(train, R: int, cfg: TrainConfig) -> tuple[AnfisModel, LossTrace]:
    """Initialize by k-means with ``cfg.rng_seed`` and run hybrid training."""
    X, _ = _as_xy(train)
    model = init_anfis(
        X, R, seed=cfg.rng_seed, sigma_floor=cfg.sigma_floor, firing_floor=cfg.firing_floor
    )
    return train_hybrid(model, train, cfg)


def model_to_dict(m: AnfisModel) -> dict:
    return {
        "d": m.d,
        "R": m.R,
        "centers": m.centers.tolist(),
        "sigmas": m.sigmas.tolist(),
        "coefficients": m.coefficients.tolist(),
        "biases": m.biases.tolist(),
        "config": {"sigma_floor": m.sigma_floor, "firing_floor": m.firing_floor},
        "seed": m.seed,
    }


def model_to_json(m: AnfisModel) -> str:
    """JSON document for the model; floats round-trip bit-exactly."""
    return json.dumps(model_to_dict(m), sort_keys=True)


def model_from_dict(doc: dict) -> AnfisModel:
    model = AnfisModel(
        centers=np.array(doc["centers"], dtype=np.float64),
        sigmas=np.array(doc["sigmas"], dtype=np.float64),
        coefficients=np.array(doc["coefficients"], dtype=np.float64),
        biases=np.array(doc["biases"], dtype=np.float64),
        sigma_floor=float(doc["config"]["sigma_floor"]),
        firing_floor=float(doc["config"]["firing_floor"]),
        seed=int(doc["seed"]),
    )
    if model.d != doc["d"] or model.R != doc["R"]:
        raise ShapeError("serialized d/R disagree with parameter shapes")
    return model


def model_from_json(text: str) -> AnfisModel:
    return model_from_dict(json.loads(text))


class AnfisRegressor(RegressorMixin, BaseEstimator):
    """Scikit-learn estimator wrapping the fuzzy-inference network.

    Parameters
    ----------
    rules : int, default=4
        Number of fuzzy rules (k-means clusters over training rows).
    epochs : int, default=50
        Hybrid-training epochs.
    learning_rate : float, default=1e-5
        Steepest-descent step size for premise parameters; 0 disables
        the descent half of each epoch.
    seed : int, default=0
        Seed for rule initialization.
    sigma_floor : float or None, default=None
        Lower bound on membership widths; None derives it from the
        training input range.
    firing_floor : float, default=1e-12
        Lower bound on the firing-strength normalization divisor.

    Attributes
    ----------
    model_ : AnfisModel
        Trained immutable model.
    loss_trace_ : LossTrace
        Per-epoch post-least-squares training SSE.
    n_features_in_ : int
        Input dimension seen during fit.
    """

    def __init__(
        self,
        rules: int = 4,
        epochs: int = 50,
        learning_rate: float = 1e-5,
        seed: int = 0,
        sigma_floor: float | None = None,
        firing_floor: float = DEFAULT_FIRING_FLOOR,
    ):
        self.rules = rules
        self.epochs = epochs
        self.learning_rate = learning_rate
        self.seed = seed
        self.sigma_floor = sigma_floor
        self.firing_floor = firing_floor

    def _train_config(self) -> TrainConfig:
        return TrainConfig(
            epochs=self.epochs,
            learning_rate=self.learning_rate,
            rng_seed=self.seed,
            sigma_floor=self.sigma_floor,
            firing_floor=self.firing_floor,
        )

    def fit(self, X, y):
        X, y = check_X_y(X, y, y_numeric=True)
        X = X.astype(np.float64, copy=False)
        y = y.astype(np.float64, copy=False)
        self.model_, self.loss_trace_ = fit_anfis((X, y), R=self.rules, cfg=self._train_config())
        self.n_features_in_ = X.shape[1]
        return self

    def predict(self, X):
        check_is_fitted(self, "model_")
        X = check_array(X).astype(np.float64, copy=False)
        return anfis_predict(self.model_, X)

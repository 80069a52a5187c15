"""Fuzzy-network forecasting of sunspot-number time series.

Two model families share one estimator API: a Gaussian-membership
adaptive network trained by hybrid least-squares / steepest-descent
(:class:`AnfisRegressor`), and a three-stage composition of such
networks with a learned mixing stage (:class:`BelfisRegressor`).
A persistence baseline, evaluation metrics, forecasting strategies and
a declarative benchmark runner round out the package.
"""

__version__ = "0.1.0"

from .anfis import (
    AnfisModel,
    AnfisRegressor,
    TrainConfig,
    anfis_forward,
    anfis_predict,
    fit_anfis,
    init_anfis,
    train_hybrid,
)
from .belfis import (
    BelfisConfig,
    BelfisModel,
    BelfisRegressor,
    allocate_rules,
    belfis_forward,
    belfis_predict,
    default_belfis_config,
    train_belfis,
)
from .dataset import (
    EmbeddedDataset,
    TimeSeries,
    embed,
    load_silso,
    month_index,
    smooth_13_month,
    split_by_count,
    split_by_date,
)
from .errors import SolarfisError
from .experiments import (
    ExperimentConfig,
    RunManifest,
    emit_plot_data,
    load_config,
    run_experiment,
    run_suite,
    validate_experiment,
)
from .forecast import (
    ForecastResult,
    ModelSpec,
    PersistenceRegressor,
    Predictor,
    RecursiveForecast,
    predict_open_loop,
    predict_recursive,
    train_for_horizon,
    train_on_dataset,
)
from .metrics import EvalReport, build_report, find_peak, nmse, rmse

__all__ = [
    "AnfisModel",
    "AnfisRegressor",
    "BelfisConfig",
    "BelfisModel",
    "BelfisRegressor",
    "EmbeddedDataset",
    "EvalReport",
    "ExperimentConfig",
    "ForecastResult",
    "ModelSpec",
    "PersistenceRegressor",
    "Predictor",
    "RecursiveForecast",
    "RunManifest",
    "SolarfisError",
    "TimeSeries",
    "TrainConfig",
    "allocate_rules",
    "anfis_forward",
    "anfis_predict",
    "belfis_forward",
    "belfis_predict",
    "build_report",
    "default_belfis_config",
    "embed",
    "emit_plot_data",
    "find_peak",
    "fit_anfis",
    "init_anfis",
    "load_config",
    "load_silso",
    "month_index",
    "nmse",
    "predict_open_loop",
    "predict_recursive",
    "rmse",
    "run_experiment",
    "run_suite",
    "smooth_13_month",
    "split_by_count",
    "split_by_date",
    "train_belfis",
    "train_for_horizon",
    "train_hybrid",
    "train_on_dataset",
    "validate_experiment",
    "__version__",
]

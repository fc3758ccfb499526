"""Regression with latent factor structure for high-dimensional time series."""

from ._factorreg import (
    ConfigError,
    DimensionError,
    FactorregError,
    LagError,
    RankError,
    autocovariances,
    distance_d,
    distance_dbar,
    factor_rmse,
    fit_lasso,
    fit_ols,
    fit_pipeline,
    forecast_error,
    gumbel_critical_value,
    rank_autocorr,
    replicate,
    rolling_evaluate,
    simulate,
    test_white_noise,
)

__all__ = [
    "ConfigError",
    "DimensionError",
    "FactorregError",
    "LagError",
    "RankError",
    "autocovariances",
    "distance_d",
    "distance_dbar",
    "factor_rmse",
    "fit_lasso",
    "fit_ols",
    "fit_pipeline",
    "forecast_error",
    "gumbel_critical_value",
    "rank_autocorr",
    "replicate",
    "rolling_evaluate",
    "simulate",
    "test_white_noise",
]

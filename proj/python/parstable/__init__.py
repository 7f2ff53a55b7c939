"""Simulation and Yule-Walker estimation of multidimensional alpha-stable PAR(1) models."""

from ._core import (
    DataError,
    NumericalError,
    ParModel,
    check_boundedness,
    estimate,
    fit,
    mcculloch_estimate,
    model1_preset,
    model2_preset,
    ncv_auto,
    ncv_cross,
    run_mc_study,
    simulate,
    solve_coefficients,
    stable_cdf,
)

__all__ = [
    "DataError",
    "NumericalError",
    "ParModel",
    "check_boundedness",
    "estimate",
    "fit",
    "mcculloch_estimate",
    "model1_preset",
    "model2_preset",
    "ncv_auto",
    "ncv_cross",
    "run_mc_study",
    "simulate",
    "solve_coefficients",
    "stable_cdf",
]

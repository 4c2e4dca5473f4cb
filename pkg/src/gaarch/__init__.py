"""GAARCH(1,1) model of investment-strategy returns."""

__version__ = "0.1.0"

from gaarch.data import ReturnSeries, load_csv, load_fit, load_params, save_csv, save_fit, save_params
from gaarch.estimate import FitConfig, FitResult, LrtResult, fit, lrt, neg_loglik, two_step_init
from gaarch.model import (
    Attribution,
    FilterOutput,
    GaarchParams,
    attribute,
    cond_mean,
    filter_returns,
    simulate,
    step_chi,
)
from gaarch.skewt import SkewTParams, StandardizedSkewT, standardize

__all__ = [
    "Attribution",
    "FilterOutput",
    "FitConfig",
    "FitResult",
    "GaarchParams",
    "LrtResult",
    "ReturnSeries",
    "SkewTParams",
    "StandardizedSkewT",
    "attribute",
    "cond_mean",
    "filter_returns",
    "fit",
    "load_csv",
    "load_fit",
    "load_params",
    "lrt",
    "neg_loglik",
    "save_csv",
    "save_fit",
    "save_params",
    "simulate",
    "standardize",
    "step_chi",
    "two_step_init",
]

"""Estimating Wasserstein-1 distances from samples, with minimax lower-bound tools."""
from .besov import BesovParams, besov_ipm, level_terms, w1_sandwich
from .densities import (
    GridDensity,
    SampleSet,
    WaveletDensity,
    holder_membership,
    make_nu_theta,
    max_tau,
    sample,
)
from .errors import W1Error
from .estimators import EstimatorConfig, choose_J, plugin_empirical, plugin_smoothed, rate, smoothed_estimate
from .transport import DiscreteMeasure, TransportSolution, w1_1d, w1_discrete, w1_empirical, w1_grid
from .wavelet import CoefficientArray, WaveletIndex, analyze, empirical_coeffs, haar_eval, synthesize

__version__ = "0.1.0"

__all__ = [
    "BesovParams",
    "CoefficientArray",
    "DiscreteMeasure",
    "EstimatorConfig",
    "GridDensity",
    "SampleSet",
    "TransportSolution",
    "W1Error",
    "WaveletDensity",
    "WaveletIndex",
    "analyze",
    "besov_ipm",
    "choose_J",
    "empirical_coeffs",
    "haar_eval",
    "holder_membership",
    "level_terms",
    "make_nu_theta",
    "max_tau",
    "plugin_empirical",
    "plugin_smoothed",
    "rate",
    "sample",
    "smoothed_estimate",
    "synthesize",
    "w1_1d",
    "w1_discrete",
    "w1_empirical",
    "w1_grid",
    "w1_sandwich",
]

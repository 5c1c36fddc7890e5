"""Matching-moment priors, TV bounds and the Le Cam two-point assembly."""
from .bounds import (
    DeltaEstimate,
    HypothesisPair,
    calibrate_K,
    delta_Q,
    exact_tv_bruteforce,
    functional_scale,
    l2_tv_bound,
    lecam_risk_lb,
    separation,
    telescope_bound,
    telescope_terms,
    verify_lower_bound,
)
from .priors import MomentPriorPair, build_matching_priors, verify_moments
from .simplex import LPResult, simplex

__all__ = [
    "DeltaEstimate",
    "HypothesisPair",
    "LPResult",
    "MomentPriorPair",
    "build_matching_priors",
    "calibrate_K",
    "delta_Q",
    "exact_tv_bruteforce",
    "functional_scale",
    "l2_tv_bound",
    "lecam_risk_lb",
    "separation",
    "simplex",
    "telescope_bound",
    "telescope_terms",
    "verify_lower_bound",
    "verify_moments",
]

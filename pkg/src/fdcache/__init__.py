"""Stochastic-geometry toolkit for cache-aided full-duplex small cells.

Analytic success-probability bounds, a snapshot Monte Carlo engine to check
them, and a small CLI for sweeps.
"""

from .analytics import AnalyticReport, QuadraturePolicy, analyze, p_suc_lower_bound
from .caching import cache_hit_probability, estimate_p_hit_geographic, zipf_catalog
from .core import (CacheSamplingMode, CorrelationMode, McEstimate, ScenarioConfig, load_scenario,
                   validate)
from .montecarlo import estimate_laplace, estimate_p_suc

__all__ = [
    "AnalyticReport",
    "CacheSamplingMode",
    "CorrelationMode",
    "McEstimate",
    "QuadraturePolicy",
    "ScenarioConfig",
    "analyze",
    "cache_hit_probability",
    "estimate_laplace",
    "estimate_p_hit_geographic",
    "estimate_p_suc",
    "load_scenario",
    "p_suc_lower_bound",
    "validate",
    "zipf_catalog",
]

__version__ = "0.1.0"

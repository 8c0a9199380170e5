"""Forecast-driven data-leak prevention.

Per-user access minutes are aggregated into periods, fitted with a continuous
piecewise-linear changepoint trend, wrapped in a residual-based access band,
and users whose access climbs past the band are flagged for alerting or
restriction.
"""

__version__ = "0.1.0"

from .bands import BandConfig, BandMode, ErrorStats, bounds, error_stats, pct_error, residual
from .forecast import ForecastSeries, forecast_future, predict_in_sample
from .ingest import AccessRecord, Granularity, UserSeries, aggregate, parse_records
from .policy import Action, Thresholds, classify_point, decide_action, rank_suspects
from .store import Store
from .syngen import ScenarioConfig, generate
from .trendfit import FitConfig, TrendModel, design_row, eval_trend, fit_trend, place_changepoints

__all__ = [
    "AccessRecord", "Action", "BandConfig", "BandMode", "ErrorStats", "FitConfig",
    "ForecastSeries", "Granularity", "ScenarioConfig", "Store", "Thresholds", "TrendModel",
    "UserSeries", "aggregate", "bounds", "classify_point", "decide_action", "design_row",
    "error_stats", "eval_trend", "fit_trend", "forecast_future", "generate", "parse_records",
    "pct_error", "place_changepoints", "predict_in_sample", "rank_suspects", "residual",
]

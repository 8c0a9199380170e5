"""End-to-end steps shared by the CLI: fit users from records, band and judge a model."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Iterable, Optional

from .bands import BandConfig, BandedForecast, ErrorStats, band_forecast, error_stats
from .errors import DLPError
from .forecast import forecast, predict_in_sample
from .ingest import AccessRecord, Granularity, UserSeries, aggregate, period_end
from .policy import AccessDecision, DecisionMode, Thresholds, assess
from .trendfit import FitConfig, TrendModel, fit_trend

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class FitOutcome:
    user_id: str
    model: Optional[TrendModel] = None
    stats: Optional[ErrorStats] = None
    error: Optional[DLPError] = None


def fit_series(series: UserSeries, fit_cfg: FitConfig, band: BandConfig) -> FitOutcome:
    try:
        model = fit_trend(series, fit_cfg)
    except DLPError as exc:
        return FitOutcome(series.user_id, error=exc)
    fitted = predict_in_sample(model, series)
    return FitOutcome(series.user_id, model, error_stats(series.values, fitted.yhat, band.alpha))


def fit_records(records: list[AccessRecord], granularity: Granularity, fit_cfg: FitConfig,
                band: BandConfig, users: Optional[Iterable[str]] = None) -> list[FitOutcome]:
    """Aggregate over the common window of all records and fit each requested user."""
    all_series = aggregate(records, granularity)
    wanted = sorted(all_series) if users is None else list(users)
    out = []
    for uid in wanted:
        if uid not in all_series:
            out.append(FitOutcome(uid, error=DLPError(f"no records for user {uid!r}")))
            continue
        out.append(fit_series(all_series[uid], fit_cfg, band))
    return out


def training_series(records: list[AccessRecord], model: TrendModel) -> UserSeries:
    """The model's training window rebuilt from stored records."""
    window = (model.origin, period_end(model.origin, model.granularity, model.n_train - 1))
    own = [r for r in records if r.user_id == model.user_id]
    series = aggregate(own, model.granularity, window).get(model.user_id)
    if series is None:
        series = UserSeries(model.user_id, model.granularity, model.origin,
                            tuple(float(i) for i in range(model.n_train)), (0.0,) * model.n_train)
    return series


def judge(model: TrendModel, stats: ErrorStats, band: BandConfig, horizon: int,
          actuals: Optional[UserSeries] = None, mode: DecisionMode = DecisionMode.BOTH,
          thresholds: Thresholds = Thresholds()) -> tuple[BandedForecast, list[AccessDecision]]:
    fc = forecast(model, horizon)
    y = actuals.values if actuals is not None else ()
    banded = band_forecast(fc, stats, band, y)
    return banded, assess(banded, mode, thresholds)

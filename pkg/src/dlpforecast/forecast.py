"""In-sample fitted values and out-of-sample trend extrapolation."""

from __future__ import annotations

from dataclasses import dataclass

from .errors import LengthMismatch
from .ingest import UserSeries
from .trendfit import TrendModel, eval_trend


@dataclass(frozen=True)
class ForecastSeries:
    user_id: str
    times: tuple[float, ...]
    yhat: tuple[float, ...]
    horizon_start: int

    def __post_init__(self):
        if len(self.times) != len(self.yhat):
            raise LengthMismatch("times and yhat differ in length")
        if any(b <= a for a, b in zip(self.times, self.times[1:])):
            raise ValueError("times must be strictly increasing")

    def __len__(self) -> int:
        return len(self.yhat)


def predict_in_sample(model: TrendModel, series: UserSeries) -> ForecastSeries:
    if len(series) != model.n_train:
        raise LengthMismatch(f"series has {len(series)} periods, model was trained on {model.n_train}")
    yhat = tuple(eval_trend(model, t) for t in series.times)
    return ForecastSeries(model.user_id, tuple(series.times), yhat, horizon_start=model.n_train)


def forecast_future(model: TrendModel, horizon: int) -> ForecastSeries:
    """Extrapolate past the training window; no new changepoints are introduced."""
    if horizon < 1:
        raise ValueError("horizon must be >= 1")
    times = tuple(float(t) for t in range(model.n_train, model.n_train + horizon))
    return ForecastSeries(model.user_id, times, tuple(eval_trend(model, t) for t in times),
                          horizon_start=model.n_train)


def forecast(model: TrendModel, horizon: int = 0) -> ForecastSeries:
    """Training-period fitted values followed by ``horizon`` extrapolated periods."""
    times = tuple(float(t) for t in range(model.n_train + horizon))
    return ForecastSeries(model.user_id, times, tuple(eval_trend(model, t) for t in times),
                          horizon_start=model.n_train)

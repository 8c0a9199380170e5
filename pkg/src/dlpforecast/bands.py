"""Residual statistics and the symmetric access band around a forecast."""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Sequence

from .errors import EmptyInput, LengthMismatch
from .forecast import ForecastSeries

PCT_GUARD = 1e-12


class BandMode(str, Enum):
    LITERAL = "literal"    # w = mu * varsigma * sigma
    MU_PLUS = "mu_plus"    # w = mu + varsigma * sigma


@dataclass(frozen=True)
class BandConfig:
    alpha: float = 0.0
    varsigma: float = 2.0
    band_mode: BandMode = BandMode.LITERAL

    def __post_init__(self):
        if not self.varsigma > 0:
            raise ValueError("varsigma must be > 0")
        if not math.isfinite(self.alpha):
            raise ValueError("alpha must be finite")
        object.__setattr__(self, "band_mode", BandMode(self.band_mode))


@dataclass(frozen=True)
class ErrorStats:
    alpha: float
    epsilon: tuple[float, ...]
    xi: tuple[Optional[float], ...]
    abs_err: tuple[float, ...]
    mu: float
    sigma: float

    @property
    def n(self) -> int:
        return len(self.abs_err)

    @property
    def mean_abs_pct_error(self) -> Optional[float]:
        """Mean |xi| over the periods where xi is defined."""
        defined = [abs(x) for x in self.xi if x is not None]
        return math.fsum(defined) / len(defined) if defined else None


@dataclass(frozen=True)
class BandedForecast:
    user_id: str
    times: tuple[float, ...]
    y: tuple[Optional[float], ...]
    yhat: tuple[float, ...]
    lower: tuple[float, ...]
    upper: tuple[float, ...]
    varsigma: float
    half_width: float
    horizon_start: int
    epsilon: tuple[Optional[float], ...] = ()
    xi: tuple[Optional[float], ...] = ()


def residual(y: float, yhat: float, alpha: float = 0.0) -> float:
    """(y + alpha) - (yhat - alpha)."""
    return (y + alpha) - (yhat - alpha)


def pct_error(epsilon: float, y: float, alpha: float = 0.0) -> Optional[float]:
    """100 * epsilon / (y + alpha), or None where the denominator vanishes."""
    denom = y + alpha
    if abs(denom) <= PCT_GUARD:
        return None
    return 100.0 * epsilon / denom


def error_stats(y: Sequence[float], yhat: Sequence[float], alpha: float = 0.0) -> ErrorStats:
    if len(y) != len(yhat):
        raise LengthMismatch(f"{len(y)} actuals vs {len(yhat)} predictions")
    if not len(y):
        raise EmptyInput("error statistics need at least one point")
    eps = tuple(residual(a, p, alpha) for a, p in zip(y, yhat))
    xi = tuple(pct_error(e, a, alpha) for e, a in zip(eps, y))
    ae = tuple(abs(e) for e in eps)
    n = len(ae)
    if all(a == ae[0] for a in ae):
        # exact: the fp mean of equal values can drift by an ulp
        mu, sigma = ae[0], 0.0
    else:
        mu = math.fsum(ae) / n
        sigma = math.sqrt(math.fsum((a - mu) ** 2 for a in ae) / n)
    return ErrorStats(alpha, eps, xi, ae, mu, sigma)


def half_width(mu: float, sigma: float, varsigma: float, mode: BandMode = BandMode.LITERAL) -> float:
    if not varsigma > 0:
        raise ValueError("varsigma must be > 0")
    if BandMode(mode) is BandMode.MU_PLUS:
        return mu + varsigma * sigma
    return mu * varsigma * sigma


def bounds(yhat: Sequence[float], mu: float, sigma: float, varsigma: float,
           mode: BandMode = BandMode.LITERAL) -> tuple[list[float], list[float]]:
    """Lower and upper bounds, one shared half-width for every period."""
    w = half_width(mu, sigma, varsigma, mode)
    return [p - w for p in yhat], [p + w for p in yhat]


def band_forecast(fc: ForecastSeries, stats: ErrorStats, cfg: BandConfig,
                  y: Sequence[Optional[float]] = ()) -> BandedForecast:
    """Attach bounds (and residuals where actuals exist) to a forecast.

    ``y`` may be shorter than the forecast; missing tail entries are absent.
    The band always uses the training-set ``stats``.
    """
    w = half_width(stats.mu, stats.sigma, cfg.varsigma, cfg.band_mode)
    actual = [y[i] if i < len(y) else None for i in range(len(fc))]
    eps = [None if a is None else residual(a, p, cfg.alpha) for a, p in zip(actual, fc.yhat)]
    xi = [None if e is None else pct_error(e, a, cfg.alpha) for e, a in zip(eps, actual)]
    return BandedForecast(
        user_id=fc.user_id,
        times=fc.times,
        y=tuple(actual),
        yhat=fc.yhat,
        lower=tuple(p - w for p in fc.yhat),
        upper=tuple(p + w for p in fc.yhat),
        varsigma=cfg.varsigma,
        half_width=w,
        horizon_start=fc.horizon_start,
        epsilon=tuple(eps),
        xi=tuple(xi),
    )

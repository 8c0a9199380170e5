"""Band breaches to graded access decisions and a suspect ranking.

Observed periods are judged by their actual access against the period's upper
bound. Forecast periods have no actual yet; there the extrapolated trend is
judged against the training ceiling, the highest upper bound the user was
granted in any training period. Only excess above the upper side is acted on.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum, IntEnum
from typing import Iterable

from .bands import BandedForecast
from .errors import InvalidBand, InvalidThresholds

SEVERITY_FLOOR = 1e-9


class Action(IntEnum):
    ALLOW = 0
    ALERT = 1
    RESTRICT = 2
    BLOCK = 3


class Basis(str, Enum):
    OBSERVED = "OBSERVED"
    FORECAST = "FORECAST"


class DecisionMode(str, Enum):
    """Which periods may trigger enforcement."""

    OBSERVED = "observed"
    FORECAST = "forecast"
    BOTH = "both"


@dataclass(frozen=True)
class Thresholds:
    alert: float = 0.0
    restrict: float = 1.0
    block: float = 3.0

    def __post_init__(self):
        if not 0 <= self.alert <= self.restrict <= self.block:
            raise InvalidThresholds(f"need 0 <= alert <= restrict <= block, got {self}")


@dataclass(frozen=True)
class AccessDecision:
    user_id: str
    period: int
    observed_or_forecast: Basis
    value: float
    upper: float
    lower: float
    excess: float
    severity: float
    action: Action

    @property
    def breach(self) -> bool:
        return self.excess > 0


def classify_point(value: float, lower: float, upper: float) -> tuple[float, bool]:
    if upper < lower:
        raise InvalidBand(f"upper {upper!r} below lower {lower!r}")
    breach = value > upper
    return (value - upper if breach else 0.0), breach


def severity(excess: float, half_width: float) -> float:
    return excess / max(half_width, SEVERITY_FLOOR)


def decide_action(severity: float, thresholds: Thresholds = Thresholds()) -> Action:
    # severities at or below the alert threshold are tolerated
    if severity <= thresholds.alert:
        return Action.ALLOW
    if severity < thresholds.restrict:
        return Action.ALERT
    if severity < thresholds.block:
        return Action.RESTRICT
    return Action.BLOCK


def training_ceiling(banded: BandedForecast) -> tuple[float, float]:
    """(min lower, max upper) over the training periods."""
    n = banded.horizon_start
    if n < 1:
        raise ValueError("forecast has no training periods")
    return min(banded.lower[:n]), max(banded.upper[:n])


def assess(banded: BandedForecast, mode: DecisionMode = DecisionMode.BOTH,
           thresholds: Thresholds = Thresholds()) -> list[AccessDecision]:
    """One decision per period of ``banded``."""
    mode = DecisionMode(mode)
    floor, ceiling = training_ceiling(banded)
    out = []
    for i, t in enumerate(banded.times):
        if i < banded.horizon_start:
            basis = Basis.OBSERVED
            value = banded.y[i] if banded.y[i] is not None else banded.yhat[i]
            lo, hi = banded.lower[i], banded.upper[i]
            judged = mode is not DecisionMode.FORECAST and banded.y[i] is not None
        else:
            basis = Basis.FORECAST
            value, lo, hi = banded.yhat[i], floor, ceiling
            judged = mode is not DecisionMode.OBSERVED
        excess, _ = classify_point(value, lo, hi)
        if not judged:
            excess = 0.0
        sev = severity(excess, banded.half_width)
        out.append(AccessDecision(banded.user_id, int(t), basis, value, hi, lo, excess, sev,
                                  decide_action(sev, thresholds)))
    return out


def rank_suspects(decisions: Iterable[AccessDecision]) -> list[tuple[str, float]]:
    """Users by descending worst severity, ties by user id."""
    worst: dict[str, float] = {}
    for d in decisions:
        worst[d.user_id] = max(worst.get(d.user_id, 0.0), d.severity)
    return sorted(worst.items(), key=lambda item: (-item[1], item[0]))

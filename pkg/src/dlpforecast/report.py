"""Delimited report formats: per-period report rows, decisions, suspect ranking."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from datetime import date
from typing import Iterable, Optional

from .bands import BandedForecast
from .errors import CorruptFile
from .ingest import Granularity, period_start
from .policy import AccessDecision, Action, Basis, rank_suspects

REPORT_HEADER = ("user_id", "period_index", "period_label", "y", "yhat", "lower", "upper",
                 "epsilon", "xi", "breach", "action")
DECISION_HEADER = ("user_id", "period_index", "basis", "value", "upper", "lower",
                   "excess", "severity", "action")
RANKING_HEADER = ("user_id", "max_severity", "action")


def _real(x: Optional[float]) -> str:
    return "" if x is None else repr(float(x))


@dataclass(frozen=True)
class ReportRow:
    user_id: str
    period_index: int
    period_label: date
    y: Optional[float]
    yhat: float
    lower: float
    upper: float
    epsilon: Optional[float]
    xi: Optional[float]
    breach: bool
    action: Action

    def fields(self) -> list[str]:
        return [self.user_id, str(self.period_index), self.period_label.isoformat(), _real(self.y),
                _real(self.yhat), _real(self.lower), _real(self.upper), _real(self.epsilon),
                _real(self.xi), "true" if self.breach else "false", self.action.name]


def report_rows(banded: BandedForecast, decisions: list[AccessDecision],
                origin: date, granularity: Granularity) -> list[ReportRow]:
    rows = []
    for i, d in enumerate(decisions):
        rows.append(ReportRow(
            user_id=banded.user_id,
            period_index=d.period,
            period_label=period_start(origin, granularity, d.period),
            y=banded.y[i],
            yhat=banded.yhat[i],
            lower=banded.lower[i],
            upper=banded.upper[i],
            epsilon=banded.epsilon[i] if banded.epsilon else None,
            xi=banded.xi[i] if banded.xi else None,
            breach=d.breach,
            action=d.action,
        ))
    return rows


def _csv(header, rows: Iterable[list[str]]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def report_csv(rows: Iterable[ReportRow]) -> str:
    return _csv(REPORT_HEADER, (r.fields() for r in rows))


def decisions_csv(decisions: Iterable[AccessDecision]) -> str:
    return _csv(DECISION_HEADER, (
        [d.user_id, str(d.period), d.observed_or_forecast.value, _real(d.value), _real(d.upper),
         _real(d.lower), _real(d.excess), _real(d.severity), d.action.name]
        for d in decisions
    ))


def parse_decisions(text: str) -> list[AccessDecision]:
    reader = csv.reader(io.StringIO(text))
    header = next(reader, None)
    if header is None:
        return []
    if tuple(header) != DECISION_HEADER:
        raise CorruptFile(f"unexpected decisions header {header}")
    out = []
    for lineno, row in enumerate(reader, start=2):
        try:
            uid, period, basis, value, upper, lower, excess, sev, action = row
            out.append(AccessDecision(uid, int(period), Basis(basis), float(value), float(upper),
                                      float(lower), float(excess), float(sev), Action[action]))
        except (ValueError, KeyError) as exc:
            raise CorruptFile(f"decisions line {lineno}: {exc}") from None
    return out


def ranking(decisions: list[AccessDecision]) -> list[tuple[str, float, Action]]:
    """rank_suspects plus each user's worst action."""
    worst_action: dict[str, Action] = {}
    for d in decisions:
        worst_action[d.user_id] = max(worst_action.get(d.user_id, Action.ALLOW), d.action)
    return [(uid, sev, worst_action[uid]) for uid, sev in rank_suspects(decisions)]


def ranking_csv(ranked: Iterable[tuple[str, float, Action]]) -> str:
    return _csv(RANKING_HEADER, ([uid, _real(sev), act.name] for uid, sev, act in ranked))

"""Access-log parsing and per-user period aggregation."""

from __future__ import annotations

import builtins
import csv
import json
import math
from collections import defaultdict
from dataclasses import dataclass
from datetime import date, timedelta
from enum import Enum
from typing import IO, Iterable, NamedTuple

from .errors import EmptyInput, EmptyUserId, IngestError, MalformedRow, NegativeDuration

CSV_HEADER = ("user_id", "date", "duration_min")


class Granularity(str, Enum):
    DAILY = "DAILY"
    MONTHLY = "MONTHLY"
    HALF_YEARLY = "HALF_YEARLY"
    ANNUAL = "ANNUAL"

    @classmethod
    def parse(cls, value: "str | Granularity") -> "Granularity":
        if isinstance(value, cls):
            return value
        key = str(value).strip().upper().replace("-", "_")
        aliases = {"YEARLY": "ANNUAL", "HALFYEARLY": "HALF_YEARLY", "DAY": "DAILY", "MONTH": "MONTHLY"}
        key = aliases.get(key, key)
        try:
            return cls(key)
        except ValueError:
            raise ValueError(f"unknown granularity {value!r}") from None


def _ordinal(d: date, g: Granularity) -> int:
    """Absolute period number of the period containing ``d``."""
    if g is Granularity.DAILY:
        return d.toordinal()
    if g is Granularity.MONTHLY:
        return d.year * 12 + d.month - 1
    if g is Granularity.HALF_YEARLY:
        return d.year * 2 + (d.month - 1) // 6
    return d.year


def _from_ordinal(n: int, g: Granularity) -> date:
    if g is Granularity.DAILY:
        return date.fromordinal(n)
    if g is Granularity.MONTHLY:
        return date(n // 12, n % 12 + 1, 1)
    if g is Granularity.HALF_YEARLY:
        return date(n // 2, 1 + 6 * (n % 2), 1)
    return date(n, 1, 1)


def period_floor(d: date, granularity: Granularity) -> date:
    """First day of the period containing ``d``."""
    return _from_ordinal(_ordinal(d, granularity), granularity)


def period_index(d: date, origin: date, granularity: Granularity) -> int:
    return _ordinal(d, granularity) - _ordinal(origin, granularity)


def period_start(origin: date, granularity: Granularity, index: int) -> date:
    """Calendar start of period ``index`` counted from the period containing ``origin``."""
    return _from_ordinal(_ordinal(origin, granularity) + index, granularity)


def period_end(origin: date, granularity: Granularity, index: int) -> date:
    """Last calendar day of period ``index``."""
    return period_start(origin, granularity, index + 1) - timedelta(days=1)


@dataclass(frozen=True)
class AccessRecord:
    user_id: str
    date: date
    duration: float

    def __post_init__(self):
        uid = self.user_id.strip() if isinstance(self.user_id, str) else ""
        if not uid:
            raise EmptyUserId("user_id is empty")
        object.__setattr__(self, "user_id", uid)
        if not isinstance(self.date, date):
            raise MalformedRow(f"date must be a calendar date, got {self.date!r}")
        dur = float(self.duration)
        if not math.isfinite(dur):
            raise MalformedRow(f"duration is not finite: {self.duration!r}")
        if dur < 0:
            raise NegativeDuration(f"negative duration {dur!r}")
        object.__setattr__(self, "duration", dur)


@dataclass(frozen=True)
class UserSeries:
    user_id: str
    granularity: Granularity
    origin: date
    times: tuple[float, ...]
    values: tuple[float, ...]

    def __post_init__(self):
        if len(self.times) != len(self.values):
            raise ValueError("times and values differ in length")
        if any(t != float(i) for i, t in enumerate(self.times)):
            raise ValueError("times must be the contiguous period indices 0..n-1")
        if any(v < 0 for v in self.values):
            raise ValueError("series values must be nonnegative")

    def __len__(self) -> int:
        return len(self.values)

    def label(self, index: int) -> date:
        return period_start(self.origin, self.granularity, index)

    @classmethod
    def from_values(cls, values: Iterable[float], user_id: str = "user",
                    granularity: Granularity = Granularity.ANNUAL,
                    origin: date = date(2014, 1, 1)) -> "UserSeries":
        vals = tuple(float(v) for v in values)
        return cls(user_id, Granularity.parse(granularity), period_floor(origin, Granularity.parse(granularity)),
                   tuple(float(i) for i in range(len(vals))), vals)


class ParseResult(NamedTuple):
    records: list[AccessRecord]
    rejected: list[IngestError]


def _parse_date(text: str, line: int) -> date:
    text = text.strip()
    if len(text) != 10:
        raise MalformedRow(f"date {text!r} is not YYYY-MM-DD", line)
    try:
        return date.fromisoformat(text)
    except ValueError:
        raise MalformedRow(f"invalid calendar date {text!r}", line) from None


def _parse_duration(value, line: int) -> float:
    if isinstance(value, bool) or value is None:
        raise MalformedRow(f"non-numeric duration {value!r}", line)
    try:
        dur = float(value.strip() if isinstance(value, str) else value)
    except (TypeError, ValueError):
        raise MalformedRow(f"non-numeric duration {value!r}", line) from None
    if not math.isfinite(dur):
        raise MalformedRow(f"non-finite duration {value!r}", line)
    if dur < 0:
        raise NegativeDuration(f"negative duration {dur!r}", line)
    return dur


def _build(user_id, date_text, duration, line: int) -> AccessRecord:
    if not isinstance(user_id, str):
        raise MalformedRow(f"user_id must be a string, got {user_id!r}", line)
    if not isinstance(date_text, str):
        raise MalformedRow(f"date must be a string, got {date_text!r}", line)
    when = _parse_date(date_text, line)
    dur = _parse_duration(duration, line)
    if not user_id.strip():
        raise EmptyUserId("user_id is empty", line)
    return AccessRecord(user_id.strip(), when, dur)


def _decode(data: "bytes | str | IO") -> str:
    if hasattr(data, "read"):
        data = data.read()
    if isinstance(data, bytes):
        return data.decode("utf-8-sig")
    return data


def parse_records(data: "bytes | str | IO", format: str = "csv") -> ParseResult:
    """Parse CSV or JSONL access logs.

    Bad rows are collected in ``rejected`` with their line numbers; they never
    abort the parse. The CSV header line is optional.
    """
    text = _decode(data)
    fmt = format.lower()
    if fmt not in ("csv", "jsonl"):
        raise ValueError(f"unsupported format {format!r}")
    records: list[AccessRecord] = []
    rejected: list[IngestError] = []
    seen_content = False
    for lineno, raw in enumerate(text.split("\n"), start=1):
        raw = raw.rstrip("\r")
        if not raw.strip():
            continue
        first = not seen_content
        seen_content = True
        try:
            if fmt == "csv":
                fields = next(csv.reader([raw]))
                if first and tuple(f.strip() for f in fields) == CSV_HEADER:
                    continue
                if len(fields) != 3:
                    raise MalformedRow(f"expected 3 fields, got {len(fields)}", lineno)
                records.append(_build(fields[0], fields[1], fields[2], lineno))
            else:
                try:
                    obj = json.loads(raw)
                except json.JSONDecodeError as exc:
                    raise MalformedRow(f"invalid JSON: {exc.msg}", lineno) from None
                if not isinstance(obj, dict):
                    raise MalformedRow("expected a JSON object", lineno)
                missing = [k for k in CSV_HEADER if k not in obj]
                if missing:
                    raise MalformedRow(f"missing keys {missing}", lineno)
                records.append(_build(obj["user_id"], obj["date"], obj["duration_min"], lineno))
        except IngestError as err:
            rejected.append(err)
    return ParseResult(records, rejected)


def aggregate(records: Iterable[AccessRecord], granularity: "Granularity | str",
              range: "tuple[date, date] | None" = None) -> dict[str, UserSeries]:
    """Sum durations per user and period, zero-filling empty periods.

    All users share one origin and one period count so their series line up.
    Records falling outside an explicit ``range`` are ignored.
    """
    g = Granularity.parse(granularity)
    records = list(records)
    if range is None:
        if not records:
            raise EmptyInput("no records and no range given")
        start = min(r.date for r in records)
        end = max(r.date for r in records)
    else:
        start, end = range
        if end < start:
            raise ValueError("range end precedes range start")
    origin = period_floor(start, g)
    n = period_index(end, origin, g) + 1

    buckets: dict[str, list[list[float]]] = defaultdict(lambda: [[] for _ in builtins.range(n)])
    for rec in records:
        idx = period_index(rec.date, origin, g)
        if 0 <= idx < n:
            buckets[rec.user_id][idx].append(rec.duration)

    times = tuple(float(i) for i in builtins.range(n))
    return {
        uid: UserSeries(uid, g, origin, times, tuple(math.fsum(p) for p in buckets[uid]))
        for uid in sorted(buckets)
    }

"""Reproducible synthetic access logs, including a single ramping leaker.

Every normal user keeps a fixed baseline drawn from [0.3, 0.8) * normal_cap plus
bounded uniform noise, so all normal period totals stay inside (0, normal_cap).
The leaker adds ``leak_slope`` minutes per period from the leak period onward,
counting the leak period itself as the first ramp step.
"""

from __future__ import annotations

import csv
import hashlib
import io
import math
from dataclasses import dataclass
from datetime import date
from typing import Optional

from .errors import InvalidConfig
from .ingest import CSV_HEADER, AccessRecord, Granularity, period_end, period_floor, period_index, period_start

MASK64 = (1 << 64) - 1
MAX_NOISE_FRACTION = 0.2


class SplitMix64:
    def __init__(self, seed: int):
        self.state = seed & MASK64

    def next_u64(self) -> int:
        self.state = (self.state + 0x9E3779B97F4A7C15) & MASK64
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
        return z ^ (z >> 31)

    def random(self) -> float:
        """Uniform double in [0, 1) from the top 53 bits."""
        return (self.next_u64() >> 11) * (1.0 / (1 << 53))

    def uniform(self, a: float, b: float) -> float:
        return a + (b - a) * self.random()


def user_hash(user_id: str) -> int:
    return int.from_bytes(hashlib.blake2b(user_id.encode("utf-8"), digest_size=8).digest(), "little")


@dataclass(frozen=True)
class ScenarioConfig:
    n_users: int = 10
    start: date = date(2014, 1, 1)
    end: date = date(2018, 12, 31)
    granularity: Granularity = Granularity.ANNUAL
    normal_cap: float = 80.0
    leaker_id: Optional[str] = None
    leak_start: Optional[date] = None
    leak_slope: float = 15.0
    noise_scale: float = 0.0
    seed: int = 2019

    def validate(self) -> None:
        if int(self.n_users) != self.n_users or self.n_users < 1:
            raise InvalidConfig("n_users must be an integer >= 1")
        if self.end < self.start:
            raise InvalidConfig("end precedes start")
        if not self.normal_cap > 0:
            raise InvalidConfig("normal_cap must be > 0")
        if not 0 <= self.noise_scale < MAX_NOISE_FRACTION * self.normal_cap:
            raise InvalidConfig(f"noise_scale must lie in [0, {MAX_NOISE_FRACTION} * normal_cap)")
        if self.leaker_id is not None:
            if not self.leaker_id.strip():
                raise InvalidConfig("leaker_id is empty")
            if self.leak_start is None:
                raise InvalidConfig("a leaker needs leak_start")
            if self.leak_start < self.start:
                raise InvalidConfig("leak_start precedes the scenario start")
            if not self.leak_slope > 0:
                raise InvalidConfig("leak_slope must be > 0")
        try:
            Granularity.parse(self.granularity)
        except ValueError as exc:
            raise InvalidConfig(str(exc)) from None


def user_ids(cfg: ScenarioConfig) -> list[str]:
    width = max(2, len(str(cfg.n_users)))
    ids = [f"user{i:0{width}d}" for i in range(1, cfg.n_users + 1)]
    if cfg.leaker_id is not None and cfg.leaker_id not in ids:
        ids[-1] = cfg.leaker_id
    return sorted(ids)


def _floor2(x: float) -> float:
    return math.floor(x * 100.0) / 100.0


def generate(cfg: ScenarioConfig) -> list[AccessRecord]:
    """One record per user and period, ordered by period then user id."""
    cfg.validate()
    g = Granularity.parse(cfg.granularity)
    origin = period_floor(cfg.start, g)
    n_periods = period_index(cfg.end, origin, g) + 1
    leak_idx = period_index(cfg.leak_start, origin, g) if cfg.leaker_id is not None else None

    per_user: dict[str, list[AccessRecord]] = {}
    for uid in user_ids(cfg):
        rng = SplitMix64(cfg.seed ^ user_hash(uid))
        baseline = cfg.normal_cap * rng.uniform(0.3, 0.8)
        rows = []
        for p in range(n_periods):
            noise = cfg.noise_scale * rng.uniform(-1.0, 1.0)
            first = period_start(origin, g, p)
            span = (period_end(origin, g, p) - first).days + 1
            day = first.toordinal() + int(rng.random() * span)
            total = baseline + noise
            if uid == cfg.leaker_id and p >= leak_idx:
                total += cfg.leak_slope * (p - leak_idx + 1)
            rows.append(AccessRecord(uid, date.fromordinal(day), _floor2(max(0.0, total))))
        per_user[uid] = rows
    return [per_user[uid][p] for p in range(n_periods) for uid in sorted(per_user)]


def to_csv(records: list[AccessRecord]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for r in records:
        writer.writerow([r.user_id, r.date.isoformat(), repr(r.duration)])
    return buf.getvalue()

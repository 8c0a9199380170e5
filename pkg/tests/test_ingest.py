import math
from datetime import date

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dlpforecast.errors import EmptyInput, EmptyUserId, MalformedRow, NegativeDuration
from dlpforecast.ingest import (AccessRecord, Granularity, UserSeries, aggregate, parse_records,
                                period_floor, period_index, period_start)


def rec(user, day, dur):
    return AccessRecord(user, date.fromisoformat(day), dur)


class TestParse:
    def test_single_row(self):
        res = parse_records(b"alice,2014-03-01,12.5\n", "csv")
        assert res.records == [rec("alice", "2014-03-01", 12.5)]
        assert res.rejected == []

    def test_empty(self):
        assert parse_records(b"", "csv") == ([], [])

    def test_invalid_calendar_date(self):
        res = parse_records(b"bob,2014-13-40,5\n", "csv")
        assert res.records == []
        assert len(res.rejected) == 1
        assert isinstance(res.rejected[0], MalformedRow)
        assert res.rejected[0].line == 1

    def test_header_and_crlf(self):
        data = b"user_id,date,duration_min\r\nalice,2014-03-01,1\r\nbob,2014-03-02,2.25\r\n"
        res = parse_records(data, "csv")
        assert [r.user_id for r in res.records] == ["alice", "bob"]
        assert res.records[1].duration == 2.25

    @pytest.mark.parametrize("line,exc", [
        ("alice,2014-03-01", MalformedRow),
        ("alice,2014-03-01,1,2", MalformedRow),
        ("alice,2014-02-30,1", MalformedRow),
        ("alice,01/03/2014,1", MalformedRow),
        ("alice,2014-03-01,ten", MalformedRow),
        ("alice,2014-03-01,nan", MalformedRow),
        ("alice,2014-03-01,-1", NegativeDuration),
        ("   ,2014-03-01,1", EmptyUserId),
    ])
    def test_bad_rows_are_reported_with_line_numbers(self, line, exc):
        data = f"ok,2014-01-01,1\n{line}\nok,2014-01-02,2\n".encode()
        res = parse_records(data, "csv")
        assert [r.duration for r in res.records] == [1.0, 2.0]
        assert len(res.rejected) == 1
        assert type(res.rejected[0]) is exc
        assert res.rejected[0].line == 2

    def test_user_id_trimmed(self):
        assert parse_records(b"  carol ,2014-03-01,3\n").records[0].user_id == "carol"

    def test_jsonl(self):
        data = (b'{"user_id": "alice", "date": "2014-03-01", "duration_min": 12.5}\n'
                b'not json\n'
                b'{"user_id": "bob", "date": "2014-03-01"}\n'
                b'{"user_id": "bob", "date": "2014-03-01", "duration_min": -2}\n')
        res = parse_records(data, "jsonl")
        assert res.records == [rec("alice", "2014-03-01", 12.5)]
        assert [(type(e), e.line) for e in res.rejected] == [
            (MalformedRow, 2), (MalformedRow, 3), (NegativeDuration, 4)]

    def test_undecodable_input_raises(self):
        with pytest.raises(UnicodeDecodeError):
            parse_records(b"\xff\xfe,2014-01-01,1\n")


class TestRecord:
    def test_invariants(self):
        with pytest.raises(NegativeDuration):
            AccessRecord("a", date(2014, 1, 1), -0.5)
        with pytest.raises(EmptyUserId):
            AccessRecord(" ", date(2014, 1, 1), 1)


class TestPeriods:
    @pytest.mark.parametrize("g,day,start", [
        (Granularity.DAILY, "2014-07-19", "2014-07-19"),
        (Granularity.MONTHLY, "2014-07-19", "2014-07-01"),
        (Granularity.HALF_YEARLY, "2014-06-30", "2014-01-01"),
        (Granularity.HALF_YEARLY, "2014-07-01", "2014-07-01"),
        (Granularity.ANNUAL, "2014-12-31", "2014-01-01"),
    ])
    def test_floor(self, g, day, start):
        assert period_floor(date.fromisoformat(day), g) == date.fromisoformat(start)

    def test_index_roundtrip(self):
        origin = date(2014, 1, 1)
        for g in Granularity:
            for i in range(0, 30):
                assert period_index(period_start(origin, g, i), origin, g) == i

    def test_parse_aliases(self):
        assert Granularity.parse("half-yearly") is Granularity.HALF_YEARLY
        assert Granularity.parse("annual") is Granularity.ANNUAL
        with pytest.raises(ValueError):
            Granularity.parse("weekly")


class TestAggregate:
    def test_sum_within_one_period(self):
        out = aggregate([rec("alice", "2014-02-01", 10), rec("alice", "2014-09-15", 20)],
                        Granularity.ANNUAL, (date(2014, 1, 1), date(2014, 12, 31)))
        assert out["alice"].values == (30.0,)

    def test_gap_fill(self):
        out = aggregate([rec("alice", "2014-02-01", 10)], Granularity.ANNUAL,
                        (date(2014, 1, 1), date(2016, 12, 31)))
        assert out["alice"].values == (10.0, 0.0, 0.0)
        assert out["alice"].times == (0.0, 1.0, 2.0)

    def test_five_year_window(self):
        recs = [rec("u", f"{y}-05-05", 1) for y in range(2014, 2019)]
        out = aggregate(recs, Granularity.ANNUAL)
        assert len(out["u"]) == 5
        assert out["u"].origin == date(2014, 1, 1)

    def test_half_yearly_boundaries(self):
        recs = [rec("u", "2014-06-30", 1), rec("u", "2014-07-01", 2), rec("u", "2015-01-01", 4)]
        assert aggregate(recs, "HALF_YEARLY")["u"].values == (1.0, 2.0, 4.0)

    def test_duplicates_are_summed(self):
        recs = [rec("u", "2014-01-01", 1.5), rec("u", "2014-01-01", 1.5)]
        assert aggregate(recs, "DAILY")["u"].values == (3.0,)

    def test_users_share_the_window(self):
        recs = [rec("a", "2014-03-01", 1), rec("b", "2016-03-01", 2)]
        out = aggregate(recs, "ANNUAL")
        assert out["a"].values == (1.0, 0.0, 0.0)
        assert out["b"].values == (0.0, 0.0, 2.0)

    def test_records_outside_range_ignored(self):
        recs = [rec("a", "2013-03-01", 5), rec("a", "2014-03-01", 1)]
        out = aggregate(recs, "ANNUAL", (date(2014, 1, 1), date(2014, 12, 31)))
        assert out["a"].values == (1.0,)

    def test_empty_input(self):
        with pytest.raises(EmptyInput):
            aggregate([], Granularity.ANNUAL)
        assert aggregate([], "ANNUAL", (date(2014, 1, 1), date(2015, 1, 1))) == {}

    def test_idempotent_on_period_starts(self):
        values = [3.0, 0.0, 7.25, 1.0]
        recs = [rec("u", period_start(date(2014, 1, 1), Granularity.MONTHLY, i).isoformat(), v)
                for i, v in enumerate(values)]
        series = aggregate(recs, Granularity.MONTHLY)["u"]
        again = aggregate([rec("u", series.label(i).isoformat(), v) for i, v in enumerate(series.values)],
                          Granularity.MONTHLY)["u"]
        assert again.values == tuple(values)


records_strategy = st.lists(
    st.tuples(st.sampled_from(["a", "b", "c"]),
              st.dates(min_value=date(2014, 1, 1), max_value=date(2018, 12, 31)),
              st.floats(min_value=0, max_value=1e4, allow_nan=False)),
    min_size=1, max_size=60)


@settings(max_examples=100, deadline=None)
@given(records_strategy, st.sampled_from(list(Granularity)))
def test_conservation_and_gap_fill(rows, g):
    recs = [AccessRecord(u, d, v) for u, d, v in rows]
    out = aggregate(recs, g)
    lo, hi = min(r.date for r in recs), max(r.date for r in recs)
    expected_len = period_index(hi, period_floor(lo, g), g) + 1
    for uid, series in out.items():
        assert len(series) == expected_len
        total = math.fsum(r.duration for r in recs if r.user_id == uid)
        assert math.isclose(math.fsum(series.values), total, rel_tol=1e-9, abs_tol=1e-12)


def test_user_series_validation():
    with pytest.raises(ValueError):
        UserSeries("u", Granularity.ANNUAL, date(2014, 1, 1), (0.0, 2.0), (1.0, 1.0))
    with pytest.raises(ValueError):
        UserSeries("u", Granularity.ANNUAL, date(2014, 1, 1), (0.0,), (-1.0,))

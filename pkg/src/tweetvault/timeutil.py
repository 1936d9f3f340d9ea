"""Epoch-millisecond helpers shared by storage, search and analytics."""

from __future__ import annotations

from datetime import date, datetime, timezone

UTC = timezone.utc

MS_PER_DAY = 86_400_000
MS_PER_WEEK = 7 * MS_PER_DAY

BUCKET_GRANULARITIES = ("day", "week", "month")


def ms(year: int, month: int = 1, day: int = 1, hour: int = 0,
       minute: int = 0, second: int = 0, millis: int = 0) -> int:
    dt = datetime(year, month, day, hour, minute, second, tzinfo=UTC)
    return int(dt.timestamp()) * 1000 + millis


def to_datetime(t: int) -> datetime:
    sec, rem = divmod(t, 1000)
    return datetime.fromtimestamp(sec, tz=UTC).replace(microsecond=rem * 1000)


def iso_ms(t: int) -> str:
    dt = to_datetime(t)
    return dt.strftime("%Y-%m-%dT%H:%M:%S") + f".{t % 1000:03d}Z"


def parse_time_ms(text: str, *, end_of_day: bool = False) -> int:
    """Parse an integer epoch-ms or an ISO-8601 date/datetime (UTC default).

    With end_of_day, a bare date means its last millisecond, so inclusive
    `to:` bounds behave naturally.
    """
    text = text.strip()
    if text.lstrip("-").isdigit():
        return int(text)
    iso = text.replace("Z", "+00:00")
    try:
        if len(iso) == 10:
            d = date.fromisoformat(iso)
            base = ms(d.year, d.month, d.day)
            return base + MS_PER_DAY - 1 if end_of_day else base
        dt = datetime.fromisoformat(iso)
    except ValueError:
        raise ValueError(f"cannot parse time {text!r}") from None
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=UTC)
    return int(dt.timestamp() * 1000)


def bucket_start(t: int, granularity: str) -> int:
    """Start of the day / ISO week / calendar month containing `t`."""
    if granularity == "day":
        return t - t % MS_PER_DAY
    if granularity == "week":
        day = t - t % MS_PER_DAY
        weekday = to_datetime(day).weekday()
        return day - weekday * MS_PER_DAY
    if granularity == "month":
        dt = to_datetime(t)
        return ms(dt.year, dt.month, 1)
    raise ValueError(f"unknown bucket granularity {granularity!r}")


def next_bucket(start: int, granularity: str) -> int:
    if granularity == "day":
        return start + MS_PER_DAY
    if granularity == "week":
        return start + MS_PER_WEEK
    if granularity == "month":
        dt = to_datetime(start)
        year, month = (dt.year + 1, 1) if dt.month == 12 else (dt.year, dt.month + 1)
        return ms(year, month, 1)
    raise ValueError(f"unknown bucket granularity {granularity!r}")


def bucket_boundaries(t0: int, t1: int, granularity: str) -> list[int]:
    """Ascending bucket starts covering [t0, t1], plus one end sentinel."""
    if t0 > t1:
        raise ValueError("t0 > t1")
    out = [bucket_start(t0, granularity)]
    while out[-1] <= t1:
        out.append(next_bucket(out[-1], granularity))
    return out

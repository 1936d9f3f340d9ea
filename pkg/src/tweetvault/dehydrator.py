"""Reduction of full tweet records to the 8-field archival schema.

The kept fields are created_at, id_str, the two reply ids, lang, text,
a derived epoch-millisecond timestamp, and user_id_str; everything else
(entities, user profile, counters) is dropped. created_at text is
preserved verbatim; the timestamp is its exact UTC parse.
"""

from __future__ import annotations

import gzip
import json
from dataclasses import dataclass
from datetime import datetime, timedelta, timezone
from pathlib import Path
from typing import Any, Iterable, Iterator, Mapping, Optional

FIELD_ORDER = (
    "created_at",
    "id_str",
    "in_reply_to_status_id_str",
    "in_reply_to_user_id_str",
    "lang",
    "text",
    "timestamp",
    "user_id_str",
)

_MONTHS = {
    "Jan": 1, "Feb": 2, "Mar": 3, "Apr": 4, "May": 5, "Jun": 6,
    "Jul": 7, "Aug": 8, "Sep": 9, "Oct": 10, "Nov": 11, "Dec": 12,
}
_MONTH_NAMES = {v: k for k, v in _MONTHS.items()}
_DAY_NAMES = ("Mon", "Tue", "Wed", "Thu", "Fri", "Sat", "Sun")


class CreatedAtParseError(ValueError):
    """Raised for datetime text not in `EEE MMM dd HH:mm:ss +ZZZZ yyyy` form."""

    def __init__(self, text: str, reason: str = "malformed"):
        super().__init__(f"cannot parse created_at {text!r}: {reason}")
        self.text = text


class RecordError(ValueError):
    """A source record missing or corrupting a mandatory field."""

    def __init__(self, field: str, detail: str = ""):
        super().__init__(f"bad record: field {field!r} {detail}".rstrip())
        self.field = field


def parse_created_at(text: str) -> int:
    """Parse classic tweet datetime text to UTC epoch milliseconds.

    Accepts any numeric offset (normalized to UTC); day-of-week is
    validated as a name but trusted, not cross-checked against the date.
    """
    parts = text.split(" ")
    if len(parts) != 6:
        raise CreatedAtParseError(text, "expected 6 space-separated fields")
    dow, mon, day_s, clock, offset_s, year_s = parts
    if dow not in _DAY_NAMES:
        raise CreatedAtParseError(text, f"unknown weekday {dow!r}")
    month = _MONTHS.get(mon)
    if month is None:
        raise CreatedAtParseError(text, f"unknown month {mon!r}")
    hms = clock.split(":")
    if len(hms) != 3:
        raise CreatedAtParseError(text, "bad time-of-day")
    if (
        len(offset_s) != 5
        or offset_s[0] not in "+-"
        or not offset_s[1:].isdigit()
    ):
        raise CreatedAtParseError(text, f"bad offset {offset_s!r}")
    try:
        day, year = int(day_s), int(year_s)
        hour, minute, second = (int(p) for p in hms)
        off_minutes = int(offset_s[1:3]) * 60 + int(offset_s[3:5])
        if offset_s[0] == "-":
            off_minutes = -off_minutes
        tz = timezone(timedelta(minutes=off_minutes))
        dt = datetime(year, month, day, hour, minute, second, tzinfo=tz)
    except ValueError as e:
        raise CreatedAtParseError(text, str(e)) from None
    return int(dt.timestamp()) * 1000


def format_created_at(ms: int) -> str:
    """Render epoch milliseconds in the classic format, always UTC."""
    dt = datetime.fromtimestamp(ms // 1000, tz=timezone.utc)
    return (
        f"{_DAY_NAMES[dt.weekday()]} {_MONTH_NAMES[dt.month]} {dt.day:02d} "
        f"{dt.hour:02d}:{dt.minute:02d}:{dt.second:02d} +0000 {dt.year}"
    )


@dataclass(frozen=True)
class DehydratedTweet:
    created_at: str
    id_str: str
    in_reply_to_status_id_str: Optional[str]
    in_reply_to_user_id_str: Optional[str]
    lang: str
    text: str
    timestamp: int
    user_id_str: str

    def to_json_line(self) -> str:
        # fixed key order for byte-stable files; reply fields stay as nulls
        return json.dumps(
            {name: getattr(self, name) for name in FIELD_ORDER},
            ensure_ascii=False,
            separators=(",", ":"),
        )

    @classmethod
    def from_json_line(cls, line: str) -> "DehydratedTweet":
        obj = json.loads(line)
        return cls(**{name: obj.get(name) for name in FIELD_ORDER})


def _as_id_str(value: Any) -> Optional[str]:
    if value is None:
        return None
    if isinstance(value, str):
        return value if value.isdigit() else None
    if isinstance(value, int):
        return str(value)
    return None


def dehydrate(source: Mapping[str, Any]) -> DehydratedTweet:
    """Project a hydrated tweet record onto the 8-field schema.

    Raises RecordError when id, created_at, text or the user id is
    missing; partial reply information is dropped to keep the
    both-or-neither reply invariant.
    """
    id_str = _as_id_str(source.get("id_str")) or _as_id_str(source.get("id"))
    if id_str is None:
        raise RecordError("id")
    created_at = source.get("created_at")
    if not isinstance(created_at, str):
        raise RecordError("created_at", "missing")
    try:
        timestamp = parse_created_at(created_at)
    except CreatedAtParseError as e:
        raise RecordError("created_at", str(e)) from None
    text = source.get("text")
    if not isinstance(text, str):
        raise RecordError("text")
    user = source.get("user")
    user_id = None
    if isinstance(user, Mapping):
        user_id = _as_id_str(user.get("id_str")) or _as_id_str(user.get("id"))
    if user_id is None:
        raise RecordError("user.id")
    lang = source.get("lang")
    if not isinstance(lang, str) or not lang:
        lang = "und"
    reply_status = _as_id_str(source.get("in_reply_to_status_id_str")) or _as_id_str(
        source.get("in_reply_to_status_id")
    )
    reply_user = _as_id_str(source.get("in_reply_to_user_id_str")) or _as_id_str(
        source.get("in_reply_to_user_id")
    )
    if reply_status is None or reply_user is None:
        reply_status = reply_user = None
    return DehydratedTweet(
        created_at=created_at,
        id_str=id_str,
        in_reply_to_status_id_str=reply_status,
        in_reply_to_user_id_str=reply_user,
        lang=lang,
        text=text,
        timestamp=timestamp,
        user_id_str=user_id,
    )


def dehydrate_stream(
    records: Iterable[Mapping[str, Any]], rejects: Optional[list] = None
) -> Iterator[DehydratedTweet]:
    """Dehydrate a record stream, counting rejects instead of failing."""
    for rec in records:
        try:
            yield dehydrate(rec)
        except RecordError as e:
            if rejects is not None:
                rejects.append(e)


def dehydrate_dir(in_dir: Path, out_dir: Path) -> tuple[int, int]:
    """Convert every *.ndjson.gz of hydrated records; returns (kept, rejected)."""
    in_dir, out_dir = Path(in_dir), Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    kept = rejected = 0
    for src in sorted(in_dir.glob("*.ndjson.gz")):
        dst = out_dir / src.name
        with gzip.open(src, "rt", encoding="utf-8") as fin:
            lines = []
            for line in fin:
                line = line.strip()
                if not line:
                    continue
                try:
                    rec = dehydrate(json.loads(line))
                except (RecordError, json.JSONDecodeError):
                    rejected += 1
                    continue
                lines.append(rec.to_json_line())
                kept += 1
        payload = ("\n".join(lines) + "\n" if lines else "").encode("utf-8")
        with open(dst, "wb") as fout:
            fout.write(gzip.compress(payload, 6, mtime=0))
    return kept, rejected

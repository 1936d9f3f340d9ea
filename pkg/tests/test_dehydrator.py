import gzip
import json
from datetime import datetime, timezone

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tweetvault.dehydrator import (
    FIELD_ORDER,
    CreatedAtParseError,
    DehydratedTweet,
    RecordError,
    dehydrate,
    dehydrate_dir,
    format_created_at,
    parse_created_at,
)
from tweetvault.mockhose import CorpusSpec, domain_ids, gen_tweet


def strptime_oracle(text: str) -> int:
    """Independent parse via the C library's strptime."""
    dt = datetime.strptime(text, "%a %b %d %H:%M:%S %z %Y")
    return int(dt.timestamp() * 1000)


def test_parse_examples():
    assert parse_created_at("Wed Aug 27 13:08:45 +0000 2008") == 1_219_842_525_000
    assert parse_created_at("Thu Jan 01 00:00:00 +0000 1970") == 0
    # positive offsets are ahead of UTC
    assert parse_created_at("Wed Aug 27 13:08:45 +0100 2008") == 1_219_838_925_000


def test_parse_matches_strptime_oracle_on_examples():
    for text in (
        "Wed Aug 27 13:08:45 +0000 2008",
        "Tue Mar 21 20:50:14 +0000 2006",
        "Fri Jul 31 23:59:59 +0000 2009",
        "Sun Feb 29 12:00:00 -0830 2004",
    ):
        assert parse_created_at(text) == strptime_oracle(text)


@given(
    st.integers(1_136_073_600, 1_262_303_999),  # 2006-01-01 .. 2009-12-31 in s
    st.integers(-14 * 60, 14 * 60),
)
@settings(max_examples=200)
def test_format_parse_roundtrip_with_offsets(epoch_s, offset_minutes):
    text = format_created_at(epoch_s * 1000)
    assert parse_created_at(text) == epoch_s * 1000
    # re-render the same instant under a non-UTC offset and re-parse
    shifted = datetime.fromtimestamp(epoch_s, tz=timezone.utc)
    sign = "+" if offset_minutes >= 0 else "-"
    off = abs(offset_minutes)
    local = shifted.timestamp() + offset_minutes * 60
    local_dt = datetime.fromtimestamp(local, tz=timezone.utc)
    months = ("Jan", "Feb", "Mar", "Apr", "May", "Jun",
              "Jul", "Aug", "Sep", "Oct", "Nov", "Dec")
    days = ("Mon", "Tue", "Wed", "Thu", "Fri", "Sat", "Sun")
    text2 = (
        f"{days[local_dt.weekday()]} {months[local_dt.month - 1]} "
        f"{local_dt.day:02d} {local_dt.hour:02d}:{local_dt.minute:02d}:"
        f"{local_dt.second:02d} {sign}{off // 60:02d}{off % 60:02d} {local_dt.year}"
    )
    assert parse_created_at(text2) == epoch_s * 1000 == strptime_oracle(text2)


def test_parse_rejects_malformed():
    for bad in (
        "",
        "Wed Aug 27 13:08:45 2008",
        "Xxx Aug 27 13:08:45 +0000 2008",
        "Wed Foo 27 13:08:45 +0000 2008",
        "Wed Aug 32 13:08:45 +0000 2008",
        "Wed Aug 27 25:08:45 +0000 2008",
        "Wed Aug 27 13:08:45 UTC 2008",
        "Wed Aug 27 13:08 +0000 2008",
    ):
        with pytest.raises(CreatedAtParseError) as exc:
            parse_created_at(bad)
        assert exc.value.text == bad


def _hydrated(**overrides):
    base = {
        "created_at": "Wed Aug 27 13:08:45 +0000 2008",
        "id": 900000001,
        "id_str": "900000001",
        "text": "eating a sandwich",
        "user": {"id": 77, "id_str": "77", "screen_name": "alice", "followers_count": 5},
        "lang": "en",
        "entities": {"urls": [{"url": "http://tinyurl.com/x"}]},
        "source": "web",
        "favorited": False,
    }
    base.update(overrides)
    return base


def test_dehydrate_keeps_exactly_eight_fields():
    rec = dehydrate(_hydrated())
    obj = json.loads(rec.to_json_line())
    assert tuple(obj.keys()) == FIELD_ORDER
    assert obj["id_str"] == "900000001"
    assert obj["timestamp"] == 1_219_842_525_000
    assert obj["user_id_str"] == "77"
    assert "entities" not in obj and "source" not in obj


def test_dehydrate_is_pure_projection_and_idempotent():
    rec = dehydrate(_hydrated())
    again = dehydrate(
        {
            "created_at": rec.created_at,
            "id_str": rec.id_str,
            "text": rec.text,
            "lang": rec.lang,
            "user": {"id_str": rec.user_id_str},
        }
    )
    assert again == rec


def test_dehydrate_reply_fields_carried_together():
    rec = dehydrate(
        _hydrated(in_reply_to_status_id=123, in_reply_to_user_id=456)
    )
    assert rec.in_reply_to_status_id_str == "123"
    assert rec.in_reply_to_user_id_str == "456"
    # partial reply info is dropped entirely
    partial = dehydrate(_hydrated(in_reply_to_status_id=123))
    assert partial.in_reply_to_status_id_str is None
    assert partial.in_reply_to_user_id_str is None


def test_dehydrate_lang_fallback():
    rec = dehydrate(_hydrated(lang=None))
    assert rec.lang == "und"


def test_dehydrate_rejects_missing_mandatory():
    for key in ("created_at", "text"):
        src = _hydrated()
        del src[key]
        with pytest.raises(RecordError):
            dehydrate(src)
    src = _hydrated()
    del src["id"], src["id_str"]
    with pytest.raises(RecordError):
        dehydrate(src)
    with pytest.raises(RecordError):
        dehydrate(_hydrated(user={}))
    with pytest.raises(RecordError):
        dehydrate(_hydrated(created_at="yesterday-ish"))


def test_timestamp_always_partitionable():
    from tweetvault.store import partition_key

    spec = CorpusSpec(seed=5)
    for i in domain_ids(spec, 500):
        tweet = gen_tweet(i, spec)
        if tweet is None:
            continue
        rec = dehydrate(tweet)
        assert rec.timestamp == parse_created_at(rec.created_at)
        assert partition_key(rec.timestamp).label != "quarantine"


def test_size_reduction_on_synthetic_corpus():
    spec = CorpusSpec(seed=6)
    hydrated_bytes = dehydrated_bytes = 0
    n = 0
    for i in domain_ids(spec, 2000):
        tweet = gen_tweet(i, spec)
        if tweet is None:
            continue
        line = json.dumps(tweet, ensure_ascii=False, separators=(",", ":"))
        hydrated_bytes += len(line.encode("utf-8"))
        dehydrated_bytes += len(dehydrate(tweet).to_json_line().encode("utf-8"))
        n += 1
    assert n > 1000
    assert dehydrated_bytes < 0.4 * hydrated_bytes


def test_dehydrate_dir_roundtrip(tmp_path):
    spec = CorpusSpec(seed=8)
    raw = tmp_path / "raw"
    raw.mkdir()
    records = [gen_tweet(i, spec) for i in domain_ids(spec, 300)]
    records = [r for r in records if r is not None]
    records.append({"text": "broken"})  # missing everything else
    payload = "\n".join(
        json.dumps(r, ensure_ascii=False, separators=(",", ":")) for r in records
    ) + "\n"
    (raw / "part-000.ndjson.gz").write_bytes(gzip.compress(payload.encode(), 6, mtime=0))

    out = tmp_path / "dehydrated"
    kept, rejected = dehydrate_dir(raw, out)
    assert rejected == 1
    assert kept == len(records) - 1
    with gzip.open(out / "part-000.ndjson.gz", "rt", encoding="utf-8") as fh:
        lines = [DehydratedTweet.from_json_line(l) for l in fh if l.strip()]
    assert len(lines) == kept
    assert lines[0].id_str == records[0]["id_str"]

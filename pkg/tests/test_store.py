import gzip
from datetime import date

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import build_archive, make_record
from tweetvault.store import (
    DEFAULT_BOUNDS,
    Archive,
    PartitionKey,
    SegmentError,
    all_partitions,
    ingest_dir,
    partition_key,
    partitions_for_range,
)
from tweetvault.timeutil import ms


def test_partition_key_examples():
    assert partition_key(ms(2006, 7, 15, 12)).label == "2006"
    assert partition_key(ms(2008, 11, 4)).label == "2008-11"
    # Feb 9-15 2009 is ISO week 7
    assert partition_key(ms(2009, 2, 10)).label == "2009-W07"


def test_partition_key_boundaries():
    assert partition_key(ms(2006, 3, 1)).label == "2006"
    assert partition_key(ms(2006, 3, 1) - 1).label == "quarantine"
    assert partition_key(ms(2009, 8, 1) - 1).label == "2009-W31"
    assert partition_key(ms(2009, 8, 1)).label == "quarantine"
    assert partition_key(ms(2007, 1, 1)).label == "2007-01"
    assert partition_key(ms(2007, 1, 1) - 1).label == "2006"
    # Jan 1 2009 falls in ISO week 1 of 2009 (it is a Thursday)
    assert partition_key(ms(2009, 1, 1)).label == "2009-W01"


@given(st.integers(DEFAULT_BOUNDS[0], DEFAULT_BOUNDS[1]))
@settings(max_examples=500)
def test_partition_totality_and_span(ts):
    key = partition_key(ts)
    assert key.label != "quarantine"
    assert key.start_ms <= ts < key.end_ms
    # exactly one partition claims this timestamp
    claiming = [k for k in all_partitions() if k.start_ms <= ts < k.end_ms]
    assert claiming == [key]


@given(
    st.integers(DEFAULT_BOUNDS[0], DEFAULT_BOUNDS[1]),
    st.integers(DEFAULT_BOUNDS[0], DEFAULT_BOUNDS[1]),
)
@settings(max_examples=200)
def test_partition_key_order_matches_time_order(a, b):
    ka, kb = partition_key(a), partition_key(b)
    if a <= b:
        assert ka <= kb
    else:
        assert kb <= ka


def test_partition_key_label_roundtrip():
    for key in all_partitions():
        assert PartitionKey.from_label(key.label) == key


def test_all_partitions_count():
    keys = all_partitions()
    # one 2006 partition, 24 months, 31 ISO weeks of 2009 inside the bounds
    assert len(keys) == 1 + 24 + 31
    assert keys == sorted(keys)
    last_2009 = date(2009, 7, 31).isocalendar()
    assert keys[-1].label == f"2009-W{last_2009[1]:02d}"


def test_partitions_for_range_examples():
    # Jan 5 2009 is the Monday of ISO week 2; Jan 25 is the Sunday ending week 4
    keys = partitions_for_range(ms(2009, 1, 5), ms(2009, 1, 25, 23, 59, 59, 999))
    assert [k.label for k in keys] == ["2009-W02", "2009-W03", "2009-W04"]

    keys = partitions_for_range(ms(2008, 6, 1), ms(2008, 6, 30, 23, 59, 59, 999))
    assert [k.label for k in keys] == ["2008-06"]

    assert partitions_for_range(*DEFAULT_BOUNDS) == all_partitions()

    with pytest.raises(ValueError):
        partitions_for_range(10, 5)


def test_partitions_for_range_is_exactly_the_intersecting_set():
    t0, t1 = ms(2006, 12, 30), ms(2007, 2, 2)
    keys = partitions_for_range(t0, t1)
    assert [k.label for k in keys] == ["2006", "2007-01", "2007-02"]
    for k in all_partitions():
        intersects = k.start_ms <= t1 and k.end_ms > t0
        assert (k in keys) == intersects


def test_append_flush_scan_roundtrip(tmp_path):
    records = [
        make_record(ms(2006, 5, 1), 100, "hello world"),
        make_record(ms(2008, 11, 4), 900000000, "election day"),
        make_record(ms(2009, 2, 10), 2400000000, "week seven"),
        make_record(ms(2009, 2, 11), 2400000001, "week seven again"),
    ]
    archive = build_archive(records, tmp_path / "a")
    assert [k.label for k in archive.partitions()] == ["2006", "2008-11", "2009-W07"]
    got = list(archive.scan())
    assert got == sorted(records, key=lambda r: (r.timestamp, int(r.id_str)))
    assert [r.text for r in archive.scan("2009-W07")] == ["week seven", "week seven again"]
    assert archive.record_count() == 4


def test_scan_is_deterministic_and_merges_segments(tmp_path):
    archive = Archive(tmp_path / "a")
    # two flushes produce two segments in one partition, out of time order
    archive.append(make_record(ms(2008, 3, 10), 5, "later"))
    archive.flush()
    archive.append(make_record(ms(2008, 3, 5), 3, "earlier"))
    archive.flush()
    segs = archive.segments("2008-03")
    assert [s.seq for s in segs] == [0, 1]
    texts = [r.text for r in archive.scan("2008-03")]
    assert texts == ["earlier", "later"]
    assert texts == [r.text for r in archive.scan("2008-03")]


def test_append_after_flush_bumps_seq(tmp_path):
    archive = Archive(tmp_path / "a")
    archive.append(make_record(ms(2008, 3, 10), 5, "one"))
    archive.flush()
    archive.append(make_record(ms(2008, 3, 11), 6, "two"))
    segs = archive.flush()
    assert segs[0].seq == 1


def test_segment_roll_by_record_count(tmp_path, monkeypatch):
    monkeypatch.setattr("tweetvault.store.ROLL_RECORDS", 10)
    archive = Archive(tmp_path / "a")
    for i in range(25):
        archive.append(make_record(ms(2008, 3, 10) + i * 1000, 100 + i, f"t{i}"))
    archive.flush()
    segs = archive.segments("2008-03")
    assert [s.record_count for s in segs] == [10, 10, 5]
    assert [r.text for r in archive.scan("2008-03")] == [f"t{i}" for i in range(25)]


def test_quarantine_routing(tmp_path):
    archive = Archive(tmp_path / "a")
    archive.append(make_record(ms(2005, 1, 1), 1, "too early"))
    archive.append(make_record(ms(2010, 1, 1), int(2e9), "too late"))
    archive.append(make_record(ms(2008, 1, 1), 2, "fine"))
    archive.flush()
    assert archive.quarantine_count() == 2
    assert [k.label for k in archive.partitions()] == ["2008-01"]
    assert [r.text for r in archive.scan()] == ["fine"]
    stats = {s["partition"]: s["records"] for s in archive.stats()}
    assert stats["quarantine"] == 2


def test_scan_back_byte_identical(tmp_path):
    records = [make_record(ms(2008, 5, 1) + i, 1000 + i, f"text {i}") for i in range(50)]
    archive = build_archive(records, tmp_path / "a")
    lines_in = [r.to_json_line() for r in records]
    lines_out = [r.to_json_line() for r in archive.scan("2008-05")]
    assert lines_in == lines_out


@given(st.text(min_size=0, max_size=200))
@settings(max_examples=100)
def test_utf8_roundtrip_lossless(tmp_path_factory, text):
    root = tmp_path_factory.mktemp("utf8")
    rec = make_record(ms(2008, 5, 1), 77, text)
    archive = build_archive([rec], root)
    got = list(archive.scan())
    assert got[0].text == text


def test_rtl_and_emoji_roundtrip(tmp_path):
    samples = ["رأی من کجاست", "今日は良い天気", "smile 🙂 and ok", "mixed عربي text"]
    records = [
        make_record(ms(2009, 3, 2) + i, 50 + i, s) for i, s in enumerate(samples)
    ]
    archive = build_archive(records, tmp_path / "a")
    assert [r.text for r in archive.scan()] == samples


def test_corrupt_segment_error_names_segment(tmp_path):
    archive = build_archive(
        [make_record(ms(2008, 5, 1), 1, "ok"), make_record(ms(2009, 3, 2), 2, "ok2")],
        tmp_path / "a",
    )
    victim = archive.segments("2008-05")[0].path
    victim.write_bytes(b"this is not gzip")
    with pytest.raises(SegmentError) as exc:
        list(archive.scan("2008-05"))
    assert str(victim) in str(exc.value)
    # other partitions unaffected
    assert [r.text for r in archive.scan("2009-W10")] == ["ok2"]


def test_manifest_mismatch_detected(tmp_path):
    archive = build_archive([make_record(ms(2008, 5, 1), 1, "ok")], tmp_path / "a")
    seg = archive.segments("2008-05")[0]
    seg.path.write_bytes(gzip.compress(b"", 6, mtime=0))
    with pytest.raises(SegmentError):
        list(archive.scan("2008-05"))


def test_ingest_dir(tmp_path):
    records = [make_record(ms(2008, 5, 1) + i, 100 + i, f"r{i}") for i in range(7)]
    src = tmp_path / "in"
    src.mkdir()
    payload = "".join(r.to_json_line() + "\n" for r in records).encode("utf-8")
    (src / "batch.ndjson.gz").write_bytes(gzip.compress(payload, 6, mtime=0))
    archive = Archive(tmp_path / "a")
    assert ingest_dir(src, archive) == 7
    assert archive.record_count() == 7

"""Time-partitioned, append-only archive of dehydrated tweets.

Partition layout: everything from 2006 in one partition, one per calendar
month for 2007 and 2008, one per ISO-8601 week for 2009. Records land in
immutable gzip ndjson segments under `archive/<label>/segment-NNNN.ndjson.gz`
with a per-partition manifest (seq, count, min_ts, max_ts, filename).
Timestamps outside the configured bounds go to a quarantine partition
that range queries never touch.

Within a partition, segments preserve append order; readers merge
segments by (timestamp, id) at scan time, which keeps parallel ingest
cheap and scans deterministic.
"""

from __future__ import annotations

import gzip
import heapq
import json
import os
from dataclasses import dataclass
from datetime import date
from pathlib import Path
from typing import Iterator, Optional, Union

from tweetvault.dehydrator import DehydratedTweet
from tweetvault.timeutil import MS_PER_WEEK, ms, to_datetime

DEFAULT_BOUNDS = (ms(2006, 3, 1), ms(2009, 8, 1) - 1)

ROLL_RECORDS = 1_000_000
ROLL_BYTES = 256 * 1024 * 1024  # decompressed
GZIP_LEVEL = 6

QUARANTINE_LABEL = "quarantine"


class SegmentError(Exception):
    """A segment file that cannot be read; names the offending path."""


@dataclass(frozen=True, order=True)
class PartitionKey:
    """Identity of one shard: ('year', 2006, 0), ('month', y, m),
    ('week', 2009, w) or ('quarantine', 0, 0). Ordered by span start."""

    start_ms: int
    kind: str
    year: int
    sub: int

    @property
    def label(self) -> str:
        if self.kind == "year":
            return str(self.year)
        if self.kind == "month":
            return f"{self.year}-{self.sub:02d}"
        if self.kind == "week":
            return f"{self.year}-W{self.sub:02d}"
        return QUARANTINE_LABEL

    @property
    def end_ms(self) -> int:
        """Exclusive end of the span."""
        if self.kind == "year":
            return ms(self.year + 1)
        if self.kind == "month":
            y, m = (self.year + 1, 1) if self.sub == 12 else (self.year, self.sub + 1)
            return ms(y, m)
        if self.kind == "week":
            monday = date.fromisocalendar(self.year, self.sub, 1)
            natural = ms(monday.year, monday.month, monday.day) + MS_PER_WEEK
            return min(natural, ms(self.year + 1))
        raise ValueError("quarantine has no time span")

    @classmethod
    def year_of(cls, year: int) -> "PartitionKey":
        return cls(ms(year), "year", year, 0)

    @classmethod
    def month_of(cls, year: int, month: int) -> "PartitionKey":
        return cls(ms(year, month), "month", year, month)

    @classmethod
    def week_of(cls, year: int, week: int) -> "PartitionKey":
        # ISO weeks can spill across calendar years; records route by
        # calendar year first, so the span is clipped to the week's year
        monday = date.fromisocalendar(year, week, 1)
        start = max(ms(monday.year, monday.month, monday.day), ms(year))
        return cls(start, "week", year, week)

    @classmethod
    def quarantine(cls) -> "PartitionKey":
        return cls(-1, QUARANTINE_LABEL, 0, 0)

    @classmethod
    def from_label(cls, label: str) -> "PartitionKey":
        if label == QUARANTINE_LABEL:
            return cls.quarantine()
        if "-W" in label:
            year, week = label.split("-W")
            return cls.week_of(int(year), int(week))
        if "-" in label:
            year, month = label.split("-")
            return cls.month_of(int(year), int(month))
        return cls.year_of(int(label))


def partition_key(
    timestamp: int, bounds: tuple[int, int] = DEFAULT_BOUNDS
) -> PartitionKey:
    """Partition for an epoch-ms timestamp; out-of-bounds quarantines."""
    if timestamp < bounds[0] or timestamp > bounds[1]:
        return PartitionKey.quarantine()
    dt = to_datetime(timestamp)
    if dt.year == 2006:
        return PartitionKey.year_of(2006)
    if dt.year in (2007, 2008):
        return PartitionKey.month_of(dt.year, dt.month)
    if dt.year == 2009:
        iso = dt.isocalendar()
        if iso[0] != 2009:
            # cannot happen inside the default bounds; quarantine, do not drop
            return PartitionKey.quarantine()
        return PartitionKey.week_of(2009, iso[1])
    return PartitionKey.quarantine()


def all_partitions(bounds: tuple[int, int] = DEFAULT_BOUNDS) -> list[PartitionKey]:
    """Every regular partition whose span intersects the bounds, in order."""
    keys: list[PartitionKey] = [PartitionKey.year_of(2006)]
    for year in (2007, 2008):
        for month in range(1, 13):
            keys.append(PartitionKey.month_of(year, month))
    last_week = date(2009, 12, 28).isocalendar()[1]
    for week in range(1, last_week + 1):
        keys.append(PartitionKey.week_of(2009, week))
    lo, hi = bounds
    return [k for k in keys if k.start_ms <= hi and k.end_ms > lo]


def partitions_for_range(
    t0: int, t1: int, bounds: tuple[int, int] = DEFAULT_BOUNDS
) -> list[PartitionKey]:
    """Exactly the partitions whose span intersects [t0, t1], in time order."""
    if t0 > t1:
        raise ValueError("t0 > t1")
    return [k for k in all_partitions(bounds) if k.start_ms <= t1 and k.end_ms > t0]


@dataclass(frozen=True)
class Segment:
    partition: str
    seq: int
    record_count: int
    min_ts: int
    max_ts: int
    path: Path


class _OpenSegment:
    def __init__(self, path: Path, seq: int):
        self.tmp_path = path.parent / (path.name + ".tmp")
        self.final_path = path
        self.seq = seq
        self.raw = open(self.tmp_path, "wb")
        self.fh = gzip.GzipFile(
            filename="", mode="wb", fileobj=self.raw,
            compresslevel=GZIP_LEVEL, mtime=0,
        )
        self.count = 0
        self.raw_bytes = 0
        self.min_ts: Optional[int] = None
        self.max_ts: Optional[int] = None

    def write(self, line: bytes, ts: int) -> None:
        self.fh.write(line)
        self.count += 1
        self.raw_bytes += len(line)
        if self.min_ts is None or ts < self.min_ts:
            self.min_ts = ts
        if self.max_ts is None or ts > self.max_ts:
            self.max_ts = ts

    def full(self) -> bool:
        return self.count >= ROLL_RECORDS or self.raw_bytes >= ROLL_BYTES

    def close(self) -> None:
        self.fh.close()
        self.raw.close()

    def abort(self) -> None:
        self.close()
        self.tmp_path.unlink(missing_ok=True)


class Archive:
    """Writer/reader for one archive directory."""

    def __init__(self, root: Union[str, Path], bounds: tuple[int, int] = DEFAULT_BOUNDS):
        self.root = Path(root)
        self.bounds = bounds
        self.root.mkdir(parents=True, exist_ok=True)
        self._open: dict[str, _OpenSegment] = {}
        self._quarantined = 0

    # -- write side ----------------------------------------------------

    def append(self, record: DehydratedTweet) -> None:
        key = partition_key(record.timestamp, self.bounds)
        label = key.label
        if label == QUARANTINE_LABEL:
            self._quarantined += 1
        seg = self._open.get(label)
        if seg is None:
            seg = self._new_segment(label)
            self._open[label] = seg
        seg.write((record.to_json_line() + "\n").encode("utf-8"), record.timestamp)
        if seg.full():
            self._finalize(label, seg)
            del self._open[label]

    def flush(self) -> list[Segment]:
        """Close all open segments and publish them to the manifests."""
        done = []
        for label in sorted(self._open):
            done.append(self._finalize(label, self._open[label]))
        self._open.clear()
        return done

    def abort(self) -> None:
        for seg in self._open.values():
            seg.abort()
        self._open.clear()

    def _new_segment(self, label: str) -> _OpenSegment:
        pdir = self.root / label
        pdir.mkdir(parents=True, exist_ok=True)
        seq = self._next_seq(label)
        return _OpenSegment(pdir / f"segment-{seq:04d}.ndjson.gz", seq)

    def _next_seq(self, label: str) -> int:
        rows = self._manifest_rows(label)
        return rows[-1][0] + 1 if rows else 0

    def _finalize(self, label: str, seg: _OpenSegment) -> Segment:
        seg.close()
        os.replace(seg.tmp_path, seg.final_path)
        rows = self._manifest_rows(label)
        rows.append(
            (seg.seq, seg.count, seg.min_ts or 0, seg.max_ts or 0, seg.final_path.name)
        )
        self._write_manifest(label, rows)
        return Segment(
            label, seg.seq, seg.count, seg.min_ts or 0, seg.max_ts or 0, seg.final_path
        )

    # -- manifests -----------------------------------------------------

    def _manifest_path(self, label: str) -> Path:
        return self.root / label / "manifest.tsv"

    def _manifest_rows(self, label: str) -> list[tuple[int, int, int, int, str]]:
        path = self._manifest_path(label)
        if not path.exists():
            return []
        rows = []
        for line in path.read_text(encoding="utf-8").splitlines():
            if not line.strip():
                continue
            seq, count, min_ts, max_ts, name = line.split("\t")
            rows.append((int(seq), int(count), int(min_ts), int(max_ts), name))
        return rows

    def _write_manifest(self, label: str, rows) -> None:
        path = self._manifest_path(label)
        tmp = path.with_suffix(".tmp")
        body = "".join(
            f"{seq}\t{count}\t{min_ts}\t{max_ts}\t{name}\n"
            for seq, count, min_ts, max_ts, name in sorted(rows)
        )
        tmp.write_text(body, encoding="utf-8")
        os.replace(tmp, path)

    # -- read side -----------------------------------------------------

    def partitions(self) -> list[PartitionKey]:
        """Partitions that hold data, in time order; quarantine excluded."""
        keys = []
        for child in self.root.iterdir():
            if child.name == QUARANTINE_LABEL or not child.is_dir():
                continue
            if (child / "manifest.tsv").exists():
                keys.append(PartitionKey.from_label(child.name))
        return sorted(keys)

    def segments(self, label: str) -> list[Segment]:
        pdir = self.root / label
        return [
            Segment(label, seq, count, min_ts, max_ts, pdir / name)
            for seq, count, min_ts, max_ts, name in self._manifest_rows(label)
        ]

    def _read_segment(self, seg: Segment) -> list[DehydratedTweet]:
        try:
            with gzip.open(seg.path, "rt", encoding="utf-8") as fh:
                records = [
                    DehydratedTweet.from_json_line(line)
                    for line in fh
                    if line.strip()
                ]
        except (OSError, EOFError, ValueError, TypeError) as e:
            raise SegmentError(f"corrupt segment {seg.path}: {e}") from e
        if len(records) != seg.record_count:
            raise SegmentError(
                f"corrupt segment {seg.path}: manifest says {seg.record_count} "
                f"records, found {len(records)}"
            )
        return records

    def scan_partition(self, key: Union[PartitionKey, str]) -> Iterator[DehydratedTweet]:
        """All records of one partition in (timestamp, id) order."""
        label = key if isinstance(key, str) else key.label
        streams = []
        for seg in self.segments(label):
            records = self._read_segment(seg)
            records.sort(key=lambda r: (r.timestamp, int(r.id_str)))
            streams.append(records)
        yield from heapq.merge(*streams, key=lambda r: (r.timestamp, int(r.id_str)))

    def scan(
        self, partition: Union[PartitionKey, str, None] = None
    ) -> Iterator[DehydratedTweet]:
        """Scan one partition, or every regular partition in time order.

        This is the plain sequential read path; the search module's index
        answers the same questions faster and is validated against this.
        """
        if partition is not None:
            yield from self.scan_partition(partition)
            return
        for key in self.partitions():
            yield from self.scan_partition(key)

    def quarantine_count(self) -> int:
        rows = self._manifest_rows(QUARANTINE_LABEL)
        return sum(count for _, count, _, _, _ in rows)

    def stats(self) -> list[dict]:
        """Per-partition segment/record counts and time extents."""
        out = []
        labels = [k.label for k in self.partitions()]
        if self._manifest_rows(QUARANTINE_LABEL):
            labels.append(QUARANTINE_LABEL)
        for label in labels:
            rows = self._manifest_rows(label)
            out.append(
                {
                    "partition": label,
                    "segments": len(rows),
                    "records": sum(r[1] for r in rows),
                    "min_ts": min((r[2] for r in rows), default=0),
                    "max_ts": max((r[3] for r in rows), default=0),
                }
            )
        return out

    def record_count(self) -> int:
        return sum(s["records"] for s in self.stats() if s["partition"] != QUARANTINE_LABEL)

    def data_span(self) -> Optional[tuple[int, int]]:
        stats = [s for s in self.stats() if s["partition"] != QUARANTINE_LABEL and s["records"]]
        if not stats:
            return None
        return min(s["min_ts"] for s in stats), max(s["max_ts"] for s in stats)


def ingest_dir(in_dir: Union[str, Path], archive: Archive) -> int:
    """Append every dehydrated record found in *.ndjson.gz files; flushes."""
    n = 0
    try:
        for path in sorted(Path(in_dir).glob("*.ndjson.gz")):
            with gzip.open(path, "rt", encoding="utf-8") as fh:
                for line in fh:
                    line = line.strip()
                    if not line:
                        continue
                    archive.append(DehydratedTweet.from_json_line(line))
                    n += 1
    except Exception:
        archive.abort()
        raise
    archive.flush()
    return n

"""Query execution over the partition indexes.

Results stream in strict (timestamp desc, id desc) order. Partition
pruning happens before any index is opened: only partitions whose span
intersects the query scope (and any root-level time bounds) are touched,
and the searcher counts how many it opened so tests can assert pruning.

Posting lists are decoded per term from an mmap of postings.bin; the
dictionary and the per-doc timestamp column are the only parts of an
index held in memory.
"""

from __future__ import annotations

import json
import mmap
from array import array
from bisect import bisect_left, bisect_right
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator, Optional, Union

from tweetvault import _kernels
from tweetvault.search.query import (
    And,
    Or,
    Phrase,
    Query,
    Term,
    TimeRange,
    extract_window,
)
from tweetvault.store import (
    DEFAULT_BOUNDS,
    Archive,
    PartitionKey,
    partitions_for_range,
)

_EMPTY = array("q")


class NotIndexedError(Exception):
    """Partitions hold data inside the query scope but have no index."""

    def __init__(self, labels: list[str]):
        super().__init__(f"partitions not indexed: {', '.join(labels)}")
        self.labels = labels


@dataclass(frozen=True)
class SearchResult:
    id_str: str
    timestamp: int
    text: str
    partition: str


class PartitionIndex:
    """Read-only view of one partition's index directory."""

    def __init__(self, path: Union[str, Path]):
        self.path = Path(path)
        meta = json.loads((self.path / "meta.json").read_text(encoding="utf-8"))
        self.label: str = meta["partition"]
        self.doc_count: int = meta["doc_count"]
        self.min_ts: int = meta["min_ts"]
        self.max_ts: int = meta["max_ts"]
        self.terms: dict[str, tuple[int, int, int]] = {}
        with open(self.path / "terms.tsv", encoding="utf-8") as fh:
            for line in fh:
                tok, df, off, ln = line.rstrip("\n").split("\t")
                self.terms[tok] = (int(df), int(off), int(ln))
        self._postings_file = open(self.path / "postings.bin", "rb")
        size = self.path.joinpath("postings.bin").stat().st_size
        self._postings = (
            mmap.mmap(self._postings_file.fileno(), size, access=mmap.ACCESS_READ)
            if size
            else b""
        )
        self._ts: Optional[array] = None
        self._ids: Optional[array] = None
        self._text_off: Optional[array] = None
        self._texts_file = None
        self._texts = None

    def close(self) -> None:
        if self._texts is not None and not isinstance(self._texts, bytes):
            self._texts.close()
        if self._texts_file is not None:
            self._texts_file.close()
        if not isinstance(self._postings, bytes):
            self._postings.close()
        self._postings_file.close()

    @property
    def ts_array(self) -> array:
        if self._ts is None:
            arr = array("q")
            arr.frombytes((self.path / "docs.ts.bin").read_bytes())
            self._ts = arr
        return self._ts

    @property
    def id_array(self) -> array:
        if self._ids is None:
            arr = array("q")
            arr.frombytes((self.path / "docs.id.bin").read_bytes())
            self._ids = arr
        return self._ids

    def _text_store(self):
        if self._texts is None:
            off = array("q")
            off.frombytes((self.path / "docs.text.off").read_bytes())
            self._text_off = off
            size = (self.path / "docs.text.bin").stat().st_size
            self._texts_file = open(self.path / "docs.text.bin", "rb")
            self._texts = (
                mmap.mmap(self._texts_file.fileno(), size, access=mmap.ACCESS_READ)
                if size
                else b""
            )
        return self._text_off, self._texts

    def text(self, ordinal: int) -> str:
        off, buf = self._text_store()
        return bytes(buf[off[ordinal] : off[ordinal + 1]]).decode("utf-8")

    def df(self, token: str) -> int:
        entry = self.terms.get(token)
        return entry[0] if entry else 0

    def postings_docs(self, token: str) -> array:
        entry = self.terms.get(token)
        if entry is None:
            return _EMPTY
        _, off, ln = entry
        return _kernels.decode_doc_ids(memoryview(self._postings)[off : off + ln])

    def postings_full(self, token: str):
        entry = self.terms.get(token)
        if entry is None:
            return None
        _, off, ln = entry
        return _kernels.decode_postings(memoryview(self._postings)[off : off + ln])

    def window(self, t0: int, t1: int) -> tuple[int, int]:
        """Ordinal range [lo, hi) with timestamps in [t0, t1]."""
        ts = self.ts_array
        return bisect_left(ts, t0), bisect_right(ts, t1)


def _clip(ords: array, lo: int, hi: int) -> array:
    if lo <= 0 and (not ords or ords[-1] < hi):
        return ords
    a = bisect_left(ords, lo)
    b = bisect_left(ords, hi)
    return ords[a:b]


class Searcher:
    """Executes queries across partition indexes with pruning."""

    def __init__(
        self,
        index_root: Union[str, Path],
        archive: Optional[Archive] = None,
        bounds: tuple[int, int] = DEFAULT_BOUNDS,
    ):
        self.index_root = Path(index_root)
        self.archive = archive
        self.bounds = bounds
        self._readers: dict[str, PartitionIndex] = {}
        self.last_opened: list[str] = []

    def indexed_labels(self) -> set[str]:
        return {
            child.name
            for child in self.index_root.iterdir()
            if child.is_dir() and (child / "meta.json").exists()
        }

    def _reader(self, label: str) -> PartitionIndex:
        reader = self._readers.get(label)
        if reader is None:
            reader = PartitionIndex(self.index_root / label)
            self._readers[label] = reader
        if label not in self.last_opened:
            self.last_opened.append(label)
        return reader

    def close(self) -> None:
        for reader in self._readers.values():
            reader.close()
        self._readers.clear()

    def data_span(self) -> Optional[tuple[int, int]]:
        spans = []
        for label in self.indexed_labels():
            meta = json.loads(
                (self.index_root / label / "meta.json").read_text(encoding="utf-8")
            )
            if meta["doc_count"]:
                spans.append((meta["min_ts"], meta["max_ts"]))
        if not spans:
            return None
        return min(s[0] for s in spans), max(s[1] for s in spans)

    def _scope_keys(
        self, q: Query, scope: Optional[tuple[int, int]]
    ) -> tuple[list[PartitionKey], int, int]:
        """Partitions to search plus the effective time window."""
        t0, t1, _ = extract_window(q)
        if scope is not None:
            t0 = max(t0, scope[0])
            t1 = min(t1, scope[1])
        if t0 > t1:
            return [], t0, t1
        lo = max(t0, self.bounds[0])
        hi = min(t1, self.bounds[1])
        if lo > hi:
            return [], t0, t1
        keys = partitions_for_range(lo, hi, self.bounds)
        indexed = self.indexed_labels()
        if self.archive is not None:
            with_data = {k.label for k in self.archive.partitions()}
            missing = sorted(
                k.label for k in keys if k.label in with_data and k.label not in indexed
            )
            if missing:
                raise NotIndexedError(missing)
        keys = [k for k in keys if k.label in indexed]
        return keys, t0, t1

    def execute(
        self,
        q: Query,
        scope: Optional[tuple[int, int]] = None,
        limit: Optional[int] = None,
    ) -> Iterator[SearchResult]:
        """Stream matches in (timestamp desc, id desc) order."""
        self.last_opened = []
        keys, t0, t1 = self._scope_keys(q, scope)
        emitted = 0
        make = SearchResult
        for key in reversed(keys):
            px = self._reader(key.label)
            if px.doc_count == 0:
                continue
            ords = self._eval(q, px)
            lo, hi = px.window(t0, t1)
            ords = _clip(ords, lo, hi)
            ts = px.ts_array
            ids = px.id_array
            off, buf = px._text_store()
            label = px.label
            for i in range(len(ords) - 1, -1, -1):
                o = ords[i]
                yield make(
                    str(ids[o]),
                    ts[o],
                    bytes(buf[off[o] : off[o + 1]]).decode("utf-8"),
                    label,
                )
                emitted += 1
                if limit is not None and emitted >= limit:
                    return

    def count_total(self, q: Query, scope: Optional[tuple[int, int]] = None) -> int:
        """Match count without materializing texts."""
        self.last_opened = []
        keys, t0, t1 = self._scope_keys(q, scope)
        total = 0
        for key in keys:
            px = self._reader(key.label)
            if px.doc_count == 0:
                continue
            ords = self._eval(q, px)
            lo, hi = px.window(t0, t1)
            total += len(_clip(ords, lo, hi))
        return total

    def count_by_bucket(
        self,
        q: Query,
        granularity: str,
        scope: Optional[tuple[int, int]] = None,
    ) -> dict[int, int]:
        """Bucket-start -> match count, computed from the timestamp column."""
        from tweetvault.timeutil import bucket_boundaries

        self.last_opened = []
        keys, t0, t1 = self._scope_keys(q, scope)
        if not keys:
            return {}
        span_lo = max(t0, min(k.start_ms for k in keys))
        span_hi = min(t1, max(k.end_ms for k in keys) - 1)
        if span_lo > span_hi:
            return {}
        boundaries = array("q", bucket_boundaries(span_lo, span_hi, granularity))
        counts = [0] * (len(boundaries) - 1)
        for key in keys:
            px = self._reader(key.label)
            if px.doc_count == 0:
                continue
            ords = self._eval(q, px)
            lo, hi = px.window(t0, t1)
            ords = _clip(ords, lo, hi)
            if not ords:
                continue
            part = _kernels.bucket_counts(px.ts_array, ords, boundaries)
            for i, c in enumerate(part):
                counts[i] += c
        return {
            boundaries[i]: counts[i] for i in range(len(counts)) if counts[i] > 0
        }

    # -- evaluation ------------------------------------------------------

    def _materialize_window(self, px: PartitionIndex, t0: int, t1: int) -> array:
        lo, hi = px.window(t0, t1)
        return array("q", range(lo, hi))

    def _eval(self, node: Query, px: PartitionIndex) -> array:
        if isinstance(node, Term):
            return px.postings_docs(node.token)
        if isinstance(node, Phrase):
            if len(node.tokens) == 1:
                return px.postings_docs(node.tokens[0])
            decoded = []
            for tok in node.tokens:
                full = px.postings_full(tok)
                if full is None:
                    return _EMPTY
                decoded.append(full)
            return _kernels.phrase_match(decoded)
        if isinstance(node, TimeRange):
            return self._materialize_window(px, node.t0, node.t1)
        if isinstance(node, And):
            window_lo, window_hi = 0, px.doc_count
            parts = []
            for child in node.children:
                if isinstance(child, TimeRange):
                    lo, hi = px.window(child.t0, child.t1)
                    window_lo = max(window_lo, lo)
                    window_hi = min(window_hi, hi)
                else:
                    parts.append(self._eval(child, px))
                    if not parts[-1]:
                        return _EMPTY
            if not parts:
                return array("q", range(window_lo, max(window_lo, window_hi)))
            parts.sort(key=len)
            acc = parts[0]
            for other in parts[1:]:
                acc = _kernels.intersect_sorted(acc, other)
                if not acc:
                    return _EMPTY
            if window_lo > 0 or window_hi < px.doc_count:
                acc = _clip(acc, window_lo, window_hi)
            return acc
        if isinstance(node, Or):
            parts = [self._eval(child, px) for child in node.children]
            return _kernels.union_sorted_many(parts)
        raise TypeError(f"unknown query node {node!r}")

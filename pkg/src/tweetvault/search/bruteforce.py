"""Scan-and-filter reference search.

Answers every query by walking the stored records and testing each text,
with no postings, no dictionaries and no ordinal tricks shared with the
index path; only the tokenizer is common, since it defines what a match
means. The real engine is validated against this module, never the other
way around.

Term results are memoized per corpus so large cross-check batteries stay
affordable; each memoized entry is still computed by a full scan.
"""

from __future__ import annotations

from bisect import bisect_left, bisect_right
from typing import Iterable, Optional

from tweetvault._kernels import tokenize
from tweetvault.search.query import And, Or, Phrase, Query, Term, TimeRange, extract_window
from tweetvault.search.reader import SearchResult
from tweetvault.store import Archive


class ScanOracle:
    """In-memory scan copy of an archive (or any record iterable)."""

    def __init__(self, archive: Optional[Archive] = None, records=None):
        self._ts: list[int] = []
        self._ids: list[int] = []
        self._texts: list[str] = []
        self._partitions: list[str] = []
        self._tok_tuples: list[tuple[int, ...]] = []
        self._tok_ids: dict[str, int] = {}
        self._term_cache: dict[str, frozenset] = {}
        if archive is not None:
            for key in archive.partitions():
                label = key.label
                for rec in archive.scan_partition(key):
                    self._add(rec.timestamp, int(rec.id_str), rec.text, label)
        if records is not None:
            for ts, tid, text, label in records:
                self._add(ts, tid, text, label)

    def _add(self, ts: int, tid: int, text: str, label: str) -> None:
        if self._ts and (ts, tid) < (self._ts[-1], self._ids[-1]):
            raise ValueError("oracle input must arrive in (timestamp, id) order")
        self._ts.append(ts)
        self._ids.append(tid)
        self._texts.append(text)
        self._partitions.append(label)
        ids = self._tok_ids
        self._tok_tuples.append(
            tuple(ids.setdefault(tok, len(ids)) for tok in tokenize(text))
        )

    def __len__(self) -> int:
        return len(self._ts)

    def _term_set(self, token: str) -> frozenset:
        cached = self._term_cache.get(token)
        if cached is None:
            tid = self._tok_ids.get(token)
            if tid is None:
                cached = frozenset()
            else:
                cached = frozenset(
                    i for i, toks in enumerate(self._tok_tuples) if tid in toks
                )
            self._term_cache[token] = cached
        return cached

    def _phrase_set(self, tokens: tuple[str, ...]) -> frozenset:
        tids = tuple(self._tok_ids.get(t, -1) for t in tokens)
        if -1 in tids:
            return frozenset()
        cand: Iterable[int] = self._term_set(tokens[0])
        for tok in tokens[1:]:
            cand = cand & self._term_set(tok)
        k = len(tids)
        hits = []
        for i in cand:
            toks = self._tok_tuples[i]
            n = len(toks)
            for start in range(n - k + 1):
                if toks[start : start + k] == tids:
                    hits.append(i)
                    break
        return frozenset(hits)

    def _eval(self, node: Query) -> frozenset:
        if isinstance(node, Term):
            return self._term_set(node.token)
        if isinstance(node, Phrase):
            if len(node.tokens) == 1:
                return self._term_set(node.tokens[0])
            return self._phrase_set(node.tokens)
        if isinstance(node, And):
            acc: Optional[frozenset] = None
            for child in node.children:
                s = self._eval(child)
                acc = s if acc is None else acc & s
                if not acc:
                    return frozenset()
            return acc or frozenset()
        if isinstance(node, Or):
            acc = frozenset()
            for child in node.children:
                acc = acc | self._eval(child)
            return acc
        if isinstance(node, TimeRange):
            lo = bisect_left(self._ts, node.t0)
            hi = bisect_right(self._ts, node.t1)
            return frozenset(range(lo, hi))
        raise TypeError(f"unknown query node {node!r}")

    def _window(self, q: Query, scope: Optional[tuple[int, int]]):
        t0, t1, rest = extract_window(q)
        if scope is not None:
            t0 = max(t0, scope[0])
            t1 = min(t1, scope[1])
        lo = bisect_left(self._ts, t0)
        hi = bisect_right(self._ts, t1)
        return lo, hi, rest

    def matching_indices(
        self, q: Query, scope: Optional[tuple[int, int]] = None
    ) -> list[int]:
        """Ascending doc indices matching q within scope."""
        lo, hi, rest = self._window(q, scope)
        if lo >= hi:
            return []
        if rest is None:
            return list(range(lo, hi))
        hits = self._eval(rest)
        return sorted(i for i in hits if lo <= i < hi)

    def search(
        self, q: Query, scope: Optional[tuple[int, int]] = None
    ) -> list[SearchResult]:
        """Matches in (timestamp desc, id desc) order, like the engine."""
        return [
            SearchResult(
                str(self._ids[i]), self._ts[i], self._texts[i], self._partitions[i]
            )
            for i in reversed(self.matching_indices(q, scope))
        ]

    def count_total(self, q: Query, scope: Optional[tuple[int, int]] = None) -> int:
        return len(self.matching_indices(q, scope))

    def count_by_bucket(
        self, q: Query, granularity: str, scope: Optional[tuple[int, int]] = None
    ) -> dict[int, int]:
        from tweetvault.timeutil import bucket_start

        counts: dict[int, int] = {}
        for i in self.matching_indices(q, scope):
            b = bucket_start(self._ts[i], granularity)
            counts[b] = counts.get(b, 0) + 1
        return counts

"""Figure-style computations: volumes, per-mille trends, actions, URLs.

Buckets are calendar-derived (day, ISO week, calendar month) from record
timestamps, independent of how the archive happens to be partitioned.
A bucket with no tweets at all has no defined rate; per-mille stays None
there and renders as an empty CSV cell.
"""

from __future__ import annotations

import csv
from array import array
from dataclasses import dataclass
from typing import Iterable, Optional, TextIO

from tweetvault import _kernels
from tweetvault.search.query import Query
from tweetvault.search.reader import Searcher
from tweetvault.store import Archive
from tweetvault.timeutil import bucket_boundaries, to_datetime


@dataclass(frozen=True)
class TrendRow:
    bucket_start: int
    total: int
    matches: int
    per_mille: Optional[float]


def _span(searcher: Searcher, scope: Optional[tuple[int, int]]) -> Optional[tuple[int, int]]:
    data = searcher.data_span()
    if data is None:
        return None
    if scope is None:
        return data
    lo, hi = max(scope[0], data[0]), min(scope[1], data[1])
    return (lo, hi) if lo <= hi else None


def volume(
    searcher: Searcher,
    granularity: str = "week",
    scope: Optional[tuple[int, int]] = None,
) -> list[tuple[int, int]]:
    """(bucket_start, total) rows, zero buckets included, span-contiguous."""
    span = _span(searcher, scope)
    if span is None:
        return []
    boundaries = array("q", bucket_boundaries(span[0], span[1], granularity))
    totals = [0] * (len(boundaries) - 1)
    from tweetvault.store import partitions_for_range

    for key in partitions_for_range(span[0], span[1], searcher.bounds):
        if key.label not in searcher.indexed_labels():
            continue
        px = searcher._reader(key.label)
        if px.doc_count == 0:
            continue
        part = _kernels.bucket_counts(px.ts_array, None, boundaries)
        for i, c in enumerate(part):
            totals[i] += c
    return [(boundaries[i], totals[i]) for i in range(len(totals))]


def trend(
    searcher: Searcher,
    q: Query,
    granularity: str = "week",
    scope: Optional[tuple[int, int]] = None,
) -> list[TrendRow]:
    """Per-bucket match rate in tweets per thousand tweets."""
    totals = volume(searcher, granularity, scope)
    if not totals:
        return []
    matches = searcher.count_by_bucket(q, granularity, scope)
    rows = []
    for bucket, total in totals:
        m = matches.get(bucket, 0)
        rate = 1000.0 * m / total if total > 0 else None
        rows.append(TrendRow(bucket, total, m, rate))
    return rows


def top_actions(
    searcher: Searcher,
    k: int = 20,
    scope: Optional[tuple[int, int]] = None,
) -> list[tuple[str, int]]:
    """Most frequent "-ing" tokens by document frequency.

    A crude stand-in for verb extraction: any token of length >= 4 ending
    in "ing" counts as an action. Ties break lexicographically.
    """
    span = _span(searcher, scope)
    if span is None:
        return []
    from tweetvault.store import partitions_for_range

    counts: dict[str, int] = {}
    for key in partitions_for_range(span[0], span[1], searcher.bounds):
        if key.label not in searcher.indexed_labels():
            continue
        px = searcher._reader(key.label)
        if px.doc_count == 0:
            continue
        lo, hi = px.window(span[0], span[1])
        whole = lo == 0 and hi == px.doc_count
        for tok, (df, _, _) in px.terms.items():
            if len(tok) < 4 or not tok.endswith("ing"):
                continue
            if whole:
                n = df
            else:
                ords = px.postings_docs(tok)
                from bisect import bisect_left

                n = bisect_left(ords, hi) - bisect_left(ords, lo)
            if n:
                counts[tok] = counts.get(tok, 0) + n
    ranked = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))
    return ranked[: max(k, 0)]


@dataclass(frozen=True)
class UrlStats:
    tweets_total: int
    tweets_with_url: int
    fraction_with_url: float
    domains: list[tuple[str, float]]  # fraction of URL-carrying tweets


def _url_host(token: str) -> str:
    for scheme in ("http://", "https://"):
        if token.startswith(scheme):
            rest = token[len(scheme):]
            host = rest.split("/", 1)[0].split("?", 1)[0].split("#", 1)[0]
            host = host.split(":", 1)[0].lower()
            return host if host else "invalid"
    return ""


def url_stats(
    archive: Archive, scope: Optional[tuple[int, int]] = None
) -> UrlStats:
    """URL carriage rate and domain ranking by scanning stored text.

    Works off the raw record scan because structured URL entities were
    dropped at dehydration time; a tweet counts once however many URLs
    it carries, and once per distinct domain for the ranking.
    """
    total = with_url = 0
    domain_counts: dict[str, int] = {}
    for rec in archive.scan():
        if scope is not None and not scope[0] <= rec.timestamp <= scope[1]:
            continue
        total += 1
        hosts = set()
        for token in rec.text.split():
            host = _url_host(token)
            if host:
                hosts.add(host)
        if hosts:
            with_url += 1
            for host in hosts:
                domain_counts[host] = domain_counts.get(host, 0) + 1
    fraction = with_url / total if total else 0.0
    ranked = sorted(domain_counts.items(), key=lambda kv: (-kv[1], kv[0]))
    domains = [(d, c / with_url) for d, c in ranked] if with_url else []
    return UrlStats(total, with_url, fraction, domains)


# -- CSV rendering -------------------------------------------------------


def _bucket_label(bucket_start: int) -> str:
    return to_datetime(bucket_start).date().isoformat()


def write_volume_csv(rows: Iterable[tuple[int, int]], out: TextIO) -> None:
    w = csv.writer(out)
    w.writerow(["bucket_start", "total"])
    for bucket, total in rows:
        w.writerow([_bucket_label(bucket), total])


def write_trend_csv(rows: Iterable[TrendRow], out: TextIO) -> None:
    w = csv.writer(out)
    w.writerow(["bucket_start", "total", "matches", "per_mille"])
    for row in rows:
        rate = "" if row.per_mille is None else f"{row.per_mille:.6g}"
        w.writerow([_bucket_label(row.bucket_start), row.total, row.matches, rate])


def write_actions_csv(rows: Iterable[tuple[str, int]], out: TextIO) -> None:
    w = csv.writer(out)
    w.writerow(["token", "doc_frequency"])
    for token, count in rows:
        w.writerow([token, count])


def write_urls_csv(stats: UrlStats, out: TextIO) -> None:
    w = csv.writer(out)
    w.writerow(["domain", "fraction_of_url_tweets"])
    for domain, fraction in stats.domains:
        w.writerow([domain, f"{fraction:.6g}"])

"""Candidate tweet-id enumeration.

Early tweet ids were assigned sequentially, sometimes stepping by tens, so
the whole 2006-2009 id space is covered by a fixed table of arithmetic
progressions (`DEFAULT_TABLE`). This module streams those progressions,
counts them in closed form, and slices them into worker shards and
request batches. The exhaustive fallback (`iter_full`) walks every integer
instead.

Adjacent progressions share their boundary value whenever the step divides
the previous progression exactly; `DedupPolicy` controls whether such
duplicates are emitted once or twice.
"""

from __future__ import annotations

from bisect import bisect_right
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Iterator, Sequence

MAX_TWEET_ID = 3_061_014_649
MAX_BATCH_SIZE = 100

# One progression per line, `start:end` (step 1) or `start:step:end`.
# The last value actually emitted is start + step * floor((end-start)/step),
# which for step 10 usually falls short of `end`; the next progression
# starts at `end` regardless, so only exactly-divisible boundaries repeat.
_DEFAULT_TABLE_TEXT = """\
20:81803
81803:10:5317478
5317478:5951471
5951471:10:33659941
33659941:34051542
34051542:10:749778882
749778882:797700951
797700951:10:798082536
798082536:861278101
861278101:10:861796399
861796399:907582571
907582571:10:907936108
907936108:10:908894500
908894500:920578209
920578209:10:920903970
920903970:948996649
948996649:10:950233829
950233829:957352345
957352345:10:957603791
957603791:989085799
989085799:10:989696020
989696020:1062054690
1062054690:10:1062633411
1062633411:1063043430
1063043430:10:1067177961
1067177961:1268484169
1268484169:10:1268752486
1268752486:1276604442
1276604442:10:1278491542
1278491542:1305643870
1305643870:10:1308469567
1308469567:1337207851
1337207851:10:1337561777
1337561777:1341303857
1341303857:10:1341654616
1341654616:1347134019
1347134019:10:1347350683
1347350683:1358197730
1358197730:10:1358777850
1358777850:1365719225
1365719225:10:1365920715
1365920715:1433622936
1433622936:10:1434276794
1434276794:1445739899
1445739899:10:1445939272
1445939272:1467920729
1467920729:10:1469118986
1469118986:1469829667
1469829667:10:1470202281
1470202281:1476157039
1476157039:10:1477122821
1477122821:1489587493
1489587493:10:1490448333
1490448333:1494130684
1494130684:10:1496083713
1496083713:1682400687
1682400687:10:1690038860
1690038860:1711490733
1711490733:10:1711821385
1711821385:1726965818
1726965818:10:1727193439
1727193439:1734319873
1734319873:10:1735002265
1735002265:1986606277
1986606277:10:1986848681
1986848681:2023225505
2023225505:10:2023747452
2023747452:2048511605
2048511605:10:2051073819
2051073819:2111076679
2111076679:10:2113946682
2113946682:2130679870
2130679870:10:2136747540
2136747540:2202236683
2202236683:10:2202553995
2202553995:2313545593
2313545593:10:2322204712
2322204712:2408271108
2408271108:10:2416149025
2416149025:2453681374
2453681374:10:2458487491
2458487491:2486851754
2486851754:10:2490430312
2490430312:2530881466
2530881466:10:2548066056
2548066056:2831755333
2831755333:10:2851555775
2851555775:3061014649
"""


class DedupPolicy(str, Enum):
    """How to treat boundary values shared by adjacent progressions."""

    RAW = "emit-raw"
    DEDUP = "dedup-boundaries"


@dataclass(frozen=True)
class IdRange:
    """Arithmetic progression start:step:end, end is an inclusive bound."""

    start: int
    step: int
    end: int

    def __post_init__(self) -> None:
        if self.step not in (1, 10):
            raise ValueError(f"step must be 1 or 10, got {self.step}")
        if not 1 <= self.start <= self.end <= MAX_TWEET_ID:
            raise ValueError(f"invalid range bounds {self.start}:{self.end}")

    @property
    def last(self) -> int:
        """Last value the progression actually emits (<= end)."""
        return self.start + self.step * ((self.end - self.start) // self.step)

    @property
    def count(self) -> int:
        return (self.end - self.start) // self.step + 1

    def values(self) -> range:
        return range(self.start, self.end + 1, self.step)

    def __str__(self) -> str:
        if self.step == 1:
            return f"{self.start}:{self.end}"
        return f"{self.start}:{self.step}:{self.end}"


class RangeTable:
    """Ordered, chained list of id progressions.

    Chaining (each start equals the previous end) is an invariant of the
    id-space model, not an accident of the default table, so it is
    enforced for user-supplied tables too.
    """

    def __init__(self, ranges: Sequence[IdRange]):
        ranges = tuple(ranges)
        if not ranges:
            raise ValueError("empty range table")
        for i in range(1, len(ranges)):
            if ranges[i].start != ranges[i - 1].end:
                raise ValueError(
                    f"table not chained at line {i + 1}: "
                    f"{ranges[i - 1]} then {ranges[i]}"
                )
        self.ranges = ranges
        # dup[i]: range i re-emits the previous range's final value
        self._dup = [False] + [
            ranges[i - 1].last == ranges[i].start for i in range(1, len(ranges))
        ]
        self._cum = {}

    def _cumulative(self, policy: DedupPolicy) -> list[int]:
        """Prefix sums of per-range emitted counts under `policy`."""
        cum = self._cum.get(policy)
        if cum is None:
            cum = [0]
            for i, r in enumerate(self.ranges):
                c = r.count
                if policy is DedupPolicy.DEDUP and self._dup[i]:
                    c -= 1
                cum.append(cum[-1] + c)
            self._cum[policy] = cum
        return cum

    def count(self, policy: DedupPolicy = DedupPolicy.DEDUP) -> int:
        """Total ids emitted, computed without enumeration."""
        return self._cumulative(policy)[-1]

    def iter_ids(self, policy: DedupPolicy = DedupPolicy.DEDUP) -> Iterator[int]:
        """Stream every id in table order; O(1) memory."""
        for i, r in enumerate(self.ranges):
            vals = r.values()
            if policy is DedupPolicy.DEDUP and self._dup[i]:
                vals = vals[1:]
            yield from vals

    def id_at(self, index: int, policy: DedupPolicy = DedupPolicy.DEDUP) -> int:
        """Id at position `index` of the emitted stream, in O(log n)."""
        cum = self._cumulative(policy)
        if not 0 <= index < cum[-1]:
            raise IndexError(index)
        k = bisect_right(cum, index) - 1
        r = self.ranges[k]
        local = index - cum[k]
        if policy is DedupPolicy.DEDUP and self._dup[k]:
            local += 1
        return r.start + r.step * local

    def iter_slice(
        self, lo: int, hi: int, policy: DedupPolicy = DedupPolicy.DEDUP
    ) -> Iterator[int]:
        """Stream positions [lo, hi) of the emitted sequence."""
        cum = self._cumulative(policy)
        total = cum[-1]
        lo = max(lo, 0)
        hi = min(hi, total)
        if lo >= hi:
            return
        k = bisect_right(cum, lo) - 1
        while k < len(self.ranges) and cum[k] < hi:
            r = self.ranges[k]
            vals = r.values()
            if policy is DedupPolicy.DEDUP and self._dup[k]:
                vals = vals[1:]
            a = max(lo - cum[k], 0)
            b = min(hi - cum[k], len(vals))
            yield from vals[a:b]
            k += 1

    @classmethod
    def parse(cls, text: str) -> "RangeTable":
        """Parse `start:end` / `start:step:end` lines; `#` comments allowed."""
        ranges = []
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split(":")
            try:
                if len(parts) == 2:
                    start, step, end = int(parts[0]), 1, int(parts[1])
                elif len(parts) == 3:
                    start, step, end = (int(p) for p in parts)
                else:
                    raise ValueError
            except ValueError:
                raise ValueError(f"line {lineno}: cannot parse range {line!r}") from None
            ranges.append(IdRange(start, step, end))
        return cls(ranges)

    def dumps(self) -> str:
        return "".join(f"{r}\n" for r in self.ranges)

    def __len__(self) -> int:
        return len(self.ranges)


DEFAULT_TABLE = RangeTable.parse(_DEFAULT_TABLE_TEXT)


def iter_full(start: int, end: int) -> range:
    """Exhaustive fallback: every integer in [start, end]."""
    if start > end:
        raise ValueError(f"start {start} > end {end}")
    return range(start, end + 1)


def count_full(start: int, end: int) -> int:
    if start > end:
        raise ValueError(f"start {start} > end {end}")
    return end - start + 1


def shard_bounds(total: int, n_workers: int) -> list[tuple[int, int]]:
    """Split [0, total) into n_workers contiguous blocks, sizes within 1.

    Contiguity keeps each worker's resume state a single stream offset.
    """
    if n_workers < 1:
        raise ValueError(f"n_workers must be >= 1, got {n_workers}")
    base, extra = divmod(total, n_workers)
    bounds = []
    lo = 0
    for k in range(n_workers):
        hi = lo + base + (1 if k < extra else 0)
        bounds.append((lo, hi))
        lo = hi
    return bounds


def iter_shard(
    table: RangeTable,
    n_workers: int,
    shard_index: int,
    policy: DedupPolicy = DedupPolicy.DEDUP,
) -> Iterator[int]:
    """Stream the ids assigned to one worker."""
    bounds = shard_bounds(table.count(policy), n_workers)
    if not 0 <= shard_index < n_workers:
        raise ValueError(f"shard index {shard_index} out of range")
    lo, hi = bounds[shard_index]
    return table.iter_slice(lo, hi, policy)


def batched(ids: Iterable[int], size: int = MAX_BATCH_SIZE) -> Iterator[list[int]]:
    """Group an id stream into request batches of at most `size`."""
    if not 1 <= size <= MAX_BATCH_SIZE:
        raise ValueError(f"batch size must be in [1, {MAX_BATCH_SIZE}], got {size}")
    batch: list[int] = []
    for i in ids:
        batch.append(i)
        if len(batch) == size:
            yield batch
            batch = []
    if batch:
        yield batch

from itertools import islice

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tweetvault.idgen import (
    DEFAULT_TABLE,
    MAX_TWEET_ID,
    DedupPolicy,
    IdRange,
    RangeTable,
    batched,
    count_full,
    iter_full,
    iter_shard,
    shard_bounds,
)

RAW = DedupPolicy.RAW
DEDUP = DedupPolicy.DEDUP


def expand_colon_ranges(ranges):
    """Literal a:s:b colon-range expansion, ranges concatenated."""
    for start, step, end in ranges:
        v = start
        while v <= end:
            yield v
            v += step


def test_default_table_shape():
    assert len(DEFAULT_TABLE) == 88
    first, last = DEFAULT_TABLE.ranges[0], DEFAULT_TABLE.ranges[-1]
    assert (first.start, first.step, first.end) == (20, 1, 81803)
    assert (last.start, last.step, last.end) == (2851555775, 1, 3061014649)
    for prev, cur in zip(DEFAULT_TABLE.ranges, DEFAULT_TABLE.ranges[1:]):
        assert cur.start == prev.end


def test_first_ids():
    assert list(islice(DEFAULT_TABLE.iter_ids(), 3)) == [20, 21, 22]


def test_single_range_progression():
    r = IdRange(81803, 10, 5317478)
    vals = r.values()
    assert vals[0] == 81803 and vals[1] == 81813 and vals[2] == 81823
    assert r.last == 5317473
    assert r.count == 523_568


def test_range_counts_closed_form():
    assert IdRange(20, 1, 81803).count == 81_784
    assert IdRange(81803, 10, 5317478).count == 523_568


def test_table_counts_both_policies():
    # the published figure lies between the two policies, within one
    # duplicate per boundary either way
    raw = DEFAULT_TABLE.count(RAW)
    dedup = DEFAULT_TABLE.count(DEDUP)
    assert raw == 2_292_166_198
    assert dedup == 2_292_166_146
    assert raw - dedup == 52  # boundaries where the step divides exactly


def test_enumeration_matches_literal_expansion_on_prefix():
    lines = [(r.start, r.step, r.end) for r in DEFAULT_TABLE.ranges[:3]]
    expect = list(expand_colon_ranges(lines))
    got = list(islice(DEFAULT_TABLE.iter_ids(RAW), len(expect)))
    assert got == expect


def test_dedup_removes_boundary_duplicates_only():
    sub = RangeTable.parse("20:30\n30:10:55\n55:60\n")
    raw = list(sub.iter_ids(RAW))
    dedup = list(sub.iter_ids(DEDUP))
    # 30 is emitted by both first ranges; 55 is not emitted by 30:10:55
    assert raw.count(30) == 2 and raw.count(55) == 1
    assert dedup.count(30) == 1
    assert sorted(set(raw)) == dedup
    assert all(a < b for a, b in zip(dedup, dedup[1:]))


@given(
    st.lists(
        st.tuples(st.integers(1, 5000), st.sampled_from([1, 10]), st.integers(0, 300)),
        min_size=1,
        max_size=5,
    )
)
@settings(max_examples=60)
def test_count_equals_enumeration_on_random_subtables(parts):
    # chain random ranges end-to-start
    ranges = []
    start = parts[0][0]
    for _, step, extent in parts:
        end = start + extent
        ranges.append(IdRange(start, step, end))
        start = end
    table = RangeTable(ranges)
    for policy in (RAW, DEDUP):
        ids = list(table.iter_ids(policy))
        assert len(ids) == table.count(policy)
        assert ids == [table.id_at(i, policy) for i in range(len(ids))]
    assert list(table.iter_ids(DEDUP)) == sorted(set(table.iter_ids(RAW)))


def test_iter_full():
    assert list(iter_full(1, 5)) == [1, 2, 3, 4, 5]
    assert list(iter_full(7, 7)) == [7]
    assert count_full(1, 3_061_014_649) == 3_061_014_649
    with pytest.raises(ValueError):
        iter_full(5, 4)


def test_shard_bounds_and_reassembly():
    assert shard_bounds(10, 2) == [(0, 5), (5, 10)]
    bounds = shard_bounds(11, 3)
    assert bounds == [(0, 4), (4, 8), (8, 11)]
    with pytest.raises(ValueError):
        shard_bounds(10, 0)

    table = RangeTable.parse("20:500\n500:10:777\n777:900\n")
    whole = list(table.iter_ids())
    pieces = [list(iter_shard(table, 4, k)) for k in range(4)]
    assert [i for piece in pieces for i in piece] == whole
    sizes = [len(p) for p in pieces]
    assert max(sizes) - min(sizes) <= 1


def test_shard_counts_balanced_on_full_table():
    total = DEFAULT_TABLE.count(DEDUP)
    bounds = shard_bounds(total, 30)
    sizes = [hi - lo for lo, hi in bounds]
    assert sum(sizes) == total
    assert max(sizes) - min(sizes) <= 1


def test_single_shard_is_identity():
    table = RangeTable.parse("20:100\n")
    assert list(iter_shard(table, 1, 0)) == list(table.iter_ids())


def test_batched():
    batches = list(batched(range(250), 100))
    assert [len(b) for b in batches] == [100, 100, 50]
    assert list(batched(range(100), 100)) == [list(range(100))]
    assert list(batched([], 100)) == []
    with pytest.raises(ValueError):
        list(batched(range(5), 0))
    with pytest.raises(ValueError):
        list(batched(range(5), 101))


def test_table_text_roundtrip(tmp_path):
    text = DEFAULT_TABLE.dumps()
    assert RangeTable.parse(text).ranges == DEFAULT_TABLE.ranges
    custom = RangeTable.parse("# comment\n20:30\n30:10:55  # trailing\n")
    assert [(r.start, r.step, r.end) for r in custom.ranges] == [(20, 1, 30), (30, 10, 55)]


def test_table_validation():
    with pytest.raises(ValueError):
        RangeTable.parse("20:30\n40:50\n")  # not chained
    with pytest.raises(ValueError):
        RangeTable.parse("")
    with pytest.raises(ValueError):
        IdRange(10, 5, 20)  # step not in {1, 10}
    with pytest.raises(ValueError):
        IdRange(0, 1, 20)
    with pytest.raises(ValueError):
        IdRange(1, 1, MAX_TWEET_ID + 1)

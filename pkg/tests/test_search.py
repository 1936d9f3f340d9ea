import hashlib
import random

import pytest

from conftest import build_archive, make_record, random_queries
from tweetvault.mockhose import STOPWORDS_EN
from tweetvault.search import (
    And,
    NotIndexedError,
    Or,
    Phrase,
    ScanOracle,
    Searcher,
    Term,
    TimeRange,
    build_indexes,
    build_partition_index,
    parse_query,
    tokenize,
)
from tweetvault.timeutil import ms


def toy_archive(tmp_path):
    docs = [
        (ms(2008, 5, 1, 10), 100, "i am eating a sandwich now"),
        (ms(2008, 5, 1, 11), 101, "eating my sandwich"),
        (ms(2008, 5, 2, 9), 102, "obama wins a sandwich"),
        (ms(2008, 11, 4, 12), 200, "obama election night"),
        (ms(2009, 2, 10, 8), 300, "sandwich for the win"),
    ]
    records = [make_record(ts, i, text) for ts, i, text in docs]
    return build_archive(records, tmp_path / "archive"), docs


def results(searcher, q, scope=None):
    return [(r.id_str, r.timestamp, r.text) for r in searcher.execute(q, scope)]


def test_toy_postings(tmp_path):
    archive, docs = toy_archive(tmp_path)
    build_indexes(archive, tmp_path / "index")
    s = Searcher(tmp_path / "index", archive)
    got = results(s, Term("sandwich"))
    assert [g[0] for g in got] == ["300", "102", "101", "100"]
    # timestamps strictly decreasing
    stamps = [g[1] for g in got]
    assert stamps == sorted(stamps, reverse=True)
    assert results(s, Term("nosuchword")) == []


def test_phrase_semantics(tmp_path):
    archive, _ = toy_archive(tmp_path)
    build_indexes(archive, tmp_path / "index")
    s = Searcher(tmp_path / "index", archive)
    got = results(s, Phrase(("eating", "a", "sandwich")))
    assert [g[0] for g in got] == ["100"]
    assert results(s, Phrase(("eating", "my", "sandwich")))[0][0] == "101"
    assert results(s, Phrase(("sandwich", "eating"))) == []


def test_and_or_timerange(tmp_path):
    archive, _ = toy_archive(tmp_path)
    build_indexes(archive, tmp_path / "index")
    s = Searcher(tmp_path / "index", archive)
    got = results(s, And((Term("obama"), Term("sandwich"))))
    assert [g[0] for g in got] == ["102"]
    got = results(s, Or((Term("election"), Term("win"))))
    assert [g[0] for g in got] == ["300", "200"]
    q = And((Term("obama"), TimeRange(ms(2008, 11, 1), ms(2008, 11, 5))))
    assert [g[0] for g in results(s, q)] == ["200"]
    # nested Or with a time range matches by union
    q = Or((Term("election"), TimeRange(ms(2009, 1, 1), ms(2009, 12, 31))))
    assert [g[0] for g in results(s, q)] == ["300", "200"]


def test_every_doc_reachable_by_its_tokens(medium_corpus):
    s = medium_corpus.searcher
    sample = random.Random(5).sample(range(len(medium_corpus.oracle)), 50)
    texts = medium_corpus.oracle._texts
    ids = medium_corpus.oracle._ids
    for i in sample:
        toks = tokenize(texts[i])
        assert toks
        found = {r.id_str for r in s.execute(Term(toks[0]))}
        assert str(ids[i]) in found


def test_rebuild_is_byte_identical(tmp_path):
    archive, _ = toy_archive(tmp_path)
    index_dir = tmp_path / "index"

    def digest():
        h = hashlib.sha256()
        for path in sorted(index_dir.rglob("*")):
            if path.is_file():
                h.update(str(path.relative_to(index_dir)).encode())
                h.update(path.read_bytes())
        return h.hexdigest()

    build_indexes(archive, index_dir)
    first = digest()
    build_indexes(archive, index_dir)
    assert digest() == first


def test_not_indexed_partition_is_an_error(tmp_path):
    archive, _ = toy_archive(tmp_path)
    # index only one of the three partitions
    build_partition_index(archive, "2008-05", tmp_path / "index")
    s = Searcher(tmp_path / "index", archive)
    with pytest.raises(NotIndexedError) as exc:
        list(s.execute(Term("sandwich")))
    assert "2008-11" in exc.value.labels and "2009-W07" in exc.value.labels
    # a scope entirely inside the indexed partition works
    got = results(s, Term("sandwich"), (ms(2008, 5, 1), ms(2008, 5, 31)))
    assert len(got) == 3


def test_pruning_opens_only_scoped_partitions(medium_corpus):
    s = Searcher(medium_corpus.index_dir, medium_corpus.archive)
    scope = (ms(2009, 1, 5), ms(2009, 1, 25, 23, 59, 59, 999))
    list(s.execute(parse_query("the"), scope))
    assert 0 < len(s.last_opened) <= 4
    assert set(s.last_opened) <= {"2009-W02", "2009-W03", "2009-W04"}
    # count paths are instrumented the same way
    s.count_total(parse_query("the"), scope)
    assert len(s.last_opened) <= 4
    s.close()


def test_scoped_execution_equals_oracle(medium_corpus):
    s, oracle = medium_corpus.searcher, medium_corpus.oracle
    scope = (ms(2008, 3, 1), ms(2008, 9, 30, 23, 59, 59, 999))
    for qt in ("the", "obama", '"eating a"', "mccain OR palin OR obama"):
        q = parse_query(qt)
        got = results(s, q, scope)
        want = [(r.id_str, r.timestamp, r.text) for r in oracle.search(q, scope)]
        assert got == want


def test_hundred_term_or_equals_oracle(medium_corpus):
    q = parse_query(" OR ".join(STOPWORDS_EN))
    got = results(medium_corpus.searcher, q)
    want = [(r.id_str, r.timestamp, r.text) for r in medium_corpus.oracle.search(q)]
    assert got == want
    # the stop-word disjunction matches nearly every English doc
    assert len(got) > 0.8 * len(medium_corpus.oracle)


def test_count_consistency(medium_corpus):
    s = medium_corpus.searcher
    for qt in ("obama", "the", "mccain OR palin"):
        q = parse_query(qt)
        total = s.count_total(q)
        assert total == len(results(s, q))
        by_week = s.count_by_bucket(q, "week")
        assert sum(by_week.values()) == total
        by_month = s.count_by_bucket(q, "month")
        assert sum(by_month.values()) == total


def test_count_matches_hand_fixture(tmp_path):
    texts = (
        ["pizza time"] * 3
        + ["no match here"] * 2
        + ["pizza pizza pizza"]  # counted once per doc
        + ["more pizza at night"] * 4
    )
    records = [
        make_record(ms(2008, 6, 2) + i * 3_600_000, 500 + i, text)
        for i, text in enumerate(texts)
    ]
    archive = build_archive(records, tmp_path / "archive")
    build_indexes(archive, tmp_path / "index")
    s = Searcher(tmp_path / "index", archive)
    assert s.count_total(Term("pizza")) == 8
    by_day = s.count_by_bucket(Term("pizza"), "day")
    assert by_day == {ms(2008, 6, 2): 8}
    s.close()


def test_limit_and_order(medium_corpus):
    s = medium_corpus.searcher
    q = parse_query("the")
    all_rows = results(s, q)
    limited = [(r.id_str, r.timestamp, r.text) for r in s.execute(q, limit=5)]
    assert limited == all_rows[:5]
    keys = [(r[1], int(r[0])) for r in all_rows]
    assert keys == sorted(keys, reverse=True)
    assert len(set(keys)) == len(keys)


def test_deterministic_output(medium_corpus):
    q = parse_query("watching OR reading")
    a = results(medium_corpus.searcher, q)
    b = results(medium_corpus.searcher, q)
    assert a == b


def test_empty_scope_yields_nothing(medium_corpus):
    s = medium_corpus.searcher
    assert results(s, parse_query("the"), (10, 20)) == []
    assert s.count_by_bucket(parse_query("the"), "week", (10, 20)) == {}


RANDOM_QUERY_SIZES = [(1_000, 120), (10_000, 90)]


@pytest.mark.parametrize("size,n_queries", RANDOM_QUERY_SIZES)
def test_random_queries_equal_oracle(tmp_path_factory, size, n_queries):
    from conftest import synth_archive

    root = tmp_path_factory.mktemp(f"rand{size}")
    archive = synth_archive(root / "archive", size, seed=size)
    build_indexes(archive, root / "index")
    searcher = Searcher(root / "index", archive)
    oracle = ScanOracle(archive)
    vocab = [w for w in STOPWORDS_EN[:30]] + [
        "obama", "watching", "sandwich", "twitter", "music", "pizza"
    ]
    rng = random.Random(size)
    battery = random_queries(oracle, rng, n_queries, vocab, nested_range_p=0.1)
    for q, scope in battery:
        got = [(r.id_str, r.timestamp, r.text) for r in searcher.execute(q, scope)]
        want = [(r.id_str, r.timestamp, r.text) for r in oracle.search(q, scope)]
        assert got == want, f"query {q} scope {scope}"
    searcher.close()

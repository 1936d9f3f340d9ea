import pytest

from tweetvault.search import (
    And,
    Or,
    Phrase,
    QuerySyntaxError,
    Term,
    TimeRange,
    parse_query,
)
from tweetvault.search.query import TS_MAX, TS_MIN, extract_window
from tweetvault.timeutil import ms


def test_single_term_lowered():
    assert parse_query("Obama") == Term("obama")


def test_whitespace_means_and():
    q = parse_query("eating sandwich")
    assert q == And((Term("eating"), Term("sandwich")))


def test_or_keyword_uppercase_only():
    q = parse_query("mccain OR palin")
    assert q == Or((Term("mccain"), Term("palin")))
    # lowercase "or" is an ordinary term, as in the stop-word battery
    q2 = parse_query("one or other")
    assert q2 == And((Term("one"), Term("or"), Term("other")))


def test_quoted_phrase():
    assert parse_query('"eating a sandwich"') == Phrase(("eating", "a", "sandwich"))
    # single-token phrase collapses to a term
    assert parse_query('"obama"') == Term("obama")


def test_word_splitting_into_phrase():
    # a word the tokenizer splits becomes an adjacency constraint
    assert parse_query("don't") == Phrase(("don", "t"))


def test_precedence_and_binds_tighter_than_or():
    q = parse_query("a b OR c d")
    assert q == Or((And((Term("a"), Term("b"))), And((Term("c"), Term("d")))))


def test_parentheses():
    q = parse_query("(a OR b) c")
    assert q == And((Or((Term("a"), Term("b"))), Term("c")))


def test_hundred_term_or():
    text = " OR ".join(f"w{i}" for i in range(100))
    q = parse_query(text)
    assert isinstance(q, Or) and len(q.children) == 100


def test_from_to_atoms():
    q = parse_query("obama from:2008-11-01 to:2008-11-05")
    assert isinstance(q, And)
    ranges = [c for c in q.children if isinstance(c, TimeRange)]
    assert len(ranges) == 2
    assert ranges[0] == TimeRange(ms(2008, 11, 1), TS_MAX)
    assert ranges[1] == TimeRange(TS_MIN, ms(2008, 11, 6) - 1)


def test_from_accepts_datetime_and_epoch():
    q = parse_query("from:2008-11-01T06:30:00Z x")
    tr = q.children[0] if isinstance(q, And) else q
    ranges = [c for c in q.children if isinstance(c, TimeRange)]
    assert ranges[0].t0 == ms(2008, 11, 1, 6, 30)
    q2 = parse_query("from:1225000000000 x")
    ranges2 = [c for c in q2.children if isinstance(c, TimeRange)]
    assert ranges2[0].t0 == 1_225_000_000_000


def test_hashtag_and_mention_terms():
    assert parse_query("#barcamp") == Term("#barcamp")
    assert parse_query("@chris") == Term("@chris")


def test_extract_window():
    q = parse_query("obama from:2008-01-01 to:2008-12-31")
    t0, t1, rest = extract_window(q)
    assert t0 == ms(2008, 1, 1)
    assert t1 == ms(2009, 1, 1) - 1
    assert rest == Term("obama")
    # pure time query
    t0, t1, rest = extract_window(parse_query("from:2008-01-01"))
    assert rest is None and t0 == ms(2008, 1, 1)
    # nested ranges are not hoisted
    q3 = Or((Term("a"), TimeRange(0, 10)))
    assert extract_window(q3) == (TS_MIN, TS_MAX, q3)


def test_syntax_errors():
    for bad in ("", "   ", '"unterminated', "(a OR b", "a )", '""', "!!!", "OR a"):
        with pytest.raises(QuerySyntaxError):
            parse_query(bad)


def test_ast_validation():
    with pytest.raises(QuerySyntaxError):
        Phrase(())
    with pytest.raises(QuerySyntaxError):
        And(())
    with pytest.raises(QuerySyntaxError):
        Or(())
    with pytest.raises(QuerySyntaxError):
        TimeRange(5, 4)

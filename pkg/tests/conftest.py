import pytest

from tweetvault.dehydrator import DehydratedTweet, dehydrate, format_created_at
from tweetvault.mockhose import CorpusSpec, domain_ids, gen_tweet
from tweetvault.search import And, Or, Phrase, ScanOracle, Searcher, Term, TimeRange
from tweetvault.search import build_indexes, tokenize
from tweetvault.store import Archive


def make_record(ts: int, tweet_id: int, text: str, lang: str = "en",
                user_id: int = 42) -> DehydratedTweet:
    """Hand-built dehydrated record with a consistent created_at."""
    return DehydratedTweet(
        created_at=format_created_at(ts),
        id_str=str(tweet_id),
        in_reply_to_status_id_str=None,
        in_reply_to_user_id_str=None,
        lang=lang,
        text=text,
        timestamp=ts,
        user_id_str=str(user_id),
    )


def build_archive(records, root) -> Archive:
    archive = Archive(root)
    for rec in records:
        archive.append(rec)
    archive.flush()
    return archive


def synth_archive(root, n_ids: int, seed: int, existence_rate: float = 1.0) -> Archive:
    """Archive filled from the deterministic corpus, ids spread over the
    whole table so every partition era gets data."""
    spec = CorpusSpec(seed=seed, existence_rate=existence_rate)
    archive = Archive(root)
    for i in domain_ids(spec, n_ids):
        tweet = gen_tweet(i, spec)
        if tweet is not None:
            archive.append(dehydrate(tweet))
    archive.flush()
    return archive


class Corpus:
    def __init__(self, archive: Archive, index_dir, searcher: Searcher,
                 oracle: ScanOracle):
        self.archive = archive
        self.index_dir = index_dir
        self.searcher = searcher
        self.oracle = oracle


@pytest.fixture(scope="session")
def medium_corpus(tmp_path_factory) -> Corpus:
    """20k-doc indexed corpus shared by search/analytics tests (read-only)."""
    root = tmp_path_factory.mktemp("medium")
    archive = synth_archive(root / "archive", 20_000, seed=1234)
    index_dir = root / "index"
    build_indexes(archive, index_dir)
    return Corpus(archive, index_dir, Searcher(index_dir, archive), ScanOracle(archive))


def random_queries(oracle, rng, n, vocab, nested_range_p: float = 0.0):
    """Random query battery: terms (some absent), phrases sampled from real
    doc texts, And/Or trees of depth <= 3, optional nested time ranges, and
    random scopes."""
    queries = []
    texts = oracle._texts
    t_lo, t_hi = oracle._ts[0], oracle._ts[-1]

    def random_scope():
        a = rng.randrange(t_lo, t_hi)
        b = rng.randrange(t_lo, t_hi)
        return (min(a, b), max(a, b))

    def leaf():
        kind = rng.random()
        if kind < nested_range_p:
            return TimeRange(*random_scope())
        if kind < 0.55:
            return Term(rng.choice(vocab))
        if kind < 0.7:
            return Term(f"zz{rng.randrange(100)}")  # almost surely absent
        toks = []
        for _ in range(10):
            toks = tokenize(texts[rng.randrange(len(texts))])
            if len(toks) >= 2:
                break
        if len(toks) < 2:
            return Term(rng.choice(vocab))
        k = rng.randint(2, min(5, len(toks)))
        start = rng.randrange(len(toks) - k + 1)
        return Phrase(tuple(toks[start : start + k]))

    def tree(depth):
        if depth == 0 or rng.random() < 0.4:
            return leaf()
        children = tuple(tree(depth - 1) for _ in range(rng.randint(2, 4)))
        return And(children) if rng.random() < 0.5 else Or(children)

    for _ in range(n):
        q = tree(rng.randint(1, 3))
        scope = random_scope() if rng.random() < 0.4 else None
        queries.append((q, scope))
    return queries

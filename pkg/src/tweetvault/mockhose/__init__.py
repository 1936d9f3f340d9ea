"""Deterministic synthetic tweet corpus.

Stands in for the long-gone lookup endpoint: every candidate id maps,
purely as a function of (seed, id), to either "does not exist" or a fully
hydrated tweet record. Timestamps follow a logarithmic id-to-time curve
so weekly volumes grow exponentially like the real early years did.
About a third of ids resolve to nothing, mirroring deleted, protected
and never-assigned ids; which ids are missing is modeled as uniform,
a choice the data cannot confirm.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Iterator, Mapping, Optional, Sequence, Union

from tweetvault.dehydrator import format_created_at
from tweetvault.idgen import DEFAULT_TABLE, DedupPolicy, RangeTable
from tweetvault.timeutil import ms, parse_time_ms

_M64 = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15

_TAG_EXISTS = 0x45584953
_TAG_USER = 0x55534552
_TAG_TEXT = 0x54455854
_TAG_REPLY = 0x5245504C

# the hundred most common English words; heavily weighted so stop-word
# disjunctions behave like they would on real English text
STOPWORDS_EN = (
    "a", "about", "after", "all", "also", "an", "and", "any", "as", "at",
    "back", "be", "because", "but", "by", "can", "come", "could", "day",
    "do", "even", "first", "for", "from", "get", "give", "go", "good",
    "have", "he", "her", "him", "his", "how", "i", "if", "in", "into",
    "it", "its", "just", "know", "like", "look", "make", "me", "most",
    "my", "new", "no", "not", "now", "of", "on", "one", "only", "or",
    "other", "our", "out", "over", "people", "say", "see", "she", "so",
    "some", "take", "than", "that", "the", "their", "them", "then",
    "there", "these", "they", "think", "this", "time", "to", "two", "up",
    "us", "use", "want", "way", "we", "well", "what", "when", "which",
    "who", "will", "with", "work", "would", "year", "you", "your",
)

_CONTENT_WORDS = (
    "watching", "reading", "looking", "listening", "eating", "playing",
    "working", "going", "waiting", "writing", "thinking", "coding",
    "running", "walking", "singing", "driving", "cooking", "sleeping",
    "talking", "twittering", "tweeting", "blogging", "sandwich", "coffee",
    "lunch", "dinner", "breakfast", "pizza", "beer", "twitter",
    "internet", "music", "movie", "video", "game", "news", "weather",
    "school", "office", "home", "meeting", "airport", "train", "party",
    "concert", "football", "baseball", "superbowl", "obama", "biden",
    "mccain", "palin", "election", "vote", "president", "britney",
    "spears", "justin", "bieber", "hannah", "montana", "american",
    "idol", "iphone", "google", "yahoo", "facebook", "myspace", "flickr",
    "friend", "lol", "haha", "omg", "love", "happy", "tired", "bored",
    "fun", "cool", "awesome", "great", "today", "tonight", "tomorrow",
    "morning", "night", "weekend", "barcamp", "hashtag", "retweet",
    "follow", "friday", "snow", "rain",
)


def _default_vocab() -> tuple[tuple[str, float], ...]:
    pairs = [(w, 500.0 / (i + 5)) for i, w in enumerate(STOPWORDS_EN)]
    pairs += [(w, 40.0 / (i + 10)) for i, w in enumerate(_CONTENT_WORDS)]
    return tuple(pairs)


DEFAULT_VOCAB = _default_vocab()

# rough early-platform language mix; weights sum to 1
DEFAULT_LANG_WEIGHTS: Mapping[str, float] = {
    "en": 0.90, "pt": 0.03, "ja": 0.025, "es": 0.02, "de": 0.01,
    "fr": 0.008, "it": 0.002, "ru": 0.002, "zh": 0.001, "fa": 0.001,
    "tr": 0.0005, "ar": 0.0005,
}

# small per-language word lists; languages without one reuse the English
# vocabulary (romanized usage was common anyway)
LANG_VOCAB: Mapping[str, tuple[str, ...]] = {
    "pt": ("hoje", "bom", "dia", "futebol", "musica", "trabalho", "noite", "amigo"),
    "ja": ("今日", "天気", "仕事", "音楽", "映画", "学校", "電車", "ご飯"),
    "es": ("hola", "hoy", "bueno", "noche", "futbol", "musica", "amigo", "fiesta"),
    "de": ("heute", "gut", "arbeit", "musik", "wetter", "abend", "schule"),
    "fr": ("bonjour", "musique", "travail", "soir", "film", "ami"),
    "it": ("ciao", "oggi", "musica", "lavoro", "sera"),
    "ru": ("сегодня", "музыка", "работа", "вечер", "друг"),
    "zh": ("今天", "音乐", "工作", "朋友"),
    "fa": ("انتخابات", "جنبش", "سبز", "رای", "من", "کجاست", "ایران", "امروز", "خبر"),
    "tr": ("bugün", "müzik", "arkadaş", "akşam"),
    "ar": ("اليوم", "موسيقى", "صديق", "مساء"),
}

# fractions are relative to tweets that carry a URL
DEFAULT_URL_DOMAINS: tuple[tuple[str, float], ...] = (
    ("tinyurl.com", 42.87), ("bit.ly", 29.0), ("is.gd", 1.5),
    ("twurl.nl", 0.9), ("ow.ly", 0.7), ("tr.im", 0.55), ("cli.gs", 0.4),
    ("snipr.com", 0.3), ("short.to", 0.25), ("snipurl.com", 0.2),
    ("migre.me", 0.15), ("mavrev.com", 0.1), ("tiny.cc", 0.1),
    ("snurl.com", 0.08), ("budurl.com", 0.05), ("post.ly", 0.04),
    ("xrl.us", 0.03), ("twitpic.com", 4.0), ("yfrog.com", 1.6),
    ("flickr.com", 1.0), ("mypict.me", 0.4), ("myloc.me", 0.5),
    ("bkite.com", 0.3), ("loopt.us", 0.2), ("digg.com", 0.31),
    ("myspace.com", 0.24), ("youtube.com", 0.18), ("last.fm", 0.12),
    ("blogspot.com", 6.0), ("wordpress.com", 4.0), ("example.com", 3.93),
)

_SCREEN_NAMES = (
    "alice", "bob", "carol", "dave", "emma", "frank", "grace", "henry",
    "irene", "jack", "karen", "leo", "mary", "nick", "olivia", "pete",
    "quinn", "rosa", "sam", "tina", "umar", "vera", "walt", "xena",
    "yuki", "zoe", "astro", "byte", "cosmo", "delta", "echo", "fuzzy",
    "gizmo", "hobbit", "indie", "jazz", "kiwi", "luna", "mango", "ninja",
)

_SLUG_CHARS = "abcdefghijklmnopqrstuvwxyz0123456789"


def _mix64(x: int) -> int:
    x = (x + _GAMMA) & _M64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _M64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _M64
    return x ^ (x >> 31)


class _Rng:
    """Tiny splitmix64 stream keyed by (seed, id, purpose tag)."""

    __slots__ = ("state",)

    def __init__(self, seed: int, tweet_id: int, tag: int):
        self.state = _mix64(_mix64(seed & _M64) ^ _mix64((tweet_id * 0x2545F4914F6CDD1D ^ tag) & _M64))

    def next_u64(self) -> int:
        self.state = (self.state + _GAMMA) & _M64
        return _mix64(self.state)

    def uniform(self) -> float:
        return (self.next_u64() >> 11) * (2.0**-53)

    def randint(self, lo: int, hi: int) -> int:
        return lo + self.next_u64() % (hi - lo + 1)

    def pick(self, cumweights: Sequence[float], total: float) -> int:
        x = self.uniform() * total
        lo, hi = 0, len(cumweights) - 1
        while lo < hi:
            mid = (lo + hi) // 2
            if cumweights[mid] <= x:
                lo = mid + 1
            else:
                hi = mid
        return lo


def _cumulative(weights: Sequence[float]) -> tuple[list[float], float]:
    acc = 0.0
    cum = []
    for w in weights:
        if w <= 0:
            raise ValueError("weights must be positive")
        acc += w
        cum.append(acc)
    return cum, acc


@dataclass(frozen=True)
class CorpusSpec:
    """Everything that determines the synthetic corpus, seed included."""

    seed: int = 20060321
    id_domain: Union[RangeTable, tuple[int, int]] = field(default=DEFAULT_TABLE)
    existence_rate: float = 0.647
    vocab: Sequence[tuple[str, float]] = DEFAULT_VOCAB
    lang_weights: Mapping[str, float] = field(
        default_factory=lambda: dict(DEFAULT_LANG_WEIGHTS)
    )
    t0: int = ms(2006, 3, 21)
    t1: int = ms(2009, 8, 1) - 1
    anchor_id0: int = 20
    anchor_id1: int = 3_061_013_977
    url_rate: float = 0.253
    url_domains: Sequence[tuple[str, float]] = DEFAULT_URL_DOMAINS
    reply_rate: float = 0.2

    def __post_init__(self) -> None:
        if not 0.0 <= self.existence_rate <= 1.0:
            raise ValueError("existence_rate must be in [0, 1]")
        if not 0.0 <= self.url_rate <= 1.0:
            raise ValueError("url_rate must be in [0, 1]")
        if not 0.0 <= self.reply_rate <= 1.0:
            raise ValueError("reply_rate must be in [0, 1]")
        if self.t0 >= self.t1:
            raise ValueError("t0 must precede t1")
        if not 1 <= self.anchor_id0 < self.anchor_id1:
            raise ValueError("anchors must satisfy 1 <= id0 < id1")

    @cached_property
    def _vocab_cum(self) -> tuple[list[str], list[float], float]:
        words = [w for w, _ in self.vocab]
        cum, total = _cumulative([x for _, x in self.vocab])
        return words, cum, total

    @cached_property
    def _lang_cum(self) -> tuple[list[str], list[float], float]:
        codes = list(self.lang_weights)
        cum, total = _cumulative([self.lang_weights[c] for c in codes])
        return codes, cum, total

    @cached_property
    def _domain_cum(self) -> tuple[list[str], list[float], float]:
        names = [d for d, _ in self.url_domains]
        cum, total = _cumulative([x for _, x in self.url_domains])
        return names, cum, total

    @cached_property
    def _time_scale(self) -> float:
        return (self.t1 - self.t0) / math.log(self.anchor_id1 / self.anchor_id0)


def id_to_time(tweet_id: int, spec: CorpusSpec) -> int:
    """Monotone logarithmic id-to-epoch-ms map; ids outside the anchors clamp."""
    if tweet_id <= spec.anchor_id0:
        return spec.t0
    if tweet_id >= spec.anchor_id1:
        return spec.t1
    return spec.t0 + round(spec._time_scale * math.log(tweet_id / spec.anchor_id0))


def is_clamped(tweet_id: int, spec: CorpusSpec) -> bool:
    return not spec.anchor_id0 <= tweet_id <= spec.anchor_id1


def exists(tweet_id: int, spec: CorpusSpec) -> bool:
    return _Rng(spec.seed, tweet_id, _TAG_EXISTS).uniform() < spec.existence_rate


def user_for(tweet_id: int, spec: CorpusSpec) -> tuple[int, str]:
    rng = _Rng(spec.seed, tweet_id, _TAG_USER)
    uid = rng.randint(1_000, 68_000_000)
    name = _SCREEN_NAMES[rng.randint(0, len(_SCREEN_NAMES) - 1)]
    return uid, f"{name}{rng.randint(0, 9999)}"


def _gen_text(tweet_id: int, spec: CorpusSpec) -> tuple[str, str, Optional[str]]:
    """Returns (text, lang, url)."""
    rng = _Rng(spec.seed, tweet_id, _TAG_TEXT)
    codes, lcum, ltotal = spec._lang_cum
    lang = codes[rng.pick(lcum, ltotal)]
    has_url = rng.uniform() < spec.url_rate
    nwords = rng.randint(3, 8 if has_url else 12)
    local = LANG_VOCAB.get(lang)
    if lang == "en" or local is None:
        words, wcum, wtotal = spec._vocab_cum
        picked = [words[rng.pick(wcum, wtotal)] for _ in range(nwords)]
    else:
        picked = [local[rng.randint(0, len(local) - 1)] for _ in range(nwords)]
    url = None
    if has_url:
        names, dcum, dtotal = spec._domain_cum
        domain = names[rng.pick(dcum, dtotal)]
        slug = "".join(
            _SLUG_CHARS[rng.randint(0, len(_SLUG_CHARS) - 1)] for _ in range(6)
        )
        url = f"http://{domain}/{slug}"
        picked.append(url)
    return " ".join(picked), lang, url


def _gen_reply(tweet_id: int, spec: CorpusSpec) -> Optional[int]:
    rng = _Rng(spec.seed, tweet_id, _TAG_REPLY)
    if tweet_id <= spec.anchor_id0 + 1 or rng.uniform() >= spec.reply_rate:
        return None
    for _ in range(20):
        cand = rng.randint(spec.anchor_id0, tweet_id - 1)
        if exists(cand, spec):
            return cand
    return None


def gen_tweet(tweet_id: int, spec: CorpusSpec) -> Optional[dict]:
    """Hydrated record for `tweet_id`, or None when the id resolves to nothing.

    Pure in (seed, id): repeated calls are byte-identical after JSON
    serialization.
    """
    if not exists(tweet_id, spec):
        return None
    created_ms = id_to_time(tweet_id, spec)
    text, lang, url = _gen_text(tweet_id, spec)
    uid, screen_name = user_for(tweet_id, spec)
    urng = _Rng(spec.seed, tweet_id, _TAG_USER ^ 0xF00D)
    reply_to = _gen_reply(tweet_id, spec)
    reply_uid = user_for(reply_to, spec)[0] if reply_to is not None else None
    record = {
        "created_at": format_created_at(created_ms),
        "id": tweet_id,
        "id_str": str(tweet_id),
        "text": text,
        "source": "web",
        "truncated": False,
        "in_reply_to_status_id": reply_to,
        "in_reply_to_status_id_str": str(reply_to) if reply_to is not None else None,
        "in_reply_to_user_id": reply_uid,
        "in_reply_to_user_id_str": str(reply_uid) if reply_uid is not None else None,
        "user": {
            "id": uid,
            "id_str": str(uid),
            "screen_name": screen_name,
            "name": screen_name.capitalize(),
            "location": "",
            "description": "",
            "url": None,
            "protected": False,
            "followers_count": urng.randint(0, 2000),
            "friends_count": urng.randint(0, 1500),
            "listed_count": urng.randint(0, 50),
            "favourites_count": urng.randint(0, 300),
            "statuses_count": urng.randint(1, 20000),
            "geo_enabled": False,
            "verified": False,
            "lang": lang,
            "profile_background_color": "C0DEED",
            "profile_text_color": "333333",
            "default_profile": True,
            "default_profile_image": False,
        },
        "geo": None,
        "coordinates": None,
        "place": None,
        "contributors": None,
        "retweet_count": 0,
        "favorite_count": 0,
        "favorited": False,
        "retweeted": False,
        "is_quote_status": False,
        "lang": lang,
    }
    if url is not None:
        record["entities"] = {
            "hashtags": [],
            "user_mentions": [],
            "urls": [{"url": url, "expanded_url": url}],
        }
    return record


def domain_ids(spec: CorpusSpec, n: int) -> Iterator[int]:
    """n candidate ids spread evenly across the id domain (not all distinct
    for very large n on small domains)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    domain = spec.id_domain
    if isinstance(domain, RangeTable):
        total = domain.count(DedupPolicy.DEDUP)
        if n == 1:
            yield domain.id_at(0)
            return
        step = (total - 1) / (n - 1)
        for k in range(n):
            yield domain.id_at(int(k * step))
    else:
        start, end = domain
        if n == 1:
            yield start
            return
        step = (end - start) / (n - 1)
        for k in range(n):
            yield start + int(k * step)


def load_spec(path: Union[str, Path]) -> CorpusSpec:
    """Build a CorpusSpec from a key=value text file.

    Recognized keys: seed, existence_rate, url_rate, reply_rate, t0, t1,
    anchor_id0, anchor_id1, id_start, id_end, langs (code:weight csv),
    vocab_file (word weight per line). Omitted keys keep their defaults.
    """
    from tweetvault.config import parse_kv_file

    kv = parse_kv_file(path)
    kwargs: dict = {}
    for key in ("seed", "anchor_id0", "anchor_id1"):
        if key in kv:
            kwargs[key] = int(kv[key])
    for key in ("existence_rate", "url_rate", "reply_rate"):
        if key in kv:
            kwargs[key] = float(kv[key])
    if "t0" in kv:
        kwargs["t0"] = parse_time_ms(kv["t0"])
    if "t1" in kv:
        kwargs["t1"] = parse_time_ms(kv["t1"], end_of_day=True)
    if "id_start" in kv or "id_end" in kv:
        kwargs["id_domain"] = (int(kv.get("id_start", 1)), int(kv["id_end"]))
    if "langs" in kv:
        weights = {}
        for item in kv["langs"].split(","):
            code, w = item.split(":")
            weights[code.strip()] = float(w)
        kwargs["lang_weights"] = weights
    if "vocab_file" in kv:
        vocab = []
        for line in Path(kv["vocab_file"]).read_text(encoding="utf-8").splitlines():
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            word, _, weight = line.partition(" ")
            vocab.append((word, float(weight) if weight.strip() else 1.0))
        kwargs["vocab"] = tuple(vocab)
    return CorpusSpec(**kwargs)

"""Boolean query AST and the query-string grammar.

Grammar: whitespace means AND, the uppercase keyword OR means disjunction
(lowercase "or" stays an ordinary term), double quotes delimit phrases,
parentheses group, and `from:`/`to:` atoms add time bounds (ISO dates or
datetimes, or raw epoch milliseconds). Bare words are run through the
tokenizer; a word that splits into several tokens becomes a phrase.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Union

from tweetvault._kernels import tokenize
from tweetvault.timeutil import parse_time_ms

TS_MIN = -(2**62)
TS_MAX = 2**62


class QuerySyntaxError(ValueError):
    pass


@dataclass(frozen=True)
class Term:
    token: str


@dataclass(frozen=True)
class Phrase:
    tokens: tuple[str, ...]

    def __post_init__(self) -> None:
        if not self.tokens:
            raise QuerySyntaxError("empty phrase")


@dataclass(frozen=True)
class And:
    children: tuple["Query", ...]

    def __post_init__(self) -> None:
        if not self.children:
            raise QuerySyntaxError("AND of nothing")


@dataclass(frozen=True)
class Or:
    children: tuple["Query", ...]

    def __post_init__(self) -> None:
        if not self.children:
            raise QuerySyntaxError("OR of nothing")


@dataclass(frozen=True)
class TimeRange:
    t0: int
    t1: int  # inclusive

    def __post_init__(self) -> None:
        if self.t0 > self.t1:
            raise QuerySyntaxError("time range start after end")


Query = Union[Term, Phrase, And, Or, TimeRange]


def _lex(text: str) -> Iterator[tuple[str, str]]:
    i, n = 0, len(text)
    while i < n:
        ch = text[i]
        if ch.isspace():
            i += 1
        elif ch == '"':
            end = text.find('"', i + 1)
            if end < 0:
                raise QuerySyntaxError("unterminated phrase quote")
            yield "QUOTED", text[i + 1 : end]
            i = end + 1
        elif ch == "(":
            yield "LPAREN", ch
            i += 1
        elif ch == ")":
            yield "RPAREN", ch
            i += 1
        else:
            j = i
            while j < n and not text[j].isspace() and text[j] not in '"()':
                j += 1
            yield "WORD", text[i:j]
            i = j


class _Parser:
    def __init__(self, text: str):
        self.tokens = list(_lex(text))
        self.pos = 0

    def peek(self):
        return self.tokens[self.pos] if self.pos < len(self.tokens) else (None, None)

    def take(self):
        tok = self.peek()
        self.pos += 1
        return tok

    def parse(self) -> Query:
        q = self.parse_or()
        if self.pos != len(self.tokens):
            raise QuerySyntaxError(f"unexpected {self.tokens[self.pos][1]!r}")
        return q

    def parse_or(self) -> Query:
        branches = [self.parse_and()]
        while self.peek() == ("WORD", "OR"):
            self.take()
            branches.append(self.parse_and())
        return branches[0] if len(branches) == 1 else Or(tuple(branches))

    def parse_and(self) -> Query:
        atoms = []
        while True:
            kind, value = self.peek()
            if kind is None or kind == "RPAREN" or (kind, value) == ("WORD", "OR"):
                break
            atoms.append(self.parse_atom())
        if not atoms:
            raise QuerySyntaxError("expected a term")
        return atoms[0] if len(atoms) == 1 else And(tuple(atoms))

    def parse_atom(self) -> Query:
        kind, value = self.take()
        if kind == "LPAREN":
            inner = self.parse_or()
            if self.take()[0] != "RPAREN":
                raise QuerySyntaxError("missing closing parenthesis")
            return inner
        if kind == "QUOTED":
            tokens = tokenize(value)
            if not tokens:
                raise QuerySyntaxError(f"phrase {value!r} has no searchable tokens")
            return Term(tokens[0]) if len(tokens) == 1 else Phrase(tuple(tokens))
        if kind == "WORD":
            lower = value.lower()
            if lower.startswith("from:") or lower.startswith("to:"):
                is_from = lower.startswith("from:")
                raw = value[5:] if is_from else value[3:]
                try:
                    t = parse_time_ms(raw, end_of_day=not is_from)
                except ValueError as e:
                    raise QuerySyntaxError(str(e)) from None
                return TimeRange(t, TS_MAX) if is_from else TimeRange(TS_MIN, t)
            tokens = tokenize(value)
            if not tokens:
                raise QuerySyntaxError(f"term {value!r} has no searchable tokens")
            return Term(tokens[0]) if len(tokens) == 1 else Phrase(tuple(tokens))
        raise QuerySyntaxError(f"unexpected {value!r}")


def parse_query(text: str) -> Query:
    """Parse a query string; raises QuerySyntaxError on malformed input."""
    if not text.strip():
        raise QuerySyntaxError("empty query")
    return _Parser(text).parse()


def extract_window(q: Query) -> tuple[int, int, Union[Query, None]]:
    """Split root-level time bounds from the boolean part of a query.

    Returns (t0, t1, rest) where rest is None for pure time queries.
    Only the root and a root And are inspected; nested TimeRange nodes
    keep their general filter semantics.
    """
    if isinstance(q, TimeRange):
        return q.t0, q.t1, None
    if isinstance(q, And):
        t0, t1 = TS_MIN, TS_MAX
        rest = []
        for child in q.children:
            if isinstance(child, TimeRange):
                t0 = max(t0, child.t0)
                t1 = min(t1, child.t1)
            else:
                rest.append(child)
        if not rest:
            return t0, t1, None
        return t0, t1, rest[0] if len(rest) == 1 else And(tuple(rest))
    return TS_MIN, TS_MAX, q

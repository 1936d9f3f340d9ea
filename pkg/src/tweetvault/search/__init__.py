"""Partitioned positional-index search: AST, parser, indexer, executor."""

from tweetvault._kernels import tokenize
from tweetvault.search.bruteforce import ScanOracle
from tweetvault.search.indexer import build_indexes, build_partition_index
from tweetvault.search.query import (
    And,
    Or,
    Phrase,
    Query,
    QuerySyntaxError,
    Term,
    TimeRange,
    parse_query,
)
from tweetvault.search.reader import (
    NotIndexedError,
    PartitionIndex,
    Searcher,
    SearchResult,
)

__all__ = [
    "And",
    "NotIndexedError",
    "Or",
    "PartitionIndex",
    "Phrase",
    "Query",
    "QuerySyntaxError",
    "ScanOracle",
    "SearchResult",
    "Searcher",
    "Term",
    "TimeRange",
    "build_indexes",
    "build_partition_index",
    "parse_query",
    "tokenize",
]
